mod config;
mod output;

use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::Parser;
use gjf_spectral::analysis::{
    appendix_checks_reference, default_error_quad, evaluate_grid, l2_error, sobolev_seminorm_error,
    solve_manufactured, sweep_entry, viscosity_record, ConvergenceTable, Grid, NormId, Seminorm,
    ViscosityRecord,
};
use gjf_spectral::oracle::{ProblemSpec, SeparableField};
use rayon::prelude::*;

use config::{Cli, Command, ProblemName, RunConfig};
use output::fmt_float;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CHECK: u8 = 4;

enum Failure {
    Usage(String),
    Numerical(String),
    Io(anyhow::Error),
    Checks(usize),
}

impl From<gjf_spectral::Error> for Failure {
    fn from(e: gjf_spectral::Error) -> Self {
        match e {
            gjf_spectral::Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    let cfg = match config::resolve(command, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match pool.install(|| run(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
        Err(Failure::Checks(n)) => {
            eprintln!("{n} appendix check(s) failed");
            ExitCode::from(EXIT_CHECK)
        }
    }
}

/// Worker pool sized by `GJF_SPECTRAL_THREADS` when set.
fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("GJF_SPECTRAL_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                anyhow!("GJF_SPECTRAL_THREADS must be a positive integer, got `{v}`")
            })?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn run(cfg: &RunConfig) -> Run<String> {
    match cfg.command {
        Command::Solve => run_solve(cfg),
        Command::Sweep => {
            let m_list = cfg.m_list.clone().unwrap_or_else(|| vec![cfg.m]);
            let n_list = cfg.n_list.clone().unwrap_or_else(|| vec![cfg.n]);
            let table = sweep(
                cfg,
                &cfg.problem,
                &m_list,
                &n_list,
                &report_norms(&cfg.problem),
            )?;
            let tag = cfg.problem_name.as_str();
            write_sweep(cfg, tag, &table)?;
            let best = table
                .rows
                .iter()
                .filter(|r| r.norm == NormId::L2)
                .map(|r| r.error)
                .fold(f64::INFINITY, f64::min);
            Ok(format!(
                "sweep {tag}: {} solves, {} rows, smallest l2 error {best:.3e}",
                m_list.len() * n_list.len(),
                table.rows.len()
            ))
        }
        Command::Viscosity => {
            let eps_list = cfg.eps_list.clone().unwrap_or_else(default_eps_list);
            let records = viscosity(cfg, &cfg.problem, &eps_list)?;
            write_viscosity(cfg, cfg.problem_name.as_str(), &records)?;
            let mut s = format!(
                "viscosity {}: {} eps values",
                cfg.problem_name.as_str(),
                records.len()
            );
            for r in &records {
                let _ = write!(s, "; eps={} max={:.3e}", r.eps, r.max_value);
            }
            Ok(s)
        }
        Command::Check => {
            let (passed, total) = run_checks(cfg)?;
            Ok(format!("check: {passed}/{total} passed"))
        }
        Command::Tables => run_tables(cfg),
    }
}

fn default_eps_list() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
}

/// L2 plus the time-regularity and space-regularity seminorms, each unweighted and weighted.
fn report_norms(spec: &ProblemSpec) -> Vec<NormId> {
    let o = &spec.orders;
    let mut norms = vec![NormId::L2];
    for weighted in [false, true] {
        norms.extend((0..3).map(|l| NormId::Semi(Seminorm::time(o, l, weighted))));
        norms.extend((1..3).map(|k| NormId::Semi(Seminorm::space(o, k, weighted))));
    }
    norms
}

fn run_solve(cfg: &RunConfig) -> Run<String> {
    let spec = &cfg.problem;
    let (u, sol) = solve_manufactured(spec, cfg.m, cfg.n, cfg.quad_size_override)?;
    let exact = SeparableField::exact(spec)?;
    let eq = default_error_quad(cfg.m, cfg.n);
    let l2 = l2_error(&u, &|x, t| exact.value(x, t), eq)?;
    let mut rows = format!("{},{},l2,{}\n", cfg.m, cfg.n, fmt_float(l2));
    for id in report_norms(spec).into_iter().skip(1) {
        if let NormId::Semi(s) = id {
            let e = sobolev_seminorm_error(&u, spec, s, eq)?;
            let _ = writeln!(rows, "{},{},{id},{}", cfg.m, cfg.n, fmt_float(e));
        }
    }
    let tag = cfg.problem_name.as_str();
    output::write_csv(
        cfg,
        &format!("solve_{tag}.csv"),
        output::SWEEP_COLUMNS,
        &rows,
    )?;
    if cfg.emit_plots {
        let (xs, ts) = Grid::FIGURE.points(spec.orders.horizon);
        let values = evaluate_grid(&u, 0.0, 0.0, &xs, &ts)?;
        let svg = output::heatmap_svg(
            &[(format!("u_L, M={} N={}", cfg.m, cfg.n), &values)],
            "numerical solution",
        );
        output::write_svg(cfg, tag, &svg)?;
    }
    Ok(format!(
        "solve {tag}: M={} N={} l2 error {l2:.3e}, condition {:.3e}, residual {:.3e}",
        cfg.m, cfg.n, sol.condition, sol.residual
    ))
}

/// Parallel over `(M, N)` pairs; rows come back in list order.
fn sweep(
    cfg: &RunConfig,
    spec: &ProblemSpec,
    m_list: &[usize],
    n_list: &[usize],
    norms: &[NormId],
) -> Run<ConvergenceTable> {
    let pairs: Vec<(usize, usize)> = m_list
        .iter()
        .flat_map(|&m| n_list.iter().map(move |&n| (m, n)))
        .collect();
    let entries = pairs
        .par_iter()
        .map(|&(m, n)| sweep_entry(spec, m, n, norms, cfg.quad_size_override))
        .collect::<gjf_spectral::Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_rows(
        entries.into_iter().flatten().collect(),
        norms,
    ))
}

fn write_sweep(cfg: &RunConfig, tag: &str, table: &ConvergenceTable) -> Run<()> {
    output::write_csv(
        cfg,
        &format!("sweep_{tag}.csv"),
        output::SWEEP_COLUMNS,
        &output::sweep_rows(table),
    )?;
    output::write_csv(
        cfg,
        &format!("sweep_{tag}_fits.csv"),
        output::FIT_COLUMNS,
        &output::fit_rows(table),
    )?;
    if cfg.emit_plots {
        output::write_svg(
            cfg,
            tag,
            &output::convergence_svg(table, &format!("convergence, {tag}")),
        )?;
    }
    Ok(())
}

fn viscosity(cfg: &RunConfig, spec: &ProblemSpec, eps_list: &[f64]) -> Run<Vec<ViscosityRecord>> {
    Ok(eps_list
        .par_iter()
        .map(|&eps| viscosity_record(spec, eps, cfg.m, cfg.n, Grid::FIGURE))
        .collect::<gjf_spectral::Result<Vec<_>>>()?)
}

fn write_viscosity(cfg: &RunConfig, tag: &str, records: &[ViscosityRecord]) -> Run<()> {
    output::write_csv(
        cfg,
        &format!("viscosity_{tag}.csv"),
        output::VISCOSITY_COLUMNS,
        &output::viscosity_rows(records),
    )?;
    if cfg.emit_plots {
        let panels: Vec<(String, &nalgebra::DMatrix<f64>)> = records
            .iter()
            .map(|r| (format!("eps = {}", r.eps), &r.values))
            .collect();
        output::write_svg(cfg, tag, &output::heatmap_svg(&panels, "viscosity study"))?;
    }
    Ok(())
}

/// Writes the check CSV; `Failure::Checks` when any family fails.
fn run_checks(cfg: &RunConfig) -> Run<(usize, usize)> {
    let report = appendix_checks_reference()?;
    output::write_csv(
        cfg,
        "check_appendix.csv",
        output::CHECK_COLUMNS,
        &output::check_rows(&report),
    )?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        log::error!(
            "{} ({}) failed in {} of {} cases",
            c.id,
            c.params,
            c.failures,
            c.cases
        );
    }
    if !report.all_passed() {
        return Err(Failure::Checks(report.failures()));
    }
    Ok((report.checks.len(), report.checks.len()))
}

/// Data behind every figure: the TP1 grid sweep, the TP2 regularity
/// sweeps, the TP3 viscosity study and the appendix checks.
fn run_tables(cfg: &RunConfig) -> Run<String> {
    let default_range: Vec<usize> = (4..=20).collect();
    let m_list = cfg.m_list.clone().unwrap_or_else(|| default_range.clone());
    let n_list = cfg.n_list.clone().unwrap_or_else(|| default_range.clone());
    let m_top = *m_list.iter().max().unwrap_or(&cfg.m);
    let n_top = *n_list.iter().max().unwrap_or(&cfg.n);

    let tp1 = ProblemSpec::tp1();
    let grid = sweep(cfg, &tp1, &m_list, &n_list, &[NormId::L2])?;
    write_sweep(cfg, ProblemName::Tp1.as_str(), &grid)?;

    let tp2 = ProblemSpec::tp2();
    let o = tp2.orders;
    let mut norms_l: Vec<NormId> = Vec::new();
    let mut norms_k: Vec<NormId> = Vec::new();
    for weighted in [false, true] {
        norms_l.extend((0..3).map(|l| NormId::Semi(Seminorm::time(&o, l, weighted))));
        norms_k.extend((0..3).map(|k| NormId::Semi(Seminorm::space(&o, k, weighted))));
    }
    let time_study = sweep(cfg, &tp2, &[m_top], &n_list, &norms_l)?;
    write_sweep(cfg, "tp2_time", &time_study)?;
    let space_study = sweep(cfg, &tp2, &m_list, &[n_top], &norms_k)?;
    write_sweep(cfg, "tp2_space", &space_study)?;

    let tp3 = ProblemSpec::tp3(0.0)?;
    let eps_list = cfg.eps_list.clone().unwrap_or_else(default_eps_list);
    let records = viscosity(cfg, &tp3, &eps_list)?;
    write_viscosity(cfg, ProblemName::Tp3.as_str(), &records)?;

    let (passed, total) = run_checks(cfg)?;
    Ok(format!(
        "tables: {} tp1 solves, {} tp2 solves, {} viscosity runs, checks {passed}/{total} passed",
        m_list.len() * n_list.len(),
        m_list.len() + n_list.len(),
        records.len()
    ))
}
