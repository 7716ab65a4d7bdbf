//! Command-line flags, the optional TOML config file, and their merge into a
//! fully resolved [`RunConfig`]. Flags win over the file, the file wins over
//! the problem presets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gjf_spectral::gjf::FracOrders;
use gjf_spectral::oracle::{ProblemSpec, Variant};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(
    name = "gjf-spectral",
    version,
    about = "Space-time GJF spectral solver experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Solve one problem and report its error norms.
    Solve(RunArgs),
    /// Convergence sweep over M and/or N lists.
    Sweep(RunArgs),
    /// Solve the viscosity problem for a list of eps values.
    Viscosity(RunArgs),
    /// Appendix constant checks.
    Check(RunArgs),
    /// Regenerate the data behind every figure.
    Tables(RunArgs),
}

impl CommandArgs {
    pub fn split(self) -> (Command, RunArgs) {
        match self {
            CommandArgs::Solve(a) => (Command::Solve, a),
            CommandArgs::Sweep(a) => (Command::Sweep, a),
            CommandArgs::Viscosity(a) => (Command::Viscosity, a),
            CommandArgs::Check(a) => (Command::Check, a),
            CommandArgs::Tables(a) => (Command::Tables, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Viscosity,
    Check,
    Tables,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Viscosity => "viscosity",
            Command::Check => "check",
            Command::Tables => "tables",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemName {
    Tp1,
    Tp2,
    Tp3,
    Custom,
}

impl ProblemName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Tp1 => "tp1",
            ProblemName::Tp2 => "tp2",
            ProblemName::Tp3 => "tp3",
            ProblemName::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// `start:step:end` or comma-separated
    #[arg(long = "M-list")]
    pub m_list: Option<String>,
    #[arg(long = "N-list")]
    pub n_list: Option<String>,
    #[arg(long = "eps-list")]
    pub eps_list: Option<String>,
    #[arg(long = "quad-size")]
    pub quad_size: Option<usize>,
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plots: bool,
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    problem: ProblemSection,
    #[serde(default)]
    resolution: ResolutionSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    name: Option<ProblemName>,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    mu: Option<f64>,
    eps: Option<f64>,
    #[serde(rename = "T")]
    horizon: Option<f64>,
    eta: Option<f64>,
    theta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ListValue {
    Text(String),
    Numbers(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolutionSection {
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M_list")]
    m_list: Option<ListValue>,
    #[serde(rename = "N_list")]
    n_list: Option<ListValue>,
    eps_list: Option<ListValue>,
    quad_size: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    plots: Option<bool>,
    timestamp: Option<bool>,
}

/// Errors while resolving a configuration; all map to the usage exit code.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{flag}: {detail}")]
    Flag { flag: &'static str, detail: String },
    #[error("config file {path}: {detail}")]
    File { path: PathBuf, detail: String },
    #[error("parameter out of range: {0}")]
    Range(String),
}

fn flag_err(flag: &'static str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Flag {
        flag,
        detail: detail.into(),
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem_name: ProblemName,
    pub problem: ProblemSpec,
    pub m: usize,
    pub n: usize,
    pub m_list: Option<Vec<usize>>,
    pub n_list: Option<Vec<usize>>,
    pub eps_list: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
    pub quad_size_override: Option<usize>,
    pub timestamp: bool,
}

pub const DEFAULT_M: usize = 20;
pub const DEFAULT_N: usize = 20;

/// Parse a list given as `start:step:end` or `a,b,c`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty list".into());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{text}` must look like start:step:end"));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number"))
        };
        let (start, step, end) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || end.is_nan() || step <= 0.0 || end < start {
            return Err(format!("range `{text}` needs step > 0 and end >= start"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        if count > 100_000 {
            return Err(format!("range `{text}` is too long"));
        }
        // rounding keeps 0:0.2:1 at 0.6 rather than 0.6000000000000001
        Ok((0..=count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect())
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{s}` is not a number"))
            })
            .collect()
    }
}

fn to_sizes(values: Vec<f64>, flag: &'static str) -> Result<Vec<usize>, ConfigError> {
    values
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= 4096.0 {
                Ok(v as usize)
            } else {
                Err(flag_err(flag, format!("{v} is not a positive integer")))
            }
        })
        .collect()
}

fn list_from(value: ListValue) -> Result<Vec<f64>, String> {
    match value {
        ListValue::Text(s) => parse_list(&s),
        ListValue::Numbers(v) if v.is_empty() => Err("empty list".into()),
        ListValue::Numbers(v) => Ok(v),
    }
}

fn load_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    toml::from_str(&text).map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

fn preset(name: ProblemName) -> ProblemSpec {
    match name {
        ProblemName::Tp1 | ProblemName::Custom => ProblemSpec::tp1(),
        ProblemName::Tp2 => ProblemSpec::tp2(),
        ProblemName::Tp3 => ProblemSpec::tp3(0.0).expect("valid preset"),
    }
}

/// Merge flags, an optional file and the presets.
pub fn resolve(command: Command, args: RunArgs) -> Result<RunConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let p = &file.problem;
    let default_name = if command == Command::Viscosity {
        ProblemName::Tp3
    } else {
        ProblemName::Tp1
    };
    let problem_name = args.problem.or(p.name).unwrap_or(default_name);
    let base = preset(problem_name);
    let o = base.orders;
    let pick =
        |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
    let orders = FracOrders {
        alpha: pick(args.alpha, p.alpha, o.alpha),
        beta: pick(args.beta, p.beta, o.beta),
        gamma_v: pick(args.gamma, p.gamma, o.gamma_v),
        mu: pick(args.mu, p.mu, o.mu),
        eps: pick(args.eps, p.eps, o.eps),
        horizon: pick(args.horizon, p.horizon, o.horizon),
    };
    orders
        .validate()
        .map_err(|e| ConfigError::Range(e.to_string()))?;
    let variant = match problem_name {
        ProblemName::Tp2 => Variant::TP2,
        ProblemName::Tp3 => Variant::TP3,
        ProblemName::Tp1 | ProblemName::Custom => Variant::TP1,
    };
    let problem = ProblemSpec::new(
        orders,
        pick(args.eta, p.eta, base.eta),
        pick(args.theta, p.theta, base.theta),
        variant,
    )
    .map_err(|e| ConfigError::Range(e.to_string()))?;

    let r = file.resolution;
    let m = args.m.or(r.m).unwrap_or(DEFAULT_M);
    let n = args.n.or(r.n).unwrap_or(DEFAULT_N);
    if m < 2 {
        return Err(flag_err("--M", format!("{m} must be at least 2")));
    }
    if n < 1 {
        return Err(flag_err("--N", format!("{n} must be at least 1")));
    }
    let list = |flag_val: Option<String>,
                file_val: Option<ListValue>,
                flag: &'static str|
     -> Result<Option<Vec<f64>>, ConfigError> {
        match (flag_val, file_val) {
            (Some(s), _) => parse_list(&s).map(Some).map_err(|e| flag_err(flag, e)),
            (None, Some(v)) => list_from(v).map(Some).map_err(|e| flag_err(flag, e)),
            (None, None) => Ok(None),
        }
    };
    let m_list = list(args.m_list, r.m_list, "--M-list")?
        .map(|v| to_sizes(v, "--M-list"))
        .transpose()?;
    let n_list = list(args.n_list, r.n_list, "--N-list")?
        .map(|v| to_sizes(v, "--N-list"))
        .transpose()?;
    if m_list.as_ref().is_some_and(|l| l.contains(&1)) {
        return Err(flag_err("--M-list", "entries must be at least 2"));
    }
    let eps_list = list(args.eps_list, r.eps_list, "--eps-list")?;
    if let Some(list) = &eps_list {
        for &eps in list {
            orders
                .with_eps(eps)
                .map_err(|e| ConfigError::Range(e.to_string()))?;
        }
    }
    let quad_size_override = args.quad_size.or(r.quad_size);
    if quad_size_override.is_some_and(|q| q < 2) {
        return Err(flag_err("--quad-size", "must be at least 2"));
    }

    match command {
        Command::Sweep if m_list.is_none() && n_list.is_none() => {
            return Err(flag_err("--M-list", "sweep needs --M-list and/or --N-list"));
        }
        Command::Viscosity if problem.variant != Variant::TP3 => {
            return Err(flag_err("--problem", "the viscosity study runs on tp3"));
        }
        _ => {}
    }

    let out = file.output;
    Ok(RunConfig {
        command,
        problem_name,
        problem,
        m,
        n,
        m_list,
        n_list,
        eps_list,
        output_dir: args.out.or(out.dir).unwrap_or_else(|| PathBuf::from("out")),
        emit_plots: args.plots || out.plots.unwrap_or(false),
        quad_size_override,
        timestamp: !args.no_timestamp && out.timestamp.unwrap_or(true),
    })
}

impl RunConfig {
    /// Stable one-line rendering of everything that affects results.
    pub fn canonical(&self) -> String {
        let o = &self.problem.orders;
        let mut s = format!(
            "command={} problem={} alpha={} beta={} gamma={} mu={} eps={} T={} eta={} theta={} M={} N={}",
            self.command.name(),
            self.problem_name.as_str(),
            o.alpha,
            o.beta,
            o.gamma_v,
            o.mu,
            o.eps,
            o.horizon,
            self.problem.eta,
            self.problem.theta,
            self.m,
            self.n
        );
        let join = |v: &[String]| v.join(",");
        if let Some(l) = &self.m_list {
            let _ = write!(
                s,
                " M_list={}",
                join(&l.iter().map(|v| v.to_string()).collect::<Vec<_>>())
            );
        }
        if let Some(l) = &self.n_list {
            let _ = write!(
                s,
                " N_list={}",
                join(&l.iter().map(|v| v.to_string()).collect::<Vec<_>>())
            );
        }
        if let Some(l) = &self.eps_list {
            let _ = write!(
                s,
                " eps_list={}",
                join(&l.iter().map(|v| v.to_string()).collect::<Vec<_>>())
            );
        }
        if let Some(q) = self.quad_size_override {
            let _ = write!(s, " quad_size={q}");
        }
        s
    }

    /// First twelve hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}
