//! CSV and SVG writers. Every file opens with `#` metadata lines followed by
//! one CSV header row.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use gjf_spectral::analysis::{AppendixReport, Axis, ConvergenceTable, FitModel, ViscosityRecord};
use nalgebra::DMatrix;

use crate::config::RunConfig;

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn metadata_header(cfg: &RunConfig) -> String {
    let mut s = format!(
        "# gjf-spectral {}\n# config: {}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.canonical()
    );
    if cfg.timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(s, "# timestamp: {secs}");
    }
    s
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_csv(cfg: &RunConfig, name: &str, columns: &str, rows: &str) -> Result<PathBuf> {
    let body = format!("{}{columns}\n{rows}", metadata_header(cfg));
    write_file(&cfg.output_dir, name, &body)
}

pub fn sweep_rows(table: &ConvergenceTable) -> String {
    let mut s = String::new();
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{},{}", r.m, r.n, r.norm, fmt_float(r.error));
    }
    s
}

pub const SWEEP_COLUMNS: &str = "M,N,norm_id,error";
pub const FIT_COLUMNS: &str =
    "norm_id,axis,fixed,semilog_slope,semilog_r2,loglog_slope,loglog_r2,best";
pub const VISCOSITY_COLUMNS: &str = "eps,x,t,u";
pub const CHECK_COLUMNS: &str = "check_id,params,status";

pub fn fit_rows(table: &ConvergenceTable) -> String {
    let mut s = String::new();
    for f in &table.fits {
        let axis = match f.axis {
            Axis::M => "M",
            Axis::N => "N",
        };
        let best = match f.fit.best {
            FitModel::Exponential => "exponential",
            FitModel::Algebraic => "algebraic",
        };
        let _ = writeln!(
            s,
            "{},{axis},{},{},{},{},{},{best}",
            f.norm,
            f.fixed,
            fmt_float(f.fit.semilog_slope),
            fmt_float(f.fit.semilog_r2),
            fmt_float(f.fit.loglog_slope),
            fmt_float(f.fit.loglog_r2),
        );
    }
    s
}

pub fn viscosity_rows(records: &[ViscosityRecord]) -> String {
    let mut s = String::new();
    for rec in records {
        let eps = fmt_float(rec.eps);
        for (i, x) in rec.xs.iter().enumerate() {
            let x = fmt_float(*x);
            for (j, t) in rec.ts.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{eps},{x},{},{}",
                    fmt_float(*t),
                    fmt_float(rec.values[(i, j)])
                );
            }
        }
    }
    s
}

pub fn check_rows(report: &AppendixReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let status = if c.passed { "pass" } else { "fail" };
        let _ = writeln!(s, "{},{},{status}", c.id, c.params);
    }
    s
}

pub fn svg_name(cfg: &RunConfig, tag: &str) -> String {
    format!("{}_{tag}_{}.svg", cfg.command.name(), cfg.hash())
}

pub fn write_svg(cfg: &RunConfig, tag: &str, svg: &str) -> Result<PathBuf> {
    write_file(&cfg.output_dir, &svg_name(cfg, tag), svg)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Semilog convergence plot: one polyline per `(norm, fixed)` line of the sweep.
pub fn convergence_svg(table: &ConvergenceTable, title: &str) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let mut lines: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    for f in &table.fits {
        let pts = table.line(f.norm, f.axis, f.fixed);
        let axis = if f.axis == Axis::M { "M" } else { "N" };
        let other = if f.axis == Axis::M { "N" } else { "M" };
        lines.push((format!("{} vs {axis} ({other}={})", f.norm, f.fixed), pts));
    }
    let positive = |e: f64| e > 0.0 && e.is_finite();
    let all: Vec<(usize, f64)> = lines
        .iter()
        .flat_map(|(_, p)| p.iter().copied())
        .filter(|p| positive(p.1))
        .collect();
    let mut svg = svg_open(w, h, title);
    if all.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let xmin = all.iter().map(|p| p.0).min().unwrap_or(0) as f64;
    let xmax = (all.iter().map(|p| p.0).max().unwrap_or(1) as f64).max(xmin + 1.0);
    let ly: Vec<f64> = all.iter().map(|p| p.1.log10()).collect();
    let ymin = ly.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let ymax = ly
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil()
        .max(ymin + 1.0);
    let sx = |x: f64| pad + (x - xmin) / (xmax - xmin) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - ymin) / (ymax - ymin) * (h - 2.0 * pad);
    let _ = writeln!(
        svg,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let mut y = ymin;
    while y <= ymax {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">1e{}</text>"#,
            pad - 4.0,
            sy(y) + 4.0,
            y as i64
        );
        y += ((ymax - ymin) / 8.0).ceil().max(1.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
        pad,
        h - pad + 16.0,
        xmin,
        w - pad,
        h - pad + 16.0,
        xmax
    );
    for (k, (label, pts)) in lines.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|p| positive(p.1))
            .map(|&(x, e)| format!("{:.2},{:.2}", sx(x as f64), sy(e.log10())))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" fill="{color}">{}</text>"#,
            pad + 6.0,
            pad + 14.0 + 12.0 * k as f64,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Heat maps of sampled fields side by side, sharing one colour scale.
pub fn heatmap_svg(panels: &[(String, &DMatrix<f64>)], title: &str) -> String {
    const CELLS: usize = 50;
    let (cell, pad) = (4.0, 30.0);
    let side = CELLS as f64 * cell;
    let w = pad + panels.len() as f64 * (side + pad);
    let h = side + 2.0 * pad + 10.0;
    let mut svg = svg_open(w, h, title);
    let lo = panels
        .iter()
        .flat_map(|p| p.1.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let hi = panels
        .iter()
        .flat_map(|p| p.1.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    for (k, (label, values)) in panels.iter().enumerate() {
        let x0 = pad + k as f64 * (side + pad);
        let (nx, nt) = values.shape();
        let _ = writeln!(
            svg,
            r#"<text x="{x0:.1}" y="{:.1}" font-size="11">{}</text>"#,
            pad - 6.0,
            escape(label)
        );
        for a in 0..CELLS.min(nx) {
            let i = a * (nx - 1) / (CELLS.min(nx) - 1).max(1);
            for b in 0..CELLS.min(nt) {
                let j = b * (nt - 1) / (CELLS.min(nt) - 1).max(1);
                let v = (values[(i, j)] - lo) / span;
                // time runs upward
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.1}" y="{:.1}" width="{cell}" height="{cell}" fill="{}"/>"#,
                    x0 + a as f64 * cell,
                    pad + side - (b + 1) as f64 * cell,
                    colour(v)
                );
            }
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{pad}" y="{:.1}" font-size="11">x across, t up; range [{:.3e}, {:.3e}]</text>"#,
        h - 8.0,
        lo,
        hi
    );
    svg.push_str("</svg>\n");
    svg
}

fn svg_open(w: f64, h: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Blue to white to red.
fn colour(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let (r, g, b) = if v < 0.5 {
        let s = v / 0.5;
        (40.0 + 215.0 * s, 80.0 + 175.0 * s, 255.0)
    } else {
        let s = (v - 0.5) / 0.5;
        (255.0, 255.0 - 200.0 * s, 255.0 - 215.0 * s)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}
