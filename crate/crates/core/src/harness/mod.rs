//! Batch driver behind the `metlab` binary.
//!
//! Each subcommand validates its whole configuration before doing any work
//! and returns the bytes to write plus a verdict. Exit codes: 0 success,
//! 1 failed assertion, 2 usage or configuration error. Every CSV starts with
//! `# schema=1`; rationals are printed as `num/den`.

mod checks;
mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use checks::{group_suite, htype_defect, lemma_sweep, CheckOutcome, LemmaRow, LEMMA_CSV_HEADER};
pub use config::{default_table, parse_assignments, parse_override, ExperimentConfig, RegionKind, StructureKind, KEYS};

use crate::counterexamples::{
    ball_example_with, fit_ladder, knapp_example_with, moment_example_with, predicted_exponent_exact, run_ladder,
    scaling_example_with, stein_growth, ExampleInstance, Family, LadderRow, LADDER_CSV_HEADER,
};
use crate::error::{Error, Result};
use crate::geometry::{certify_point, sample_points, PhaseModel, PointCertificate, SampleKind, GEOMETRY_CSV_HEADER};
use crate::group::{smallness_margin, MetivierStructure, ThetaGrid};
use crate::region::{averaging_region, export_region, fmt_q, maximal_region, ExportFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "metlab", version, about = "Spherical maximal functions on Heisenberg and Métivier groups: checks and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "csv|svg")]
    pub format: Option<String>,
    /// Override a configuration key.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Group law, dilation, H-type and smallness-margin checks.
    GroupCheck,
    /// Rank, curvature and fold certificates at seeded chart points.
    Geometry,
    /// A δ ladder for one lower-bound family and its fitted slope.
    Counterexample,
    /// Exact (1/p, 1/q) regions as CSV or SVG.
    Region,
    /// The skew-matrix inverse-norm formula against brute force.
    LemmaCheck,
    /// List the configuration keys and their defaults.
    Keys,
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: Vec<u8>,
    pub passed: bool,
    /// Lines for stderr.
    pub messages: Vec<String>,
}

/// Applies the config file, `--set` overrides and the dedicated flags, in that order.
pub fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut table = default_table();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_assignments(&text, &mut table)?;
    }
    for s in &cli.set {
        parse_override(s, &mut table)?;
    }
    if let Some(seed) = cli.seed {
        table.insert("seed".into(), seed.to_string());
    }
    if let Some(f) = &cli.format {
        table.insert("format".into(), f.clone());
    }
    if let Some(o) = &cli.out {
        table.insert("out".into(), o.display().to_string());
    }
    ExperimentConfig::from_table(table)
}

/// Runs one subcommand on a validated configuration.
pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Outcome> {
    match command {
        Command::GroupCheck => cmd_group_check(config),
        Command::Geometry => cmd_geometry(config),
        Command::Counterexample => cmd_counterexample(config),
        Command::Region => cmd_region(config),
        Command::LemmaCheck => cmd_lemma_check(config),
        Command::Keys => Ok(Outcome { output: keys_listing().into_bytes(), passed: true, messages: vec![] }),
    }
}

fn keys_listing() -> String {
    let mut out = String::new();
    for (k, v, d) in KEYS {
        let _ = writeln!(out, "{k:<22} {:<10} {d}", if v.is_empty() { "(auto)" } else { v });
    }
    out
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Degenerate(_) => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs, writes output, and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("metlab: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match execute(cli.command, &config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("metlab: {e}");
            return exit_code_for(&e);
        }
    };
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    let written = match &config.out {
        Some(path) => std::fs::write(path, &outcome.output).map_err(|e| format!("cannot write {path}: {e}")),
        None => std::io::stdout().write_all(&outcome.output).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("metlab: {e}");
        return EXIT_USAGE;
    }
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn csv_only(config: &ExperimentConfig, what: &str) -> Result<()> {
    if config.format != ExportFormat::Csv {
        return Err(Error::Config(format!("{what} only writes csv")));
    }
    Ok(())
}

fn margin_line(s: &MetivierStructure) -> Result<(f64, bool, String)> {
    let m = smallness_margin(s, &ThetaGrid::default_for(s.m()))?;
    let line = format!("# smallness_margin={:.9e} nondegenerate={} certified={}", m.margin, m.nondegenerate, m.certified());
    Ok((m.margin, m.certified(), line))
}

pub fn cmd_group_check(config: &ExperimentConfig) -> Result<Outcome> {
    csv_only(config, "group-check")?;
    let s = config.structure()?;
    let (margin, _, mline) = margin_line(&s)?;
    let mut checks = group_suite(&s, config.samples, config.seed, config.tolerance)?;
    if config.structure_kind == StructureKind::Quaternionic {
        checks.push(htype_defect(&s, config.samples.min(100), config.seed ^ 0x4854, config.tolerance));
    }
    let mut out = String::from("# schema=1\n");
    let _ = writeln!(out, "# structure={}", config.structure_label());
    let _ = writeln!(out, "# seed={}", config.seed);
    out.push_str(&mline);
    out.push('\n');
    out.push_str("check,samples,max_error,tolerance,status,worst_case\n");
    let mut messages = Vec::new();
    for c in &checks {
        let status = if c.passed() { "pass" } else { "fail" };
        let worst = if c.passed() { String::new() } else { c.worst.clone() };
        let _ = writeln!(out, "{},{},{:.3e},{:.3e},{status},{worst}", c.name, c.samples, c.max_error, c.tolerance);
        messages.push(format!("{}: {status} (max error {:.3e})", c.name, c.max_error));
    }
    if !(margin > 0.0) {
        messages.push(format!("warning: smallness margin {margin:.6e} is not positive; the curvature hypothesis fails"));
    }
    Ok(Outcome { output: out.into_bytes(), passed: checks.iter().all(CheckOutcome::passed), messages })
}

/// Certificates for `counts = (generic, diagonal, fold)` seeded points,
/// computed in parallel and returned in sampling order.
pub fn geometry_certificates(pm: &PhaseModel, counts: (usize, usize, usize), seed: u64) -> Vec<(SampleKind, usize, Result<PointCertificate>)> {
    let mut jobs = Vec::new();
    let kinds = [(SampleKind::Generic, counts.0, 0u64), (SampleKind::Diagonal, counts.1, 2), (SampleKind::Fold, counts.2, 1)];
    for (kind, count, salt) in kinds {
        for (i, p) in sample_points(pm, kind, count, seed.wrapping_mul(3).wrapping_add(salt)).into_iter().enumerate() {
            jobs.push((kind, i, p));
        }
    }
    jobs.into_par_iter().map(|(kind, i, p)| (kind, i, certify_point(pm, kind, i, &p))).collect()
}

/// Why a certificate falls short, if it does.
pub fn certificate_deviation(c: &PointCertificate, d: usize) -> Option<String> {
    let expected = c.kind.expected_ranks(d);
    if c.ranks() != expected {
        return Some(format!("ranks {:?}, expected {:?}", c.ranks(), expected));
    }
    if c.kind.is_fold() {
        if c.det_spatial.abs() > 1e-10 {
            return Some(format!("det ΠΞ_y = {:.3e} on the fold", c.det_spatial));
        }
    } else {
        let rel = (c.det_spatial - c.det_reduced).abs() / c.det_spatial.abs().max(f64::MIN_POSITIVE);
        if rel > 1e-8 {
            return Some(format!("determinant identity off by {rel:.3e}"));
        }
        if let (Some(cv), Some(cb)) = (c.c_value, c.c_bound) {
            if cv.abs() < cb - 1e-8 {
                return Some(format!("|c| = {:.6e} below the bound {cb:.6e}", cv.abs()));
            }
        }
    }
    None
}

pub fn cmd_geometry(config: &ExperimentConfig) -> Result<Outcome> {
    csv_only(config, "geometry")?;
    let s = config.structure()?;
    let d = s.d();
    let (_, certified, mline) = margin_line(&s)?;
    let pm = PhaseModel::new(s);
    let results = geometry_certificates(&pm, (config.points, config.diagonal_points, config.fold_points), config.seed);
    let mut out = String::from("# schema=1\n");
    let _ = writeln!(out, "# structure={}", config.structure_label());
    let _ = writeln!(out, "# seed={}", config.seed);
    out.push_str(&mline);
    out.push('\n');
    out.push_str(GEOMETRY_CSV_HEADER);
    out.push('\n');
    let mut deviations = Vec::new();
    let (mut min_xi, mut min_curv) = (f64::INFINITY, f64::INFINITY);
    for (kind, i, r) in &results {
        match r {
            Ok(c) => {
                out.push_str(&c.csv_row());
                out.push('\n');
                min_xi = min_xi.min(c.sv_min_xi);
                min_curv = min_curv.min(c.sv_min_curv);
                if let Some(why) = certificate_deviation(c, d) {
                    deviations.push(format!("{} {i}: {why}", kind.as_str()));
                }
            }
            Err(e) => deviations.push(format!("{} {i}: {e}", kind.as_str())),
        }
    }
    for dv in &deviations {
        let _ = writeln!(out, "# deviation {dv}");
    }
    let status = if !certified {
        "uncertified"
    } else if deviations.is_empty() {
        "certified"
    } else {
        "failed"
    };
    let _ = writeln!(
        out,
        "# summary generic={} diagonal={} fold={} min_sv_xi={min_xi:.9e} min_sv_curv={min_curv:.9e} deviations={} status={status}",
        config.points,
        config.diagonal_points,
        config.fold_points,
        deviations.len()
    );
    let mut messages = vec![format!("geometry: {status}, {} deviation(s)", deviations.len())];
    if !certified {
        messages.push("warning: smallness margin not positive; rank deviations are reported but not asserted".into());
    }
    Ok(Outcome { output: out.into_bytes(), passed: !certified || deviations.is_empty(), messages })
}

/// The instance builder for the configured family.
pub fn family_builder(config: &ExperimentConfig) -> Result<Box<dyn Fn(f64) -> Result<ExampleInstance> + Sync>> {
    let s = config.structure()?;
    Ok(match config.family {
        Family::Ball => {
            let p = config.ball.clone();
            Box::new(move |d| ball_example_with(&s, d, &p))
        }
        Family::Scaling => {
            let p = config.scaling.clone();
            Box::new(move |d| scaling_example_with(&s, d, &p))
        }
        Family::Knapp => {
            let p = config.knapp.clone();
            Box::new(move |d| knapp_example_with(&s, d, &p))
        }
        Family::MomentCurve => {
            if (s.n(), s.m()) != (1, 1) {
                return Err(Error::Config(format!("the moment family lives on the first Heisenberg group; set n = 1 (got n={}, m={})", s.n(), s.m())));
            }
            let p = config.moment.clone();
            Box::new(move |d| moment_example_with(d, &p))
        }
        Family::SteinDensity => return Err(Error::Unsupported("the stein family has no δ ladder".into())),
    })
}

pub fn cmd_counterexample(config: &ExperimentConfig) -> Result<Outcome> {
    if config.family == Family::SteinDensity {
        return cmd_stein(config);
    }
    let s = config.structure()?;
    let predicted = predicted_exponent_exact(config.family, s.n() as u32, s.m() as u32, config.p.reciprocal(), config.q.reciprocal())?;
    let build = family_builder(config)?;
    let deltas = crate::counterexamples::dyadic_ladder(config.delta_range.0, config.delta_range.1);
    if deltas.len() < 3 {
        return Err(Error::Config("delta ladder needs at least 3 levels".into()));
    }
    // construction is cheap and checks every precondition up front
    for &d in &deltas {
        build(d).map_err(|e| Error::Config(format!("delta={d}: {e}")))?;
    }
    let rows = run_ladder(&build, &deltas, &config.p, &config.q)?;
    let fit = fit_ladder(&rows)?;
    let pred = crate::counterexamples::q_to_f64(&predicted);
    let pass = (fit.slope - pred).abs() <= config.slope_tolerance && fit.r_squared >= config.min_r2;
    let verdict = if pass { "pass" } else { "fail" };
    let min_mean = rows.iter().map(|r| r.region_mean).fold(f64::INFINITY, f64::min);
    let summary = format!(
        "# fit slope={:.6} intercept={:.6} r_squared={:.6} predicted={} tolerance={} min_r2={} min_region_mean={min_mean:.6e} verdict={verdict}",
        fit.slope,
        fit.intercept,
        fit.r_squared,
        fmt_q(&predicted),
        config.slope_tolerance,
        config.min_r2
    );
    let messages = vec![format!("{}: slope {:.4} vs predicted {} (r² {:.5}): {verdict}", config.family, fit.slope, fmt_q(&predicted), fit.r_squared)];
    let output = match config.format {
        ExportFormat::Csv => {
            let mut out = String::from("# schema=1\n");
            let _ = writeln!(out, "# structure={}", config.structure_label());
            out.push_str(LADDER_CSV_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out.push_str(&summary);
            out.push('\n');
            out
        }
        ExportFormat::Svg => ladder_svg(&rows, fit.slope, fit.intercept, pred),
    };
    Ok(Outcome { output: output.into_bytes(), passed: pass, messages })
}

/// Log–log plot of a ladder with the fitted and predicted lines.
fn ladder_svg(rows: &[LadderRow], slope: f64, intercept: f64, predicted: f64) -> String {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta.ln(), r.ratio.ln())).collect();
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if y1 - y0 < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let (w, h, pad) = (480.0, 360.0, 40.0);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * pad, h - 2.0 * pad);
    let poly: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, poly.join(" "));
    // predicted slope drawn through the fitted centroid
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64, pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64);
    let line = |s: f64, b: f64| format!("{:.2},{:.2} {:.2},{:.2}", sx(x0), sy(s * x0 + b), sx(x1), sy(s * x1 + b));
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="4 3"/>"#, line(slope, intercept));
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-dasharray="2 2"/>"#, line(predicted, my - predicted * mx));
    let _ = writeln!(out, r#"<text x="{pad}" y="{}" font-size="12">log delta</text>"#, h - 10.0);
    let _ = writeln!(out, r#"<text x="4" y="{}" font-size="12">log ratio</text>"#, pad - 10.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">slope {slope:.3}, predicted {predicted:.3}</text>"#, w / 2.0, pad - 10.0);
    out.push_str("</svg>\n");
    out
}

fn cmd_stein(config: &ExperimentConfig) -> Result<Outcome> {
    csv_only(config, "the stein diagnostic")?;
    let s = config.structure()?;
    if (s.n(), s.m()) != (1, 1) {
        return Err(Error::Config(format!("the stein diagnostic runs on n = m = 1, got n={}, m={}", s.n(), s.m())));
    }
    let js: Vec<u32> = (config.stein_levels.0..=config.stein_levels.1).collect();
    let diag = stein_growth(&s, config.stein_alpha, &js).map_err(|e| match e {
        Error::Degenerate(_) => e,
        other => Error::Config(other.to_string()),
    })?;
    let target = 1.0 - config.stein_alpha;
    let pass = diag.increasing && (diag.growth_exponent - target).abs() <= config.stein_tolerance;
    let verdict = if pass { "pass" } else { "fail" };
    let mut out = String::from("# schema=1\n");
    let _ = writeln!(out, "# structure={}", config.structure_label());
    let _ = writeln!(out, "# family=stein alpha={} probe=(3/2,0,0) t=3/2", config.stein_alpha);
    out.push_str("j,eps,value,increment,norm\n");
    let mut prev: Option<f64> = None;
    for r in &diag.rows {
        let inc = prev.map(|p| format!("{:.9e}", r.value - p)).unwrap_or_default();
        let _ = writeln!(out, "{},{:.9e},{:.12e},{inc},{:.12e}", r.j, r.eps, r.value, r.norm);
        prev = Some(r.value);
    }
    let _ = writeln!(
        out,
        "# growth_exponent={:.6} predicted={:.6} increasing={} r_squared={:.6} tolerance={} verdict={verdict}",
        diag.growth_exponent, target, diag.increasing, diag.increment_fit.r_squared, config.stein_tolerance
    );
    let messages = vec![format!("stein: growth exponent {:.4} vs {target:.4}, increasing={}: {verdict}", diag.growth_exponent, diag.increasing)];
    Ok(Outcome { output: out.into_bytes(), passed: pass, messages })
}

pub fn cmd_region(config: &ExperimentConfig) -> Result<Outcome> {
    let s = config.structure()?;
    let (n, m) = (s.n() as u32, s.m() as u32);
    let region = match config.region {
        RegionKind::Maximal => maximal_region(n, m),
        RegionKind::Averaging => averaging_region(n, m),
    }
    .map_err(|e| Error::Config(e.to_string()))?;
    Ok(Outcome { output: export_region(&region, config.format), passed: true, messages: vec![] })
}

pub fn cmd_lemma_check(config: &ExperimentConfig) -> Result<Outcome> {
    csv_only(config, "lemma-check")?;
    let rows = lemma_sweep(config.lemma_samples, config.lemma_dims, config.seed)?;
    let mut out = String::from("# schema=1\n");
    let _ = writeln!(out, "# seed={} dims={}..{}", config.seed, config.lemma_dims.0, config.lemma_dims.1);
    out.push_str(LEMMA_CSV_HEADER);
    out.push('\n');
    let mut worst: f64 = 0.0;
    let mut odd_ok = true;
    for r in &rows {
        out.push_str(&r.csv_row());
        out.push('\n');
        worst = worst.max(if r.rel_error.is_nan() { f64::INFINITY } else { r.rel_error });
        odd_ok &= r.odd_branch_exact();
    }
    let pass = worst <= config.lemma_tolerance && odd_ok;
    let verdict = if pass { "pass" } else { "fail" };
    let _ = writeln!(out, "# summary max_rel_error={worst:.3e} tolerance={} odd_branch_exact={odd_ok} verdict={verdict}", config.lemma_tolerance);
    Ok(Outcome { output: out.into_bytes(), passed: pass, messages: vec![format!("lemma-check: max relative error {worst:.3e}: {verdict}")] })
}
