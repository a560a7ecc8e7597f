//! Driver behind the `dtnmap` binary: config in, CSV and JSON out.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dtn_core::dtn::{global_relation_residual, solve_dtn_with, NeumannTrace};
use dtn_core::kernel::{assemble_kernel_matrix, KernelContext, Normalisation};
use dtn_core::oracle::exponent_mass;
use dtn_core::quad::DampedOscillatoryRule;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use config::{Mode, Run, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance on the manufactured-trace error in `verify`.
pub const TRACE_TOL: f64 = 1e-3;
/// Tolerance on `|J_closed - J_direct| / |J_closed|` in `verify`.
pub const KERNEL_TOL: f64 = 1e-6;
/// Tolerance on the global-relation residual with exact traces, relative to the largest term.
pub const RELATION_TOL: f64 = 1e-6;
/// Solved-trace residual bound, in units of the solution error scale.
pub const SOLVED_RELATION_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] dtn_core::Error),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(e) if !e.is_numerical() => 1,
            CliError::Core(_) | CliError::VerificationFailed(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io { .. } => "IoError",
            CliError::Core(e) => e.kind(),
            CliError::VerificationFailed(_) => "VerificationFailed",
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub mode: &'static str,
    pub curve: &'static str,
    pub initially_decreasing: bool,
    pub final_time: f64,
    pub intervals: usize,
    pub grading: f64,
    pub quad_tol: f64,
    pub tail_tol: f64,
}

impl Metadata {
    fn csv_header(&self) -> String {
        format!(
            "# {} {}\n# config_sha256 {}\n# mode {}\n# curve {}\n# initially_decreasing {}\n# final_time {:.16e}\n# intervals {}\n# grading {:.16e}\n# quad_tol {:.16e}\n# tail_tol {:.16e}\n",
            self.tool,
            self.version,
            self.config_sha256,
            self.mode,
            self.curve,
            self.initially_decreasing,
            self.final_time,
            self.intervals,
            self.grading,
            self.quad_tol,
            self.tail_tol
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Criterion {
    fn new(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metadata: Metadata,
    pub criteria: Vec<Criterion>,
    /// Relative L∞ error of `f₁` against the exact trace, manufactured data only.
    pub max_rel_error: Option<f64>,
    pub volterra_residual: f64,
    pub pass: bool,
}

/// Paths written by a run.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

fn write(path: PathBuf, contents: &str, out: &mut Artifacts) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    out.files.push(path);
    Ok(())
}

fn e16(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads, validates and executes one configuration.
pub fn run(mode: Mode, config_path: &Path, output_dir: Option<&Path>) -> Result<Artifacts, CliError> {
    let bytes = fs::read(config_path).map_err(|source| CliError::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Config("config is not UTF-8".into()))?;
    let cfg = RunConfig::parse(text)?;
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(CliError::Config(format!(
                "config declares mode {} but the {} subcommand was given",
                m.name(),
                mode.name()
            )));
        }
    }
    let run = cfg.validate()?;
    let dir = output_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let meta = Metadata {
        tool: "dtnmap",
        version: VERSION,
        config_sha256: hex::encode(Sha256::digest(&bytes)),
        mode: mode.name(),
        curve: run.curve.kind_name(),
        initially_decreasing: run.curve.initially_decreasing(),
        final_time: run.curve.final_time(),
        intervals: run.grid.intervals(),
        grading: cfg.grid.grading,
        quad_tol: run.tolerances.quad_tol,
        tail_tol: run.tolerances.tail_tol,
    };
    let mut out = Artifacts::default();
    match mode {
        Mode::Solve => solve(&run, &meta, &dir, &mut out)?,
        Mode::KernelDump => kernel_dump(&run, &meta, &dir, &mut out)?,
        Mode::Residual => residual(&run, &meta, &dir, &mut out)?,
        Mode::Verify => verify(&run, meta, &dir, &mut out)?,
    }
    Ok(out)
}

fn solve(run: &Run, meta: &Metadata, dir: &Path, out: &mut Artifacts) -> Result<(), CliError> {
    let sol = solve_dtn_with(&run.problem, &run.grid, Normalisation::Contour)?;
    let mut csv = meta.csv_header();
    csv.push_str("t,re_f1,im_f1,abs_f1\n");
    for (t, v) in run.grid.nodes().iter().zip(sol.trace.f1.iter()) {
        writeln!(csv, "{},{},{},{}", e16(*t), e16(v.re), e16(v.im), e16(v.norm())).unwrap();
    }
    write(dir.join("f1.csv"), &csv, out)
}

fn kernel_dump(run: &Run, meta: &Metadata, dir: &Path, out: &mut Artifacts) -> Result<(), CliError> {
    let kernel = assemble_kernel_matrix(&run.grid, &KernelContext::new(run.curve.clone()));
    let mut csv = meta.csv_header();
    csv.push_str("# j(s,t) = sqrt(t-s) J(s,t)\n");
    csv.push_str("n,m,s,t,re_j,im_j,abs_j\n");
    for (n, m, s, t, j) in kernel.entries() {
        writeln!(
            csv,
            "{n},{m},{},{},{},{},{}",
            e16(s),
            e16(t),
            e16(j.re),
            e16(j.im),
            e16(j.norm())
        )
        .unwrap();
    }
    write(dir.join("kernel.csv"), &csv, out)
}

fn needs_manufactured(run: &Run, mode: &str) -> Result<dtn_core::dtn::ManufacturedSolution, CliError> {
    run.manufactured.ok_or_else(|| {
        CliError::Config(format!(
            "{mode} needs the final-time profile, so the data must be manufactured"
        ))
    })
}

fn residual(run: &Run, meta: &Metadata, dir: &Path, out: &mut Artifacts) -> Result<(), CliError> {
    let sol = needs_manufactured(run, "residual")?;
    let trace = solve_dtn_with(&run.problem, &run.grid, Normalisation::Contour)?.trace;
    let fin = sol.profile(run.curve.final_time());
    let mut csv = meta.csv_header();
    csv.push_str("k_re,k_im,neumann_abs,dirichlet_abs,initial_abs,final_abs,re_residual,im_residual,abs_residual,relative_residual\n");
    for &k in &run.ks {
        let r = global_relation_residual(&run.problem, &trace, &fin, k)?;
        let row = [
            k.re,
            k.im,
            r.neumann.norm(),
            r.dirichlet.norm(),
            r.initial.norm(),
            r.final_.norm(),
            r.residual.re,
            r.residual.im,
            r.residual.norm(),
            r.relative_residual(),
        ];
        let row: Vec<String> = row.iter().map(|x| e16(*x)).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write(dir.join("residuals.csv"), &csv, out)
}

fn kernel_check(run: &Run) -> Result<f64, CliError> {
    let ctx = KernelContext::new(run.curve.clone());
    let big_t = run.curve.final_time();
    let rule = DampedOscillatoryRule::default();
    let mut worst = 0.0f64;
    for (a, b) in [(0.25, 0.75), (0.0, 1.0), (0.6, 0.61)] {
        let (s, t) = (a * big_t, b * big_t);
        let closed = ctx.j_closed(s, t)?;
        let direct = ctx.j_direct(s, t, &rule)?;
        worst = worst.max((closed - direct).norm() / closed.norm());
    }
    Ok(worst)
}

fn verify(run: &Run, meta: Metadata, dir: &Path, out: &mut Artifacts) -> Result<(), CliError> {
    let sol = solve_dtn_with(&run.problem, &run.grid, Normalisation::Contour)?;
    let mut criteria = vec![Criterion::new("kernel_oracle", kernel_check(run)?, KERNEL_TOL)];
    let mut max_rel_error = None;
    if let Some(m) = run.manufactured {
        let exact = m.traces(&run.curve, &run.grid).f1;
        let err = sol.trace.f1.rel_linf_error(&exact);
        max_rel_error = Some(err);
        criteria.push(Criterion::new("manufactured_trace", err, TRACE_TOL));
        let abs_err = sol
            .trace
            .f1
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let exact = NeumannTrace::new(run.grid.clone(), exact)?;
        let fin = m.profile(run.curve.final_time());
        let (mut rel, mut ratio) = (0.0f64, 0.0f64);
        for &k in &run.ks {
            rel = rel.max(global_relation_residual(&run.problem, &exact, &fin, k)?.relative_residual());
            let r: Complex64 = global_relation_residual(&run.problem, &sol.trace, &fin, k)?.residual;
            ratio = ratio.max(r.norm() / (abs_err * exponent_mass(&run.curve, k)));
        }
        criteria.push(Criterion::new("global_relation_exact", rel, RELATION_TOL));
        criteria.push(Criterion::new(
            "global_relation_solved",
            ratio,
            SOLVED_RELATION_FACTOR,
        ));
    }
    let pass = criteria.iter().all(|c| c.pass);
    let report = Report {
        metadata: meta,
        criteria,
        max_rel_error,
        volterra_residual: sol.volterra_residual,
        pass,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serialises");
    json.push('\n');
    write(dir.join("report.json"), &json, out)?;
    if !pass {
        let failed: Vec<&str> = report
            .criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect();
        return Err(CliError::VerificationFailed(failed.join(", ")));
    }
    Ok(())
}
