//! `riemann-gluer <construct|diagnose|baseline2d|spectral-test>`.
//!
//! Exit codes: 0 when every invariant holds, 1 when one fails (the report is
//! still written), 2 on a configuration error.

pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::assembly::{assemble, export_artifacts, residual_report, write_report, Failure, RunReport};
use crate::battery::{self, Check};
use crate::error::{GluerError, Result};
use crate::geometry::normal_graph::fit_slope;
use crate::geometry::ScaleParameters;
use crate::matcher::{MatchConfig, Matcher};
use crate::neck::solve::neck_ball_scale;
use crate::planar::solve::planar_ball_scale;

pub use config::{ConfigLayer, Epsilon, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "riemann-gluer", version, about = "Periodic Riemann-type minimal hypersurfaces by gluing catenoidal necks to planar ends")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the gluing problem, assemble one period, export surface.ply, fields.csv and report.json
    Construct(Flags),
    /// Linear-theory battery: Jacobi fields, decay fits, the P table, injectivity exponents
    Diagnose(Flags),
    /// Classical Riemann examples in R^3: conservation law and curvature convergence
    Baseline2d(Flags),
    /// Battery of the spherical harmonics module
    SpectralTest(Flags),
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON config file with the keys n, epsilon, J_max, cylinder_ht, planar_nsigma, theta_nodes, inner_tol, outer_tol, R_out, out_dir, mu, parallel; flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Dimension n >= 3 [default: 3]
    #[arg(long)]
    pub n: Option<usize>,
    /// Neck parameter, or a comma-separated sweep such as 1e-2,1e-3,1e-4 [default: 1e-3]
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    /// Spherical-harmonic truncation [default: 12]
    #[arg(long = "j-max", value_name = "J_MAX")]
    pub j_max: Option<usize>,
    /// Target t-spacing of the neck grid [default: 0.04]
    #[arg(long)]
    pub cylinder_ht: Option<f64>,
    /// Planar mesh cells in sigma, even [default: 96]
    #[arg(long)]
    pub planar_nsigma: Option<usize>,
    /// Polar-angle quadrature nodes [default: 48]
    #[arg(long)]
    pub theta_nodes: Option<usize>,
    /// Inner Picard tolerance for both pieces [default: 1e-16 neck, 1e-15 planar]
    #[arg(long)]
    pub inner_tol: Option<f64>,
    /// Outer stopping tolerance in units of eps r_eps^2 [default: 1e-9]
    #[arg(long)]
    pub outer_tol: Option<f64>,
    /// Outer radius of a truncated planar domain; accepted and ignored, the planar grid reaches infinity
    #[arg(long = "r-out", value_name = "R_OUT")]
    pub r_out: Option<f64>,
    /// Output directory [default: $RIEMANN_GLUER_OUT, else riemann-gluer-out]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// baseline2d: comma-separated mu values [default: 0,1]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub mu: Option<Vec<f64>>,
    /// Run the members of an epsilon sweep concurrently
    #[arg(long)]
    pub parallel: bool,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            n: self.n,
            epsilon: self.epsilon.clone().map(Epsilon::Sweep),
            j_max: self.j_max,
            cylinder_ht: self.cylinder_ht,
            planar_nsigma: self.planar_nsigma,
            theta_nodes: self.theta_nodes,
            inner_tol: self.inner_tol,
            outer_tol: self.outer_tol,
            r_out: self.r_out,
            out_dir: self.out_dir.clone(),
            mu: self.mu.clone(),
            parallel: self.parallel.then_some(true),
        }
    }

    pub fn resolve(&self, env_out: Option<PathBuf>) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => ConfigLayer::from_file(p).map_err(|e| match e {
                GluerError::Io { path, source } => GluerError::Config { field: "config".into(), reason: format!("{}: {source}", path.display()) },
                e => e,
            })?,
            None => ConfigLayer::default(),
        };
        RunConfig::resolve(file.overridden_by(self.layer()), env_out)
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var_os(config::OUT_ENV).map(PathBuf::from))
}

pub fn run_with_env<I, T>(args: I, env_out: Option<PathBuf>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (flags, name) = match &cli.command {
        Command::Construct(f) => (f, "construct"),
        Command::Diagnose(f) => (f, "diagnose"),
        Command::Baseline2d(f) => (f, "baseline2d"),
        Command::SpectralTest(f) => (f, "spectral-test"),
    };
    let cfg = match flags.resolve(env_out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("riemann-gluer: {e}");
            return 2;
        }
    };
    if cfg.r_out.is_some() {
        eprintln!("riemann-gluer: R_out is ignored, the planar grid covers the whole exterior");
    }
    let result = match cli.command {
        Command::Construct(_) => construct(&cfg),
        _ => run_battery(&cfg, name),
    };
    match result {
        Ok(failures) if failures.is_empty() => 0,
        Ok(failures) => {
            for f in &failures {
                eprintln!("FAIL {}: {} (measured {:e}, threshold {:e})", f.module, f.invariant, f.measured, f.threshold);
            }
            1
        }
        Err(e) => {
            eprintln!("riemann-gluer: {e}");
            1
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtn_eigenvalues: Option<Vec<f64>>,
    pub failures: Vec<Failure>,
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{} {}: {} = {:.6e} (target {:e}, tolerance {:e})", if c.pass { "PASS" } else { "FAIL" }, c.module, c.invariant, c.measured, c.target, c.tolerance);
    }
}

fn run_battery(cfg: &RunConfig, command: &str) -> Result<Vec<Failure>> {
    let n = cfg.n;
    let mut checks = Vec::new();
    let mut dtn = None;
    match command {
        "diagnose" => {
            checks.push(battery::catenoid_minimality(n)?);
            checks.extend(battery::jacobi_kernel(n)?);
            checks.extend(battery::poisson_decay(n)?);
            checks.extend(battery::injectivity(n, cfg.j_max)?);
            checks.extend(battery::nonlinear_structure(n)?);
            let table = battery::dtn_spectrum(n, cfg.j_max)?;
            println!("P eigenvalues, n = {n}: {:?}", table.iter().map(|(e, _)| (e * 1e8).round() / 1e8).collect::<Vec<_>>());
            dtn = Some(table.into_iter().map(|(e, _)| e).collect());
            checks.extend(battery::dtn_table(n, cfg.j_max)?);
            checks.extend(battery::asphericity(n, 64)?);
        }
        "baseline2d" => {
            for &mu in &cfg.mu {
                checks.extend(battery::baseline2d(mu)?);
            }
        }
        _ => checks.extend(battery::spectral_battery(n, cfg.j_max, cfg.theta_nodes)?),
    }
    print_checks(&checks);
    let failures: Vec<Failure> = checks.iter().filter_map(Check::failure).collect();
    let report = BatteryReport {
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: cfg.clone(),
        checks,
        dtn_eigenvalues: dtn,
        failures: failures.clone(),
    };
    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| GluerError::Io { path: cfg.out_dir.clone(), source })?;
    let path = cfg.out_dir.join(format!("{command}.json"));
    write_report(&report, &path)?;
    println!("wrote {}", path.display());
    Ok(failures)
}

/// One member of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub out_dir: PathBuf,
    pub solved: bool,
    pub neck_first_iterate: f64,
    /// `eps r_eps phi^(-1)(t_eps)`.
    pub neck_scale: f64,
    pub planar_first_iterate: f64,
    /// `eps r_eps^(2 - nu)`.
    pub planar_scale: f64,
    pub contraction_factors: Vec<f64>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub version: String,
    pub config: RunConfig,
    pub runs: Vec<SweepRow>,
    pub checks: Vec<Check>,
    pub failures: Vec<Failure>,
}

/// Report for a run whose solve or assembly stopped with an error.
#[derive(Debug, Clone, Serialize)]
pub struct FailedRun {
    pub version: String,
    pub n: usize,
    pub epsilon: f64,
    pub config: MatchConfig,
    pub error: String,
    pub failures: Vec<Failure>,
}

fn error_failure(e: &GluerError) -> Failure {
    let module = |stage: &str| match stage {
        "neck" => "catenoid_neck_solver",
        "planar" => "planar_end_solver",
        _ => "gluing_matcher",
    };
    let (m, measured, threshold) = match e {
        GluerError::NonContraction { stage, ratios } => (module(stage), ratios.last().copied().unwrap_or(f64::NAN), 1.0),
        GluerError::BallViolation { stage, norm, radius } => (module(stage), *norm, *radius),
        GluerError::NotConverged { stage, last, .. } => (module(stage), *last, f64::NAN),
        GluerError::NonPositivePeriod(h) => ("assembly_export", *h, 0.0),
        GluerError::FoldOver { theta, .. } => ("catenoid_neck_solver", *theta, f64::NAN),
        GluerError::InsideExcisedBall { x1, .. } => ("planar_end_solver", *x1, f64::NAN),
        _ => ("gluing_matcher", f64::NAN, f64::NAN),
    };
    Failure { module: m.into(), invariant: e.to_string(), measured, threshold }
}

fn construct_one(cfg: &RunConfig, eps: f64, dir: &Path) -> Result<SweepRow> {
    let scales = ScaleParameters::new(cfg.dimension(), eps)?;
    let mc = cfg.match_config();
    let mut row = SweepRow {
        epsilon: eps,
        out_dir: dir.to_path_buf(),
        solved: false,
        neck_first_iterate: f64::NAN,
        neck_scale: neck_ball_scale(&scales),
        planar_first_iterate: f64::NAN,
        planar_scale: f64::NAN,
        contraction_factors: Vec::new(),
        failures: Vec::new(),
    };
    let solved = Matcher::new(scales, mc).and_then(Matcher::solve).and_then(|o| {
        let s = assemble(&o)?;
        let diag = residual_report(&s)?;
        Ok((o, s, diag))
    });
    match solved {
        Ok((o, s, diag)) => {
            row.solved = true;
            row.neck_first_iterate = o.state.neck_first_iterate;
            row.planar_first_iterate = o.state.planar_first_iterate;
            row.planar_scale = planar_ball_scale(&scales, o.planar.ubar.nu);
            row.contraction_factors = diag.contraction_factors.iter().map(|c| c.value).collect();
            row.failures = diag.failures.clone();
            let report = RunReport::new(&s, &mc, diag);
            export_artifacts(&s, &report, dir)?;
            let p = &report.params;
            println!(
                "eps = {eps:e}: t = {:.6e}, rho = {:.3e}, h_eps = {:.6e}, contractions {:?}, {} failed invariant(s); wrote {}",
                p.t,
                p.rho,
                p.h_eps,
                row.contraction_factors,
                row.failures.len(),
                dir.display()
            );
        }
        Err(e) => {
            row.failures.push(error_failure(&e));
            std::fs::create_dir_all(dir).map_err(|source| GluerError::Io { path: dir.to_path_buf(), source })?;
            let failed = FailedRun {
                version: env!("CARGO_PKG_VERSION").into(),
                n: cfg.n,
                epsilon: eps,
                config: mc,
                error: e.to_string(),
                failures: row.failures.clone(),
            };
            write_report(&failed, &dir.join("report.json"))?;
            println!("eps = {eps:e}: {e}; wrote {}", dir.display());
        }
    }
    Ok(row)
}

/// Subdirectory of a sweep member.
pub fn sweep_dir(root: &Path, eps: f64) -> PathBuf {
    root.join(format!("eps_{eps:e}"))
}

fn construct(cfg: &RunConfig) -> Result<Vec<Failure>> {
    if cfg.epsilon.len() == 1 {
        return Ok(construct_one(cfg, cfg.epsilon[0], &cfg.out_dir)?.failures);
    }
    let dirs: Vec<PathBuf> = cfg.epsilon.iter().map(|&e| sweep_dir(&cfg.out_dir, e)).collect();
    let rows: Vec<SweepRow> = if cfg.parallel {
        std::thread::scope(|sc| {
            let handles: Vec<_> = cfg.epsilon.iter().zip(&dirs).map(|(&e, d)| sc.spawn(move || construct_one(cfg, e, d))).collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect::<Result<Vec<_>>>()
        })?
    } else {
        cfg.epsilon.iter().zip(&dirs).map(|(&e, d)| construct_one(cfg, e, d)).collect::<Result<Vec<_>>>()?
    };

    let mut checks = Vec::new();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.solved).collect();
    if ok.len() >= 2 {
        let eps: Vec<f64> = ok.iter().map(|r| r.epsilon).collect();
        let slope = |f: fn(&SweepRow) -> f64| fit_slope(&eps, &ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        for (name, measured, expect) in [
            ("neck first iterate slope", slope(|r| r.neck_first_iterate), slope(|r| r.neck_scale)),
            ("planar first iterate slope", slope(|r| r.planar_first_iterate), slope(|r| r.planar_scale)),
        ] {
            let pass = (measured / expect - 1.0).abs() <= 0.1;
            checks.push(Check { module: "gluing_matcher".into(), invariant: name.into(), measured, target: expect, tolerance: 0.1 * expect.abs(), pass });
        }
    }
    print_checks(&checks);
    let mut failures: Vec<Failure> = rows.iter().flat_map(|r| r.failures.iter().cloned()).collect();
    failures.extend(checks.iter().filter_map(Check::failure));
    let report = SweepReport { version: env!("CARGO_PKG_VERSION").into(), config: cfg.clone(), runs: rows, checks, failures: failures.clone() };
    let path = cfg.out_dir.join("sweep.json");
    write_report(&report, &path)?;
    println!("wrote {}", path.display());
    Ok(failures)
}
