use std::fmt;
use std::path::{Path, PathBuf};

use fastlimit::config::{ConfigError, Prepared, RunConfig};
use fastlimit::graph::MonotoneGraph;
use fastlimit::lab::{k_sweep, write_report, ReportError};
use fastlimit::limit::{default_test_set, weak_residual};
use fastlimit::output::{self, Manifest};
use fastlimit::reaction::validate_initial_family;
use fastlimit::trajectory::SolverError;

use crate::Overrides;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

pub const OUTPUT_DIR_ENV: &str = "FASTLIMIT_OUTPUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Solver(SolverError),
    Report(ReportError),
    Io { path: PathBuf, source: std::io::Error },
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::Io { .. }) => EXIT_IO,
            CliError::Config(ConfigError::Solver(e)) | CliError::Solver(e) => solver_code(e),
            CliError::Config(_) | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Report(_) | CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn solver_code(e: &SolverError) -> u8 {
    match e {
        SolverError::InvalidTime(_) | SolverError::Reaction(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Report(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Validation(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Solver(e)
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Report(e)
    }
}

struct Loaded {
    config: RunConfig,
    prepared: Prepared,
    out_dir: PathBuf,
}

fn apply(config: &mut RunConfig, o: &Overrides) {
    if let Some(n) = o.n_cells {
        config.grid.n_cells = n;
    }
    if let Some(t) = o.t_end {
        config.time.t_end = t;
    }
    if let Some(dt) = o.dt {
        config.time.dt = dt;
    }
    if let Some(s) = o.stride {
        config.time.stride = s;
    }
    if let Some(d) = o.d1 {
        config.problem.d1 = d;
    }
    if let Some(d) = o.d2 {
        config.problem.d2 = d;
    }
    if let Some(k) = o.k {
        config.problem.k = Some(k);
    }
    if let Some(dir) = &o.output_dir {
        config.output.directory = dir.display().to_string();
    } else if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            config.output.directory = dir;
        }
    }
}

fn load(path: &Path, o: &Overrides) -> Result<Loaded, CliError> {
    let mut config = RunConfig::load(path)?;
    apply(&mut config, o);
    let prepared = config.prepare()?;
    let out_dir = PathBuf::from(&config.output.directory);
    Ok(Loaded {
        config,
        prepared,
        out_dir,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn wants(config: &RunConfig, format: &str) -> bool {
    config.output.formats.iter().any(|f| f == format)
}

pub fn run_rd(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let l = load(config, o)?;
    let k = l.config.problem.k.ok_or_else(|| {
        CliError::Validation("run-rd needs a rate: set problem.k or pass --k".into())
    })?;
    let p = &l.prepared;
    let spec = p.spec.with_k(k);
    let (u0, v0) = p.init.family(k);
    let run = fastlimit::rd::run_rd(&spec, &u0, &v0, &p.grid, &p.time)?;
    ensure_dir(&l.out_dir)?;
    let mut manifest = Manifest::new("run-rd", &p.config_hash);
    if wants(&l.config, "csv") {
        let traj = l.out_dir.join("rd_trajectory.csv");
        output::write_trajectory_csv(&traj, &run.trajectory)?;
        manifest.record(&traj);
        let diag = l.out_dir.join("rd_diagnostics.csv");
        output::write_rd_diagnostics_csv(&diag, &run.diagnostics)?;
        manifest.record(&diag);
    }
    if wants(&l.config, "json") {
        manifest.write(&l.out_dir)?;
    }
    let d = run.final_diagnostics();
    eprintln!(
        "run-rd: k = {k}, {} steps, mass_sum {:.6e} -> {:.6e}, D_alpha = {:.6e}, D_gamma = {:.6e}",
        run.diagnostics.len() - 1,
        run.diagnostics[0].mass_sum,
        d.mass_sum,
        d.d_alpha,
        d.d_gamma
    );
    Ok(())
}

pub fn run_limit(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let l = load(config, o)?;
    let p = &l.prepared;
    let run = fastlimit::limit::run_limit(&p.limit, &p.init.sum(), &p.grid, &p.time)?;
    ensure_dir(&l.out_dir)?;
    let mut manifest = Manifest::new("run-limit", &p.config_hash);
    if wants(&l.config, "csv") {
        let traj = l.out_dir.join("limit_trajectory.csv");
        output::write_limit_csv(&traj, &run.trajectory)?;
        manifest.record(&traj);
        let diag = l.out_dir.join("limit_diagnostics.csv");
        output::write_limit_diagnostics_csv(&diag, &run.diagnostics)?;
        manifest.record(&diag);
        let iface = l.out_dir.join("interface.csv");
        if output::write_interface_csv(&iface, &run.trajectory)? > 0 {
            manifest.record(&iface);
        } else {
            let _ = std::fs::remove_file(&iface);
        }
    }
    if wants(&l.config, "json") {
        manifest.write(&l.out_dir)?;
    }
    if p.limit.non_unique_regime() {
        eprintln!("run-limit: warning: flat beta with sources present, the limit solution may not be unique");
    }
    eprintln!(
        "run-limit: {} steps, max step residual {:.3e}",
        run.diagnostics.len() - 1,
        run.max_step_residual()
    );
    Ok(())
}

pub fn sweep(config: &Path, jobs: Option<usize>, o: &Overrides) -> Result<(), CliError> {
    let l = load(config, o)?;
    let mut setup = l.prepared.sweep_setup(&l.config);
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        setup.jobs = j;
    }
    let report = k_sweep(&setup)?;
    ensure_dir(&l.out_dir)?;
    let csv = l.out_dir.join("report.csv");
    let json = write_report(&report, &csv)?;
    for f in &report.failures {
        eprintln!("sweep: k = {} failed: {}", f.k, f.message);
    }
    if report.non_unique_regime {
        eprintln!("sweep: warning: flat beta with sources present, the limit solution may not be unique");
    }
    let slope = report
        .slope_l1_u
        .map_or_else(|| "null".to_string(), |s| format!("{s:.4}"));
    eprintln!(
        "sweep: {} rows, slope_l1_u = {slope}, report {} (+ {})",
        report.rows.len(),
        csv.display(),
        json.display()
    );
    if report.rows.is_empty() && !report.failures.is_empty() {
        return Err(CliError::Solver(SolverError::NonFinite("every k failed".into())));
    }
    Ok(())
}

pub fn graph_info(
    preset: Option<&str>,
    config: Option<&Path>,
    samples: &[f64],
    d1: f64,
    d2: f64,
    lambda: f64,
) -> Result<(), CliError> {
    let (graph, d1, d2) = match (preset, config) {
        (Some(name), _) => (
            MonotoneGraph::preset(name).map_err(|e| CliError::Config(e.into()))?,
            d1,
            d2,
        ),
        (None, Some(path)) => {
            let c = RunConfig::load(path)?;
            (c.graph()?, c.problem.d1, c.problem.d2)
        }
        (None, None) => return Err(CliError::Validation("pass --preset or --config".into())),
    };
    let (lo, hi) = graph.domain();
    eprintln!(
        "graph: {} knots, domain [{lo}, {hi}], maximal: {}, vertical parts: {}",
        graph.knots().len(),
        graph.is_maximal(),
        graph.has_vertical_part()
    );
    println!("s,resolvent,beta,u_star,v_star");
    for &s in samples {
        let j = graph.resolvent(lambda, s).map_err(|e| CliError::Config(e.into()))?;
        let b = graph.beta(d1, d2, s).map_err(|e| CliError::Config(e.into()))?;
        let (u, v) = graph.limit_pair(s).map_err(|e| CliError::Config(e.into()))?;
        println!("{s},{j},{b},{u},{v}");
    }
    Ok(())
}

pub fn validate_init(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let l = load(config, o)?;
    let k = l.config.problem.k.ok_or_else(|| {
        CliError::Validation("validate-init needs a rate: set problem.k or pass --k".into())
    })?;
    let p = &l.prepared;
    let report = validate_initial_family(&p.spec, &p.init, &p.grid, k)
        .map_err(|e| CliError::Config(e.into()))?;
    eprintln!(
        "validate-init: k = {k}: max F = {:.3e} (limit C5/k = {:.3e}), L2 sum = {:.3e} (limit C6 = {:.3e}), |lap u0|_1 = {:.3e}",
        report.max_f,
        p.init.c5 / k,
        report.l2_sum,
        p.init.c6,
        report.laplacian_l1
    );
    if report.passed {
        eprintln!("validate-init: PASS (max residual 0)");
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "validate-init: FAIL (max residual {:.3e})",
            report.max_residual()
        )))
    }
}

pub fn residual(config: &Path, o: &Overrides) -> Result<(), CliError> {
    let l = load(config, o)?;
    let p = &l.prepared;
    let run = fastlimit::limit::run_limit(&p.limit, &p.init.sum(), &p.grid, &p.time)?;
    let r = weak_residual(&run.trajectory, &p.limit, &default_test_set())?;
    println!("{r:e}");
    eprintln!("residual: weak-form residual {r:.6e} over {} test functions", default_test_set().len());
    Ok(())
}
