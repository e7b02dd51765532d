//! k-sweeps against the limit problem and the persisted convergence report.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Field, Grid1D};
use crate::limit::{default_test_set, run_limit, weak_residual, LimitProblemSpec, LimitRun};
use crate::metrics::{error_ls, fit_log_slope, time_translation_modulus};
use crate::rd::{run_rd, RdRun};
use crate::reaction::{InitialData, ReactionSystemSpec};
use crate::trajectory::{SolverError, SpaceTime, TimeSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Report CSV header, in order.
pub const REPORT_COLUMNS: [&str; 8] = [
    "k", "err_l1_u", "err_l1_v", "err_l15_u", "err_l2_u", "d_alpha", "d_gamma", "linf_max",
];

/// Inputs of a sweep. Every `k` runs on the same grid and time step.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub spec: ReactionSystemSpec,
    pub grid: Grid1D,
    pub time: TimeSpec,
    pub init: InitialData,
    pub ks: Vec<f64>,
    pub jobs: usize,
    /// Time shifts for the translation moduli, in snapshot spacings.
    pub tau_multiples: Vec<usize>,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub err_l1_u: f64,
    pub err_l1_v: f64,
    pub err_l15_u: f64,
    pub err_l2_u: f64,
    pub d_alpha: f64,
    pub d_gamma: f64,
    pub linf_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub k: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub max_step_residual: f64,
    pub weak_residual: f64,
    pub newton_iters: usize,
    pub gs_sweeps: usize,
}

/// `s = 1` time translation modulus of `u^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationRow {
    pub k: f64,
    pub tau: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config_hash: String,
    /// Least-squares slope of `ln err_l1_u` against `ln k`.
    pub slope_l1_u: Option<f64>,
    pub tool_version: String,
    /// Sorted by `k`.
    pub rows: Vec<SweepRow>,
    #[serde(default)]
    pub failures: Vec<SweepFailure>,
    #[serde(default)]
    pub limit: Option<LimitSummary>,
    /// Flat `β` with a source present: the limit may not be unique.
    #[serde(default)]
    pub non_unique_regime: bool,
    #[serde(default)]
    pub translation_moduli: Vec<TranslationRow>,
}

impl ConvergenceReport {
    pub fn new(config_hash: &str, rows: Vec<SweepRow>) -> Self {
        let mut report = ConvergenceReport {
            config_hash: config_hash.to_string(),
            slope_l1_u: None,
            tool_version: TOOL_VERSION.to_string(),
            rows,
            failures: Vec::new(),
            limit: None,
            non_unique_regime: false,
            translation_moduli: Vec::new(),
        };
        report.refit();
        report
    }

    /// Sorts rows by `k` and recomputes the slope.
    pub fn refit(&mut self) {
        self.rows.sort_by(|a, b| a.k.total_cmp(&b.k));
        let ks: Vec<f64> = self.rows.iter().map(|r| r.k).collect();
        let errs: Vec<f64> = self.rows.iter().map(|r| r.err_l1_u).collect();
        self.slope_l1_u = fit_log_slope(&ks, &errs);
    }

    pub fn row(&self, k: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// A sweep with the underlying runs kept.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: ConvergenceReport,
    pub limit: LimitRun,
    /// Successful runs, sorted by `k`.
    pub runs: Vec<(f64, RdRun)>,
}

fn row_for(k: f64, run: &RdRun, limit: &LimitRun) -> Result<SweepRow, SolverError> {
    let lt = &limit.trajectory;
    let u = run.trajectory.u();
    let v = run.trajectory.v();
    let metric = |a: &SpaceTime, b: &SpaceTime, s: f64| {
        error_ls(a, b, s).map_err(|e| SolverError::InvalidTime(e.to_string()))
    };
    let final_d = run.final_diagnostics();
    Ok(SweepRow {
        k,
        err_l1_u: metric(&u, &lt.u_star(), 1.0)?,
        err_l1_v: metric(&v, &lt.v_star(), 1.0)?,
        err_l15_u: metric(&u, &lt.u_star(), 1.5)?,
        err_l2_u: metric(&u, &lt.u_star(), 2.0)?,
        d_alpha: final_d.d_alpha,
        d_gamma: final_d.d_gamma,
        linf_max: run.linf_max(),
    })
}

fn run_one(setup: &SweepSetup, k: f64) -> Result<RdRun, SolverError> {
    let spec = setup.spec.with_k(k);
    let (u0, v0) = setup.init.family(k);
    run_rd(&spec, &u0, &v0, &setup.grid, &setup.time)
}

/// Runs `f` on every item with up to `jobs` threads; results keep input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Runs the limit problem once and the reaction-diffusion system for each
/// `k`, and compares `(u^k, v^k)` with the split limit `(u*, v*)`.
///
/// A failing `k` is recorded in `failures` and left out of the rows; a
/// failing limit run fails the whole sweep.
pub fn k_sweep_detailed(setup: &SweepSetup) -> Result<SweepOutcome, SolverError> {
    let limit_spec = LimitProblemSpec::from_rd(&setup.spec);
    let z0 = setup.init.sum();
    let limit = run_limit(&limit_spec, &z0, &setup.grid, &setup.time)?;
    let weak = weak_residual(&limit.trajectory, &limit_spec, &default_test_set())?;

    let mut ks = setup.ks.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let results = parallel_map(&ks, setup.jobs, |&k| run_one(setup, k));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut runs = Vec::new();
    let mut translation = Vec::new();
    let spacing = setup.time.snapshot_spacing();
    for (k, result) in ks.iter().copied().zip(results) {
        match result.and_then(|run| row_for(k, &run, &limit).map(|row| (row, run))) {
            Ok((row, run)) => {
                for &m in &setup.tau_multiples {
                    let tau = m as f64 * spacing;
                    if let Ok(modulus) = time_translation_modulus(&run.trajectory.u(), tau, 1.0) {
                        translation.push(TranslationRow { k, tau, modulus });
                    }
                }
                rows.push(row);
                runs.push((k, run));
            }
            Err(e) => failures.push(SweepFailure {
                k,
                message: e.to_string(),
            }),
        }
    }

    let mut report = ConvergenceReport::new(&setup.config_hash, rows);
    report.failures = failures;
    report.non_unique_regime = limit_spec.non_unique_regime();
    report.translation_moduli = translation;
    report.limit = Some(LimitSummary {
        max_step_residual: limit.max_step_residual(),
        weak_residual: weak,
        newton_iters: limit.diagnostics.iter().map(|d| d.newton_iters).sum(),
        gs_sweeps: limit.diagnostics.iter().map(|d| d.gs_sweeps).sum(),
    });
    Ok(SweepOutcome { report, limit, runs })
}

pub fn k_sweep(setup: &SweepSetup) -> Result<ConvergenceReport, SolverError> {
    Ok(k_sweep_detailed(setup)?.report)
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// The JSON sidecar path next to a report CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the report CSV to `csv_path` and its JSON sidecar next to it.
pub fn write_report(report: &ConvergenceReport, csv_path: &Path) -> Result<PathBuf, ReportError> {
    let mut w = csv::Writer::from_path(csv_path).map_err(|e| format_err(csv_path, e))?;
    w.write_record(REPORT_COLUMNS).map_err(|e| format_err(csv_path, e))?;
    for r in &report.rows {
        let fields = [
            r.k, r.err_l1_u, r.err_l1_v, r.err_l15_u, r.err_l2_u, r.d_alpha, r.d_gamma, r.linf_max,
        ];
        w.write_record(fields.iter().map(|x| x.to_string()))
            .map_err(|e| format_err(csv_path, e))?;
    }
    w.flush().map_err(io_err(csv_path))?;

    let json_path = sidecar_path(csv_path);
    let text = serde_json::to_string_pretty(report).map_err(|e| format_err(&json_path, e))?;
    std::fs::write(&json_path, text + "\n").map_err(io_err(&json_path))?;
    Ok(json_path)
}

/// Reads the rows of a report CSV.
pub fn read_report_rows(csv_path: &Path) -> Result<Vec<SweepRow>, ReportError> {
    let mut r = csv::Reader::from_path(csv_path).map_err(|e| format_err(csv_path, e))?;
    let header = r.headers().map_err(|e| format_err(csv_path, e))?.clone();
    if header.iter().ne(REPORT_COLUMNS) {
        return Err(format_err(csv_path, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec.map_err(|e| format_err(csv_path, e))?);
    }
    Ok(rows)
}

/// Reads a report back from its JSON sidecar.
pub fn read_report(json_path: &Path) -> Result<ConvergenceReport, ReportError> {
    let text = std::fs::read_to_string(json_path).map_err(io_err(json_path))?;
    serde_json::from_str(&text).map_err(|e| format_err(json_path, e))
}

/// The limit `(u*, v*)` of a single field pair, for callers comparing by hand.
pub fn split_limit(spec: &ReactionSystemSpec, z: &Field) -> Result<(Field, Field), SolverError> {
    let mut u = Vec::with_capacity(z.len());
    let mut v = Vec::with_capacity(z.len());
    for &s in z.iter() {
        let (a, b) = spec.alpha().limit_pair(s)?;
        u.push(a);
        v.push(b);
    }
    Ok((Field(u), Field(v)))
}
