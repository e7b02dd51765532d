//! TOML run configuration: parsing, validation and content hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::{parse, parse_profile, ExprError};
use crate::graph::{Extended, Growth, GraphError, Knot, MonotoneGraph, Tail};
use crate::grid::{Grid1D, GridError};
use crate::lab::SweepSetup;
use crate::limit::LimitProblemSpec;
use crate::reaction::{InitRule, InitialData, ReactionError, ReactionSystemSpec, ReactionTerm};
use crate::trajectory::{SolverError, Splitting, TimeSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Reaction(#[from] ReactionError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d1: f64,
    pub d2: f64,
    #[serde(default = "zero_expr")]
    pub f1: String,
    #[serde(default = "zero_expr")]
    pub f2: String,
    /// `canonical`, `evans`, `linear:r` or `custom:<expr>`.
    #[serde(default = "canonical")]
    pub reaction: String,
    /// Rate used by `run-rd`.
    #[serde(default)]
    pub k: Option<f64>,
    /// Preset name or literal knot table.
    pub graph: GraphConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphConfig {
    Preset(String),
    Literal(LiteralGraph),
}

/// Knots as `[u, v_lo, v_hi]`; `inf` and `-inf` mark vertical rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiteralGraph {
    pub knots: Vec<[f64; 3]>,
    pub left: TailConfig,
    pub right: TailConfig,
    /// `[C1, C2, C3, C4]`.
    #[serde(default)]
    pub growth: Option<[f64; 4]>,
}

/// A slope or the string `end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailConfig {
    Slope(f64),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells: usize,
    #[serde(default)]
    pub x_min: f64,
    #[serde(default = "one")]
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one_usize")]
    pub stride: usize,
    /// `lie` or `strang`.
    #[serde(default = "lie")]
    pub splitting: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_ks")]
    pub k: Vec<f64>,
    #[serde(default = "one_usize")]
    pub jobs: usize,
    /// Time shifts for the translation moduli, in snapshot spacings.
    #[serde(default = "default_taus")]
    pub tau_multiples: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            k: default_ks(),
            jobs: 1,
            tau_multiples: default_taus(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Profile of the first component, in `x`.
    pub a: String,
    pub b: String,
    /// Project `(a, b)` onto the zero set of the reaction.
    #[serde(default = "yes")]
    pub project: bool,
    #[serde(default = "one")]
    pub c5: f64,
    #[serde(default = "ten")]
    pub c6: f64,
    /// Shift `u0` by `perturbation / k`.
    #[serde(default)]
    pub perturbation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: String,
    /// Any of `csv`, `json`.
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_dir(),
            formats: default_formats(),
        }
    }
}

fn zero_expr() -> String {
    "0".into()
}
fn canonical() -> String {
    "canonical".into()
}
fn lie() -> String {
    "lie".into()
}
fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn yes() -> bool {
    true
}
fn one_usize() -> usize {
    1
}
fn default_ks() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0, 10000.0]
}
fn default_taus() -> Vec<usize> {
    vec![2, 4, 8]
}
fn default_dir() -> String {
    "output".into()
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

/// Everything a run needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: ReactionSystemSpec,
    pub limit: LimitProblemSpec,
    pub grid: Grid1D,
    pub time: TimeSpec,
    pub init: InitialData,
    pub config_hash: String,
}

impl Prepared {
    pub fn sweep_setup(&self, config: &RunConfig) -> SweepSetup {
        SweepSetup {
            spec: self.spec.clone(),
            grid: self.grid,
            time: self.time,
            init: self.init.clone(),
            ks: sorted_ks(&config.sweep.k),
            jobs: config.sweep.jobs.max(1),
            tau_multiples: config.sweep.tau_multiples.clone(),
            config_hash: self.config_hash.clone(),
        }
    }
}

fn sorted_ks(ks: &[f64]) -> Vec<f64> {
    let mut ks = ks.to_vec();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical TOML serialization, hex encoded.
    ///
    /// Output settings and the job count do not change results and are left out.
    pub fn hash(&self) -> String {
        let mut numeric = self.clone();
        numeric.output = OutputConfig::default();
        numeric.sweep.jobs = 1;
        hex::encode(Sha256::digest(numeric.to_toml().as_bytes()))
    }

    pub fn graph(&self) -> Result<MonotoneGraph, ConfigError> {
        match &self.problem.graph {
            GraphConfig::Preset(name) => Ok(MonotoneGraph::preset(name)?),
            GraphConfig::Literal(lit) => {
                let knots = lit
                    .knots
                    .iter()
                    .map(|&[u, lo, hi]| Knot {
                        u,
                        v_lo: Extended::from_f64(lo),
                        v_hi: Extended::from_f64(hi),
                    })
                    .collect();
                let g = MonotoneGraph::new(knots, tail(&lit.left)?, tail(&lit.right)?)?;
                match lit.growth {
                    Some([c1, c2, c3, c4]) => Ok(g.with_growth(Growth { c1, c2, c3, c4 })?),
                    None => Ok(g),
                }
            }
        }
    }

    pub fn splitting(&self) -> Result<Splitting, ConfigError> {
        match self.time.splitting.trim() {
            "lie" => Ok(Splitting::Lie),
            "strang" => Ok(Splitting::Strang),
            other => Err(ConfigError::Invalid(format!("unknown splitting `{other}`"))),
        }
    }

    /// Runs every validator and assembles the run inputs.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let graph = self.graph()?;
        let reaction = ReactionTerm::from_name(&self.problem.reaction)?;
        let k = self.problem.k.unwrap_or(1.0);
        let spec = ReactionSystemSpec::new(graph.clone(), reaction, self.problem.d1, self.problem.d2, k)?
            .with_sources(parse(&self.problem.f1)?, parse(&self.problem.f2)?);
        spec.check_consistency(10.0, 201)?;
        let grid = Grid1D::new(self.grid.n_cells, self.grid.x_min, self.grid.x_max)?;
        let mut time = TimeSpec::new(self.time.t_end, self.time.dt, self.time.stride);
        time.splitting = self.splitting()?;
        let n_steps = time.n_steps()?;
        let n_snapshots = n_steps / time.stride;
        if let Some(&m) = self.sweep.tau_multiples.iter().find(|&&m| m == 0 || m > n_snapshots) {
            return Err(ConfigError::Invalid(format!(
                "tau multiple {m} must lie in 1..={n_snapshots}"
            )));
        }
        if self.sweep.k.is_empty() || self.sweep.k.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(ConfigError::Invalid("sweep.k must list positive rates".into()));
        }
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return Err(ConfigError::Invalid(format!("unknown output format `{f}`")));
            }
        }

        let a = grid.field_from_expr(&parse_profile(&self.initial.a)?)?;
        let b = grid.field_from_expr(&parse_profile(&self.initial.b)?)?;
        let mut init = if self.initial.project {
            InitialData::projected(&graph, &a, &b, self.initial.c5, self.initial.c6)?
        } else {
            InitialData {
                u0: a,
                v0: b,
                rule: InitRule::Verbatim,
                c5: self.initial.c5,
                c6: self.initial.c6,
            }
        };
        if let Some(c) = self.initial.perturbation {
            init.rule = InitRule::Perturbed(c);
        }
        Ok(Prepared {
            limit: LimitProblemSpec::from_rd(&spec),
            spec,
            grid,
            time,
            init,
            config_hash: self.hash(),
        })
    }
}

fn tail(t: &TailConfig) -> Result<Tail, ConfigError> {
    match t {
        TailConfig::Slope(m) => Ok(Tail::Slope(*m)),
        TailConfig::Named(s) if s.trim() == "end" => Ok(Tail::End),
        TailConfig::Named(s) => Err(ConfigError::Invalid(format!("unknown tail `{s}`"))),
    }
}
