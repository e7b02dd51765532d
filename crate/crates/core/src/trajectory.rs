//! Time discretization settings, stored space-time fields and solver errors.

use thiserror::Error;

use crate::graph::GraphError;
use crate::grid::{Field, Grid1D, GridError};
use crate::reaction::ReactionError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid time discretization: {0}")]
    InvalidTime(String),
    #[error("no sign change found for the reaction root at (u, v) = ({u}, {v})")]
    NoBracket { u: f64, v: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("nonlinear solve did not converge in {max_iters} iterations (residual {residual:e})")]
    NoConvergence { max_iters: usize, residual: f64 },
    #[error("run aborted at step {step}: {source}")]
    Aborted {
        step: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error(transparent)]
    Reaction(#[from] ReactionError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl From<GraphError> for SolverError {
    fn from(e: GraphError) -> Self {
        SolverError::Reaction(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    #[default]
    Lie,
    Strang,
}

/// Horizon, step and snapshot thinning of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub splitting: Splitting,
}

impl TimeSpec {
    pub fn new(t_end: f64, dt: f64, stride: usize) -> Self {
        TimeSpec {
            t_end,
            dt,
            stride,
            splitting: Splitting::Lie,
        }
    }

    /// Number of steps; `dt` must divide `t_end` up to roundoff and `stride`
    /// must divide the step count.
    pub fn n_steps(&self) -> Result<usize, SolverError> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(SolverError::InvalidTime(format!("T = {} must be > 0", self.t_end)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SolverError::InvalidTime(format!("dt = {} must be > 0", self.dt)));
        }
        let n = (self.t_end / self.dt).round();
        if n < 1.0 || (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(SolverError::InvalidTime(format!(
                "dt = {} does not divide T = {}",
                self.dt, self.t_end
            )));
        }
        let n = n as usize;
        if self.stride == 0 || !n.is_multiple_of(self.stride) {
            return Err(SolverError::InvalidTime(format!(
                "stride {} does not divide the {n} steps",
                self.stride
            )));
        }
        Ok(n)
    }

    pub fn snapshot_spacing(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn time_of(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// Borrowed view of one scalar field over stored snapshot times.
#[derive(Debug, Clone, Copy)]
pub struct SpaceTime<'a> {
    pub grid: &'a Grid1D,
    pub times: &'a [f64],
    pub frames: &'a [Field],
}

impl<'a> SpaceTime<'a> {
    pub fn new(grid: &'a Grid1D, times: &'a [f64], frames: &'a [Field]) -> Self {
        SpaceTime {
            grid,
            times,
            frames,
        }
    }
}

/// Snapshots of `(u, v)` at uniformly spaced times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub u: Vec<Field>,
    pub v: Vec<Field>,
    pub stride: usize,
}

impl Trajectory {
    pub fn u(&self) -> SpaceTime<'_> {
        SpaceTime::new(&self.grid, &self.times, &self.u)
    }

    pub fn v(&self) -> SpaceTime<'_> {
        SpaceTime::new(&self.grid, &self.times, &self.v)
    }
}
