//! Fast-reaction limits of two-component reaction-diffusion systems.
//!
//! The crate covers piecewise-linear maximal monotone graphs and their
//! resolvents ([`graph`]), reaction terms whose zero set is such a graph
//! ([`reaction`]), a small expression language for sources and initial
//! profiles ([`expr`]), a stiff reaction-diffusion integrator ([`rd`]), an
//! implicit solver for the limiting nonlinear diffusion problem ([`limit`]),
//! and the k-sweep harness comparing the two ([`lab`], [`metrics`]).

pub mod config;
pub mod expr;
pub mod graph;
pub mod grid;
pub mod lab;
pub mod limit;
pub mod metrics;
pub mod output;
pub mod rd;
pub mod reaction;
pub mod trajectory;

pub use config::{ConfigError, RunConfig};
pub use expr::{parse, parse_profile, Expr, ExprError};
pub use graph::{GraphError, Knot, MonotoneGraph, Tail};
pub use grid::{Field, Grid1D};
pub use lab::{k_sweep, ConvergenceReport, SweepSetup};
pub use limit::{run_limit, step_limit, weak_residual, LimitProblemSpec};
pub use rd::{run_rd, step_rd};
pub use reaction::{ReactionSystemSpec, ReactionTerm};
pub use trajectory::{SolverError, TimeSpec, Trajectory};
