//! Implicit solver for the limit problem `z_t = Δβ(z) + f(z)` with zero-flux
//! boundaries, plus the weak-form residual and free-boundary tracking.
//!
//! Each step solves `z' - dt Δ_h β(z') = z + dt f(z)` for `z'`. Unknowns are
//! kept in `z` rather than `β(z)` since `β` may be flat when `d2 = 0`.

use std::f64::consts::PI;

use crate::expr::Expr;
use crate::graph::MonotoneGraph;
use crate::grid::{solve_tridiagonal, Field, Grid1D};
use crate::reaction::{f_limit, ReactionSystemSpec};
use crate::trajectory::{SolverError, SpaceTime, TimeSpec};

const MAX_NEWTON_ITERS: usize = 60;
const MAX_LINE_SEARCH: usize = 40;
const GS_SWEEPS_PER_STALL: usize = 50;
const MAX_STALLS: usize = 200;
const MAX_SCALAR_ITERS: usize = 200;

#[derive(Debug, Clone)]
pub struct LimitProblemSpec {
    pub graph: MonotoneGraph,
    pub d1: f64,
    pub d2: f64,
    pub f1: Expr,
    pub f2: Expr,
}

impl LimitProblemSpec {
    pub fn new(graph: MonotoneGraph, d1: f64, d2: f64) -> Self {
        LimitProblemSpec {
            graph,
            d1,
            d2,
            f1: Expr::num(0.0),
            f2: Expr::num(0.0),
        }
    }

    pub fn with_sources(mut self, f1: Expr, f2: Expr) -> Self {
        self.f1 = f1;
        self.f2 = f2;
        self
    }

    /// The limit problem of a reaction-diffusion system.
    pub fn from_rd(spec: &ReactionSystemSpec) -> Self {
        LimitProblemSpec {
            graph: spec.alpha().clone(),
            d1: spec.d1,
            d2: spec.d2,
            f1: spec.f1.clone(),
            f2: spec.f2.clone(),
        }
    }

    pub fn beta_of(&self, s: f64) -> Result<f64, SolverError> {
        Ok(self.graph.beta(self.d1, self.d2, s)?)
    }

    pub fn beta_slope(&self, s: f64) -> f64 {
        self.graph.beta_slope_right(self.d1, self.d2, s)
    }

    pub fn f_of(&self, s: f64) -> Result<f64, SolverError> {
        if self.f1.is_zero() && self.f2.is_zero() {
            return Ok(0.0);
        }
        Ok(f_limit(&self.graph, &self.f1, &self.f2, s)?)
    }

    /// Lipschitz constant of `β`.
    pub fn beta_lipschitz(&self) -> f64 {
        self.d1.max(self.d2)
    }

    /// True when `β` has flat parts and a source is present, where weak
    /// solutions need not be unique.
    pub fn non_unique_regime(&self) -> bool {
        self.d2 == 0.0
            && self.graph.has_vertical_part()
            && !(self.f1.is_zero() && self.f2.is_zero())
    }
}

/// Work done by one implicit step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepStats {
    pub newton_iters: usize,
    pub gs_sweeps: usize,
    /// Sup norm of the residual after each accepted iterate.
    pub residual_history: Vec<f64>,
}

impl StepStats {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

struct System<'a> {
    spec: &'a LimitProblemSpec,
    rhs: Vec<f64>,
    r: f64,
}

impl System<'_> {
    fn betas(&self, z: &[f64]) -> Result<Vec<f64>, SolverError> {
        z.iter().map(|&s| self.spec.beta_of(s)).collect()
    }

    /// `G(z) = z - dt Δ_h β(z) - rhs`.
    fn residual(&self, z: &[f64]) -> Result<Vec<f64>, SolverError> {
        let b = self.betas(z)?;
        let n = z.len();
        Ok((0..n)
            .map(|i| {
                let left = if i == 0 { b[0] } else { b[i - 1] };
                let right = if i + 1 == n { b[n - 1] } else { b[i + 1] };
                z[i] - self.r * (left - 2.0 * b[i] + right) - self.rhs[i]
            })
            .collect())
    }

    fn newton_direction(&self, z: &[f64], g: &[f64]) -> Result<Vec<f64>, SolverError> {
        let n = z.len();
        let slopes: Vec<f64> = z.iter().map(|&s| self.spec.beta_slope(s)).collect();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let neighbours = (i > 0) as usize + (i + 1 < n) as usize;
            diag[i] = 1.0 + self.r * neighbours as f64 * slopes[i];
            if i > 0 {
                lower[i] = -self.r * slopes[i - 1];
            }
            if i + 1 < n {
                upper[i] = -self.r * slopes[i + 1];
            }
        }
        let minus_g: Vec<f64> = g.iter().map(|x| -x).collect();
        Ok(solve_tridiagonal(&lower, &diag, &upper, &minus_g)?)
    }

    /// One Gauss-Seidel sweep. Cell `i` solves
    /// `x + r c_i β(x) - r Σ_nb β(z_j) - rhs_i = 0`, strictly increasing in `x`.
    fn gauss_seidel_sweep(&self, z: &mut [f64]) -> Result<(), SolverError> {
        let n = z.len();
        let mut b = self.betas(z)?;
        for i in 0..n {
            let mut nb_sum = 0.0;
            let mut c = 0.0;
            if i > 0 {
                nb_sum += b[i - 1];
                c += 1.0;
            }
            if i + 1 < n {
                nb_sum += b[i + 1];
                c += 1.0;
            }
            let offset = self.r * nb_sum + self.rhs[i];
            let cell = |x: f64| -> Result<f64, SolverError> {
                Ok(x + self.r * c * self.spec.beta_of(x)? - offset)
            };
            let x = solve_increasing(cell, |x| 1.0 + self.r * c * self.spec.beta_slope(x), z[i])?;
            z[i] = x;
            b[i] = self.spec.beta_of(x)?;
        }
        Ok(())
    }
}

/// Root of an increasing scalar map `g` with `g(x) - x` nonincreasing, so
/// the root lies between `x0` and `x0 - g(x0)`.
fn solve_increasing(
    g: impl Fn(f64) -> Result<f64, SolverError>,
    slope: impl Fn(f64) -> f64,
    x0: f64,
) -> Result<f64, SolverError> {
    let g0 = g(x0)?;
    if g0 == 0.0 {
        return Ok(x0);
    }
    let (mut lo, mut hi) = if g0 > 0.0 { (x0 - g0, x0) } else { (x0, x0 - g0) };
    let mut x = x0 - g0 / slope(x0);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_SCALAR_ITERS {
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let newton = x - gx / slope(x);
        x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Ok(x)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One implicit Euler step of the limit problem.
///
/// Damped Newton on the tridiagonal Jacobian built from right slopes of `β`;
/// a step is accepted only if it strictly lowers the sup norm of the
/// residual. When no damping factor achieves that, a batch of nonlinear
/// Gauss-Seidel sweeps is run before Newton resumes. Stops at
/// `‖G‖_∞ ≤ 1e-11 (1 + ‖z‖_∞)`.
pub fn step_limit(
    z: &Field,
    spec: &LimitProblemSpec,
    grid: &Grid1D,
    dt: f64,
) -> Result<(Field, StepStats), SolverError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::InvalidTime(format!("dt = {dt} must be > 0")));
    }
    let h = grid.h();
    let rhs = z
        .iter()
        .map(|&s| Ok(s + dt * spec.f_of(s)?))
        .collect::<Result<Vec<f64>, SolverError>>()?;
    let sys = System {
        spec,
        rhs,
        r: dt / (h * h),
    };
    let tol = 1e-11 * (1.0 + z.max_abs());
    let mut stats = StepStats::default();
    let mut x = sys.rhs.clone();
    let mut g = sys.residual(&x)?;
    let mut norm = sup_norm(&g);
    stats.residual_history.push(norm);
    let mut stalls = 0;
    while norm > tol {
        if !norm.is_finite() {
            return Err(SolverError::NonFinite("limit residual".into()));
        }
        let mut accepted = false;
        if stats.newton_iters < MAX_NEWTON_ITERS * (stalls + 1) {
            let delta = sys.newton_direction(&x, &g)?;
            let mut lambda = 1.0;
            for _ in 0..MAX_LINE_SEARCH {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
                let g_trial = sys.residual(&trial)?;
                let n_trial = sup_norm(&g_trial);
                if n_trial < norm {
                    x = trial;
                    g = g_trial;
                    norm = n_trial;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            stats.newton_iters += 1;
        }
        if !accepted {
            stalls += 1;
            if stalls > MAX_STALLS {
                return Err(SolverError::NoConvergence {
                    max_iters: stats.newton_iters + stats.gs_sweeps,
                    residual: norm,
                });
            }
            for _ in 0..GS_SWEEPS_PER_STALL {
                sys.gauss_seidel_sweep(&mut x)?;
                stats.gs_sweeps += 1;
            }
            g = sys.residual(&x)?;
            let n_gs = sup_norm(&g);
            if n_gs >= norm && n_gs > tol {
                return Err(SolverError::NoConvergence {
                    max_iters: stats.newton_iters + stats.gs_sweeps,
                    residual: n_gs,
                });
            }
            norm = n_gs;
        }
        stats.residual_history.push(norm);
    }
    let out = Field(x);
    out.check_finite()?;
    Ok((out, stats))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDiagnostics {
    pub t: f64,
    pub mass_z: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub l2_z: f64,
    pub linf_z: f64,
    pub newton_iters: usize,
    pub gs_sweeps: usize,
    pub residual: f64,
}

/// Snapshots of `z` and its split `(u*, v*) = ((I+α)⁻¹z, z - (I+α)⁻¹z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTrajectory {
    pub grid: Grid1D,
    pub times: Vec<f64>,
    pub z: Vec<Field>,
    pub u_star: Vec<Field>,
    pub v_star: Vec<Field>,
    pub stride: usize,
}

impl LimitTrajectory {
    pub fn z(&self) -> SpaceTime<'_> {
        SpaceTime::new(&self.grid, &self.times, &self.z)
    }

    pub fn u_star(&self) -> SpaceTime<'_> {
        SpaceTime::new(&self.grid, &self.times, &self.u_star)
    }

    pub fn v_star(&self) -> SpaceTime<'_> {
        SpaceTime::new(&self.grid, &self.times, &self.v_star)
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial state")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRun {
    pub trajectory: LimitTrajectory,
    pub diagnostics: Vec<LimitDiagnostics>,
}

impl LimitRun {
    pub fn max_step_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.residual).fold(0.0, f64::max)
    }
}

fn split(graph: &MonotoneGraph, z: &Field) -> Result<(Field, Field), SolverError> {
    let mut u = Vec::with_capacity(z.len());
    let mut v = Vec::with_capacity(z.len());
    for &s in z.iter() {
        let (a, b) = graph.limit_pair(s)?;
        u.push(a);
        v.push(b);
    }
    Ok((Field(u), Field(v)))
}

fn measure(grid: &Grid1D, t: f64, z: &Field, u: &Field, v: &Field, stats: &StepStats) -> LimitDiagnostics {
    LimitDiagnostics {
        t,
        mass_z: grid.integral(z),
        mass_u: grid.integral(u),
        mass_v: grid.integral(v),
        l2_z: grid.lp_norm(z, 2.0),
        linf_z: grid.lp_norm(z, f64::INFINITY),
        newton_iters: stats.newton_iters,
        gs_sweeps: stats.gs_sweeps,
        residual: stats.final_residual(),
    }
}

/// Integrates the limit problem from `z0` over `[0, T]`.
pub fn run_limit(
    spec: &LimitProblemSpec,
    z0: &Field,
    grid: &Grid1D,
    time: &TimeSpec,
) -> Result<LimitRun, SolverError> {
    let n_steps = time.n_steps()?;
    let mut z = Field::on(grid, z0.to_vec())?;
    let (u, v) = split(&spec.graph, &z)?;
    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    diagnostics.push(measure(grid, 0.0, &z, &u, &v, &StepStats::default()));
    let mut traj = LimitTrajectory {
        grid: *grid,
        times: vec![0.0],
        z: vec![z.clone()],
        u_star: vec![u],
        v_star: vec![v],
        stride: time.stride,
    };
    for step in 1..=n_steps {
        let (next, stats) = step_limit(&z, spec, grid, time.dt).map_err(|e| SolverError::Aborted {
            step,
            source: Box::new(e),
        })?;
        z = next;
        let t = time.time_of(step);
        let (u, v) = split(&spec.graph, &z)?;
        diagnostics.push(measure(grid, t, &z, &u, &v, &stats));
        if step % time.stride == 0 {
            traj.times.push(t);
            traj.z.push(z.clone());
            traj.u_star.push(u);
            traj.v_star.push(v);
        }
    }
    Ok(LimitRun {
        trajectory: traj,
        diagnostics,
    })
}

/// Test function `cos(mπx̂) (1 - t/T)^q` with `x̂` the position rescaled to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub m: u32,
    pub q: u32,
}

impl TestFunction {
    fn time_factor(&self, t: f64, t_end: f64) -> (f64, f64) {
        let s = 1.0 - t / t_end;
        let q = self.q as i32;
        let value = s.powi(q);
        let deriv = if q == 0 { 0.0 } else { -(q as f64) / t_end * s.powi(q - 1) };
        (value, deriv)
    }

    fn space_factor(&self, grid: &Grid1D, x: f64) -> (f64, f64) {
        let k = self.m as f64 * PI / grid.length();
        let arg = k * (x - grid.x_min());
        (arg.cos(), -k * arg.sin())
    }
}

/// `cos(mπx̂)(1 - t/T)^q` for `m = 0..=3`, `q = 1..=2`.
pub fn default_test_set() -> Vec<TestFunction> {
    (0..=3)
        .flat_map(|m| (1..=2).map(move |q| TestFunction { m, q }))
        .collect()
}

/// Largest weak-form residual over `tests`:
///
/// ```text
/// | -∫∫ φ_t z + ∫∫ ∂xβ(z) ∂xφ - ∫ z0 φ(0) - ∫∫ f(z) φ |
/// ```
///
/// Space integrals use the cell midpoints, time integrals the trapezoid
/// rule over stored snapshots, and `∂xβ(z)` centered differences with
/// mirrored ghost cells.
pub fn weak_residual(
    traj: &LimitTrajectory,
    spec: &LimitProblemSpec,
    tests: &[TestFunction],
) -> Result<f64, SolverError> {
    let grid = &traj.grid;
    let h = grid.h();
    let nt = traj.times.len();
    if nt < 2 {
        return Err(SolverError::InvalidTime("weak residual needs two snapshots".into()));
    }
    let t_end = traj.t_end();
    let xs: Vec<f64> = grid.centers().collect();
    let n = xs.len();

    // per-snapshot spatial data
    let mut grad_beta = Vec::with_capacity(nt);
    let mut source = Vec::with_capacity(nt);
    let has_source = !(spec.f1.is_zero() && spec.f2.is_zero());
    for z in &traj.z {
        let b = z
            .iter()
            .map(|&s| spec.beta_of(s))
            .collect::<Result<Vec<f64>, _>>()?;
        grad_beta.push(
            (0..n)
                .map(|i| {
                    let left = if i == 0 { b[0] } else { b[i - 1] };
                    let right = if i + 1 == n { b[n - 1] } else { b[i + 1] };
                    (right - left) / (2.0 * h)
                })
                .collect::<Vec<f64>>(),
        );
        source.push(if has_source {
            z.iter().map(|&s| spec.f_of(s)).collect::<Result<Vec<f64>, _>>()?
        } else {
            vec![0.0; n]
        });
    }

    let weights = trapezoid_weights(&traj.times);
    let mut worst = 0.0f64;
    for phi in tests {
        let space: Vec<(f64, f64)> = xs.iter().map(|&x| phi.space_factor(grid, x)).collect();
        let mut total = 0.0;
        for j in 0..nt {
            let (g, g_t) = phi.time_factor(traj.times[j], t_end);
            let mut cell_sum = 0.0;
            for i in 0..n {
                let (p, p_x) = space[i];
                cell_sum += -g_t * p * traj.z[j][i] + g * grad_beta[j][i] * p_x - g * p * source[j][i];
            }
            total += weights[j] * h * cell_sum;
        }
        let (g0, _) = phi.time_factor(0.0, t_end);
        let initial: f64 = (0..n).map(|i| space[i].0 * traj.z[0][i]).sum::<f64>() * h * g0;
        worst = worst.max((total - initial).abs());
    }
    Ok(worst)
}

/// Trapezoid weights for the given sample times.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for j in 1..n {
        let dt = times[j] - times[j - 1];
        w[j - 1] += 0.5 * dt;
        w[j] += 0.5 * dt;
    }
    w
}

/// First sign change of `z` in each snapshot, located by linear
/// interpolation between neighbouring cell centers.
pub fn interface_positions(traj: &LimitTrajectory) -> Vec<(f64, Option<f64>)> {
    traj.times
        .iter()
        .zip(&traj.z)
        .map(|(&t, z)| (t, zero_crossing(&traj.grid, z)))
        .collect()
}

fn zero_crossing(grid: &Grid1D, z: &[f64]) -> Option<f64> {
    let h = grid.h();
    (0..z.len().saturating_sub(1)).find_map(|i| {
        let (a, b) = (z[i], z[i + 1]);
        if (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) {
            Some(grid.center(i) + h * a / (a - b))
        } else {
            None
        }
    })
}
