//! Operator-split integrator for the stiff reaction-diffusion system
//!
//! ```text
//! u_t = d1 u_xx + f1(u, v) - k F(u, v)
//! v_t = d2 v_xx + f2(u, v) + k F(u, v)
//! ```
//!
//! with zero-flux boundaries. Each step treats the reaction cellwise and
//! implicitly (the sources `f1`, `f2` explicitly), then diffuses `u` and `v`
//! by backward Euler. The implicit reaction keeps the scheme stable for any
//! `k·dt`, which is what makes sweeps towards `k → ∞` affordable.

use crate::grid::{implicit_diffusion, Field, Grid1D};
use crate::reaction::ReactionSystemSpec;
use crate::trajectory::{SolverError, Splitting, TimeSpec, Trajectory};

const MAX_ROOT_ITERS: usize = 200;
const MAX_BRACKET_EXPANSIONS: usize = 200;

/// One implicit reaction substep in a single cell.
///
/// Solves `u' = u + dt f1(u,v) - dt k F(u',v')`, `v' = v + dt f2(u,v) + dt k F(u',v')`.
/// The sum `u' + v'` is known in advance, so `u'` is the root of the strictly
/// increasing map `w ↦ (w + dt k F(w, s' - w) - a) / (1 + dt k)` with
/// `a = u + dt f1`. The root is found by Newton's method inside a bisection
/// bracket, to a residual of `1e-12 (1 + |s'|)` or until the bracket
/// collapses to a few ulps.
pub fn reaction_substep_cell(
    spec: &ReactionSystemSpec,
    u: f64,
    v: f64,
    dt: f64,
) -> Result<(f64, f64), SolverError> {
    let (f1, f2) = spec.sources(u, v)?;
    let a = u + dt * f1;
    let b = v + dt * f2;
    let s = a + b;
    if !s.is_finite() {
        return Err(SolverError::NonFinite(format!("reaction input ({u}, {v})")));
    }
    let c = dt * spec.k;
    if c == 0.0 {
        return Ok((a, b));
    }
    let scale = 1.0 / (1.0 + c);
    let phi = |w: f64| -> Result<f64, SolverError> {
        Ok(((w - a) + c * spec.reaction_value(w, s - w)?) * scale)
    };
    let tol = 1e-12 * (1.0 + s.abs());

    // the zero set meets the line u + v = s at the resolvent
    let anchor = spec.alpha().resolvent(1.0, s).unwrap_or(a);
    let mut lo = a.min(anchor);
    let mut hi = a.max(anchor);
    let mut width = (hi - lo).max(1e-8 * (1.0 + s.abs()));
    let mut phi_lo = phi(lo)?;
    let mut expansions = 0;
    while phi_lo > 0.0 {
        lo -= width;
        width *= 2.0;
        phi_lo = phi(lo)?;
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS || !lo.is_finite() {
            return Err(SolverError::NoBracket { u, v });
        }
    }
    let mut phi_hi = phi(hi)?;
    while phi_hi < 0.0 {
        hi += width;
        width *= 2.0;
        phi_hi = phi(hi)?;
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS || !hi.is_finite() {
            return Err(SolverError::NoBracket { u, v });
        }
    }
    if phi_lo == 0.0 {
        return Ok((lo, s - lo));
    }
    if phi_hi == 0.0 {
        return Ok((hi, s - hi));
    }

    let mut w = ((a + c * anchor) * scale).clamp(lo, hi);
    for _ in 0..MAX_ROOT_ITERS {
        let r = phi(w)?;
        if !r.is_finite() {
            return Err(SolverError::NonFinite(format!("reaction residual at w = {w}")));
        }
        if r.abs() <= tol {
            return Ok((w, s - w));
        }
        if r < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            return Ok((w, s - w));
        }
        let slope = (1.0 + c * spec.reaction.slope_along_sum(spec.alpha(), w, s - w)?) * scale;
        let newton = w - r / slope;
        w = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(SolverError::NoConvergence {
        max_iters: MAX_ROOT_ITERS,
        residual: phi(w)?.abs(),
    })
}

/// Backward-Euler diffusion substep `(I - dt d Δ_h) w = field`.
pub fn diffusion_substep(field: &Field, d: f64, dt: f64, grid: &Grid1D) -> Result<Field, SolverError> {
    if !(d >= 0.0 && dt > 0.0) {
        return Err(SolverError::InvalidTime(format!("diffusion with d = {d}, dt = {dt}")));
    }
    let w = Field(implicit_diffusion(grid, field, d, dt)?);
    w.check_finite()?;
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdState {
    pub u: Field,
    pub v: Field,
}

/// Increments of the two dissipation functionals over one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dissipation {
    /// `k ∫∫ F(u,v) (α₀(u) - v)`.
    pub d_alpha: f64,
    /// `k ∫∫ F(u,v) (u - γ₀(v))`.
    pub d_gamma: f64,
}

fn reaction_sweep(
    state: &mut RdState,
    spec: &ReactionSystemSpec,
    grid: &Grid1D,
    dt: f64,
) -> Result<Dissipation, SolverError> {
    let mut acc = Dissipation::default();
    for (u, v) in state.u.iter_mut().zip(state.v.iter_mut()) {
        let (un, vn) = reaction_substep_cell(spec, *u, *v, dt)?;
        *u = un;
        *v = vn;
        if spec.k > 0.0 {
            let f = spec.reaction_value(un, vn)?;
            if f != 0.0 {
                acc.d_alpha += f * (spec.alpha0(un)? - vn);
                acc.d_gamma += f * (un - spec.gamma0(vn)?);
            }
        }
    }
    let w = spec.k * grid.h() * dt;
    acc.d_alpha *= w;
    acc.d_gamma *= w;
    Ok(acc)
}

/// One split step: cellwise reaction, then diffusion of `u` with `d1` and of
/// `v` with `d2`. Strang splitting wraps the diffusion between two half
/// reaction substeps.
pub fn step_rd(
    state: &RdState,
    spec: &ReactionSystemSpec,
    grid: &Grid1D,
    dt: f64,
    splitting: Splitting,
) -> Result<(RdState, Dissipation), SolverError> {
    if !(dt > 0.0) {
        return Err(SolverError::InvalidTime(format!("dt = {dt} must be > 0")));
    }
    let mut next = state.clone();
    let mut diss = match splitting {
        Splitting::Lie => reaction_sweep(&mut next, spec, grid, dt)?,
        Splitting::Strang => reaction_sweep(&mut next, spec, grid, 0.5 * dt)?,
    };
    next.u = diffusion_substep(&next.u, spec.d1, dt, grid)?;
    next.v = diffusion_substep(&next.v, spec.d2, dt, grid)?;
    if splitting == Splitting::Strang {
        let second = reaction_sweep(&mut next, spec, grid, 0.5 * dt)?;
        diss.d_alpha += second.d_alpha;
        diss.d_gamma += second.d_gamma;
    }
    next.u.check_finite()?;
    next.v.check_finite()?;
    Ok((next, diss))
}

/// Per-step scalar diagnostics of a reaction-diffusion run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdDiagnostics {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub mass_sum: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    pub l4_u: f64,
    pub l4_v: f64,
    pub linf_u: f64,
    pub linf_v: f64,
    /// Running sums of the dissipation functionals.
    pub d_alpha: f64,
    pub d_gamma: f64,
}

impl RdDiagnostics {
    fn measure(grid: &Grid1D, t: f64, state: &RdState, d_alpha: f64, d_gamma: f64) -> Self {
        let mass_u = grid.integral(&state.u);
        let mass_v = grid.integral(&state.v);
        let sum: Vec<f64> = state.u.iter().zip(state.v.iter()).map(|(u, v)| u + v).collect();
        RdDiagnostics {
            t,
            mass_u,
            mass_v,
            mass_sum: grid.integral(&sum),
            l2_u: grid.lp_norm(&state.u, 2.0),
            l2_v: grid.lp_norm(&state.v, 2.0),
            l4_u: grid.lp_norm(&state.u, 4.0),
            l4_v: grid.lp_norm(&state.v, 4.0),
            linf_u: grid.lp_norm(&state.u, f64::INFINITY),
            linf_v: grid.lp_norm(&state.v, f64::INFINITY),
            d_alpha,
            d_gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdRun {
    pub trajectory: Trajectory,
    /// One row for the initial state and one after every step.
    pub diagnostics: Vec<RdDiagnostics>,
}

impl RdRun {
    pub fn final_diagnostics(&self) -> &RdDiagnostics {
        self.diagnostics.last().expect("diagnostics include the initial state")
    }

    /// `max_t (‖u‖_∞ + ‖v‖_∞)`.
    pub fn linf_max(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.linf_u + d.linf_v)
            .fold(0.0, f64::max)
    }
}

/// Integrates from `(u0, v0)` over `[0, T]`, storing every `stride`-th state.
pub fn run_rd(
    spec: &ReactionSystemSpec,
    u0: &Field,
    v0: &Field,
    grid: &Grid1D,
    time: &TimeSpec,
) -> Result<RdRun, SolverError> {
    let n_steps = time.n_steps()?;
    let mut state = RdState {
        u: Field::on(grid, u0.to_vec())?,
        v: Field::on(grid, v0.to_vec())?,
    };
    let mut traj = Trajectory {
        grid: *grid,
        times: vec![0.0],
        u: vec![state.u.clone()],
        v: vec![state.v.clone()],
        stride: time.stride,
    };
    let mut diagnostics = Vec::with_capacity(n_steps + 1);
    diagnostics.push(RdDiagnostics::measure(grid, 0.0, &state, 0.0, 0.0));
    let (mut d_alpha, mut d_gamma) = (0.0, 0.0);
    for step in 1..=n_steps {
        let (next, diss) = step_rd(&state, spec, grid, time.dt, time.splitting).map_err(|e| {
            SolverError::Aborted {
                step,
                source: Box::new(e),
            }
        })?;
        state = next;
        d_alpha += diss.d_alpha;
        d_gamma += diss.d_gamma;
        let t = time.time_of(step);
        diagnostics.push(RdDiagnostics::measure(grid, t, &state, d_alpha, d_gamma));
        if step % time.stride == 0 {
            traj.times.push(t);
            traj.u.push(state.u.clone());
            traj.v.push(state.v.clone());
        }
    }
    Ok(RdRun {
        trajectory: traj,
        diagnostics,
    })
}
