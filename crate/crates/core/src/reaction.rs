//! Reaction terms compatible with a monotone graph, the limit source term, and
//! preparation of initial data.
//!
//! Every reaction term `F` here is nondecreasing in `u`, nonincreasing in `v`,
//! and vanishes exactly on the graph of `α`. The default is the canonical term
//! `F(u, v) = u - (I + α)⁻¹(u + v)`, which is available for any graph.

use thiserror::Error;

use crate::expr::{lipschitz_estimate, parse, Expr, ExprError};
use crate::graph::{GraphError, MonotoneGraph};
use crate::grid::{Field, Grid1D, GridError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReactionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reaction term does not vanish on the graph: F({u}, {v}) = {value}")]
    Inconsistent { u: f64, v: f64, value: f64 },
    #[error("unknown reaction kind `{0}`")]
    UnknownKind(String),
}

/// `F(u, v) = u - (I + α)⁻¹(u + v)`.
pub fn canonical_f(g: &MonotoneGraph, u: f64, v: f64) -> Result<f64, GraphError> {
    Ok(u - g.resolvent(1.0, u + v)?)
}

/// Evans' irreversible reaction term, rewritten for the reversible system.
///
/// The modified irreversible term `G(u, w)` is `u·w` when `u, w >= 0` and
/// `min(u, w)` otherwise; this returns `G(u, -v)`, so that `v <= 0` holds the
/// (negated) second concentration. Its zero set is the Heaviside graph.
pub fn evans_f(u: f64, v: f64) -> f64 {
    let w = -v;
    if u >= 0.0 && w >= 0.0 {
        u * w
    } else {
        u.min(w)
    }
}

/// `f(s) = (f1 + f2)((I + α)⁻¹ s, s - (I + α)⁻¹ s)`.
pub fn f_limit(g: &MonotoneGraph, f1: &Expr, f2: &Expr, s: f64) -> Result<f64, ReactionError> {
    let (u, v) = g.limit_pair(s)?;
    Ok(f1.eval(u, v)? + f2.eval(u, v)?)
}

/// Cellwise projection of `(a, b)` onto the zero set, preserving `a + b`.
pub fn project_to_zero_set(
    g: &MonotoneGraph,
    a: &Field,
    b: &Field,
) -> Result<(Field, Field), ReactionError> {
    if a.len() != b.len() {
        return Err(GridError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        }
        .into());
    }
    let mut u = Vec::with_capacity(a.len());
    let mut v = Vec::with_capacity(a.len());
    for (&ai, &bi) in a.iter().zip(b.iter()) {
        let s = ai + bi;
        let ui = g.resolvent(1.0, s)?;
        u.push(ui);
        v.push(s - ui);
    }
    Ok((Field(u), Field(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReactionKind {
    Canonical,
    Evans,
    /// `F(u, v) = r·u - v`, zero set `v = r·u`.
    Linear(f64),
    Custom(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionTerm {
    pub kind: ReactionKind,
    declared_lipschitz: Option<f64>,
}

impl ReactionTerm {
    pub fn new(kind: ReactionKind) -> Self {
        ReactionTerm {
            kind,
            declared_lipschitz: None,
        }
    }

    pub fn canonical() -> Self {
        Self::new(ReactionKind::Canonical)
    }

    /// `canonical`, `evans`, `linear:r` or `custom:<expr>`.
    pub fn from_name(name: &str) -> Result<Self, ReactionError> {
        let name = name.trim();
        let kind = match name {
            "canonical" => ReactionKind::Canonical,
            "evans" => ReactionKind::Evans,
            _ => {
                if let Some(r) = name.strip_prefix("linear:") {
                    let r: f64 = r
                        .trim()
                        .parse()
                        .map_err(|_| ReactionError::UnknownKind(name.to_string()))?;
                    if !(r.is_finite() && r >= 0.0) {
                        return Err(ReactionError::InvalidParameter(format!(
                            "linear rate must be nonnegative, got {r}"
                        )));
                    }
                    ReactionKind::Linear(r)
                } else if let Some(src) = name.strip_prefix("custom:") {
                    ReactionKind::Custom(parse(src)?)
                } else {
                    return Err(ReactionError::UnknownKind(name.to_string()));
                }
            }
        };
        Ok(Self::new(kind))
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.declared_lipschitz = Some(bound);
        self
    }

    pub fn value(&self, g: &MonotoneGraph, u: f64, v: f64) -> Result<f64, ReactionError> {
        Ok(match &self.kind {
            ReactionKind::Canonical => canonical_f(g, u, v)?,
            ReactionKind::Evans => evans_f(u, v),
            ReactionKind::Linear(r) => r * u - v,
            ReactionKind::Custom(e) => e.eval(u, v)?,
        })
    }

    /// `d/dw F(w, s - w)` at `w = u`, `s = u + v`; nonnegative for monotone `F`.
    pub fn slope_along_sum(&self, g: &MonotoneGraph, u: f64, v: f64) -> Result<f64, ReactionError> {
        Ok(match &self.kind {
            ReactionKind::Canonical => 1.0,
            ReactionKind::Linear(r) => r + 1.0,
            ReactionKind::Evans => {
                if u >= 0.0 && v <= 0.0 {
                    u - v
                } else {
                    1.0
                }
            }
            ReactionKind::Custom(_) => {
                let eta = 1e-7 * (1.0 + u.abs() + v.abs());
                let fp = self.value(g, u + eta, v - eta)?;
                let fm = self.value(g, u - eta, v + eta)?;
                ((fp - fm) / (2.0 * eta)).max(0.0)
            }
        })
    }

    /// Declared bound, or a bound/estimate over `[-r, r]²` w.r.t. `|du| + |dv|`.
    pub fn lipschitz_bound(&self, r: f64) -> Result<f64, ReactionError> {
        if let Some(b) = self.declared_lipschitz {
            return Ok(b);
        }
        Ok(match &self.kind {
            ReactionKind::Canonical => 2.0,
            ReactionKind::Linear(rate) => rate.max(1.0),
            // partial derivatives on the product branch are bounded by r
            ReactionKind::Evans => r.max(1.0),
            ReactionKind::Custom(e) => lipschitz_estimate(e, (-r, r), (-r, r), 65)?,
        })
    }
}

/// Full problem data of the reaction-diffusion system.
#[derive(Debug, Clone)]
pub struct ReactionSystemSpec {
    pub d1: f64,
    pub d2: f64,
    pub k: f64,
    pub f1: Expr,
    pub f2: Expr,
    pub reaction: ReactionTerm,
    alpha: MonotoneGraph,
    alpha_inv: MonotoneGraph,
}

impl ReactionSystemSpec {
    pub fn new(
        alpha: MonotoneGraph,
        reaction: ReactionTerm,
        d1: f64,
        d2: f64,
        k: f64,
    ) -> Result<Self, ReactionError> {
        if !(d1.is_finite() && d1 > 0.0) {
            return Err(ReactionError::InvalidParameter(format!("d1 must be > 0, got {d1}")));
        }
        if !(d2.is_finite() && d2 >= 0.0) {
            return Err(ReactionError::InvalidParameter(format!("d2 must be >= 0, got {d2}")));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(ReactionError::InvalidParameter(format!("k must be >= 0, got {k}")));
        }
        let alpha_inv = alpha.inverse();
        Ok(ReactionSystemSpec {
            d1,
            d2,
            k,
            f1: Expr::num(0.0),
            f2: Expr::num(0.0),
            reaction,
            alpha,
            alpha_inv,
        })
    }

    pub fn with_sources(mut self, f1: Expr, f2: Expr) -> Self {
        self.f1 = f1;
        self.f2 = f2;
        self
    }

    pub fn with_k(&self, k: f64) -> Self {
        let mut s = self.clone();
        s.k = k;
        s
    }

    pub fn alpha(&self) -> &MonotoneGraph {
        &self.alpha
    }

    pub fn alpha_inverse(&self) -> &MonotoneGraph {
        &self.alpha_inv
    }

    pub fn reaction_value(&self, u: f64, v: f64) -> Result<f64, ReactionError> {
        self.reaction.value(&self.alpha, u, v)
    }

    pub fn sources(&self, u: f64, v: f64) -> Result<(f64, f64), ReactionError> {
        Ok((self.f1.eval(u, v)?, self.f2.eval(u, v)?))
    }

    /// `α₀(u)`, with `u` projected onto the domain first.
    pub fn alpha0(&self, u: f64) -> Result<f64, GraphError> {
        self.alpha.alpha0(self.alpha.clamp_to_domain(u))
    }

    /// `γ₀(v)`, the minimal-norm selection of `α⁻¹(v)`.
    pub fn gamma0(&self, v: f64) -> Result<f64, GraphError> {
        self.alpha_inv.alpha0(self.alpha_inv.clamp_to_domain(v))
    }

    /// Checks that `F` vanishes on sampled points of the graph over `[-r, r]`.
    pub fn check_consistency(&self, r: f64, n: usize) -> Result<(), ReactionError> {
        let n = n.max(2);
        for i in 0..n {
            let u = -r + 2.0 * r * i as f64 / (n - 1) as f64;
            let Ok(sec) = self.alpha.section(u) else { continue };
            for v in [sec.lo.finite(), Some(sec.min_norm()), sec.hi.finite()]
                .into_iter()
                .flatten()
            {
                let value = self.reaction_value(u, v)?;
                if value.abs() > 1e-9 * (1.0 + u.abs() + v.abs()) {
                    return Err(ReactionError::Inconsistent { u, v, value });
                }
            }
        }
        Ok(())
    }
}

/// How the `k`-dependent initial pair is produced from the base data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitRule {
    /// Use the base data as given.
    Verbatim,
    /// Shift `u` by `c / k`, moving off the zero set at rate `1/k`.
    Perturbed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Field,
    pub v0: Field,
    pub rule: InitRule,
    pub c5: f64,
    pub c6: f64,
}

impl InitialData {
    /// Projects the profiles `(a, b)` onto the zero set.
    pub fn projected(g: &MonotoneGraph, a: &Field, b: &Field, c5: f64, c6: f64) -> Result<Self, ReactionError> {
        let (u0, v0) = project_to_zero_set(g, a, b)?;
        Ok(InitialData {
            u0,
            v0,
            rule: InitRule::Verbatim,
            c5,
            c6,
        })
    }

    pub fn family(&self, k: f64) -> (Field, Field) {
        match self.rule {
            InitRule::Verbatim => (self.u0.clone(), self.v0.clone()),
            InitRule::Perturbed(c) => (
                Field(self.u0.iter().map(|u| u + c / k).collect()),
                self.v0.clone(),
            ),
        }
    }

    /// `z0 = u0 + v0`, the initial datum of the limit problem.
    pub fn sum(&self) -> Field {
        Field(self.u0.iter().zip(self.v0.iter()).map(|(u, v)| u + v).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitReport {
    pub passed: bool,
    /// Largest `F(u0^k, v0^k) - C5/k`, clipped at zero.
    pub f_excess: f64,
    pub max_f: f64,
    /// `‖u0^k‖₂ + ‖v0^k‖₂`.
    pub l2_sum: f64,
    pub l2_excess: f64,
    /// `‖Δ_h u0^k‖₁`, reported only.
    pub laplacian_l1: f64,
}

impl InitReport {
    pub fn max_residual(&self) -> f64 {
        self.f_excess.max(self.l2_excess)
    }
}

/// Checks the initial family at rate `k` against `C5` and `C6`.
pub fn validate_initial_family(
    spec: &ReactionSystemSpec,
    init: &InitialData,
    grid: &Grid1D,
    k: f64,
) -> Result<InitReport, ReactionError> {
    if !(k > 0.0) {
        return Err(ReactionError::InvalidParameter(format!("k must be > 0, got {k}")));
    }
    let (u0, v0) = init.family(k);
    let threshold = init.c5 / k;
    let mut max_f = f64::NEG_INFINITY;
    for (&u, &v) in u0.iter().zip(v0.iter()) {
        max_f = max_f.max(spec.reaction_value(u, v)?);
    }
    let f_excess = (max_f - threshold).max(0.0);
    let l2_sum = grid.lp_norm(&u0, 2.0) + grid.lp_norm(&v0, 2.0);
    let l2_excess = (l2_sum - init.c6).max(0.0);
    let laplacian_l1 = grid.lp_norm(&grid.laplacian(&u0), 1.0);
    Ok(InitReport {
        passed: f_excess == 0.0 && l2_excess == 0.0,
        f_excess,
        max_f,
        l2_sum,
        l2_excess,
        laplacian_l1,
    })
}
