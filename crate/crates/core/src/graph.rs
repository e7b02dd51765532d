//! Piecewise-linear maximal monotone graphs.
//!
//! A graph is stored as an ordered list of knots `(u, v_lo, v_hi)`. Consecutive
//! knots are joined by straight segments running from `(u_i, v_hi_i)` to
//! `(u_{i+1}, v_lo_{i+1})`; a knot with `v_lo < v_hi` is a vertical piece of the
//! graph (a jump of the multivalued map). Beyond the outermost knots the graph
//! either continues as a ray of nonnegative slope or stops. A stop whose
//! section reaches `±∞` is the usual vertical ray of a maximal graph
//! (for example the Heaviside graph `{0} × (-∞, 0] ∪ (0, ∞) × {0}`); a stop with
//! a finite section truncates the graph to a computational window, in which case
//! the resolvent reports [`GraphError::OutOfDomain`] for unreachable arguments.
//!
//! Along the curve `s = u + λ v` is strictly increasing for every `λ > 0`, so
//! the resolvent `(I + λα)⁻¹` is computed exactly by mapping every knot to its
//! `s`-interval and interpolating linearly in between.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph has no knots")]
    EmptyGraph,
    #[error("duplicate knot at u = {u}")]
    DuplicateKnot { u: f64 },
    #[error("knot {index} is out of order")]
    UnorderedKnots { index: usize },
    #[error("graph is not monotone at knot {index}: {detail}")]
    NonMonotone { index: usize, detail: String },
    #[error("invalid tail: {0}")]
    InvalidTail(String),
    #[error("invalid growth constants: {0}")]
    InvalidGrowth(String),
    #[error("non-finite coordinate in knot {index}")]
    NonFinite { index: usize },
    #[error("argument {value} lies outside the graph domain")]
    OutOfDomain { value: f64 },
    #[error("parameter must be positive and finite, got {0}")]
    InvalidParameter(f64),
    #[error("growth constants are not declared for this graph")]
    MissingGrowthConstants,
    #[error("unknown graph preset `{0}`")]
    UnknownPreset(String),
}

/// A real number or one of the two infinities, totally ordered.
///
/// Only section endpoints and internal `s`-coordinates use this type; all
/// values handed back to callers of the pointwise maps are plain `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// Lossy conversion to `f64` (infinities map to `±f64::INFINITY`).
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::Finite(x) => x,
            Extended::PosInf => f64::INFINITY,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            Extended::NegInf
        } else if x == f64::INFINITY {
            Extended::PosInf
        } else {
            Extended::Finite(x)
        }
    }

    // u + λ·self, infinities absorb.
    fn offset(self, u: f64, lambda: f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::Finite(u + lambda * v),
            other => other,
        }
    }

    fn rank(self) -> u8 {
        match self {
            Extended::NegInf => 0,
            Extended::Finite(_) => 1,
            Extended::PosInf => 2,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            _ => self.rank().partial_cmp(&other.rank()),
        }
    }
}

impl PartialEq<f64> for Extended {
    fn eq(&self, other: &f64) -> bool {
        *self == Extended::from_f64(*other)
    }
}

impl PartialOrd<f64> for Extended {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Extended::from_f64(*other))
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => write!(f, "-inf"),
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::PosInf => write!(f, "+inf"),
        }
    }
}

/// A closed, possibly unbounded interval `α(u) = [lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: Extended,
    pub hi: Extended,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval {
            lo: Extended::Finite(x),
            hi: Extended::Finite(x),
        }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        let above = match self.lo {
            Extended::NegInf => true,
            Extended::Finite(lo) => x >= lo - tol,
            Extended::PosInf => false,
        };
        let below = match self.hi {
            Extended::PosInf => true,
            Extended::Finite(hi) => x <= hi + tol,
            Extended::NegInf => false,
        };
        above && below
    }

    /// The element of minimal absolute value.
    pub fn min_norm(&self) -> f64 {
        match (self.lo, self.hi) {
            (Extended::Finite(lo), _) if lo > 0.0 => lo,
            (_, Extended::Finite(hi)) if hi < 0.0 => hi,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub u: f64,
    pub v_lo: Extended,
    pub v_hi: Extended,
}

impl Knot {
    pub fn point(u: f64, v: f64) -> Self {
        Knot {
            u,
            v_lo: Extended::Finite(v),
            v_hi: Extended::Finite(v),
        }
    }

    pub fn jump(u: f64, v_lo: f64, v_hi: f64) -> Self {
        Knot {
            u,
            v_lo: Extended::from_f64(v_lo),
            v_hi: Extended::from_f64(v_hi),
        }
    }
}

/// Behaviour of the graph beyond its outermost knot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// A ray with the given nonnegative slope.
    Slope(f64),
    /// The domain ends at the outermost knot.
    End,
}

/// Constants of the two-sided linear growth bound `C1|u| - C2 <= |v| <= C3|u| + C4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthBound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthCheck {
    Pass,
    Fail { u: f64, v: f64, bound: GrowthBound },
}

impl GrowthCheck {
    pub fn passed(&self) -> bool {
        matches!(self, GrowthCheck::Pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneGraph {
    knots: Vec<Knot>,
    slopes: Vec<f64>,
    left: Tail,
    right: Tail,
    growth: Option<Growth>,
}

impl MonotoneGraph {
    /// Validates raw knot data and builds the graph.
    pub fn new(knots: Vec<Knot>, left: Tail, right: Tail) -> Result<Self, GraphError> {
        if knots.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let last = knots.len() - 1;
        for (i, k) in knots.iter().enumerate() {
            if !k.u.is_finite() {
                return Err(GraphError::NonFinite { index: i });
            }
            if let Extended::Finite(x) = k.v_lo {
                if !x.is_finite() {
                    return Err(GraphError::NonFinite { index: i });
                }
            }
            if let Extended::Finite(x) = k.v_hi {
                if !x.is_finite() {
                    return Err(GraphError::NonFinite { index: i });
                }
            }
            if !(k.v_lo <= k.v_hi) || k.v_lo == Extended::PosInf || k.v_hi == Extended::NegInf {
                return Err(GraphError::NonMonotone {
                    index: i,
                    detail: format!("section [{}, {}] is not an interval", k.v_lo, k.v_hi),
                });
            }
            if k.v_lo == Extended::NegInf && i != 0 {
                return Err(GraphError::NonMonotone {
                    index: i,
                    detail: "only the first knot may extend to -inf".into(),
                });
            }
            if k.v_hi == Extended::PosInf && i != last {
                return Err(GraphError::NonMonotone {
                    index: i,
                    detail: "only the last knot may extend to +inf".into(),
                });
            }
        }
        for (i, pair) in knots.windows(2).enumerate() {
            match pair[1].u.partial_cmp(&pair[0].u) {
                Some(Ordering::Equal) => return Err(GraphError::DuplicateKnot { u: pair[0].u }),
                Some(Ordering::Less) => return Err(GraphError::UnorderedKnots { index: i + 1 }),
                _ => {}
            }
        }
        let mut slopes = Vec::with_capacity(last);
        for (i, pair) in knots.windows(2).enumerate() {
            // both endpoints are finite by the checks above
            let start = pair[0].v_hi.to_f64();
            let end = pair[1].v_lo.to_f64();
            if end < start {
                return Err(GraphError::NonMonotone {
                    index: i + 1,
                    detail: format!("v drops from {start} to {end}"),
                });
            }
            slopes.push((end - start) / (pair[1].u - pair[0].u));
        }
        for (side, tail, outer) in [("left", left, knots[0].v_lo), ("right", right, knots[last].v_hi)] {
            match tail {
                Tail::Slope(m) => {
                    if !(m.is_finite() && m >= 0.0) {
                        return Err(GraphError::InvalidTail(format!(
                            "{side} slope must be finite and nonnegative, got {m}"
                        )));
                    }
                    if !outer.is_finite() {
                        return Err(GraphError::InvalidTail(format!(
                            "{side} ray cannot start from an infinite section"
                        )));
                    }
                }
                Tail::End => {}
            }
        }
        Ok(MonotoneGraph {
            knots,
            slopes,
            left,
            right,
            growth: None,
        })
    }

    pub fn with_growth(mut self, growth: Growth) -> Result<Self, GraphError> {
        for (name, c) in [("C1", growth.c1), ("C2", growth.c2), ("C3", growth.c3), ("C4", growth.c4)] {
            if !(c.is_finite() && c > 0.0) {
                return Err(GraphError::InvalidGrowth(format!("{name} = {c} must be positive")));
            }
        }
        self.growth = Some(growth);
        Ok(self)
    }

    /// `α = I`.
    pub fn identity() -> Self {
        Self::linear(1.0).expect("identity graph is valid")
    }

    /// `α ≡ 0`, the u-axis.
    pub fn zero() -> Self {
        Self::linear(0.0).expect("zero graph is valid")
    }

    /// `α(u) = r·u` for `r >= 0`.
    pub fn linear(r: f64) -> Result<Self, GraphError> {
        Self::new(vec![Knot::point(0.0, 0.0)], Tail::Slope(r), Tail::Slope(r))
    }

    /// Vertical ray `{0} × (-∞, 0]` followed by the horizontal ray `v = 0`, `u > 0`.
    pub fn heaviside() -> Self {
        Self::new(
            vec![Knot::jump(0.0, f64::NEG_INFINITY, 0.0)],
            Tail::End,
            Tail::Slope(0.0),
        )
        .expect("heaviside graph is valid")
    }

    /// Named presets: `identity`, `zero`, `heaviside`, `linear:r`.
    pub fn preset(name: &str) -> Result<Self, GraphError> {
        let name = name.trim();
        match name {
            "identity" => Ok(Self::identity()),
            "zero" => Ok(Self::zero()),
            "heaviside" => Ok(Self::heaviside()),
            _ => {
                if let Some(r) = name.strip_prefix("linear:") {
                    let r: f64 = r
                        .trim()
                        .parse()
                        .map_err(|_| GraphError::UnknownPreset(name.to_string()))?;
                    Self::linear(r)
                } else {
                    Err(GraphError::UnknownPreset(name.to_string()))
                }
            }
        }
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Slopes of the segments joining consecutive knots.
    pub fn segment_slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn left_tail(&self) -> Tail {
        self.left
    }

    pub fn right_tail(&self) -> Tail {
        self.right
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    fn last(&self) -> &Knot {
        &self.knots[self.knots.len() - 1]
    }

    /// Closed domain `[lo, hi]` of `α`, with infinite ends for rays.
    pub fn domain(&self) -> (Extended, Extended) {
        let lo = match self.left {
            Tail::Slope(_) => Extended::NegInf,
            Tail::End => Extended::Finite(self.knots[0].u),
        };
        let hi = match self.right {
            Tail::Slope(_) => Extended::PosInf,
            Tail::End => Extended::Finite(self.last().u),
        };
        (lo, hi)
    }

    /// True when the graph has no truncated end, i.e. it is maximal monotone.
    pub fn is_maximal(&self) -> bool {
        let left_ok = match self.left {
            Tail::Slope(_) => true,
            Tail::End => self.knots[0].v_lo == Extended::NegInf,
        };
        let right_ok = match self.right {
            Tail::Slope(_) => true,
            Tail::End => self.last().v_hi == Extended::PosInf,
        };
        left_ok && right_ok
    }

    /// True when the graph contains a vertical piece (a multivalued point).
    pub fn has_vertical_part(&self) -> bool {
        self.knots.iter().any(|k| k.v_lo != k.v_hi)
    }

    /// Projects `u` onto the closed domain.
    pub fn clamp_to_domain(&self, u: f64) -> f64 {
        let (lo, hi) = self.domain();
        let mut u = u;
        if let Extended::Finite(lo) = lo {
            u = u.max(lo);
        }
        if let Extended::Finite(hi) = hi {
            u = u.min(hi);
        }
        u
    }

    /// The set `α(u)`.
    pub fn section(&self, u: f64) -> Result<Interval, GraphError> {
        if !u.is_finite() {
            return Err(GraphError::OutOfDomain { value: u });
        }
        let first = &self.knots[0];
        if u < first.u {
            return match self.left {
                Tail::Slope(m) => Ok(Interval::point(first.v_lo.to_f64() + m * (u - first.u))),
                Tail::End => Err(GraphError::OutOfDomain { value: u }),
            };
        }
        let last = self.last();
        if u > last.u {
            return match self.right {
                Tail::Slope(m) => Ok(Interval::point(last.v_hi.to_f64() + m * (u - last.u))),
                Tail::End => Err(GraphError::OutOfDomain { value: u }),
            };
        }
        let i = self.knots.partition_point(|k| k.u <= u) - 1;
        let k = &self.knots[i];
        if k.u == u {
            return Ok(Interval {
                lo: k.v_lo,
                hi: k.v_hi,
            });
        }
        Ok(Interval::point(k.v_hi.to_f64() + self.slopes[i] * (u - k.u)))
    }

    /// Minimal-norm selection `α₀(u)`.
    pub fn alpha0(&self, u: f64) -> Result<f64, GraphError> {
        Ok(self.section(u)?.min_norm())
    }

    fn s_lo(&self, i: usize, lambda: f64) -> Extended {
        let k = &self.knots[i];
        k.v_lo.offset(k.u, lambda)
    }

    fn s_hi(&self, i: usize, lambda: f64) -> Extended {
        let k = &self.knots[i];
        k.v_hi.offset(k.u, lambda)
    }

    /// `(I + λα)⁻¹ s`: the unique `u` with `s ∈ u + λα(u)`.
    pub fn resolvent(&self, lambda: f64, s: f64) -> Result<f64, GraphError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(GraphError::InvalidParameter(lambda));
        }
        if !s.is_finite() {
            return Err(GraphError::OutOfDomain { value: s });
        }
        let n = self.knots.len();
        // first knot whose s-interval reaches up to s
        let i = partition(n, |j| self.s_hi(j, lambda) < s);
        if i == n {
            let last = self.last();
            return match self.right {
                Tail::Slope(m) => {
                    let s_hi = self.s_hi(n - 1, lambda).to_f64();
                    Ok(last.u + (s - s_hi) / (1.0 + lambda * m))
                }
                Tail::End => Err(GraphError::OutOfDomain { value: s }),
            };
        }
        let s_lo = self.s_lo(i, lambda);
        if s_lo <= s {
            return Ok(self.knots[i].u);
        }
        if i == 0 {
            let first = &self.knots[0];
            return match self.left {
                Tail::Slope(m) => Ok(first.u + (s - s_lo.to_f64()) / (1.0 + lambda * m)),
                Tail::End => Err(GraphError::OutOfDomain { value: s }),
            };
        }
        let a = self.s_hi(i - 1, lambda).to_f64();
        let b = s_lo.to_f64();
        let (u0, u1) = (self.knots[i - 1].u, self.knots[i].u);
        let t = ((s - a) / (b - a)).clamp(0.0, 1.0);
        Ok(u0 + t * (u1 - u0))
    }

    /// Right derivative of `s ↦ (I + λα)⁻¹ s`.
    pub fn resolvent_slope_right(&self, lambda: f64, s: f64) -> f64 {
        let n = self.knots.len();
        let i = partition(n, |j| self.s_hi(j, lambda) <= s);
        if i == n {
            return match self.right {
                Tail::Slope(m) => 1.0 / (1.0 + lambda * m),
                Tail::End => 0.0,
            };
        }
        if self.s_lo(i, lambda) <= s {
            return 0.0;
        }
        let m = if i == 0 {
            match self.left {
                Tail::Slope(m) => m,
                Tail::End => return 0.0,
            }
        } else {
            self.slopes[i - 1]
        };
        1.0 / (1.0 + lambda * m)
    }

    /// Yosida approximation `α_δ(s) = (s - (I + δα)⁻¹ s) / δ`.
    pub fn yosida(&self, delta: f64, s: f64) -> Result<f64, GraphError> {
        Ok((s - self.resolvent(delta, s)?) / delta)
    }

    /// `β(s) = d2·s + (d1 - d2)·(I + α)⁻¹ s`.
    pub fn beta(&self, d1: f64, d2: f64, s: f64) -> Result<f64, GraphError> {
        Ok(d2 * s + (d1 - d2) * self.resolvent(1.0, s)?)
    }

    /// Right derivative of [`MonotoneGraph::beta`].
    pub fn beta_slope_right(&self, d1: f64, d2: f64, s: f64) -> f64 {
        d2 + (d1 - d2) * self.resolvent_slope_right(1.0, s)
    }

    /// Splits `z` into `((I + α)⁻¹ z, z - (I + α)⁻¹ z)`.
    pub fn limit_pair(&self, z: f64) -> Result<(f64, f64), GraphError> {
        let u = self.resolvent(1.0, z)?;
        Ok((u, z - u))
    }

    /// The inverse graph `α⁻¹`, obtained by swapping coordinates.
    pub fn inverse(&self) -> MonotoneGraph {
        // corner points of the swapped curve, as (new u, new v)
        let mut points: Vec<(f64, Extended)> = Vec::with_capacity(2 * self.knots.len() + 2);
        let first = &self.knots[0];
        let last = self.last();

        let left = match self.left {
            Tail::Slope(m) if m == 0.0 => {
                points.push((first.v_lo.to_f64(), Extended::NegInf));
                Tail::End
            }
            Tail::Slope(m) => Tail::Slope(1.0 / m),
            Tail::End if first.v_lo == Extended::NegInf => Tail::Slope(0.0),
            Tail::End => Tail::End,
        };
        let right = match self.right {
            Tail::Slope(m) if m == 0.0 => Tail::End,
            Tail::Slope(m) => Tail::Slope(1.0 / m),
            Tail::End if last.v_hi == Extended::PosInf => Tail::Slope(0.0),
            Tail::End => Tail::End,
        };
        for k in &self.knots {
            if let Extended::Finite(v) = k.v_lo {
                points.push((v, Extended::Finite(k.u)));
            }
            if k.v_hi != k.v_lo {
                if let Extended::Finite(v) = k.v_hi {
                    points.push((v, Extended::Finite(k.u)));
                }
            }
        }
        if let Tail::Slope(m) = self.right {
            if m == 0.0 {
                points.push((last.v_hi.to_f64(), Extended::PosInf));
            }
        }
        if points.is_empty() {
            // α is a single vertical line, so α⁻¹ is constant
            points.push((0.0, Extended::Finite(first.u)));
        }

        let mut knots: Vec<Knot> = Vec::with_capacity(points.len());
        for (u, v) in points {
            match knots.last_mut() {
                Some(k) if k.u == u => {
                    if v < k.v_lo {
                        k.v_lo = v;
                    }
                    if v > k.v_hi {
                        k.v_hi = v;
                    }
                }
                _ => knots.push(Knot { u, v_lo: v, v_hi: v }),
            }
        }
        let mut inv = MonotoneGraph::new(knots, left, right)
            .expect("inverse of a monotone graph is monotone");
        inv.growth = self.growth.map(|g| Growth {
            c1: 1.0 / g.c3,
            c2: g.c4 / g.c3,
            c3: 1.0 / g.c1,
            c4: g.c2 / g.c1,
        });
        inv
    }

    /// Samples the curve over `[u_min, u_max]` and checks the growth bound.
    ///
    /// Finite section endpoints and the minimal-norm element are checked at
    /// `n_samples` equispaced abscissae and at every knot inside the range.
    /// Infinite section endpoints lie outside any bounded window and are
    /// skipped, as are abscissae outside the domain. The first violation in
    /// increasing `u` is returned as the witness.
    pub fn check_growth(
        &self,
        u_min: f64,
        u_max: f64,
        n_samples: usize,
    ) -> Result<GrowthCheck, GraphError> {
        let g = self.growth.ok_or(GraphError::MissingGrowthConstants)?;
        let mut us: Vec<f64> = if u_min == u_max || n_samples <= 1 {
            vec![u_min]
        } else {
            (0..n_samples)
                .map(|i| u_min + (u_max - u_min) * i as f64 / (n_samples - 1) as f64)
                .collect()
        };
        us.extend(
            self.knots
                .iter()
                .map(|k| k.u)
                .filter(|&u| u >= u_min && u <= u_max),
        );
        us.sort_by(|a, b| a.total_cmp(b));
        us.dedup();
        for u in us {
            let Ok(sec) = self.section(u) else { continue };
            let candidates = [sec.lo.finite(), Some(sec.min_norm()), sec.hi.finite()];
            for v in candidates.into_iter().flatten() {
                if g.c1 * u.abs() - g.c2 > v.abs() {
                    return Ok(GrowthCheck::Fail {
                        u,
                        v,
                        bound: GrowthBound::Lower,
                    });
                }
                if v.abs() > g.c3 * u.abs() + g.c4 {
                    return Ok(GrowthCheck::Fail {
                        u,
                        v,
                        bound: GrowthBound::Upper,
                    });
                }
            }
        }
        Ok(GrowthCheck::Pass)
    }
}

fn partition(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn presets_are_valid() {
        for name in ["identity", "zero", "heaviside", "linear:2.5"] {
            MonotoneGraph::preset(name).unwrap();
        }
        assert!(matches!(
            MonotoneGraph::preset("parabola"),
            Err(GraphError::UnknownPreset(_))
        ));
        assert!(MonotoneGraph::heaviside().is_maximal());
    }

    #[test]
    fn rejects_bad_knots() {
        let err = MonotoneGraph::new(vec![], Tail::End, Tail::End).unwrap_err();
        assert_eq!(err, GraphError::EmptyGraph);

        let err = MonotoneGraph::new(
            vec![Knot::point(0.0, 1.0), Knot::point(1.0, 0.0)],
            Tail::Slope(0.0),
            Tail::Slope(0.0),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::NonMonotone { index: 1, .. }));

        let err = MonotoneGraph::new(
            vec![Knot::point(0.0, 0.0), Knot::point(0.0, 1.0)],
            Tail::Slope(0.0),
            Tail::Slope(0.0),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DuplicateKnot { .. }));

        let err = MonotoneGraph::new(
            vec![Knot::point(0.0, 0.0)],
            Tail::Slope(-1.0),
            Tail::Slope(0.0),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::InvalidTail(_)));

        let err = MonotoneGraph::new(
            vec![Knot::jump(0.0, f64::NEG_INFINITY, 0.0)],
            Tail::Slope(1.0),
            Tail::Slope(0.0),
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::InvalidTail(_)));
    }

    #[test]
    fn heaviside_resolvent_is_positive_part() {
        let g = MonotoneGraph::heaviside();
        assert_eq!(g.resolvent(1.0, -3.0).unwrap(), 0.0);
        assert_eq!(g.resolvent(1.0, 5.0).unwrap(), 5.0);
        assert_eq!(g.resolvent(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_resolvent_halves() {
        let g = MonotoneGraph::identity();
        assert!(close(g.resolvent(1.0, 4.0).unwrap(), 2.0));
        assert!(close(g.resolvent(3.0, 4.0).unwrap(), 1.0));
    }

    #[test]
    fn yosida_examples() {
        assert!(close(MonotoneGraph::identity().yosida(1.0, 4.0).unwrap(), 2.0));
        assert_eq!(MonotoneGraph::heaviside().yosida(0.5, 2.0).unwrap(), 0.0);
        // Heaviside Yosida approximation is min(s, 0) / δ
        assert!(close(MonotoneGraph::heaviside().yosida(0.5, -1.0).unwrap(), -2.0));
    }

    #[test]
    fn sections() {
        let h = MonotoneGraph::heaviside();
        let s = h.section(0.0).unwrap();
        assert_eq!(s.lo, Extended::NegInf);
        assert_eq!(s.hi, 0.0);
        assert!(matches!(h.section(-1.0), Err(GraphError::OutOfDomain { .. })));
        assert_eq!(MonotoneGraph::identity().section(3.0).unwrap(), Interval::point(3.0));
        assert_eq!(h.alpha0(0.0).unwrap(), 0.0);

        let g = MonotoneGraph::new(
            vec![Knot::jump(0.0, -1.0, 2.0), Knot::point(1.0, 3.0)],
            Tail::Slope(0.5),
            Tail::Slope(1.0),
        )
        .unwrap();
        let s = g.section(0.0).unwrap();
        assert_eq!((s.lo, s.hi), (Extended::Finite(-1.0), Extended::Finite(2.0)));
        assert_eq!(g.section(0.5).unwrap(), Interval::point(2.5));
        assert_eq!(g.section(-2.0).unwrap(), Interval::point(-2.0));
        assert_eq!(g.section(3.0).unwrap(), Interval::point(5.0));
    }

    #[test]
    fn beta_examples() {
        let h = MonotoneGraph::heaviside();
        assert!(close(h.beta(2.0, 0.5, -3.0).unwrap(), -1.5));
        assert!(close(h.beta(2.0, 0.5, 4.0).unwrap(), 8.0));
        for d2 in [0.0, 0.3, 4.0] {
            assert!(close(MonotoneGraph::zero().beta(1.7, d2, 7.0).unwrap(), 1.7 * 7.0));
        }
        assert_eq!(h.beta_slope_right(2.0, 0.5, -1.0), 0.5);
        assert_eq!(h.beta_slope_right(2.0, 0.5, 0.0), 2.0);
        assert_eq!(h.beta_slope_right(2.0, 0.5, 1.0), 2.0);
    }

    #[test]
    fn limit_pair_examples() {
        let h = MonotoneGraph::heaviside();
        assert_eq!(h.limit_pair(-3.0).unwrap(), (0.0, -3.0));
        assert_eq!(h.limit_pair(5.0).unwrap(), (5.0, 0.0));
        let (u, v) = MonotoneGraph::identity().limit_pair(6.0).unwrap();
        assert!(close(u, 3.0) && close(v, 3.0));
    }

    #[test]
    fn inverse_examples() {
        let id = MonotoneGraph::identity();
        assert_eq!(id.inverse(), id);

        let inv = MonotoneGraph::heaviside().inverse();
        assert_eq!(inv.knots(), &[Knot::jump(0.0, 0.0, f64::INFINITY)]);
        assert_eq!(inv.left_tail(), Tail::Slope(0.0));
        assert_eq!(inv.right_tail(), Tail::End);
        assert_eq!(inv.inverse(), MonotoneGraph::heaviside());

        let zero = MonotoneGraph::zero();
        let vertical = zero.inverse();
        assert_eq!(
            vertical.knots(),
            &[Knot::jump(0.0, f64::NEG_INFINITY, f64::INFINITY)]
        );
        assert_eq!(vertical.inverse(), zero);
    }

    #[test]
    fn truncated_graph_reports_out_of_domain() {
        let g = MonotoneGraph::new(
            vec![Knot::point(0.0, 0.0), Knot::point(1.0, 1.0)],
            Tail::End,
            Tail::End,
        )
        .unwrap();
        assert!(!g.is_maximal());
        assert!(matches!(g.resolvent(1.0, -0.1), Err(GraphError::OutOfDomain { .. })));
        assert!(matches!(g.resolvent(1.0, 2.1), Err(GraphError::OutOfDomain { .. })));
        assert!(close(g.resolvent(1.0, 1.0).unwrap(), 0.5));
    }

    #[test]
    fn growth_checks() {
        let g = MonotoneGraph::identity()
            .with_growth(Growth { c1: 1.0, c2: 1.0, c3: 1.0, c4: 1.0 })
            .unwrap();
        assert!(g.check_growth(-10.0, 10.0, 101).unwrap().passed());

        let z = MonotoneGraph::zero()
            .with_growth(Growth { c1: 1.0, c2: 0.5, c3: 1.0, c4: 1.0 })
            .unwrap();
        assert_eq!(
            z.check_growth(0.0, 1.0, 2).unwrap(),
            GrowthCheck::Fail { u: 1.0, v: 0.0, bound: GrowthBound::Lower }
        );

        let h = MonotoneGraph::heaviside()
            .with_growth(Growth { c1: 1.0, c2: 20.0, c3: 1.0, c4: 1.0 })
            .unwrap();
        assert!(h.check_growth(0.0, 10.0, 1001).unwrap().passed());
        // a single point when the range degenerates
        assert!(h.check_growth(3.0, 3.0, 50).unwrap().passed());

        assert_eq!(
            MonotoneGraph::zero().check_growth(0.0, 1.0, 3),
            Err(GraphError::MissingGrowthConstants)
        );
        assert!(MonotoneGraph::zero()
            .with_growth(Growth { c1: 0.0, c2: 1.0, c3: 1.0, c4: 1.0 })
            .is_err());
    }

    #[test]
    fn extended_ordering() {
        assert!(Extended::NegInf < Extended::Finite(-1e300));
        assert!(Extended::Finite(1e300) < Extended::PosInf);
        assert!(Extended::Finite(1.0) < Extended::Finite(2.0));
    }
}
