//! Space-time error norms, translation moduli and tail estimates on stored
//! snapshots.
//!
//! All quantities use the midpoint rule in space and the trapezoid rule in
//! time, so a field constant in `t` integrates exactly over `[0, T]`.

use thiserror::Error;

use crate::limit::trapezoid_weights;
use crate::trajectory::SpaceTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("space-time fields differ in shape: {0}")]
    ShapeMismatch(String),
    #[error("exponent s = {0} must be finite and >= 1")]
    InvalidExponent(f64),
    #[error("tau = {tau} exceeds the horizon T = {t_end}")]
    TauTooLarge { tau: f64, t_end: f64 },
    #[error("tau = {tau} is not a multiple of the snapshot spacing {spacing}")]
    TauNotMultiple { tau: f64, spacing: f64 },
    #[error("|xi| = {xi} exceeds 2r = {limit}")]
    XiTooLarge { xi: f64, limit: f64 },
    #[error("xi = {xi} is not a multiple of h = {h}")]
    XiNotMultiple { xi: f64, h: f64 },
    #[error("no cell lies at distance >= 2r = {0} from the boundary")]
    EmptyInterior(f64),
    #[error("fraction {0} must lie in (0, 1)")]
    InvalidFraction(f64),
    #[error("a field needs at least one snapshot")]
    NoSnapshots,
}

fn check_exponent(s: f64) -> Result<(), MetricError> {
    if s.is_finite() && s >= 1.0 {
        Ok(())
    } else {
        Err(MetricError::InvalidExponent(s))
    }
}

fn check_shape(a: &SpaceTime, b: &SpaceTime) -> Result<(), MetricError> {
    if a.grid != b.grid {
        return Err(MetricError::ShapeMismatch("different grids".into()));
    }
    if a.times.len() != b.times.len() || a.frames.len() != b.frames.len() {
        return Err(MetricError::ShapeMismatch(format!(
            "{} vs {} snapshots",
            a.frames.len(),
            b.frames.len()
        )));
    }
    if a.times.iter().zip(b.times).any(|(x, y)| (x - y).abs() > 1e-9 * (1.0 + x.abs())) {
        return Err(MetricError::ShapeMismatch("different snapshot times".into()));
    }
    if a.frames.iter().chain(b.frames).any(|f| f.len() != a.grid.n_cells()) {
        return Err(MetricError::ShapeMismatch("frame length differs from the grid".into()));
    }
    Ok(())
}

/// `‖A - B‖_{L^s(Ω×(0,T))}`.
pub fn error_ls(a: &SpaceTime, b: &SpaceTime, s: f64) -> Result<f64, MetricError> {
    check_exponent(s)?;
    check_shape(a, b)?;
    if a.frames.is_empty() {
        return Err(MetricError::NoSnapshots);
    }
    let h = a.grid.h();
    let w = trapezoid_weights(a.times);
    let mut total = 0.0;
    for (j, (fa, fb)) in a.frames.iter().zip(b.frames).enumerate() {
        let cell: f64 = fa.iter().zip(fb.iter()).map(|(x, y)| (x - y).abs().powf(s)).sum();
        total += w[j] * h * cell;
    }
    Ok(total.powf(1.0 / s))
}

/// Number of snapshot intervals in `tau`.
fn snapshot_shift(a: &SpaceTime, tau: f64) -> Result<usize, MetricError> {
    let t_end = *a.times.last().ok_or(MetricError::NoSnapshots)?;
    if !(tau >= 0.0) {
        return Err(MetricError::TauNotMultiple { tau, spacing: 0.0 });
    }
    if tau > t_end * (1.0 + 1e-12) {
        return Err(MetricError::TauTooLarge { tau, t_end });
    }
    if tau == 0.0 {
        return Ok(0);
    }
    let spacing = if a.times.len() > 1 { a.times[1] - a.times[0] } else { 0.0 };
    let m = (tau / spacing).round();
    if spacing <= 0.0 || (m * spacing - tau).abs() > 1e-9 * spacing {
        return Err(MetricError::TauNotMultiple { tau, spacing });
    }
    Ok(m as usize)
}

/// `(∫_0^{T-τ} ∫_Ω |A(x, t+τ) - A(x, t)|^s)^{1/s}`.
pub fn time_translation_modulus(a: &SpaceTime, tau: f64, s: f64) -> Result<f64, MetricError> {
    check_exponent(s)?;
    let m = snapshot_shift(a, tau)?;
    if m == 0 {
        return Ok(0.0);
    }
    let nt = a.times.len();
    let w = trapezoid_weights(&a.times[..nt - m]);
    let h = a.grid.h();
    let mut total = 0.0;
    for j in 0..nt - m {
        let cell: f64 = a.frames[j + m]
            .iter()
            .zip(a.frames[j].iter())
            .map(|(x, y)| (x - y).abs().powf(s))
            .sum();
        total += w[j] * h * cell;
    }
    Ok(total.powf(1.0 / s))
}

/// Cells whose center lies at distance at least `2r` from both ends.
pub fn interior_cells(a: &SpaceTime, r: f64) -> Vec<usize> {
    let g = a.grid;
    let slack = 1e-12 * g.length();
    (0..g.n_cells())
        .filter(|&i| {
            let x = g.center(i);
            x - g.x_min() >= 2.0 * r - slack && g.x_max() - x >= 2.0 * r - slack
        })
        .collect()
}

/// `(∫_0^T ∫_{Ω_r} |A(x+ξ, t) - A(x, t)|^s)^{1/s}` with `Ω_r` the cells at
/// distance `2r` or more from the boundary.
pub fn space_translation_modulus(a: &SpaceTime, xi: f64, s: f64, r: f64) -> Result<f64, MetricError> {
    check_exponent(s)?;
    if a.frames.is_empty() {
        return Err(MetricError::NoSnapshots);
    }
    let h = a.grid.h();
    if xi.abs() > 2.0 * r * (1.0 + 1e-12) {
        return Err(MetricError::XiTooLarge { xi, limit: 2.0 * r });
    }
    let m = (xi / h).round();
    if (m * h - xi).abs() > 1e-9 * h {
        return Err(MetricError::XiNotMultiple { xi, h });
    }
    let cells = interior_cells(a, r);
    if cells.is_empty() {
        return Err(MetricError::EmptyInterior(2.0 * r));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let m = m as isize;
    let n = a.grid.n_cells() as isize;
    let w = trapezoid_weights(a.times);
    let mut total = 0.0;
    for (j, frame) in a.frames.iter().enumerate() {
        let mut cell = 0.0;
        for &i in &cells {
            let shifted = (i as isize + m).clamp(0, n - 1) as usize;
            cell += (frame[shifted] - frame[i]).abs().powf(s);
        }
        total += w[j] * h * cell;
    }
    Ok(total.powf(1.0 / s))
}

/// `L^s` norm of a field outside a central box, with its Hölder bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    pub value: f64,
    /// `‖A‖_{L²(Q)} · meas(Q \ ω)^{(2-s)/(2s)}`.
    pub bound: f64,
    /// Discrete measure of the complement.
    pub measure: f64,
}

fn overlap(lo: f64, hi: f64, box_lo: f64, box_hi: f64) -> f64 {
    (hi.min(box_hi) - lo.max(box_lo)).max(0.0)
}

/// `L^s` norm of `A` over the complement of the centered box `ω` of sides
/// `√θ|Ω|` and `√θT`, so `meas(ω) = θ |Q_T|`. Cells straddling the box
/// boundary contribute with their exact fractional overlap.
pub fn tail_mass(a: &SpaceTime, s: f64, omega_fraction: f64) -> Result<TailMass, MetricError> {
    check_exponent(s)?;
    if !(omega_fraction > 0.0 && omega_fraction < 1.0) {
        return Err(MetricError::InvalidFraction(omega_fraction));
    }
    let nt = a.times.len();
    if nt < 2 {
        return Err(MetricError::NoSnapshots);
    }
    let g = a.grid;
    let h = g.h();
    let side = omega_fraction.sqrt();
    let (t0, t_end) = (a.times[0], a.times[nt - 1]);
    let x_mid = 0.5 * (g.x_min() + g.x_max());
    let t_mid = 0.5 * (t0 + t_end);
    let (bx_lo, bx_hi) = (x_mid - 0.5 * side * g.length(), x_mid + 0.5 * side * g.length());
    let (bt_lo, bt_hi) = (t_mid - 0.5 * side * (t_end - t0), t_mid + 0.5 * side * (t_end - t0));

    let w = trapezoid_weights(a.times);
    let ox: Vec<f64> = (0..g.n_cells())
        .map(|i| {
            let x = g.center(i);
            overlap(x - 0.5 * h, x + 0.5 * h, bx_lo, bx_hi)
        })
        .collect();
    let ot: Vec<f64> = (0..nt)
        .map(|j| {
            let lo = if j == 0 { t0 } else { 0.5 * (a.times[j - 1] + a.times[j]) };
            let hi = if j + 1 == nt { t_end } else { 0.5 * (a.times[j] + a.times[j + 1]) };
            overlap(lo, hi, bt_lo, bt_hi)
        })
        .collect();

    let (mut tail, mut l2, mut measure) = (0.0, 0.0, 0.0);
    for (j, frame) in a.frames.iter().enumerate() {
        for (i, &x) in frame.iter().enumerate() {
            let full = h * w[j];
            let c = (full - ox[i] * ot[j]).max(0.0);
            tail += c * x.abs().powf(s);
            l2 += full * x * x;
            measure += c;
        }
    }
    Ok(TailMass {
        value: tail.powf(1.0 / s),
        bound: l2.sqrt() * measure.powf((2.0 - s) / (2.0 * s)),
        measure,
    })
}

/// Least-squares slope of `ln err` against `ln k`; `None` with fewer than two
/// points or a nonpositive value.
pub fn fit_log_slope(ks: &[f64], errs: &[f64]) -> Option<f64> {
    if ks.len() != errs.len() || ks.len() < 2 {
        return None;
    }
    if ks.iter().chain(errs).any(|&x| !(x > 0.0 && x.is_finite())) {
        return None;
    }
    let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid1D};

    struct Frames {
        grid: Grid1D,
        times: Vec<f64>,
        frames: Vec<Field>,
    }

    impl Frames {
        fn new(n: usize, nt: usize, t_end: f64, f: impl Fn(f64, f64) -> f64) -> Self {
            let grid = Grid1D::unit(n).unwrap();
            let times: Vec<f64> = (0..nt).map(|j| t_end * j as f64 / (nt - 1) as f64).collect();
            let frames = times.iter().map(|&t| grid.field_from(|x| f(x, t))).collect();
            Frames { grid, times, frames }
        }

        fn view(&self) -> SpaceTime<'_> {
            SpaceTime::new(&self.grid, &self.times, &self.frames)
        }
    }

    #[test]
    fn error_of_identical_fields_is_zero() {
        let a = Frames::new(10, 5, 1.0, |x, t| x * t);
        assert_eq!(error_ls(&a.view(), &a.view(), 1.5).unwrap(), 0.0);
    }

    #[test]
    fn constant_difference() {
        let a = Frames::new(10, 5, 0.4, |x, t| x + t);
        let b = Frames::new(10, 5, 0.4, |x, t| x + t - 0.3);
        for s in [1.0, 1.5, 2.0] {
            let want = 0.3 * (1.0f64 * 0.4).powf(1.0 / s);
            assert!((error_ls(&a.view(), &b.view(), s).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = Frames::new(10, 5, 1.0, |_, _| 0.0);
        let b = Frames::new(12, 5, 1.0, |_, _| 0.0);
        let c = Frames::new(10, 4, 1.0, |_, _| 0.0);
        assert!(matches!(error_ls(&a.view(), &b.view(), 1.0), Err(MetricError::ShapeMismatch(_))));
        assert!(matches!(error_ls(&a.view(), &c.view(), 1.0), Err(MetricError::ShapeMismatch(_))));
        assert!(matches!(error_ls(&a.view(), &a.view(), 0.5), Err(MetricError::InvalidExponent(_))));
    }

    #[test]
    fn time_modulus_examples() {
        let still = Frames::new(8, 11, 1.0, |x, _| x * x);
        assert_eq!(time_translation_modulus(&still.view(), 0.2, 1.0).unwrap(), 0.0);
        let ramp = Frames::new(8, 11, 1.0, |_, t| t);
        assert_eq!(time_translation_modulus(&ramp.view(), 0.0, 1.0).unwrap(), 0.0);
        for &(tau, s) in &[(0.2, 1.0), (0.3, 1.5), (0.5, 2.0)] {
            let want = tau * ((1.0 - tau) * 1.0f64).powf(1.0 / s);
            let got = time_translation_modulus(&ramp.view(), tau, s).unwrap();
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        assert!(matches!(
            time_translation_modulus(&ramp.view(), 1.5, 1.0),
            Err(MetricError::TauTooLarge { .. })
        ));
        assert!(matches!(
            time_translation_modulus(&ramp.view(), 0.15, 1.0),
            Err(MetricError::TauNotMultiple { .. })
        ));
    }

    #[test]
    fn space_modulus_examples() {
        let flat = Frames::new(20, 3, 1.0, |_, t| t);
        assert_eq!(space_translation_modulus(&flat.view(), 0.1, 1.0, 0.1).unwrap(), 0.0);
        let line = Frames::new(20, 3, 1.0, |x, _| x);
        assert_eq!(space_translation_modulus(&line.view(), 0.0, 1.0, 0.1).unwrap(), 0.0);
        let r = 0.1;
        let cells = interior_cells(&line.view(), r);
        // centers 0.225 .. 0.775
        assert_eq!(cells.len(), 12);
        let omega_r = cells.len() as f64 * 0.05;
        for &(xi, s) in &[(0.05f64, 1.0f64), (-0.15, 1.5), (0.2, 2.0)] {
            let want = xi.abs() * (omega_r * 1.0f64).powf(1.0 / s);
            let got = space_translation_modulus(&line.view(), xi, s, r).unwrap();
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        assert!(matches!(
            space_translation_modulus(&line.view(), 0.25, 1.0, r),
            Err(MetricError::XiTooLarge { .. })
        ));
        assert!(matches!(
            space_translation_modulus(&line.view(), 0.07, 1.0, r),
            Err(MetricError::XiNotMultiple { .. })
        ));
        assert!(matches!(
            space_translation_modulus(&line.view(), 0.05, 1.0, 0.3),
            Err(MetricError::EmptyInterior(_))
        ));
    }

    #[test]
    fn tail_mass_examples() {
        let ones = Frames::new(16, 9, 2.0, |_, _| 1.0);
        for s in [1.0, 1.5] {
            let tm = tail_mass(&ones.view(), s, 0.5).unwrap();
            assert!((tm.value - 1.0f64.powf(1.0 / s)).abs() < 1e-12, "{tm:?}");
            assert!((tm.measure - 1.0).abs() < 1e-12);
        }
        let tiny = tail_mass(&ones.view(), 1.0, 1.0 - 1e-12).unwrap();
        assert!(tiny.value < 1e-9);
        assert!(tail_mass(&ones.view(), 1.0, 1.0).is_err());
        assert!(tail_mass(&ones.view(), 1.0, 0.0).is_err());
    }

    #[test]
    fn slope_fit() {
        let ks = [10.0, 100.0, 1000.0];
        let errs: Vec<f64> = ks.iter().map(|k: &f64| 3.0 * k.powf(-0.5)).collect();
        assert!((fit_log_slope(&ks, &errs).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_log_slope(&[10.0], &[1.0]), None);
        assert_eq!(fit_log_slope(&[10.0, 100.0], &[1.0, 0.0]), None);
    }
}
