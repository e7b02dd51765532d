//! Cell-centered 1D meshes with zero-flux closure, and the tridiagonal
//! machinery both solvers share.

use std::ops::{Deref, DerefMut};

use thiserror::Error;

use crate::expr::{Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("a grid needs at least two cells, got {0}")]
    TooFewCells(usize),
    #[error("invalid interval ({0}, {1})")]
    InvalidInterval(f64, f64),
    #[error("field has {got} values, grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value in cell {0}")]
    NonFinite(usize),
    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self, GridError> {
        if n_cells < 2 {
            return Err(GridError::TooFewCells(n_cells));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(GridError::InvalidInterval(x_min, x_max));
        }
        Ok(Grid1D {
            n_cells,
            x_min,
            x_max,
        })
    }

    pub fn unit(n_cells: usize) -> Result<Self, GridError> {
        Self::new(n_cells, 0.0, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn h(&self) -> f64 {
        self.length() / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }

    pub fn field_from(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.centers().map(f).collect())
    }

    /// Samples a profile expression in `x` at the cell centers.
    pub fn field_from_expr(&self, e: &Expr) -> Result<Field, GridError> {
        let values = self
            .centers()
            .map(|x| e.eval_x(x))
            .collect::<Result<Vec<_>, _>>()?;
        Field::on(self, values)
    }

    pub fn constant(&self, c: f64) -> Field {
        Field(vec![c; self.n_cells])
    }

    /// `∫ f` by the midpoint rule.
    pub fn integral(&self, f: &[f64]) -> f64 {
        self.h() * f.iter().sum::<f64>()
    }

    /// Discrete `L^p` norm; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            f.iter().fold(0.0, |m, x| m.max(x.abs()))
        } else if p == 1.0 {
            self.h() * f.iter().map(|x| x.abs()).sum::<f64>()
        } else if p == 2.0 {
            (self.h() * f.iter().map(|x| x * x).sum::<f64>()).sqrt()
        } else {
            (self.h() * f.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
        }
    }

    /// Three-point Laplacian with mirrored ghost cells.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let inv_h2 = 1.0 / (self.h() * self.h());
        (0..n)
            .map(|i| {
                let left = if i == 0 { f[0] } else { f[i - 1] };
                let right = if i + 1 == n { f[n - 1] } else { f[i + 1] };
                (left - 2.0 * f[i] + right) * inv_h2
            })
            .collect()
    }
}

/// One value per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn on(grid: &Grid1D, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.n_cells() {
            return Err(GridError::LengthMismatch {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        let f = Field(values);
        f.check_finite()?;
        Ok(f)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        match self.0.iter().position(|x| !x.is_finite()) {
            Some(i) => Err(GridError::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Deref for Field {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[0]` and `upper[n-1]` are ignored. The matrices assembled in this
/// crate are diagonally dominant, so no pivoting is needed.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, GridError> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(GridError::Singular(0));
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(GridError::Singular(i));
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solves `(I - dt·d·Δ_h) w = f` with zero-flux closure.
pub fn implicit_diffusion(grid: &Grid1D, f: &[f64], d: f64, dt: f64) -> Result<Vec<f64>, GridError> {
    let n = f.len();
    if d == 0.0 {
        return Ok(f.to_vec());
    }
    let r = dt * d / (grid.h() * grid.h());
    let lower = vec![-r; n];
    let upper = vec![-r; n];
    let mut diag = vec![1.0 + 2.0 * r; n];
    diag[0] = 1.0 + r;
    diag[n - 1] = 1.0 + r;
    solve_tridiagonal(&lower, &diag, &upper, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let g = Grid1D::new(4, 0.0, 2.0).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.centers().collect::<Vec<_>>(), vec![0.25, 0.75, 1.25, 1.75]);
        assert!(Grid1D::new(1, 0.0, 1.0).is_err());
        assert!(Grid1D::new(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn thomas_matches_dense_product() {
        let lower = [0.0, -1.0, -0.5, -2.0];
        let diag = [4.0, 3.0, 5.0, 6.0];
        let upper = [1.0, -1.0, 0.5, 0.0];
        let x = [1.0, -2.0, 3.0, 0.5];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        let got = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in got.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let err = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(err, Err(GridError::Singular(0)));
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = Grid1D::unit(8).unwrap();
        assert!(g.laplacian(&g.constant(3.0)).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn norms() {
        let g = Grid1D::unit(4).unwrap();
        let f = [1.0, -2.0, 0.0, 1.0];
        assert_eq!(g.lp_norm(&f, 1.0), 1.0);
        assert_eq!(g.lp_norm(&f, f64::INFINITY), 2.0);
        assert!((g.lp_norm(&f, 2.0) - 1.5f64.sqrt()).abs() < 1e-15);
        assert!((g.lp_norm(&f, 3.0) - (10.0f64 / 4.0).powf(1.0 / 3.0)).abs() < 1e-15);
    }
}
