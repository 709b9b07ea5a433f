//! The discrete solution operator `K = (L, B)⁻¹` and its spectral data.

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::Grid;
use crate::operator::DiscreteOperator;
use crate::sparse::{sup, LinearSolveError};

/// Backward-error target of every linear solve behind `K`.
pub const SOLVE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error("linear solve failed: {0}")]
    SolverFailure(#[from] LinearSolveError),
    #[error("grid function does not live on the operator's grid")]
    GridMismatch,
    #[error("grid function has {found} values, grid has {expected} interior nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("grid function holds a non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("power iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("probe input must be nonnegative and not identically zero")]
    NotPositive,
    #[error("K(1) vanishes at interior node {node}")]
    DegenerateE { node: usize },
}

/// A real value per interior node of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other) && self.values == other.values
    }
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<GridFunction, GreensError> {
        if values.len() != grid.interior_count() {
            return Err(GreensError::LengthMismatch {
                expected: grid.interior_count(),
                found: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(GreensError::NonFinite { node });
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> GridFunction {
        debug_assert_eq!(values.len(), grid.interior_count());
        GridFunction { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> GridFunction {
        let n = grid.interior_count();
        GridFunction::from_raw(grid, vec![c; n])
    }

    pub fn zeros(grid: Arc<Grid>) -> GridFunction {
        GridFunction::constant(grid, 0.0)
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> GridFunction {
        let values = grid.interior_nodes().map(|n| f(n.x)).collect();
        GridFunction::from_raw(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: f64) -> GridFunction {
        self.map(|v| s * v)
    }

    /// Nodewise `f(self, other)`.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction, GreensError> {
        if !self.same_grid(other) {
            return Err(GreensError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(GridFunction::from_raw(self.grid.clone(), values))
    }

    /// ‖self − other‖∞.
    pub fn distance(&self, other: &GridFunction) -> Result<f64, GreensError> {
        Ok(self.zip_with(other, |a, b| a - b)?.sup_norm())
    }
}

/// `z = K g`: solves the discrete boundary problem with right-hand side `g`.
pub fn apply_k(op: &DiscreteOperator, g: &GridFunction) -> Result<GridFunction, GreensError> {
    if !Arc::ptr_eq(op.grid(), g.grid()) {
        return Err(GreensError::GridMismatch);
    }
    let z = op.solve(g.values(), SOLVE_TOL)?;
    Ok(GridFunction::from_raw(g.grid.clone(), z))
}

/// `K(1)` and `‖K(1)‖∞`.
pub fn k_one_norm(op: &DiscreteOperator) -> Result<(GridFunction, f64), GreensError> {
    let e = apply_k(op, &GridFunction::constant(op.grid().clone(), 1.0))?;
    let norm = e.sup_norm();
    Ok((e, norm))
}

/// Principal eigenpair of `K` from power iteration.
#[derive(Debug, Clone)]
pub struct SpectralEstimate {
    /// Spectral radius r(K).
    pub r: f64,
    /// Characteristic value μ₁ = 1/r.
    pub mu1: f64,
    /// Normalised to ‖φ‖∞ = 1.
    pub eigenfunction: GridFunction,
    pub iterations: usize,
    /// ‖Kφ − rφ‖∞.
    pub residual: f64,
}

/// Power iteration on `K` from the constant function 1, with
/// `r_k = ‖Kφ_k‖∞` and `φ_{k+1} = Kφ_k / r_k`.
///
/// Stops once successive estimates agree to `tol · r`, the eigen-residual is
/// at most `tol`, and `Kφ ≥ (r − tol) φ` holds at every node.
pub fn spectral_radius(
    op: &DiscreteOperator,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate, GreensError> {
    assert!(tol > 0.0, "tolerance must be positive");
    if !op.diagnostics().is_m_matrix {
        log::warn!("power iteration on a non-M-matrix operator: the principal eigenfunction may not be positive");
    }
    let mut phi = GridFunction::constant(op.grid().clone(), 1.0);
    let mut previous: Option<f64> = None;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let w = apply_k(op, &phi)?;
        let r = w.sup_norm();
        if r == 0.0 {
            return Err(GreensError::NoConvergence {
                iterations: it,
                residual,
            });
        }
        residual = w.distance(&phi.scaled(r))?;
        let lower_bound_holds = w
            .values()
            .iter()
            .zip(phi.values())
            .all(|(&kp, &p)| kp >= (r - tol) * p);
        if let Some(prev) = previous {
            if (r - prev).abs() <= tol * r && residual <= tol && lower_bound_holds {
                return Ok(SpectralEstimate {
                    r,
                    mu1: 1.0 / r,
                    eigenfunction: phi,
                    iterations: it,
                    residual,
                });
            }
        }
        previous = Some(r);
        phi = w.scaled(1.0 / r);
    }
    Err(GreensError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Sharpest `α_g, β_g` with `α_g e ≤ K g ≤ β_g e` nodewise, where `e = K(1)`.
pub fn e_positivity_probe(
    op: &DiscreteOperator,
    g: &GridFunction,
) -> Result<(f64, f64), GreensError> {
    if g.values().iter().any(|&v| v < 0.0) || g.values().iter().all(|&v| v == 0.0) {
        return Err(GreensError::NotPositive);
    }
    if !op.diagnostics().is_m_matrix {
        log::warn!("e-positivity probe on a non-M-matrix operator");
    }
    let (e, _) = k_one_norm(op)?;
    if let Some(node) = e.values().iter().position(|&v| !(v > 0.0)) {
        return Err(GreensError::DegenerateE { node });
    }
    let kg = apply_k(op, g)?;
    let (mut alpha, mut beta) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&z, &ev) in kg.values().iter().zip(e.values()) {
        let ratio = z / ev;
        alpha = alpha.min(ratio);
        beta = beta.max(ratio);
    }
    Ok((alpha, beta))
}
