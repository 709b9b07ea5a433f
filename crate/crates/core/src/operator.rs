//! Finite-difference assembly of the elliptic boundary operator (L, B).
//!
//! ```text
//! Lz = −a11 z_x1x1 − 2 a12 z_x1x2 − a22 z_x2x2 + b1 z_x1 + b2 z_x2 + c z
//! Bz = δ ∂z/∂n + b z
//! ```
//!
//! Second derivatives use the five-point stencil, modified after
//! Shortley–Weller where an arm is cut short by a curved boundary. First
//! derivatives are upwinded on the sign of `b1`, `b2`. Boundary values are
//! eliminated, so the unknowns are the interior nodes only.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError, PointBindings, VarSet};
use crate::geometry::{Direction, DomainSpec, Grid, Neighbor};
use crate::sparse::{bicgstab, BandedLu, CsrMatrix, Ilu0, LinearSolveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("ellipticity fails at ({x}, {y}): smallest eigenvalue of the coefficient matrix is {min_eigenvalue}")]
    EllipticityViolation { x: f64, y: f64, min_eigenvalue: f64 },
    #[error("zero-order coefficient c = {value} < 0 at ({x}, {y})")]
    NegativeZerothOrder { x: f64, y: f64, value: f64 },
    #[error("unsupported boundary condition: {0}")]
    UnsupportedBC(String),
    #[error("Neumann conditions need a zero-order coefficient c that is not identically zero")]
    NeumannRequiresZerothOrder,
    #[error("Robin coefficient must be nonnegative and not identically zero: {0}")]
    InvalidRobin(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("coefficient '{name}' could not be evaluated: {source}")]
    Coefficient { name: &'static str, source: EvalError },
}

/// A coefficient function of position.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Const(f64),
    Expr(Expr),
}

impl Coefficient {
    pub fn parse(source: &str) -> Result<Coefficient, ParseError> {
        Expr::parse(source, &VarSet::spatial()).map(|e| match e {
            Expr::Constant(c) => Coefficient::Const(c),
            e => Coefficient::Expr(e),
        })
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64, EvalError> {
        match self {
            Coefficient::Const(c) => Ok(*c),
            Coefficient::Expr(e) => e.eval(&PointBindings { x, u: &[] }),
        }
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(self, Coefficient::Const(c) if *c == 0.0)
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Const(c)
    }
}

/// Coefficients of L. `a12` stands for both off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCoefficients {
    pub a11: Coefficient,
    pub a12: Coefficient,
    pub a22: Coefficient,
    pub b1: Coefficient,
    pub b2: Coefficient,
    pub c: Coefficient,
}

impl EllipticCoefficients {
    /// −Δ.
    pub fn laplacian() -> Self {
        EllipticCoefficients {
            a11: 1.0.into(),
            a12: 0.0.into(),
            a22: 1.0.into(),
            b1: 0.0.into(),
            b2: 0.0.into(),
            c: 0.0.into(),
        }
    }

    pub fn with_c(mut self, c: impl Into<Coefficient>) -> Self {
        self.c = c.into();
        self
    }
}

impl Default for EllipticCoefficients {
    fn default() -> Self {
        Self::laplacian()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Dirichlet,
    Neumann,
    /// ∂z/∂n + b z = 0 with b ≥ 0, b ≢ 0.
    Robin(Coefficient),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub is_m_matrix: bool,
    /// Smallest eigenvalue of the coefficient matrix over the grid.
    pub ellipticity_mu0: f64,
}

/// How `K` is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Banded LU up to [`ITERATIVE_THRESHOLD`] unknowns, BiCGSTAB above.
    #[default]
    Auto,
    Direct,
    Iterative,
}

/// Unknown count above which `Auto` switches to the iterative solver.
pub const ITERATIVE_THRESHOLD: usize = 100_000;
/// Band storage (in `f64`s) above which `Auto` also goes iterative.
const MAX_BAND_STORAGE: usize = 40_000_000;

#[derive(Debug)]
pub(crate) enum Factorization {
    Direct(BandedLu),
    Iterative(Ilu0),
}

/// The assembled matrix of (L, B) over the interior unknowns of a grid.
#[derive(Debug)]
pub struct DiscreteOperator {
    matrix: CsrMatrix,
    grid: Arc<Grid>,
    diagnostics: Diagnostics,
    solver: SolverKind,
    norm_inf: f64,
    factorization: OnceLock<Result<Factorization, LinearSolveError>>,
}

impl Clone for DiscreteOperator {
    fn clone(&self) -> Self {
        DiscreteOperator::from_parts(self.matrix.clone(), self.grid.clone(), self.diagnostics)
            .with_solver(self.solver)
    }
}

pub fn assemble(
    grid: Arc<Grid>,
    coeffs: &EllipticCoefficients,
    bc: &BoundarySpec,
) -> Result<DiscreteOperator, OperatorError> {
    let h = grid.h();
    let n = grid.interior_count();
    let is_disk = matches!(grid.spec(), DomainSpec::UnitDisk);

    if is_disk && !matches!(bc, BoundarySpec::Dirichlet) {
        return Err(OperatorError::UnsupportedBC(
            "the unit disk supports Dirichlet conditions only".into(),
        ));
    }

    let eval = |name: &'static str, coef: &Coefficient, x: [f64; 2]| {
        coef.eval(x)
            .map_err(|source| OperatorError::Coefficient { name, source })
    };

    let mut triplets = Vec::with_capacity(9 * n);
    let mut mu0 = f64::INFINITY;
    let mut saw_mixed = false;
    let mut saw_c = false;

    for k in 0..n {
        let node = *grid.interior_node(k);
        let x = node.x;
        let a11 = eval("a11", &coeffs.a11, x)?;
        let a12 = eval("a12", &coeffs.a12, x)?;
        let a22 = eval("a22", &coeffs.a22, x)?;
        let b1 = eval("b1", &coeffs.b1, x)?;
        let b2 = eval("b2", &coeffs.b2, x)?;
        let c = eval("c", &coeffs.c, x)?;

        let half_trace = 0.5 * (a11 + a22);
        let min_eig = half_trace - (0.25 * (a11 - a22).powi(2) + a12 * a12).sqrt();
        if !(min_eig > 0.0) {
            return Err(OperatorError::EllipticityViolation {
                x: x[0],
                y: x[1],
                min_eigenvalue: min_eig,
            });
        }
        mu0 = mu0.min(min_eig);
        if !(c >= 0.0) {
            return Err(OperatorError::NegativeZerothOrder {
                x: x[0],
                y: x[1],
                value: c,
            });
        }
        saw_c |= c > 0.0;
        saw_mixed |= a12 != 0.0;

        let arms = *grid.arms(k);
        let mut diag = c;
        // (direction, weight) pairs of the row before boundary elimination
        let mut weights: Vec<(Direction, f64)> = Vec::with_capacity(4);

        // −a z'' along one axis with arms (forward, backward).
        let mut second = |a: f64, fwd: Direction, bwd: Direction, tf: f64, tb: f64| {
            let s = 2.0 * a / (h * h);
            diag += s / (tf * tb);
            weights.push((fwd, -s / (tf * (tf + tb))));
            weights.push((bwd, -s / (tb * (tf + tb))));
        };
        second(a11, Direction::East, Direction::West, arms.east, arms.west);
        second(a22, Direction::North, Direction::South, arms.north, arms.south);

        for (b, fwd, bwd, tf, tb) in [
            (b1, Direction::East, Direction::West, arms.east, arms.west),
            (b2, Direction::North, Direction::South, arms.north, arms.south),
        ] {
            if b > 0.0 {
                let w = b / (tb * h);
                diag += w;
                weights.push((bwd, -w));
            } else if b < 0.0 {
                let w = -b / (tf * h);
                diag += w;
                weights.push((fwd, -w));
            }
        }

        for (dir, w) in weights {
            match grid.neighbor(k, dir) {
                Neighbor::Unknown(col) => triplets.push((k, col, w)),
                Neighbor::Boundary { .. } => match bc {
                    BoundarySpec::Dirichlet => {}
                    BoundarySpec::Neumann | BoundarySpec::Robin(_) => {
                        // One-sided second-order normal derivative at the
                        // boundary node B: (3u_B − 4u_P + u_Q) / 2h.
                        let (di, dj) = dir.offset();
                        let boundary_x = [x[0] + di as f64 * h, x[1] + dj as f64 * h];
                        let robin_b = match bc {
                            BoundarySpec::Robin(coef) => eval("robin b", coef, boundary_x)?,
                            _ => 0.0,
                        };
                        let gamma = 1.0 / (3.0 + 2.0 * h * robin_b);
                        let q = grid.unknown_at(node.i - di, node.j - dj).ok_or_else(|| {
                            OperatorError::GridTooCoarse(
                                "Neumann/Robin elimination needs two interior nodes per line"
                                    .into(),
                            )
                        })?;
                        diag += 4.0 * gamma * w;
                        triplets.push((k, q, -gamma * w));
                    }
                },
            }
        }

        if a12 != 0.0 {
            let cm = -a12 / (2.0 * h * h);
            for (di, dj, sign) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                // off-lattice corners are treated as homogeneous Dirichlet data
                if let Some(col) = grid.unknown_at(node.i + di, node.j + dj) {
                    triplets.push((k, col, sign * cm));
                }
            }
        }
        triplets.push((k, k, diag));
    }

    match bc {
        BoundarySpec::Dirichlet => {}
        BoundarySpec::Neumann | BoundarySpec::Robin(_) if saw_mixed => {
            return Err(OperatorError::UnsupportedBC(
                "mixed derivative terms are only supported with Dirichlet conditions".into(),
            ));
        }
        BoundarySpec::Neumann => {
            if !saw_c {
                return Err(OperatorError::NeumannRequiresZerothOrder);
            }
        }
        BoundarySpec::Robin(coef) => {
            let mut any_positive = false;
            for p in grid.boundary_points() {
                let v = eval("robin b", coef, p)?;
                if v < 0.0 {
                    return Err(OperatorError::InvalidRobin(format!(
                        "b = {v} at ({}, {})",
                        p[0], p[1]
                    )));
                }
                any_positive |= v > 0.0;
            }
            if !any_positive {
                return Err(OperatorError::InvalidRobin("b vanishes on the boundary".into()));
            }
        }
    }

    let matrix = CsrMatrix::from_triplets(n, triplets);
    let diagnostics = Diagnostics {
        is_m_matrix: matrix.has_m_matrix_signs(),
        ellipticity_mu0: mu0,
    };
    if !diagnostics.is_m_matrix {
        log::warn!("assembled matrix is not an M-matrix; positivity of K is not guaranteed");
    }
    Ok(DiscreteOperator::from_parts(matrix, grid, diagnostics))
}

impl DiscreteOperator {
    pub(crate) fn from_parts(matrix: CsrMatrix, grid: Arc<Grid>, diagnostics: Diagnostics) -> Self {
        let norm_inf = matrix.norm_inf();
        DiscreteOperator {
            matrix,
            grid,
            diagnostics,
            solver: SolverKind::Auto,
            norm_inf,
            factorization: OnceLock::new(),
        }
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self.factorization = OnceLock::new();
        self
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The operator `factor · (L, B)`.
    pub fn scaled(&self, factor: f64) -> DiscreteOperator {
        let diagnostics = Diagnostics {
            is_m_matrix: factor > 0.0 && self.diagnostics.is_m_matrix,
            ellipticity_mu0: factor * self.diagnostics.ellipticity_mu0,
        };
        DiscreteOperator::from_parts(self.matrix.scaled(factor), self.grid.clone(), diagnostics)
            .with_solver(self.solver)
    }

    /// Solves `A z = g` to normwise backward error `tol`. The factorization
    /// is computed on first use and shared afterwards.
    pub(crate) fn solve(&self, g: &[f64], tol: f64) -> Result<Vec<f64>, LinearSolveError> {
        if g.len() != self.dim() {
            return Err(LinearSolveError::DimensionMismatch {
                expected: self.dim(),
                found: g.len(),
            });
        }
        if g.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; g.len()]);
        }
        let fact = self
            .factorization
            .get_or_init(|| self.factorize())
            .as_ref()
            .map_err(Clone::clone)?;
        match fact {
            Factorization::Direct(lu) => {
                let mut z = g.to_vec();
                lu.solve_in_place(&mut z);
                // a few steps of iterative refinement if round-off bites
                for _ in 0..3 {
                    if self.matrix.backward_error(&z, g, self.norm_inf) <= tol {
                        return Ok(z);
                    }
                    let mut r = vec![0.0; z.len()];
                    self.matrix.mul_vec(&z, &mut r);
                    r.iter_mut().zip(g).for_each(|(ri, gi)| *ri = gi - *ri);
                    lu.solve_in_place(&mut r);
                    z.iter_mut().zip(&r).for_each(|(zi, ri)| *zi += ri);
                }
                let berr = self.matrix.backward_error(&z, g, self.norm_inf);
                if berr <= tol {
                    Ok(z)
                } else {
                    Err(LinearSolveError::NotConverged {
                        iterations: 3,
                        backward_error: berr,
                    })
                }
            }
            Factorization::Iterative(ilu) => {
                let mut z = vec![0.0; g.len()];
                bicgstab(&self.matrix, ilu, g, &mut z, tol, 20 * self.dim().max(50))?;
                Ok(z)
            }
        }
    }

    fn factorize(&self) -> Result<Factorization, LinearSolveError> {
        let direct = match self.solver {
            SolverKind::Direct => true,
            SolverKind::Iterative => false,
            SolverKind::Auto => {
                self.dim() <= ITERATIVE_THRESHOLD
                    && BandedLu::storage_for(&self.matrix) <= MAX_BAND_STORAGE
            }
        };
        if direct {
            match BandedLu::factor(&self.matrix) {
                Ok(lu) => return Ok(Factorization::Direct(lu)),
                Err(e) if self.solver == SolverKind::Direct => return Err(e),
                Err(e) => log::warn!("banded LU failed ({e}); falling back to BiCGSTAB"),
            }
        }
        Ilu0::new(&self.matrix).map(Factorization::Iterative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;
    use approx::assert_relative_eq;

    fn grid(spec: DomainSpec, h: f64) -> Arc<Grid> {
        Arc::new(build_grid(spec, h).unwrap())
    }

    #[test]
    fn laplacian_on_coarse_square() {
        let op = assemble(
            grid(DomainSpec::unit_square(), 0.5),
            &EllipticCoefficients::laplacian(),
            &BoundarySpec::Dirichlet,
        )
        .unwrap();
        assert_eq!(op.dim(), 1);
        assert_eq!(op.matrix().get(0, 0), 16.0);
    }

    #[test]
    fn zero_order_shifts_the_diagonal() {
        let op = assemble(
            grid(DomainSpec::unit_square(), 0.5),
            &EllipticCoefficients::laplacian().with_c(3.0),
            &BoundarySpec::Dirichlet,
        )
        .unwrap();
        assert_eq!(op.matrix().get(0, 0), 19.0);
    }

    /// Shortley–Weller rows of the nine-node disk grid, written out by hand.
    #[test]
    fn disk_half_step_matches_hand_assembly() {
        let g = grid(DomainSpec::UnitDisk, 0.5);
        let op = assemble(g.clone(), &EllipticCoefficients::laplacian(), &BoundarySpec::Dirichlet)
            .unwrap();
        assert_eq!(op.dim(), 9);
        assert!(op.diagnostics().is_m_matrix);
        let h2 = 0.25;
        let m = op.matrix();
        let at = |i, j| g.unknown_at(i, j).unwrap();
        let centre = at(0, 0);
        assert_relative_eq!(m.get(centre, centre), 4.0 / h2);
        for (i, j) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            assert_relative_eq!(m.get(centre, at(i, j)), -1.0 / h2);
            // edge midpoints: all four arms are full, the outward one ends on the circle
            assert_relative_eq!(m.get(at(i, j), at(i, j)), 4.0 / h2, epsilon = 1e-12);
            assert_relative_eq!(m.get(at(i, j), centre), -1.0 / h2);
        }
        // corners: two arms of length t reach the circle at sqrt(0.75)
        let t = (0.75f64.sqrt() - 0.5) / 0.5;
        for (i, j) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
            let k = at(i, j);
            assert_relative_eq!(m.get(k, k), 2.0 * 2.0 / (h2 * t), epsilon = 1e-12);
            assert_relative_eq!(m.get(k, at(0, j)), -2.0 / (h2 * (1.0 + t)), epsilon = 1e-12);
            assert_relative_eq!(m.get(k, at(i, 0)), -2.0 / (h2 * (1.0 + t)), epsilon = 1e-12);
            assert_eq!(m.row(k).count(), 3);
        }
    }

    #[test]
    fn diagonal_operators_give_diagonally_dominant_m_matrices() {
        let coeffs = EllipticCoefficients {
            a11: Coefficient::parse("1 + x1^2").unwrap(),
            a12: 0.0.into(),
            a22: Coefficient::parse("2 + sin(x2)").unwrap(),
            b1: 0.0.into(),
            b2: 0.0.into(),
            c: Coefficient::parse("abs(x1*x2)").unwrap(),
        };
        for spec in [DomainSpec::UnitDisk, DomainSpec::unit_square()] {
            let op = assemble(grid(spec, 1.0 / 16.0), &coeffs, &BoundarySpec::Dirichlet).unwrap();
            assert!(op.diagnostics().is_m_matrix);
            let m = op.matrix();
            for r in 0..m.dim() {
                let off: f64 = m.row(r).filter(|(c, _)| *c != r).map(|(_, v)| v.abs()).sum();
                assert!(m.get(r, r) >= off * (1.0 - 1e-14));
            }
        }
    }

    #[test]
    fn constant_coefficient_square_is_symmetric() {
        let op = assemble(
            grid(DomainSpec::unit_square(), 0.125),
            &EllipticCoefficients::laplacian().with_c(2.0),
            &BoundarySpec::Dirichlet,
        )
        .unwrap();
        assert!(op.matrix().is_symmetric(0.0));
    }

    #[test]
    fn upwinding_keeps_m_matrix_signs() {
        let mut coeffs = EllipticCoefficients::laplacian();
        coeffs.b1 = Coefficient::parse("50*x2").unwrap();
        coeffs.b2 = (-30.0).into();
        let op = assemble(grid(DomainSpec::UnitDisk, 0.125), &coeffs, &BoundarySpec::Dirichlet)
            .unwrap();
        assert!(op.diagnostics().is_m_matrix);
    }

    #[test]
    fn strong_mixed_term_breaks_m_matrix_but_assembles() {
        let mut coeffs = EllipticCoefficients::laplacian();
        coeffs.a12 = 0.5.into();
        let op = assemble(grid(DomainSpec::unit_square(), 0.125), &coeffs, &BoundarySpec::Dirichlet)
            .unwrap();
        assert!(!op.diagnostics().is_m_matrix);
        assert_relative_eq!(op.diagnostics().ellipticity_mu0, 0.5);
    }

    #[test]
    fn error_paths() {
        let square = grid(DomainSpec::unit_square(), 0.25);
        let mut bad = EllipticCoefficients::laplacian();
        bad.a12 = 1.5.into();
        assert!(matches!(
            assemble(square.clone(), &bad, &BoundarySpec::Dirichlet),
            Err(OperatorError::EllipticityViolation { .. })
        ));
        assert!(matches!(
            assemble(
                square.clone(),
                &EllipticCoefficients::laplacian().with_c(-1.0),
                &BoundarySpec::Dirichlet
            ),
            Err(OperatorError::NegativeZerothOrder { .. })
        ));
        assert!(matches!(
            assemble(
                grid(DomainSpec::UnitDisk, 0.25),
                &EllipticCoefficients::laplacian().with_c(1.0),
                &BoundarySpec::Neumann
            ),
            Err(OperatorError::UnsupportedBC(_))
        ));
        assert_eq!(
            assemble(square.clone(), &EllipticCoefficients::laplacian(), &BoundarySpec::Neumann)
                .unwrap_err(),
            OperatorError::NeumannRequiresZerothOrder
        );
        assert!(matches!(
            assemble(
                square.clone(),
                &EllipticCoefficients::laplacian(),
                &BoundarySpec::Robin(0.0.into())
            ),
            Err(OperatorError::InvalidRobin(_))
        ));
        assert!(matches!(
            assemble(
                square,
                &EllipticCoefficients::laplacian(),
                &BoundarySpec::Robin((-1.0).into())
            ),
            Err(OperatorError::InvalidRobin(_))
        ));
    }

    #[test]
    fn neumann_elimination_preserves_constants() {
        // −Δz + z = 1 with ∂z/∂n = 0 has z ≡ 1, reproduced exactly by the
        // one-sided boundary closure.
        let op = assemble(
            grid(DomainSpec::unit_square(), 0.125),
            &EllipticCoefficients::laplacian().with_c(1.0),
            &BoundarySpec::Neumann,
        )
        .unwrap();
        assert!(op.diagnostics().is_m_matrix);
        let z = op.solve(&vec![1.0; op.dim()], 1e-12).unwrap();
        for v in z {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn robin_solution_lies_between_dirichlet_and_neumann() {
        let g = grid(DomainSpec::unit_square(), 0.125);
        let coeffs = EllipticCoefficients::laplacian().with_c(1.0);
        let rhs = vec![1.0; g.interior_count()];
        let solve = |bc: BoundarySpec| {
            assemble(g.clone(), &coeffs, &bc).unwrap().solve(&rhs, 1e-12).unwrap()
        };
        let d = solve(BoundarySpec::Dirichlet);
        let r = solve(BoundarySpec::Robin(2.0.into()));
        let n = solve(BoundarySpec::Neumann);
        for k in 0..rhs.len() {
            assert!(d[k] < r[k] && r[k] < n[k] + 1e-12);
        }
    }

    #[test]
    fn iterative_and_direct_solvers_agree() {
        let g = grid(DomainSpec::UnitDisk, 1.0 / 32.0);
        let mut coeffs = EllipticCoefficients::laplacian();
        coeffs.b1 = 3.0.into();
        let direct = assemble(g.clone(), &coeffs, &BoundarySpec::Dirichlet)
            .unwrap()
            .with_solver(SolverKind::Direct);
        let iterative = direct.clone().with_solver(SolverKind::Iterative);
        let rhs: Vec<f64> = g.interior_nodes().map(|n| 1.0 + n.x[0] * n.x[1]).collect();
        let a = direct.solve(&rhs, 1e-12).unwrap();
        let b = iterative.solve(&rhs, 1e-12).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}
