//! The operator `T(u) = (λ₁ K F₁ u, …, λₙ K Fₙ u)` and monotone iteration
//! between sub- and supersolutions.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::greens::{apply_k, GreensError, GridFunction, SpectralEstimate};
use crate::nonlinearity::{nemytskii_apply, Nonlinearity, NonlinearityError, VectorGridFunction};
use crate::operator::DiscreteOperator;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Slack of the nodewise order checks.
pub const ORDER_SLACK: f64 = 1e-12;
/// Nodewise values above `-POSITIVITY_SLACK` count as nonnegative.
pub const POSITIVITY_SLACK: f64 = 1e-10;
/// Halvings tried by [`construct_subsolution`].
pub const SUBSOLUTION_HALVINGS: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixedPointError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error("start is not a supersolution: min(beta - T beta) = {margin:.3e}")]
    NotSupersolution { margin: f64 },
    #[error("start is not a subsolution: max(alpha - T alpha) = {deficit:.3e}")]
    NotSubsolution { deficit: f64 },
    #[error(
        "iterate {iteration} moved the wrong way by {amount:.3e} (u{component} at node {node})"
    )]
    MonotonicityViolation {
        iteration: usize,
        component: usize,
        node: usize,
        amount: f64,
    },
    #[error("no convergence after {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },
}

/// Operator, nonlinearity and parameters `λ`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    op: Arc<DiscreteOperator>,
    nl: Arc<Nonlinearity>,
    lambdas: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(
        op: Arc<DiscreteOperator>,
        nl: Arc<Nonlinearity>,
        lambdas: Vec<f64>,
    ) -> Result<ProblemInstance, FixedPointError> {
        if lambdas.len() != nl.n() {
            return Err(FixedPointError::Invalid(format!(
                "{} lambdas for {} equations",
                lambdas.len(),
                nl.n()
            )));
        }
        if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(FixedPointError::Invalid(format!("lambda must be positive, got {l}")));
        }
        Ok(ProblemInstance { op, nl, lambdas })
    }

    /// Same operator and nonlinearity with other parameters.
    pub fn with_lambdas(&self, lambdas: Vec<f64>) -> Result<ProblemInstance, FixedPointError> {
        ProblemInstance::new(self.op.clone(), self.nl.clone(), lambdas)
    }

    pub fn op(&self) -> &Arc<DiscreteOperator> {
        &self.op
    }

    pub fn nl(&self) -> &Arc<Nonlinearity> {
        &self.nl
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Componentwise constant field on the operator's grid.
    pub fn constant(&self, values: &[f64]) -> VectorGridFunction {
        VectorGridFunction::constant(self.op.grid().clone(), values)
    }
}

/// `T(u)`, one linear solve per component.
pub fn apply_t(
    p: &ProblemInstance,
    u: &VectorGridFunction,
) -> Result<VectorGridFunction, FixedPointError> {
    if !Arc::ptr_eq(u.grid(), p.op.grid()) {
        return Err(GreensError::GridMismatch.into());
    }
    let components = (0..p.n())
        .into_par_iter()
        .map(|i| {
            let f = nemytskii_apply(&p.nl, i, u)?;
            Ok(apply_k(&p.op, &f)?.scaled(p.lambdas[i]))
        })
        .collect::<Result<Vec<GridFunction>, FixedPointError>>()?;
    Ok(VectorGridFunction::new(components)?)
}

/// Whether `Tβ ≤ β` holds nodewise, with the worst margin `min(β − Tβ)`.
pub fn check_supersolution(
    p: &ProblemInstance,
    beta: &VectorGridFunction,
) -> Result<(bool, f64), FixedPointError> {
    let t = apply_t(p, beta)?;
    let margin = -t.excess_over(beta)?;
    Ok((margin >= -ORDER_SLACK, margin))
}

/// A subsolution `α = ε φ e_{i0}` found by [`construct_subsolution`].
#[derive(Debug, Clone)]
pub struct Subsolution {
    pub alpha: VectorGridFunction,
    pub epsilon: f64,
}

/// Sweeps `ε = ρ0, ρ0/2, …, ρ0·2⁻²⁰` and returns the first `α = εφ` in
/// component `i0` (zero elsewhere) with `Tα ≥ α` nodewise.
pub fn construct_subsolution(
    p: &ProblemInstance,
    spectrum: &SpectralEstimate,
    i0: usize,
    rho0: f64,
) -> Result<Option<Subsolution>, FixedPointError> {
    let phi = &spectrum.eigenfunction;
    if !Arc::ptr_eq(phi.grid(), p.op.grid()) {
        return Err(GreensError::GridMismatch.into());
    }
    if i0 >= p.n() {
        return Err(FixedPointError::Invalid(format!(
            "component {} out of range for n = {}",
            i0 + 1,
            p.n()
        )));
    }
    let min_box = p.nl.rho().iter().copied().fold(f64::INFINITY, f64::min);
    if !(rho0 > 0.0 && rho0 < min_box) {
        return Err(FixedPointError::Invalid(format!(
            "rho0 = {rho0} must lie in (0, {min_box})"
        )));
    }
    let grid = p.op.grid().clone();
    for k in 0..=SUBSOLUTION_HALVINGS {
        let epsilon = rho0 * 0.5f64.powi(k as i32);
        let components = (0..p.n())
            .map(|j| {
                if j == i0 {
                    phi.scaled(epsilon)
                } else {
                    GridFunction::zeros(grid.clone())
                }
            })
            .collect();
        let alpha = VectorGridFunction::new(components)?;
        let t = apply_t(p, &alpha)?;
        if alpha.excess_over(&t)? <= ORDER_SLACK * alpha.norm() {
            return Ok(Some(Subsolution { alpha, epsilon }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FromBelow,
    FromAbove,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::FromBelow => "from below",
            Direction::FromAbove => "from above",
        })
    }
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub solution: VectorGridFunction,
    /// ‖u − Tu‖ in the product sup norm.
    pub residual: f64,
    /// Applications of `T`.
    pub iterations: usize,
    /// Norms of the iterates, starting with the initial field.
    pub history: Vec<f64>,
    pub direction: Direction,
    pub converged_to_zero: bool,
}

/// One monotone sequence `u_{k+1} = T u_k`.
struct Sequence {
    direction: Direction,
    current: VectorGridFunction,
    image: VectorGridFunction,
    history: Vec<f64>,
    iterations: usize,
    step: f64,
}

impl Sequence {
    fn start(
        p: &ProblemInstance,
        start: VectorGridFunction,
        direction: Direction,
    ) -> Result<Sequence, FixedPointError> {
        let image = apply_t(p, &start)?;
        match direction {
            Direction::FromAbove => {
                let margin = -image.excess_over(&start)?;
                if margin < -ORDER_SLACK {
                    return Err(FixedPointError::NotSupersolution { margin });
                }
            }
            Direction::FromBelow => {
                let deficit = start.excess_over(&image)?;
                if deficit > ORDER_SLACK {
                    return Err(FixedPointError::NotSubsolution { deficit });
                }
            }
        }
        let step = start.distance(&image)?;
        Ok(Sequence {
            direction,
            history: vec![start.norm()],
            current: start,
            image,
            iterations: 1,
            step,
        })
    }

    fn converged(&self, tol: f64) -> bool {
        self.step <= tol
    }

    /// Moves to `T u` and checks the order against the previous iterate.
    fn advance(&mut self, p: &ProblemInstance) -> Result<(), FixedPointError> {
        let next_image = apply_t(p, &self.image)?;
        let (lower, upper) = match self.direction {
            Direction::FromAbove => (&next_image, &self.image),
            Direction::FromBelow => (&self.image, &next_image),
        };
        check_order(lower, upper, self.iterations + 1)?;
        self.current = std::mem::replace(&mut self.image, next_image);
        self.iterations += 1;
        self.step = self.current.distance(&self.image)?;
        self.history.push(self.current.norm());
        Ok(())
    }

    fn report(self, tol: f64) -> IterationReport {
        let norm = self.current.norm();
        IterationReport {
            residual: self.step,
            iterations: self.iterations,
            history: self.history,
            direction: self.direction,
            converged_to_zero: norm <= 10.0 * tol,
            solution: self.current,
        }
    }
}

/// Fails unless `lower ≤ upper + ORDER_SLACK` nodewise.
fn check_order(
    lower: &VectorGridFunction,
    upper: &VectorGridFunction,
    iteration: usize,
) -> Result<(), FixedPointError> {
    for (i, (l, u)) in lower.components().iter().zip(upper.components()).enumerate() {
        for (node, (&a, &b)) in l.values().iter().zip(u.values()).enumerate() {
            if a - b > ORDER_SLACK {
                return Err(FixedPointError::MonotonicityViolation {
                    iteration,
                    component: i + 1,
                    node,
                    amount: a - b,
                });
            }
        }
    }
    Ok(())
}

/// Iterates `u_{k+1} = T u_k` from a super- or subsolution until successive
/// iterates agree to `tol`. The reported solution is the last iterate `u`,
/// whose residual `‖u − Tu‖` is that final step.
pub fn monotone_iterate(
    p: &ProblemInstance,
    start: VectorGridFunction,
    direction: Direction,
    tol: f64,
    max_iter: usize,
) -> Result<IterationReport, FixedPointError> {
    let mut seq = Sequence::start(p, start, direction)?;
    while !seq.converged(tol) {
        if seq.iterations >= max_iter {
            return Err(FixedPointError::NoConvergence {
                iterations: seq.iterations,
                last_step: seq.step,
            });
        }
        seq.advance(p)?;
    }
    Ok(seq.report(tol))
}

#[derive(Debug, Clone)]
pub struct BracketReport {
    pub lower: IterationReport,
    pub upper: IterationReport,
    /// `max_k max(α_k − β_k)` over the interleaved run; ≤ 0 when ordered.
    pub max_crossing: f64,
}

impl BracketReport {
    pub fn ordered(&self, slack: f64) -> bool {
        self.max_crossing <= slack
    }
}

/// Runs the sequences from `α` and `β` in lockstep, recording how far
/// `α_k ≤ β_k` ever fails.
pub fn bracket_iterate(
    p: &ProblemInstance,
    alpha: VectorGridFunction,
    beta: VectorGridFunction,
    tol: f64,
    max_iter: usize,
) -> Result<BracketReport, FixedPointError> {
    let mut lower = Sequence::start(p, alpha, Direction::FromBelow)?;
    let mut upper = Sequence::start(p, beta, Direction::FromAbove)?;
    let mut max_crossing = lower.current.excess_over(&upper.current)?;
    while !(lower.converged(tol) && upper.converged(tol)) {
        let iterations = lower.iterations.max(upper.iterations);
        if iterations >= max_iter {
            return Err(FixedPointError::NoConvergence {
                iterations,
                last_step: lower.step.max(upper.step),
            });
        }
        if !lower.converged(tol) {
            lower.advance(p)?;
        }
        if !upper.converged(tol) {
            upper.advance(p)?;
        }
        max_crossing = max_crossing.max(lower.current.excess_over(&upper.current)?);
    }
    Ok(BracketReport {
        lower: lower.report(tol),
        upper: upper.report(tol),
        max_crossing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    NonzeroPositive,
    Trivial,
    NotCertified,
}

/// Checkable evidence that `u` is a discrete fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub residual: f64,
    pub min_value: f64,
    pub norm: f64,
    pub in_box: bool,
    pub tol: f64,
    /// Set when `T u` could not be evaluated.
    pub error: Option<String>,
}

impl Certificate {
    pub fn outcome(&self) -> Outcome {
        let fixed = self.residual <= self.tol && self.min_value >= -POSITIVITY_SLACK;
        if !fixed {
            Outcome::NotCertified
        } else if self.norm >= 10.0 * self.tol {
            Outcome::NonzeroPositive
        } else {
            Outcome::Trivial
        }
    }

    pub fn is_nonzero_positive(&self) -> bool {
        self.outcome() == Outcome::NonzeroPositive
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.outcome() {
            Outcome::NonzeroPositive => "nonzero positive solution",
            Outcome::Trivial => "trivial solution",
            Outcome::NotCertified => "not certified",
        };
        writeln!(f, "verdict:   {verdict}")?;
        writeln!(f, "residual:  {:.6e} (tol {:.1e})", self.residual, self.tol)?;
        writeln!(f, "min value: {:.6e}", self.min_value)?;
        writeln!(f, "norm:      {:.6e}", self.norm)?;
        write!(f, "in box:    {}", self.in_box)?;
        if let Some(e) = &self.error {
            write!(f, "\nerror:     {e}")?;
        }
        Ok(())
    }
}

/// Recomputes `T u` and records residual, positivity, norm and box containment.
pub fn certify(p: &ProblemInstance, u: &VectorGridFunction, tol: f64) -> Certificate {
    let in_box = u.components().iter().zip(p.nl.rho()).all(|(c, &r)| {
        c.min_value() >= -POSITIVITY_SLACK && c.max_value() <= r + POSITIVITY_SLACK
    });
    let (residual, error) = match apply_t(p, u).and_then(|t| Ok(u.distance(&t)?)) {
        Ok(r) => (r, None),
        Err(e) => (f64::INFINITY, Some(e.to_string())),
    };
    Certificate {
        residual,
        min_value: u.min_value(),
        norm: u.norm(),
        in_box,
        tol,
        error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec, Grid};
    use crate::greens::{k_one_norm, spectral_radius};
    use crate::operator::{assemble, BoundarySpec, EllipticCoefficients};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const RHO: f64 = 15.0 * PI / 64.0;

    fn disk_op(h: f64) -> Arc<DiscreteOperator> {
        let grid = Arc::new(build_grid(DomainSpec::UnitDisk, h).unwrap());
        Arc::new(assemble(grid, &EllipticCoefficients::laplacian(), &BoundarySpec::Dirichlet).unwrap())
    }

    fn instance(op: &Arc<DiscreteOperator>, f: &[&str], rho: Vec<f64>, lambdas: Vec<f64>) -> ProblemInstance {
        let nl = Arc::new(Nonlinearity::parse(f, rho).unwrap());
        ProblemInstance::new(op.clone(), nl, lambdas).unwrap()
    }

    fn example(op: &Arc<DiscreteOperator>, lambdas: Vec<f64>) -> ProblemInstance {
        instance(
            op,
            &["sqrt(max(u1,u2)) + tan(max(u1,u2))", "max(u1,u2)^2"],
            vec![RHO, RHO],
            lambdas,
        )
    }

    fn grid(p: &ProblemInstance) -> &Arc<Grid> {
        p.op().grid()
    }

    #[test]
    fn constant_nonlinearity_gives_k_one() {
        let op = disk_op(0.125);
        let p = instance(&op, &["1"], vec![2.0], vec![1.0]);
        let (k1, _) = k_one_norm(&op).unwrap();
        for v in [0.0, 0.3, 1.7] {
            let t = apply_t(&p, &p.constant(&[v])).unwrap();
            assert_eq!(t.component(0), &k1);
        }
    }

    #[test]
    fn zero_is_fixed() {
        let op = disk_op(0.125);
        let p = example(&op, vec![1.6, 5.0]);
        let zero = VectorGridFunction::zeros(grid(&p).clone(), 2);
        assert_eq!(apply_t(&p, &zero).unwrap(), zero);
    }

    #[test]
    fn constant_field_maps_to_multiples_of_k_one() {
        let op = disk_op(0.125);
        let p = example(&op, vec![1.6, 5.0]);
        let (k1, _) = k_one_norm(&op).unwrap();
        let t = apply_t(&p, &p.constant(&[RHO, RHO])).unwrap();
        let m = [RHO.sqrt() + RHO.tan(), RHO * RHO];
        for i in 0..2 {
            let expected = k1.scaled(p.lambdas()[i] * m[i]);
            assert!(t.component(i).distance(&expected).unwrap() < 1e-14);
        }
    }

    #[test]
    fn doubling_lambda_doubles_t() {
        let op = disk_op(0.125);
        let p = example(&op, vec![0.7, 2.0]);
        let q = p.with_lambdas(vec![1.4, 4.0]).unwrap();
        let u = VectorGridFunction::new(vec![
            GridFunction::from_fn(grid(&p).clone(), |x| 0.3 * (1.0 - x[0] * x[0] - x[1] * x[1])),
            GridFunction::from_fn(grid(&p).clone(), |x| 0.1 + 0.05 * x[0]),
        ])
        .unwrap();
        let a = apply_t(&p, &u).unwrap();
        let b = apply_t(&q, &u).unwrap();
        assert!(b.distance(&a.zip_with(&a, |x, y| x + y).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn supersolution_margin_for_unit_source() {
        let op = disk_op(1.0 / 32.0);
        let p = instance(&op, &["1"], vec![2.0], vec![1.0]);
        let (holds, margin) = check_supersolution(&p, &p.constant(&[1.0])).unwrap();
        assert!(holds);
        assert_relative_eq!(margin, 0.75, epsilon = 2e-3);
    }

    #[test]
    fn supersolution_for_example_system() {
        let op = disk_op(1.0 / 16.0);
        let p = example(&op, vec![1.6, 5.0]);
        let beta = p.constant(&[RHO, RHO]);
        assert!(check_supersolution(&p, &beta).unwrap().0);
        let q = p.with_lambdas(vec![16.0, 50.0]).unwrap();
        let (holds, margin) = check_supersolution(&q, &beta).unwrap();
        assert!(!holds && margin < 0.0);
    }

    fn linear_scalar(op: &Arc<DiscreteOperator>, factor: f64) -> (ProblemInstance, SpectralEstimate) {
        let spectrum = spectral_radius(op, 1e-10, 500).unwrap();
        let p = instance(op, &["s"], vec![1.0], vec![factor * spectrum.mu1]);
        (p, spectrum)
    }

    #[test]
    fn subsolution_above_the_principal_value() {
        let op = disk_op(0.125);
        let (p, spectrum) = linear_scalar(&op, 1.1);
        let sub = construct_subsolution(&p, &spectrum, 0, 0.5).unwrap().unwrap();
        assert_eq!(sub.epsilon, 0.5);
        let (p, spectrum) = linear_scalar(&op, 0.9);
        assert!(construct_subsolution(&p, &spectrum, 0, 0.5).unwrap().is_none());
    }

    #[test]
    fn subsolution_needs_small_epsilon_for_saturating_growth() {
        // f(s) = 2s/(1+20s) is linear near zero with slope 2 and saturates
        let op = disk_op(0.125);
        let spectrum = spectral_radius(&op, 1e-10, 500).unwrap();
        let p = instance(&op, &["2*s/(1+20*s)"], vec![1.0], vec![spectrum.mu1]);
        let sub = construct_subsolution(&p, &spectrum, 0, 0.5).unwrap().unwrap();
        assert!(sub.epsilon < 0.1);
        let t = apply_t(&p, &sub.alpha).unwrap();
        assert!(sub.alpha.excess_over(&t).unwrap() <= 0.0);
    }

    #[test]
    fn unit_source_converges_in_two_steps() {
        let op = disk_op(1.0 / 16.0);
        let p = instance(&op, &["1"], vec![2.0], vec![1.0]);
        let report = monotone_iterate(&p, p.constant(&[1.0]), Direction::FromAbove, 1e-9, 100).unwrap();
        assert!(report.iterations <= 2);
        let (k1, _) = k_one_norm(&op).unwrap();
        assert_eq!(report.solution.component(0), &k1);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn zero_start_from_below() {
        let op = disk_op(0.125);
        let p = example(&op, vec![1.6, 5.0]);
        let zero = VectorGridFunction::zeros(grid(&p).clone(), 2);
        let report = monotone_iterate(&p, zero, Direction::FromBelow, 1e-9, 100).unwrap();
        assert!(report.converged_to_zero);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn example_system_from_above() {
        let op = disk_op(1.0 / 16.0);
        let p = example(&op, vec![1.6, 5.0]);
        let report =
            monotone_iterate(&p, p.constant(&[RHO, RHO]), Direction::FromAbove, 1e-9, 10_000).unwrap();
        assert!(report.residual <= 1e-9);
        assert!(!report.converged_to_zero);
        assert!(report.history.windows(2).all(|w| w[1] <= w[0] + ORDER_SLACK));
        let cert = certify(&p, &report.solution, 1e-9);
        assert!(cert.is_nonzero_positive(), "{cert}");
        assert!(cert.in_box && cert.norm <= RHO);
    }

    #[test]
    fn bad_starts_are_rejected() {
        let op = disk_op(0.125);
        let p = example(&op, vec![16.0, 50.0]);
        assert!(matches!(
            monotone_iterate(&p, p.constant(&[RHO, RHO]), Direction::FromAbove, 1e-9, 100),
            Err(FixedPointError::NotSupersolution { .. })
        ));
        let p = instance(&op, &["1"], vec![2.0], vec![1.0]);
        assert!(matches!(
            monotone_iterate(&p, p.constant(&[1.0]), Direction::FromBelow, 1e-9, 100),
            Err(FixedPointError::NotSubsolution { .. })
        ));
    }

    #[test]
    fn non_monotone_nonlinearity_is_caught() {
        // decreasing f from a supersolution: T(β) ≤ β but T² β > T β somewhere
        let op = disk_op(0.125);
        let p = instance(&op, &["1 - s"], vec![1.0], vec![3.0]);
        let err = monotone_iterate(&p, p.constant(&[1.0]), Direction::FromAbove, 1e-9, 100).unwrap_err();
        assert!(matches!(err, FixedPointError::MonotonicityViolation { iteration: 2, .. }), "{err}");
    }

    #[test]
    fn iteration_limit() {
        let op = disk_op(0.125);
        let p = example(&op, vec![1.6, 5.0]);
        assert!(matches!(
            monotone_iterate(&p, p.constant(&[RHO, RHO]), Direction::FromAbove, 1e-9, 2),
            Err(FixedPointError::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn bracket_keeps_order() {
        let op = disk_op(1.0 / 16.0);
        let spectrum = spectral_radius(&op, 1e-10, 500).unwrap();
        let p = instance(&op, &["sqrt(s) + s"], vec![1.0], vec![1.0]);
        let sub = construct_subsolution(&p, &spectrum, 0, 0.5).unwrap().unwrap();
        let report = bracket_iterate(&p, sub.alpha, p.constant(&[1.0]), 1e-10, 10_000).unwrap();
        assert!(report.ordered(1e-9));
        let gap = report.lower.solution.excess_over(&report.upper.solution).unwrap();
        assert!(gap <= 1e-9);
        assert!(!report.lower.converged_to_zero);
    }

    #[test]
    fn certificates() {
        let op = disk_op(0.125);
        let p = instance(&op, &["1"], vec![2.0], vec![1.0]);
        let (k1, _) = k_one_norm(&op).unwrap();
        let u = VectorGridFunction::new(vec![k1.clone()]).unwrap();
        let cert = certify(&p, &u, 1e-9);
        assert_eq!(cert.outcome(), Outcome::NonzeroPositive);
        assert!(cert.residual < 1e-15);

        let shifted = VectorGridFunction::new(vec![k1.map(|v| v + 0.1)]).unwrap();
        assert_eq!(certify(&p, &shifted, 1e-9).outcome(), Outcome::NotCertified);

        let q = example(&op, vec![1.6, 5.0]);
        let zero = VectorGridFunction::zeros(grid(&q).clone(), 2);
        let cert = certify(&q, &zero, 1e-9);
        assert_eq!(cert.residual, 0.0);
        assert_eq!(cert.outcome(), Outcome::Trivial);

        let outside = q.constant(&[1.0, 0.0]);
        let cert = certify(&q, &outside, 1e-9);
        assert!(!cert.in_box && cert.error.is_some());
        assert_eq!(cert.outcome(), Outcome::NotCertified);
    }

    #[test]
    fn invalid_instances() {
        let op = disk_op(0.25);
        let nl = Arc::new(Nonlinearity::parse(&["s"], vec![1.0]).unwrap());
        assert!(ProblemInstance::new(op.clone(), nl.clone(), vec![0.0]).is_err());
        assert!(ProblemInstance::new(op, nl, vec![1.0, 1.0]).is_err());
    }
}
