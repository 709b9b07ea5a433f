//! Nonlinearities `f_i(x, u)` on a box `I = Π [0, ρ_j]`, their Nemytskii
//! operators, and sampled checks of the monotonicity and growth hypotheses.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError, PointBindings, Var, VarSet};
use crate::geometry::{DomainSpec, Grid};
use crate::greens::{GreensError, GridFunction};

/// Box violations up to this size are clamped away silently.
pub const BOX_TOL: f64 = 1e-10;
/// Slack of the pointwise inequalities checked by sampling.
pub const CHECK_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearityError {
    #[error("f{component}: {source}")]
    Parse {
        component: usize,
        source: ParseError,
    },
    #[error("f{component} evaluation failed: {source}")]
    Eval {
        component: usize,
        source: EvalError,
    },
    #[error("invalid nonlinearity: {0}")]
    Invalid(String),
    #[error("u{component} = {value} leaves the box [0, {bound}] at node {node}")]
    BoxViolation {
        component: usize,
        node: usize,
        value: f64,
        bound: f64,
    },
    #[error("component index {index} out of range for n = {n}")]
    Index { index: usize, n: usize },
    #[error(transparent)]
    Field(#[from] GreensError),
}

/// The right-hand sides `f_1, …, f_n` with their box.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    exprs: Vec<Expr>,
    rho: Vec<f64>,
}

impl Nonlinearity {
    pub fn new(exprs: Vec<Expr>, rho: Vec<f64>) -> Result<Nonlinearity, NonlinearityError> {
        let n = exprs.len();
        if n == 0 {
            return Err(NonlinearityError::Invalid("need at least one equation".into()));
        }
        if rho.len() != n {
            return Err(NonlinearityError::Invalid(format!(
                "{n} equations but {} box bounds",
                rho.len()
            )));
        }
        if let Some(r) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(NonlinearityError::Invalid(format!(
                "box bounds must be positive, got {r}"
            )));
        }
        let allowed = VarSet::system(n);
        for (i, e) in exprs.iter().enumerate() {
            if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(*v)) {
                return Err(NonlinearityError::Invalid(format!(
                    "f{} uses '{}', outside u1..u{n}",
                    i + 1,
                    v.name()
                )));
            }
        }
        Ok(Nonlinearity { exprs, rho })
    }

    pub fn parse<S: AsRef<str>>(sources: &[S], rho: Vec<f64>) -> Result<Nonlinearity, NonlinearityError> {
        let allowed = VarSet::system(sources.len());
        let exprs = sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Expr::parse(s.as_ref(), &allowed).map_err(|source| NonlinearityError::Parse {
                    component: i + 1,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Nonlinearity::new(exprs, rho)
    }

    pub fn n(&self) -> usize {
        self.exprs.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn expr(&self, i: usize) -> &Expr {
        &self.exprs[i]
    }

    pub fn depends_on_position(&self, i: usize) -> bool {
        self.exprs[i].depends_on_position()
    }

    /// `f_i(x, u)` without box checks.
    pub fn eval(&self, i: usize, x: [f64; 2], u: &[f64]) -> Result<f64, NonlinearityError> {
        self.exprs[i]
            .eval(&PointBindings { x, u })
            .map_err(|source| NonlinearityError::Eval {
                component: i + 1,
                source,
            })
    }

    fn check_index(&self, i: usize) -> Result<(), NonlinearityError> {
        if i < self.n() {
            Ok(())
        } else {
            Err(NonlinearityError::Index { index: i, n: self.n() })
        }
    }

    /// Clamps `u` into the box, rejecting violations beyond [`BOX_TOL`].
    fn clamp_into_box(&self, u: &mut [f64], node: usize) -> Result<(), NonlinearityError> {
        for (j, (v, &bound)) in u.iter_mut().zip(&self.rho).enumerate() {
            if *v < -BOX_TOL || *v > bound + BOX_TOL {
                return Err(NonlinearityError::BoxViolation {
                    component: j + 1,
                    node,
                    value: *v,
                    bound,
                });
            }
            *v = v.clamp(0.0, bound);
        }
        Ok(())
    }
}

/// `n` grid functions on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGridFunction {
    components: Vec<GridFunction>,
}

impl VectorGridFunction {
    pub fn new(components: Vec<GridFunction>) -> Result<VectorGridFunction, NonlinearityError> {
        let Some(first) = components.first() else {
            return Err(NonlinearityError::Invalid("no components".into()));
        };
        if components.iter().any(|c| !c.same_grid(first)) {
            return Err(GreensError::GridMismatch.into());
        }
        Ok(VectorGridFunction { components })
    }

    /// Componentwise constant `values`.
    pub fn constant(grid: Arc<Grid>, values: &[f64]) -> VectorGridFunction {
        VectorGridFunction {
            components: values
                .iter()
                .map(|&v| GridFunction::constant(grid.clone(), v))
                .collect(),
        }
    }

    pub fn zeros(grid: Arc<Grid>, n: usize) -> VectorGridFunction {
        VectorGridFunction::constant(grid, &vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &GridFunction {
        &self.components[i]
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn into_components(self) -> Vec<GridFunction> {
        self.components
    }

    /// Product norm `max_i ‖u_i‖∞`.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(GridFunction::sup_norm)
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.components
            .iter()
            .map(GridFunction::min_value)
            .fold(f64::INFINITY, f64::min)
    }

    /// Values of all components at node `k`.
    pub fn at(&self, k: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.values()[k]).collect()
    }

    pub fn zip_with(
        &self,
        other: &VectorGridFunction,
        f: impl Fn(f64, f64) -> f64 + Copy,
    ) -> Result<VectorGridFunction, NonlinearityError> {
        if self.n() != other.n() {
            return Err(NonlinearityError::Invalid(format!(
                "component counts differ: {} vs {}",
                self.n(),
                other.n()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.zip_with(b, f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorGridFunction { components })
    }

    /// `‖self − other‖` in the product norm.
    pub fn distance(&self, other: &VectorGridFunction) -> Result<f64, NonlinearityError> {
        Ok(self.zip_with(other, |a, b| a - b)?.norm())
    }

    /// Largest amount by which `self ≤ other` fails nodewise (≤ 0 if it holds).
    pub fn excess_over(&self, other: &VectorGridFunction) -> Result<f64, NonlinearityError> {
        let d = self.zip_with(other, |a, b| a - b)?;
        Ok(d.components
            .iter()
            .map(GridFunction::max_value)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// `(F_i u)(x) = f_i(x, u(x))` at every interior node.
pub fn nemytskii_apply(
    nl: &Nonlinearity,
    i: usize,
    u: &VectorGridFunction,
) -> Result<GridFunction, NonlinearityError> {
    nl.check_index(i)?;
    if u.n() != nl.n() {
        return Err(NonlinearityError::Invalid(format!(
            "field has {} components, nonlinearity has {}",
            u.n(),
            nl.n()
        )));
    }
    let grid = u.grid().clone();
    let values = (0..grid.interior_count())
        .into_par_iter()
        .map(|k| {
            let mut point = u.at(k);
            nl.clamp_into_box(&mut point, k)?;
            nl.eval(i, grid.interior_node(k).x, &point)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(GridFunction::new(grid, values)?)
}

/// A counterexample found by a sampled check.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: [f64; 2],
    pub u: Vec<f64>,
    /// Upper point of the ordered pair, for monotonicity checks.
    pub v: Option<Vec<f64>>,
    /// Values whose comparison failed, as `(lhs, rhs)` of `lhs ≤ rhs`.
    pub lhs: f64,
    pub rhs: f64,
    pub note: Option<String>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "x = ({:.6}, {:.6}), u = ({})", self.x[0], self.x[1], list(&self.u))?;
        if let Some(v) = &self.v {
            write!(f, ", v = ({})", list(v))?;
        }
        match &self.note {
            Some(note) => write!(f, ": {note}"),
            None => write!(f, ": {:.6e} > {:.6e}", self.lhs, self.rhs),
        }
    }
}

/// Outcome of a sampled hypothesis check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub condition: String,
    pub passed: bool,
    pub samples: usize,
    pub witness: Option<Witness>,
}

impl CheckReport {
    /// `condition,status,witness` with the witness quoted.
    pub fn csv_row(&self) -> String {
        let status = if self.passed { "pass" } else { "fail" };
        let witness = self
            .witness
            .as_ref()
            .map(|w| w.to_string().replace('"', "'"))
            .unwrap_or_default();
        format!("{},{status},\"{witness}\"", self.condition)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            write!(f, "{}: pass (sampled, {} draws)", self.condition, self.samples)
        } else {
            write!(f, "{}: FAIL", self.condition)?;
            if let Some(w) = &self.witness {
                write!(f, " with witness {w}")?;
            }
            Ok(())
        }
    }
}

/// Tracks the worst violation `lhs − rhs > slack` seen so far.
struct WorstWitness(Option<(f64, Witness)>);

impl WorstWitness {
    fn offer(&mut self, w: Witness) {
        let gap = if w.note.is_some() { f64::INFINITY } else { w.lhs - w.rhs };
        if gap > CHECK_SLACK && self.0.as_ref().is_none_or(|(g, _)| gap > *g) {
            self.0 = Some((gap, w));
        }
    }
}

fn eval_or_note(
    nl: &Nonlinearity,
    i: usize,
    x: [f64; 2],
    u: &[f64],
) -> Result<f64, String> {
    nl.eval(i, x, u).map_err(|e| e.to_string())
}

/// Samples ordered pairs `u ≤ v` in the box and checks
/// `f_i(x, u) ≤ f_i(x, v)`; the worst violation becomes the witness.
pub fn check_monotone(
    nl: &Nonlinearity,
    i: usize,
    domain: &DomainSpec,
    samples: usize,
    seed: u64,
) -> Result<CheckReport, NonlinearityError> {
    nl.check_index(i)?;
    let n = nl.n();
    let rho = nl.rho();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<([f64; 2], Vec<f64>, Vec<f64>)> = Vec::with_capacity(samples + n + 1);

    // corner pairs: 0 ≤ ρ_j e_j and 0 ≤ ρ
    let centre = domain.centroid();
    for j in 0..n {
        let mut v = vec![0.0; n];
        v[j] = rho[j];
        pairs.push((centre, vec![0.0; n], v));
    }
    pairs.push((centre, vec![0.0; n], rho.to_vec()));

    for _ in 0..samples {
        let x = domain.sample_point(&mut rng);
        let u: Vec<f64> = rho.iter().map(|&r| rng.random_range(0.0..=r)).collect();
        let v: Vec<f64> = u
            .iter()
            .zip(rho)
            .map(|(&a, &r)| {
                if rng.random_bool(0.3) {
                    a
                } else {
                    rng.random_range(a..=r)
                }
            })
            .collect();
        pairs.push((x, u, v));
    }

    let mut worst = WorstWitness(None);
    for (x, u, v) in pairs {
        let witness = |lhs, rhs, note| Witness {
            x,
            u: u.clone(),
            v: Some(v.clone()),
            lhs,
            rhs,
            note,
        };
        match (eval_or_note(nl, i, x, &u), eval_or_note(nl, i, x, &v)) {
            (Ok(fu), Ok(fv)) => worst.offer(witness(fu, fv, None)),
            (Err(e), _) | (_, Err(e)) => worst.offer(witness(f64::NAN, f64::NAN, Some(e))),
        }
    }
    Ok(CheckReport {
        condition: format!("(a) f{} non-decreasing", i + 1),
        passed: worst.0.is_none(),
        samples,
        witness: worst.0.map(|(_, w)| w),
    })
}

/// Checks `f_{i0}(x, u) ≥ δ u_{i0}` on `Π [0, ρ0]`: random draws plus a
/// deterministic sweep along the diagonal `u = (s, …, s)`.
pub fn check_growth(
    nl: &Nonlinearity,
    i0: usize,
    delta: f64,
    rho0: f64,
    domain: &DomainSpec,
    samples: usize,
    seed: u64,
) -> Result<CheckReport, NonlinearityError> {
    nl.check_index(i0)?;
    let min_box = nl.rho().iter().copied().fold(f64::INFINITY, f64::min);
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(NonlinearityError::Invalid(format!("delta must be positive, got {delta}")));
    }
    if !(rho0 > 0.0 && rho0 < min_box) {
        return Err(NonlinearityError::Invalid(format!(
            "rho0 = {rho0} must lie in (0, {min_box})"
        )));
    }
    let n = nl.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<([f64; 2], Vec<f64>)> = Vec::new();
    let mut sweep_x = vec![domain.centroid()];
    for _ in 0..samples {
        let x = domain.sample_point(&mut rng);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=rho0)).collect();
        if sweep_x.len() < 5 {
            sweep_x.push(x);
        }
        points.push((x, u));
    }
    const SWEEP: usize = 1000;
    for &x in &sweep_x {
        for k in 1..=SWEEP {
            let linear = rho0 * k as f64 / SWEEP as f64;
            // logarithmic part reaches down to rho0 * 1e-8
            let log = rho0 * 10f64.powf(-8.0 * (k - 1) as f64 / (SWEEP - 1) as f64);
            points.push((x, vec![linear; n]));
            points.push((x, vec![log; n]));
        }
    }

    let mut worst = WorstWitness(None);
    for (x, u) in points {
        let rhs_needed = delta * u[i0];
        let witness = |value, note| Witness {
            x,
            u: u.clone(),
            v: None,
            lhs: rhs_needed,
            rhs: value,
            note,
        };
        match eval_or_note(nl, i0, x, &u) {
            Ok(value) => worst.offer(witness(value, None)),
            Err(e) => worst.offer(witness(f64::NAN, Some(e))),
        }
    }
    Ok(CheckReport {
        condition: format!("(b) f{} >= {delta} u{} on [0, {rho0}]^{n}", i0 + 1, i0 + 1),
        passed: worst.0.is_none(),
        samples,
        witness: worst.0.map(|(_, w)| w),
    })
}

/// `m_i(β) = max_x f_i(x, β)` over the closure points of the grid.
pub fn max_over_domain(
    nl: &Nonlinearity,
    i: usize,
    beta: &[f64],
    grid: &Grid,
) -> Result<f64, NonlinearityError> {
    nl.check_index(i)?;
    if beta.len() != nl.n() {
        return Err(NonlinearityError::Invalid(format!(
            "beta has {} entries, expected {}",
            beta.len(),
            nl.n()
        )));
    }
    let mut point = beta.to_vec();
    nl.clamp_into_box(&mut point, 0)?;
    if !nl.depends_on_position(i) {
        return nl.eval(i, grid.spec().centroid(), &point);
    }
    let mut best = f64::NEG_INFINITY;
    for x in grid.closure_points() {
        best = best.max(nl.eval(i, x, &point)?);
    }
    Ok(best)
}

/// Whether an expression reads `u_j` (or `s` for `j = 0`).
pub fn reads_component(expr: &Expr, j: usize) -> bool {
    let vars = expr.variables();
    vars.contains(&Var::U(j)) || (j == 0 && vars.contains(&Var::S))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const RHO: f64 = 15.0 * PI / 64.0;

    fn example_system() -> Nonlinearity {
        Nonlinearity::parse(
            &["sqrt(max(u1,u2)) + tan(max(u1,u2))", "max(u1,u2)^2"],
            vec![RHO, RHO],
        )
        .unwrap()
    }

    fn disk(h: f64) -> Arc<Grid> {
        Arc::new(build_grid(DomainSpec::UnitDisk, h).unwrap())
    }

    #[test]
    fn nemytskii_on_constant_field() {
        let nl = example_system();
        let g = disk(0.125);
        let u = VectorGridFunction::constant(g, &[RHO, RHO]);
        let f2 = nemytskii_apply(&nl, 1, &u).unwrap();
        assert!(f2.values().iter().all(|&v| (v - RHO * RHO).abs() < 1e-15));
        let f1 = nemytskii_apply(&nl, 0, &u).unwrap();
        let oracle = RHO.sqrt() + RHO.tan();
        assert!(f1.values().iter().all(|&v| (v - oracle).abs() < 1e-15));
        assert_relative_eq!(oracle, 1.764_432_699_828_930_4, epsilon = 1e-14);
    }

    #[test]
    fn nemytskii_of_zero_is_zero() {
        let nl = example_system();
        let u = VectorGridFunction::zeros(disk(0.125), 2);
        for i in 0..2 {
            assert!(nemytskii_apply(&nl, i, &u).unwrap().values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn small_box_violations_are_clamped() {
        let nl = example_system();
        let g = disk(0.25);
        let raw = VectorGridFunction::constant(g.clone(), &[RHO + 5e-11, -5e-11]);
        let clamped = VectorGridFunction::constant(g.clone(), &[RHO, 0.0]);
        for i in 0..2 {
            assert_eq!(
                nemytskii_apply(&nl, i, &raw).unwrap(),
                nemytskii_apply(&nl, i, &clamped).unwrap()
            );
        }
        let far = VectorGridFunction::constant(g, &[RHO + 1e-6, 0.0]);
        assert!(matches!(
            nemytskii_apply(&nl, 0, &far),
            Err(NonlinearityError::BoxViolation { component: 1, .. })
        ));
    }

    #[test]
    fn example_nonlinearities_are_monotone() {
        let nl = example_system();
        for i in 0..2 {
            let report = check_monotone(&nl, i, &DomainSpec::UnitDisk, 10_000, 7).unwrap();
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn difference_is_not_monotone() {
        let nl = Nonlinearity::parse(&["u1 - u2", "u1"], vec![1.0, 1.0]).unwrap();
        let report = check_monotone(&nl, 0, &DomainSpec::unit_square(), 1000, 1).unwrap();
        assert!(!report.passed);
        let w = report.witness.unwrap();
        let v = w.v.clone().unwrap();
        assert!(w.u.iter().zip(&v).all(|(a, b)| a <= b));
        assert_eq!(w.lhs, w.u[0] - w.u[1]);
        assert_eq!(w.rhs, v[0] - v[1]);
        assert!(w.lhs > w.rhs);
    }

    #[test]
    fn tangent_example_grows_linearly() {
        let nl = example_system();
        let report = check_growth(&nl, 0, 1.0, 0.7, &DomainSpec::UnitDisk, 2000, 3).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn square_fails_linear_growth() {
        let nl = Nonlinearity::parse(&["u1^2"], vec![1.0]).unwrap();
        let report = check_growth(&nl, 0, 1.0, 0.5, &DomainSpec::UnitDisk, 500, 3).unwrap();
        assert!(!report.passed);
        let w = report.witness.as_ref().unwrap();
        assert_eq!(w.rhs, w.u[0] * w.u[0]);
        assert!(w.rhs < w.lhs);
        assert!(report.csv_row().starts_with("(b) f1 >= 1 u1"));
    }

    #[test]
    fn growth_check_is_monotone_in_delta() {
        let nl = Nonlinearity::parse(&["sqrt(s) + s"], vec![1.0]).unwrap();
        for (delta, rho0) in [(3.0, 0.2), (10.0, 0.01), (50.0, 1e-4)] {
            let strong = check_growth(&nl, 0, delta, rho0, &DomainSpec::UnitDisk, 300, 11).unwrap();
            let weak = check_growth(&nl, 0, 0.5 * delta, rho0, &DomainSpec::UnitDisk, 300, 11).unwrap();
            assert!(strong.passed && weak.passed);
        }
        let too_strong = check_growth(&nl, 0, 100.0, 0.5, &DomainSpec::UnitDisk, 300, 11).unwrap();
        assert!(!too_strong.passed);
    }

    #[test]
    fn growth_fails_when_the_other_component_lags() {
        let nl = Nonlinearity::parse(&["u2", "u1"], vec![1.0, 1.0]).unwrap();
        let report = check_growth(&nl, 0, 1.0, 0.5, &DomainSpec::UnitDisk, 200, 5).unwrap();
        assert!(!report.passed);
        let w = report.witness.unwrap();
        assert!(w.u[0] > w.u[1]);
    }

    #[test]
    fn reports_are_reproducible() {
        let nl = Nonlinearity::parse(&["u1 - u2", "u1"], vec![1.0, 1.0]).unwrap();
        let a = check_monotone(&nl, 0, &DomainSpec::UnitDisk, 500, 99).unwrap();
        let b = check_monotone(&nl, 0, &DomainSpec::UnitDisk, 500, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn maxima_over_the_domain() {
        let nl = example_system();
        let g = disk(0.125);
        assert_relative_eq!(
            max_over_domain(&nl, 1, &[RHO, RHO], &g).unwrap(),
            RHO * RHO,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            max_over_domain(&nl, 0, &[RHO, RHO], &g).unwrap(),
            RHO.sqrt() + RHO.tan(),
            epsilon = 1e-15
        );
        let coarse = disk(0.25);
        assert_eq!(
            max_over_domain(&nl, 0, &[RHO, RHO], &g).unwrap(),
            max_over_domain(&nl, 0, &[RHO, RHO], &coarse).unwrap()
        );

        let lin = Nonlinearity::parse(&["x1*u1"], vec![1.0]).unwrap();
        let square = build_grid(DomainSpec::unit_square(), 0.1).unwrap();
        assert_eq!(max_over_domain(&lin, 0, &[1.0], &square).unwrap(), 1.0);
    }

    #[test]
    fn invalid_construction() {
        assert!(Nonlinearity::parse(&["u1"], vec![0.0]).is_err());
        assert!(Nonlinearity::parse(&["u1", "u2"], vec![1.0]).is_err());
        assert!(matches!(
            Nonlinearity::parse(&["u3"], vec![1.0]),
            Err(NonlinearityError::Parse { component: 1, .. })
        ));
        let nl = Nonlinearity::parse(&["u1"], vec![1.0]).unwrap();
        assert!(check_growth(&nl, 0, 1.0, 1.5, &DomainSpec::UnitDisk, 10, 0).is_err());
        assert!(check_growth(&nl, 0, -1.0, 0.5, &DomainSpec::UnitDisk, 10, 0).is_err());
    }
}
