//! Built-in acceptance suite reproducing the reference examples.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use conesolve_core::{
    apply_k, assemble, bracket_iterate, build_grid, check_growth, check_monotone,
    construct_subsolution, k_one_norm, max_over_domain, single_range, spectral_radius,
    system_ranges, BoundarySpec, DiscreteOperator, DomainSpec, EllipticCoefficients, EvalError,
    Expr, GridFunction, Nonlinearity, ProblemInstance, VarSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Config, SCALAR_DISK, SYSTEM_DISK};
use crate::pipeline::{check_hypotheses, solve, Setup, SPECTRAL_MAX_ITER, SPECTRAL_TOL};

/// Step size the tolerances refer to.
pub const REFERENCE_H: f64 = 1.0 / 64.0;
const RHO: f64 = 15.0 * PI / 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Failed on a grid coarser than the reference step.
    SkipCoarse,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::SkipCoarse => "SKIP-coarse",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}. {}: {}", self.status, self.id, self.title, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub h: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            h: REFERENCE_H,
            seed: 20_240_601,
        }
    }
}

type Check = fn(&VerifyOptions) -> Result<(bool, String), String>;

pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    /// Tolerances only apply at the reference step.
    h_dependent: bool,
    check: Check,
}

pub fn criteria() -> &'static [Criterion] {
    &CRITERIA
}

static CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "Green-operator fidelity", h_dependent: true, check: green_fidelity },
    Criterion { id: 2, title: "sup norm of K(1)", h_dependent: true, check: k_one_norm_value },
    Criterion { id: 3, title: "principal characteristic value", h_dependent: true, check: principal_value },
    Criterion { id: 4, title: "system lambda uppers", h_dependent: true, check: system_uppers },
    Criterion { id: 5, title: "scalar sup", h_dependent: false, check: scalar_sup },
    Criterion { id: 6, title: "end-to-end existence", h_dependent: true, check: end_to_end },
    Criterion { id: 7, title: "bracketing property suite", h_dependent: false, check: bracketing },
    Criterion { id: 8, title: "operator property suite", h_dependent: false, check: operator_properties },
    Criterion { id: 9, title: "hypothesis checkers", h_dependent: false, check: hypothesis_checkers },
    Criterion { id: 10, title: "expression engine", h_dependent: false, check: expression_engine },
];

pub fn run_criterion(c: &Criterion, opts: &VerifyOptions) -> CriterionResult {
    let (passed, detail) = match (c.check)(opts) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let coarse = opts.h > REFERENCE_H * (1.0 + 1e-12);
    let status = match (passed, c.h_dependent && coarse) {
        (true, _) => Status::Pass,
        (false, true) => Status::SkipCoarse,
        (false, false) => Status::Fail,
    };
    CriterionResult {
        id: c.id,
        title: c.title,
        status,
        detail,
    }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    criteria().iter().map(|c| run_criterion(c, opts)).collect()
}

fn fmt_h(h: f64) -> String {
    let n = (1.0 / h).round();
    if (1.0 / n - h).abs() <= 1e-15 {
        format!("1/{n}")
    } else {
        format!("{h}")
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn laplacian(domain: DomainSpec, h: f64) -> Result<Arc<DiscreteOperator>, String> {
    let grid = Arc::new(build_grid(domain, h).map_err(|e| e.to_string())?);
    let op = assemble(grid, &EllipticCoefficients::laplacian(), &BoundarySpec::Dirichlet)
        .map_err(|e| e.to_string())?;
    Ok(Arc::new(op))
}

/// Power series `J₀(x) = Σ (−1)ᵏ (x/2)²ᵏ / (k!)²`.
pub fn bessel_j0(x: f64) -> f64 {
    let q = (x / 2.0) * (x / 2.0);
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..80 {
        term *= -q / (k * k) as f64;
        sum += term;
    }
    sum
}

/// First zero of `J₀` by bisection on `[2, 3]`.
pub fn bessel_j0_first_zero() -> f64 {
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if bessel_j0(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= f64::EPSILON * b {
            break;
        }
    }
    0.5 * (a + b)
}

fn k_one_error(h: f64) -> Result<f64, String> {
    let op = laplacian(DomainSpec::UnitDisk, h)?;
    let (k1, _) = k_one_norm(&op).map_err(|e| e.to_string())?;
    let exact = GridFunction::from_fn(op.grid().clone(), |x| 0.25 * (1.0 - x[0] * x[0] - x[1] * x[1]));
    k1.distance(&exact).map_err(|e| e.to_string())
}

fn green_fidelity(o: &VerifyOptions) -> Result<(bool, String), String> {
    let fine = k_one_error(o.h)?;
    let coarse = k_one_error(2.0 * o.h)?;
    let ratio = coarse / fine;
    let small = fine <= 5e-3;
    let ordered = (2.5..=4.5).contains(&ratio);
    Ok((
        small && ordered,
        format!(
            "max error {fine:.3e} at h = {} (<= 5e-3: {}), error ratio h = {} vs {} is {ratio:.3} (in [2.5, 4.5]: {})",
            fmt_h(o.h),
            yes(small),
            fmt_h(2.0 * o.h),
            fmt_h(o.h),
            yes(ordered)
        ),
    ))
}

fn k_one_norm_value(o: &VerifyOptions) -> Result<(bool, String), String> {
    let op = laplacian(DomainSpec::UnitDisk, o.h)?;
    let (_, norm) = k_one_norm(&op).map_err(|e| e.to_string())?;
    let rel = (norm - 0.25).abs() / 0.25;
    Ok((rel <= 0.02, format!("|K(1)| = {norm:.8} at h = {}, relative error {rel:.3e} (<= 2%)", fmt_h(o.h))))
}

fn principal_value(o: &VerifyOptions) -> Result<(bool, String), String> {
    let j = bessel_j0_first_zero();
    let disk_ref = j * j;
    let square_ref = 2.0 * PI * PI;
    let mu = |domain| -> Result<f64, String> {
        let op = laplacian(domain, o.h)?;
        Ok(spectral_radius(&op, SPECTRAL_TOL, SPECTRAL_MAX_ITER).map_err(|e| e.to_string())?.mu1)
    };
    let disk = mu(DomainSpec::UnitDisk)?;
    let square = mu(DomainSpec::unit_square())?;
    let rd = (disk - disk_ref).abs() / disk_ref;
    let rs = (square - square_ref).abs() / square_ref;
    Ok((
        rd <= 0.01 && rs <= 0.01,
        format!(
            "disk mu1 = {disk:.6} vs j01^2 = {disk_ref:.6} ({:.3}%), square mu1 = {square:.6} vs 2 pi^2 = {square_ref:.6} ({:.3}%), limit 1%",
            100.0 * rd,
            100.0 * rs
        ),
    ))
}

fn builtin(text: &str, h: f64) -> Result<Config, String> {
    let mut c: Config = text.parse().map_err(|e: crate::config::ConfigError| e.to_string())?;
    c.h = h;
    Ok(c)
}

fn system_uppers(o: &VerifyOptions) -> Result<(bool, String), String> {
    let config = builtin(SYSTEM_DISK, o.h)?;
    let nl = Nonlinearity::parse(&config.f, config.rho.clone()).map_err(|e| e.to_string())?;
    let op = laplacian(DomainSpec::UnitDisk, o.h)?;
    let (_, k1) = k_one_norm(&op).map_err(|e| e.to_string())?;
    let targets = [1.669, 5.432];
    let uppers = |k1_norm: f64| -> Result<Vec<f64>, String> {
        let r = system_ranges(&nl, &[RHO, RHO], 0, 1.0, k1_norm, 1.0, op.grid()).map_err(|e| e.to_string())?;
        Ok(r.iter().map(|r| r.upper).collect())
    };
    let analytic = uppers(0.25)?;
    let numeric = uppers(k1)?;
    let a_ok = analytic.iter().zip(&targets).all(|(u, t)| (u - t).abs() <= 5e-3);
    let n_ok = numeric.iter().zip(&targets).all(|(u, t)| (u - t).abs() <= 0.025 * t);
    Ok((
        a_ok && n_ok,
        format!(
            "analytic |K1| = 1/4: ({:.6}, {:.6}) within 5e-3: {}; numeric |K1| = {k1:.6} at h = {}: ({:.6}, {:.6}) within 2.5%: {}",
            analytic[0],
            analytic[1],
            yes(a_ok),
            fmt_h(o.h),
            numeric[0],
            numeric[1],
            yes(n_ok)
        ),
    ))
}

fn scalar_sup(o: &VerifyOptions) -> Result<(bool, String), String> {
    let config = builtin(SCALAR_DISK, o.h)?;
    let nl = Nonlinearity::parse(&config.f, config.rho.clone()).map_err(|e| e.to_string())?;
    let grid = build_grid(DomainSpec::UnitDisk, o.h).map_err(|e| e.to_string())?;
    let j = bessel_j0_first_zero();
    let single = single_range(&nl, config.rho[0], 1.0, 0.25, j * j, config.grid_points, &grid)
        .map_err(|e| e.to_string())?;
    let sup = single.range.upper;
    Ok((
        (sup - 1.66924).abs() <= 1e-3,
        format!("sup 4s/(sqrt(s) + tan(s)) = {sup:.6} at s = {:.6} (target 1.66924 +- 1e-3)", single.argmax),
    ))
}

fn end_to_end(o: &VerifyOptions) -> Result<(bool, String), String> {
    let mut config = builtin(SYSTEM_DISK, o.h)?;
    config.tol = 1e-9;
    config.seed = o.seed;
    config.lambdas = Some(vec![1.6, 5.0]);
    let setup = Setup::new(config).map_err(|e| e.to_string())?;
    let hyp = check_hypotheses(&setup).map_err(|e| e.to_string())?;
    if let Some((cond, detail)) = hyp.failure() {
        return Ok((false, format!("hypothesis {cond} failed: {detail}")));
    }
    // nodewise monotonicity of every step is enforced inside the iteration
    let outcome = solve(&setup, &hyp.growth, &[1.6, 5.0]).map_err(|e| e.to_string())?;
    let cert = &outcome.certificate;
    let u = &outcome.upper.solution;
    let max = u.components().iter().map(|c| c.max_value()).fold(f64::NEG_INFINITY, f64::max);
    let residual_ok = cert.residual <= 1e-9;
    let range_ok = cert.min_value > -1e-10 && max <= RHO;
    let nonzero = cert.norm > 1e-8;
    let history_ok = outcome.upper.history.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok((
        residual_ok && range_ok && nonzero && history_ok && cert.is_nonzero_positive(),
        format!(
            "{} steps from above, residual {:.3e} (<= 1e-9: {}), values in [{:.3e}, {:.6}] (inside (-1e-10, rho]: {}), norm {:.6} (> 1e-8: {}), non-increasing: {}",
            outcome.upper.iterations,
            cert.residual,
            yes(residual_ok),
            cert.min_value,
            max,
            yes(range_ok),
            cert.norm,
            yes(nonzero),
            yes(history_ok)
        ),
    ))
}

/// A random monotone, nonnegative nonlinearity and its box.
fn random_nonlinearity(rng: &mut ChaCha8Rng, template: usize) -> (Vec<String>, Vec<f64>) {
    let mut c = || rng.random_range(0.2..2.0);
    let (a, b, d, e) = (c(), c(), c(), c());
    match template {
        0 => (vec![format!("{a}*sqrt(s) + {b}*s")], vec![0.3 + 0.35 * d]),
        1 => (vec![format!("{a}*s/(1 + {b}*s) + {d}*sqrt(s)")], vec![0.3 + 0.35 * e]),
        2 => (vec![format!("{a}*(exp(s) - 1) + {b}*sqrt(s)")], vec![0.3 + 0.35 * d]),
        3 => (vec![format!("{a}*s + {b}*s^2")], vec![0.3 + 0.35 * d]),
        4 => (
            vec![format!("{a}*sqrt(u1) + {b}*u2"), format!("{d}*u1 + {e}*u2^2")],
            vec![0.3 + 0.35 * a, 0.3 + 0.35 * b],
        ),
        _ => (
            vec![
                format!("{a}*sqrt(max(u1,u2)) + tan({}*max(u1,u2))", 0.5 + 0.25 * b),
                format!("{d}*max(u1,u2)^2 + {}", 0.1 * e),
            ],
            vec![0.3 + 0.35 * e; 2],
        ),
    }
}

fn bracketing(o: &VerifyOptions) -> Result<(bool, String), String> {
    let h = o.h.max(1.0 / 32.0);
    let op = laplacian(DomainSpec::UnitDisk, h)?;
    let (_, k1) = k_one_norm(&op).map_err(|e| e.to_string())?;
    let spectrum = spectral_radius(&op, SPECTRAL_TOL, SPECTRAL_MAX_ITER).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let (mut bracketed, mut ordered, mut worst) = (0, 0, f64::NEG_INFINITY);
    for case in 0..20 {
        let (f, rho) = random_nonlinearity(&mut rng, case % 6);
        let nl = Arc::new(Nonlinearity::parse(&f, rho.clone()).map_err(|e| e.to_string())?);
        for i in 0..nl.n() {
            if !check_monotone(&nl, i, &DomainSpec::UnitDisk, 2000, o.seed).map_err(|e| e.to_string())?.passed {
                return Err(format!("case {case}: generated f{} is not monotone", i + 1));
            }
        }
        // λ below β_j/(m_j |K1|) makes the constant β = ρ a supersolution
        let lambdas = (0..nl.n())
            .map(|j| {
                let m = max_over_domain(&nl, j, &rho, op.grid()).map_err(|e| e.to_string())?;
                Ok(rng.random_range(0.2..0.95) * rho[j] / (m * k1))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        let p = ProblemInstance::new(op.clone(), nl.clone(), lambdas).map_err(|e| e.to_string())?;
        let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
        let Some(sub) = construct_subsolution(&p, &spectrum, 0, 0.5 * min_rho).map_err(|e| e.to_string())? else {
            continue;
        };
        bracketed += 1;
        let report = bracket_iterate(&p, sub.alpha, p.constant(&rho), 1e-10, 10_000)
            .map_err(|e| format!("case {case} ({}): {e}", f.join("; ")))?;
        let limits = report.lower.solution.excess_over(&report.upper.solution).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_crossing).max(limits);
        if report.ordered(1e-9) && limits <= 1e-9 {
            ordered += 1;
        }
    }
    Ok((
        ordered == bracketed,
        format!(
            "20 cases at h = {}, {bracketed} with a subsolution, {ordered} of those ordered; max(alpha_k - beta_k) = {worst:.3e} (slack 1e-9)",
            fmt_h(h)
        ),
    ))
}

fn operator_properties(o: &VerifyOptions) -> Result<(bool, String), String> {
    let mut summary = Vec::new();
    let mut all = true;
    for (name, domain) in [("disk", DomainSpec::UnitDisk), ("square", DomainSpec::unit_square())] {
        let op = laplacian(domain, o.h)?;
        let n = op.dim();
        let failures: usize = (0..100u64)
            .into_par_iter()
            .map(|k| -> Result<usize, String> {
                let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ (k + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let mut random = |lo: f64, hi: f64| {
                    let v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
                    GridFunction::new(op.grid().clone(), v).map_err(|e| e.to_string())
                };
                let g = random(-1.0, 1.0)?;
                let q = random(-1.0, 1.0)?;
                let d = random(0.0, 1.0)?;
                let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                let k = |f: &GridFunction| apply_k(&op, f).map_err(|e| e.to_string());
                let (kg, kq) = (k(&g)?, k(&q)?);
                let combo = k(&g.zip_with(&q, |x, y| a * x + b * y).map_err(|e| e.to_string())?)?;
                let expected = kg.zip_with(&kq, |x, y| a * x + b * y).map_err(|e| e.to_string())?;
                let linear = combo.distance(&expected).map_err(|e| e.to_string())?
                    <= 1e-9 * (a.abs() * g.sup_norm() + b.abs() * q.sup_norm());
                let pos = d.clone();
                let positive = k(&pos)?.min_value() >= -1e-10 * pos.sup_norm();
                let upper = g.zip_with(&d, |x, y| x + y).map_err(|e| e.to_string())?;
                let slack = 1e-10 * d.sup_norm();
                let monotone = kg.values().iter().zip(k(&upper)?.values()).all(|(l, u)| *l <= *u + slack);
                Ok([linear, positive, monotone].iter().filter(|ok| !**ok).count())
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .sum();
        all &= failures == 0;
        summary.push(format!("{name}: {failures} violations in 100 draws x 3 properties"));
    }
    Ok((all, format!("{} at h = {}", summary.join(", "), fmt_h(o.h))))
}

fn hypothesis_checkers(o: &VerifyOptions) -> Result<(bool, String), String> {
    let disk = DomainSpec::UnitDisk;
    let config = builtin(SYSTEM_DISK, o.h)?;
    let nl = Nonlinearity::parse(&config.f, config.rho.clone()).map_err(|e| e.to_string())?;
    let err = |e: conesolve_core::NonlinearityError| e.to_string();
    let m1 = check_monotone(&nl, 0, &disk, 10_000, o.seed).map_err(err)?;
    let m2 = check_monotone(&nl, 1, &disk, 10_000, o.seed).map_err(err)?;
    let g1 = check_growth(&nl, 0, 1.0, 0.5 * RHO, &disk, 10_000, o.seed).map_err(err)?;
    let accepted = m1.passed && m2.passed && g1.passed;

    let diff = Nonlinearity::parse(&["u1 - u2", "u1"], vec![1.0, 1.0]).map_err(err)?;
    let bad_mono = check_monotone(&diff, 0, &disk, 10_000, o.seed).map_err(err)?;
    let square = Nonlinearity::parse(&["u1^2"], vec![1.0]).map_err(err)?;
    let bad_growth = check_growth(&square, 0, 1.0, 0.5, &disk, 10_000, o.seed).map_err(err)?;
    let rejected = !bad_mono.passed
        && bad_mono.witness.is_some()
        && !bad_growth.passed
        && bad_growth.witness.is_some();
    let witness = |r: &conesolve_core::CheckReport| {
        r.witness.as_ref().map(|w| w.to_string()).unwrap_or_else(|| "none".into())
    };
    Ok((
        accepted && rejected,
        format!(
            "f1, f2 accepted: {}; u1 - u2 rejected with witness {}; u1^2 with delta = 1 rejected with witness {}",
            yes(accepted),
            witness(&bad_mono),
            witness(&bad_growth)
        ),
    ))
}

/// Source and exact value.
pub const PRECEDENCE_CASES: [(&str, f64); 24] = [
    ("2+3*4", 14.0),
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("(-2)^2", 4.0),
    ("2*3^2", 18.0),
    ("2^-1", 0.5),
    ("-2^-2", -0.25),
    ("8/4/2", 1.0),
    ("1-2-3", -4.0),
    ("2-3+4", 3.0),
    ("2*3/4", 1.5),
    ("-3*-2", 6.0),
    ("--2", 2.0),
    ("+2", 2.0),
    ("(1+2)*3", 9.0),
    ("1+2*3-4/2", 5.0),
    ("2*(3+4)^2", 98.0),
    ("10-2^3*2", -6.0),
    ("min(3,1,2)", 1.0),
    ("max(1,5,3)-1", 4.0),
    ("pow(2,10)", 1024.0),
    ("1.5e2 + 25E-2", 150.25),
    ("abs(-3)^2", 9.0),
    ("-abs(-3)", -3.0),
];

/// Inputs outside the domain of a guarded function.
pub const GUARD_CASES: [&str; 7] = ["sqrt(-1)", "log(0)", "log(-2)", "tan(pi/2)", "1/0", "exp(1000)", "0^-1"];

fn expression_engine(_: &VerifyOptions) -> Result<(bool, String), String> {
    let vars = VarSet::system(1);
    let empty = std::collections::HashMap::<String, f64>::new();
    let mut wrong = Vec::new();
    for (src, want) in PRECEDENCE_CASES {
        match Expr::parse(src, &vars).map_err(|e| e.to_string()).and_then(|e| e.eval(&empty).map_err(|e| e.to_string())) {
            Ok(v) if v == want => {}
            Ok(v) => wrong.push(format!("{src} = {v}, expected {want}")),
            Err(e) => wrong.push(format!("{src}: {e}")),
        }
    }
    let mut unguarded = Vec::new();
    for src in GUARD_CASES {
        match Expr::parse(src, &vars).map(|e| e.eval(&empty)) {
            Ok(Err(EvalError::Domain { .. })) => {}
            other => unguarded.push(format!("{src} -> {other:?}")),
        }
    }
    let ok = wrong.is_empty() && unguarded.is_empty();
    let mut detail = format!(
        "{}/{} precedence cases exact, {}/{} domain guards raise structured errors",
        PRECEDENCE_CASES.len() - wrong.len(),
        PRECEDENCE_CASES.len(),
        GUARD_CASES.len() - unguarded.len(),
        GUARD_CASES.len()
    );
    for w in wrong.iter().chain(&unguarded) {
        detail.push_str("; ");
        detail.push_str(w);
    }
    Ok((ok, detail))
}
