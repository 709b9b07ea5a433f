//! Admissible parameter ranges for `λ`.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{DomainSpec, Grid};
use crate::nonlinearity::{check_growth, max_over_domain, CheckReport, Nonlinearity, NonlinearityError};

/// Smallest sampled `s`, relative to `ρ`.
pub const SAMPLE_FLOOR: f64 = 1e-8;
pub const MIN_GRID_POINTS: usize = 100;
/// Candidate growth constants, tried from the largest down.
pub const AUTO_DELTAS: [f64; 7] = [1e4, 1e3, 1e2, 1e1, 1.0, 1e-1, 1e-2];
/// `ρ0 = min ρ · 2⁻ᵏ` for `k = 1..=AUTO_HALVINGS`.
pub const AUTO_HALVINGS: i32 = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RangeError {
    #[error("condition (c) fails: m{component} = {m:.6e} <= 0")]
    ConditionCViolation { component: usize, m: f64 },
    #[error("M(s) = {m:.6e} <= 0 at s = {s:.6e}")]
    NonpositiveM { s: f64, m: f64 },
    #[error("invalid range request: {0}")]
    Invalid(String),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
}

/// Inputs behind a computed range.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub m_value: f64,
    pub k1_norm: f64,
    pub beta: f64,
    pub mu1: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRange {
    /// Zero-based component.
    pub component: usize,
    pub lower: f64,
    pub lower_inclusive: bool,
    pub upper: f64,
    pub upper_inclusive: bool,
    pub empty: bool,
    pub provenance: Provenance,
}

impl LambdaRange {
    fn new(
        component: usize,
        (lower, lower_inclusive): (f64, bool),
        (upper, upper_inclusive): (f64, bool),
        provenance: Provenance,
    ) -> LambdaRange {
        LambdaRange {
            component,
            lower,
            lower_inclusive,
            upper,
            upper_inclusive,
            empty: lower >= upper,
            provenance,
        }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        let above = if self.lower_inclusive { lambda >= self.lower } else { lambda > self.lower };
        let below = if self.upper_inclusive { lambda <= self.upper } else { lambda < self.upper };
        above && below
    }

    /// Inflates `m` by `factor` and recomputes the upper bound from the
    /// provenance, for maxima that were only sampled on grid points.
    pub fn with_m_factor(mut self, factor: f64) -> LambdaRange {
        let p = &mut self.provenance;
        p.m_value *= factor;
        self.upper = p.beta / (p.m_value * p.k1_norm);
        self.empty = self.lower >= self.upper;
        self
    }

    pub fn csv_header() -> &'static str {
        "component,lower,lower_inclusive,upper,upper_inclusive,empty,m,k1_norm,beta,mu1,delta"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let p = &self.provenance;
        format!(
            "{},{:.16e},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{},{}",
            self.component + 1,
            self.lower,
            self.lower_inclusive,
            self.upper,
            self.upper_inclusive,
            self.empty,
            p.m_value,
            p.k1_norm,
            p.beta,
            opt(p.mu1),
            opt(p.delta),
        )
    }
}

impl fmt::Display for LambdaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_inclusive { '[' } else { '(' };
        let close = if self.upper_inclusive { ']' } else { ')' };
        write!(
            f,
            "lambda{} in {open}{:.6}, {:.6}{close}",
            self.component + 1,
            self.lower,
            self.upper
        )?;
        if self.empty {
            f.write_str("  EMPTY")?;
        }
        let p = &self.provenance;
        write!(f, "  [m = {:.6}, |K1| = {:.6}, beta = {:.6}", p.m_value, p.k1_norm, p.beta)?;
        if let (Some(mu1), Some(delta)) = (p.mu1, p.delta) {
            write!(f, ", mu1 = {mu1:.6}, delta = {delta}")?;
        }
        f.write_str("]")
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), RangeError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(RangeError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Ranges `(0, β_j/(m_j ‖K1‖)]` for `j ≠ i0` and `(μ₁/δ, β_{i0}/(m_{i0} ‖K1‖)]`.
///
/// `m_j = max_x f_j(x, β)` is taken over the closure points of `grid`.
pub fn system_ranges(
    nl: &Nonlinearity,
    beta: &[f64],
    i0: usize,
    delta: f64,
    k1_norm: f64,
    mu1: f64,
    grid: &Grid,
) -> Result<Vec<LambdaRange>, RangeError> {
    if i0 >= nl.n() {
        return Err(RangeError::Invalid(format!("i0 = {} exceeds n = {}", i0 + 1, nl.n())));
    }
    check_positive("delta", delta)?;
    check_positive("k1_norm", k1_norm)?;
    check_positive("mu1", mu1)?;
    (0..nl.n())
        .map(|j| {
            let m = max_over_domain(nl, j, beta, grid)?;
            if !(m > 0.0) {
                return Err(RangeError::ConditionCViolation { component: j + 1, m });
            }
            let upper = beta[j] / (m * k1_norm);
            let mut provenance = Provenance {
                m_value: m,
                k1_norm,
                beta: beta[j],
                mu1: None,
                delta: None,
            };
            let lower = if j == i0 {
                provenance.mu1 = Some(mu1);
                provenance.delta = Some(delta);
                mu1 / delta
            } else {
                0.0
            };
            Ok(LambdaRange::new(j, (lower, false), (upper, true), provenance))
        })
        .collect()
}

/// Result of [`single_range`]: the interval and the sampled ratio curve.
#[derive(Debug, Clone)]
pub struct SingleRange {
    pub range: LambdaRange,
    /// `(s, s/(M(s)‖K1‖))` at the log-uniform samples.
    pub curve: Vec<(f64, f64)>,
    /// Where the supremum was located.
    pub argmax: f64,
}

/// `[μ₁/δ, sup_{0<s≤ρ} s/(M(s)‖K1‖))` for a single equation.
///
/// The supremum is sampled on `grid_points` log-uniform points of
/// `[ρ·1e-8, ρ]`, then refined by golden-section search around the best
/// sample.
#[allow(clippy::too_many_arguments)]
pub fn single_range(
    nl: &Nonlinearity,
    rho: f64,
    delta: f64,
    k1_norm: f64,
    mu1: f64,
    grid_points: usize,
    grid: &Grid,
) -> Result<SingleRange, RangeError> {
    if nl.n() != 1 {
        return Err(RangeError::Invalid(format!("single equation expected, got n = {}", nl.n())));
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(RangeError::Invalid(format!(
            "grid_points = {grid_points} is below {MIN_GRID_POINTS}"
        )));
    }
    check_positive("rho", rho)?;
    check_positive("delta", delta)?;
    check_positive("k1_norm", k1_norm)?;
    check_positive("mu1", mu1)?;
    if rho > nl.rho()[0] {
        return Err(RangeError::Invalid(format!(
            "rho = {rho} exceeds the box bound {}",
            nl.rho()[0]
        )));
    }

    let ratio = |s: f64| -> Result<f64, RangeError> {
        let m = max_over_domain(nl, 0, &[s], grid)?;
        if !(m > 0.0) {
            return Err(RangeError::NonpositiveM { s, m });
        }
        Ok(s / (m * k1_norm))
    };

    let last = (grid_points - 1) as f64;
    let curve = (0..grid_points)
        .into_par_iter()
        .map(|k| {
            let s = if k + 1 == grid_points {
                rho
            } else {
                rho * SAMPLE_FLOOR.powf(1.0 - k as f64 / last)
            };
            Ok((s, ratio(s)?))
        })
        .collect::<Result<Vec<_>, RangeError>>()?;

    let best = (0..curve.len())
        .max_by(|&a, &b| curve[a].1.total_cmp(&curve[b].1))
        .expect("at least MIN_GRID_POINTS samples");
    let (mut argmax, mut sup) = curve[best];
    let lo = curve[best.saturating_sub(1)].0;
    let hi = curve[(best + 1).min(curve.len() - 1)].0;
    let (s, value) = golden_section_max(&ratio, lo, hi)?;
    if value > sup {
        argmax = s;
        sup = value;
    }

    let provenance = Provenance {
        m_value: max_over_domain(nl, 0, &[argmax], grid)?,
        k1_norm,
        beta: argmax,
        mu1: Some(mu1),
        delta: Some(delta),
    };
    Ok(SingleRange {
        range: LambdaRange::new(0, (mu1 / delta, true), (sup, false), provenance),
        curve,
        argmax,
    })
}

/// Maximises a unimodal `f` on `[a, b]`.
fn golden_section_max(
    f: &impl Fn(f64) -> Result<f64, RangeError>,
    mut a: f64,
    mut b: f64,
) -> Result<(f64, f64), RangeError> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.abs() {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// A growth constant validated by [`check_growth`].
#[derive(Debug, Clone)]
pub struct GrowthChoice {
    pub delta: f64,
    pub rho0: f64,
    pub report: CheckReport,
}

/// Tries `δ` from [`AUTO_DELTAS`] (largest first) against shrinking
/// `ρ0 = min ρ · 2⁻ᵏ` and returns the first pair that passes the growth check.
pub fn auto_delta(
    nl: &Nonlinearity,
    i0: usize,
    domain: &DomainSpec,
    samples: usize,
    seed: u64,
) -> Result<Option<GrowthChoice>, RangeError> {
    let min_box = nl.rho().iter().copied().fold(f64::INFINITY, f64::min);
    for delta in AUTO_DELTAS {
        for k in 1..=AUTO_HALVINGS {
            let rho0 = min_box * 2f64.powi(-k);
            let report = check_growth(nl, i0, delta, rho0, domain, samples, seed)?;
            if report.passed {
                return Ok(Some(GrowthChoice { delta, rho0, report }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    const RHO: f64 = 15.0 * PI / 64.0;
    const MU1_DISK: f64 = 5.783_185_962_946_784;

    fn disk() -> Grid {
        build_grid(DomainSpec::UnitDisk, 0.125).unwrap()
    }

    fn example() -> Nonlinearity {
        Nonlinearity::parse(
            &["sqrt(max(u1,u2)) + tan(max(u1,u2))", "max(u1,u2)^2"],
            vec![RHO, RHO],
        )
        .unwrap()
    }

    #[test]
    fn example_system_uppers() {
        let ranges = system_ranges(&example(), &[RHO, RHO], 0, 1.0, 0.25, MU1_DISK, &disk()).unwrap();
        assert_relative_eq!(ranges[0].upper, 1.669_229_499_672_039_2, epsilon = 1e-12);
        assert_relative_eq!(ranges[1].upper, 5.432_488_724_203_361_5, epsilon = 1e-12);
        assert!(ranges[0].empty);
        assert_relative_eq!(ranges[0].lower, MU1_DISK);
        assert!(!ranges[1].empty && ranges[1].lower == 0.0);

        let ranges = system_ranges(&example(), &[RHO, RHO], 0, 10.0, 0.25, MU1_DISK, &disk()).unwrap();
        assert!(!ranges[0].empty);
        assert!(ranges[0].contains(1.6) && !ranges[0].contains(0.5));
        assert!(ranges[1].contains(5.0));
    }

    #[test]
    fn upper_reproducible_from_provenance() {
        let ranges = system_ranges(&example(), &[RHO, 0.5], 1, 2.0, 0.25, MU1_DISK, &disk()).unwrap();
        for r in &ranges {
            let p = &r.provenance;
            assert_eq!(r.upper, p.beta / (p.m_value * p.k1_norm));
        }
        assert_eq!(ranges[1].provenance.delta, Some(2.0));
        assert_eq!(ranges[0].provenance.mu1, None);
    }

    #[test]
    fn linear_scalar_is_empty() {
        let nl = Nonlinearity::parse(&["s"], vec![1.0]).unwrap();
        let r = &system_ranges(&nl, &[0.5], 0, 1.0, 0.25, MU1_DISK, &disk()).unwrap()[0];
        assert_relative_eq!(r.upper, 4.0);
        assert!(r.empty);
        let doubled = &system_ranges(&nl, &[1.0], 0, 1.0, 0.25, MU1_DISK, &disk()).unwrap()[0];
        assert_eq!(doubled.upper, r.upper);
    }

    #[test]
    fn condition_c() {
        let nl = Nonlinearity::parse(&["u1", "u1 - 1"], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            system_ranges(&nl, &[0.5, 0.5], 0, 1.0, 0.25, MU1_DISK, &disk()),
            Err(RangeError::ConditionCViolation { component: 2, .. })
        ));
    }

    #[test]
    fn scalar_tan_sup() {
        let rho = FRAC_PI_2 - 1e-6;
        let nl = Nonlinearity::parse(&["sqrt(s) + tan(s)"], vec![rho]).unwrap();
        let single = single_range(&nl, rho, 1.0, 0.25, MU1_DISK, 2000, &disk()).unwrap();
        assert!((single.range.upper - 1.66924).abs() < 1e-3, "{}", single.range.upper);
        assert!(!single.range.upper_inclusive && single.range.lower_inclusive);
        let finer = single_range(&nl, rho, 1.0, 0.25, MU1_DISK, 4000, &disk()).unwrap();
        assert!((finer.range.upper - single.range.upper).abs() < 1e-6);
        assert_eq!(single.curve.len(), 2000);
        assert_relative_eq!(single.curve[0].0, rho * 1e-8, max_relative = 1e-12);
    }

    #[test]
    fn scalar_trivial_cases() {
        let grid = disk();
        let nl = Nonlinearity::parse(&["s"], vec![1.0]).unwrap();
        let r = single_range(&nl, 1.0, 1.0, 0.25, MU1_DISK, 200, &grid).unwrap();
        assert_relative_eq!(r.range.upper, 4.0, max_relative = 1e-14);

        let nl = Nonlinearity::parse(&["1"], vec![1.0]).unwrap();
        let r = single_range(&nl, 0.8, 1.0, 0.25, MU1_DISK, 200, &grid).unwrap();
        assert_relative_eq!(r.range.upper, 3.2, max_relative = 1e-14);
        assert_eq!(r.argmax, 0.8);

        let nl = Nonlinearity::parse(&["s - 0.5"], vec![1.0]).unwrap();
        assert!(matches!(
            single_range(&nl, 1.0, 1.0, 0.25, MU1_DISK, 200, &grid),
            Err(RangeError::NonpositiveM { .. })
        ));
        assert!(single_range(&nl, 1.0, 1.0, 0.25, MU1_DISK, 50, &grid).is_err());
    }

    #[test]
    fn auto_delta_prefers_large_constants() {
        let choice = auto_delta(&example(), 0, &DomainSpec::UnitDisk, 500, 1).unwrap().unwrap();
        assert_eq!(choice.delta, 1e4);
        assert!(choice.rho0 <= 1e-8);

        let nl = Nonlinearity::parse(&["s"], vec![1.0]).unwrap();
        let choice = auto_delta(&nl, 0, &DomainSpec::UnitDisk, 200, 1).unwrap().unwrap();
        assert_eq!(choice.delta, 1.0);
        assert_eq!(choice.rho0, 0.5);

        let nl = Nonlinearity::parse(&["s^2"], vec![1.0]).unwrap();
        assert!(auto_delta(&nl, 0, &DomainSpec::UnitDisk, 50, 1).unwrap().is_none());
    }

    #[test]
    fn csv_rows_have_full_precision() {
        let ranges = system_ranges(&example(), &[RHO, RHO], 0, 10.0, 0.25, MU1_DISK, &disk()).unwrap();
        let row = ranges[0].csv_row();
        assert_eq!(row.split(',').count(), LambdaRange::csv_header().split(',').count());
        let upper: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(upper, ranges[0].upper);
    }
}
