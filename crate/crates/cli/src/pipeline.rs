//! Grid → operator → spectrum → hypothesis checks → ranges → monotone solve.

use std::sync::Arc;

use conesolve_core::fixedpoint::SUBSOLUTION_HALVINGS;
use conesolve_core::ranges::AUTO_DELTAS;
use conesolve_core::{
    assemble, auto_delta, bracket_iterate, build_grid, certify, check_growth, check_monotone,
    check_supersolution, construct_subsolution, k_one_norm, monotone_iterate, single_range,
    spectral_radius, system_ranges, Certificate, CheckReport, DiscreteOperator, Direction,
    FixedPointError, GeometryError, GreensError, Grid, IterationReport, LambdaRange,
    Nonlinearity, NonlinearityError, OperatorError, ProblemInstance, RangeError, SingleRange,
    SpectralEstimate,
};
use thiserror::Error;

use crate::config::Config;

/// Power iteration tolerance on `‖Kφ − rφ‖∞`.
pub const SPECTRAL_TOL: f64 = 1e-10;
pub const SPECTRAL_MAX_ITER: usize = 10_000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error("hypothesis {condition} fails: {detail}")]
    Hypothesis { condition: String, detail: String },
    #[error("{0}")]
    Invalid(String),
}

impl PipelineError {
    fn hypothesis(condition: &str, detail: impl ToString) -> PipelineError {
        PipelineError::Hypothesis {
            condition: condition.to_string(),
            detail: detail.to_string(),
        }
    }
}

pub fn describe_domain(config: &Config) -> String {
    match config.domain {
        conesolve_core::DomainSpec::UnitDisk => "unit disk".into(),
        conesolve_core::DomainSpec::Rectangle {
            x_min,
            x_max,
            y_min,
            y_max,
        } => format!("[{x_min}, {x_max}] x [{y_min}, {y_max}]"),
    }
}

/// Discretisation and linear spectral data for one configuration.
pub struct Setup {
    pub config: Config,
    pub grid: Arc<Grid>,
    pub op: Arc<DiscreteOperator>,
    pub nl: Arc<Nonlinearity>,
    pub k1_numeric: f64,
    pub spectrum: SpectralEstimate,
}

impl Setup {
    pub fn new(config: Config) -> Result<Setup, PipelineError> {
        let nl = Arc::new(Nonlinearity::parse(&config.f, config.rho.clone())?);
        let grid = Arc::new(build_grid(config.domain, config.h)?);
        let op = assemble(grid.clone(), &config.coefficients, &config.bc)?.with_solver(config.solver);
        let op = Arc::new(op);
        let (_, k1_numeric) = k_one_norm(&op)?;
        let spectrum = spectral_radius(&op, SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
        Ok(Setup {
            config,
            grid,
            op,
            nl,
            k1_numeric,
            spectrum,
        })
    }

    /// `‖K(1)‖∞` used in range formulas: the configured value, else the computed one.
    pub fn k1_norm(&self) -> f64 {
        self.config.k1_norm.unwrap_or(self.k1_numeric)
    }

    pub fn mu1(&self) -> f64 {
        self.spectrum.mu1
    }
}

/// Growth constant and its check.
#[derive(Debug, Clone)]
pub struct Growth {
    pub delta: f64,
    pub rho0: f64,
    /// Whether `(δ, ρ0)` came from the automatic sweep.
    pub auto: bool,
    pub report: CheckReport,
}

#[derive(Debug, Clone)]
pub struct Hypotheses {
    pub monotone: Vec<CheckReport>,
    pub growth: Growth,
}

impl Hypotheses {
    /// The first failing condition, as `(label, detail)`.
    pub fn failure(&self) -> Option<(String, String)> {
        if let Some(r) = self.monotone.iter().find(|r| !r.passed) {
            return Some(("(a)".into(), r.to_string()));
        }
        if !self.growth.report.passed {
            let mut detail = self.growth.report.to_string();
            if self.growth.auto {
                detail.push_str(" (no delta in the automatic sweep passed)");
            }
            return Some(("(b)".into(), detail));
        }
        None
    }

    pub fn reports(&self) -> impl Iterator<Item = &CheckReport> {
        self.monotone.iter().chain(std::iter::once(&self.growth.report))
    }
}

/// Sampled checks of monotonicity (a) and growth (b).
pub fn check_hypotheses(setup: &Setup) -> Result<Hypotheses, PipelineError> {
    let c = &setup.config;
    let monotone = (0..setup.nl.n())
        .map(|i| check_monotone(&setup.nl, i, &c.domain, c.samples, c.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let growth = match (c.delta, c.rho0) {
        (Some(delta), Some(rho0)) => Growth {
            delta,
            rho0,
            auto: false,
            report: check_growth(&setup.nl, c.i0, delta, rho0, &c.domain, c.samples, c.seed)?,
        },
        _ => match auto_delta(&setup.nl, c.i0, &c.domain, c.samples, c.seed)? {
            Some(choice) => Growth {
                delta: choice.delta,
                rho0: choice.rho0,
                auto: true,
                report: choice.report,
            },
            None => {
                // report the weakest candidate that was tried
                let delta = AUTO_DELTAS[AUTO_DELTAS.len() - 1];
                let min_rho = c.rho.iter().copied().fold(f64::INFINITY, f64::min);
                let rho0 = min_rho * 2f64.powi(-conesolve_core::ranges::AUTO_HALVINGS);
                Growth {
                    delta,
                    rho0,
                    auto: true,
                    report: check_growth(&setup.nl, c.i0, delta, rho0, &c.domain, c.samples, c.seed)?,
                }
            }
        },
    };
    Ok(Hypotheses { monotone, growth })
}

/// Per-component ranges, with grid-sampled maxima of x-dependent
/// components inflated by the configured safety factor.
pub fn lambda_ranges(setup: &Setup, growth: &Growth) -> Result<Vec<LambdaRange>, PipelineError> {
    let c = &setup.config;
    let ranges = system_ranges(
        &setup.nl,
        &c.beta,
        c.i0,
        growth.delta,
        setup.k1_norm(),
        setup.mu1(),
        &setup.grid,
    )
    .map_err(|e| match e {
        RangeError::ConditionCViolation { .. } => PipelineError::hypothesis("(c)", e),
        other => other.into(),
    })?;
    Ok(ranges
        .into_iter()
        .map(|r| {
            if setup.nl.depends_on_position(r.component) {
                r.with_m_factor(c.m_safety)
            } else {
                r
            }
        })
        .collect())
}

/// The interval for a single equation.
pub fn scalar_range(setup: &Setup, growth: &Growth) -> Result<SingleRange, PipelineError> {
    let c = &setup.config;
    let mut single = single_range(
        &setup.nl,
        c.rho[0],
        growth.delta,
        setup.k1_norm(),
        setup.mu1(),
        c.grid_points,
        &setup.grid,
    )?;
    if setup.nl.depends_on_position(0) {
        single.range = single.range.with_m_factor(c.m_safety);
    }
    Ok(single)
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub supersolution_margin: f64,
    pub upper: IterationReport,
    /// Present when a subsolution was found.
    pub lower: Option<IterationReport>,
    pub subsolution_epsilon: Option<f64>,
    /// `max_k max(α_k − β_k)` when bracketing ran.
    pub max_crossing: Option<f64>,
    pub certificate: Certificate,
}

/// Monotone iteration from the constant supersolution `β`, bracketed from
/// below by `εφ` when such a subsolution exists.
pub fn solve(setup: &Setup, growth: &Growth, lambdas: &[f64]) -> Result<SolveOutcome, PipelineError> {
    let c = &setup.config;
    let p = ProblemInstance::new(setup.op.clone(), setup.nl.clone(), lambdas.to_vec())?;
    let beta = p.constant(&c.beta);
    let (holds, margin) = check_supersolution(&p, &beta)?;
    if !holds {
        return Err(PipelineError::hypothesis(
            "supersolution",
            format!("T(beta) <= beta fails by {:.3e}", -margin),
        ));
    }
    let sub = construct_subsolution(&p, &setup.spectrum, c.i0, growth.rho0)?;
    if sub.is_none() {
        log::info!(
            "no subsolution eps*phi with eps in [rho0 * 2^-{SUBSOLUTION_HALVINGS}, rho0]; iterating from above only"
        );
    }
    let broken = |e: FixedPointError| match e {
        FixedPointError::MonotonicityViolation { .. } => PipelineError::hypothesis("(a)", e),
        other => other.into(),
    };
    let (upper, lower, epsilon, crossing) = match sub {
        Some(sub) => {
            let report = bracket_iterate(&p, sub.alpha, beta, c.tol, c.max_iter).map_err(broken)?;
            (report.upper, Some(report.lower), Some(sub.epsilon), Some(report.max_crossing))
        }
        None => {
            let upper = monotone_iterate(&p, beta, Direction::FromAbove, c.tol, c.max_iter)
                .map_err(broken)?;
            (upper, None, None, None)
        }
    };
    let certificate = certify(&p, &upper.solution, c.tol);
    Ok(SolveOutcome {
        supersolution_margin: margin,
        upper,
        lower,
        subsolution_epsilon: epsilon,
        max_crossing: crossing,
        certificate,
    })
}
