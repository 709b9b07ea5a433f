//! Positive solutions of discretised semilinear elliptic systems
//! `L u_i = λ_i f_i(x, u)`, `B u_i = 0`, via the fixed-point form `u = T u`.

pub mod expr;
pub mod fixedpoint;
pub mod geometry;
pub mod greens;
pub mod nonlinearity;
pub mod operator;
pub mod ranges;
pub mod sparse;

pub use expr::{EvalError, Expr, ParseError, Var, VarSet};
pub use fixedpoint::{
    apply_t, bracket_iterate, certify, check_supersolution, construct_subsolution,
    monotone_iterate, BracketReport, Certificate, Direction, FixedPointError, IterationReport,
    Outcome, ProblemInstance, Subsolution,
};
pub use geometry::{build_grid, DomainSpec, GeometryError, Grid};
pub use greens::{
    apply_k, e_positivity_probe, k_one_norm, spectral_radius, GreensError, GridFunction,
    SpectralEstimate,
};
pub use nonlinearity::{
    check_growth, check_monotone, max_over_domain, nemytskii_apply, CheckReport, Nonlinearity,
    NonlinearityError, VectorGridFunction, Witness,
};
pub use operator::{
    assemble, BoundarySpec, Coefficient, DiscreteOperator, EllipticCoefficients, OperatorError,
    SolverKind,
};
pub use ranges::{
    auto_delta, single_range, system_ranges, GrowthChoice, LambdaRange, RangeError, SingleRange,
};
pub use sparse::LinearSolveError;
