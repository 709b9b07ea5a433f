//! Subcommand bodies. Each returns its stdout text and exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use conesolve_core::{e_positivity_probe, LambdaRange, Outcome, VectorGridFunction};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::pipeline::{
    check_hypotheses, describe_domain, lambda_ranges, scalar_range, solve, Hypotheses,
    PipelineError, Setup,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 1;
pub const EXIT_TRIVIAL: i32 = 2;
pub const EXIT_EMPTY_RANGE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) | CliError::Io { .. } => EXIT_IO,
            CliError::Config(_) => EXIT_DATA,
            CliError::Pipeline(PipelineError::Hypothesis { .. }) => EXIT_HYPOTHESIS,
            CliError::Pipeline(_) => EXIT_SOFTWARE,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, mut config: Config) -> Result<Config, CliError> {
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Usage(format!("--h must be positive, got {h}")));
            }
            config.h = h;
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
            }
            config.tol = tol;
        }
        if let Some(m) = self.max_iter {
            config.max_iter = m;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    /// Print tables as CSV instead of text.
    pub csv: bool,
    /// Directory receiving CSV artifacts.
    pub out: Option<PathBuf>,
}

impl OutputOptions {
    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let Some(dir) = &self.out else {
            return Ok(());
        };
        let io = |path: &Path, source| CliError::Io {
            path: path.display().to_string(),
            source,
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| io(&path, e))
    }
}

/// Lossless decimal form used in every CSV.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn solution_csv(u: &VectorGridFunction) -> String {
    let mut s = String::from("x1,x2");
    for i in 1..=u.n() {
        let _ = write!(s, ",u{i}");
    }
    s.push('\n');
    for (k, node) in u.grid().interior_nodes().enumerate() {
        let _ = write!(s, "{},{}", csv_float(node.x[0]), csv_float(node.x[1]));
        for c in u.components() {
            let _ = write!(s, ",{}", csv_float(c.values()[k]));
        }
        s.push('\n');
    }
    s
}

fn checks_csv(h: &Hypotheses) -> String {
    let mut s = String::from("condition,status,witness\n");
    for r in h.reports() {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn ranges_csv(ranges: &[LambdaRange]) -> String {
    let mut s = format!("{}\n", LambdaRange::csv_header());
    for r in ranges {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn setup_summary(out: &mut String, setup: &Setup) {
    let c = &setup.config;
    let d = setup.op.diagnostics();
    let _ = writeln!(
        out,
        "grid: {}, h = {}, {} unknowns, M-matrix: {}",
        describe_domain(c),
        c.h,
        setup.op.dim(),
        if d.is_m_matrix { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "|K(1)| = {:.6}{}, mu1 = {:.6} ({} power steps)",
        setup.k1_numeric,
        c.k1_norm
            .map(|k| format!(" (ranges use {k})"))
            .unwrap_or_default(),
        setup.mu1(),
        setup.spectrum.iterations
    );
}

fn hypotheses_summary(out: &mut String, h: &Hypotheses) {
    for r in h.reports() {
        let _ = writeln!(out, "{r}");
    }
    if h.growth.auto && h.growth.report.passed {
        let _ = writeln!(
            out,
            "    delta = {} and rho0 = {:.3e} chosen by the automatic sweep",
            h.growth.delta, h.growth.rho0
        );
    }
}

fn load(config: &Path, overrides: &Overrides) -> Result<Setup, CliError> {
    let config = overrides.apply(Config::from_file(config)?)?;
    Ok(Setup::new(config)?)
}

/// Output and exit code when a sampled hypothesis fails.
fn hypothesis_failure(h: &Hypotheses, mut out: String, csv: bool) -> Option<(String, i32)> {
    let (condition, _) = h.failure()?;
    if csv {
        return Some((checks_csv(h), EXIT_HYPOTHESIS));
    }
    let _ = writeln!(out, "hypothesis {condition} fails; see the witness above");
    Some((out, EXIT_HYPOTHESIS))
}

pub fn cmd_solve(
    config: &Path,
    overrides: &Overrides,
    output: &OutputOptions,
) -> Result<(String, i32), CliError> {
    let setup = load(config, overrides)?;
    let Some(lambdas) = setup.config.lambdas.clone() else {
        return Err(ConfigError::Missing("lambda".into()).into());
    };
    let mut out = String::new();
    setup_summary(&mut out, &setup);
    let hyp = check_hypotheses(&setup)?;
    hypotheses_summary(&mut out, &hyp);
    output.write("checks.csv", &checks_csv(&hyp))?;
    if let Some(failed) = hypothesis_failure(&hyp, out.clone(), output.csv) {
        return Ok(failed);
    }

    let ranges = lambda_ranges(&setup, &hyp.growth)?;
    let _ = writeln!(out, "(c) m_j > 0 for j != i0: pass");
    for (r, &l) in ranges.iter().zip(&lambdas) {
        let verdict = if r.contains(l) { "inside" } else { "OUTSIDE" };
        let _ = writeln!(out, "{r}  -> lambda{} = {l} {verdict}", r.component + 1);
        if !r.contains(l) {
            log::warn!(
                "lambda{} = {l} lies outside the sufficient range; existence is not guaranteed",
                r.component + 1
            );
        }
    }
    output.write("ranges.csv", &ranges_csv(&ranges))?;

    let outcome = solve(&setup, &hyp.growth, &lambdas)?;
    let _ = writeln!(out, "supersolution: margin {:.6e}", outcome.supersolution_margin);
    match outcome.subsolution_epsilon {
        Some(eps) => {
            let _ = writeln!(out, "subsolution: eps = {eps:.6e} times the eigenfunction");
        }
        None => {
            let _ = writeln!(out, "subsolution: none found, iterating from above only");
        }
    }
    let mut history = String::from("direction,iteration,norm\n");
    for report in std::iter::once(&outcome.upper).chain(outcome.lower.as_ref()) {
        let _ = writeln!(
            out,
            "iteration {}: {} steps, residual {:.6e}, norm {:.6e}",
            report.direction,
            report.iterations,
            report.residual,
            report.solution.norm()
        );
        let tag = match report.direction {
            conesolve_core::Direction::FromAbove => "from_above",
            conesolve_core::Direction::FromBelow => "from_below",
        };
        for (k, norm) in report.history.iter().enumerate() {
            let _ = writeln!(history, "{tag},{k},{}", csv_float(*norm));
        }
    }
    if let Some(crossing) = outcome.max_crossing {
        let _ = writeln!(out, "bracket: max(alpha_k - beta_k) = {crossing:.3e}");
    }
    let _ = writeln!(out, "{}", outcome.certificate);
    output.write("iteration.csv", &history)?;
    output.write("certificate.txt", &format!("{}\n", outcome.certificate))?;
    let solution = solution_csv(&outcome.upper.solution);
    output.write("solution.csv", &solution)?;

    let code = match outcome.certificate.outcome() {
        Outcome::NonzeroPositive => EXIT_OK,
        Outcome::Trivial => {
            let _ = writeln!(out, "no nonzero solution found in bracket");
            EXIT_TRIVIAL
        }
        Outcome::NotCertified => EXIT_HYPOTHESIS,
    };
    Ok((if output.csv { solution } else { out }, code))
}

pub fn cmd_lambda_range(
    config: &Path,
    overrides: &Overrides,
    output: &OutputOptions,
) -> Result<(String, i32), CliError> {
    let setup = load(config, overrides)?;
    let mut out = String::new();
    setup_summary(&mut out, &setup);
    let hyp = check_hypotheses(&setup)?;
    hypotheses_summary(&mut out, &hyp);
    output.write("checks.csv", &checks_csv(&hyp))?;
    if let Some(failed) = hypothesis_failure(&hyp, out.clone(), output.csv) {
        return Ok(failed);
    }

    let ranges = if setup.nl.n() == 1 {
        let single = scalar_range(&setup, &hyp.growth)?;
        let mut curve = String::from("s,ratio\n");
        for (s, r) in &single.curve {
            let _ = writeln!(curve, "{},{}", csv_float(*s), csv_float(*r));
        }
        output.write("curve.csv", &curve)?;
        let _ = writeln!(out, "sup of s/(M(s)|K1|) at s = {:.6}", single.argmax);
        vec![single.range]
    } else {
        lambda_ranges(&setup, &hyp.growth)?
    };
    for r in &ranges {
        let _ = writeln!(out, "{r}");
    }
    let table = ranges_csv(&ranges);
    output.write("ranges.csv", &table)?;
    let code = if ranges.iter().any(|r| r.empty) {
        EXIT_EMPTY_RANGE
    } else {
        EXIT_OK
    };
    Ok((if output.csv { table } else { out }, code))
}

pub fn cmd_spectrum(
    config: &Path,
    overrides: &Overrides,
    output: &OutputOptions,
) -> Result<(String, i32), CliError> {
    let setup = load(config, overrides)?;
    let phi = &setup.spectrum.eigenfunction;
    let (alpha, beta) = e_positivity_probe(&setup.op, phi).map_err(PipelineError::from)?;
    let rows = [
        ("unknowns", setup.op.dim() as f64),
        ("m_matrix", f64::from(u8::from(setup.op.diagnostics().is_m_matrix))),
        ("k1_norm", setup.k1_numeric),
        ("spectral_radius", setup.spectrum.r),
        ("mu1", setup.mu1()),
        ("power_iterations", setup.spectrum.iterations as f64),
        ("eigen_residual", setup.spectrum.residual),
        ("probe_alpha", alpha),
        ("probe_beta", beta),
    ];
    let mut table = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(table, "{k},{}", csv_float(v));
    }
    output.write("spectrum.csv", &table)?;
    output.write("eigenfunction.csv", &solution_csv(&VectorGridFunction::new(vec![phi.clone()]).map_err(PipelineError::from)?))?;
    let mut out = String::new();
    setup_summary(&mut out, &setup);
    let _ = writeln!(
        out,
        "r(K) = {:.10}, eigen-residual {:.3e}",
        setup.spectrum.r, setup.spectrum.residual
    );
    let _ = writeln!(out, "e-positivity of phi: {alpha:.6e} e <= K phi <= {beta:.6e} e");
    Ok((if output.csv { table } else { out }, EXIT_OK))
}
