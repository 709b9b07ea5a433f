//! Flat `key = value` configuration files.
//!
//! Numbers may be constant expressions (`15*pi/64`), expressions may be
//! quoted, and per-component values use indexed keys (`f1`, `rho2`, …) or a
//! single unindexed key shared by every component.

use std::collections::BTreeMap;
use std::path::Path;

use conesolve_core::{
    BoundarySpec, Coefficient, DomainSpec, EllipticCoefficients, Expr, ParseError, SolverKind,
    VarSet,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("line {line}: '{key}': {source}")]
    Expr {
        line: usize,
        key: String,
        source: ParseError,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// A validated problem description.
#[derive(Debug, Clone)]
pub struct Config {
    pub domain: DomainSpec,
    pub h: f64,
    pub bc: BoundarySpec,
    pub coefficients: EllipticCoefficients,
    pub f: Vec<String>,
    pub rho: Vec<f64>,
    /// Supersolution levels, `rho` when absent.
    pub beta: Vec<f64>,
    pub lambdas: Option<Vec<f64>>,
    /// Zero-based growth component.
    pub i0: usize,
    pub delta: Option<f64>,
    pub rho0: Option<f64>,
    /// Replaces the computed `‖K(1)‖∞` in range formulas.
    pub k1_norm: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub samples: usize,
    pub grid_points: usize,
    /// Inflation of grid-sampled maxima of x-dependent nonlinearities.
    pub m_safety: f64,
    pub solver: SolverKind,
}

impl Config {
    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }
}

const SCALAR_KEYS: &[&str] = &[
    "domain", "x_min", "x_max", "y_min", "y_max", "h", "bc", "robin_b", "a11", "a12", "a22", "b1",
    "b2", "c", "n", "i0", "delta", "rho0", "k1_norm", "tol", "max_iter", "seed", "samples",
    "grid_points", "m_safety", "solver",
];
/// Keys taking either one shared value or an index `1..=n`.
const LIST_KEYS: &[&str] = &["f", "rho", "beta", "lambda"];

struct Entry {
    line: usize,
    value: String,
}

/// Raw entries keyed by `(name, index)`.
struct Entries(BTreeMap<(String, Option<usize>), Entry>);

impl Entries {
    fn parse(text: &str) -> Result<Entries, ConfigError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected 'key = value', found '{content}'"),
                });
            };
            let key = key.trim();
            let value = unquote(value.trim(), line)?;
            let (name, index) = match split_index(key) {
                (base, Some(i)) if i >= 1 && LIST_KEYS.contains(&base) => (base, Some(i)),
                _ => (key, None),
            };
            let known = match index {
                None => SCALAR_KEYS.contains(&name) || LIST_KEYS.contains(&name),
                Some(_) => true,
            };
            if !known {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            let slot = (name.to_string(), index);
            if map.insert(slot, Entry { line, value }).is_some() {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Entries(map))
    }

    fn get(&self, name: &str) -> Option<&Entry> {
        self.0.get(&(name.to_string(), None))
    }

    fn number(&self, name: &str) -> Result<Option<f64>, ConfigError> {
        self.get(name).map(|e| constant(name, e)).transpose()
    }

    fn integer(&self, name: &str) -> Result<Option<u64>, ConfigError> {
        self.get(name)
            .map(|e| {
                e.value.parse::<u64>().map_err(|_| ConfigError::Syntax {
                    line: e.line,
                    message: format!("'{name}' must be a non-negative integer, got '{}'", e.value),
                })
            })
            .transpose()
    }

    fn word(&self, name: &str) -> Option<(usize, String)> {
        self.get(name).map(|e| (e.line, e.value.to_ascii_lowercase()))
    }

    /// Indexed values `name1..name_n`, or one shared `name` value.
    fn list(&self, name: &str, n: usize) -> Result<Option<Vec<&Entry>>, ConfigError> {
        let indexed: Vec<(usize, &Entry)> = self
            .0
            .iter()
            .filter_map(|((k, i), e)| (k == name).then_some((*i, e)))
            .filter_map(|(i, e)| i.map(|i| (i, e)))
            .collect();
        if let Some(shared) = self.get(name) {
            if let Some((_, e)) = indexed.first() {
                return Err(ConfigError::Syntax {
                    line: e.line,
                    message: format!("'{name}' is given both shared and indexed"),
                });
            }
            return Ok(Some(vec![shared; n]));
        }
        if indexed.is_empty() {
            return Ok(None);
        }
        if let Some((i, e)) = indexed.iter().find(|(i, _)| *i > n) {
            return Err(ConfigError::Syntax {
                line: e.line,
                message: format!("'{name}{i}' exceeds n = {n}"),
            });
        }
        if indexed.len() != n {
            let missing = (1..=n).find(|i| !indexed.iter().any(|(j, _)| j == i)).unwrap_or(n);
            return Err(ConfigError::Missing(format!("{name}{missing}")));
        }
        Ok(Some(indexed.into_iter().map(|(_, e)| e).collect()))
    }

    fn numbers(&self, name: &str, n: usize) -> Result<Option<Vec<f64>>, ConfigError> {
        self.list(name, n)?
            .map(|entries| entries.into_iter().map(|e| constant(name, e)).collect())
            .transpose()
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (k, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..k],
            _ => {}
        }
    }
    line
}

fn unquote(value: &str, line: usize) -> Result<String, ConfigError> {
    match value.strip_prefix('"') {
        Some(rest) => match rest.strip_suffix('"') {
            Some(inner) if !inner.contains('"') => Ok(inner.to_string()),
            _ => Err(ConfigError::Syntax {
                line,
                message: format!("unterminated or nested quotes in {value}"),
            }),
        },
        None if value.is_empty() => Err(ConfigError::Syntax {
            line,
            message: "empty value".into(),
        }),
        None => Ok(value.to_string()),
    }
}

fn split_index(key: &str) -> (&str, Option<usize>) {
    let digits = key.len() - key.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits == key.len() {
        return (key, None);
    }
    let (name, index) = key.split_at(key.len() - digits);
    (name, index.parse().ok())
}

/// Parses a constant expression such as `1/32` or `15*pi/64`.
pub fn parse_constant(src: &str) -> Result<f64, String> {
    let no_vars = VarSet::from_names([]).expect("empty set");
    let expr = Expr::parse(src, &no_vars).map_err(|e| e.to_string())?;
    expr.eval(&std::collections::HashMap::<String, f64>::new())
        .map_err(|e| e.to_string())
}

/// Evaluates a constant expression such as `15*pi/64`.
fn constant(key: &str, e: &Entry) -> Result<f64, ConfigError> {
    let no_vars = VarSet::from_names([]).expect("empty set");
    let expr = Expr::parse(&e.value, &no_vars).map_err(|source| ConfigError::Expr {
        line: e.line,
        key: key.to_string(),
        source,
    })?;
    expr.eval(&std::collections::HashMap::<String, f64>::new())
        .map_err(|err| ConfigError::Syntax {
            line: e.line,
            message: format!("'{key}': {err}"),
        })
}

fn coefficient(entries: &Entries, key: &str, default: f64) -> Result<Coefficient, ConfigError> {
    match entries.get(key) {
        None => Ok(Coefficient::Const(default)),
        Some(e) => Coefficient::parse(&e.value).map_err(|source| ConfigError::Expr {
            line: e.line,
            key: key.to_string(),
            source,
        }),
    }
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| ConfigError::Missing(key.to_string()))
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::Invalid(format!("'{key}' must be positive, got {v}")))
    }
}

impl std::str::FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Config, ConfigError> {
        let entries = Entries::parse(text)?;

        let domain = match entries.word("domain") {
            None => return Err(ConfigError::Missing("domain".into())),
            Some((_, d)) if d == "disk" => DomainSpec::UnitDisk,
            Some((_, d)) if d == "square" => DomainSpec::unit_square(),
            Some((_, d)) if d == "rectangle" => DomainSpec::Rectangle {
                x_min: require(entries.number("x_min")?, "x_min")?,
                x_max: require(entries.number("x_max")?, "x_max")?,
                y_min: require(entries.number("y_min")?, "y_min")?,
                y_max: require(entries.number("y_max")?, "y_max")?,
            },
            Some((line, other)) => {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("domain must be disk, square or rectangle, got '{other}'"),
                })
            }
        };
        domain
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let h = positive("h", require(entries.number("h")?, "h")?)?;

        let bc = match entries.word("bc") {
            None => BoundarySpec::Dirichlet,
            Some((_, b)) if b == "dirichlet" => BoundarySpec::Dirichlet,
            Some((_, b)) if b == "neumann" => BoundarySpec::Neumann,
            Some((_, b)) if b == "robin" => {
                BoundarySpec::Robin(coefficient(&entries, "robin_b", 1.0)?)
            }
            Some((line, other)) => {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("bc must be dirichlet, neumann or robin, got '{other}'"),
                })
            }
        };
        if entries.get("robin_b").is_some() && !matches!(bc, BoundarySpec::Robin(_)) {
            return Err(ConfigError::Invalid("robin_b given without bc = robin".into()));
        }
        let coefficients = EllipticCoefficients {
            a11: coefficient(&entries, "a11", 1.0)?,
            a12: coefficient(&entries, "a12", 0.0)?,
            a22: coefficient(&entries, "a22", 1.0)?,
            b1: coefficient(&entries, "b1", 0.0)?,
            b2: coefficient(&entries, "b2", 0.0)?,
            c: coefficient(&entries, "c", 0.0)?,
        };

        let n = require(entries.integer("n")?, "n")? as usize;
        if n == 0 {
            return Err(ConfigError::Invalid("n must be at least 1".into()));
        }
        let f = require(entries.list("f", n)?, "f1")?
            .into_iter()
            .map(|e| e.value.clone())
            .collect();
        let rho = require(entries.numbers("rho", n)?, "rho")?;
        for &r in &rho {
            positive("rho", r)?;
        }
        let beta = entries.numbers("beta", n)?.unwrap_or_else(|| rho.clone());
        for (j, (&b, &r)) in beta.iter().zip(&rho).enumerate() {
            if !(b > 0.0 && b <= r) {
                return Err(ConfigError::Invalid(format!(
                    "beta{} = {b} must lie in (0, rho{} = {r}]",
                    j + 1,
                    j + 1
                )));
            }
        }
        let lambdas = entries.numbers("lambda", n)?;
        if let Some(ls) = &lambdas {
            for &l in ls {
                positive("lambda", l)?;
            }
        }
        let i0 = entries.integer("i0")?.unwrap_or(1) as usize;
        if !(1..=n).contains(&i0) {
            return Err(ConfigError::Invalid(format!("i0 = {i0} must lie in 1..={n}")));
        }
        let delta = entries.number("delta")?.map(|d| positive("delta", d)).transpose()?;
        let rho0 = entries.number("rho0")?.map(|r| positive("rho0", r)).transpose()?;
        let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
        if let Some(r0) = rho0 {
            if r0 >= min_rho {
                return Err(ConfigError::Invalid(format!(
                    "rho0 = {r0} must be below min rho = {min_rho}"
                )));
            }
        }
        if rho0.is_some() != delta.is_some() {
            return Err(ConfigError::Invalid(
                "delta and rho0 go together; give both or neither".into(),
            ));
        }
        let k1_norm = entries.number("k1_norm")?.map(|k| positive("k1_norm", k)).transpose()?;

        let tol = positive("tol", entries.number("tol")?.unwrap_or(1e-9))?;
        let max_iter = entries.integer("max_iter")?.unwrap_or(10_000) as usize;
        let seed = entries.integer("seed")?.unwrap_or(0);
        let samples = entries.integer("samples")?.unwrap_or(10_000) as usize;
        let grid_points = entries.integer("grid_points")?.unwrap_or(2000) as usize;
        let m_safety = entries.number("m_safety")?.unwrap_or(1.01);
        if !(m_safety >= 1.0 && m_safety.is_finite()) {
            return Err(ConfigError::Invalid(format!("m_safety must be >= 1, got {m_safety}")));
        }
        let solver = match entries.word("solver") {
            None => SolverKind::Auto,
            Some((_, s)) if s == "auto" => SolverKind::Auto,
            Some((_, s)) if s == "direct" => SolverKind::Direct,
            Some((_, s)) if s == "iterative" => SolverKind::Iterative,
            Some((line, other)) => {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("solver must be auto, direct or iterative, got '{other}'"),
                })
            }
        };

        Ok(Config {
            domain,
            h,
            bc,
            coefficients,
            f,
            rho,
            beta,
            lambdas,
            i0: i0 - 1,
            delta,
            rho0,
            k1_norm,
            tol,
            max_iter,
            seed,
            samples,
            grid_points,
            m_safety,
            solver,
        })
    }
}

/// Built-in two-equation example.
pub const SYSTEM_DISK: &str = include_str!("../examples/system_disk.cfg");
/// Built-in single-equation example.
pub const SCALAR_DISK: &str = include_str!("../examples/scalar_disk.cfg");
