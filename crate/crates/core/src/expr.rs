//! Arithmetic expressions for nonlinearities and PDE coefficients.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4` and `2^3^2` is `512`. Variable and function names come from
//! closed sets and are resolved while parsing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Half-width of the excluded window around the poles of `tan`.
pub const TAN_POLE_GUARD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at column {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown variable '{name}' at column {position}")]
    UnknownVariable { name: String, position: usize },
    #[error("unknown function '{name}' at column {position}")]
    UnknownFunction { name: String, position: usize },
    #[error("function '{function}' at column {position} takes {expected} argument(s), got {found}")]
    Arity {
        function: &'static str,
        expected: &'static str,
        found: usize,
        position: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error in '{function}' at argument {argument}")]
    Domain {
        function: &'static str,
        argument: f64,
    },
    #[error("no value bound for variable '{name}'")]
    MissingBinding { name: String },
}

/// A resolved variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X1,
    X2,
    /// `u1`, `u2`, ... stored zero-based.
    U(usize),
    /// Scalar unknown of a single equation; an alias of `u1`.
    S,
}

impl Var {
    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "s" => Some(Var::S),
            _ => {
                let digits = name.strip_prefix('u')?;
                if digits.is_empty() || digits.starts_with('0') {
                    return None;
                }
                digits.parse::<usize>().ok().map(|k| Var::U(k - 1))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Var::X1 => "x1".into(),
            Var::X2 => "x2".into(),
            Var::U(k) => format!("u{}", k + 1),
            Var::S => "s".into(),
        }
    }

    pub fn is_spatial(&self) -> bool {
        matches!(self, Var::X1 | Var::X2)
    }
}

/// The variables an expression may mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSet(BTreeSet<Var>);

impl VarSet {
    pub fn from_names<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Option<VarSet> {
        names
            .into_iter()
            .map(Var::from_name)
            .collect::<Option<BTreeSet<_>>>()
            .map(VarSet)
    }

    /// `x1, x2, u1..un`, plus `s` when `n == 1`.
    pub fn system(n: usize) -> VarSet {
        let mut set: BTreeSet<Var> = [Var::X1, Var::X2].into_iter().collect();
        set.extend((0..n).map(Var::U));
        if n == 1 {
            set.insert(Var::S);
        }
        VarSet(set)
    }

    /// Coefficient functions depend on position only.
    pub fn spatial() -> VarSet {
        VarSet([Var::X1, Var::X2].into_iter().collect())
    }

    pub fn contains(&self, var: Var) -> bool {
        self.0.contains(&var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Tan,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Min,
    Max,
    Pow,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sqrt,
        Func::Tan,
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Min,
        Func::Max,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Tan => "tan",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn arity_ok(self, n: usize) -> Result<(), &'static str> {
        match self {
            Func::Min | Func::Max if n >= 2 => Ok(()),
            Func::Min | Func::Max => Err("at least 2"),
            Func::Pow if n == 2 => Ok(()),
            Func::Pow => Err("2"),
            _ if n == 1 => Ok(()),
            _ => Err("1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Source of variable values during evaluation.
pub trait Bindings {
    fn lookup(&self, var: Var) -> Option<f64>;
}

impl Bindings for HashMap<String, f64> {
    fn lookup(&self, var: Var) -> Option<f64> {
        self.get(&var.name()).copied()
    }
}

impl Bindings for HashMap<&str, f64> {
    fn lookup(&self, var: Var) -> Option<f64> {
        self.get(var.name().as_str()).copied()
    }
}

/// A point `x` together with the unknowns `u` at that point.
#[derive(Debug, Clone, Copy)]
pub struct PointBindings<'a> {
    pub x: [f64; 2],
    pub u: &'a [f64],
}

impl Bindings for PointBindings<'_> {
    fn lookup(&self, var: Var) -> Option<f64> {
        match var {
            Var::X1 => Some(self.x[0]),
            Var::X2 => Some(self.x[1]),
            Var::U(k) => self.u.get(k).copied(),
            Var::S => self.u.first().copied(),
        }
    }
}

impl Expr {
    pub fn parse(source: &str, allowed: &VarSet) -> Result<Expr, ParseError> {
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            allowed,
            end: source.chars().count() + 1,
        };
        if parser.tokens.is_empty() {
            return Err(ParseError::Syntax {
                position: 1,
                message: "empty expression".into(),
            });
        }
        let expr = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ParseError::Syntax {
                position: tok.position,
                message: format!("unexpected {}", tok.kind),
            });
        }
        Ok(expr)
    }

    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, EvalError> {
        match self {
            Expr::Constant(c) => Ok(*c),
            Expr::Var(v) => bindings
                .lookup(*v)
                .ok_or_else(|| EvalError::MissingBinding { name: v.name() }),
            Expr::Unary(UnaryOp::Neg, e) => Ok(-e.eval(bindings)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval(bindings)?;
                let b = r.eval(bindings)?;
                let value = match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::Domain {
                                function: "/",
                                argument: b,
                            });
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        return finite("^", a, a.powf(b));
                    }
                };
                finite(op.symbol(), b, value)
            }
            Expr::Call(f, args) => {
                let x = args[0].eval(bindings)?;
                match f {
                    Func::Sqrt if x < 0.0 => Err(EvalError::Domain {
                        function: "sqrt",
                        argument: x,
                    }),
                    Func::Sqrt => Ok(x.sqrt()),
                    Func::Log if x <= 0.0 => Err(EvalError::Domain {
                        function: "log",
                        argument: x,
                    }),
                    Func::Log => finite("log", x, x.ln()),
                    Func::Tan => {
                        let k = ((x - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).round();
                        let pole = std::f64::consts::FRAC_PI_2 + k * std::f64::consts::PI;
                        if (x - pole).abs() < TAN_POLE_GUARD || !x.is_finite() {
                            return Err(EvalError::Domain {
                                function: "tan",
                                argument: x,
                            });
                        }
                        Ok(x.tan())
                    }
                    Func::Sin => finite("sin", x, x.sin()),
                    Func::Cos => finite("cos", x, x.cos()),
                    Func::Exp => finite("exp", x, x.exp()),
                    Func::Abs => Ok(x.abs()),
                    Func::Pow => {
                        let y = args[1].eval(bindings)?;
                        finite("pow", x, x.powf(y))
                    }
                    Func::Min | Func::Max => {
                        let mut acc = x;
                        for a in &args[1..] {
                            let v = a.eval(bindings)?;
                            acc = if *f == Func::Min { acc.min(v) } else { acc.max(v) };
                        }
                        Ok(acc)
                    }
                }
            }
        }
    }

    /// Variables appearing in the expression.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn depends_on_position(&self) -> bool {
        self.variables().iter().any(Var::is_spatial)
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

fn finite(function: &'static str, argument: f64, value: f64) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::Domain { function, argument })
    }
}

/// Fully parenthesised; parsing the output yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Constant(c) => write!(f, "{c:?}"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Unary(UnaryOp::Neg, e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(n) => write!(f, "number {n}"),
            TokenKind::Ident(s) => write!(f, "name '{s}'"),
            TokenKind::Op(c) => write!(f, "'{c}'"),
            TokenKind::LParen => write!(f, "'('"),
            TokenKind::RParen => write!(f, "')'"),
            TokenKind::Comma => write!(f, "','"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    /// 1-based column of the first character.
    position: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let position = k + 1;
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => {
                k += 1;
                TokenKind::Op(c)
            }
            '(' => {
                k += 1;
                TokenKind::LParen
            }
            ')' => {
                k += 1;
                TokenKind::RParen
            }
            ',' => {
                k += 1;
                TokenKind::Comma
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                    k += 1;
                }
                if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                    let mut m = k + 1;
                    if m < chars.len() && (chars[m] == '+' || chars[m] == '-') {
                        m += 1;
                    }
                    if m < chars.len() && chars[m].is_ascii_digit() {
                        while m < chars.len() && chars[m].is_ascii_digit() {
                            m += 1;
                        }
                        k = m;
                    }
                }
                let text: String = chars[start..k].iter().collect();
                let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    position,
                    message: format!("malformed number '{text}'"),
                })?;
                TokenKind::Number(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                    k += 1;
                }
                TokenKind::Ident(chars[start..k].iter().collect())
            }
            other => {
                return Err(ParseError::Syntax {
                    position,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        tokens.push(Token { kind, position });
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    allowed: &'a VarSet,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, want: TokenKind) -> Result<(), ParseError> {
        match self.next() {
            Some(tok) if tok.kind == want => Ok(()),
            Some(tok) => Err(ParseError::Syntax {
                position: tok.position,
                message: format!("expected {want}, found {}", tok.kind),
            }),
            None => Err(ParseError::Syntax {
                position: self.end,
                message: format!("expected {want}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.next() else {
            return Err(ParseError::Syntax {
                position: self.end,
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Constant(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                let is_call = matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokenKind::LParen,
                        ..
                    })
                );
                if is_call {
                    self.call(name, tok.position)
                } else if name == "pi" {
                    Ok(Expr::Constant(std::f64::consts::PI))
                } else {
                    match Var::from_name(&name) {
                        Some(v) if self.allowed.contains(v) => Ok(Expr::Var(v)),
                        _ => Err(ParseError::UnknownVariable {
                            name,
                            position: tok.position,
                        }),
                    }
                }
            }
            other => Err(ParseError::Syntax {
                position: tok.position,
                message: format!("unexpected {other}"),
            }),
        }
    }

    fn call(&mut self, name: String, position: usize) -> Result<Expr, ParseError> {
        let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
            name: name.clone(),
            position,
        })?;
        self.expect(TokenKind::LParen)?;
        let mut args = vec![self.expr()?];
        while matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Comma,
                ..
            })
        ) {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect(TokenKind::RParen)?;
        func.arity_ok(args.len()).map_err(|expected| ParseError::Arity {
            function: func.name(),
            expected,
            found: args.len(),
            position,
        })?;
        Ok(Expr::Call(func, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vars2() -> VarSet {
        VarSet::from_names(["u1", "u2"]).unwrap()
    }

    fn value(src: &str) -> f64 {
        let e = Expr::parse(src, &VarSet::system(1)).unwrap();
        e.eval(&HashMap::<String, f64>::new()).unwrap()
    }

    #[test]
    fn parses_power_of_max() {
        let e = Expr::parse("max(u1,u2)^2", &vars2()).unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinaryOp::Pow,
                Box::new(Expr::Call(
                    Func::Max,
                    vec![Expr::Var(Var::U(0)), Expr::Var(Var::U(1))]
                )),
                Box::new(Expr::Constant(2.0))
            )
        );
    }

    #[test]
    fn parses_tan_example() {
        let e = Expr::parse("sqrt(max(u1,u2)) + tan(max(u1,u2))", &vars2()).unwrap();
        let rho = 15.0 * std::f64::consts::PI / 64.0;
        let b: HashMap<&str, f64> = [("u1", rho), ("u2", 0.1)].into_iter().collect();
        assert_relative_eq!(e.eval(&b).unwrap(), rho.sqrt() + rho.tan(), epsilon = 1e-15);
    }

    #[test]
    fn unknown_variable_reports_column() {
        assert_eq!(
            Expr::parse("u3", &vars2()).unwrap_err(),
            ParseError::UnknownVariable {
                name: "u3".into(),
                position: 1
            }
        );
        assert!(matches!(
            Expr::parse("u1 + y", &vars2()),
            Err(ParseError::UnknownVariable { position: 6, .. })
        ));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            Expr::parse("foo(u1)", &vars2()),
            Err(ParseError::UnknownFunction { .. })
        ));
        assert!(matches!(
            Expr::parse("sqrt(u1, u2)", &vars2()),
            Err(ParseError::Arity { found: 2, .. })
        ));
        assert!(matches!(
            Expr::parse("max(u1)", &vars2()),
            Err(ParseError::Arity { found: 1, .. })
        ));
        assert!(matches!(
            Expr::parse("(u1 + 2", &vars2()),
            Err(ParseError::Syntax { position: 8, .. })
        ));
        assert!(matches!(
            Expr::parse("u1 $ 2", &vars2()),
            Err(ParseError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("   ", &vars2()),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            Expr::parse("2 3", &vars2()),
            Err(ParseError::Syntax { position: 3, .. })
        ));
    }

    #[test]
    fn tan_and_sqrt_at_zero() {
        let e = Expr::parse("sqrt(s)+tan(s)", &VarSet::system(1)).unwrap();
        let b: HashMap<&str, f64> = [("s", 0.0)].into_iter().collect();
        assert_eq!(e.eval(&b).unwrap(), 0.0);
    }

    #[test]
    fn square_of_max_at_rho() {
        let rho = 15.0 * std::f64::consts::PI / 64.0;
        let e = Expr::parse("max(u1,u2)^2", &vars2()).unwrap();
        let b: HashMap<&str, f64> = [("u1", rho), ("u2", rho)].into_iter().collect();
        let v = e.eval(&b).unwrap();
        assert_relative_eq!(v, rho * rho, epsilon = 1e-15);
        assert!((v - 0.542_153_562_071_558_8).abs() < 1e-15);
    }

    #[test]
    fn domain_guards() {
        let s = VarSet::system(1);
        let at = |src: &str, x: f64| {
            let b: HashMap<&str, f64> = [("s", x)].into_iter().collect();
            Expr::parse(src, &s).unwrap().eval(&b)
        };
        assert!(matches!(
            at("tan(s)", std::f64::consts::FRAC_PI_2),
            Err(EvalError::Domain { function: "tan", .. })
        ));
        assert!(matches!(
            at("tan(s)", -std::f64::consts::FRAC_PI_2 + 5e-9),
            Err(EvalError::Domain { function: "tan", .. })
        ));
        assert!(at("tan(s)", std::f64::consts::FRAC_PI_2 - 1e-6).is_ok());
        assert!(matches!(
            at("sqrt(s)", -1e-300),
            Err(EvalError::Domain { function: "sqrt", .. })
        ));
        assert!(matches!(
            at("log(s)", 0.0),
            Err(EvalError::Domain { function: "log", .. })
        ));
        assert!(matches!(
            at("1/s", 0.0),
            Err(EvalError::Domain { function: "/", .. })
        ));
        assert!(matches!(
            at("s^0.5", -4.0),
            Err(EvalError::Domain { function: "^", .. })
        ));
        assert!(matches!(
            at("exp(s)", 1000.0),
            Err(EvalError::Domain { function: "exp", .. })
        ));
        assert!(matches!(
            at("u1 + x1", 1.0),
            Err(EvalError::MissingBinding { .. })
        ));
    }

    #[test]
    fn precedence() {
        assert_eq!(value("2+3*4"), 14.0);
        assert_eq!(value("2^3^2"), 512.0);
        assert_eq!(value("-2^2"), -4.0);
        assert_eq!(value("2^-1"), 0.5);
        assert_eq!(value("8/4/2"), 1.0);
        assert_eq!(value("1 - 2 - 3"), -4.0);
        assert_eq!(value("min(3, 1, 2)"), 1.0);
        assert_eq!(value("pow(2, 10)"), 1024.0);
        assert_eq!(value("1.5e2 + 25E-2"), 150.25);
    }

    #[test]
    fn spatial_dependence() {
        let s = VarSet::system(2);
        assert!(Expr::parse("x1*u1", &s).unwrap().depends_on_position());
        assert!(!Expr::parse("u1+u2", &s).unwrap().depends_on_position());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Constant),
            prop_oneof![Just(Var::X1), Just(Var::X2), Just(Var::U(0)), Just(Var::U(1))]
                .prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                inner
                    .clone()
                    .prop_map(|e| Expr::Unary(UnaryOp::Neg, Box::new(e))),
                (
                    prop_oneof![
                        Just(BinaryOp::Add),
                        Just(BinaryOp::Sub),
                        Just(BinaryOp::Mul),
                        Just(BinaryOp::Div),
                        Just(BinaryOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
                (0usize..7, inner.clone()).prop_map(|(k, e)| Expr::Call(Func::ALL[k], vec![e])),
                (prop_oneof![Just(Func::Min), Just(Func::Max), Just(Func::Pow)], inner.clone(), inner)
                    .prop_map(|(f, a, b)| Expr::Call(f, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr()) {
            let text = e.to_string();
            let back = Expr::parse(&text, &VarSet::system(2)).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn evaluation_is_total_and_deterministic(
            e in arb_expr(),
            x in prop::array::uniform2(-2.0f64..2.0),
            u in prop::array::uniform2(-2.0f64..2.0),
        ) {
            let b = PointBindings { x, u: &u };
            let first = e.eval(&b);
            let second = e.eval(&b);
            match (&first, &second) {
                (Ok(a), Ok(c)) => {
                    prop_assert!(a.is_finite());
                    prop_assert_eq!(a.to_bits(), c.to_bits());
                }
                (Err(a), Err(c)) => prop_assert_eq!(a, c),
                _ => prop_assert!(false, "non-deterministic evaluation"),
            }
        }
    }
}
