//! Scalar expression trees over a single real variable.
//!
//! Trees are immutable and cheaply cloneable (`Arc` nodes). Shared subtrees
//! stay shared through differentiation and compilation, which keeps iterated
//! constructions such as bump functions tractable.

mod diff;
mod logval;
mod norm;
mod parse;
mod tape;

use std::fmt;
use std::sync::Arc;

pub use diff::differentiate;
pub use logval::SignedLogValue;
pub use norm::{derivative_tapes, snorm, snorm_distance, uniform_grid};
pub use parse::{parse_infix, parse_prefix, ParseError};
pub use tape::{complex_sigmoid, complex_tanh, Compiled};

use num_complex::Complex64;
use thiserror::Error;

/// Failure modes of expression evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("overflow evaluating at x = {x}")]
    Overflow { x: f64 },
    #[error("domain error in {op} at x = {x}")]
    Domain { op: &'static str, x: f64 },
    #[error("sign-indeterminate cancellation of huge terms at x = {x}")]
    Cancellation { x: f64 },
}

impl EvalError {
    pub fn x(&self) -> f64 {
        match *self {
            EvalError::Overflow { x } | EvalError::Domain { x, .. } | EvalError::Cancellation { x } => x,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Node {
    Const(f64),
    Var,
    Add(ScalarExpr, ScalarExpr),
    Sub(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Neg(ScalarExpr),
    PowI(ScalarExpr, i32),
    PowF(ScalarExpr, f64),
    Exp(ScalarExpr),
    Log(ScalarExpr),
    Tanh(ScalarExpr),
    Sigmoid(ScalarExpr),
    /// `outer(inner(x))`
    Compose(ScalarExpr, ScalarExpr),
}

/// Immutable expression tree in one real variable.
#[derive(Clone)]
pub struct ScalarExpr(pub(crate) Arc<Node>);

impl ScalarExpr {
    fn wrap(n: Node) -> Self {
        ScalarExpr(Arc::new(n))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn var() -> Self {
        Self::wrap(Node::Var)
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(&self, other: &ScalarExpr) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a + b),
            (Some(a), _) if a == 0.0 => other.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => Self::wrap(Node::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &ScalarExpr) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a - b),
            (Some(a), _) if a == 0.0 => other.neg(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => Self::wrap(Node::Sub(self.clone(), other.clone())),
        }
    }

    pub fn mul(&self, other: &ScalarExpr) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a * b),
            (Some(a), _) if a == 0.0 => Self::constant(0.0),
            (_, Some(b)) if b == 0.0 => Self::constant(0.0),
            (Some(a), _) if a == 1.0 => other.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => other.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => Self::wrap(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn div(&self, other: &ScalarExpr) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Self::constant(a / b),
            (Some(a), _) if a == 0.0 => Self::constant(0.0),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => Self::wrap(Node::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Self::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        match (n, self.as_const()) {
            (0, _) => Self::constant(1.0),
            (1, _) => self.clone(),
            (_, Some(c)) => Self::constant(c.powi(n)),
            _ => Self::wrap(Node::PowI(self.clone(), n)),
        }
    }

    /// Real power; integer exponents are routed to [`ScalarExpr::powi`].
    pub fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        match self.as_const() {
            Some(c) if c > 0.0 => Self::constant(c.powf(p)),
            _ => Self::wrap(Node::PowF(self.clone(), p)),
        }
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.as_const() {
            Some(c) if c > 0.0 => Self::constant(c.ln()),
            _ => Self::wrap(Node::Log(self.clone())),
        }
    }

    pub fn tanh(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.tanh()),
            None => Self::wrap(Node::Tanh(self.clone())),
        }
    }

    pub fn sigmoid(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(sigmoid_f64(c)),
            None => Self::wrap(Node::Sigmoid(self.clone())),
        }
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &ScalarExpr) -> Self {
        match (self.node(), inner.node()) {
            (Node::Const(_), _) => self.clone(),
            (Node::Var, _) => inner.clone(),
            (_, Node::Var) => self.clone(),
            _ => Self::wrap(Node::Compose(self.clone(), inner.clone())),
        }
    }

    /// `self(scale·x + shift)`.
    pub fn affine_arg(&self, scale: f64, shift: f64) -> Self {
        let inner = ScalarExpr::var().mul(&ScalarExpr::constant(scale)).add(&ScalarExpr::constant(shift));
        self.compose(&inner)
    }

    pub fn scale(&self, c: f64) -> Self {
        ScalarExpr::constant(c).mul(self)
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            stack.extend(e.children().into_iter().cloned());
        }
        seen.len()
    }

    pub(crate) fn children(&self) -> Vec<&ScalarExpr> {
        match self.node() {
            Node::Const(_) | Node::Var => vec![],
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Compose(a, b) => {
                vec![a, b]
            }
            Node::Neg(a)
            | Node::PowI(a, _)
            | Node::PowF(a, _)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Tanh(a)
            | Node::Sigmoid(a) => vec![a],
        }
    }

    pub fn compile(&self) -> Compiled {
        Compiled::new(self)
    }

    /// Real evaluation. Intermediate infinities are allowed when they have a
    /// definite limit (e.g. `1/∞ = 0`); a non-finite result is an overflow.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.compile().eval(x)
    }

    pub fn eval_log_domain(&self, x: f64) -> Result<SignedLogValue, EvalError> {
        self.compile().eval_log(x)
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.compile().eval_complex(z)
    }

    pub fn differentiate(&self, order: usize) -> ScalarExpr {
        differentiate(self, order)
    }
}

pub(crate) fn sigmoid_f64(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Var, Node::Var) => true,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d))
            | (Node::Compose(a, b), Node::Compose(c, d)) => a == c && b == d,
            (Node::PowI(a, n), Node::PowI(b, m)) => n == m && a == b,
            (Node::PowF(a, p), Node::PowF(b, q)) => p.to_bits() == q.to_bits() && a == b,
            (Node::Neg(a), Node::Neg(b))
            | (Node::Exp(a), Node::Exp(b))
            | (Node::Log(a), Node::Log(b))
            | (Node::Tanh(a), Node::Tanh(b))
            | (Node::Sigmoid(a), Node::Sigmoid(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var => write!(f, "x"),
            Node::Add(a, b) => write!(f, "(add {a} {b})"),
            Node::Sub(a, b) => write!(f, "(sub {a} {b})"),
            Node::Mul(a, b) => write!(f, "(mul {a} {b})"),
            Node::Div(a, b) => write!(f, "(div {a} {b})"),
            Node::Neg(a) => write!(f, "(neg {a})"),
            Node::PowI(a, n) => write!(f, "(pow {a} {n})"),
            Node::PowF(a, p) => write!(f, "(rpow {a} {p:?})"),
            Node::Exp(a) => write!(f, "(exp {a})"),
            Node::Log(a) => write!(f, "(log {a})"),
            Node::Tanh(a) => write!(f, "(tanh {a})"),
            Node::Sigmoid(a) => write!(f, "(sigmoid {a})"),
            Node::Compose(a, b) => write!(f, "(compose {a} {b})"),
        }
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for ScalarExpr {
    type Err = ParseError;

    /// Prefix notation when the text starts with `(`, infix otherwise.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim_start().starts_with('(') && parse_prefix(s).is_ok() {
            parse_prefix(s)
        } else {
            parse_infix(s)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$m(&self, &rhs)
            }
        }
        impl std::ops::$tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                ScalarExpr::$m(self, rhs)
            }
        }
        impl std::ops::$tr<f64> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: f64) -> ScalarExpr {
                ScalarExpr::$m(&self, &ScalarExpr::constant(rhs))
            }
        }
        impl std::ops::$tr<ScalarExpr> for f64 {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$m(&ScalarExpr::constant(self), &rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(&self)
    }
}

impl std::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

/// Shorthands for the activations that recur across the crate.
pub mod named {
    use super::ScalarExpr;

    pub fn x() -> ScalarExpr {
        ScalarExpr::var()
    }

    pub fn c(v: f64) -> ScalarExpr {
        ScalarExpr::constant(v)
    }

    pub fn tanh() -> ScalarExpr {
        x().tanh()
    }

    pub fn sigmoid() -> ScalarExpr {
        x().sigmoid()
    }

    /// `e^{x^p} + e^{-x^q}`
    pub fn exp_pair(p: i32, q: i32) -> ScalarExpr {
        x().powi(p).exp() + x().powi(q).neg().exp()
    }

    pub fn gaussian() -> ScalarExpr {
        x().powi(2).neg().exp()
    }

    pub fn exp_square() -> ScalarExpr {
        x().powi(2).exp()
    }

    /// `2 / (e^x + e^{-x})`
    pub fn sech() -> ScalarExpr {
        c(2.0) / (x().exp() + x().neg().exp())
    }

    /// `x·sigmoid(x)`
    pub fn swish() -> ScalarExpr {
        x() * x().sigmoid()
    }
}
