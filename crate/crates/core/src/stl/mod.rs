//! Signal temporal logic: formulas, a text front end and the grid semantics.
//!
//! Predicates are stored in the normal form `g(x) >= 0` (or `g(x) > 0` when the
//! source comparison was strict) and their robustness is `g(w(t))`, so a
//! positive robustness always means the predicate holds.
//!
//! ```
//! use rou_falsify::stl::Formula;
//!
//! let phi: Formula = "G[0,5](dist - 5 >= 0)".parse().unwrap();
//! assert_eq!(phi.to_string().parse::<Formula>().unwrap(), phi);
//! ```

mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{
    eval_qualitative, eval_robustness, qualitative_signal, robustness_signal, satisfaction_signal, EvalError,
};
pub use parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }
}

/// Arithmetic expression over signal names.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    /// Negation that folds numeric literals, so `-5` is always `Num(-5)`.
    pub fn neg(e: Expr) -> Self {
        match e {
            Expr::Num(v) => Expr::Num(-v),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eval(&self, lookup: &impl Fn(&str) -> Option<f64>) -> Result<f64, String> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(n) => lookup(n).ok_or_else(|| n.clone())?,
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Bin(op, a, b) => op.apply(a.eval(lookup)?, b.eval(lookup)?),
        })
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) => {
                out.insert(n);
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_infinite() => f.write_str(if *v > 0.0 { "1e999" } else { "-1e999" }),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

/// `g >= 0`, or `g > 0` when `strict`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub g: Expr,
    pub strict: bool,
}

impl Predicate {
    pub fn new(g: Expr, strict: bool) -> Self {
        Self { g, strict }
    }

    /// Normalizes `lhs cmp rhs` into `g >= 0` / `g > 0`.
    pub fn compare(lhs: Expr, cmp: Cmp, rhs: Expr) -> Self {
        let (pos, neg) = match cmp {
            Cmp::Gt | Cmp::Ge => (lhs, rhs),
            Cmp::Lt | Cmp::Le => (rhs, lhs),
        };
        let g = match (pos, neg) {
            (p, Expr::Num(z)) if z == 0.0 => p,
            (Expr::Num(z), n) if z == 0.0 => Expr::neg(n),
            (p, n) => Expr::bin(BinOp::Sub, p, n),
        };
        Self { g, strict: matches!(cmp, Cmp::Lt | Cmp::Gt) }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.g, if self.strict { ">" } else { ">=" })
    }
}

/// Closed, bounded, non-singular time interval `[lo, hi]` with `0 <= lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi).then_some(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// STL abstract syntax tree. `None` intervals are unbounded operators that
/// range up to the end of the trace at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Pred(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Option<Interval>, Box<Formula>, Box<Formula>),
    Eventually(Option<Interval>, Box<Formula>),
    Globally(Option<Interval>, Box<Formula>),
}

impl Formula {
    pub fn pred(lhs: Expr, cmp: Cmp, rhs: Expr) -> Self {
        Formula::Pred(Predicate::compare(lhs, cmp, rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(i: Option<Interval>, a: Formula, b: Formula) -> Self {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    pub fn eventually(i: Option<Interval>, f: Formula) -> Self {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn globally(i: Option<Interval>, f: Formula) -> Self {
        Formula::Globally(i, Box::new(f))
    }

    /// Rewrites `Or`, `F` and `G` into the core `Pred/Not/And/Until` fragment
    /// (`F φ = true U φ`, where `true` is a predicate with robustness `+inf`).
    pub fn expand(&self) -> Formula {
        let top = || Formula::Pred(Predicate::new(Expr::Num(f64::INFINITY), false));
        match self {
            Formula::Pred(p) => Formula::Pred(p.clone()),
            Formula::Not(f) => Formula::not(f.expand()),
            Formula::And(a, b) => Formula::and(a.expand(), b.expand()),
            Formula::Or(a, b) => Formula::not(Formula::and(Formula::not(a.expand()), Formula::not(b.expand()))),
            Formula::Until(i, a, b) => Formula::until(*i, a.expand(), b.expand()),
            Formula::Eventually(i, f) => Formula::until(*i, top(), f.expand()),
            Formula::Globally(i, f) => {
                Formula::not(Formula::until(*i, top(), Formula::not(f.expand())))
            }
        }
    }

    /// True if any temporal operator lacks an explicit interval.
    pub fn has_unbounded(&self) -> bool {
        match self {
            Formula::Pred(_) => false,
            Formula::Not(f) => f.has_unbounded(),
            Formula::And(a, b) | Formula::Or(a, b) => a.has_unbounded() || b.has_unbounded(),
            Formula::Until(i, a, b) => i.is_none() || a.has_unbounded() || b.has_unbounded(),
            Formula::Eventually(i, f) | Formula::Globally(i, f) => i.is_none() || f.has_unbounded(),
        }
    }

    /// Signal names referenced by the formula.
    pub fn signals(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Pred(p) => p.g.collect_vars(out),
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Globally(_, f) => f.collect_signals(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.collect_signals(out);
                b.collect_signals(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Pred(_) => 1,
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Globally(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

fn fmt_interval(i: &Option<Interval>) -> String {
    i.map(|i| i.to_string()).unwrap_or_default()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Pred(p) => write!(f, "{p}"),
            Formula::Not(a) => write!(f, "!({a})"),
            Formula::And(a, b) => write!(f, "(({a}) & ({b}))"),
            Formula::Or(a, b) => write!(f, "(({a}) | ({b}))"),
            Formula::Until(i, a, b) => write!(f, "(({a}) U{} ({b}))", fmt_interval(i)),
            Formula::Eventually(i, a) => write!(f, "F{}({a})", fmt_interval(i)),
            Formula::Globally(i, a) => write!(f, "G{}({a})", fmt_interval(i)),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parser::parse(s)
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parser::parse(text)
}
