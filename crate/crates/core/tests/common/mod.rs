//! Random formulas and traces for the property and acceptance tests, with an
//! independent pointwise evaluator used as the oracle.
//!
//! Formulas are generated as a small private AST, printed to text and fed to
//! the library parser, so the oracle never touches library evaluation code.

#![allow(dead_code)]

use rand::Rng;
use rou_falsify::stl::{parse, Formula};
use rou_falsify::trace::{Interp, Signal, TimeGrid, Trace};

pub const SIGNALS: [&str; 2] = ["x", "y"];

#[derive(Debug, Clone)]
pub enum F {
    /// `a * sig + b >= 0` (or `> 0`)
    Ge { sig: usize, a: f64, b: f64, strict: bool },
    /// `c <= a * sig` (or `<`), normalized to `a * sig - c`
    Le { sig: usize, a: f64, c: f64, strict: bool },
    Not(Box<F>),
    And(Box<F>, Box<F>),
    Or(Box<F>, Box<F>),
    Until(Option<(f64, f64)>, Box<F>, Box<F>),
    Ev(Option<(f64, f64)>, Box<F>),
    Gl(Option<(f64, f64)>, Box<F>),
}

fn interval_text(i: &Option<(f64, f64)>) -> String {
    i.map(|(lo, hi)| format!("[{lo},{hi}]")).unwrap_or_default()
}

impl F {
    pub fn text(&self) -> String {
        match self {
            F::Ge { sig, a, b, strict } => {
                format!("{a} * {} + {b} {} 0", SIGNALS[*sig], if *strict { ">" } else { ">=" })
            }
            F::Le { sig, a, c, strict } => {
                format!("{c} {} {a} * {}", if *strict { "<" } else { "<=" }, SIGNALS[*sig])
            }
            F::Not(f) => format!("!({})", f.text()),
            F::And(a, b) => format!("({}) & ({})", a.text(), b.text()),
            F::Or(a, b) => format!("({}) | ({})", a.text(), b.text()),
            F::Until(i, a, b) => format!("({}) U{} ({})", a.text(), interval_text(i), b.text()),
            F::Ev(i, f) => format!("F{}({})", interval_text(i), f.text()),
            F::Gl(i, f) => format!("G{}({})", interval_text(i), f.text()),
        }
    }

    pub fn formula(&self) -> Formula {
        parse(&self.text()).unwrap_or_else(|e| panic!("{}: {e}", self.text()))
    }

    /// Grid steps the formula looks ahead, for bounded operators.
    pub fn horizon(&self, dt: f64) -> usize {
        let steps = |i: &Option<(f64, f64)>| i.map_or(0, |(_, hi)| (hi / dt + 1e-9).floor() as usize);
        match self {
            F::Ge { .. } | F::Le { .. } => 0,
            F::Not(f) => f.horizon(dt),
            F::And(a, b) | F::Or(a, b) => a.horizon(dt).max(b.horizon(dt)),
            F::Until(i, a, b) => steps(i) + a.horizon(dt).max(b.horizon(dt)),
            F::Ev(i, f) | F::Gl(i, f) => steps(i) + f.horizon(dt),
        }
    }

    fn is_temporal(&self) -> bool {
        matches!(self, F::Until(..) | F::Ev(..) | F::Gl(..))
    }
}

/// Quarter-integer coefficients keep the printed text exact.
fn coef(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo * 4..=hi * 4) as f64 / 4.0
}

fn interval(rng: &mut impl Rng, dt: f64, unbounded: bool) -> Option<(f64, f64)> {
    if unbounded && rng.gen_bool(0.2) {
        return None;
    }
    let lo = rng.gen_range(0..=2) as f64 * dt;
    let hi = lo + rng.gen_range(1..=3) as f64 * dt;
    Some((lo, hi))
}

pub fn atom(rng: &mut impl Rng) -> F {
    let sig = rng.gen_range(0..SIGNALS.len());
    let mut a = coef(rng, -2, 2);
    if a == 0.0 {
        a = 1.0;
    }
    let strict = rng.gen_bool(0.5);
    if rng.gen_bool(0.5) {
        F::Ge { sig, a, b: coef(rng, -3, 3), strict }
    } else {
        F::Le { sig, a, c: coef(rng, -3, 3), strict }
    }
}

/// A formula of depth at most `depth` (predicates have depth 1).
pub fn formula<R: Rng>(rng: &mut R, depth: usize, dt: f64, unbounded: bool) -> F {
    if depth <= 1 || rng.gen_bool(0.15) {
        return atom(rng);
    }
    let sub = |rng: &mut R| Box::new(formula(rng, depth - 1, dt, unbounded));
    match rng.gen_range(0..7) {
        0 => F::Not(sub(rng)),
        1 => F::And(sub(rng), sub(rng)),
        2 => F::Or(sub(rng), sub(rng)),
        3 => {
            let (a, b) = (sub(rng), sub(rng));
            F::Until(interval(rng, dt, unbounded), a, b)
        }
        4 => {
            let f = sub(rng);
            F::Ev(interval(rng, dt, unbounded), f)
        }
        _ => {
            let f = sub(rng);
            F::Gl(interval(rng, dt, unbounded), f)
        }
    }
}

/// A formula whose top operator is `U`, `F` or `G`.
pub fn temporal_formula<R: Rng>(rng: &mut R, depth: usize, dt: f64) -> F {
    loop {
        let f = formula(rng, depth, dt, true);
        if f.is_temporal() {
            return f;
        }
    }
}

pub struct RawTrace {
    pub dt: f64,
    pub values: Vec<Vec<f64>>,
}

impl RawTrace {
    pub fn random(rng: &mut impl Rng, len: usize, dt: f64) -> Self {
        let values = SIGNALS.iter().map(|_| (0..len).map(|_| rng.gen_range(-4.0..4.0)).collect()).collect();
        Self { dt, values }
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn trace(&self) -> Trace {
        let grid = TimeGrid::new(0.0, self.dt, self.len()).unwrap();
        let signals = SIGNALS
            .iter()
            .zip(&self.values)
            .map(|(n, v)| Signal::new(*n, grid, v.clone(), Interp::Linear).unwrap())
            .collect();
        Trace::new(grid, signals).unwrap()
    }

    /// Robustness at grid index `k` straight from the definition: sup over
    /// grid points `t'` in `t + I`, inf over grid points in `[t, t']`.
    /// `None` where some required sample lies past the end of the trace.
    pub fn rho(&self, f: &F, k: usize) -> Option<f64> {
        let n = self.len();
        if k >= n {
            return None;
        }
        let t = k as f64 * self.dt;
        match f {
            F::Ge { sig, a, b, .. } => Some(a * self.values[*sig][k] + b),
            F::Le { sig, a, c, .. } => Some(a * self.values[*sig][k] - c),
            F::Not(g) => self.rho(g, k).map(|v| -v),
            F::And(a, b) => Some(self.rho(a, k)?.min(self.rho(b, k)?)),
            F::Or(a, b) => Some(self.rho(a, k)?.max(self.rho(b, k)?)),
            F::Until(i, a, b) => {
                let tps = self.window(i, t, k, &[a, b])?;
                let mut best = f64::NEG_INFINITY;
                for kp in tps {
                    let mut inf = f64::INFINITY;
                    for kpp in k..=kp {
                        inf = inf.min(self.rho(a, kpp)?);
                    }
                    best = best.max(self.rho(b, kp)?.min(inf));
                }
                Some(best)
            }
            F::Ev(i, g) => {
                let tps = self.window(i, t, k, &[g])?;
                tps.into_iter().map(|kp| self.rho(g, kp)).try_fold(f64::NEG_INFINITY, |m, v| Some(m.max(v?)))
            }
            F::Gl(i, g) => {
                let tps = self.window(i, t, k, &[g])?;
                tps.into_iter().map(|kp| self.rho(g, kp)).try_fold(f64::INFINITY, |m, v| Some(m.min(v?)))
            }
        }
    }

    /// Grid indices `k'` with `t_k' - t` in the interval; for an unbounded
    /// operator, every later index at which all operands are defined.
    fn window(&self, i: &Option<(f64, f64)>, t: f64, k: usize, operands: &[&F]) -> Option<Vec<usize>> {
        match i {
            Some((lo, hi)) => {
                let eps = 1e-9 * self.dt;
                let last = t + hi;
                if last > (self.len() - 1) as f64 * self.dt + eps {
                    return None;
                }
                Some((k..self.len()).filter(|&j| {
                    let d = j as f64 * self.dt - t;
                    d >= lo - eps && d <= hi + eps
                })
                .collect())
            }
            None => {
                let defined = |j: usize| operands.iter().all(|g| self.rho(g, j).is_some());
                if !defined(k) {
                    return None;
                }
                Some((k..self.len()).take_while(|&j| defined(j)).collect())
            }
        }
    }

    pub fn sat(&self, f: &F, k: usize) -> Option<bool> {
        let n = self.len();
        if k >= n {
            return None;
        }
        let t = k as f64 * self.dt;
        match f {
            F::Ge { sig, a, b, strict } => {
                let g = a * self.values[*sig][k] + b;
                Some(if *strict { g > 0.0 } else { g >= 0.0 })
            }
            F::Le { sig, a, c, strict } => {
                let g = a * self.values[*sig][k] - c;
                Some(if *strict { g > 0.0 } else { g >= 0.0 })
            }
            F::Not(g) => self.sat(g, k).map(|v| !v),
            F::And(a, b) => Some(self.sat(a, k)? & self.sat(b, k)?),
            F::Or(a, b) => Some(self.sat(a, k)? | self.sat(b, k)?),
            F::Until(i, a, b) => {
                let mut found = false;
                for kp in self.window(i, t, k, &[a, b])? {
                    let mut all = true;
                    for kpp in k..=kp {
                        all &= self.sat(a, kpp)?;
                    }
                    found |= self.sat(b, kp)? && all;
                }
                Some(found)
            }
            F::Ev(i, g) => {
                let mut any = false;
                for kp in self.window(i, t, k, &[g])? {
                    any |= self.sat(g, kp)?;
                }
                Some(any)
            }
            F::Gl(i, g) => {
                let mut all = true;
                for kp in self.window(i, t, k, &[g])? {
                    all &= self.sat(g, kp)?;
                }
                Some(all)
            }
        }
    }
}
