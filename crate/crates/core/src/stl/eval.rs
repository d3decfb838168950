//! Grid semantics for STL.
//!
//! Both semantics are computed bottom-up as per-grid-point signals over the
//! maximal prefix on which a formula is defined. Temporal operators quantify
//! over the grid points that fall in the shifted interval `t + I`; unbounded
//! operators range to the last point where their operands are defined.

use thiserror::Error;

use super::{Formula, Interval, Predicate};
use crate::trace::{Interp, Signal, Trace, TraceError};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("time {0} is not a point of the trace grid")]
    NotOnGrid(f64),
    #[error("trace horizon too short: formula is defined only for t <= {last_valid} (requested {t})")]
    Horizon { t: f64, last_valid: f64 },
    #[error("formula is not defined at any point of the trace (horizon too short)")]
    EmptyHorizon,
    #[error("predicate evaluates to NaN at t = {0}")]
    NotANumber(f64),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Offsets (in grid steps) covered by `interval`, or `None` for an unbounded
/// operator.
fn window(interval: &Option<Interval>, dt: f64) -> Option<(usize, usize)> {
    interval.map(|i| {
        const EPS: f64 = 1e-9;
        let lo = (i.lo() / dt - EPS).ceil().max(0.0) as usize;
        let hi = (i.hi() / dt + EPS).floor().max(0.0) as usize;
        (lo, hi)
    })
}

fn predicate_values(p: &Predicate, trace: &Trace) -> Result<Vec<f64>, EvalError> {
    let names = {
        let mut s = std::collections::BTreeSet::new();
        p.g.collect_vars(&mut s);
        s
    };
    let mut cols = Vec::with_capacity(names.len());
    for n in &names {
        let sig = trace.signal(n).ok_or_else(|| EvalError::UnknownSignal((*n).to_string()))?;
        cols.push((*n, sig.values()));
    }
    let grid = trace.grid();
    (0..grid.n_steps())
        .map(|k| {
            let lookup = |name: &str| cols.iter().find(|(n, _)| *n == name).map(|(_, v)| v[k]);
            let v = p.g.eval(&lookup).map_err(EvalError::UnknownSignal)?;
            if v.is_nan() {
                return Err(EvalError::NotANumber(grid.time(k)));
            }
            Ok(v)
        })
        .collect()
}

/// Robustness at every grid point on which `formula` is defined.
pub fn robustness_signal(formula: &Formula, trace: &Trace) -> Result<Vec<f64>, EvalError> {
    let dt = trace.grid().dt();
    Ok(match formula {
        Formula::Pred(p) => predicate_values(p, trace)?,
        Formula::Not(f) => robustness_signal(f, trace)?.into_iter().map(|v| -v).collect(),
        Formula::And(a, b) => zip_with(robustness_signal(a, trace)?, robustness_signal(b, trace)?, f64::min),
        Formula::Or(a, b) => zip_with(robustness_signal(a, trace)?, robustness_signal(b, trace)?, f64::max),
        Formula::Eventually(i, f) => {
            sliding(&robustness_signal(f, trace)?, window(i, dt), f64::NEG_INFINITY, f64::max)
        }
        Formula::Globally(i, f) => sliding(&robustness_signal(f, trace)?, window(i, dt), f64::INFINITY, f64::min),
        Formula::Until(i, a, b) => {
            let lhs = robustness_signal(a, trace)?;
            let rhs = robustness_signal(b, trace)?;
            until(&lhs, &rhs, window(i, dt), f64::NEG_INFINITY, f64::INFINITY, f64::max, f64::min)
        }
    })
}

/// Boolean satisfaction at every grid point on which `formula` is defined.
pub fn qualitative_signal(formula: &Formula, trace: &Trace) -> Result<Vec<bool>, EvalError> {
    let dt = trace.grid().dt();
    let or = |a: bool, b: bool| a || b;
    let and = |a: bool, b: bool| a && b;
    Ok(match formula {
        Formula::Pred(p) => predicate_values(p, trace)?
            .into_iter()
            .map(|g| if p.strict { g > 0.0 } else { g >= 0.0 })
            .collect(),
        Formula::Not(f) => qualitative_signal(f, trace)?.into_iter().map(|v| !v).collect(),
        Formula::And(a, b) => zip_with(qualitative_signal(a, trace)?, qualitative_signal(b, trace)?, and),
        Formula::Or(a, b) => zip_with(qualitative_signal(a, trace)?, qualitative_signal(b, trace)?, or),
        Formula::Eventually(i, f) => sliding(&qualitative_signal(f, trace)?, window(i, dt), false, or),
        Formula::Globally(i, f) => sliding(&qualitative_signal(f, trace)?, window(i, dt), true, and),
        Formula::Until(i, a, b) => {
            let lhs = qualitative_signal(a, trace)?;
            let rhs = qualitative_signal(b, trace)?;
            until(&lhs, &rhs, window(i, dt), false, true, or, and)
        }
    })
}

fn zip_with<T: Copy>(a: Vec<T>, b: Vec<T>, f: impl Fn(T, T) -> T) -> Vec<T> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Fold of `xs[k + lo ..= k + hi]` for every `k` whose window fits; for an
/// unbounded window, the fold of the whole suffix.
fn sliding<T: Copy>(xs: &[T], win: Option<(usize, usize)>, identity: T, f: impl Fn(T, T) -> T) -> Vec<T> {
    match win {
        None => {
            let mut out = vec![identity; xs.len()];
            let mut acc = identity;
            for k in (0..xs.len()).rev() {
                acc = f(acc, xs[k]);
                out[k] = acc;
            }
            out
        }
        Some((lo, hi)) => {
            let n = xs.len().saturating_sub(hi);
            (0..n)
                .map(|k| (lo..=hi).fold(identity, |acc, j| f(acc, xs[k + j])))
                .collect()
        }
    }
}

/// `join_{j in window} meet(rhs[k+j], meet_{i in 0..=j} lhs[k+i])`.
fn until<T: Copy>(
    lhs: &[T],
    rhs: &[T],
    win: Option<(usize, usize)>,
    bottom: T,
    top: T,
    join: impl Fn(T, T) -> T,
    meet: impl Fn(T, T) -> T,
) -> Vec<T> {
    let len = lhs.len().min(rhs.len());
    let n = match win {
        None => len,
        Some((_, hi)) => len.saturating_sub(hi),
    };
    (0..n)
        .map(|k| {
            let (lo, hi) = win.unwrap_or((0, len - 1 - k));
            let mut prefix = top;
            let mut best = bottom;
            for j in 0..=hi {
                prefix = meet(prefix, lhs[k + j]);
                if j >= lo {
                    best = join(best, meet(rhs[k + j], prefix));
                }
            }
            best
        })
        .collect()
}

fn locate(trace: &Trace, t: f64, valid: usize) -> Result<usize, EvalError> {
    let grid = trace.grid();
    let k = grid.index_of(t).ok_or(EvalError::NotOnGrid(t))?;
    if valid == 0 {
        return Err(EvalError::EmptyHorizon);
    }
    if k >= valid {
        return Err(EvalError::Horizon { t, last_valid: grid.time(valid - 1) });
    }
    Ok(k)
}

pub fn eval_robustness(formula: &Formula, trace: &Trace, t: f64) -> Result<f64, EvalError> {
    let rho = robustness_signal(formula, trace)?;
    let k = locate(trace, t, rho.len())?;
    Ok(rho[k])
}

pub fn eval_qualitative(formula: &Formula, trace: &Trace, t: f64) -> Result<bool, EvalError> {
    let chi = qualitative_signal(formula, trace)?;
    let k = locate(trace, t, chi.len())?;
    Ok(chi[k])
}

/// The 0/1 satisfaction signal over the maximal prefix of the trace grid on
/// which the formula is defined.
pub fn satisfaction_signal(formula: &Formula, trace: &Trace) -> Result<Signal, EvalError> {
    let chi = qualitative_signal(formula, trace)?;
    if chi.is_empty() {
        return Err(EvalError::EmptyHorizon);
    }
    let grid = trace.grid().prefix(chi.len())?;
    let values = chi.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    Ok(Signal::new("chi", grid, values, Interp::HoldPrevious)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TimeGrid;

    fn trace(dt: f64, cols: &[(&str, Vec<f64>)]) -> Trace {
        let grid = TimeGrid::new(0.0, dt, cols[0].1.len()).unwrap();
        let sigs = cols
            .iter()
            .map(|(n, v)| Signal::new(*n, grid, v.clone(), Interp::Linear).unwrap())
            .collect();
        Trace::new(grid, sigs).unwrap()
    }

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn predicate_base_case() {
        let w = trace(1.0, &[("x", vec![3.0, -1.0])]);
        assert_eq!(eval_robustness(&f("x >= 0"), &w, 0.0).unwrap(), 3.0);
        assert!(eval_qualitative(&f("x >= 0"), &w, 0.0).unwrap());
        assert_eq!(eval_robustness(&f("!(x >= 0)"), &w, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn globally_holds_everywhere() {
        let w = trace(0.25, &[("p", vec![1.0, 2.0, 0.5, 1.0, 3.0, -1.0])]);
        assert!(eval_qualitative(&f("G[0,1](p > 0)"), &w, 0.0).unwrap());
        assert!(!eval_qualitative(&f("G[0,1](p > 0)"), &w, 0.25).unwrap());
        assert_eq!(eval_robustness(&f("G[0,1](p > 0)"), &w, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn until_on_five_point_grid() {
        // dt = 0.5; phi2 first true at t' = 1.0; phi1 true on [0, 1.0].
        let w = trace(0.5, &[("a", vec![1.0, 2.0, 0.5, -1.0, -1.0]), ("b", vec![-2.0, -1.0, 3.0, 1.0, -1.0])]);
        let phi = f("a > 0 U[0,2] b > 0");
        assert!(eval_qualitative(&phi, &w, 0.0).unwrap());
        // Pairs (t', t''): best is t' = 1.0 with min(b=3, min a on [0,1] = 0.5) = 0.5.
        assert_eq!(eval_robustness(&phi, &w, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn horizon_errors_are_explicit() {
        let w = trace(0.5, &[("p", vec![1.0; 4])]);
        let e = eval_robustness(&f("G[0,1](p > 0)"), &w, 1.0).unwrap_err();
        assert!(matches!(e, EvalError::Horizon { .. }), "{e}");
        let e = eval_robustness(&f("G[0,5](p > 0)"), &w, 0.0).unwrap_err();
        assert_eq!(e, EvalError::EmptyHorizon);
        assert!(matches!(eval_robustness(&f("p > 0"), &w, 0.3), Err(EvalError::NotOnGrid(_))));
    }

    #[test]
    fn unknown_signal_at_eval_time() {
        let w = trace(1.0, &[("x", vec![0.0, 1.0, 2.0])]);
        let phi = f("a > 0 U[1,2] b > 0");
        assert_eq!(eval_robustness(&phi, &w, 0.0).unwrap_err(), EvalError::UnknownSignal("a".into()));
    }

    #[test]
    fn unbounded_globally_uses_whole_suffix() {
        let w = trace(0.1, &[("dist", vec![10.0, 8.0, 5.0, 7.0])]);
        assert_eq!(eval_robustness(&f("G(!(dist <= 0))"), &w, 0.0).unwrap(), 5.0);
        assert_eq!(eval_robustness(&f("G(dist > 0)"), &w, 0.3).unwrap(), 7.0);
    }

    #[test]
    fn satisfaction_signal_of_globally() {
        // p false only at t = 0.5; dt = 0.5; horizon 3.
        let mut p = vec![1.0; 7];
        p[1] = -1.0;
        let w = trace(0.5, &[("p", p)]);
        let chi = satisfaction_signal(&f("G[0,1](p > 0)"), &w).unwrap();
        assert_eq!(chi.values(), &[0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(chi.grid().n_steps(), 5);
    }

    #[test]
    fn satisfaction_signal_negation_and_constant() {
        let w = trace(1.0, &[("p", vec![1.0, -2.0, 0.0, 4.0])]);
        let pos = satisfaction_signal(&f("p >= 0"), &w).unwrap();
        let neg = satisfaction_signal(&f("!(p >= 0)"), &w).unwrap();
        for (a, b) in pos.values().iter().zip(neg.values()) {
            assert_eq!(*b, 1.0 - a);
        }
        let top = satisfaction_signal(&f("1 >= 0"), &w).unwrap();
        assert!(top.values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn expansion_agrees_with_sugar() {
        let w = trace(0.5, &[("x", vec![1.0, -2.0, 3.0, 0.5, -0.5, 2.0, 1.5]), ("y", vec![0.0, 1.0, -1.0, 2.0, 2.5, -3.0, 1.0])]);
        for s in ["G[0,1](x > 0) | F[0.5,1.5](y >= 1)", "G(x > y)", "F[0,2](x < 0 | y > 2)"] {
            let phi = f(s);
            assert_eq!(
                robustness_signal(&phi, &w).unwrap(),
                robustness_signal(&phi.expand(), &w).unwrap(),
                "{s}"
            );
            assert_eq!(
                qualitative_signal(&phi, &w).unwrap(),
                qualitative_signal(&phi.expand(), &w).unwrap(),
                "{s}"
            );
        }
    }
}
