//! Uniformly sampled signals and traces.
//!
//! A [`Trace`] is a set of named real-valued [`Signal`]s that share one
//! [`TimeGrid`]. Traces are produced by the simulator and consumed by the
//! STL monitor; they are immutable once built.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("time grid must have dt > 0 and at least one step (dt = {dt}, n_steps = {n_steps})")]
    InvalidGrid { dt: f64, n_steps: usize },
    #[error("signal `{name}` has {got} samples, grid has {expected}")]
    LengthMismatch { name: String, got: usize, expected: usize },
    #[error("signal `{name}` has a non-finite sample at index {index}")]
    NonFinite { name: String, index: usize },
    #[error("duplicate signal name `{0}`")]
    DuplicateSignal(String),
    #[error("signal `{0}` is not on the trace grid")]
    GridMismatch(String),
    #[error("time {t} outside signal domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("csv row {row}: {msg}")]
    Csv { row: usize, msg: String },
}

/// Relative tolerance used when matching times against the grid.
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self, TraceError> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() || n_steps == 0 {
            return Err(TraceError::InvalidGrid { dt, n_steps });
        }
        Ok(Self { t0, dt, n_steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.n_steps - 1)
    }

    /// Grid index of `t` if it lies on the grid (within a small tolerance).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = (t - self.t0) / self.dt;
        let k = pos.round();
        if (pos - k).abs() <= GRID_EPS * pos.abs().max(1.0) && k >= 0.0 && (k as usize) < self.n_steps {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Grid with the same origin and spacing but only the first `n` steps.
    pub fn prefix(&self, n: usize) -> Result<Self, TraceError> {
        Self::new(self.t0, self.dt, n.min(self.n_steps))
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(|k| self.time(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    /// Value of the last sample at or before `t`.
    HoldPrevious,
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    name: String,
    grid: TimeGrid,
    values: Vec<f64>,
    interp: Interp,
}

impl Signal {
    pub fn new(
        name: impl Into<String>,
        grid: TimeGrid,
        values: Vec<f64>,
        interp: Interp,
    ) -> Result<Self, TraceError> {
        let name = name.into();
        if values.len() != grid.n_steps() {
            return Err(TraceError::LengthMismatch {
                name,
                got: values.len(),
                expected: grid.n_steps(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(TraceError::NonFinite { name, index });
        }
        Ok(Self { name, grid, values, interp })
    }

    pub fn constant(name: impl Into<String>, grid: TimeGrid, value: f64) -> Result<Self, TraceError> {
        Self::new(name, grid, vec![value; grid.n_steps()], Interp::HoldPrevious)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn value_at(&self, t: f64) -> Result<f64, TraceError> {
        let (lo, hi) = (self.grid.t0(), self.grid.end());
        let slack = GRID_EPS * self.grid.dt();
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(TraceError::OutOfDomain { t, lo, hi });
        }
        if let Some(k) = self.grid.index_of(t) {
            return Ok(self.values[k]);
        }
        let pos = ((t - lo) / self.grid.dt()).clamp(0.0, (self.values.len() - 1) as f64);
        let k = pos.floor() as usize;
        match self.interp {
            Interp::HoldPrevious => Ok(self.values[k]),
            Interp::Linear => {
                let frac = pos - k as f64;
                let next = self.values[(k + 1).min(self.values.len() - 1)];
                Ok(self.values[k] + frac * (next - self.values[k]))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    grid: TimeGrid,
    signals: BTreeMap<String, Signal>,
    order: Vec<String>,
}

impl Trace {
    pub fn new(grid: TimeGrid, signals: Vec<Signal>) -> Result<Self, TraceError> {
        let mut map = BTreeMap::new();
        let mut order = Vec::with_capacity(signals.len());
        for s in signals {
            if s.grid != grid {
                return Err(TraceError::GridMismatch(s.name));
            }
            if map.contains_key(&s.name) {
                return Err(TraceError::DuplicateSignal(s.name));
            }
            order.push(s.name.clone());
            map.insert(s.name.clone(), s);
        }
        Ok(Self { grid, signals: map, order })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn signal(&self, name: &str) -> Option<&Signal> {
        self.signals.get(name)
    }

    /// Signals in insertion order.
    pub fn signals(&self) -> impl Iterator<Item = &Signal> {
        self.order.iter().map(move |n| &self.signals[n])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn set_interp(&mut self, name: &str, interp: Interp) -> bool {
        match self.signals.get_mut(name) {
            Some(s) => {
                s.interp = interp;
                true
            }
            None => false,
        }
    }

    /// Parses the `time,<name>,...` CSV format. All signals default to linear
    /// interpolation. A single-row file gets `dt = 1`.
    pub fn from_csv(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(TraceError::Csv { row: 1, msg: "empty input".into() })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first().copied() != Some("time") {
            return Err(TraceError::Csv { row: 1, msg: "header must start with `time`".into() });
        }
        let names: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
        if names.iter().any(|n| n.is_empty()) {
            return Err(TraceError::Csv { row: 1, msg: "empty signal name".into() });
        }

        let mut times = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (idx, line) in lines {
            let row = idx + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(TraceError::Csv {
                    row,
                    msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
                });
            }
            let mut parsed = Vec::with_capacity(fields.len());
            for f in &fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| TraceError::Csv { row, msg: format!("invalid number `{f}`") })?;
                if !v.is_finite() {
                    return Err(TraceError::Csv { row, msg: format!("non-finite value `{f}`") });
                }
                parsed.push(v);
            }
            times.push((row, parsed[0]));
            for (c, v) in columns.iter_mut().zip(&parsed[1..]) {
                c.push(*v);
            }
        }
        if times.is_empty() {
            return Err(TraceError::Csv { row: 2, msg: "no data rows".into() });
        }

        let t0 = times[0].1;
        let dt = if times.len() > 1 {
            (times[times.len() - 1].1 - t0) / (times.len() - 1) as f64
        } else {
            1.0
        };
        if times.len() > 1 && !(dt > 0.0) {
            return Err(TraceError::Csv { row: times[1].0, msg: "times must be strictly increasing".into() });
        }
        for (k, (row, t)) in times.iter().enumerate() {
            let expected = t0 + k as f64 * dt;
            if (t - expected).abs() > 1e-9 * dt.max(expected.abs()) {
                return Err(TraceError::Csv {
                    row: *row,
                    msg: format!("non-uniform time {t} (expected {expected})"),
                });
            }
        }
        let grid = TimeGrid::new(t0, dt, times.len())?;
        let signals = names
            .into_iter()
            .zip(columns)
            .map(|(n, v)| Signal::new(n, grid, v, Interp::Linear))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(grid, signals)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for n in &self.order {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for k in 0..self.grid.n_steps() {
            // shortest round-trip representation
            let _ = write!(out, "{}", self.grid.time(k));
            for n in &self.order {
                let _ = write!(out, ",{}", self.signals[n].values[k]);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> TimeGrid {
        TimeGrid::new(0.0, dt, n).unwrap()
    }

    #[test]
    fn constant_signal() {
        let s = Signal::constant("x", grid(5, 0.5), 7.0).unwrap();
        for t in [0.0, 0.3, 1.0, 2.0] {
            assert_eq!(s.value_at(t).unwrap(), 7.0);
        }
    }

    #[test]
    fn linear_midpoint() {
        let s = Signal::new("x", grid(2, 1.0), vec![0.0, 2.0], Interp::Linear).unwrap();
        assert_eq!(s.value_at(0.5).unwrap(), 1.0);
    }

    #[test]
    fn hold_previous() {
        let s = Signal::new("x", grid(2, 1.0), vec![3.0, 7.0], Interp::HoldPrevious).unwrap();
        assert_eq!(s.value_at(0.5).unwrap(), 3.0);
        assert_eq!(s.value_at(1.0).unwrap(), 7.0);
    }

    #[test]
    fn out_of_domain() {
        let s = Signal::constant("x", grid(3, 1.0), 1.0).unwrap();
        assert!(matches!(s.value_at(-0.1), Err(TraceError::OutOfDomain { .. })));
        assert!(matches!(s.value_at(2.5), Err(TraceError::OutOfDomain { .. })));
    }

    #[test]
    fn rejects_bad_signals() {
        let g = grid(2, 1.0);
        assert!(Signal::new("x", g, vec![1.0], Interp::Linear).is_err());
        assert!(Signal::new("x", g, vec![1.0, f64::NAN], Interp::Linear).is_err());
        let a = Signal::constant("x", g, 1.0).unwrap();
        assert_eq!(
            Trace::new(g, vec![a.clone(), a]).unwrap_err(),
            TraceError::DuplicateSignal("x".into())
        );
        assert!(TimeGrid::new(0.0, 0.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn csv_two_rows() {
        let t = Trace::from_csv("time,dist\n0,5\n0.1,4.5\n").unwrap();
        assert_eq!(t.grid().n_steps(), 2);
        assert_eq!(t.signal("dist").unwrap().values(), &[5.0, 4.5]);
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(10, 0.1);
        let sigs = ["a", "b", "c"]
            .iter()
            .enumerate()
            .map(|(j, n)| {
                let v = (0..10).map(|k| (k as f64 * 0.37 + j as f64).sin() * 1e3 / 7.0).collect();
                Signal::new(*n, g, v, Interp::Linear).unwrap()
            })
            .collect();
        let t = Trace::new(g, sigs).unwrap();
        let text = t.to_csv();
        let back = Trace::from_csv(&text).unwrap();
        for (a, b) in t.signals().zip(back.signals()) {
            assert_eq!(a.name(), b.name());
            assert_eq!(a.values(), b.values());
        }
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn csv_errors_name_row() {
        let err = Trace::from_csv("time,x\n0,1\n0.1,2\n0.25,3\n").unwrap_err();
        assert!(matches!(err, TraceError::Csv { row: 3, .. } | TraceError::Csv { row: 4, .. }), "{err}");
        assert!(matches!(
            Trace::from_csv("time,x\n0,1\n1\n").unwrap_err(),
            TraceError::Csv { row: 3, .. }
        ));
        assert!(matches!(
            Trace::from_csv("time,x\n0,1\n1,NaN\n").unwrap_err(),
            TraceError::Csv { row: 3, .. }
        ));
        assert!(Trace::from_csv("t,x\n0,1\n").is_err());
    }

    #[test]
    fn grid_values_exact_in_both_modes() {
        let g = TimeGrid::new(0.3, 0.1, 7).unwrap();
        let v: Vec<f64> = (0..7).map(|k| (k * k) as f64 / 3.0).collect();
        for interp in [Interp::Linear, Interp::HoldPrevious] {
            let s = Signal::new("x", g, v.clone(), interp).unwrap();
            for k in 0..7 {
                assert_eq!(s.value_at(g.time(k)).unwrap(), v[k]);
            }
        }
    }
}
