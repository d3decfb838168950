//! Point sets in the unit cube: Halton and rank-1 lattice sequences, grid and
//! uniform baselines, and a star-discrepancy estimator.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("dimension {0} is not supported (must be 1..={max})", max = PRIMES.len())]
    Dimension(usize),
    #[error("lattice needs m >= 1")]
    EmptyLattice,
    #[error("lattice needs {expected} alphas in (0, 1), got {got:?}")]
    Alphas { expected: usize, got: Vec<f64> },
    #[error("grid of {0} points exceeds the 10^7 point limit")]
    TooLarge(u128),
    #[error("grid needs at least one point per dimension")]
    EmptyGrid,
    #[error("discrepancy of an empty point set is undefined")]
    EmptyBatch,
}

/// The first 64 primes, one Halton base per dimension.
pub const PRIMES: [u64; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
    233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
];

const MAX_GRID_POINTS: u128 = 10_000_000;

/// How a batch was generated; enough to regenerate it bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Indices `first ..first + m` of the Halton sequence in bases `primes`.
    Halton { primes: Vec<u64>, first: u64 },
    Lattice { m: usize, alphas: Vec<f64> },
    Grid { k: usize },
    Uniform { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn regenerate(provenance: &Provenance, m: usize, dim: usize) -> Result<Self, SamplingError> {
        match provenance {
            Provenance::Halton { first, .. } => halton_from(*first, m, dim),
            Provenance::Lattice { m, alphas } => lattice(*m, dim, Some(alphas)),
            Provenance::Grid { k } => grid(*k, dim),
            Provenance::Uniform { seed } => Ok(uniform_random(m, dim, *seed)),
        }
    }

    /// One point per row, `dim` columns, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// JSON sidecar describing the batch.
    pub fn provenance_json(&self) -> String {
        serde_json::json!({
            "dim": self.dim,
            "m": self.points.len(),
            "provenance": self.provenance,
        })
        .to_string()
    }
}

/// Radical inverse of `i` in base `p`: digits of `i` mirrored about the
/// radix point.
pub fn radical_inverse(mut i: u64, p: u64) -> f64 {
    let inv = 1.0 / p as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % p) as f64 * scale;
        i /= p;
        scale *= inv;
    }
    out
}

fn check_dim(n: usize) -> Result<(), SamplingError> {
    if n == 0 || n > PRIMES.len() {
        Err(SamplingError::Dimension(n))
    } else {
        Ok(())
    }
}

/// Halton points `1..=m` in `n` dimensions.
pub fn halton(m: usize, n: usize) -> Result<SampleBatch, SamplingError> {
    halton_from(1, m, n)
}

/// Halton points with indices `first..first + m`. Index 0 (the origin) is
/// never produced by [`halton`].
pub fn halton_from(first: u64, m: usize, n: usize) -> Result<SampleBatch, SamplingError> {
    check_dim(n)?;
    let primes = &PRIMES[..n];
    let points = (0..m as u64)
        .map(|i| primes.iter().map(|&p| radical_inverse(first + i, p)).collect())
        .collect();
    Ok(SampleBatch {
        dim: n,
        points,
        provenance: Provenance::Halton { primes: primes.to_vec(), first },
    })
}

/// Default irrational lattice generators `frac(sqrt(p_j))`.
pub fn default_alphas(n: usize) -> Vec<f64> {
    PRIMES[..n.saturating_sub(1)].iter().map(|&p| (p as f64).sqrt().fract()).collect()
}

/// Rank-1 lattice: point `i` (for `i = 0..m`) is `(i/m, {i a_1}, ..., {i a_(n-1)})`.
pub fn lattice(m: usize, n: usize, alphas: Option<&[f64]>) -> Result<SampleBatch, SamplingError> {
    check_dim(n)?;
    if m == 0 {
        return Err(SamplingError::EmptyLattice);
    }
    let alphas = match alphas {
        Some(a) => {
            if a.len() != n - 1 || a.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return Err(SamplingError::Alphas { expected: n - 1, got: a.to_vec() });
            }
            a.to_vec()
        }
        None => default_alphas(n),
    };
    let points = (0..m)
        .map(|i| {
            let mut p = Vec::with_capacity(n);
            p.push(i as f64 / m as f64);
            p.extend(alphas.iter().map(|a| (i as f64 * a).fract()));
            p
        })
        .collect();
    Ok(SampleBatch { dim: n, points, provenance: Provenance::Lattice { m, alphas } })
}

/// Cell centers of a `k^n` grid, last coordinate varying fastest.
pub fn grid(k: usize, n: usize) -> Result<SampleBatch, SamplingError> {
    check_dim(n)?;
    if k == 0 {
        return Err(SamplingError::EmptyGrid);
    }
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > MAX_GRID_POINTS {
        return Err(SamplingError::TooLarge(total));
    }
    let centers: Vec<f64> = (0..k).map(|i| (2 * i + 1) as f64 / (2 * k) as f64).collect();
    let points = (0..total as usize)
        .map(|mut idx| {
            let mut p = vec![0.0; n];
            for j in (0..n).rev() {
                p[j] = centers[idx % k];
                idx /= k;
            }
            p
        })
        .collect();
    Ok(SampleBatch { dim: n, points, provenance: Provenance::Grid { k } })
}

pub fn uniform_random(m: usize, n: usize, seed: u64) -> SampleBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
    SampleBatch { dim: n, points, provenance: Provenance::Uniform { seed } }
}

/// Number of critical corners up to which the estimator computes the exact
/// value.
const DENSE_CORNERS: u128 = 1 << 22;

/// Local star discrepancy of the anchored box `[0, b)`, taking the worse of
/// the closed and open boundary conventions.
fn box_discrepancy(points: &[Vec<f64>], b: &[f64]) -> f64 {
    let m = points.len() as f64;
    let vol: f64 = b.iter().product();
    let mut closed = 0usize;
    let mut open = 0usize;
    for p in points {
        if p.iter().zip(b).all(|(x, c)| x <= c) {
            closed += 1;
            if p.iter().zip(b).all(|(x, c)| x < c) {
                open += 1;
            }
        }
    }
    (closed as f64 / m - vol).max(vol - open as f64 / m)
}

/// Exact star discrepancy over all critical corners. Points are binned by
/// their rank along each axis and the bins are prefix-summed, so the closed
/// count at corner `i` is the cumulative count at `i` and the open count the
/// cumulative count at `i - 1` on every axis.
fn exact_discrepancy(points: &[Vec<f64>], axes: &[Vec<f64>]) -> f64 {
    let n = axes.len();
    let lens: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut strides = vec![1usize; n];
    for j in (0..n.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * lens[j + 1];
    }
    let total = strides[0] * lens[0];
    let mut cum = vec![0u32; total];
    for p in points {
        let idx: usize = (0..n)
            .map(|j| axes[j].partition_point(|c| c.total_cmp(&p[j]).is_lt()) * strides[j])
            .sum();
        cum[idx] += 1;
    }
    for j in 0..n {
        for idx in 0..total {
            if !(idx / strides[j]).is_multiple_of(lens[j]) {
                cum[idx] += cum[idx - strides[j]];
            }
        }
    }
    let m = points.len() as f64;
    let below = strides.iter().sum::<usize>();
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut vol = 1.0;
            let mut interior = true;
            for j in 0..n {
                let i = (idx / strides[j]) % lens[j];
                vol *= axes[j][i];
                interior &= i > 0;
            }
            let open = if interior { cum[idx - below] } else { 0 };
            (cum[idx] as f64 / m - vol).max(vol - open as f64 / m)
        })
        .reduce(|| 0.0, f64::max)
}

/// Lower-bound estimate of the star discrepancy
/// `sup_b |#(X, [0, b)) / m - vol([0, b))|`.
///
/// Box corners are drawn from the sample coordinates (plus 1 on every axis);
/// each corner is evaluated with both closed and open boundaries. When the
/// candidate set is small enough it is enumerated completely, which gives the
/// exact value; otherwise `effort` random critical corners and `effort`
/// uniformly random corners are tried.
pub fn discrepancy_estimate(batch: &SampleBatch, effort: usize) -> Result<f64, SamplingError> {
    let points = &batch.points;
    if points.is_empty() {
        return Err(SamplingError::EmptyBatch);
    }
    let n = batch.dim;
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut c: Vec<f64> = points.iter().map(|p| p[j]).chain(std::iter::once(1.0)).collect();
            c.sort_by(|a, b| a.total_cmp(b));
            c.dedup();
            c
        })
        .collect();
    let corners: u128 = axes.iter().map(|a| a.len() as u128).product();
    let best = if corners <= DENSE_CORNERS {
        exact_discrepancy(points, &axes)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ effort as u64);
        let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(2 * effort);
        for _ in 0..effort {
            candidates.push(axes.iter().map(|a| a[rng.gen_range(0..a.len())]).collect());
        }
        for _ in 0..effort {
            candidates.push((0..n).map(|_| rng.gen::<f64>()).collect());
        }
        candidates
            .par_iter()
            .map(|b| box_discrepancy(points, b))
            .reduce(|| 0.0, f64::max)
    };
    Ok(best.clamp(0.0, 1.0))
}
