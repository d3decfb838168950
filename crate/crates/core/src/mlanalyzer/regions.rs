use serde::{Deserialize, Serialize};

use crate::mlcomp::{Label, LabeledSet};

pub const DEFAULT_LINK_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    Cluster,
    /// A single isolated misclassification.
    CornerCase,
}

/// Axis-aligned box around a cluster of misclassified abstract points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub members: Vec<Vec<f64>>,
    pub tag: RegionTag,
}

impl Region {
    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// Sampled points whose label differs from the ground truth.
pub fn misclassified(points: &LabeledSet, truth: impl Fn(&[f64]) -> Label) -> Vec<Vec<f64>> {
    points
        .items
        .iter()
        .filter(|(a, y)| truth(&a.0) != *y)
        .map(|(a, _)| a.0.clone())
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn mean_nn_spacing(points: &[&Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let total: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| dist(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / points.len() as f64
}

/// Single-linkage clusters of `points` (Euclidean distance `<= link_radius`),
/// each wrapped in its bounding box padded by half the mean nearest-neighbor
/// spacing and clamped to the unit cube.
///
/// Clusters are padded with their own spacing; singletons use the spacing of
/// the whole point set. Regions are ordered by their first member's index.
pub fn extract_regions(points: &[Vec<f64>], link_radius: f64) -> Vec<Region> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if dist(&points[i], &points[j]) <= link_radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    let global_pad = 0.5 * mean_nn_spacing(&points.iter().collect::<Vec<_>>());

    groups
        .into_iter()
        .map(|(_, idx)| {
            let members: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
            let dim = members[0].len();
            let pad = if members.len() > 1 {
                0.5 * mean_nn_spacing(&members.iter().collect::<Vec<_>>())
            } else {
                global_pad
            };
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for m in &members {
                for j in 0..dim {
                    lo[j] = lo[j].min(m[j]);
                    hi[j] = hi[j].max(m[j]);
                }
            }
            for j in 0..dim {
                lo[j] = (lo[j] - pad).max(0.0);
                hi[j] = (hi[j] + pad).min(1.0);
            }
            let tag = if members.len() == 1 { RegionTag::CornerCase } else { RegionTag::Cluster };
            Region { lo, hi, members, tag }
        })
        .collect()
}
