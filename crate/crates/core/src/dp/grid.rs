use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::BeliefState;

/// How an off-grid belief is mapped back onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Nearest grid point; ties go to the lexicographically smaller
    /// barycentric coordinates.
    #[default]
    Nearest,
    /// Piecewise-linear interpolation on the Freudenthal triangulation.
    Interpolate,
}

/// Regular grid on the belief simplex: all beliefs whose coordinates are
/// multiples of `1/m`.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    dim: usize,
    resolution: usize,
    counts: Vec<Vec<u32>>,
    points: Vec<BeliefState>,
    adjacency: Vec<Vec<usize>>,
    index: HashMap<Vec<u32>, usize>,
}

fn compositions(dim: usize, m: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, left: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(prefix, left - k, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(dim), m, dim, &mut out);
    out
}

/// `c / m`, nudged by single ulps so the floating-point sum is exactly one.
fn grid_point(c: &[u32], m: usize) -> Vec<f64> {
    let exact: Vec<f64> = c.iter().map(|&n| n as f64 / m as f64).collect();
    for k in (0..c.len()).filter(|&k| c[k] > 0) {
        let mut v = exact.clone();
        for _ in 0..4 {
            let s: f64 = v.iter().sum();
            if s == 1.0 {
                return v;
            }
            v[k] = if s > 1.0 { v[k].next_down() } else { v[k].next_up() };
        }
    }
    exact
}

/// Grid of all compositions of `m` into `dim` parts, in lexicographic
/// order, with neighbors at barycentric L1 distance 2.
pub fn build_grid(dim: usize, m: usize) -> Result<SimplexGrid> {
    if m == 0 {
        return Err(invalid("resolution", "must be at least 1"));
    }
    if dim < 2 {
        return Err(invalid("dim", "need at least 2 states"));
    }
    let counts = compositions(dim, m as u32);
    let index: HashMap<Vec<u32>, usize> =
        counts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let points = counts
        .iter()
        .map(|c| BeliefState::from_raw(grid_point(c, m)))
        .collect();
    let adjacency = counts
        .iter()
        .map(|c| {
            let mut nb = Vec::new();
            for i in 0..dim {
                if c[i] == 0 {
                    continue;
                }
                for j in 0..dim {
                    if i == j {
                        continue;
                    }
                    let mut n = c.clone();
                    n[i] -= 1;
                    n[j] += 1;
                    nb.push(index[&n]);
                }
            }
            nb.sort_unstable();
            nb
        })
        .collect();
    Ok(SimplexGrid {
        dim,
        resolution: m,
        counts,
        points,
        adjacency,
        index,
    })
}

impl SimplexGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BeliefState] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &BeliefState {
        &self.points[i]
    }

    pub fn counts(&self, i: usize) -> &[u32] {
        &self.counts[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    /// Index of the unit vector `e_{v+1}`.
    pub fn vertex(&self, v: usize) -> usize {
        let mut c = vec![0; self.dim];
        c[v] = self.resolution as u32;
        self.index[&c]
    }

    /// Nearest grid point in Euclidean distance.
    pub fn nearest(&self, pi: &[f64]) -> usize {
        let m = self.resolution as f64;
        if self.dim == 2 {
            // Points are ordered by increasing first count.
            let s = (pi[0] * m).clamp(0.0, m);
            let lo = s.floor();
            let n = if s - lo > 0.5 + 1e-12 { lo + 1.0 } else { lo };
            return (n as usize).min(self.resolution);
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, c) in self.counts.iter().enumerate() {
            let d: f64 = c
                .iter()
                .zip(pi)
                .map(|(&n, p)| {
                    let e = p - n as f64 / m;
                    e * e
                })
                .sum();
            if d < best_d - 1e-14 {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Barycentric weights of the Freudenthal simplex containing `pi`.
    ///
    /// Works in cumulative coordinates `s_j = m (π_1 + ... + π_j)`, where the
    /// grid is the integer lattice restricted to non-decreasing sequences.
    pub fn interpolation(&self, pi: &[f64]) -> Vec<(usize, f64)> {
        let m = self.resolution as f64;
        let k = self.dim - 1;
        let mut s = Vec::with_capacity(k);
        let mut acc = 0.0;
        for p in &pi[..k] {
            acc += p;
            s.push((acc * m).clamp(0.0, m));
        }
        let base: Vec<f64> = s.iter().map(|v| v.floor().min(m)).collect();
        let frac: Vec<f64> = s.iter().zip(&base).map(|(v, b)| v - b).collect();
        let mut order: Vec<usize> = (0..k).collect();
        // Larger fraction first; equal fractions take the later coordinate
        // first so every vertex stays a non-decreasing sequence.
        order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(b.cmp(&a)));
        let mut cum: Vec<u32> = base.iter().map(|&b| b as u32).collect();
        let mut out = Vec::with_capacity(k + 1);
        let mut prev = 1.0;
        for step in 0..=k {
            let f = if step < k { frac[order[step]] } else { 0.0 };
            let w = prev - f;
            if w > 1e-15 {
                out.push((self.cumulative_index(&cum), w));
            }
            if step < k {
                cum[order[step]] += 1;
            }
            prev = f;
        }
        out
    }

    fn cumulative_index(&self, cum: &[u32]) -> usize {
        let m = self.resolution as u32;
        let mut c = Vec::with_capacity(self.dim);
        let mut prev = 0;
        for &v in cum {
            c.push(v - prev);
            prev = v;
        }
        c.push(m - prev);
        self.index[&c]
    }

    /// Grid weights representing `pi` under the chosen projection.
    pub fn project(&self, pi: &[f64], projection: Projection) -> Vec<(usize, f64)> {
        match projection {
            Projection::Nearest => vec![(self.nearest(pi), 1.0)],
            Projection::Interpolate => self.interpolation(pi),
        }
    }

    /// Evaluates a grid function at an arbitrary belief.
    pub fn evaluate(&self, values: &[f64], pi: &[f64], projection: Projection) -> f64 {
        self.project(pi, projection)
            .iter()
            .map(|(i, w)| w * values[*i])
            .sum()
    }
}
