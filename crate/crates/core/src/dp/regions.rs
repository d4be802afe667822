use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::grid::SimplexGrid;
use super::solve::{Action, GridSolution};

/// Stop and continue sets with their connected components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStructure {
    pub stop: Vec<usize>,
    pub cont: Vec<usize>,
    pub stop_components: Vec<Vec<usize>>,
    pub continue_components: Vec<Vec<usize>>,
    /// Component id per grid point: stop components first, then continue.
    pub component_id: Vec<usize>,
}

/// Connected components of `set` under grid adjacency, in order of their
/// smallest member.
pub fn components(set: &[usize], grid: &SimplexGrid) -> Vec<Vec<usize>> {
    let member: HashSet<usize> = set.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &start in set {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in grid.neighbors(i) {
                if member.contains(&j) && seen.insert(j) {
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn regions_from_policy(policy: &[Action], grid: &SimplexGrid) -> RegionStructure {
    let stop: Vec<usize> = (0..policy.len()).filter(|&i| policy[i] == Action::Stop).collect();
    let cont: Vec<usize> = (0..policy.len()).filter(|&i| policy[i] == Action::Continue).collect();
    let stop_components = components(&stop, grid);
    let continue_components = components(&cont, grid);
    let mut component_id = vec![0; policy.len()];
    for (k, comp) in stop_components.iter().chain(&continue_components).enumerate() {
        for &i in comp {
            component_id[i] = k;
        }
    }
    RegionStructure {
        stop,
        cont,
        stop_components,
        continue_components,
        component_id,
    }
}

/// Stop set, continue set and their components.
pub fn extract_regions(sol: &GridSolution, grid: &SimplexGrid) -> RegionStructure {
    regions_from_policy(&sol.policy, grid)
}

/// Pairs of region points whose midpoint has no nearest grid point inside
/// the region.
///
/// Midpoints of grid points generally sit halfway between lattice points, so
/// several grid points can be nearest; the pair passes if any of them lies in
/// the region.
pub fn convexity_check(region: &[usize], grid: &SimplexGrid) -> Vec<(usize, usize)> {
    let member: HashSet<usize> = region.iter().copied().collect();
    let mut out = Vec::new();
    for (a, &p) in region.iter().enumerate() {
        for &q in &region[a + 1..] {
            let sum: Vec<u32> = grid
                .counts(p)
                .iter()
                .zip(grid.counts(q))
                .map(|(x, y)| x + y)
                .collect();
            if !nearest_to_half(&sum, grid).iter().any(|i| member.contains(i)) {
                out.push((p, q));
            }
        }
    }
    out
}

/// Grid points nearest to the point with doubled counts `sum`.
///
/// Odd coordinates are half-integers; the nearest lattice points round half
/// of them up and half down.
fn nearest_to_half(sum: &[u32], grid: &SimplexGrid) -> Vec<usize> {
    let odd: Vec<usize> = (0..sum.len()).filter(|&i| sum[i] % 2 == 1).collect();
    let base: Vec<u32> = sum.iter().map(|s| s / 2).collect();
    let ups = odd.len() / 2;
    let mut out = Vec::new();
    let h = odd.len();
    for mask in 0u32..(1u32 << h) {
        if mask.count_ones() as usize != ups {
            continue;
        }
        let mut c = base.clone();
        for (k, &i) in odd.iter().enumerate() {
            if mask & (1 << k) != 0 {
                c[i] += 1;
            }
        }
        if let Some(idx) = grid.index_of(&c) {
            out.push(idx);
        }
    }
    out
}

/// Grid lines through vertex `v` (zero-based), each ordered from the
/// opposite face towards the vertex. The vertex ends every line.
pub fn grid_lines(grid: &SimplexGrid, v: usize) -> Vec<Vec<usize>> {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let apex = grid.vertex(v);
    let mut lines: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for i in 0..grid.len() {
        if i == apex {
            continue;
        }
        let c = grid.counts(i);
        let rest: Vec<u32> = (0..c.len()).filter(|&k| k != v).map(|k| c[k]).collect();
        let g = rest.iter().fold(0, |a, &b| gcd(a, b));
        let dir: Vec<u32> = rest.iter().map(|r| r / g).collect();
        lines.entry(dir).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = lines
        .into_values()
        .map(|mut pts| {
            pts.sort_by_key(|&i| grid.counts(i)[v]);
            pts.push(apex);
            pts
        })
        .collect();
    out.sort();
    out
}

/// Number of policy switches along a sequence of grid points.
pub fn switches(policy: &[Action], line: &[usize]) -> usize {
    line.windows(2)
        .filter(|w| policy[w[0]] != policy[w[1]])
        .count()
}

/// Largest number of policy switches on any grid line through vertex `v`.
pub fn line_crossing_check(policy: &[Action], grid: &SimplexGrid, v: usize) -> usize {
    grid_lines(grid, v)
        .iter()
        .map(|l| switches(policy, l))
        .max()
        .unwrap_or(0)
}
