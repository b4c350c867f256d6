use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{CostGraph, TimeField};
use crate::colourings::EdgeWeights;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Entry {
    time: f64,
    node: usize,
}

// Min-heap on (time, node): ties are settled lowest index first so that the
// settle order, and hence any early exit, is deterministic.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}

fn check_sources<G: CostGraph>(g: &G, sources: &[usize]) -> Result<()> {
    if sources.is_empty() {
        return Err(Error::Empty("source set"));
    }
    let n = g.grid().node_count();
    if let Some(&bad) = sources.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidGrid(format!("source node {bad} outside grid of {n} nodes")));
    }
    Ok(())
}

/// Dijkstra from `sources`; `stop(node, time)` is consulted as each node is
/// settled and ends the search when it returns true. Nodes never settled keep `+inf`.
pub fn shortest_time_until<G: CostGraph>(
    g: &G,
    sources: &[usize],
    mut stop: impl FnMut(usize, f64) -> bool,
) -> Result<TimeField> {
    check_sources(g, sources)?;
    let n = g.grid().node_count();
    let mut time = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        time[s] = 0.0;
        heap.push(Entry { time: 0.0, node: s });
    }
    while let Some(Entry { time: t, node: u }) = heap.pop() {
        if done[u] || t > time[u] {
            continue;
        }
        done[u] = true;
        if stop(u, t) {
            break;
        }
        g.visit_edges(u, |v, w| {
            let cand = t + w;
            if !done[v] && cand < time[v] {
                time[v] = cand;
                heap.push(Entry { time: cand, node: v });
            }
        });
    }
    // Tentative labels of unsettled nodes are upper bounds, not distances.
    for (t, d) in time.iter_mut().zip(&done) {
        if !d {
            *t = f64::INFINITY;
        }
    }
    let mut src = sources.to_vec();
    src.sort_unstable();
    src.dedup();
    Ok(TimeField::new(g.grid().clone(), time, src))
}

/// Full multi-source shortest travel time field.
pub fn shortest_time<G: CostGraph>(g: &G, sources: &[usize]) -> Result<TimeField> {
    shortest_time_until(g, sources, |_, _| false)
}

/// Travel times from `sources` to each of `targets`, stopping once all are settled.
pub fn times_to_targets<G: CostGraph>(g: &G, sources: &[usize], targets: &[usize]) -> Result<Vec<f64>> {
    let n = g.grid().node_count();
    if let Some(&bad) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::InvalidGrid(format!("target node {bad} outside grid of {n} nodes")));
    }
    let mut pending = vec![false; n];
    let mut left = 0usize;
    for &t in targets {
        if !pending[t] {
            pending[t] = true;
            left += 1;
        }
    }
    let tf = shortest_time_until(g, sources, |u, _| {
        if pending[u] {
            pending[u] = false;
            left -= 1;
        }
        left == 0
    })?;
    Ok(targets.iter().map(|&t| tf.times()[t]).collect())
}

/// Travel time between two points, each snapped to its nearest grid node.
pub fn point_time<G: CostGraph>(g: &G, x: &[f64], y: &[f64]) -> Result<f64> {
    let grid = g.grid();
    let snap = |p: &[f64]| {
        grid.nearest_node(p)
            .ok_or_else(|| Error::Geometry(format!("point {p:?} lies outside the grid")))
    };
    let (a, b) = (snap(x)?, snap(y)?);
    Ok(times_to_targets(g, &[a], &[b])?[0])
}

/// Lattice passage times from `source` to each target vertex.
pub fn lattice_shortest_time(weights: &EdgeWeights, source: usize, targets: &[usize]) -> Result<Vec<f64>> {
    times_to_targets(weights, &[source], targets)
}
