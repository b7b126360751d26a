//! Reachability-preserving control-set reduction baseline.
//!
//! Scans the dense set in increasing arc length and discards every action
//! whose exact endpoint vertex the already-kept actions can reach within a
//! multiplicative arc-length factor. What survives spans the same lattice
//! vertices as the dense set while allowing each replaced action to cost at
//! most `factor` times its original length. This is an approximation of the
//! incremental algorithm it stands in for — a sequential scan with a bounded
//! Dijkstra oracle — not a faithful port of that algorithm's bookkeeping.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::lattice::{apply_control_action, ControlSet, LatticeVertex};

/// Absolute slack on the factor bound so exact decompositions whose arc
/// lengths sum with rounding error still count as within the factor.
const ARC_SUM_SLACK: f64 = 1e-9;

/// Settled-vertex cap for the replacement search. Huge factors make the
/// arc-length bound vacuous, and an unreachable endpoint would otherwise
/// be chased forever. Running over the budget counts as unreachable,
/// which keeps the candidate — always safe, never wrong about a discard.
const DIJKSTRA_NODE_BUDGET: usize = 200_000;

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: LatticeVertex,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.vertex.cmp(&other.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded Dijkstra over the kept actions: can the mask reach `target`
/// from the origin vertex at `start_heading` with total arc length within
/// `bound`? Expansion stops at the bound, so the search space is the arc
/// ball around the start.
fn kept_set_reaches(
    dense: &ControlSet,
    kept: &[bool],
    start_heading: usize,
    target: LatticeVertex,
    bound: f64,
) -> bool {
    let start = LatticeVertex::new(0, 0, start_heading);
    if start == target {
        return true;
    }
    let mut best: HashMap<LatticeVertex, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut settled = 0usize;
    best.insert(start, 0.0);
    heap.push(Reverse(HeapEntry {
        dist: 0.0,
        vertex: start,
    }));
    while let Some(Reverse(entry)) = heap.pop() {
        if entry.vertex == target {
            return true;
        }
        if best.get(&entry.vertex).is_some_and(|&d| d < entry.dist) {
            continue; // stale heap entry
        }
        settled += 1;
        if settled > DIJKSTRA_NODE_BUDGET {
            return false;
        }
        let group = dense.for_heading(entry.vertex.itheta);
        for (j, action) in group.iter().enumerate() {
            if !kept[dense.global_index(entry.vertex.itheta, j)] {
                continue;
            }
            let next_dist = entry.dist + action.arc_length;
            if next_dist > bound {
                continue;
            }
            let (next, _) = apply_control_action(&entry.vertex, action, 0)
                .expect("group actions start at the group heading");
            if best.get(&next).is_none_or(|&d| next_dist < d) {
                best.insert(next, next_dist);
                heap.push(Reverse(HeapEntry {
                    dist: next_dist,
                    vertex: next,
                }));
            }
        }
    }
    false
}

/// Global indices of the shortest straight action per heading, for headings
/// that have any straight. These are pinned into the reduced set so the
/// result always moves forward in every heading.
fn shortest_straight_indices(dense: &ControlSet) -> Vec<usize> {
    let mut pinned = Vec::new();
    for h in 0..dense.lattice.headings.len() {
        let group = dense.for_heading(h);
        let best = (0..group.len())
            .filter(|&j| group[j].is_straight(&dense.lattice))
            .min_by(|&a, &b| group[a].arc_length.total_cmp(&group[b].arc_length));
        if let Some(j) = best {
            pinned.push(dense.global_index(h, j));
        }
    }
    pinned
}

/// Reduce a dense control set by the arc-length-factor rule: visit actions
/// in increasing arc length (ties by index) and discard an action exactly
/// when the actions kept so far already reach its endpoint vertex — same
/// position and same heading — with total arc length at most `factor`
/// times the action's own. Shortest straights are always kept.
///
/// `factor` must be at least 1; anything smaller could discard actions
/// nothing can replace.
pub fn reduce_control_set_dl(dense: &ControlSet, factor: f64) -> ControlSet {
    assert!(factor >= 1.0, "reduction factor must be >= 1");
    let n = dense.len();
    let mut kept = vec![false; n];
    for i in shortest_straight_indices(dense) {
        kept[i] = true;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        dense
            .get(a)
            .arc_length
            .total_cmp(&dense.get(b).arc_length)
            .then(a.cmp(&b))
    });
    for i in order {
        if kept[i] {
            continue; // pinned straights
        }
        let c = dense.get(i);
        let target = LatticeVertex::new(c.delta_ix, c.delta_iy, c.end_heading);
        let bound = factor * c.arc_length + ARC_SUM_SLACK;
        if !kept_set_reaches(dense, &kept, c.start_heading, target, bound) {
            kept[i] = true;
        }
    }
    let indices: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    dense
        .subset(&indices)
        .expect("kept indices come from the dense set")
}

/// Endpoint vertices reachable from the origin vertex at `start_heading`
/// by chaining actions, where every expanded vertex stays within
/// `|ix|,|iy| <= roam` cells. Used to compare reachability between a dense
/// set and its reduction: the reduction's replacement chains may wander
/// outside the window of interest, so callers give the reduced set extra
/// roam beyond the comparison window.
pub fn reachable_vertices(
    set: &ControlSet,
    start_heading: usize,
    roam: i64,
) -> std::collections::BTreeSet<LatticeVertex> {
    let mut seen = std::collections::BTreeSet::new();
    let start = LatticeVertex::new(0, 0, start_heading);
    let mut frontier = vec![start];
    seen.insert(start);
    while let Some(v) = frontier.pop() {
        if v.ix.abs() > roam || v.iy.abs() > roam {
            continue; // recorded, but not expanded
        }
        for action in set.for_heading(v.itheta) {
            let (next, _) = apply_control_action(&v, action, 0)
                .expect("group actions start at the group heading");
            if seen.insert(next) {
                frontier.push(next);
            }
        }
    }
    seen
}
