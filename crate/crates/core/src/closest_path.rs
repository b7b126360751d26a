//! The closest lattice path to a demonstration under a control set.
//!
//! States are (vertex, demonstration index) pairs arranged in layers by
//! index; every action advances the index by its segment count, so the
//! layer graph is acyclic and one sweep in index order settles all costs.
//! A state's cost is the worst subpath score along the best chain into it.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::SampledPath;
use crate::lattice::{apply_control_action, snap_to_lattice, ControlSet, LatticeVertex};
use crate::scoring::subpath_score_core;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosestPathResult {
    /// Worst pointwise distance of the returned chain's concatenation.
    pub score: f64,
    /// Global action indices in chain order.
    pub actions: Vec<usize>,
    /// Visited vertices, one more than actions.
    pub lattice_path: Vec<LatticeVertex>,
    /// States taken off a layer and expanded.
    pub states_expanded: usize,
}

/// One expanded state, recorded in processing order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub k: usize,
    pub vertex: LatticeVertex,
    pub cost: f64,
}

/// The vertex a search starts from: the demonstration's snapped start pose.
pub fn start_vertex(pd: &SampledPath, cs: &ControlSet) -> LatticeVertex {
    snap_to_lattice(&pd.start_pose(), &cs.lattice)
}

/// Upper bound on the optimal score from a greedy descent: at each state
/// take the action with the smallest subpath score (ties to the smaller
/// action index) and keep the running worst.
pub fn greedy_bound(pd: &SampledPath, cs: &ControlSet) -> Result<f64> {
    let cfg = &cs.lattice;
    let k_last = pd.len() - 1;
    let mut u = start_vertex(pd, cs);
    let mut k = 0usize;
    let mut bound = 0.0f64;
    while k < k_last {
        let group = cs.for_heading(u.itheta);
        if group.is_empty() {
            return Err(Error::Stuck(u.itheta));
        }
        let mut best: Option<(f64, usize)> = None;
        for (j, c) in group.iter().enumerate() {
            let s = subpath_score_core(pd, cfg, u, c, k, None).expect("unbounded score");
            if best.map_or(true, |(bs, _)| s < bs) {
                best = Some((s, j));
            }
        }
        let (s, j) = best.expect("non-empty group");
        bound = bound.max(s);
        let (v, nk) = apply_control_action(&u, &group[j], k)?;
        u = v;
        k = nk;
    }
    Ok(bound)
}

struct Incumbent {
    cost: f64,
    terminal: LatticeVertex,
    pred: (LatticeVertex, usize),
    action: usize,
}

fn search(
    pd: &SampledPath,
    cs: &ControlSet,
    bound: Option<f64>,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<ClosestPathResult> {
    let cfg = &cs.lattice;
    let k_last = pd.len() - 1;
    let u0 = start_vertex(pd, cs);
    let mut bound_now = match bound {
        Some(b) => b,
        None => greedy_bound(pd, cs)?,
    };
    let mut layers: Vec<BTreeSet<LatticeVertex>> = vec![BTreeSet::new(); k_last];
    let mut costs: HashMap<(LatticeVertex, usize), f64> = HashMap::new();
    let mut preds: HashMap<(LatticeVertex, usize), (LatticeVertex, usize, usize)> = HashMap::new();
    layers[0].insert(u0);
    costs.insert((u0, 0), 0.0);
    let mut incumbent: Option<Incumbent> = None;
    let mut expanded = 0usize;
    for k in 0..k_last {
        let vertices: Vec<LatticeVertex> = layers[k].iter().copied().collect();
        for u in vertices {
            let g = costs[&(u, k)];
            // A state may have been enqueued before the bound tightened
            // past it; drop it at expansion time.
            if g > bound_now {
                continue;
            }
            expanded += 1;
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceEntry {
                    k,
                    vertex: u,
                    cost: g,
                });
            }
            for (j, c) in cs.for_heading(u.itheta).iter().enumerate() {
                let s = match subpath_score_core(pd, cfg, u, c, k, Some(bound_now)) {
                    Some(s) => s,
                    None => continue,
                };
                let cost = g.max(s);
                if cost > bound_now {
                    continue;
                }
                let (v, nk) = apply_control_action(&u, c, k)?;
                let action = cs.global_index(u.itheta, j);
                if nk >= k_last {
                    // Fully covered. The first candidate within the bound
                    // becomes the incumbent; afterwards only strict
                    // improvements replace it and the bound follows.
                    let accept = match &incumbent {
                        None => true,
                        Some(inc) => cost < inc.cost,
                    };
                    if accept {
                        bound_now = cost;
                        incumbent = Some(Incumbent {
                            cost,
                            terminal: v,
                            pred: (u, k),
                            action,
                        });
                    }
                } else {
                    let key = (v, nk);
                    if costs.get(&key).map_or(true, |&old| cost < old) {
                        costs.insert(key, cost);
                        preds.insert(key, (u, k, action));
                        layers[nk].insert(v);
                    }
                }
            }
        }
    }
    let inc = incumbent.ok_or(Error::NoPath)?;
    let mut actions = vec![inc.action];
    let mut vertices = vec![inc.terminal];
    let mut cursor = inc.pred;
    while cursor.1 > 0 {
        let (pv, pk, action) = preds[&cursor];
        vertices.push(cursor.0);
        actions.push(action);
        cursor = (pv, pk);
    }
    vertices.push(cursor.0);
    actions.reverse();
    vertices.reverse();
    Ok(ClosestPathResult {
        score: inc.cost,
        actions,
        lattice_path: vertices,
        states_expanded: expanded,
    })
}

/// Finds the chain of control actions whose concatenation has the smallest
/// whole-path score against `pd`, among chains from the snapped start that
/// cover the whole demonstration.
///
/// `bound` prunes states whose cost already exceeds it; when omitted the
/// greedy bound is used, which always admits at least one chain. A caller
/// bound below the optimum yields `NoPath`.
pub fn closest_path(
    pd: &SampledPath,
    cs: &ControlSet,
    bound: Option<f64>,
) -> Result<ClosestPathResult> {
    search(pd, cs, bound, None)
}

/// As `closest_path`, also recording every expanded state in order.
pub fn closest_path_traced(
    pd: &SampledPath,
    cs: &ControlSet,
    bound: Option<f64>,
) -> Result<(ClosestPathResult, Vec<TraceEntry>)> {
    let mut trace = Vec::new();
    let result = search(pd, cs, bound, Some(&mut trace))?;
    Ok((result, trace))
}

/// Exhaustive reference search: depth-first over whole action chains,
/// scored only through the whole-path score on the concatenation so the
/// result is independent of the subpath decomposition. Prefix scores are
/// used purely as a pruning bound. `Explosion` reports a blown budget.
pub fn brute_force_closest(
    pd: &SampledPath,
    cs: &ControlSet,
    node_budget: usize,
) -> Result<(f64, Vec<usize>)> {
    struct Dfs<'a> {
        pd: &'a SampledPath,
        cs: &'a ControlSet,
        k_last: usize,
        budget: usize,
        nodes: usize,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Dfs<'_> {
        fn prefix_worst(&self, points: &[[f64; 2]]) -> f64 {
            let upto = points.len().min(self.pd.len());
            let mut worst = 0.0f64;
            for i in 0..upto {
                let d = crate::geometry::dist(self.pd.points[i], points[i]);
                if d > worst {
                    worst = d;
                }
            }
            worst
        }

        fn go(
            &mut self,
            u: LatticeVertex,
            chain: &mut Vec<usize>,
            points: &mut Vec<[f64; 2]>,
        ) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Explosion);
            }
            let worst = self.prefix_worst(points);
            if let Some((bs, _)) = &self.best {
                // The whole-path score of any extension is at least the
                // prefix score, so equal-or-worse prefixes cannot win.
                if worst >= *bs {
                    return Ok(());
                }
            }
            if points.len() - 1 >= self.k_last {
                let concat = SampledPath::from_points(self.pd.delta, points.clone())?;
                let score = crate::scoring::score_paths(self.pd, &concat)?;
                if self.best.as_ref().map_or(true, |(bs, _)| score < *bs) {
                    self.best = Some((score, chain.clone()));
                }
                return Ok(());
            }
            let cs = self.cs;
            let cfg = &cs.lattice;
            for (j, c) in cs.for_heading(u.itheta).iter().enumerate() {
                let (v, _) = apply_control_action(&u, c, 0)?;
                let depth = points.len();
                let base = crate::lattice::vertex_pose(&u, cfg).position();
                for m in 1..c.n_segments {
                    let q = c.path.points[m];
                    points.push([base[0] + q[0], base[1] + q[1]]);
                }
                points.push(crate::lattice::vertex_pose(&v, cfg).position());
                chain.push(cs.global_index(u.itheta, j));
                self.go(v, chain, points)?;
                chain.pop();
                points.truncate(depth);
            }
            Ok(())
        }
    }
    let u0 = start_vertex(pd, cs);
    let mut dfs = Dfs {
        pd,
        cs,
        k_last: pd.len() - 1,
        budget: node_budget,
        nodes: 0,
        best: None,
    };
    let mut chain = Vec::new();
    let mut points = vec![crate::lattice::vertex_pose(&u0, &cs.lattice).position()];
    dfs.go(u0, &mut chain, &mut points)?;
    dfs.best.ok_or(Error::NoPath)
}
