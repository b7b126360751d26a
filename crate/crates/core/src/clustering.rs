//! K-means over arc-length sampled paths of equal length.
//!
//! Distances, seeding, and mean updates all walk paths in one canonical
//! content order, so the result is invariant to the input permutation,
//! bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SampledPath;

/// Root mean squared pointwise distance between two equally long paths.
pub fn path_distance(a: &SampledPath, b: &SampledPath) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let mut acc = 0.0f64;
    for (p, q) in a.points.iter().zip(b.points.iter()) {
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        acc += dx * dx + dy * dy;
    }
    Ok((acc / a.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// Pointwise mean path of every cluster.
    pub means: Vec<SampledPath>,
    /// Cluster index per input path, in input order.
    pub assignments: Vec<usize>,
    /// The clustered paths themselves, aligned with `assignments`, so a
    /// fitted model is self-contained for downstream learning.
    pub paths: Vec<SampledPath>,
    /// Sum of squared distances to assigned means.
    pub inertia: f64,
    /// Inertia after every assignment pass.
    pub inertia_history: Vec<f64>,
}

impl ClusterModel {
    /// Indices of the paths assigned to one cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Total order on path content: by length, then coordinate by coordinate.
fn canonical_order(paths: &[SampledPath]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&paths[a], &paths[b]);
        pa.len().cmp(&pb.len()).then_with(|| {
            for (p, q) in pa.points.iter().zip(pb.points.iter()) {
                let c = p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    order
}

fn seed_centers(
    paths: &[SampledPath],
    order: &[usize],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SampledPath>> {
    let n = paths.len();
    let mut centers = vec![paths[order[rng.gen_range(0..n)]].clone()];
    while centers.len() < k {
        let mut weights = Vec::with_capacity(n);
        let mut total = 0.0f64;
        for &i in order {
            let mut best = f64::INFINITY;
            for c in &centers {
                best = best.min(path_distance(&paths[i], c)?);
            }
            let w = best * best;
            total += w;
            weights.push(w);
        }
        if total <= 0.0 {
            // Every path already coincides with a center; duplicates are
            // the only fill left.
            centers.push(paths[order[0]].clone());
            continue;
        }
        let r = rng.gen::<f64>() * total;
        let mut acc = 0.0f64;
        let mut chosen = order[order.len() - 1];
        for (w, &i) in weights.iter().zip(order.iter()) {
            acc += w;
            if acc >= r {
                chosen = i;
                break;
            }
        }
        centers.push(paths[chosen].clone());
    }
    Ok(centers)
}

fn assign_step(
    paths: &[SampledPath],
    order: &[usize],
    centers: &[SampledPath],
) -> Result<(Vec<usize>, f64)> {
    let mut assignments = vec![0usize; paths.len()];
    let mut inertia = 0.0f64;
    for &i in order {
        let mut best = f64::INFINITY;
        let mut best_c = 0usize;
        for (ci, c) in centers.iter().enumerate() {
            let d = path_distance(&paths[i], c)?;
            if d < best {
                best = d;
                best_c = ci;
            }
        }
        assignments[i] = best_c;
        inertia += best * best;
    }
    Ok((assignments, inertia))
}

fn update_step(
    paths: &[SampledPath],
    order: &[usize],
    assignments: &[usize],
    centers: &[SampledPath],
    delta: f64,
) -> Result<Vec<SampledPath>> {
    let k = centers.len();
    let len = paths[0].len();
    let mut sums = vec![vec![[0.0f64; 2]; len]; k];
    let mut counts = vec![0usize; k];
    for &i in order {
        let c = assignments[i];
        counts[c] += 1;
        for (acc, p) in sums[c].iter_mut().zip(paths[i].points.iter()) {
            acc[0] += p[0];
            acc[1] += p[1];
        }
    }
    let mut next = Vec::with_capacity(k);
    for c in 0..k {
        if counts[c] == 0 {
            // Re-seed an emptied cluster on the path farthest from its
            // assigned center; scanned in canonical order, strict maximum.
            let mut far: Option<(f64, usize)> = None;
            for &i in order {
                let d = path_distance(&paths[i], &centers[assignments[i]])?;
                if far.map_or(true, |(fd, _)| d > fd) {
                    far = Some((d, i));
                }
            }
            match far {
                Some((d, i)) if d > 0.0 => next.push(paths[i].clone()),
                _ => next.push(centers[c].clone()),
            }
            continue;
        }
        let scale = 1.0 / counts[c] as f64;
        let pts: Vec<[f64; 2]> = sums[c]
            .iter()
            .map(|p| [p[0] * scale, p[1] * scale])
            .collect();
        next.push(SampledPath::from_points(delta, pts)?);
    }
    Ok(next)
}

/// Clusters equally long sampled paths with k-means++ seeding. Stops when
/// assignments stabilize or after `max_iter` passes.
pub fn kmeans_paths(
    paths: &[SampledPath],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel> {
    if paths.is_empty() || k == 0 {
        return Err(Error::InvalidParameter(
            "clustering needs at least one path and one cluster".into(),
        ));
    }
    if k > paths.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot form {k} clusters from {} paths",
            paths.len()
        )));
    }
    let len = paths[0].len();
    let delta = paths[0].delta;
    for p in paths {
        if p.len() != len {
            return Err(Error::LengthMismatch(len, p.len()));
        }
    }
    let order = canonical_order(paths);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(paths, &order, k, &mut rng)?;
    let mut history = Vec::new();
    let mut prev: Option<Vec<usize>> = None;
    let mut inertia = f64::INFINITY;
    for _ in 0..max_iter {
        let (assignments, pass_inertia) = assign_step(paths, &order, &centers)?;
        history.push(pass_inertia);
        inertia = pass_inertia;
        if prev.as_ref() == Some(&assignments) {
            break;
        }
        centers = update_step(paths, &order, &assignments, &centers, delta)?;
        prev = Some(assignments);
    }
    let assignments = prev.expect("at least one pass");
    Ok(ClusterModel {
        k,
        means: centers,
        assignments,
        paths: paths.to_vec(),
        inertia,
        inertia_history: history,
    })
}
