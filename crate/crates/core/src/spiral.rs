//! Cubic spirals and dense control set generation.
//!
//! A cubic spiral has curvature `kappa(s) = a + b*s + c*s^2 + d*s^3` over
//! arc length `[0, sf]`. Actions are generated with zero curvature at both
//! ends so that any two primitives chain without a curvature jump, which
//! leaves `(b, c, sf)` free and `d` pinned by `kappa(sf) = 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, normalize_angle, Pose2D, SampledPath};
use crate::lattice::{ControlAction, ControlSet, LatticeConfig};

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Endpoint tolerance of the boundary value solver, position and heading.
pub const BVP_TOLERANCE: f64 = 1e-3;
/// Combined residual threshold at which Newton iteration stops.
const RESIDUAL_TOL: f64 = 1e-6;
const MAX_NEWTON_ITERS: usize = 50;
/// Composite Simpson interval count used while solving (129 nodes).
const SIMPSON_INTERVALS: usize = 128;

/// Gauss-Legendre 5-point nodes and weights on [-1, 1], used to integrate
/// positions between consecutive arc-length samples.
const GL5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

/// A cubic curvature spiral with fixed arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicSpiral {
    /// Curvature polynomial coefficients `[a, b, c, d]`.
    pub coeffs: [f64; 4],
    /// Total arc length in meters.
    pub sf: f64,
}

impl CubicSpiral {
    pub fn kappa(&self, s: f64) -> f64 {
        let [a, b, c, d] = self.coeffs;
        a + s * (b + s * (c + s * d))
    }

    /// Heading at arc length `s` (closed-form integral of the curvature).
    pub fn theta(&self, s: f64) -> f64 {
        let [a, b, c, d] = self.coeffs;
        s * (a + s * (b / 2.0 + s * (c / 3.0 + s * d / 4.0)))
    }

    /// Largest absolute curvature over the spiral, from the cubic's
    /// endpoints and interior critical points.
    pub fn max_abs_kappa(&self) -> f64 {
        let [_, b, c, d] = self.coeffs;
        let mut best = self.kappa(0.0).abs().max(self.kappa(self.sf).abs());
        // kappa'(s) = b + 2c s + 3d s^2
        if d.abs() > 1e-15 {
            let disc = 4.0 * c * c - 12.0 * d * b;
            if disc >= 0.0 {
                let r = disc.sqrt();
                for root in [(-2.0 * c + r) / (6.0 * d), (-2.0 * c - r) / (6.0 * d)] {
                    if root > 0.0 && root < self.sf {
                        best = best.max(self.kappa(root).abs());
                    }
                }
            }
        } else if c.abs() > 1e-15 {
            let root = -b / (2.0 * c);
            if root > 0.0 && root < self.sf {
                best = best.max(self.kappa(root).abs());
            }
        }
        best
    }

    /// Endpoint pose by composite Simpson integration with `intervals` steps.
    pub fn endpoint_with(&self, intervals: usize) -> Pose2D {
        let n = intervals.max(2) & !1usize;
        let h = self.sf / n as f64;
        let mut x = 0.0;
        let mut y = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (s, c) = self.theta(h * i as f64).sin_cos();
            x += w * c;
            y += w * s;
        }
        let scale = h / 3.0;
        Pose2D::new(x * scale, y * scale, self.theta(self.sf))
    }

    pub fn endpoint(&self) -> Pose2D {
        self.endpoint_with(SIMPSON_INTERVALS)
    }

    /// Samples the spiral at arc-length steps of `delta` with the leftover
    /// rule: a tail of at least `delta/2` becomes its own final segment,
    /// a shorter tail is merged into the last one. The final sample always
    /// sits at `sf`.
    pub fn sample(&self, delta: f64) -> Result<SampledPath> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        if self.sf < delta / 2.0 - 1e-9 {
            return Err(Error::DegeneratePath(format!(
                "spiral length {:.4} shorter than delta/2",
                self.sf
            )));
        }
        let n_full = ((self.sf + 1e-9) / delta).floor() as usize;
        let leftover = (self.sf - n_full as f64 * delta).max(0.0);
        let append = leftover >= delta / 2.0 - 1e-9;
        let regular = if append {
            n_full
        } else {
            n_full.saturating_sub(1)
        };
        let mut arcs: Vec<f64> = (0..=regular).map(|i| i as f64 * delta).collect();
        arcs.push(self.sf);
        let mut points = Vec::with_capacity(arcs.len());
        let mut x = 0.0f64;
        let mut y = 0.0f64;
        points.push([0.0, 0.0]);
        for w in arcs.windows(2) {
            let half = (w[1] - w[0]) / 2.0;
            let mid = (w[1] + w[0]) / 2.0;
            for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
                let (si, ci) = self.theta(mid + half * node).sin_cos();
                x += weight * half * ci;
                y += weight * half * si;
            }
            points.push([x, y]);
        }
        SampledPath::from_points(delta, points)
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot =
            (col..3).max_by(|a, b| m[*a][col].abs().partial_cmp(&m[*b][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        r.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = r[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * out[k];
        }
        out[row] = acc / m[row][row];
    }
    Some(out)
}

fn spiral_from(b: f64, c: f64, sf: f64) -> CubicSpiral {
    // kappa(0) = 0 fixes a = 0; kappa(sf) = 0 fixes d.
    let d = -(b + c * sf) / (sf * sf);
    CubicSpiral {
        coeffs: [0.0, b, c, d],
        sf,
    }
}

fn residual(p: [f64; 3], target: &Pose2D) -> ([f64; 3], f64) {
    let sp = spiral_from(p[0], p[1], p[2]);
    let end = sp.endpoint();
    // The heading residual is deliberately unwrapped so extra full turns
    // count as error instead of aliasing away.
    let r = [end.x - target.x, end.y - target.y, end.theta - target.theta];
    let norm = r[0].abs() + r[1].abs() + r[2].abs();
    (r, norm)
}

/// Small-angle linearization used as the Newton starting point: with
/// `theta ~ 0`, `theta(sf)` and `y(sf)` are linear in `(b, c)`.
fn initial_params(target: &Pose2D, sf: f64) -> [f64; 3] {
    let a11 = sf * sf / 4.0;
    let a12 = sf * sf * sf / 12.0;
    let a21 = 7.0 * sf * sf * sf / 60.0;
    let a22 = sf * sf * sf * sf / 30.0;
    let det = a11 * a22 - a12 * a21;
    let b = (target.theta * a22 - target.y * a12) / det;
    let c = (target.y * a11 - target.theta * a21) / det;
    [b, c, sf]
}

fn newton_solve(target: &Pose2D, init: [f64; 3], min_sf: f64) -> Option<CubicSpiral> {
    let mut p = init;
    let (mut r, mut norm) = residual(p, target);
    for _ in 0..MAX_NEWTON_ITERS {
        if norm < RESIDUAL_TOL {
            return Some(spiral_from(p[0], p[1], p[2]));
        }
        let mut jac = [[0.0f64; 3]; 3];
        for col in 0..3 {
            let step = 1e-6 * (1.0 + p[col].abs());
            let mut hi = p;
            hi[col] += step;
            let mut lo = p;
            lo[col] -= step;
            if col == 2 {
                hi[2] = hi[2].max(min_sf);
                lo[2] = lo[2].max(min_sf * 0.5);
            }
            let (rh, _) = residual(hi, target);
            let (rl, _) = residual(lo, target);
            let denom = hi[col] - lo[col];
            for row in 0..3 {
                jac[row][col] = (rh[row] - rl[row]) / denom;
            }
        }
        let step = solve3(jac, r)?;
        let mut lambda = 1.0f64;
        let mut advanced = false;
        for _ in 0..10 {
            let mut cand = [
                p[0] - lambda * step[0],
                p[1] - lambda * step[1],
                (p[2] - lambda * step[2]).max(min_sf),
            ];
            if cand[2] > 1e3 {
                cand[2] = 1e3;
            }
            let (rc, nc) = residual(cand, target);
            if nc < norm {
                p = cand;
                r = rc;
                norm = nc;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    if norm < RESIDUAL_TOL {
        Some(spiral_from(p[0], p[1], p[2]))
    } else {
        None
    }
}

/// Solves the two-point boundary value problem: a cubic spiral from the
/// origin (heading and curvature zero) to `target`, with zero end curvature.
///
/// Fails with `NoConvergence` when damped Newton stalls on every starting
/// point, or `CurvatureExceeded` when the converged spiral needs more than
/// `kappa_max` anywhere along its length.
pub fn solve_spiral_bvp(target: &Pose2D, kappa_max: f64) -> Result<CubicSpiral> {
    if !(target.x > 0.0) {
        return Err(Error::InvalidParameter(
            "spiral target must have positive x".into(),
        ));
    }
    let chord = target.x.hypot(target.y);
    if target.theta.abs() < 1e-12 && target.y.abs() < 1e-12 {
        return Ok(CubicSpiral {
            coeffs: [0.0; 4],
            sf: target.x,
        });
    }
    let bend = target.theta.abs() + 2.0 * (target.y / chord).abs();
    let min_sf = 0.2 * chord;
    for mult in [1.0, 1.3, 1.8, 2.5, 3.5] {
        let sf0 = chord * (1.0 + 0.15 * bend * bend) * mult;
        if let Some(sp) = newton_solve(target, initial_params(target, sf0), min_sf) {
            if sp.max_abs_kappa() > kappa_max + 1e-9 {
                return Err(Error::CurvatureExceeded);
            }
            return Ok(sp);
        }
    }
    Err(Error::NoConvergence)
}

/// Generation parameters for the dense cone of control actions.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSetConfig {
    pub lattice: LatticeConfig,
    /// Endpoint range along the start heading, in meters (lattice-aligned).
    pub x_range: [f64; 2],
    /// Lateral endpoint range, in meters (lattice-aligned).
    pub y_range: [f64; 2],
    /// Allowed endpoint heading changes; each value also admits its
    /// reflection.
    pub theta_endpoints: Vec<f64>,
    pub kappa_max: f64,
    /// Arc-length sample step for action paths.
    pub delta: f64,
}

impl Default for DenseSetConfig {
    fn default() -> Self {
        DenseSetConfig {
            lattice: LatticeConfig::default(),
            x_range: [0.4, 4.0],
            y_range: [-2.0, 2.0],
            theta_endpoints: vec![
                0.0,
                (1.0f64 / 3.0).atan(),
                0.5f64.atan(),
                std::f64::consts::FRAC_PI_4,
                2.0f64.atan(),
                3.0f64.atan(),
            ],
            kappa_max: 0.5,
            delta: 0.1,
        }
    }
}

fn aligned(value: f64, cell: f64) -> bool {
    let r = value / cell;
    (r - r.round()).abs() < 1e-9
}

struct Candidate {
    ix: i64,
    iy: i64,
    end_heading: usize,
    local: Pose2D,
}

fn family_for_heading(cfg: &DenseSetConfig, rep: usize) -> Result<Vec<ControlAction>> {
    let lat = &cfg.lattice;
    let theta = lat.heading(rep);
    let (sin_t, cos_t) = theta.sin_cos();
    let r_max = cfg.x_range[0]
        .abs()
        .max(cfg.x_range[1].abs())
        .hypot(cfg.y_range[0].abs().max(cfg.y_range[1].abs()));
    let wx = (r_max / lat.dx).ceil() as i64 + 1;
    let wy = (r_max / lat.dy).ceil() as i64 + 1;
    let mut candidates = Vec::new();
    for ix in -wx..=wx {
        for iy in -wy..=wy {
            if ix == 0 && iy == 0 {
                continue;
            }
            let px = ix as f64 * lat.dx;
            let py = iy as f64 * lat.dy;
            let lx = cos_t * px + sin_t * py;
            let ly = -sin_t * px + cos_t * py;
            if lx < cfg.x_range[0] - 1e-9
                || lx > cfg.x_range[1] + 1e-9
                || ly < cfg.y_range[0] - 1e-9
                || ly > cfg.y_range[1] + 1e-9
            {
                continue;
            }
            for end in 0..lat.heading_count() {
                let dtheta = angle_diff(lat.heading(end), theta);
                let admitted = cfg
                    .theta_endpoints
                    .iter()
                    .any(|t| (dtheta - t).abs() < 1e-9 || (dtheta + t).abs() < 1e-9);
                if admitted {
                    candidates.push(Candidate {
                        ix,
                        iy,
                        end_heading: end,
                        local: Pose2D::new(lx, ly, dtheta),
                    });
                }
            }
        }
    }
    candidates.sort_by_key(|c| (c.ix, c.iy, c.end_heading));
    let solved: Vec<Option<ControlAction>> = candidates
        .par_iter()
        .map(|cand| -> Option<ControlAction> {
            let spiral = match solve_spiral_bvp(&cand.local, cfg.kappa_max) {
                Ok(sp) => sp,
                Err(_) => return None,
            };
            let local_path = spiral.sample(cfg.delta).ok()?;
            let mut points: Vec<[f64; 2]> = local_path
                .points
                .iter()
                .map(|p| [cos_t * p[0] - sin_t * p[1], sin_t * p[0] + cos_t * p[1]])
                .collect();
            // Pin the final sample to the exact vertex so concatenated
            // action paths chain without seams.
            let last = points.len() - 1;
            points[last] = [cand.ix as f64 * lat.dx, cand.iy as f64 * lat.dy];
            let path = SampledPath::from_points(cfg.delta, points).ok()?;
            ControlAction::new(
                lat,
                rep,
                cand.ix,
                cand.iy,
                cand.end_heading,
                spiral.sf,
                path,
                Some(spiral.coeffs),
            )
            .ok()
        })
        .collect();
    Ok(solved.into_iter().flatten().collect())
}

/// Produces the image of a solved family under `quarter_turns` exact
/// quarter-turn rotations, with start and end headings remapped through
/// the precomposed `heading_map`.
fn rotate_family(
    family: &[ControlAction],
    lat: &LatticeConfig,
    heading_map: &[usize],
    quarter_turns: usize,
    delta: f64,
) -> Result<Vec<ControlAction>> {
    let rotate_cell = |ix: i64, iy: i64| -> (i64, i64) {
        let mut p = (ix, iy);
        for _ in 0..quarter_turns {
            p = (-p.1, p.0);
        }
        p
    };
    let rotate_point = |p: [f64; 2]| -> [f64; 2] {
        let mut q = p;
        for _ in 0..quarter_turns {
            q = [-q[1], q[0]];
        }
        q
    };
    family
        .iter()
        .map(|a| {
            let (dix, diy) = rotate_cell(a.delta_ix, a.delta_iy);
            let points: Vec<[f64; 2]> = a.path.points.iter().map(|p| rotate_point(*p)).collect();
            let path = SampledPath::from_points(delta, points)?;
            ControlAction::new(
                lat,
                heading_map[a.start_heading],
                dix,
                diy,
                heading_map[a.end_heading],
                a.arc_length,
                path,
                a.coeffs,
            )
        })
        .collect()
}

/// Generates the dense control set: for every heading, all lattice-aligned
/// endpoints whose local target falls inside the configured cone and whose
/// boundary value problem solves within the curvature bound.
///
/// Headings related by quarter turns share one solved family, rotated
/// exactly, so the output is closed under the lattice symmetry group.
pub fn generate_dense_control_set(cfg: &DenseSetConfig) -> Result<ControlSet> {
    let lat = &cfg.lattice;
    for (value, cell) in [
        (cfg.x_range[0], lat.dx),
        (cfg.x_range[1], lat.dx),
        (cfg.y_range[0], lat.dy),
        (cfg.y_range[1], lat.dy),
    ] {
        if !aligned(value, cell) {
            return Err(Error::InvalidParameter(
                "cone ranges must be integer multiples of the cell size".into(),
            ));
        }
    }
    if cfg.x_range[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "cone must start at positive x".into(),
        ));
    }
    let square = (lat.dx - lat.dy).abs() < 1e-12;
    let quarter_map = if square {
        lat.rotation_index_map(FRAC_PI_2)
    } else {
        None
    };
    let half_map = lat.rotation_index_map(std::f64::consts::PI);

    let mut visited = vec![false; lat.heading_count()];
    let mut actions = Vec::new();
    for rep in 0..lat.heading_count() {
        if visited[rep] {
            continue;
        }
        let family = family_for_heading(cfg, rep)?;
        visited[rep] = true;
        actions.extend(family.iter().cloned());
        if let Some(map) = &quarter_map {
            let mut composed: Vec<usize> = map.clone();
            let mut h = map[rep];
            let mut turns = 1usize;
            while h != rep {
                visited[h] = true;
                actions.extend(rotate_family(&family, lat, &composed, turns, cfg.delta)?);
                composed = composed.iter().map(|&i| map[i]).collect();
                h = map[h];
                turns += 1;
            }
        } else if let Some(map) = &half_map {
            let h = map[rep];
            if h != rep && !visited[h] {
                visited[h] = true;
                // A half turn is two quarter turns on cells and points.
                actions.extend(rotate_family(&family, lat, map, 2, cfg.delta)?);
            }
        }
    }
    if actions.is_empty() {
        return Err(Error::EmptySet);
    }
    ControlSet::new(lat.clone(), cfg.delta, actions)
}

/// Convenience accessor used when reporting: normalized heading change of
/// an action endpoint.
pub fn action_heading_change(a: &ControlAction, lat: &LatticeConfig) -> f64 {
    normalize_angle(lat.heading(a.end_heading) - lat.heading(a.start_heading))
}
