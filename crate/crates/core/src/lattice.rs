//! State lattice: vertex discretization and control action sets.
//!
//! A vertex is `(ix, iy, itheta)`: integer multiples of the cell sizes plus
//! an index into a fixed heading set. Control actions connect vertex pairs
//! with identical relative arrangement, so one action stored relative to its
//! start vertex applies anywhere on the lattice by translation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, dist, normalize_angle, Pose2D, SampledPath};

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Lattice discretization: cell sizes and the ordered heading set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub dx: f64,
    pub dy: f64,
    /// Headings in `(-pi, pi]`, sorted ascending and pairwise distinct.
    pub headings: Vec<f64>,
}

impl LatticeConfig {
    pub fn new(dx: f64, dy: f64, headings: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::InvalidParameter(
                "lattice cell sizes must be positive".into(),
            ));
        }
        if headings.is_empty() {
            return Err(Error::InvalidParameter("heading set is empty".into()));
        }
        let mut hs: Vec<f64> = headings.iter().map(|h| normalize_angle(*h)).collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in hs.windows(2) {
            if (w[1] - w[0]).abs() < 1e-9 {
                return Err(Error::InvalidParameter(
                    "heading set has duplicate entries".into(),
                ));
            }
        }
        Ok(LatticeConfig {
            dx,
            dy,
            headings: hs,
        })
    }

    /// Standard heading sets on square cells: 4 cardinal directions, 8 with
    /// diagonals, or 16 adding the atan(1/2) family in every quadrant.
    pub fn with_heading_count(dx: f64, dy: f64, count: usize) -> Result<Self> {
        let offsets: &[f64] = match count {
            4 => &[0.0],
            8 => &[0.0, std::f64::consts::FRAC_PI_4],
            16 => &[
                0.0,
                0.5f64.atan(),
                std::f64::consts::FRAC_PI_4,
                FRAC_PI_2 - 0.5f64.atan(),
            ],
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported heading count {count} (use 4, 8, or 16)"
                )))
            }
        };
        let mut headings = Vec::with_capacity(count);
        for quadrant in 0..4 {
            for off in offsets {
                headings.push(quadrant as f64 * FRAC_PI_2 + off);
            }
        }
        LatticeConfig::new(dx, dy, headings)
    }

    pub fn heading_count(&self) -> usize {
        self.headings.len()
    }

    pub fn heading(&self, idx: usize) -> f64 {
        self.headings[idx]
    }

    /// Index of the heading closest to `theta`; exact ties go to the
    /// smaller index.
    pub fn nearest_heading_index(&self, theta: f64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, h) in self.headings.iter().enumerate() {
            let d = angle_diff(theta, *h).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Index of a heading equal to `theta` within 1e-9, if any.
    pub fn exact_heading_index(&self, theta: f64) -> Option<usize> {
        self.headings
            .iter()
            .position(|h| angle_diff(theta, *h).abs() < 1e-9)
    }

    /// Per-index map under rotation by `angle`, if the heading set is closed
    /// under it.
    pub fn rotation_index_map(&self, angle: f64) -> Option<Vec<usize>> {
        self.headings
            .iter()
            .map(|h| self.exact_heading_index(h + angle))
            .collect()
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig::with_heading_count(0.4, 0.4, 16).unwrap()
    }
}

/// A lattice vertex: discrete position and heading index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVertex {
    pub ix: i64,
    pub iy: i64,
    pub itheta: usize,
}

impl LatticeVertex {
    pub fn new(ix: i64, iy: i64, itheta: usize) -> Self {
        LatticeVertex { ix, iy, itheta }
    }
}

/// Nearest lattice vertex to a continuous pose. Position rounds half away
/// from zero; heading ties break toward the smaller index.
pub fn snap_to_lattice(pose: &Pose2D, cfg: &LatticeConfig) -> LatticeVertex {
    LatticeVertex {
        ix: (pose.x / cfg.dx).round() as i64,
        iy: (pose.y / cfg.dy).round() as i64,
        itheta: cfg.nearest_heading_index(pose.theta),
    }
}

/// Continuous pose of a lattice vertex.
pub fn vertex_pose(v: &LatticeVertex, cfg: &LatticeConfig) -> Pose2D {
    Pose2D::new(
        v.ix as f64 * cfg.dx,
        v.iy as f64 * cfg.dy,
        cfg.heading(v.itheta),
    )
}

/// A motion primitive: a sampled path from the start vertex (at the origin,
/// facing its start heading) to a lattice-aligned endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlAction {
    pub start_heading: usize,
    pub delta_ix: i64,
    pub delta_iy: i64,
    pub end_heading: usize,
    /// True arc length of the underlying curve (not the chord sum).
    pub arc_length: f64,
    /// Number of sample steps the action advances along a demonstration.
    pub n_segments: usize,
    /// Sample points relative to the start vertex; the first point is the
    /// origin and the last is exactly the endpoint vertex position.
    pub path: SampledPath,
    /// Cubic spiral curvature coefficients when spiral-generated.
    pub coeffs: Option<[f64; 4]>,
}

impl ControlAction {
    pub fn new(
        cfg: &LatticeConfig,
        start_heading: usize,
        delta_ix: i64,
        delta_iy: i64,
        end_heading: usize,
        arc_length: f64,
        path: SampledPath,
        coeffs: Option<[f64; 4]>,
    ) -> Result<Self> {
        let n = cfg.heading_count();
        if start_heading >= n || end_heading >= n {
            return Err(Error::IndexError(format!(
                "heading index out of range (count {n})"
            )));
        }
        if path.len() < 2 {
            return Err(Error::DegeneratePath(
                "control action path needs at least 2 points".into(),
            ));
        }
        let first = path.points[0];
        if first[0].abs() > 1e-9 || first[1].abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "control action path must start at the origin".into(),
            ));
        }
        // Chord tangents lag the analytic start heading by up to
        // kappa * delta / 2, so this check only needs to separate
        // neighboring lattice headings (at least 0.32 rad apart).
        if angle_diff(path.headings[0], cfg.heading(start_heading)).abs() > 0.15 {
            return Err(Error::InvalidParameter(
                "control action path does not leave along its start heading".into(),
            ));
        }
        let target = [delta_ix as f64 * cfg.dx, delta_iy as f64 * cfg.dy];
        let end = *path.points.last().unwrap();
        if dist(end, target) > 1e-3 {
            return Err(Error::InvalidParameter(format!(
                "control action endpoint ({:.4}, {:.4}) misses vertex ({:.4}, {:.4})",
                end[0], end[1], target[0], target[1]
            )));
        }
        if !(arc_length > 0.0) {
            return Err(Error::InvalidParameter(
                "arc length must be positive".into(),
            ));
        }
        Ok(ControlAction {
            start_heading,
            delta_ix,
            delta_iy,
            end_heading,
            arc_length,
            n_segments: path.len() - 1,
            path,
            coeffs,
        })
    }

    /// True when the action keeps its heading and every sample lies on the
    /// ray along that heading.
    pub fn is_straight(&self, cfg: &LatticeConfig) -> bool {
        if self.start_heading != self.end_heading {
            return false;
        }
        let h = cfg.heading(self.start_heading);
        let (s, c) = h.sin_cos();
        self.path.points.iter().all(|p| {
            let cross = c * p[1] - s * p[0];
            let along = c * p[0] + s * p[1];
            cross.abs() < 1e-6 && along > -1e-9
        })
    }
}

/// Applies a control action to a vertex at demonstration index `k`,
/// returning the successor vertex and index.
pub fn apply_control_action(
    u: &LatticeVertex,
    c: &ControlAction,
    k: usize,
) -> Result<(LatticeVertex, usize)> {
    if c.start_heading != u.itheta {
        return Err(Error::HeadingMismatch);
    }
    Ok((
        LatticeVertex {
            ix: u.ix + c.delta_ix,
            iy: u.iy + c.delta_iy,
            itheta: c.end_heading,
        },
        k + c.n_segments,
    ))
}

/// Concatenates action paths along a vertex chain into one sampled path.
///
/// Interior points are the action samples translated by their start vertex;
/// every junction is emitted as the exact successor vertex pose. This makes
/// the concatenation agree point for point with per-action subpath scoring.
pub fn concatenate_actions(
    cfg: &LatticeConfig,
    delta: f64,
    start: LatticeVertex,
    actions: &[&ControlAction],
) -> Result<SampledPath> {
    let mut u = start;
    let mut points = vec![vertex_pose(&u, cfg).position()];
    for c in actions {
        let base = vertex_pose(&u, cfg).position();
        let (next, _) = apply_control_action(&u, c, 0)?;
        for m in 1..c.n_segments {
            let p = c.path.points[m];
            points.push([base[0] + p[0], base[1] + p[1]]);
        }
        points.push(vertex_pose(&next, cfg).position());
        u = next;
    }
    SampledPath::from_points(delta, points)
}

/// A control set: actions grouped by start heading, with stable global
/// indices used for deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    pub lattice: LatticeConfig,
    /// Arc-length sample step shared by every action path.
    pub delta: f64,
    by_heading: Vec<Vec<ControlAction>>,
    offsets: Vec<usize>,
    total: usize,
}

impl ControlSet {
    pub fn new(lattice: LatticeConfig, delta: f64, actions: Vec<ControlAction>) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter("delta must be positive".into()));
        }
        let mut by_heading: Vec<Vec<ControlAction>> = vec![Vec::new(); lattice.heading_count()];
        for a in actions {
            if a.start_heading >= by_heading.len() {
                return Err(Error::IndexError(
                    "action start heading out of range".into(),
                ));
            }
            by_heading[a.start_heading].push(a);
        }
        let mut offsets = Vec::with_capacity(by_heading.len());
        let mut total = 0usize;
        for group in &by_heading {
            offsets.push(total);
            total += group.len();
        }
        Ok(ControlSet {
            lattice,
            delta,
            by_heading,
            offsets,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Actions applicable from a given start heading.
    pub fn for_heading(&self, itheta: usize) -> &[ControlAction] {
        &self.by_heading[itheta]
    }

    /// Global index of the j-th action of a heading group.
    pub fn global_index(&self, itheta: usize, j: usize) -> usize {
        self.offsets[itheta] + j
    }

    pub fn get(&self, global: usize) -> &ControlAction {
        let h = match self.offsets.binary_search(&global) {
            Ok(mut i) => {
                // Empty heading groups share an offset; take the last one.
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == global {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        &self.by_heading[h][global - self.offsets[h]]
    }

    /// All actions with their global indices, grouped by start heading.
    pub fn iter_all(&self) -> impl Iterator<Item = (usize, &ControlAction)> {
        self.by_heading.iter().flat_map(|g| g.iter()).enumerate()
    }

    /// New set keeping only the actions at the given global indices.
    pub fn subset(&self, indices: &[usize]) -> Result<ControlSet> {
        let mut sorted: Vec<usize> = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let actions = sorted.iter().map(|i| self.get(*i).clone()).collect();
        ControlSet::new(self.lattice.clone(), self.delta, actions)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ControlSetFile::from_set(self);
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<ControlSet> {
        let file: ControlSetFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("control set: {e}")))?;
        file.into_set()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::File(path.display().to_string(), e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ControlSet> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::File(path.display().to_string(), e))?;
        ControlSet::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    dx: f64,
    dy: f64,
    headings: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ActionRepr {
    start_heading_index: usize,
    /// Endpoint displacement in cells.
    dx: i64,
    dy: i64,
    /// Heading index change modulo the heading count.
    dtheta_index: usize,
    arc_length: f64,
    coeffs: Option<[f64; 4]>,
    sampled_points: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct ControlSetFile {
    lattice: LatticeRepr,
    delta: f64,
    actions: Vec<ActionRepr>,
}

impl ControlSetFile {
    fn from_set(set: &ControlSet) -> Self {
        let n = set.lattice.heading_count();
        let actions = set
            .iter_all()
            .map(|(_, a)| ActionRepr {
                start_heading_index: a.start_heading,
                dx: a.delta_ix,
                dy: a.delta_iy,
                dtheta_index: (a.end_heading + n - a.start_heading) % n,
                arc_length: a.arc_length,
                coeffs: a.coeffs,
                sampled_points: a.path.points.clone(),
            })
            .collect();
        ControlSetFile {
            lattice: LatticeRepr {
                dx: set.lattice.dx,
                dy: set.lattice.dy,
                headings: set.lattice.headings.clone(),
            },
            delta: set.delta,
            actions,
        }
    }

    fn into_set(self) -> Result<ControlSet> {
        let cfg = LatticeConfig::new(self.lattice.dx, self.lattice.dy, self.lattice.headings)?;
        let n = cfg.heading_count();
        let mut actions = Vec::with_capacity(self.actions.len());
        for a in self.actions {
            let end = (a.start_heading_index + a.dtheta_index) % n;
            let path = SampledPath::from_points(self.delta, a.sampled_points)?;
            actions.push(ControlAction::new(
                &cfg,
                a.start_heading_index,
                a.dx,
                a.dy,
                end,
                a.arc_length,
                path,
                a.coeffs,
            )?);
        }
        ControlSet::new(cfg, self.delta, actions)
    }
}
