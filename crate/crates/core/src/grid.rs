//! Occupancy grids and rectangular vehicle swaths.
//!
//! The planner checks a control action by stamping the vehicle footprint
//! at every sample pose along the action's path and testing the union of
//! covered cells — the swath — against the grid. Swaths are rasterized
//! once per action as cell offsets relative to the start vertex, so the
//! per-expansion check is a translated lookup. Cells belong to the swath
//! when their center lies inside some footprint rectangle; grids built by
//! this crate keep the lattice aligned to cell corners so translation is
//! exact.

use serde::{Deserialize, Serialize};

use crate::geometry::Pose2D;
use crate::lattice::{vertex_pose, ControlAction, LatticeConfig, LatticeVertex};

/// Axis-aligned occupancy grid. Cell `(0, 0)` covers the square whose
/// lower-left corner is the origin; anything outside the grid counts as
/// occupied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "GridRepr", into = "GridRepr")]
pub struct OccupancyGrid {
    pub origin: Pose2D,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    bits: Vec<u64>,
}

/// Serialized form: occupancy as run lengths alternating free/occupied,
/// starting with free, in row-major order from the origin row.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridRepr {
    origin: Pose2D,
    resolution: f64,
    width: usize,
    height: usize,
    runs: Vec<u64>,
}

impl From<GridRepr> for OccupancyGrid {
    fn from(r: GridRepr) -> Self {
        let mut grid = OccupancyGrid::new(r.origin, r.resolution, r.width, r.height);
        let mut at = 0usize;
        let mut occupied = false;
        for run in r.runs {
            if occupied {
                for i in at..at + run as usize {
                    grid.bits[i / 64] |= 1 << (i % 64);
                }
            }
            at += run as usize;
            occupied = !occupied;
        }
        grid
    }
}

impl From<OccupancyGrid> for GridRepr {
    fn from(g: OccupancyGrid) -> Self {
        let total = g.width * g.height;
        let mut runs = Vec::new();
        let mut occupied = false;
        let mut len = 0u64;
        for i in 0..total {
            let bit = g.bits[i / 64] >> (i % 64) & 1 == 1;
            if bit == occupied {
                len += 1;
            } else {
                runs.push(len);
                occupied = bit;
                len = 1;
            }
        }
        runs.push(len);
        GridRepr {
            origin: g.origin,
            resolution: g.resolution,
            width: g.width,
            height: g.height,
            runs,
        }
    }
}

impl OccupancyGrid {
    pub fn new(origin: Pose2D, resolution: f64, width: usize, height: usize) -> Self {
        assert!(resolution > 0.0, "grid resolution must be positive");
        let words = (width * height).div_ceil(64);
        OccupancyGrid {
            origin,
            resolution,
            width,
            height,
            bits: vec![0; words],
        }
    }

    fn index(&self, cx: i64, cy: i64) -> Option<usize> {
        if cx < 0 || cy < 0 || cx >= self.width as i64 || cy >= self.height as i64 {
            None
        } else {
            Some(cy as usize * self.width + cx as usize)
        }
    }

    /// Occupied or out of bounds.
    pub fn is_occupied(&self, cx: i64, cy: i64) -> bool {
        match self.index(cx, cy) {
            Some(i) => self.bits[i / 64] >> (i % 64) & 1 == 1,
            None => true,
        }
    }

    pub fn set_occupied(&mut self, cx: i64, cy: i64, value: bool) {
        if let Some(i) = self.index(cx, cy) {
            if value {
                self.bits[i / 64] |= 1 << (i % 64);
            } else {
                self.bits[i / 64] &= !(1 << (i % 64));
            }
        }
    }

    /// Cell containing a world point. A tiny forgiveness keeps points that
    /// sit exactly on a cell boundary (up to rounding) in the upper cell.
    pub fn cell_of(&self, x: f64, y: f64) -> (i64, i64) {
        let cx = ((x - self.origin.x) / self.resolution + 1e-9).floor() as i64;
        let cy = ((y - self.origin.y) / self.resolution + 1e-9).floor() as i64;
        (cx, cy)
    }

    /// World coordinates of a cell's center.
    pub fn cell_center(&self, cx: i64, cy: i64) -> (f64, f64) {
        (
            self.origin.x + (cx as f64 + 0.5) * self.resolution,
            self.origin.y + (cy as f64 + 0.5) * self.resolution,
        )
    }

    /// Set every cell's occupancy from a predicate over its center point.
    pub fn fill_where(&mut self, mut occupied: impl FnMut(f64, f64) -> bool) {
        for cy in 0..self.height as i64 {
            for cx in 0..self.width as i64 {
                let (x, y) = self.cell_center(cx, cy);
                self.set_occupied(cx, cy, occupied(x, y));
            }
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Occupy every cell whose center lies inside the oriented rectangle
    /// centered at `pose`.
    pub fn occupy_rect(&mut self, pose: &Pose2D, length: f64, width: f64) {
        let (s, c) = pose.theta.sin_cos();
        let hl = length / 2.0;
        let hw = width / 2.0;
        let rx = hl * c.abs() + hw * s.abs();
        let ry = hl * s.abs() + hw * c.abs();
        let (lo_x, lo_y) = self.cell_of(pose.x - rx, pose.y - ry);
        let (hi_x, hi_y) = self.cell_of(pose.x + rx, pose.y + ry);
        for cy in lo_y..=hi_y {
            for cx in lo_x..=hi_x {
                let (x, y) = self.cell_center(cx, cy);
                let px = x - pose.x;
                let py = y - pose.y;
                let along = c * px + s * py;
                let across = -s * px + c * py;
                if along.abs() <= hl && across.abs() <= hw {
                    self.set_occupied(cx, cy, true);
                }
            }
        }
    }
}

/// True when the footprint rectangle at a single pose covers no occupied
/// or out-of-bounds cell. Start and goal feasibility checks.
pub fn pose_collision_free(pose: &Pose2D, fp: &VehicleFootprint, grid: &OccupancyGrid) -> bool {
    let (s, c) = pose.theta.sin_cos();
    let cx = pose.x + fp.center_offset * c;
    let cy = pose.y + fp.center_offset * s;
    let hl = fp.length / 2.0;
    let hw = fp.width / 2.0;
    let rx = hl * c.abs() + hw * s.abs();
    let ry = hl * s.abs() + hw * c.abs();
    let (lo_x, lo_y) = grid.cell_of(cx - rx, cy - ry);
    let (hi_x, hi_y) = grid.cell_of(cx + rx, cy + ry);
    for gy in lo_y..=hi_y {
        for gx in lo_x..=hi_x {
            let (x, y) = grid.cell_center(gx, gy);
            let px = x - cx;
            let py = y - cy;
            let along = c * px + s * py;
            let across = -s * px + c * py;
            if along.abs() <= hl && across.abs() <= hw && grid.is_occupied(gx, gy) {
                return false;
            }
        }
    }
    true
}

/// Rectangular vehicle footprint. Paths track the rear axle;
/// `center_offset` moves forward from the axle to the rectangle's center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleFootprint {
    pub length: f64,
    pub width: f64,
    pub center_offset: f64,
}

impl VehicleFootprint {
    pub fn new(length: f64, width: f64, center_offset: f64) -> Self {
        assert!(length > 0.0 && width > 0.0, "footprint must have extent");
        VehicleFootprint {
            length,
            width,
            center_offset,
        }
    }
}

impl Default for VehicleFootprint {
    /// A 4.5 m by 1.7 m car with the rear axle 1.3 m behind center.
    fn default() -> Self {
        VehicleFootprint::new(4.5, 1.7, 1.3)
    }
}

/// Rasterized swath of one control action: cells covered by the footprint
/// swept along the action, as offsets from the cell whose corner is the
/// start vertex. Sorted and deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct Swath {
    pub cells: Vec<[i32; 2]>,
}

/// Cells (in units of `resolution`, relative to the world origin) whose
/// centers fall inside the footprint rectangle at `pose`.
fn rect_cells(
    pose: &Pose2D,
    fp: &VehicleFootprint,
    resolution: f64,
    out: &mut std::collections::BTreeSet<[i32; 2]>,
) {
    let (s, c) = pose.theta.sin_cos();
    let cx = pose.x + fp.center_offset * c;
    let cy = pose.y + fp.center_offset * s;
    let hl = fp.length / 2.0;
    let hw = fp.width / 2.0;
    // Bounding box of the rotated rectangle, then the exact inside test.
    let rx = hl * c.abs() + hw * s.abs();
    let ry = hl * s.abs() + hw * c.abs();
    let lo_x = ((cx - rx) / resolution).floor() as i32;
    let hi_x = ((cx + rx) / resolution).ceil() as i32;
    let lo_y = ((cy - ry) / resolution).floor() as i32;
    let hi_y = ((cy + ry) / resolution).ceil() as i32;
    for gy in lo_y..hi_y {
        for gx in lo_x..hi_x {
            let px = (gx as f64 + 0.5) * resolution - cx;
            let py = (gy as f64 + 0.5) * resolution - cy;
            let along = c * px + s * py;
            let across = -s * px + c * py;
            if along.abs() <= hl && across.abs() <= hw {
                out.insert([gx, gy]);
            }
        }
    }
}

/// Union of footprint rectangles stamped at every sample pose of the
/// action's path. The action path starts at the origin, so the returned
/// offsets translate directly by the start vertex's cell.
pub fn swath_cells(c: &ControlAction, fp: &VehicleFootprint, resolution: f64) -> Swath {
    let mut set = std::collections::BTreeSet::new();
    for (p, theta) in c.path.points.iter().zip(c.path.headings.iter()) {
        let pose = Pose2D::new(p[0], p[1], *theta);
        rect_cells(&pose, fp, resolution, &mut set);
    }
    Swath {
        cells: set.into_iter().collect(),
    }
}

/// True when no swath cell, translated to the start vertex `u`, is
/// occupied or out of bounds.
pub fn collision_free(
    u: &LatticeVertex,
    swath: &Swath,
    cfg: &LatticeConfig,
    grid: &OccupancyGrid,
) -> bool {
    let pose = vertex_pose(u, cfg);
    let (vx, vy) = grid.cell_of(pose.x, pose.y);
    swath
        .cells
        .iter()
        .all(|cell| !grid.is_occupied(vx + cell[0] as i64, vy + cell[1] as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SampledPath;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn straight_action(cfg: &LatticeConfig, cells: i64, delta: f64) -> ControlAction {
        let h = cfg.exact_heading_index(0.0).unwrap();
        let length = cells as f64 * cfg.dx;
        let n = (length / delta).round() as usize;
        let points: Vec<[f64; 2]> = (0..=n).map(|k| [k as f64 * delta, 0.0]).collect();
        ControlAction::new(
            cfg,
            h,
            cells,
            0,
            h,
            length,
            SampledPath::from_points(delta, points).unwrap(),
            None,
        )
        .unwrap()
    }

    fn four_heading_cfg() -> LatticeConfig {
        LatticeConfig::with_heading_count(0.4, 0.4, 4).unwrap()
    }

    #[test]
    fn single_pose_footprint_area_matches_the_rectangle() {
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let mut set = std::collections::BTreeSet::new();
        rect_cells(&Pose2D::new(0.0, 0.0, 0.3), &fp, res, &mut set);
        let area = set.len() as f64 * res * res;
        let want = fp.length * fp.width;
        assert!(
            (area - want).abs() / want < 0.1,
            "rasterized area {area:.2} vs rectangle {want:.2}"
        );
    }

    #[test]
    fn straight_swath_spans_action_plus_footprint() {
        let cfg = four_heading_cfg();
        let action = straight_action(&cfg, 5, 0.1); // 2 m straight
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let swath = swath_cells(&action, &fp, res);
        let min_x = swath.cells.iter().map(|c| c[0]).min().unwrap();
        let max_x = swath.cells.iter().map(|c| c[0]).max().unwrap();
        let span = (max_x - min_x + 1) as f64 * res;
        let want = 2.0 + fp.length;
        assert!(
            (span - want).abs() <= 2.0 * res + 1e-9,
            "longitudinal span {span:.2} vs {want:.2}"
        );
        let area = swath.cells.len() as f64 * res * res;
        let want_area = want * fp.width;
        assert!(
            (area - want_area).abs() / want_area < 0.1,
            "swath area {area:.2} vs swept rectangle {want_area:.2}"
        );
    }

    #[test]
    fn quarter_turn_rotation_maps_the_swath_exactly() {
        // Rotating a pose by 90 degrees maps cell centers onto cell
        // centers, so the rasterization commutes with the rotation.
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let pose = Pose2D::new(1.23, -0.51, 0.37);
        let mut base = std::collections::BTreeSet::new();
        rect_cells(&pose, &fp, res, &mut base);
        let rotated_pose = Pose2D::new(-pose.y, pose.x, pose.theta + std::f64::consts::FRAC_PI_2);
        let mut rotated = std::collections::BTreeSet::new();
        rect_cells(&rotated_pose, &fp, res, &mut rotated);
        let mapped: std::collections::BTreeSet<[i32; 2]> =
            base.iter().map(|c| [-c[1] - 1, c[0]]).collect();
        assert_eq!(mapped, rotated, "quarter-turn swaths disagree");
    }

    #[test]
    fn diagonal_rotation_stays_within_one_cell_hausdorff() {
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let pose = Pose2D::new(0.83, 0.41, 0.0);
        let mut base = std::collections::BTreeSet::new();
        rect_cells(&pose, &fp, res, &mut base);
        let angle = std::f64::consts::FRAC_PI_4;
        let (s, c) = angle.sin_cos();
        let rotated_pose = Pose2D::new(
            c * pose.x - s * pose.y,
            s * pose.x + c * pose.y,
            pose.theta + angle,
        );
        let mut rotated = std::collections::BTreeSet::new();
        rect_cells(&rotated_pose, &fp, res, &mut rotated);
        // Hausdorff distance between rotated cell centers and the directly
        // rasterized set, in meters; one diagonal cell of slack.
        let centers = |set: &std::collections::BTreeSet<[i32; 2]>, rot: bool| -> Vec<[f64; 2]> {
            set.iter()
                .map(|cell| {
                    let x = (cell[0] as f64 + 0.5) * res;
                    let y = (cell[1] as f64 + 0.5) * res;
                    if rot {
                        [c * x - s * y, s * x + c * y]
                    } else {
                        [x, y]
                    }
                })
                .collect()
        };
        let a = centers(&base, true);
        let b = centers(&rotated, false);
        let one_sided = |from: &[[f64; 2]], to: &[[f64; 2]]| -> f64 {
            from.iter()
                .map(|p| {
                    to.iter()
                        .map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        let hausdorff = one_sided(&a, &b).max(one_sided(&b, &a));
        assert!(
            hausdorff <= res * 2.0f64.sqrt() + 1e-9,
            "rotated swath drifted {hausdorff:.3} m"
        );
    }

    #[test]
    fn empty_grid_passes_and_a_wall_blocks() {
        let cfg = four_heading_cfg();
        let action = straight_action(&cfg, 5, 0.1);
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let swath = swath_cells(&action, &fp, res);
        let origin = Pose2D::new(-6.0, -6.0, 0.0);
        let mut grid = OccupancyGrid::new(origin, res, 60, 60);
        let u = LatticeVertex::new(0, 0, action.start_heading);
        assert!(collision_free(&u, &swath, &cfg, &grid));
        // Wall across the action's midpoint at x = 1 m.
        let (wall_cx, _) = grid.cell_of(1.0, 0.0);
        for cy in 0..grid.height as i64 {
            grid.set_occupied(wall_cx, cy, true);
        }
        assert!(!collision_free(&u, &swath, &cfg, &grid));
    }

    #[test]
    fn out_of_bounds_counts_as_occupied() {
        let cfg = four_heading_cfg();
        let action = straight_action(&cfg, 5, 0.1);
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let swath = swath_cells(&action, &fp, res);
        // Grid too small to hold the swath ahead of the start.
        let grid = OccupancyGrid::new(Pose2D::new(-1.0, -3.0, 0.0), res, 20, 30);
        let u = LatticeVertex::new(0, 0, action.start_heading);
        assert!(!collision_free(&u, &swath, &cfg, &grid));
    }

    /// Footprint collision decided by sampling the rectangle interior on a
    /// fine grid at every finely interpolated path pose. `grow` widens or
    /// shrinks the footprint to give the rasterized swath one diagonal
    /// cell of slack on each side of the decision boundary.
    fn fine_sampling_hit(
        u: &LatticeVertex,
        action: &ControlAction,
        fp: &VehicleFootprint,
        cfg: &LatticeConfig,
        grid: &OccupancyGrid,
        grow: f64,
    ) -> bool {
        let base = vertex_pose(u, cfg);
        let hl = (fp.length / 2.0 + grow).max(0.0);
        let hw = (fp.width / 2.0 + grow).max(0.0);
        let step = grid.resolution / 4.0;
        let poses: Vec<Pose2D> = action
            .path
            .points
            .iter()
            .zip(action.path.headings.iter())
            .map(|(p, t)| Pose2D::new(base.x + p[0], base.y + p[1], *t))
            .collect();
        for w in poses.windows(2) {
            for i in 0..4 {
                let t = i as f64 / 4.0;
                let x = w[0].x + (w[1].x - w[0].x) * t;
                let y = w[0].y + (w[1].y - w[0].y) * t;
                let theta = w[0].theta;
                let (s, c) = theta.sin_cos();
                let cxp = x + fp.center_offset * c;
                let cyp = y + fp.center_offset * s;
                let mut along = -hl;
                while along <= hl {
                    let mut across = -hw;
                    while across <= hw {
                        let px = cxp + along * c - across * s;
                        let py = cyp + along * s + across * c;
                        let (gx, gy) = grid.cell_of(px, py);
                        if grid.is_occupied(gx, gy) {
                            return true;
                        }
                        across += step;
                    }
                    along += step;
                }
            }
        }
        false
    }

    #[test]
    fn swath_check_agrees_with_fine_sampling_oracle() {
        let cfg = four_heading_cfg();
        let action = straight_action(&cfg, 5, 0.1);
        let fp = VehicleFootprint::default();
        let res = 0.2;
        let swath = swath_cells(&action, &fp, res);
        let u = LatticeVertex::new(0, 0, action.start_heading);
        let slack = res * 2.0f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..100 {
            let mut grid = OccupancyGrid::new(Pose2D::new(-8.0, -8.0, 0.0), res, 80, 80);
            // A fat obstacle somewhere near the action corridor.
            let ox = rng.gen_range(-4.0..6.0);
            let oy = rng.gen_range(-4.0..4.0);
            let (cx, cy) = grid.cell_of(ox, oy);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    grid.set_occupied(cx + dx, cy + dy, true);
                }
            }
            let free = collision_free(&u, &swath, &cfg, &grid);
            // Oracle sandwich: a hit on the shrunken footprint must be a
            // swath hit; a miss on the grown footprint must be swath-free.
            if fine_sampling_hit(&u, &action, &fp, &cfg, &grid, -slack) {
                assert!(!free, "oracle hit at ({ox:.2}, {oy:.2}) but swath free");
                checked += 1;
            } else if !fine_sampling_hit(&u, &action, &fp, &cfg, &grid, slack) {
                assert!(free, "oracle free at ({ox:.2}, {oy:.2}) but swath hit");
                checked += 1;
            }
        }
        assert!(checked >= 60, "only {checked} decisive oracle cases");
    }

    #[test]
    fn occupancy_survives_the_run_length_round_trip() {
        let mut grid = OccupancyGrid::new(Pose2D::new(-2.0, 1.0, 0.0), 0.2, 37, 23);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let cx = rng.gen_range(0..37);
            let cy = rng.gen_range(0..23);
            grid.set_occupied(cx, cy, true);
        }
        let json = serde_json::to_string(&grid).unwrap();
        let back: OccupancyGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(grid, back);
        // The encoding is runs, not a bitmap dump.
        assert!(json.contains("\"runs\""));
    }
}
