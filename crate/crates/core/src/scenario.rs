//! Evaluation scenarios: lane corridors in occupancy grids.
//!
//! A scenario wraps a reference centerline into a grid world: the lane
//! around the centerline is free, everything else occupied, with start and
//! goal poses at the corridor ends. Lane-change scenarios add a second
//! lane on one side and move the goal there. Synthetic double-swerve
//! worlds chain straights and clothoid arcs, add a second lane, and drop
//! a vehicle-sized obstacle into the first lane so plans must swerve out
//! and back.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Polyline, Pose2D, SampledPath};
use crate::grid::OccupancyGrid;

/// Grid resolution for all scenario construction, in meters per cell.
/// A fifth of the lattice cell, so lattice vertices sit on cell corners.
pub const GRID_RESOLUTION: f64 = 0.2;

/// How far the free corridor extends beyond both centerline ends, so the
/// vehicle footprint has room at the start and goal.
const CORRIDOR_EXTENSION: f64 = 5.0;

/// Spacing of the decimated centerline used for lateral-distance queries.
/// Sagitta error at curvature 0.1 over this chord is under a millimeter.
const CENTERLINE_QUERY_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    LaneFollow,
    LaneChange,
    DoubleSwerve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub grid: OccupancyGrid,
    pub start: Pose2D,
    pub goal: Pose2D,
    pub reference_path: SampledPath,
    pub kind: ScenarioKind,
}

/// Distance from a point to the nearest point of the query line, plus the
/// side it falls on: positive left of the travel direction, negative
/// right. The side comes from the nearest segment.
fn lateral_to_line(p: [f64; 2], line: &[[f64; 2]]) -> (f64, f64) {
    let mut best = f64::INFINITY;
    let mut side = 0.0;
    for w in line.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dx = b[0] - a[0];
        let dy = b[1] - a[1];
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            continue;
        }
        let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
        let qx = a[0] + t * dx;
        let qy = a[1] + t * dy;
        let d = ((p[0] - qx).powi(2) + (p[1] - qy).powi(2)).sqrt();
        if d < best {
            best = d;
            let cross = dx * (p[1] - a[1]) - dy * (p[0] - a[0]);
            side = if cross >= 0.0 { 1.0 } else { -1.0 };
        }
    }
    (best, side)
}

/// Centerline extended straight out along the end headings and thinned to
/// the query step.
fn query_line(path: &SampledPath) -> Vec<[f64; 2]> {
    let start = path.start_pose();
    let end = path.end_pose();
    let stride = (CENTERLINE_QUERY_STEP / path.delta).round().max(1.0) as usize;
    let mut line = Vec::new();
    let (s0, c0) = start.theta.sin_cos();
    line.push([
        start.x - CORRIDOR_EXTENSION * c0,
        start.y - CORRIDOR_EXTENSION * s0,
    ]);
    for (i, p) in path.points.iter().enumerate() {
        if i % stride == 0 || i + 1 == path.points.len() {
            line.push(*p);
        }
    }
    let (s1, c1) = end.theta.sin_cos();
    line.push([
        end.x + CORRIDOR_EXTENSION * c1,
        end.y + CORRIDOR_EXTENSION * s1,
    ]);
    line
}

/// Empty grid whose bounds cover the query line padded by `pad` meters,
/// with the origin snapped to whole cells so the lattice stays aligned.
fn grid_covering(line: &[[f64; 2]], pad: f64) -> OccupancyGrid {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in line {
        for d in 0..2 {
            min[d] = min[d].min(p[d]);
            max[d] = max[d].max(p[d]);
        }
    }
    let res = GRID_RESOLUTION;
    let ox = ((min[0] - pad) / res).floor() * res;
    let oy = ((min[1] - pad) / res).floor() * res;
    let width = (((max[0] + pad) - ox) / res).ceil() as usize + 1;
    let height = (((max[1] + pad) - oy) / res).ceil() as usize + 1;
    OccupancyGrid::new(Pose2D::new(ox, oy, 0.0), res, width, height)
}

/// Build a lane-corridor scenario around a reference path. The lane of
/// `lane_width` about the centerline is free; `lane_change` opens a second
/// adjacent lane on a seed-chosen side and puts the goal at its end;
/// `double_swerve` opens the second lane but keeps the goal in the first
/// lane (callers stamp the obstacle). The reference must be at least 2 m
/// long.
pub fn scenario_from_path(
    id: impl Into<String>,
    path: &SampledPath,
    lane_width: f64,
    kind: ScenarioKind,
    seed: u64,
) -> Scenario {
    assert!(path.arc_length() >= 2.0, "reference path shorter than 2 m");
    assert!(lane_width > 0.0, "lane width must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_lane = matches!(kind, ScenarioKind::LaneChange | ScenarioKind::DoubleSwerve);
    let side = if two_lane {
        if rng.gen_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    } else {
        0.0
    };
    let line = query_line(path);
    let half = lane_width / 2.0;
    let reach = if two_lane { 3.0 * half } else { half };
    let mut grid = grid_covering(&line, reach + 1.0);
    grid.fill_where(|x, y| {
        let (d, s) = lateral_to_line([x, y], &line);
        let in_first = d <= half;
        let in_second = two_lane && s == side && d <= reach;
        !(in_first || in_second)
    });
    let start = path.start_pose();
    let end = path.end_pose();
    let goal = match kind {
        ScenarioKind::LaneChange => {
            let (s, c) = end.theta.sin_cos();
            // Left normal is (-sin, cos); side picks the lane.
            Pose2D::new(
                end.x - side * lane_width * s,
                end.y + side * lane_width * c,
                end.theta,
            )
        }
        _ => end,
    };
    Scenario {
        id: id.into(),
        grid,
        start,
        goal,
        reference_path: path.clone(),
        kind,
    }
}

/// One segment of a synthetic centerline: a straight, or a swerve made of
/// two mirrored clothoid arcs — curvature ramps 0 → `kappa_end` → 0 over
/// the first half and 0 → −`kappa_end` → 0 over the second. The heading
/// returns to the segment's entry heading while the position shifts
/// laterally, so segments never compound into a diagonal; the centerline
/// stays curvature-continuous with peak |kappa| = |kappa_end|.
struct SynthSegment {
    length: f64,
    kappa_end: f64,
}

/// Triangle ramp 0 → 1 → 0 over [0, len].
fn triangle(s: f64, len: f64) -> f64 {
    let half = len / 2.0;
    if s <= half {
        s / half
    } else {
        (len - s) / half
    }
}

fn integrate_centerline(segments: &[SynthSegment], delta: f64) -> SampledPath {
    let fine = 0.02;
    let mut pts = vec![[0.0, 0.0]];
    let mut theta = 0.0f64;
    let mut x = 0.0f64;
    let mut y = 0.0f64;
    for seg in segments {
        let steps = (seg.length / fine).ceil() as usize;
        let ds = seg.length / steps as f64;
        let half = seg.length / 2.0;
        for i in 0..steps {
            let s_mid = (i as f64 + 0.5) * ds;
            let kappa = if s_mid <= half {
                seg.kappa_end * triangle(s_mid, half)
            } else {
                -seg.kappa_end * triangle(s_mid - half, half)
            };
            theta += kappa * ds;
            x += theta.cos() * ds;
            y += theta.sin() * ds;
            pts.push([x, y]);
        }
    }
    let poly = Polyline::new(pts).expect("synthetic centerline is non-degenerate");
    crate::geometry::resample_by_arclength(&poly, delta)
        .expect("synthetic centerline resamples cleanly")
}

/// Deterministic double-swerve worlds: straight / swerve / straight /
/// swerve / straight centerlines with segment lengths drawn from
/// [5, 15] m and swerve peak curvatures from [-0.1, 0.1], a second lane,
/// and a vehicle-sized obstacle centered in the first lane between 30%
/// and 60% of the centerline length. The goal stays at the first lane's
/// end, past the obstacle.
pub fn synth_worlds(n: usize, seed: u64, lane_width: f64, delta: f64) -> Vec<Scenario> {
    assert!(n >= 1, "need at least one world");
    let mut worlds = Vec::with_capacity(n);
    for i in 0..n {
        let world_seed = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(world_seed);
        let mut segments = Vec::new();
        for j in 0..5 {
            if j % 2 == 0 {
                segments.push(SynthSegment {
                    length: rng.gen_range(5.0..15.0),
                    kappa_end: 0.0,
                });
            } else {
                segments.push(SynthSegment {
                    length: rng.gen_range(5.0..15.0),
                    kappa_end: rng.gen_range(-0.1..0.1),
                });
            }
        }
        let path = integrate_centerline(&segments, delta);
        let obstacle_frac = rng.gen_range(0.30..0.60);
        let mut scenario = scenario_from_path(
            format!("double_swerve_{i:03}"),
            &path,
            lane_width,
            ScenarioKind::DoubleSwerve,
            world_seed,
        );
        let k = ((path.len() - 1) as f64 * obstacle_frac).round() as usize;
        let p = path.points[k];
        let pose = Pose2D::new(p[0], p[1], path.headings[k]);
        scenario.grid.occupy_rect(&pose, 4.5, 1.7);
        worlds.push(scenario);
    }
    worlds
}
