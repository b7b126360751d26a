//! Planar poses, demonstration paths, and arc-length resampling.
//!
//! Every path in this crate is carried as a [`SampledPath`]: points spaced a
//! fixed arc-length step `delta` apart, so that the k-th point of any two
//! paths can be compared directly. All downstream scoring, clustering, and
//! search code relies on that index-equals-arc-length convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used when comparing accumulated arc lengths.
pub const ARC_EPS: f64 = 1e-9;

/// A planar pose: position in meters, heading in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D { x, y, theta }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Wraps an angle into `(-pi, pi]`. Angles already in range pass through
/// bit-for-bit, which keeps repeated normalization idempotent.
pub fn normalize_angle(a: f64) -> f64 {
    if a > -std::f64::consts::PI && a <= std::f64::consts::PI {
        return a;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Smallest signed difference `a - b` wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

/// Raw planar polyline, the input currency for resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
}

impl Polyline {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegeneratePath(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            if dist(w[0], w[1]) < 1e-12 {
                return Err(Error::DegeneratePath(
                    "polyline has coincident consecutive points".into(),
                ));
            }
        }
        Ok(Polyline { points })
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }
}

/// A path sampled at a fixed arc-length step.
///
/// Interior segments have length `delta`; the final segment absorbs the
/// leftover tail and has length in `[delta/2, 3*delta/2)`. `headings[i]` is
/// the tangent direction of segment `i` (chord direction); the last entry
/// repeats its predecessor so `headings.len() == points.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub delta: f64,
    pub points: Vec<[f64; 2]>,
    pub headings: Vec<f64>,
}

impl SampledPath {
    /// Builds a path from pre-spaced points, deriving chord headings.
    pub fn from_points(delta: f64, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegeneratePath(format!(
                "sampled path needs at least 2 points, got {}",
                points.len()
            )));
        }
        let mut headings = Vec::with_capacity(points.len());
        for w in points.windows(2) {
            if dist(w[0], w[1]) < 1e-12 {
                return Err(Error::DegeneratePath(
                    "sampled path has coincident consecutive points".into(),
                ));
            }
            headings.push((w[1][1] - w[0][1]).atan2(w[1][0] - w[0][0]));
        }
        headings.push(*headings.last().unwrap());
        Ok(SampledPath {
            delta,
            points,
            headings,
        })
    }

    /// Degenerate single-point path; used for trivial plans whose start
    /// already satisfies the goal.
    pub fn single_point(delta: f64, point: [f64; 2], heading: f64) -> Self {
        SampledPath {
            delta,
            points: vec![point],
            headings: vec![heading],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start_pose(&self) -> Pose2D {
        Pose2D::new(self.points[0][0], self.points[0][1], self.headings[0])
    }

    pub fn end_pose(&self) -> Pose2D {
        let last = self.points.len() - 1;
        Pose2D::new(
            self.points[last][0],
            self.points[last][1],
            self.headings[last],
        )
    }

    /// Total chord length of the sampled points.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }
}

/// Resamples a polyline at arc-length steps of `delta`.
///
/// Points sit at arc lengths `0, delta, 2*delta, ...`. If the leftover tail
/// is at least `delta/2` the polyline endpoint is appended as one more
/// sample; otherwise the tail is merged into the last segment so the output
/// still ends exactly at the polyline endpoint.
pub fn resample_by_arclength(poly: &Polyline, delta: f64) -> Result<SampledPath> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let pts = &poly.points;
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(0.0f64);
    for w in pts.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + dist(w[0], w[1]));
    }
    let total = *cum.last().unwrap();
    if total < delta / 2.0 - ARC_EPS {
        return Err(Error::DegeneratePath(format!(
            "polyline length {total:.6} shorter than delta/2 = {:.6}",
            delta / 2.0
        )));
    }
    let n_full = ((total + ARC_EPS) / delta).floor() as usize;
    let leftover = (total - n_full as f64 * delta).max(0.0);
    let append = leftover >= delta / 2.0 - ARC_EPS;
    // Number of regularly spaced samples after index 0. With a short tail the
    // last regular sample is dropped and the endpoint absorbs it.
    let regular = if append {
        n_full
    } else {
        n_full.saturating_sub(1)
    };
    let mut points = Vec::with_capacity(regular + 2);
    let mut seg = 0usize;
    for i in 0..=regular {
        let s = i as f64 * delta;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 {
            ((s - cum[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        points.push(lerp(pts[seg], pts[seg + 1], t));
    }
    points.push(*pts.last().unwrap());
    SampledPath::from_points(delta, points)
}

/// Signed Menger curvature at every sample: the inverse circumradius of each
/// interior point triple, positive for left turns. Endpoints copy their
/// neighbor's value.
pub fn curvature_profile(path: &SampledPath) -> Result<Vec<f64>> {
    let pts = &path.points;
    let n = pts.len();
    if n < 3 {
        return Err(Error::DegeneratePath(format!(
            "curvature needs at least 3 points, got {n}"
        )));
    }
    let mut kappa = vec![0.0f64; n];
    for i in 1..n - 1 {
        let a = [pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]];
        let b = [pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1]];
        let la = a[0].hypot(a[1]);
        let lb = b[0].hypot(b[1]);
        let lc = dist(pts[i + 1], pts[i - 1]);
        if la < 1e-12 || lb < 1e-12 || lc < 1e-12 {
            kappa[i] = 0.0;
            continue;
        }
        let cross = a[0] * b[1] - a[1] * b[0];
        kappa[i] = 2.0 * cross / (la * lb * lc);
    }
    kappa[0] = kappa[1];
    kappa[n - 1] = kappa[n - 2];
    Ok(kappa)
}

/// Cuts a path into fixed-arc-length windows advancing by `step` meters.
/// Only full windows are emitted; trailing partial windows are skipped.
pub fn slice_sliding_windows(
    path: &SampledPath,
    window: f64,
    step: f64,
) -> Result<Vec<SampledPath>> {
    if window < path.delta - ARC_EPS || step < path.delta - ARC_EPS {
        return Err(Error::InvalidParameter(
            "window and step must be at least one sample step".into(),
        ));
    }
    let n_w = ((window / path.delta).round() as usize).max(1);
    let n_s = ((step / path.delta).round() as usize).max(1);
    let n = path.points.len();
    let mut slices = Vec::new();
    let mut start = 0usize;
    while start + n_w <= n - 1 {
        let pts = path.points[start..=start + n_w].to_vec();
        slices.push(SampledPath::from_points(path.delta, pts)?);
        start += n_s;
    }
    Ok(slices)
}

/// Rigidly moves a path so it starts at the origin with heading zero.
/// Already-normalized paths come back bit-for-bit identical.
pub fn normalize_to_origin(path: &SampledPath) -> SampledPath {
    let p0 = path.points[0];
    let h0 = path.headings[0];
    let (s, c) = h0.sin_cos();
    let points = path
        .points
        .iter()
        .map(|p| {
            let dx = p[0] - p0[0];
            let dy = p[1] - p0[1];
            [c * dx + s * dy, -s * dx + c * dy]
        })
        .collect();
    let headings = path
        .headings
        .iter()
        .map(|h| normalize_angle(h - h0))
        .collect();
    SampledPath {
        delta: path.delta,
        points,
        headings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn straight(len: f64) -> Polyline {
        Polyline::new(vec![[0.0, 0.0], [len, 0.0]]).unwrap()
    }

    /// Analytic unit-radius quarter circle from the origin, initial heading
    /// zero, turning left: position at arc length s is (sin s, 1 - cos s).
    fn quarter_circle_point(s: f64) -> [f64; 2] {
        [s.sin(), 1.0 - s.cos()]
    }

    #[test]
    fn resample_straight_exact_multiple() {
        let p = resample_by_arclength(&straight(1.0), 0.25).unwrap();
        assert_eq!(p.len(), 5);
        for (i, pt) in p.points.iter().enumerate() {
            assert!((pt[0] - 0.25 * i as f64).abs() < 1e-12);
            assert!(pt[1].abs() < 1e-12);
        }
        assert!(p.headings.iter().all(|h| h.abs() < 1e-12));
    }

    #[test]
    fn resample_merges_short_tail_into_last_segment() {
        // Tail 0.1 < delta/2: the endpoint absorbs it, so the last segment
        // is 0.35 and the path still ends at x = 1.1.
        let p = resample_by_arclength(&straight(1.1), 0.25).unwrap();
        assert_eq!(p.len(), 5);
        assert!((p.points[3][0] - 0.75).abs() < 1e-12);
        assert!((p.points[4][0] - 1.1).abs() < 1e-12);
        let last_seg = dist(p.points[3], p.points[4]);
        assert!((last_seg - 0.35).abs() < 1e-12);
    }

    #[test]
    fn resample_appends_point_for_long_tail() {
        // Tail 0.15 >= delta/2 counts as its own final segment.
        let p = resample_by_arclength(&straight(1.15), 0.25).unwrap();
        assert_eq!(p.len(), 6);
        assert!((p.points[4][0] - 1.0).abs() < 1e-12);
        assert!((p.points[5][0] - 1.15).abs() < 1e-12);
    }

    #[test]
    fn resample_rejects_too_short_input() {
        let err = resample_by_arclength(&straight(0.1), 0.25).unwrap_err();
        assert!(matches!(err, Error::DegeneratePath(_)));
    }

    #[test]
    fn resample_quarter_circle_matches_arc_length_oracle() {
        // Fine polyline standing in for the analytic circle.
        let n = 4096;
        let arc = std::f64::consts::FRAC_PI_2;
        let poly = Polyline::new(
            (0..=n)
                .map(|i| quarter_circle_point(arc * i as f64 / n as f64))
                .collect(),
        )
        .unwrap();
        let input_len = poly.length();
        let p = resample_by_arclength(&poly, 0.1).unwrap();
        // 15 full steps fit into pi/2 ~ 1.5708 and the 0.0708 tail exceeds
        // delta/2, so the endpoint is appended: 17 points.
        assert_eq!(p.len(), 17);
        for (i, pt) in p.points.iter().take(16).enumerate() {
            let expect = quarter_circle_point(0.1 * i as f64);
            assert!(dist(*pt, expect) < 1e-5, "sample {i} deviates");
        }
        assert!(dist(p.points[16], quarter_circle_point(arc)) < 1e-5);
        for w in p.points[..16].windows(2) {
            assert!((dist(w[0], w[1]) - 0.1).abs() < 1e-3);
        }
        let tail = dist(p.points[15], p.points[16]);
        assert!((0.05..0.15).contains(&tail), "tail {tail}");
        assert!((p.arc_length() - input_len).abs() < 0.05);
    }

    #[test]
    fn curvature_circle_is_signed_inverse_radius() {
        for (r, sign) in [(2.0, 1.0), (5.0, 1.0), (10.0, 1.0), (5.0, -1.0)] {
            let delta = r / 10.0;
            let step = delta / r;
            let pts: Vec<[f64; 2]> = (0..=20)
                .map(|i| {
                    let a = step * i as f64;
                    [r * a.sin(), sign * r * (1.0 - a.cos())]
                })
                .collect();
            let path = SampledPath::from_points(delta, pts).unwrap();
            let kappa = curvature_profile(&path).unwrap();
            for k in kappa {
                let expect = sign / r;
                assert!(
                    (k - expect).abs() < 0.01 * expect.abs(),
                    "r={r} sign={sign}: kappa {k} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn curvature_straight_is_zero() {
        let p = resample_by_arclength(&straight(3.0), 0.25).unwrap();
        let kappa = curvature_profile(&p).unwrap();
        assert!(kappa.iter().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn slicing_emits_only_full_windows() {
        let p12 = resample_by_arclength(&straight(12.0), 0.1).unwrap();
        let slices = slice_sliding_windows(&p12, 10.0, 1.0).unwrap();
        assert_eq!(slices.len(), 3);
        for (i, s) in slices.iter().enumerate() {
            assert_eq!(s.len(), 101);
            assert!((s.points[0][0] - i as f64).abs() < 1e-9);
        }

        let p9 = resample_by_arclength(&straight(9.0), 0.1).unwrap();
        assert!(slice_sliding_windows(&p9, 10.0, 1.0).unwrap().is_empty());

        let p10 = resample_by_arclength(&straight(10.0), 0.1).unwrap();
        assert_eq!(slice_sliding_windows(&p10, 10.0, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn normalize_moves_start_to_origin_and_is_idempotent() {
        let pts: Vec<[f64; 2]> = (0..=10)
            .map(|i| {
                let s = 0.3 * i as f64;
                [3.0 + s * 0.8, -2.0 + s * 0.6 + 0.01 * s * s]
            })
            .collect();
        let path = SampledPath::from_points(0.3, pts).unwrap();
        let once = normalize_to_origin(&path);
        assert!(once.points[0][0].abs() < 1e-12 && once.points[0][1].abs() < 1e-12);
        assert!(once.headings[0].abs() < 1e-12);
        let twice = normalize_to_origin(&once);
        assert_eq!(once.points, twice.points);
        assert_eq!(once.headings, twice.headings);
    }

    fn dist_to_polyline(p: [f64; 2], poly: &Polyline) -> f64 {
        let mut best = f64::INFINITY;
        for seg in poly.points.windows(2) {
            let [ax, ay] = seg[0];
            let [bx, by] = seg[1];
            let (dx, dy) = (bx - ax, by - ay);
            let t = (((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            best = best.min(dist(p, [ax + t * dx, ay + t * dy]));
        }
        best
    }

    fn random_walk_polyline() -> impl Strategy<Value = Polyline> {
        proptest::collection::vec((0.3f64..2.0, -1.0f64..1.0), 3..8).prop_map(|segs| {
            let mut pts = vec![[0.0, 0.0]];
            let mut heading = 0.0f64;
            for (len, turn) in segs {
                heading += turn;
                let last = *pts.last().unwrap();
                pts.push([last[0] + len * heading.cos(), last[1] + len * heading.sin()]);
            }
            Polyline::new(pts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn normalize_preserves_pairwise_distances(poly in random_walk_polyline()) {
            let path = resample_by_arclength(&poly, 0.25).unwrap();
            let norm = normalize_to_origin(&path);
            prop_assert_eq!(path.len(), norm.len());
            for i in 0..path.len() {
                for j in (i + 1)..path.len() {
                    let before = dist(path.points[i], path.points[j]);
                    let after = dist(norm.points[i], norm.points[j]);
                    prop_assert!((before - after).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn resample_spacing_invariants_hold(poly in random_walk_polyline()) {
            let delta = 0.25;
            let path = resample_by_arclength(&poly, delta).unwrap();
            let n = path.len();
            prop_assert!(n >= 2);
            prop_assert_eq!(path.points[0], poly.points[0]);
            prop_assert_eq!(path.points[n - 1], *poly.points.last().unwrap());
            // Chords can only shorten relative to the delta arc spacing, and
            // with segments longer than delta at most one corner (turn up to
            // 1 rad) falls inside a span, bounding the shortening by cos(1/2).
            for w in path.points[..n - 1].windows(2) {
                let d = dist(w[0], w[1]);
                prop_assert!(d <= delta + 1e-9, "interior chord {d} exceeds delta");
                prop_assert!(d >= delta * 0.5f64.cos() - 1e-9, "interior chord {d} too short");
            }
            // Final span covers arc in [delta/2, 3*delta/2); its chord may
            // additionally shorten across up to two corners.
            let tail = dist(path.points[n - 2], path.points[n - 1]);
            prop_assert!(tail < 1.5 * delta + 1e-9, "tail {tail}");
            prop_assert!(tail >= 0.5 * delta * 1.0f64.cos() - 1e-9, "tail {tail}");
            for p in &path.points {
                prop_assert!(dist_to_polyline(*p, &poly) < 1e-9, "sample off the polyline");
            }
            prop_assert_eq!(path.headings.len(), path.points.len());
        }
    }
}
