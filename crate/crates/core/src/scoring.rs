//! Distance scores between demonstration paths and lattice paths.
//!
//! Both views of the score live here: the whole-path score compares two
//! sampled paths index by index, and the subpath score evaluates one
//! control action applied at a vertex against the slice of the
//! demonstration it covers. With action paths landing exactly on their
//! end vertices, the maximum of subpath scores along a chain equals the
//! whole-path score of the concatenation, bit for bit.

use crate::error::{Error, Result};
use crate::geometry::{dist, SampledPath};
use crate::lattice::{vertex_pose, ControlAction, LatticeConfig, LatticeVertex};

/// Maximum pointwise distance from `pd` to `pl`, compared index by index
/// over the length of `pd`. The lattice path may overshoot (it must end on
/// a vertex); it may not be shorter than the demonstration.
pub fn score_paths(pd: &SampledPath, pl: &SampledPath) -> Result<f64> {
    if pl.len() < pd.len() {
        return Err(Error::TooShort {
            needed: pd.len(),
            got: pl.len(),
        });
    }
    let mut worst = 0.0f64;
    for (a, b) in pd.points.iter().zip(pl.points.iter()) {
        let d = dist(*a, *b);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Shared core of the subpath score. Sample `m` of the action compares
/// against demonstration index `k + m`, clamped to the final index once
/// the demonstration is exhausted. The action's last sample is read as
/// the exact successor vertex pose. Returns `None` as soon as the score
/// provably exceeds `abort_above`, when given.
pub(crate) fn subpath_score_core(
    pd: &SampledPath,
    cfg: &LatticeConfig,
    u: LatticeVertex,
    c: &ControlAction,
    k: usize,
    abort_above: Option<f64>,
) -> Option<f64> {
    debug_assert_eq!(u.itheta, c.start_heading);
    let base = vertex_pose(&u, cfg).position();
    let end = vertex_pose(
        &LatticeVertex::new(u.ix + c.delta_ix, u.iy + c.delta_iy, c.end_heading),
        cfg,
    )
    .position();
    let last = pd.len() - 1;
    let n = c.n_segments;
    let mut worst = 0.0f64;
    for m in 0..=n {
        let p = if m == n {
            end
        } else {
            let q = c.path.points[m];
            [base[0] + q[0], base[1] + q[1]]
        };
        let d = dist(pd.points[(k + m).min(last)], p);
        if d > worst {
            worst = d;
            if let Some(limit) = abort_above {
                if worst > limit {
                    return None;
                }
            }
        }
    }
    Some(worst)
}

/// Score of one control action applied at vertex `u` while the
/// demonstration cursor sits at index `k`.
pub fn score_subpath(
    pd: &SampledPath,
    cfg: &LatticeConfig,
    u: LatticeVertex,
    c: &ControlAction,
    k: usize,
) -> Result<f64> {
    if u.itheta != c.start_heading {
        return Err(Error::HeadingMismatch);
    }
    if k >= pd.len() {
        return Err(Error::IndexError(format!(
            "demonstration index {k} out of range for {} points",
            pd.len()
        )));
    }
    Ok(subpath_score_core(pd, cfg, u, c, k, None).expect("unbounded score"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{apply_control_action, concatenate_actions, LatticeConfig};

    fn straight(cfg: &LatticeConfig, itheta: usize, cells: i64, delta: f64) -> ControlAction {
        let (s, c) = cfg.heading(itheta).sin_cos();
        let step = [c.round() as i64 * cells, s.round() as i64 * cells];
        let end = [step[0] as f64 * cfg.dx, step[1] as f64 * cfg.dy];
        let len = end[0].hypot(end[1]);
        let n = ((len / delta).round() as usize).max(1);
        let pts = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                [end[0] * t, end[1] * t]
            })
            .collect();
        ControlAction::new(
            cfg,
            itheta,
            step[0],
            step[1],
            itheta,
            len,
            SampledPath::from_points(delta, pts).unwrap(),
            None,
        )
        .unwrap()
    }

    fn line(delta: f64, n: usize, offset: [f64; 2]) -> SampledPath {
        let pts = (0..n)
            .map(|i| [offset[0] + delta * i as f64, offset[1]])
            .collect();
        SampledPath::from_points(delta, pts).unwrap()
    }

    #[test]
    fn uniform_offset_gives_the_offset_norm() {
        let pd = line(0.5, 10, [0.0, 0.0]);
        let pl = line(0.5, 13, [0.3, 0.4]);
        let s = score_paths(&pd, &pl).unwrap();
        assert!((s - 0.5).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn shorter_lattice_path_is_out_of_domain() {
        // The score's asymmetry is one of domain: swapping arguments of a
        // valid comparison fails outright when lengths differ.
        let pd = line(0.5, 10, [0.0, 0.0]);
        let pl = line(0.5, 13, [0.3, 0.4]);
        assert!(score_paths(&pd, &pl).is_ok());
        match score_paths(&pl, &pd) {
            Err(Error::TooShort { needed, got }) => {
                assert_eq!((needed, got), (13, 10));
            }
            other => panic!("expected TooShort, got {other:?}"),
        }
    }

    #[test]
    fn truncation_can_only_lower_the_score() {
        let pl = line(0.5, 12, [0.05, -0.1]);
        let mut prev = 0.0;
        for len in 2..=12 {
            let pd = line(0.5, len, [0.0, 0.0]);
            let s = score_paths(&pd, &pl).unwrap();
            assert!(s >= prev, "score shrank when extending: {s} < {prev}");
            prev = s;
        }
    }

    #[test]
    fn subpath_clamps_at_the_demonstration_end() {
        let cfg = LatticeConfig::with_heading_count(0.5, 0.5, 4).unwrap();
        let idx0 = cfg.exact_heading_index(0.0).unwrap();
        let a = straight(&cfg, idx0, 2, 0.25);
        let pd =
            SampledPath::from_points(0.25, vec![[0.0, 0.1], [0.25, 0.1], [0.5, 0.1], [0.75, 0.1]])
                .unwrap();
        let u = LatticeVertex::new(2, 0, idx0);
        let s = score_subpath(&pd, &cfg, u, &a, 2).unwrap();
        // Oracle: action samples at x = 1.0, 1.25, 1.5, 1.75, 2.0 compare
        // against pd[2], pd[3], pd[3], pd[3], pd[3].
        let mut expect = 0.0f64;
        for (m, x) in [1.0, 1.25, 1.5, 1.75, 2.0].iter().enumerate() {
            let i = (2 + m).min(3);
            expect = expect.max(dist(pd.points[i], [*x, 0.0]));
        }
        assert_eq!(s, expect);
    }

    #[test]
    fn subpath_rejects_wrong_heading_and_bad_index() {
        let cfg = LatticeConfig::with_heading_count(0.5, 0.5, 4).unwrap();
        let idx0 = cfg.exact_heading_index(0.0).unwrap();
        let a = straight(&cfg, idx0, 1, 0.25);
        let pd = line(0.25, 4, [0.0, 0.0]);
        let wrong = LatticeVertex::new(0, 0, (idx0 + 1) % 4);
        assert!(matches!(
            score_subpath(&pd, &cfg, wrong, &a, 0),
            Err(Error::HeadingMismatch)
        ));
        let u = LatticeVertex::new(0, 0, idx0);
        assert!(score_subpath(&pd, &cfg, u, &a, 4).is_err());
    }

    #[test]
    fn bounded_core_agrees_and_aborts() {
        let cfg = LatticeConfig::with_heading_count(0.5, 0.5, 4).unwrap();
        let idx0 = cfg.exact_heading_index(0.0).unwrap();
        let a = straight(&cfg, idx0, 2, 0.25);
        let pd = line(0.25, 5, [0.0, 0.3]);
        let u = LatticeVertex::new(0, 0, idx0);
        let full = score_subpath(&pd, &cfg, u, &a, 0).unwrap();
        assert_eq!(
            subpath_score_core(&pd, &cfg, u, &a, 0, Some(full)),
            Some(full)
        );
        assert_eq!(
            subpath_score_core(&pd, &cfg, u, &a, 0, Some(full * 0.9)),
            None
        );
    }

    #[test]
    fn chain_of_subpath_scores_equals_the_concatenation_score() {
        let cfg = LatticeConfig::with_heading_count(0.5, 0.5, 4).unwrap();
        let idx0 = cfg.exact_heading_index(0.0).unwrap();
        let a = straight(&cfg, idx0, 2, 0.25);
        let b = straight(&cfg, idx0, 1, 0.25);
        let u0 = LatticeVertex::new(0, 0, idx0);
        let (u1, k1) = apply_control_action(&u0, &a, 0).unwrap();
        let (_, k2) = apply_control_action(&u1, &b, k1).unwrap();
        let concat = concatenate_actions(&cfg, 0.25, u0, &[&a, &b]).unwrap();
        assert_eq!(concat.len(), k2 + 1);
        // A wobbly demonstration of exactly matching length.
        let pd_pts: Vec<[f64; 2]> = (0..concat.len())
            .map(|i| {
                let s = 0.25 * i as f64;
                [s + 0.01 * (i as f64).sin(), 0.04 * (s * 2.0).cos()]
            })
            .collect();
        let pd = SampledPath::from_points(0.25, pd_pts).unwrap();
        let s1 = score_subpath(&pd, &cfg, u0, &a, 0).unwrap();
        let s2 = score_subpath(&pd, &cfg, u1, &b, k1).unwrap();
        let whole = score_paths(&pd, &concat).unwrap();
        assert_eq!(s1.max(s2), whole);
    }
}
