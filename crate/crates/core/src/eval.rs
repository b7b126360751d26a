//! Aggregation of planning runs into the comparison report.
//!
//! Scores planned paths against their references by worst curvature
//! deviation, tallies per-set win/loss differentials against the
//! baseline set, turns repeated timing rows into expansion and wall-time
//! speedups, and writes the report directory: a summary table, a
//! curvature scatter, and per-scenario path overlays. The first set in
//! the input is the baseline all ratios compare against. Expansion
//! counts are the primary speed metric — wall time depends on the
//! machine, so it is reported as min and median over repeats.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvature_profile, SampledPath};
use crate::svg::{palette, SvgDoc};

/// Worst pointwise curvature difference between a planned path and its
/// reference, truncated to the shorter of the two.
pub fn curvature_matching_score(planned: &SampledPath, reference: &SampledPath) -> Result<f64> {
    let kp = curvature_profile(planned)?;
    let kr = curvature_profile(reference)?;
    let n = kp.len().min(kr.len());
    let mut worst = 0.0f64;
    for i in 0..n {
        let d = (kp[i] - kr[i]).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Scenarios where the candidate scored strictly lower (better) minus
/// scenarios where it scored strictly higher; ties contribute nothing.
pub fn matching_differential(candidate: &[f64], baseline: &[f64]) -> Result<i64> {
    if candidate.len() != baseline.len() {
        return Err(Error::LengthMismatch(candidate.len(), baseline.len()));
    }
    let mut diff = 0i64;
    for (c, b) in candidate.iter().zip(baseline.iter()) {
        if c < b {
            diff += 1;
        } else if c > b {
            diff -= 1;
        }
    }
    Ok(diff)
}

/// One planning outcome row; repeats of the same scenario and set appear
/// as multiple rows differing only in wall time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub set_name: String,
    pub cost: f64,
    pub expansions: usize,
    pub wall_time_s: f64,
    pub success: bool,
}

/// Per (scenario, set) aggregate over repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub success: bool,
    pub cost: f64,
    pub expansions: usize,
    pub wall_min: f64,
    pub wall_median: f64,
}

/// Collapse repeat rows into one aggregate per (scenario, set). Planning
/// is deterministic, so repeats only vary in wall time: minimum and
/// median summarize it.
pub fn aggregate_rows(rows: &[ResultRow]) -> BTreeMap<(String, String), Aggregate> {
    let mut grouped: BTreeMap<(String, String), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        grouped
            .entry((row.scenario_id.clone(), row.set_name.clone()))
            .or_default()
            .push(row);
    }
    grouped
        .into_iter()
        .map(|(key, reps)| {
            let mut walls: Vec<f64> = reps.iter().map(|r| r.wall_time_s).collect();
            walls.sort_by(f64::total_cmp);
            let median = if walls.len() % 2 == 1 {
                walls[walls.len() / 2]
            } else {
                0.5 * (walls[walls.len() / 2 - 1] + walls[walls.len() / 2])
            };
            let agg = Aggregate {
                success: reps[0].success,
                cost: reps[0].cost,
                expansions: reps[0].expansions,
                wall_min: walls[0],
                wall_median: median,
            };
            (key, agg)
        })
        .collect()
}

/// Speedup and quality summary for one control set.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedupRow {
    pub set_name: String,
    pub set_size: usize,
    pub success_rate: f64,
    pub expansion_speedup: f64,
    pub wall_speedup_min: f64,
    pub wall_speedup_median: f64,
    pub matching_differential: i64,
}

/// A set's name and size as used in the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetSummary {
    pub name: String,
    pub size: usize,
}

/// Everything the report needs, already loaded.
pub struct ReportInputs {
    /// Sets in presentation order; the first is the baseline.
    pub sets: Vec<SetSummary>,
    pub rows: Vec<ResultRow>,
    /// Best planned path per (scenario_id, set_name).
    pub planned: BTreeMap<(String, String), SampledPath>,
    /// Reference path per scenario_id.
    pub references: BTreeMap<String, SampledPath>,
    /// Manifest of the planning run, echoed into the report manifest.
    pub plan_manifest: Option<serde_json::Value>,
}

/// Ratios of baseline totals to per-set totals over the scenarios both
/// solved, plus success rates and curvature differentials against the
/// baseline.
pub fn speedup_report(inputs: &ReportInputs) -> Result<Vec<SpeedupRow>> {
    let agg = aggregate_rows(&inputs.rows);
    let Some(first) = inputs.sets.first() else {
        return Ok(Vec::new());
    };
    let baseline = &first.name;
    let scenario_ids: Vec<String> = inputs.references.keys().cloned().collect();
    let scores = curvature_scores(inputs)?;
    let mut out = Vec::new();
    for set in &inputs.sets {
        let mut solved = 0usize;
        let mut b_exp = 0usize;
        let mut s_exp = 0usize;
        let mut b_min = 0.0f64;
        let mut s_min = 0.0f64;
        let mut b_med = 0.0f64;
        let mut s_med = 0.0f64;
        for id in &scenario_ids {
            let Some(sa) = agg.get(&(id.clone(), set.name.clone())) else {
                continue;
            };
            if sa.success {
                solved += 1;
            }
            let Some(ba) = agg.get(&(id.clone(), baseline.clone())) else {
                continue;
            };
            if sa.success && ba.success {
                b_exp += ba.expansions;
                s_exp += sa.expansions;
                b_min += ba.wall_min;
                s_min += sa.wall_min;
                b_med += ba.wall_median;
                s_med += sa.wall_median;
            }
        }
        // Differential over scenarios planned by both sets.
        let mut cand = Vec::new();
        let mut base = Vec::new();
        for id in &scenario_ids {
            if let (Some(c), Some(b)) = (
                scores.get(&(id.clone(), set.name.clone())),
                scores.get(&(id.clone(), baseline.clone())),
            ) {
                cand.push(*c);
                base.push(*b);
            }
        }
        out.push(SpeedupRow {
            set_name: set.name.clone(),
            set_size: set.size,
            success_rate: if scenario_ids.is_empty() {
                0.0
            } else {
                solved as f64 / scenario_ids.len() as f64
            },
            expansion_speedup: if s_exp > 0 {
                b_exp as f64 / s_exp as f64
            } else {
                f64::NAN
            },
            wall_speedup_min: if s_min > 0.0 { b_min / s_min } else { f64::NAN },
            wall_speedup_median: if s_med > 0.0 { b_med / s_med } else { f64::NAN },
            matching_differential: matching_differential(&cand, &base)?,
        });
    }
    Ok(out)
}

/// Curvature matching score per (scenario, set) with a planned path.
pub fn curvature_scores(inputs: &ReportInputs) -> Result<BTreeMap<(String, String), f64>> {
    let mut scores = BTreeMap::new();
    for ((id, set), path) in &inputs.planned {
        let Some(reference) = inputs.references.get(id) else {
            continue;
        };
        scores.insert(
            (id.clone(), set.clone()),
            curvature_matching_score(path, reference)?,
        );
    }
    Ok(scores)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::File(path.display().to_string(), e))
}

/// Write `summary.csv`, `curvature_scatter.svg`, one overlay SVG per
/// scenario, and `manifest.json` into `out_dir`.
pub fn emit_reports(inputs: &ReportInputs, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::File(out_dir.display().to_string(), e))?;
    let rows = speedup_report(inputs)?;
    let mut summary = String::from(
        "set,size,success_rate,expansion_speedup,wall_speedup_min,wall_speedup_median,matching_differential\n",
    );
    for r in &rows {
        summary.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{:.4},{}\n",
            r.set_name,
            r.set_size,
            r.success_rate,
            r.expansion_speedup,
            r.wall_speedup_min,
            r.wall_speedup_median,
            r.matching_differential
        ));
    }
    write_file(&out_dir.join("summary.csv"), &summary)?;

    // Scatter: baseline score on x, candidate score on y; below the
    // diagonal means the candidate matched the reference better.
    let scores = curvature_scores(inputs)?;
    let mut doc = SvgDoc::new();
    let max_score = scores.values().fold(0.0f64, |m, s| m.max(*s)).max(1e-6);
    doc.line(
        [0.0, 0.0],
        [max_score, max_score],
        "#888888",
        max_score / 200.0,
    );
    if let Some(first) = inputs.sets.first() {
        let baseline = &first.name;
        for (i, set) in inputs.sets.iter().enumerate().skip(1) {
            for id in inputs.references.keys() {
                if let (Some(c), Some(b)) = (
                    scores.get(&(id.clone(), set.name.clone())),
                    scores.get(&(id.clone(), baseline.clone())),
                ) {
                    doc.circle(*b, *c, max_score / 100.0, palette(i));
                }
            }
        }
    }
    doc.text(
        max_score * 0.55,
        -max_score * 0.05,
        max_score / 25.0,
        "baseline score",
    );
    write_file(&out_dir.join("curvature_scatter.svg"), &doc.finish())?;

    for (id, reference) in &inputs.references {
        let mut overlay = SvgDoc::new();
        overlay.polyline(&reference.points, "#bbbbbb", 0.12);
        for (i, set) in inputs.sets.iter().enumerate() {
            if let Some(path) = inputs.planned.get(&(id.clone(), set.name.clone())) {
                overlay.polyline(&path.points, palette(i), 0.06);
            }
        }
        write_file(
            &out_dir.join(format!("scenario_{id}.svg")),
            &overlay.finish(),
        )?;
    }

    let mut manifest = BTreeMap::new();
    manifest.insert(
        "sets".to_string(),
        serde_json::to_value(&inputs.sets).expect("set summaries serialize"),
    );
    manifest.insert(
        "scenario_count".to_string(),
        serde_json::Value::from(inputs.references.len()),
    );
    if let Some(m) = &inputs.plan_manifest {
        manifest.insert("plan_manifest".to_string(), m.clone());
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out_dir.join("manifest.json"), &json)?;
    Ok(())
}
