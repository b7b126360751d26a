//! End-to-end miniature of the full experiment, library calls only: plan
//! demonstration paths with the dense set on training worlds, slice and
//! cluster them, learn a sparse set, then race all sets on held-out
//! worlds and emit the report.
//!
//! Output: target/example-output/pipeline/report/summary.csv

use std::collections::BTreeMap;

use latticelearn::baseline_dl::reduce_control_set_dl;
use latticelearn::clustering::kmeans_paths;
use latticelearn::eval::{emit_reports, ReportInputs, ResultRow, SetSummary};
use latticelearn::geometry::{normalize_to_origin, slice_sliding_windows};
use latticelearn::grid::VehicleFootprint;
use latticelearn::optimizer::{learn_control_set, LearnerConfig, ObjectiveParams};
use latticelearn::planner::Planner;
use latticelearn::scenario::synth_worlds;
use latticelearn::spiral::{generate_dense_control_set, DenseSetConfig};

fn main() -> latticelearn::Result<()> {
    let dense = generate_dense_control_set(&DenseSetConfig::default())?;
    println!("dense set: {} actions", dense.len());

    // Demonstrations: dense-set plans on training worlds, sliced into
    // normalized 10 m windows.
    let train_worlds = synth_worlds(6, 100, 3.7, 0.1);
    let planner = Planner::new(&dense, VehicleFootprint::default(), 0.2);
    let mut slices = Vec::new();
    for world in &train_worlds {
        let demo = planner.plan(world)?.path;
        for s in slice_sliding_windows(&demo, 10.0, 1.0)? {
            slices.push(normalize_to_origin(&s));
        }
    }
    println!("training slices: {}", slices.len());
    let clusters = kmeans_paths(&slices, 4, 0, 100)?;

    let params = ObjectiveParams {
        lambda: 0.311,
        dense_size: dense.len(),
    };
    // Wider candidate sampling and patience than the defaults: the
    // learned set has to cover held-out worlds, not just the six demos.
    let knobs = LearnerConfig {
        candidates_per_round: 64,
        no_improve_rounds: 12,
        ..LearnerConfig::default()
    };
    let state = learn_control_set(&clusters, &dense, &params, &knobs)?;
    println!(
        "learned set: {} actions, matching term {:.3} m",
        state.learned.len(),
        state.final_matching
    );
    let reduced = reduce_control_set_dl(&dense, 1.1);

    // Race on held-out worlds.
    let eval_worlds = synth_worlds(4, 200, 3.7, 0.1);
    let sets = [
        ("dense", &dense),
        ("dl", &reduced),
        ("learned", &state.learned),
    ];
    let mut rows = Vec::new();
    let mut planned = BTreeMap::new();
    for (name, set) in &sets {
        let planner = Planner::new(set, VehicleFootprint::default(), 0.2);
        for repeat in 0..2 {
            for world in &eval_worlds {
                // A world a set cannot solve is a data point, not a crash.
                let row = match planner.plan(world) {
                    Ok(result) => {
                        if repeat == 0 {
                            planned
                                .insert((world.id.clone(), name.to_string()), result.path.clone());
                        }
                        ResultRow {
                            scenario_id: world.id.clone(),
                            set_name: name.to_string(),
                            cost: result.cost,
                            expansions: result.expansions,
                            wall_time_s: result.wall_time_s,
                            success: result.success,
                        }
                    }
                    Err(latticelearn::Error::NoPlan | latticelearn::Error::EmptyGoal) => {
                        ResultRow {
                            scenario_id: world.id.clone(),
                            set_name: name.to_string(),
                            cost: 0.0,
                            expansions: 0,
                            wall_time_s: 0.0,
                            success: false,
                        }
                    }
                    Err(e) => return Err(e),
                };
                rows.push(row);
            }
        }
    }

    let inputs = ReportInputs {
        sets: sets
            .iter()
            .map(|(name, set)| SetSummary {
                name: name.to_string(),
                size: set.len(),
            })
            .collect(),
        rows,
        planned,
        references: eval_worlds
            .iter()
            .map(|w| (w.id.clone(), w.reference_path.clone()))
            .collect(),
        plan_manifest: None,
    };
    let out = std::path::Path::new("target/example-output/pipeline/report");
    emit_reports(&inputs, out)?;
    println!("wrote {}", out.join("summary.csv").display());
    println!("{}", std::fs::read_to_string(out.join("summary.csv"))?);
    Ok(())
}
