//! Plans one synthetic double-swerve world with the dense set and its
//! arc-length-factor reduction, and draws both plans over the corridor.
//!
//! Output: target/example-output/plan_scenario/overlay.svg

use latticelearn::baseline_dl::reduce_control_set_dl;
use latticelearn::grid::VehicleFootprint;
use latticelearn::planner::Planner;
use latticelearn::scenario::synth_worlds;
use latticelearn::spiral::{generate_dense_control_set, DenseSetConfig};
use latticelearn::svg::{palette, SvgDoc};

fn main() -> latticelearn::Result<()> {
    let dense = generate_dense_control_set(&DenseSetConfig::default())?;
    let reduced = reduce_control_set_dl(&dense, 1.1);
    let world = synth_worlds(1, 7, 3.7, 0.1).remove(0);
    println!(
        "world {}: {:.1} m reference, grid {}x{} cells",
        world.id,
        world.reference_path.arc_length(),
        world.grid.width,
        world.grid.height
    );

    let mut doc = SvgDoc::new();
    doc.polyline(&world.reference_path.points, "#bbbbbb", 0.12);
    for (i, (name, set)) in [("dense", &dense), ("reduced", &reduced)]
        .iter()
        .enumerate()
    {
        let planner = Planner::new(set, VehicleFootprint::default(), world.grid.resolution);
        let result = planner.plan(&world)?;
        println!(
            "{name:>8} ({:4} actions): cost {:.2} m, {} expansions, {:.3} s",
            set.len(),
            result.cost,
            result.expansions,
            result.wall_time_s
        );
        doc.polyline(&result.path.points, palette(i), 0.06);
    }

    let out = std::path::Path::new("target/example-output/plan_scenario");
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("overlay.svg"), doc.finish())?;
    println!("wrote {}", out.join("overlay.svg").display());
    Ok(())
}
