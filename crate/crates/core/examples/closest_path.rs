//! Scores a demonstration path against a small control set with the
//! closest-path dynamic program and draws the reproduction next to it.
//!
//! Output: target/example-output/closest_path/reproduction.svg

use latticelearn::closest_path::{closest_path, greedy_bound, start_vertex};
use latticelearn::geometry::SampledPath;
use latticelearn::lattice::{concatenate_actions, LatticeConfig};
use latticelearn::spiral::{generate_dense_control_set, DenseSetConfig};
use latticelearn::svg::{palette, SvgDoc};

fn main() -> latticelearn::Result<()> {
    let cfg = DenseSetConfig {
        lattice: LatticeConfig::with_heading_count(0.5, 0.5, 4)?,
        x_range: [0.5, 2.0],
        y_range: [-1.0, 1.0],
        theta_endpoints: vec![0.0, std::f64::consts::FRAC_PI_2],
        kappa_max: 0.8,
        delta: 0.1,
    };
    let set = generate_dense_control_set(&cfg)?;

    // A gentle swerve the set cannot reproduce exactly.
    let delta = 0.1;
    let points: Vec<[f64; 2]> = (0..=60)
        .map(|k| {
            let x = k as f64 * delta;
            [x, 0.35 * (0.8 * x).sin()]
        })
        .collect();
    let demo = SampledPath::from_points(delta, points)?;

    let bound = greedy_bound(&demo, &set)?;
    let result = closest_path(&demo, &set, Some(bound))?;
    println!("greedy bound:    {:.4} m", bound);
    println!("optimal score:   {:.4} m", result.score);
    println!("states expanded: {}", result.states_expanded);
    println!("actions chosen:  {:?}", result.actions);
    assert!(result.score <= bound, "bound must dominate the optimum");

    let chain: Vec<_> = result.actions.iter().map(|&i| set.get(i)).collect();
    let reproduction =
        concatenate_actions(&set.lattice, set.delta, start_vertex(&demo, &set), &chain)?;
    let mut doc = SvgDoc::new();
    doc.polyline(&demo.points, palette(0), 0.04);
    doc.polyline(&reproduction.points, palette(1), 0.04);
    let out = std::path::Path::new("target/example-output/closest_path");
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("reproduction.svg"), doc.finish())?;
    println!("wrote {}", out.join("reproduction.svg").display());
    Ok(())
}
