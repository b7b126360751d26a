//! Learns control sets at the two stock regularizer weights on walk data
//! over a planted subset. The corpus is easy enough that both weights
//! recover the planted actions exactly (matching term zero); the assert
//! pins the sparsity direction: the stronger weight never grows the set.
//!
//! Output: target/example-output/learn_set/learned_0311.json (and _00311)

use latticelearn::clustering::kmeans_paths;
use latticelearn::geometry::SampledPath;
use latticelearn::lattice::{
    apply_control_action, concatenate_actions, ControlSet, LatticeConfig, LatticeVertex,
};
use latticelearn::optimizer::{learn_control_set, LearnerConfig, ObjectiveParams};
use latticelearn::spiral::{generate_dense_control_set, DenseSetConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random chains over `planted` from origin vertices that cycle through
/// every heading, built to an exact segment total so each walk ends flush
/// on an action boundary and stays exactly reproducible by the planted
/// actions.
fn walks(dense: &ControlSet, planted: &[usize], count: usize, segments: usize) -> Vec<SampledPath> {
    let sub = dense.subset(planted).expect("planted indices are valid");
    let cfg = &sub.lattice;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::with_capacity(count);
    'walks: while out.len() < count {
        let start = LatticeVertex::new(0, 0, out.len() % cfg.heading_count());
        let mut u = start;
        let mut chain = Vec::new();
        let mut total = 0usize;
        while total < segments {
            let group = sub.for_heading(u.itheta);
            let fits: Vec<usize> = (0..group.len())
                .filter(|&j| total + group[j].n_segments <= segments)
                .collect();
            if fits.is_empty() {
                continue 'walks;
            }
            let j = fits[rng.gen_range(0..fits.len())];
            chain.push(&group[j]);
            total += group[j].n_segments;
            u = apply_control_action(&u, &group[j], 0).unwrap().0;
        }
        out.push(concatenate_actions(cfg, sub.delta, start, &chain).unwrap());
    }
    out
}

fn main() -> latticelearn::Result<()> {
    let cfg = DenseSetConfig {
        lattice: LatticeConfig::with_heading_count(0.5, 0.5, 4)?,
        x_range: [0.5, 2.0],
        y_range: [-1.0, 1.0],
        theta_endpoints: vec![0.0, std::f64::consts::FRAC_PI_2],
        kappa_max: 0.8,
        delta: 0.1,
    };
    let dense = generate_dense_control_set(&cfg)?;
    println!("dense set: {} actions", dense.len());

    // Plant the shortest straight and the first curve of every heading.
    let mut planted = Vec::new();
    for h in 0..dense.lattice.heading_count() {
        let group = dense.for_heading(h);
        let straight = (0..group.len())
            .filter(|&j| group[j].is_straight(&dense.lattice))
            .min_by(|&a, &b| group[a].arc_length.total_cmp(&group[b].arc_length))
            .expect("every heading has a straight");
        let curve = (0..group.len())
            .find(|&j| !group[j].is_straight(&dense.lattice))
            .expect("every heading has a curve");
        planted.push(dense.global_index(h, straight));
        planted.push(dense.global_index(h, curve));
    }
    planted.sort_unstable();
    let paths = walks(&dense, &planted, 30, 47);
    let clusters = kmeans_paths(&paths, 2, 0, 100)?;

    let out = std::path::Path::new("target/example-output/learn_set");
    std::fs::create_dir_all(out)?;
    let mut sizes = Vec::new();
    for (lambda, name) in [(0.311, "learned_0311"), (0.0311, "learned_00311")] {
        let params = ObjectiveParams {
            lambda,
            dense_size: dense.len(),
        };
        let state = learn_control_set(&clusters, &dense, &params, &LearnerConfig::default())?;
        println!(
            "lambda {lambda:<6}: {} actions, matching term {:.4} m, {} rounds",
            state.learned.len(),
            state.final_matching,
            state.history.len()
        );
        sizes.push(state.learned.len());
        state.learned.save(&out.join(format!("{name}.json")))?;
    }
    assert!(
        sizes[0] <= sizes[1],
        "stronger regularization must not grow the set"
    );
    println!("wrote {}", out.display());
    Ok(())
}
