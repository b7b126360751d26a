//! Clusters three synthetic bundles of paths and reports the partition.
//!
//! Output: target/example-output/cluster_paths/cluster_means.csv

use latticelearn::clustering::{kmeans_paths, path_distance};
use latticelearn::dataset::{write_sampled_csv, NamedPath};
use latticelearn::geometry::SampledPath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A noisy arc bundle: y = amp * sin(x) plus per-path jitter.
fn bundle(amp: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<SampledPath> {
    (0..count)
        .map(|_| {
            let jitter: f64 = rng.gen_range(-0.05..0.05);
            let points: Vec<[f64; 2]> = (0..=50)
                .map(|k| {
                    let x = k as f64 * 0.1;
                    [x, amp * x.sin() + jitter]
                })
                .collect();
            SampledPath::from_points(0.1, points).expect("bundle paths are valid")
        })
        .collect()
}

fn main() -> latticelearn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut paths = Vec::new();
    for amp in [-0.6, 0.0, 0.6] {
        paths.extend(bundle(amp, 8, &mut rng));
    }
    let model = kmeans_paths(&paths, 3, 0, 100)?;
    println!("k = {}, inertia = {:.4} m^2", model.k, model.inertia);
    for c in 0..model.k {
        let members = model.members(c);
        let spread = members
            .iter()
            .map(|&i| path_distance(&paths[i], &model.means[c]).expect("equal lengths"))
            .fold(0.0f64, f64::max);
        println!(
            "  cluster {c}: {:2} members, worst distance to mean {:.3} m",
            members.len(),
            spread
        );
    }
    // Inertia never rises across assignment passes.
    for w in model.inertia_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "inertia rose: {} -> {}", w[0], w[1]);
    }

    let means: Vec<NamedPath> = model
        .means
        .iter()
        .enumerate()
        .map(|(c, m)| NamedPath {
            id: format!("mean_{c}"),
            path: m.clone(),
        })
        .collect();
    let out = std::path::Path::new("target/example-output/cluster_paths");
    std::fs::create_dir_all(out)?;
    write_sampled_csv(&out.join("cluster_means.csv"), &means)?;
    println!("wrote {}", out.join("cluster_means.csv").display());
    Ok(())
}
