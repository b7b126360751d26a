//! Sweeps the arc-length factor of the baseline reduction over the
//! default dense set and prints the size curve.
//!
//! Output: target/example-output/reduce_dl/reduced_1.1.json

use latticelearn::baseline_dl::reduce_control_set_dl;
use latticelearn::spiral::{generate_dense_control_set, DenseSetConfig};

fn main() -> latticelearn::Result<()> {
    let dense = generate_dense_control_set(&DenseSetConfig::default())?;
    println!("dense set: {} actions", dense.len());
    let out = std::path::Path::new("target/example-output/reduce_dl");
    std::fs::create_dir_all(out)?;
    for factor in [1.0, 1.05, 1.1, 1.2, 1.5] {
        let reduced = reduce_control_set_dl(&dense, factor);
        println!("factor {factor:<4}: {:4} actions kept", reduced.len());
        assert!(reduced.len() <= dense.len());
        if factor == 1.1 {
            reduced.save(&out.join("reduced_1.1.json"))?;
        }
    }
    println!("wrote {}", out.join("reduced_1.1.json").display());
    Ok(())
}
