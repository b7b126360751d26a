//! Generates the default dense control set and prints a size breakdown.
//!
//! Output: target/example-output/dense_set/dense.json

use latticelearn::spiral::{generate_dense_control_set, DenseSetConfig};

fn main() -> latticelearn::Result<()> {
    let cfg = DenseSetConfig::default();
    let started = std::time::Instant::now();
    let set = generate_dense_control_set(&cfg)?;
    let elapsed = started.elapsed();
    println!(
        "dense set: {} actions over {} headings ({:.2}s)",
        set.len(),
        set.lattice.heading_count(),
        elapsed.as_secs_f64()
    );
    for h in 0..set.lattice.heading_count() {
        let group = set.for_heading(h);
        let straights = group.iter().filter(|a| a.is_straight(&set.lattice)).count();
        println!(
            "  heading {:2} ({:+.4} rad): {:3} actions, {} straight",
            h,
            set.lattice.heading(h),
            group.len(),
            straights
        );
    }
    let out = std::path::Path::new("target/example-output/dense_set");
    std::fs::create_dir_all(out)?;
    set.save(&out.join("dense.json"))?;
    println!("wrote {}", out.join("dense.json").display());
    Ok(())
}
