//! Exact transfer functions against explicit set-propagation decoding on
//! long sampled trellises.
//!
//! cargo run --release --example oracle_validation -- 20

use sctc::cli::{random_points, validation_report};
use sctc::mc::McConfig;
use sctc::transfer::TransferFunction;

fn main() -> sctc::Result<()> {
    let count: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let mc = McConfig::with_seed(7);
    for gen in ["1,5/7", "1 0 1/7; 0 1 5/7"] {
        let tf = TransferFunction::from_generator(gen)?;
        let points = random_points(tf.num_streams(), count, mc.seed);
        let report = validation_report(&tf, &points, &mc)?;
        println!("generator {gen}: {} samples per point", mc.trials * (mc.window().1 - mc.window().0));
        for p in &report.points {
            let z: Vec<String> = p.z.iter().map(|z| format!("{z:+.2}")).collect();
            println!("  probs {:.3?} exact {:.5?} z [{}]", p.probs, p.exact, z.join(", "));
        }
        println!(
            "  {:.0}% of points within 4 stderr: {}\n",
            100.0 * report.fraction_within,
            if report.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}
