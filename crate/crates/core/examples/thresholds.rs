//! BP and potential thresholds of the three ensembles.
//!
//! cargo run --release --example thresholds

use std::time::Instant;

use sctc::cli::{threshold_report, DEFAULT_RATE_HALF, DEFAULT_RATE_TWO_THIRDS};
use sctc::ensembles::{build_system, Ensemble};

fn main() -> sctc::Result<()> {
    println!("{:<5} {:<20} {:>10} {:>10} {:>8}", "", "generator", "eps_bp", "eps_star", "seconds");
    for (e, g) in [
        (Ensemble::Pcc, DEFAULT_RATE_HALF),
        (Ensemble::Scc, DEFAULT_RATE_HALF),
        (Ensemble::Bcc, DEFAULT_RATE_TWO_THIRDS),
    ] {
        let start = Instant::now();
        let sys = build_system(e, g)?;
        let r = threshold_report(&sys, g, 1e-6)?;
        println!(
            "{:<5} {:<20} {:>10.6} {:>10.6} {:>8.1}",
            e.to_string(),
            g,
            r.eps_bp,
            r.eps_star,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
