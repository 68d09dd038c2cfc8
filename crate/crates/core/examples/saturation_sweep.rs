//! Coupled thresholds of the rate-1/2 parallel concatenation as the coupling
//! memory grows, next to the uncoupled BP and potential thresholds.
//!
//! cargo run --release --example saturation_sweep -- 50

use sctc::coupled::{coupled_threshold, CouplingSpec, IterationLimits};
use sctc::ensembles::{build_system, Ensemble};
use sctc::potential::{bp_threshold, potential_threshold_from};

fn main() -> sctc::Result<()> {
    let length: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let sys = build_system(Ensemble::Pcc, "1,5/7")?;
    let bp = bp_threshold(&sys, 1e-6)?;
    let star = potential_threshold_from(&sys, bp.lower, 1e-6)?;
    println!("uncoupled: eps_bp = {:.6}, eps_star = {:.6}", bp.value, star.value);
    println!("L = {length}");
    println!("{:>3} {:>10} {:>15} {:>7}", "m", "eps_c", "eps_star-eps_c", "probes");
    for m in 0..=3 {
        let spec = CouplingSpec::new(length, m)?;
        let r = coupled_threshold(&sys, &spec, 1e-4, &IterationLimits::default())?;
        println!("{m:>3} {:>10.6} {:>15.2e} {:>7}", r.value, star.value - r.value, r.iterations);
    }
    Ok(())
}
