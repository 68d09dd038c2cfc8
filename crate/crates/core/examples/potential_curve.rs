//! Potential of the rate-1/2 parallel concatenation around its two
//! thresholds, written as CSV `x,eps,U,Uprime` for plotting.
//!
//! cargo run --release --example potential_curve > potential.csv

use sctc::cli::potential_table;
use sctc::ensembles::{build_system, Ensemble};
use sctc::potential::{min_potential_above, min_unstable_fixed_point};

fn main() -> sctc::Result<()> {
    let sys = build_system(Ensemble::Pcc, "1,5/7")?;
    let eps = [0.6, 0.6428, 0.6554, 0.7];
    print!("{}", potential_table(&sys, &eps, 201)?);

    for &e in &eps {
        match min_unstable_fixed_point(&sys, e)? {
            Some(u) => {
                let m = min_potential_above(&sys, e, u)?;
                eprintln!("eps {e}: smallest unstable fixed point {u:.6}, min U on [u, 1] = {:.3e} at x = {:.4}", m.u, m.x);
            }
            None => eprintln!("eps {e}: no nonzero fixed point, the recursion decodes"),
        }
    }
    Ok(())
}
