//! Exact extrinsic erasure probabilities of a component decoder, and the
//! scalar recursion functions built from them for the three ensembles.
//!
//! cargo run --release --example transfer_functions

use sctc::ensembles::{build_system, Ensemble};
use sctc::transfer::{StreamProbs, TransferFunction};

fn main() -> sctc::Result<()> {
    let tf = TransferFunction::from_generator("1,5/7")?;
    println!("rate-1/2 component 1,5/7: extrinsic (systematic, parity)");
    println!("{:>6} {:>6} {:>12} {:>12}", "p_s", "p_p", "f_s", "f_p");
    for &(ps, pp) in &[(0.0, 0.5), (0.25, 0.5), (0.5, 0.5), (0.5, 0.25), (0.75, 0.75), (1.0, 0.5), (1.0, 1.0)] {
        let out = tf.extrinsic(&StreamProbs::new(vec![ps, pp])?)?;
        println!("{ps:>6} {pp:>6} {:>12.9} {:>12.9}", out[0], out[1]);
    }
    println!("forward chain: {} subspaces, backward chain: {}", tf.forward_chain().len(), tf.backward_chain().len());

    let tf3 = TransferFunction::from_generator("1 0 1/7; 0 1 5/7")?;
    let out = tf3.extrinsic(&StreamProbs::uniform(3, 0.25)?)?;
    println!("\nrate-2/3 component at 0.25 on every stream: {:.9?}", out.as_slice());

    println!("\nscalar systems at eps = 0.6:");
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "x", "f pcc", "f scc", "g scc", "f bcc");
    let pcc = build_system(Ensemble::Pcc, "1,5/7")?;
    let scc = build_system(Ensemble::Scc, "1,5/7")?;
    let bcc = build_system(Ensemble::Bcc, "1 0 1/7; 0 1 5/7")?;
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        println!(
            "{x:>5.1} {:>12.9} {:>12.9} {:>12.9} {:>12.9}",
            pcc.f(x, 0.6)?,
            scc.f(x, 0.6)?,
            scc.g(x)?,
            bcc.f(x, 0.6)?
        );
    }
    Ok(())
}
