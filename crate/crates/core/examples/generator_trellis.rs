//! Parse octal generator matrices, build their trellises and show the
//! branch table, impulse responses and a short encoded block.
//!
//! cargo run --example generator_trellis -- "1,5/7"

use sctc::trellis::{build_trellis, parse_generator, StreamRole};

fn main() -> sctc::Result<()> {
    let texts: Vec<String> = match std::env::args().nth(1) {
        Some(t) => vec![t],
        None => vec!["1,5/7".into(), "1 0 1/7; 0 1 5/7".into()],
    };
    for text in &texts {
        let spec = parse_generator(text)?;
        let trellis = build_trellis(&spec)?;
        println!("generator {text}");
        println!(
            "  {} input(s), {} output(s), memory {}, {} states, controllable: {}",
            spec.num_inputs(),
            spec.num_outputs(),
            trellis.memory(),
            trellis.num_states(),
            trellis.is_controllable()
        );
        for i in 0..spec.num_inputs() {
            for j in 0..spec.num_outputs() {
                let r = spec.entry(i, j);
                println!("  G[{i}][{j}] = {}/{}", r.num.to_octal(), r.den.to_octal());
            }
        }
        let roles: Vec<&str> = trellis
            .streams()
            .iter()
            .map(|s| match s.role {
                StreamRole::Input => "input",
                StreamRole::Parity => "parity",
            })
            .collect();
        println!("  streams: {roles:?}");

        println!("  branches (state, input) -> (next, output bits):");
        for state in 0..trellis.num_states() as u64 {
            for input in 0..1u64 << trellis.num_inputs() {
                let (next, bits) = trellis.branch(state, input);
                println!("    ({state}, {input:0w$b}) -> ({next}, {bits:0n$b})", w = trellis.num_inputs(), n = roles.len());
            }
        }

        for i in 0..spec.num_inputs() {
            let response = trellis.impulse_response(i, 12);
            for (s, bits) in response.iter().enumerate() {
                let row: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
                println!("  impulse on input {i}, stream {s}: {row}");
            }
        }

        let inputs: Vec<Vec<u8>> = (0..spec.num_inputs())
            .map(|i| (0..8).map(|t| ((t * 5 + i * 3) % 7 < 3) as u8).collect())
            .collect();
        let coded = trellis.encode(&inputs)?;
        println!("  encoded block (with termination):");
        for (s, bits) in coded.iter().enumerate() {
            let row: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
            println!("    stream {s}: {row}");
        }
        println!();
    }
    Ok(())
}
