//! Alternating optimization of encoding and recovery from random starting
//! encodings, compared with the closed-form optimized code.
//!
//! `cargo run --release --example alternating_optimization -- 0.05 4`

use adqec::channels::{kraus_to_choi, nqubit_ad};
use adqec::codes::{encoding_channel, optimized_code};
use adqec::experiments::{aligned_overlap, code_subspace};
use adqec::optimizer::{alternate_optimize, optimal_recovery, SdpSettings};

fn main() -> adqec::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let gamma: f64 = args.next().map_or(0.05, |s| s.parse().expect("γ"));
    let restarts: usize = args.next().map_or(4, |s| s.parse().expect("restart count"));

    let noise = kraus_to_choi(&nqubit_ad(gamma, 4)?);
    let settings = SdpSettings { restarts, max_rounds: 600, extrapolate: true, ..SdpSettings::default() };
    let res = alternate_optimize(&noise, &settings)?;
    for r in &res.restarts {
        println!("restart {}: F = {:.10} after {} rounds", r.restart_index, r.fidelity, r.fidelity_trace.len());
    }

    let code = optimized_code(gamma)?;
    let reference = optimal_recovery(&encoding_channel(&code), &noise, &SdpSettings::default())?;
    let (overlap, alignment) = aligned_overlap(&code.isometry(), &code_subspace(&res.enc_choi, 2)?, 4, 0);
    println!("best F = {:.10}, closed-form code F = {:.10}", res.fidelity, reference.fidelity);
    println!("code-space overlap {overlap:.5} (qubit order {:?})", alignment.permutation);
    Ok(())
}
