//! Solves for the optimal recovery of the optimized code and reads off a Kraus
//! representation of it, sorted by weight.

use adqec::channels::{choi_to_kraus, kraus_to_choi, nqubit_ad};
use adqec::codes::{encoding_channel, optimized_code};
use adqec::optimizer::{optimal_recovery, SdpSettings};

fn main() -> adqec::error::Result<()> {
    let gamma = 0.05;
    let noise = kraus_to_choi(&nqubit_ad(gamma, 4)?);
    let enc = encoding_channel(&optimized_code(gamma)?);
    let step = optimal_recovery(&enc, &noise, &SdpSettings::default())?;
    println!("optimal F = {:.10} ({} iterations)", step.fidelity, step.iterations);

    // the recovery acts 16 -> 2; each Kraus operator is 2x16
    let kraus = choi_to_kraus(&step.choi, 1e-6)?;
    let mut weights: Vec<f64> = kraus.kraus().iter().map(|k| k.frobenius_norm().powi(2)).collect();
    weights.sort_by(|a, b| b.total_cmp(a));
    println!("{} Kraus operators above the rank cutoff; weights:", kraus.len());
    for w in weights {
        println!("  {w:.6}");
    }
    println!("completeness defect {:.2e}", kraus.completeness_defect());
    Ok(())
}
