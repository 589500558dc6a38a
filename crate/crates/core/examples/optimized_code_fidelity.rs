//! Entanglement fidelity of the optimized and Leung codes with their optimal
//! recoveries, compared with the uncorrected qubit.

use adqec::channels::{ad_kraus, kraus_to_choi, nqubit_ad};
use adqec::codes::{encoding_channel, leung_code, optimized_code};
use adqec::fidelity::fidelity_direct;
use adqec::optimizer::{optimal_recovery, SdpSettings};

fn main() -> adqec::error::Result<()> {
    let settings = SdpSettings::default();
    println!("{:>6} {:>14} {:>14} {:>14}", "gamma", "optimized", "leung", "bare qubit");
    for gamma in [0.01, 0.05, 0.1] {
        let noise = kraus_to_choi(&nqubit_ad(gamma, 4)?);
        let opt = optimal_recovery(&encoding_channel(&optimized_code(gamma)?), &noise, &settings)?;
        let leung = optimal_recovery(&encoding_channel(&leung_code()), &noise, &settings)?;
        let bare = fidelity_direct(&ad_kraus(gamma)?)?;
        println!("{gamma:>6} {:>14.10} {:>14.10} {:>14.10}", opt.fidelity, leung.fidelity, bare);
        println!(
            "{:>6} {:>14.4} {:>14.4} {:>14.4}   (1 - F) / gamma^2",
            "",
            (1.0 - opt.fidelity) / (gamma * gamma),
            (1.0 - leung.fidelity) / (gamma * gamma),
            (1.0 - bare) / (gamma * gamma)
        );
    }
    Ok(())
}
