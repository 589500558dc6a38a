//! Builds the four-qubit amplitude-damping channel, converts it between the
//! Kraus and Choi pictures and checks that both describe a CPTP map.

use adqec::channels::{ad_kraus, choi_to_kraus, kraus_to_choi, nqubit_ad};

fn main() -> adqec::error::Result<()> {
    let gamma = 0.1;
    let single = ad_kraus(gamma)?;
    println!(
        "single qubit: {} Kraus operators, completeness defect {:.2e}",
        single.len(),
        single.completeness_defect()
    );

    let noise = nqubit_ad(gamma, 4)?;
    let choi = kraus_to_choi(&noise);
    let report = choi.check_cptp(1e-9);
    println!(
        "four qubits: {} Kraus operators, Choi {}x{}, CPTP {} (min eigenvalue {:.2e}, trace defect {:.2e})",
        noise.len(),
        choi.matrix().rows(),
        choi.matrix().cols(),
        report.passes,
        report.min_eigenvalue,
        report.tp_deviation
    );

    // the damping patterns give the number of decays per operator
    let by_order = noise.patterns().expect("patterns are attached").iter().fold([0usize; 5], |mut acc, p| {
        acc[p.order()] += 1;
        acc
    });
    println!("operators by number of decays: {by_order:?}");

    let back = choi_to_kraus(&choi, 1e-10)?;
    let again = kraus_to_choi(&back);
    println!(
        "canonical Kraus form: {} operators, Choi round-trip error {:.2e}",
        back.len(),
        again.matrix().distance(choi.matrix())
    );
    Ok(())
}
