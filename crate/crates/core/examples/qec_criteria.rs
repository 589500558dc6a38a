//! Knill-Laflamme matrices of the optimized code, their deviation from exact
//! correctability, and the order at which the residual vanishes.

use adqec::codes::{leung_code, optimized_code};
use adqec::experiments::default_grid;
use adqec::qec_criteria::{deviation_max, qec_matrices, residual_order, ErrorSubset, ERROR_LABELS, FIRST_ORDER_COUNT};

fn main() -> adqec::error::Result<()> {
    let gamma = 0.05;
    let q = qec_matrices(&optimized_code(gamma)?, gamma)?;
    println!("nonzero <0_L|E_a† E_b|1_L> at γ = {gamma}:");
    for (a, row) in ERROR_LABELS.iter().enumerate() {
        for (b, col) in ERROR_LABELS.iter().enumerate() {
            let v = q.m01[(a, b)];
            if v.norm() > 1e-14 {
                println!("  {row} , {col}: {:+.6}", v.re);
            }
        }
    }
    let first_order_max = (0..FIRST_ORDER_COUNT)
        .flat_map(|a| (0..FIRST_ORDER_COUNT).map(move |b| (a, b)))
        .map(|(a, b)| q.m01[(a, b)].norm())
        .fold(0.0, f64::max);
    println!("largest entry among at most one decay: {first_order_max:.1e}");

    let small = 1e-3;
    let opt = deviation_max(&qec_matrices(&optimized_code(small)?, small)?);
    let leung = deviation_max(&qec_matrices(&leung_code(), small)?);
    println!("max |ΔM| / γ at γ = {small}: optimized {:.4}, Leung {:.4}", opt.max_abs / small, leung.max_abs / small);

    for subset in [ErrorSubset::UpToFirstOrder, ErrorSubset::All] {
        let fit = residual_order(optimized_code, subset, &default_grid())?;
        println!("residual over {subset:?} scales like γ^{:.3}", fit.slope);
    }
    Ok(())
}
