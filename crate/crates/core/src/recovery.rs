//! Closed-form recovery channels for the optimized code and a check that
//! they undo single decays.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::codes::{basis_ket, ket_combination, optimized_amplitudes, optimized_code, CodePair};
use crate::error::{QecError, Result};
use crate::matrix::{inner, ComplexMatrix};
use crate::qec_criteria::{error_set, ERROR_LABELS, FIRST_ORDER_COUNT};
use crate::random::random_state;

/// Range of γ over which the fitted operator set was tabulated.
pub const FIT_RANGE: (f64, f64) = (0.01, 0.1);

/// A named recovery channel on four qubits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryFixture {
    pub label: String,
    pub gamma: f64,
    pub channel: KrausChannel,
    /// `‖Σ R†R - I‖_F`.
    pub completeness_defect: f64,
    /// Set when γ lies outside the range the constants were fitted on.
    pub outside_fit_range: bool,
    pub alpha_beta: Option<AlphaBeta>,
}

/// Weights of the no-decay correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    /// Series value, the one used in the analytical channel.
    pub alpha: f64,
    pub beta: f64,
    /// True if the series exceeded 1 and was clamped.
    pub clamped: bool,
    /// Objective at the series point.
    pub series_residual: f64,
    /// Exact minimizer of the objective on `α² + β² = 1`, `α, β >= 0`.
    pub exact_alpha: f64,
    pub exact_beta: f64,
    pub exact_residual: f64,
}

/// `|(α+β)a + (β-α)(1-γ)/√2 - (1-γ)/√2|`, the mismatch between the two
/// logical amplitudes after the no-decay branch is recovered.
pub fn balance_objective(gamma: f64, alpha: f64, beta: f64) -> f64 {
    let (a, _) = optimized_amplitudes(gamma);
    let c = (1.0 - gamma) / std::f64::consts::SQRT_2;
    ((alpha + beta) * a + (beta - alpha) * c - c).abs()
}

/// Series `α = a + 0.71γ + 0.76γ²`, `β = √(1-α²)`, plus the exact minimizer.
pub fn alpha_beta(gamma: f64) -> Result<AlphaBeta> {
    optimized_code(gamma)?;
    let (a, _) = optimized_amplitudes(gamma);
    let series = a + 0.71 * gamma + 0.76 * gamma * gamma;
    let clamped = series > 1.0;
    let alpha = series.min(1.0);
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();

    let f = |theta: f64| balance_objective(gamma, theta.cos(), theta.sin());
    let theta = minimize_on_quarter_circle(f);
    Ok(AlphaBeta {
        alpha,
        beta,
        clamped,
        series_residual: balance_objective(gamma, alpha, beta),
        exact_alpha: theta.cos(),
        exact_beta: theta.sin(),
        exact_residual: f(theta),
    })
}

/// Grid scan over `[0, π/2]`, then golden-section refinement around the
/// best grid point.
fn minimize_on_quarter_circle(f: impl Fn(f64) -> f64) -> f64 {
    let n = 4096;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let best = (0..=n).min_by(|&i, &j| f(i as f64 * h).total_cmp(&f(j as f64 * h))).unwrap_or(0);
    let (mut lo, mut hi) = ((best as f64 - 1.0).max(0.0) * h, ((best + 1).min(n)) as f64 * h);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// `|u><v|` for 16-dimensional vectors.
fn ketbra(u: &[Complex64], v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::outer(u, v)
}

fn fixture(
    label: &str,
    gamma: f64,
    ops: Vec<ComplexMatrix>,
    alpha_beta: Option<AlphaBeta>,
    outside: bool,
) -> Result<RecoveryFixture> {
    let channel = KrausChannel::unchecked(16, 16, ops)?;
    Ok(RecoveryFixture {
        label: label.to_string(),
        gamma,
        completeness_defect: channel.completeness_defect(),
        channel,
        outside_fit_range: outside,
        alpha_beta,
    })
}

/// The three weight-two states completing `|1_L>` on span{0011, 0101, 1010, 1100}.
pub fn weight_two_complement() -> [Vec<Complex64>; 3] {
    [
        ket_combination(&[(-0.5, "0011"), (0.5, "0101"), (0.5, "1010"), (0.5, "1100")]),
        ket_combination(&[(0.5, "0011"), (-0.5, "0101"), (0.5, "1010"), (0.5, "1100")]),
        ket_combination(&[(0.5, "0011"), (0.5, "0101"), (0.5, "1010"), (-0.5, "1100")]),
    ]
}

/// Eight-operator recovery that corrects every single decay exactly.
pub fn analytical_recovery(gamma: f64) -> Result<RecoveryFixture> {
    let code = optimized_code(gamma)?;
    let ab = alpha_beta(gamma)?;
    let (z, o) = (code.zero_logical(), code.one_logical());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k = basis_ket;
    let single =
        |zero_from: &str, one_from: &[(f64, &str)]| &ketbra(z, &k(zero_from)) + &ketbra(o, &ket_combination(one_from));
    let mut ops = vec![
        single("0111", &[(-s, "0010"), (s, "0100")]),
        single("1011", &[(s, "0001"), (s, "1000")]),
        single("1101", &[(s, "0001"), (-s, "1000")]),
        single("1110", &[(s, "0010"), (s, "0100")]),
        ketbra(z, &k("1001")),
        ketbra(z, &k("0110")),
        &ketbra(z, &ket_combination(&[(ab.alpha, "0000"), (ab.beta, "1111")])) + &ketbra(o, o),
    ];
    let mut last = ketbra(z, &ket_combination(&[(ab.beta, "0000"), (-ab.alpha, "1111")]));
    for psi in weight_two_complement() {
        last += &ketbra(&psi, &psi);
    }
    ops.push(last);
    fixture("analytical", gamma, ops, Some(ab), false)
}

/// Ten-operator recovery with tabulated coefficients; `R1` and `R6` carry
/// the fitted γ dependence `√(1 ∓ 2√2 γ²)/√2`.
// the four-digit constants are kept as tabulated, not replaced by 1/√2
#[allow(clippy::approx_constant)]
pub fn fitted_recovery(gamma: f64) -> Result<RecoveryFixture> {
    let code = optimized_code(gamma)?;
    if 2.0 * std::f64::consts::SQRT_2 * gamma * gamma > 1.0 {
        return Err(QecError::Domain(format!("fitted coefficients undefined at γ = {gamma}")));
    }
    let (z, o) = (code.zero_logical(), code.one_logical());
    let (minus, plus) = fitted_weights(gamma);
    let to_zero = |terms: &[(f64, &str)]| ketbra(z, &ket_combination(terms));
    let to_one = |terms: &[(f64, &str)]| ketbra(o, &ket_combination(terms));
    let single = |zero: [f64; 4], one: [f64; 4]| {
        let zs = ["0111", "1011", "1101", "1110"];
        let os = ["0001", "0010", "0100", "1000"];
        let zt: Vec<(f64, &str)> = zero.iter().copied().zip(zs).collect();
        let ot: Vec<(f64, &str)> = one.iter().copied().zip(os).collect();
        &to_zero(&zt) + &to_one(&ot)
    };
    // pairs (x, y) enter as x(<0011| - <1100|) + y(<0101| + <1010|) + w(<0110| - <1001|)
    let double = |x: f64, y: f64, w: f64| {
        to_zero(&[(x, "0011"), (-x, "1100"), (y, "0101"), (y, "1010"), (w, "0110"), (-w, "1001")])
    };
    let ops = vec![
        -(&to_zero(&[(minus, "0000"), (plus, "1111")]) + &ketbra(o, o)),
        single([-0.7735, 0.0997, 0.4077, -0.4749], [0.3588, 0.2111, -0.8828, -0.2177]),
        single([0.2749, 0.6843, -0.3314, -0.5885], [0.2495, -0.6105, -0.2217, 0.7182]),
        single([-0.2840, 0.7002, 0.0506, 0.6530], [0.5309, 0.6626, 0.2610, 0.4594]),
        single([0.4954, 0.1774, 0.8493, -0.0406], [0.7260, -0.3790, 0.3216, -0.4752]),
        &to_zero(&[(-0.5, "0011"), (0.5, "0101"), (-0.5, "1010"), (-0.5, "1100")])
            + &to_one(&[(-minus, "1111"), (plus, "0000")]),
        double(-0.0823, 0.6412, -0.2866),
        double(0.2401, -0.2454, -0.6180),
        double(-0.6600, -0.1693, -0.1891),
        to_zero(&[(0.0011, "0101"), (0.0011, "1010"), (0.7071, "0110"), (0.7071, "1001")]),
    ];
    let outside = !(FIT_RANGE.0..=FIT_RANGE.1).contains(&gamma);
    fixture("fitted", gamma, ops, None, outside)
}

/// `(√(1 - 2√2γ²)/√2, √(1 + 2√2γ²)/√2)`; the squares sum to one.
pub fn fitted_weights(gamma: f64) -> (f64, f64) {
    let x = 2.0 * std::f64::consts::SQRT_2 * gamma * gamma;
    (((1.0 - x) / 2.0).sqrt(), ((1.0 + x) / 2.0).sqrt())
}

/// Post-recovery state fidelities for specific error branches.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FirstOrderReport {
    /// Minimum over single decays and random logical inputs.
    pub min_fidelity: f64,
    /// `(label, min fidelity)` per single decay.
    pub per_error: Vec<(String, f64)>,
    /// `(label, fidelity)` for the double decays 0110 and 1001 applied to `|0_L>`.
    pub double_decay_on_zero: Vec<(String, f64)>,
    /// Minimum over random inputs of the no-decay branch (exact only at γ = 0).
    pub no_decay_min: f64,
    pub samples: usize,
}

/// Fidelity of `Σ_i R_i E |ψ>` (as a mixed state) with `|ψ>`. Branches that
/// annihilate the state report 1.
fn branch_fidelity(recovery: &KrausChannel, error: &ComplexMatrix, psi: &[Complex64]) -> f64 {
    let damaged = error.apply(psi);
    let mut overlap = 0.0;
    let mut weight = 0.0;
    for r in recovery.kraus() {
        let out = r.apply(&damaged);
        overlap += inner(psi, &out).norm_sqr();
        weight += inner(&out, &out).re;
    }
    if weight < 1e-300 {
        1.0
    } else {
        overlap / weight
    }
}

/// Checks that single decays are undone on 20 random logical states.
pub fn verify_first_order(code: &CodePair, fixture: &RecoveryFixture, gamma: f64) -> Result<FirstOrderReport> {
    if (fixture.gamma - gamma).abs() > 1e-12 {
        return Err(QecError::Invalid(format!("fixture built for γ = {} but checked at γ = {gamma}", fixture.gamma)));
    }
    if code.dim() != 16 {
        return Err(QecError::DimensionMismatch("expected a four-qubit code".into()));
    }
    let samples = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1d);
    let inputs: Vec<Vec<Complex64>> = (0..samples)
        .map(|_| {
            let c = random_state(&mut rng, 2);
            code.encode_state(c[0], c[1])
        })
        .collect();
    let errors = error_set(gamma)?;
    let ch = &fixture.channel;
    let min_over = |e: &ComplexMatrix| inputs.iter().map(|psi| branch_fidelity(ch, e, psi)).fold(1.0, f64::min);

    let per_error: Vec<(String, f64)> =
        (1..FIRST_ORDER_COUNT).map(|i| (ERROR_LABELS[i].to_string(), min_over(&errors.kraus()[i]))).collect();
    let min_fidelity = per_error.iter().map(|p| p.1).fold(1.0, f64::min);
    let double_decay_on_zero = ["0110", "1001"]
        .iter()
        .map(|label| {
            let idx = ERROR_LABELS.iter().position(|l| l == label).expect("label in error set");
            (label.to_string(), branch_fidelity(ch, &errors.kraus()[idx], code.zero_logical()))
        })
        .collect();
    Ok(FirstOrderReport {
        min_fidelity,
        per_error,
        double_decay_on_zero,
        no_decay_min: min_over(&errors.kraus()[0]),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{check_cptp_kraus, nqubit_ad};
    use crate::fidelity::{scheme_fidelity, Decoding, Recovery, SchemeSpec};

    fn domain_grid() -> Vec<f64> {
        vec![0.0, 0.01, 0.03, 0.05, 0.1, 0.15, 0.2, 0.25]
    }

    #[test]
    fn series_values() {
        let ab = alpha_beta(0.0).unwrap();
        assert!((ab.alpha - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let ab = alpha_beta(0.05).unwrap();
        let oracle = (1.0 - 1.0 / (2.0 * 0.95f64.powi(2))).sqrt() + 0.71 * 0.05 + 0.76 * 0.0025;
        assert!((ab.alpha - oracle).abs() < 1e-15);
        assert!((ab.alpha - 0.705220).abs() < 5e-7, "{}", ab.alpha);
        assert!((ab.alpha.powi(2) + ab.beta.powi(2) - 1.0).abs() < 1e-15);
        assert!(!ab.clamped);
    }

    #[test]
    fn exact_minimizer_at_zero() {
        // a = (1-γ)/√2 at γ = 0, so the objective is |√2 β - 1/√2|
        let ab = alpha_beta(0.0).unwrap();
        assert!((ab.exact_beta - 0.5).abs() < 1e-9);
        assert!((ab.exact_alpha - 3f64.sqrt() / 2.0).abs() < 1e-9);
        assert!(ab.exact_residual < 1e-10);
        for g in domain_grid() {
            let ab = alpha_beta(g).unwrap();
            assert!(ab.exact_residual <= ab.series_residual + 1e-12);
        }
    }

    #[test]
    fn series_stays_below_one_on_the_domain() {
        for k in 0..=2900 {
            let ab = alpha_beta(k as f64 * 1e-4).unwrap();
            assert!(!ab.clamped && ab.alpha <= 1.0 && ab.beta >= 0.0);
        }
    }

    #[test]
    fn analytical_recovery_is_exactly_cptp() {
        for g in domain_grid() {
            let fx = analytical_recovery(g).unwrap();
            assert_eq!(fx.channel.len(), 8);
            assert!(fx.completeness_defect < 1e-12, "γ={g}: {}", fx.completeness_defect);
            assert!(check_cptp_kraus(&fx.channel, 1e-12).passes);
        }
        assert!(analytical_recovery(0.3).is_err());
    }

    #[test]
    fn analytical_corrects_single_decays() {
        for g in domain_grid() {
            let code = optimized_code(g).unwrap();
            let fx = analytical_recovery(g).unwrap();
            let report = verify_first_order(&code, &fx, g).unwrap();
            assert!((report.min_fidelity - 1.0).abs() < 1e-10, "γ={g}: {report:?}");
            for (_, f) in &report.double_decay_on_zero {
                assert!((f - 1.0).abs() < 1e-10);
            }
        }
        let report =
            verify_first_order(&optimized_code(0.0).unwrap(), &analytical_recovery(0.0).unwrap(), 0.0).unwrap();
        assert!((report.no_decay_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r1_projects_back_onto_the_input() {
        let g = 0.07;
        let code = optimized_code(g).unwrap();
        let fx = analytical_recovery(g).unwrap();
        let errors = error_set(g).unwrap();
        let e = &errors.kraus()[1];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let c = random_state(&mut rng, 2);
            let psi = code.encode_state(c[0], c[1]);
            let out = fx.channel.kraus()[0].apply(&e.apply(&psi));
            let norm = inner(&out, &out).re.sqrt();
            assert!((inner(&psi, &out).norm() - norm).abs() < 1e-12);
        }
    }

    #[test]
    fn operators_map_into_code_and_complement() {
        let g = 0.05;
        let code = optimized_code(g).unwrap();
        let mut allowed = vec![code.zero_logical().to_vec(), code.one_logical().to_vec()];
        allowed.extend(weight_two_complement());
        let proj = allowed.iter().fold(ComplexMatrix::zeros(16, 16), |acc, v| &acc + &ComplexMatrix::outer(v, v));
        for fx in [analytical_recovery(g).unwrap(), fitted_recovery(g).unwrap()] {
            for r in fx.channel.kraus() {
                assert!((&proj * r).distance(r) < 1e-12);
            }
        }
        let code_proj = code.projector();
        for r in fitted_recovery(g).unwrap().channel.kraus() {
            assert!((&code_proj * r).distance(r) < 1e-12);
        }
    }

    #[test]
    fn fitted_coefficients() {
        let (m, p) = fitted_weights(0.1);
        assert!((m - 0.697035).abs() < 5e-7, "{m}");
        assert!((m * m + p * p - 1.0).abs() < 1e-15);
        for g in [0.01, 0.04, 0.07, 0.1] {
            let fx = fitted_recovery(g).unwrap();
            assert_eq!(fx.channel.len(), 10);
            assert!(fx.completeness_defect <= 5e-3, "γ={g}: {}", fx.completeness_defect);
            assert!(!fx.outside_fit_range);
        }
        assert!(fitted_recovery(0.2).unwrap().outside_fit_range);
        assert!(fitted_recovery(0.005).unwrap().outside_fit_range);
    }

    #[test]
    fn recovery_beats_no_recovery() {
        for g in [0.01, 0.04, 0.07, 0.1] {
            let code = optimized_code(g).unwrap();
            let noise = nqubit_ad(g, 4).unwrap();
            let bare = scheme_fidelity(&SchemeSpec::uncorrected(code.clone(), noise.clone()).unwrap()).unwrap();
            for fx in [analytical_recovery(g).unwrap(), fitted_recovery(g).unwrap()] {
                let spec = SchemeSpec::new(
                    code.clone(),
                    noise.clone(),
                    Recovery::Physical(fx.channel, Decoding::InverseEncoding),
                )
                .unwrap();
                assert!(scheme_fidelity(&spec).unwrap() > bare, "γ={g}");
            }
        }
    }

    #[test]
    fn analytical_fidelity_coefficient() {
        let g = 0.05;
        let code = optimized_code(g).unwrap();
        let spec = SchemeSpec::new(
            code,
            nqubit_ad(g, 4).unwrap(),
            Recovery::Physical(analytical_recovery(g).unwrap().channel, Decoding::InverseEncoding),
        )
        .unwrap();
        let c = (1.0 - scheme_fidelity(&spec).unwrap()) / (g * g);
        assert!((1.6..2.1).contains(&c), "{c}");
    }

    #[test]
    fn mismatched_gamma_is_rejected() {
        let fx = analytical_recovery(0.05).unwrap();
        assert!(verify_first_order(&optimized_code(0.05).unwrap(), &fx, 0.06).is_err());
    }
}
