//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line to
//! stdout (bypassing the test harness capture) so the summary shows up in
//! plain `cargo test` output.
//!
//! Criterion 6 compares against a reference table of closed forms that
//! disagrees with direct computation in several entries; it is expected to
//! report FAIL and is the only criterion allowed to.

use std::io::Write;
use std::time::Instant;

use adqec::channels::{compose, kraus_to_choi, nqubit_ad, KrausChannel};
use adqec::codes::{encoding_channel, leung_code, optimized_code};
use adqec::experiments::{compare_codewords, default_grid, fit_infidelity, sweep, Scheme, SweepConfig};
use adqec::fidelity::{f_map, fidelity_direct, fidelity_from_choi};
use adqec::matrix::{inv_sqrt_psd, ComplexMatrix};
use adqec::optimizer::{alternate_optimize, optimal_recovery, solve_linear_cptp_max, SdpSettings};
use adqec::qec_criteria::{
    deviation_max, optimized_closed_forms, qec_matrices, residual_order, ErrorSubset, QecMatrices,
};
use adqec::random::{random_hermitian, random_isometry, random_matrix};
use adqec::recovery::{analytical_recovery, verify_first_order};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criteria allowed to report FAIL; see the module docs.
const KNOWN_FAILING: &[usize] = &[6];

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, start: Instant, pass: bool, detail: String) -> Outcome {
    let line = format!(
        "criterion {id:>2} [{}] {name}: {detail} ({:.1} s)\n",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    Outcome { id, pass, detail }
}

fn sdp_coefficient(scheme: Scheme) -> f64 {
    let config = SweepConfig {
        grid: default_grid(),
        schemes: vec![scheme],
        settings: SdpSettings::default(),
        custom_code: None,
    };
    let out = sweep(&config).unwrap();
    assert!(out.converged(), "{scheme} sweep did not converge");
    fit_infidelity(&out.records).unwrap().coefficient
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let c = sdp_coefficient(Scheme::OptimizedSdp);
    report(1, "optimized code + optimal recovery", t, (c - 1.09).abs() <= 0.15, format!("c = {c:.4}, need 1.09 ± 0.15"))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let c = sdp_coefficient(Scheme::LeungSdp);
    report(2, "Leung code + optimal recovery", t, (c - 1.25).abs() <= 0.15, format!("c = {c:.4}, need 1.25 ± 0.15"))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let c = sdp_coefficient(Scheme::OptimizedAnalytical);
    let pass = (1.6..=2.1).contains(&c) && c < 2.5;
    report(3, "optimized code + analytical recovery", t, pass, format!("c = {c:.4}, need [1.6, 2.1]"))
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let g = 0.05;
    let noise = kraus_to_choi(&nqubit_ad(g, 4).unwrap());
    let reference = optimal_recovery(&encoding_channel(&optimized_code(g).unwrap()), &noise, &SdpSettings::default())
        .unwrap()
        .fidelity;
    let settings = SdpSettings { restarts: 10, max_rounds: 600, extrapolate: true, ..SdpSettings::default() };
    let res = alternate_optimize(&noise, &settings).unwrap();
    let worst = res.restarts.iter().map(|r| r.fidelity).fold(f64::INFINITY, f64::min);
    report(
        4,
        "alternation from random encodings",
        t,
        res.fidelity >= reference - 1e-4,
        format!("best F = {:.8}, worst restart {:.8}, reference {:.8}", res.fidelity, worst, reference),
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let settings = SdpSettings { restarts: 1, max_rounds: 1000, extrapolate: true, ..SdpSettings::default() };
    let res = compare_codewords(&default_grid(), &settings).unwrap();
    let worst = res.iter().min_by(|a, b| a.overlap.total_cmp(&b.overlap)).unwrap();
    let small = res.iter().find(|c| (c.gamma - 0.01).abs() < 1e-12).unwrap();
    let pass = worst.overlap >= 0.99 && small.overlap >= 0.999;
    report(
        5,
        "optimized code space matches the closed form",
        t,
        pass,
        format!("min overlap {:.5} at γ = {}, {:.6} at γ = 0.01", worst.overlap, worst.gamma, small.overlap),
    )
}

/// The reference closed forms (1-based indices in the comments).
fn reference_closed_forms(g: f64) -> QecMatrices {
    let c = Complex64::from;
    let h = 1.0 - 1.0 / (2.0 * (1.0 - g).powi(2));
    let mut m00 = ComplexMatrix::zeros(11, 11);
    let mut m01 = ComplexMatrix::zeros(11, 11);
    let mut m11 = ComplexMatrix::zeros(11, 11);

    // <0|E†E|1>: A(1,6) = A(1,7) = A(1,11) = -A(1,10), A(6,1) = A(10,1) = A(11,1) = -A(7,1)
    let row = g * (1.0 - g).powi(2) / (2.0 * 2f64.sqrt());
    for (k, s) in [(5, 1.0), (6, 1.0), (10, 1.0), (9, -1.0)] {
        m01[(0, k)] = c(s * row);
    }
    let col = g * (1.0 - g) / 2.0 * h.sqrt();
    for (k, s) in [(5, 1.0), (9, 1.0), (10, 1.0), (6, -1.0)] {
        m01[(k, 0)] = c(s * col);
    }

    // <0|E†E|0>: diagonal
    m00[(0, 0)] = c(1.0 + 0.5 * (1.0 - g).powi(2) - 1.0 / (2.0 * (1.0 - g).powi(2)));
    for k in 1..5 {
        m00[(k, k)] = c(g * h);
    }
    for k in 5..11 {
        m00[(k, k)] = c(g * g * h);
    }

    // <1|E†E|1>
    m11[(0, 0)] = c(1.0 - 2.0 * g + g * g);
    for k in 1..5 {
        m11[(k, k)] = c(g / 2.0 - g * g + g.powi(3) / 2.0);
    }
    let q = g * g / 4.0 - g.powi(3) / 2.0 + g.powi(4) / 4.0;
    let sign = |k: usize| if k == 9 { -1.0 } else { 1.0 };
    for &i in &[5, 6, 9, 10] {
        for &j in &[5, 6, 9, 10] {
            m11[(i, j)] = c(sign(i) * sign(j) * q);
        }
    }
    QecMatrices {
        gamma: g,
        m00,
        m01,
        m11,
        error_labels: adqec::qec_criteria::ERROR_LABELS.iter().map(|s| s.to_string()).collect(),
    }
}

/// The same matrices with error labels read in the opposite qubit order,
/// which swaps 1100 with 0011 and 1010 with 0101.
fn reversed_labels(q: &QecMatrices) -> QecMatrices {
    let map = |k: usize| match k {
        5 => 10,
        10 => 5,
        6 => 9,
        9 => 6,
        k => k,
    };
    let permute = |m: &ComplexMatrix| ComplexMatrix::from_fn(11, 11, |a, b| m[(map(a), map(b))]);
    QecMatrices { m00: permute(&q.m00), m01: permute(&q.m01), m11: permute(&q.m11), ..q.clone() }
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let (mut worst, mut corrected) = (0.0f64, 0.0f64);
    for g in [0.01, 0.05, 0.1] {
        let direct = qec_matrices(&optimized_code(g).unwrap(), g).unwrap();
        let reference = reference_closed_forms(g);
        // the sign patterns of the reference match the reversed labelling, so
        // give it the better of the two readings
        let diff = direct.max_difference(&reference).min(reversed_labels(&direct).max_difference(&reference));
        worst = worst.max(diff);
        corrected = corrected.max(direct.max_difference(&optimized_closed_forms(g).unwrap()));
    }
    report(
        6,
        "QEC matrices against the reference closed forms",
        t,
        worst <= 1e-12,
        format!("max entrywise difference {worst:.3e}, need 1e-12 (corrected forms: {corrected:.3e})"),
    )
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let g = 1e-3;
    let opt = deviation_max(&qec_matrices(&optimized_code(g).unwrap(), g).unwrap()).max_abs / g;
    let leung = deviation_max(&qec_matrices(&leung_code(), g).unwrap()).max_abs / g;
    let target = 1.0 / (2.0 * 2f64.sqrt());
    let pass = (opt - target).abs() <= 0.005 && (leung - 0.5).abs() <= 0.005;
    report(
        7,
        "deviation asymptotics",
        t,
        pass,
        format!("optimized {opt:.5} (need {target:.5}), Leung {leung:.5} (need 0.5)"),
    )
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let fit = residual_order(optimized_code, ErrorSubset::UpToFirstOrder, &default_grid()).unwrap();
    report(8, "first-order residual exponent", t, fit.slope >= 1.9, format!("slope {:.4}, need >= 1.9", fit.slope))
}

fn random_channel(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, rank: usize) -> KrausChannel {
    let v = random_isometry(rng, d_out * rank, d_in);
    let kraus = (0..rank).map(|a| ComplexMatrix::from_fn(d_out, d_in, |j, i| v[(a * d_out + j, i)])).collect();
    KrausChannel::new(d_in, d_out, kraus).unwrap()
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = if trial % 5 == 0 { 16 } else { 4 };
        let enc = random_channel(&mut rng, 2, n, 1 + trial % 3);
        let noise = random_channel(&mut rng, n, n, 1 + trial % 4);
        // a channel down to a qubit needs at least n/2 Kraus operators
        let rec = random_channel(&mut rng, n, 2, n / 2 + trial % 2);
        let via_choi =
            fidelity_from_choi(&kraus_to_choi(&rec), &f_map(&kraus_to_choi(&noise), &kraus_to_choi(&enc)).unwrap())
                .unwrap();
        let composed = compose(&rec, &compose(&noise, &enc).unwrap()).unwrap();
        worst = worst.max((via_choi - fidelity_direct(&composed).unwrap()).abs());
    }
    report(
        9,
        "Choi and Kraus fidelities agree",
        t,
        worst <= 1e-9,
        format!("max difference {worst:.3e} over 50 triples"),
    )
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let mut defect = 0.0f64;
    let mut min_f = 1.0f64;
    for g in [0.01, 0.05, 0.1] {
        let fixture = analytical_recovery(g).unwrap();
        defect = defect.max(fixture.channel.completeness_defect());
        let r = verify_first_order(&optimized_code(g).unwrap(), &fixture, g).unwrap();
        min_f = min_f.min(r.min_fidelity);
    }
    let pass = defect <= 1e-12 && (1.0 - min_f) <= 1e-10;
    report(
        10,
        "analytical recovery is exact on single decays",
        t,
        pass,
        format!("completeness defect {defect:.3e}, min first-order fidelity 1 - {:.3e}", 1.0 - min_f),
    )
}

/// Best objective over single-qubit channels by sampling and hill climbing on
/// the Stinespring isometry.
fn search_oracle(c: &ComplexMatrix, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = |v: &ComplexMatrix| -> f64 {
        let kraus = (0..4).map(|a| ComplexMatrix::from_fn(2, 2, |j, i| v[(a * 2 + j, i)])).collect();
        let ch = KrausChannel::unchecked(2, 2, kraus).unwrap();
        kraus_to_choi(&ch).matrix().trace_product(c).re
    };
    let mut best = random_isometry(&mut rng, 8, 2);
    let mut best_val = value(&best);
    for _ in 0..5000 {
        let v = random_isometry(&mut rng, 8, 2);
        let val = value(&v);
        if val > best_val {
            best = v;
            best_val = val;
        }
    }
    let mut step = 0.1;
    let mut misses = 0;
    while step > 1e-8 {
        let trial = &best + &random_matrix(&mut rng, 8, 2).scale(step);
        let trial = &trial * &inv_sqrt_psd(&(trial.adjoint() * &trial)).unwrap();
        let val = value(&trial);
        if val > best_val {
            best = trial;
            best_val = val;
            misses = 0;
        } else {
            misses += 1;
            if misses >= 40 {
                step *= 0.6;
                misses = 0;
            }
        }
    }
    best_val
}

fn criterion_11() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for k in 0..5 {
        let c = random_hermitian(&mut rng, 4);
        let sol = solve_linear_cptp_max(&c, 2, 2, &SdpSettings::default()).unwrap();
        let oracle = search_oracle(&c, 100 + k);
        // the solver may beat the oracle; it may not lose to it
        worst = worst.max(oracle - sol.objective).max((sol.objective - oracle).abs());
    }
    report(11, "single-qubit solver against search", t, worst <= 1e-4, format!("max gap {worst:.3e}, need 1e-4"))
}

#[test]
fn acceptance() {
    let outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    let unexpected: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_FAILING.contains(&o.id))
        .map(|o| format!("criterion {}: {}", o.id, o.detail))
        .collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
