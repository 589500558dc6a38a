//! γ sweeps, infidelity fits and comparison of optimized code spaces with
//! the closed-form code.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{kraus_to_choi, nqubit_ad};
use crate::codes::{encoding_channel, leung_code, optimized_code, CodePair};
use crate::error::{QecError, Result};
use crate::fidelity::{scheme_fidelity, Decoding, Recovery, SchemeSpec};
use crate::matrix::{herm_eig, partial_trace, ComplexMatrix, Subsystem};
use crate::optimizer::{alternate_optimize_from, optimal_recovery, OptimizationResult, SdpSettings};
use crate::recovery::{analytical_recovery, fitted_recovery, RecoveryFixture};

/// Code and recovery combination evaluated by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "optimized+sdp")]
    OptimizedSdp,
    #[serde(rename = "leung+sdp")]
    LeungSdp,
    #[serde(rename = "optimized+analytical")]
    OptimizedAnalytical,
    #[serde(rename = "optimized+fitted")]
    OptimizedFitted,
    /// A user-supplied code with optimal recovery.
    #[serde(rename = "custom")]
    Custom,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::OptimizedSdp, Scheme::LeungSdp, Scheme::OptimizedAnalytical, Scheme::OptimizedFitted, Scheme::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OptimizedSdp => "optimized+sdp",
            Scheme::LeungSdp => "leung+sdp",
            Scheme::OptimizedAnalytical => "optimized+analytical",
            Scheme::OptimizedFitted => "optimized+fitted",
            Scheme::Custom => "custom",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = QecError;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| QecError::Invalid(format!("unknown scheme {s:?}")))
    }
}

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma: f64,
    pub scheme: String,
    pub fidelity: f64,
    pub infidelity: f64,
}

impl SweepRecord {
    pub fn new(gamma: f64, scheme: Scheme, fidelity: f64) -> Self {
        SweepRecord { gamma, scheme: scheme.name().to_string(), fidelity, infidelity: 1.0 - fidelity }
    }
}

/// Everything computed for one row, written to the JSON sidecar.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepDetail {
    pub record: SweepRecord,
    /// Present for the SDP schemes.
    pub optimization: Option<OptimizationResult>,
    /// Present for the closed-form recoveries.
    pub recovery: Option<RecoveryFixture>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub settings: SdpSettings,
    /// Required when `schemes` contains [`Scheme::Custom`].
    pub custom_code: Option<CodePair>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub details: Vec<SweepDetail>,
}

impl SweepOutput {
    pub fn converged(&self) -> bool {
        self.details.iter().all(|d| d.converged)
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// The default grid `0.01, 0.02, ..., 0.1`.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 100.0).collect()
}

fn sdp_row(code: &CodePair, gamma: f64, scheme: Scheme, settings: &SdpSettings) -> Result<SweepDetail> {
    let noise = kraus_to_choi(&nqubit_ad(gamma, code.qubits())?);
    let enc = encoding_channel(code);
    let step = optimal_recovery(&enc, &noise, settings)?;
    let result = OptimizationResult {
        enc_choi: enc,
        dr_choi: step.choi,
        fidelity: step.fidelity,
        fidelity_trace: vec![step.fidelity],
        rounds: 1,
        restart_index: 0,
        converged: step.converged,
        outer_converged: true,
        restarts: vec![],
    };
    Ok(SweepDetail {
        record: SweepRecord::new(gamma, scheme, step.fidelity),
        optimization: Some(result),
        recovery: None,
        converged: step.converged,
    })
}

fn fixture_row(gamma: f64, scheme: Scheme, fixture: RecoveryFixture) -> Result<SweepDetail> {
    let code = optimized_code(gamma)?;
    let spec = SchemeSpec::new(
        code,
        nqubit_ad(gamma, 4)?,
        Recovery::Physical(fixture.channel.clone(), Decoding::InverseEncoding),
    )?;
    let fidelity = scheme_fidelity(&spec)?;
    Ok(SweepDetail {
        record: SweepRecord::new(gamma, scheme, fidelity),
        optimization: None,
        recovery: Some(fixture),
        converged: true,
    })
}

fn sweep_row(gamma: f64, scheme: Scheme, config: &SweepConfig) -> Result<SweepDetail> {
    match scheme {
        Scheme::OptimizedSdp => sdp_row(&optimized_code(gamma)?, gamma, scheme, &config.settings),
        Scheme::LeungSdp => sdp_row(&leung_code(), gamma, scheme, &config.settings),
        Scheme::Custom => {
            let code = config
                .custom_code
                .as_ref()
                .ok_or_else(|| QecError::Invalid("the custom scheme needs a code file".into()))?;
            sdp_row(code, gamma, scheme, &config.settings)
        }
        Scheme::OptimizedAnalytical => fixture_row(gamma, scheme, analytical_recovery(gamma)?),
        Scheme::OptimizedFitted => fixture_row(gamma, scheme, fitted_recovery(gamma)?),
    }
}

/// Evaluates every (γ, scheme) pair; rows are ordered by γ, then by scheme
/// in the order given.
pub fn sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.settings.validate()?;
    if config.grid.is_empty() || config.schemes.is_empty() {
        return Err(QecError::Invalid("a sweep needs at least one γ and one scheme".into()));
    }
    if config.schemes.contains(&Scheme::Custom) && config.custom_code.is_none() {
        return Err(QecError::Invalid("the custom scheme needs a code file".into()));
    }
    let jobs: Vec<(f64, Scheme)> =
        config.grid.iter().flat_map(|&g| config.schemes.iter().map(move |&s| (g, s))).collect();
    let details = jobs.par_iter().map(|&(g, s)| sweep_row(g, s, config)).collect::<Result<Vec<_>>>()?;
    let records = details.iter().map(|d| d.record.clone()).collect();
    Ok(SweepOutput { records, details })
}

/// Writes `gamma,scheme,fidelity,infidelity` with 12 significant digits.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "scheme", "fidelity", "infidelity"])?;
    for r in records {
        w.write_record([
            format!("{:.11e}", r.gamma),
            r.scheme.clone(),
            format!("{:.11e}", r.fidelity),
            format!("{:.11e}", r.infidelity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(QecError::from)).collect()
}

/// Rounds to the 12 significant digits used in CSV output.
pub fn to_printed_precision(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Least-squares fit of `1 - F ≈ c γ² (+ d γ³)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficient: f64,
    /// Cubic coefficient when the cubic term was fitted.
    pub cubic: Option<f64>,
    /// Root-mean-square misfit.
    pub residual: f64,
    pub grid: Vec<f64>,
}

pub fn fit_infidelity(records: &[SweepRecord]) -> Result<FitResult> {
    fit_infidelity_with(records, false)
}

/// [`fit_infidelity`] with an optional cubic term.
pub fn fit_infidelity_with(records: &[SweepRecord], cubic: bool) -> Result<FitResult> {
    if records.len() < 4 {
        return Err(QecError::DegenerateFit(format!("need at least 4 records, got {}", records.len())));
    }
    if let Some(r) = records.iter().find(|r| r.scheme != records[0].scheme) {
        return Err(QecError::Invalid(format!("records mix schemes {} and {}", records[0].scheme, r.scheme)));
    }
    if records.iter().any(|r| r.gamma.is_nan() || r.gamma <= 0.0 || !r.infidelity.is_finite()) {
        return Err(QecError::DegenerateFit("every γ must be positive and every infidelity finite".into()));
    }
    let mut pts: Vec<(f64, f64)> = records.iter().map(|r| (r.gamma, r.infidelity)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let distinct = pts.windows(2).filter(|w| w[1].0 > w[0].0).count() + 1;
    if distinct < 2 {
        return Err(QecError::DegenerateFit("all records share one γ".into()));
    }
    let (c, d) = if cubic {
        // normal equations for the basis (γ², γ³)
        let (mut s44, mut s45, mut s55, mut s2y, mut s3y) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(g, y) in &pts {
            s44 += g.powi(4);
            s45 += g.powi(5);
            s55 += g.powi(6);
            s2y += g * g * y;
            s3y += g.powi(3) * y;
        }
        let det = s44 * s55 - s45 * s45;
        if det.abs() <= 1e-12 * s44 * s55 {
            return Err(QecError::DegenerateFit("γ² and γ³ are not separable on this grid".into()));
        }
        ((s2y * s55 - s3y * s45) / det, Some((s44 * s3y - s45 * s2y) / det))
    } else {
        let num: f64 = pts.iter().map(|(g, y)| g * g * y).sum();
        let den: f64 = pts.iter().map(|(g, _)| g.powi(4)).sum();
        (num / den, None)
    };
    let sq: f64 = pts.iter().map(|&(g, y)| (y - c * g * g - d.unwrap_or(0.0) * g.powi(3)).powi(2)).sum();
    Ok(FitResult {
        coefficient: c,
        cubic: d,
        residual: (sq / pts.len() as f64).sqrt(),
        grid: pts.iter().map(|p| p.0).collect(),
    })
}

/// Orthonormal basis (columns) of the dominant image of an encoding: the top
/// `k` eigenvectors of `Tr_in X_E`.
pub fn code_subspace(enc: &crate::channels::ChoiMatrix, k: usize) -> Result<ComplexMatrix> {
    let image = partial_trace(enc.matrix(), (enc.d_in(), enc.d_out()), Subsystem::First)?;
    let eig = herm_eig(&image)?;
    let n = enc.d_out();
    if k > n {
        return Err(QecError::Shape(format!("cannot take {k} vectors in dimension {n}")));
    }
    Ok(ComplexMatrix::from_fn(n, k, |r, c| eig.eigenvectors[(r, c)]))
}

/// Mean squared cosine of the principal angles between two subspaces given
/// by orthonormal columns.
pub fn subspace_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let k = a.cols().max(1) as f64;
    (a.adjoint() * b).frobenius_norm().powi(2) / k
}

/// Element of the symmetry group of independent damping: a qubit
/// permutation, a phase `diag(1, e^{iθ_q})` per qubit, and optional complex
/// conjugation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub permutation: Vec<usize>,
    pub phases: Vec<f64>,
    pub conjugated: bool,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Moves qubit `q` of each basis state to position `perm[q]`.
fn permute_rows(m: &ComplexMatrix, perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let map = |x: usize| -> usize {
        (0..n).fold(0, |acc, q| {
            let bit = (x >> (n - 1 - q)) & 1;
            acc | (bit << (n - 1 - perm[q]))
        })
    };
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for x in 0..m.rows() {
        for c in 0..m.cols() {
            out[(map(x), c)] = m[(x, c)];
        }
    }
    out
}

/// Maximizes `Tr(P_a D P_b D†)` over product phases `D`, by exact
/// coordinate updates. Returns the angles and the trace.
fn align_phases(pa: &ComplexMatrix, pb: &ComplexMatrix, qubits: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let dim = pa.rows();
    // w[x][y] = Pa[y][x] Pb[x][y]; the objective is Σ w e^{i(φ(x)-φ(y))}
    let w: Vec<Complex64> = (0..dim * dim).map(|i| pa[(i % dim, i / dim)] * pb[(i / dim, i % dim)]).collect();
    let phase = |theta: &[f64], x: usize| -> f64 {
        (0..qubits).filter(|q| (x >> (qubits - 1 - q)) & 1 == 1).map(|q| theta[q]).sum()
    };
    let value = |theta: &[f64]| -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for x in 0..dim {
            for y in 0..dim {
                s += w[x * dim + y] * Complex64::from_polar(1.0, phase(theta, x) - phase(theta, y));
            }
        }
        s.re
    };
    let mut best = (vec![0.0; qubits], f64::NEG_INFINITY);
    for start in 0..6 {
        let mut theta: Vec<f64> = if start == 0 {
            vec![0.0; qubits]
        } else {
            (0..qubits).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
        };
        let mut current = value(&theta);
        for _ in 0..200 {
            for q in 0..qubits {
                let bit = |x: usize| (x >> (qubits - 1 - q)) & 1;
                let mut coupling = Complex64::new(0.0, 0.0);
                for x in 0..dim {
                    for y in 0..dim {
                        if bit(x) == 1 && bit(y) == 0 {
                            let rest = phase(&theta, x) - theta[q] - phase(&theta, y);
                            coupling += w[x * dim + y] * Complex64::from_polar(1.0, rest);
                        }
                    }
                }
                theta[q] = -coupling.arg();
            }
            let next = value(&theta);
            let done = next - current < 1e-14;
            current = next;
            if done {
                break;
            }
        }
        if current > best.1 {
            best = (theta, current);
        }
    }
    best
}

/// Overlap after the best symmetry of the noise is applied to `b`.
pub fn aligned_overlap(a: &ComplexMatrix, b: &ComplexMatrix, qubits: usize, seed: u64) -> (f64, Alignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pa = a * &a.adjoint();
    let k = a.cols().max(1) as f64;
    let mut best: Option<(f64, Alignment)> = None;
    for conjugated in [false, true] {
        let base = if conjugated { b.conj() } else { b.clone() };
        for perm in permutations(qubits) {
            let moved = permute_rows(&base, &perm);
            let pb = &moved * &moved.adjoint();
            let (phases, tr) = align_phases(&pa, &pb, qubits, &mut rng);
            let overlap = tr / k;
            if best.as_ref().is_none_or(|(o, _)| overlap > *o + 1e-15) {
                best = Some((overlap, Alignment { permutation: perm, phases, conjugated }));
            }
        }
    }
    best.expect("at least one permutation")
}

/// One γ of the code-space comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodewordComparison {
    pub gamma: f64,
    /// Overlap after aligning by the noise symmetries.
    pub overlap: f64,
    /// Overlap without alignment.
    pub raw_overlap: f64,
    pub alignment: Alignment,
    /// Fidelity reached by the alternation.
    pub fidelity: f64,
    pub converged: bool,
}

/// Runs the alternation at each γ and compares its code space with the
/// closed-form optimized code.
///
/// The grid is walked from large to small γ. The first point starts from
/// random encodings only; each later point also starts one restart from the
/// previous optimum, which follows the code family down to small γ where
/// alternation from a random start converges slowly. Results are returned in
/// the order of `gamma_grid`.
pub fn compare_codewords(gamma_grid: &[f64], settings: &SdpSettings) -> Result<Vec<CodewordComparison>> {
    if let Some(g) = gamma_grid.iter().find(|g| !(0.01..=0.1).contains(*g)) {
        return Err(QecError::Domain(format!("γ = {g} outside [0.01, 0.1]")));
    }
    let mut order: Vec<usize> = (0..gamma_grid.len()).collect();
    order.sort_by(|&a, &b| gamma_grid[b].total_cmp(&gamma_grid[a]));
    let mut out: Vec<Option<CodewordComparison>> = vec![None; gamma_grid.len()];
    let mut previous: Option<crate::channels::ChoiMatrix> = None;
    for idx in order {
        let g = gamma_grid[idx];
        let noise = kraus_to_choi(&nqubit_ad(g, 4)?);
        let res = alternate_optimize_from(&noise, settings, previous.as_ref())?;
        let found = code_subspace(&res.enc_choi, 2)?;
        let reference = optimized_code(g)?.isometry();
        let (overlap, alignment) = aligned_overlap(&reference, &found, 4, settings.seed);
        out[idx] = Some(CodewordComparison {
            gamma: g,
            overlap,
            raw_overlap: subspace_overlap(&reference, &found),
            alignment,
            fidelity: res.fidelity,
            converged: res.converged,
        });
        previous = Some(res.enc_choi);
    }
    Ok(out.into_iter().map(|c| c.expect("every grid point visited")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_isometry;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("optimized+magic".parse::<Scheme>().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = default_grid();
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[9], 0.1);
    }

    #[test]
    fn exact_quadratic_fit() {
        let records: Vec<SweepRecord> =
            default_grid().into_iter().map(|g| SweepRecord::new(g, Scheme::Custom, 1.0 - 2.0 * g * g)).collect();
        let fit = fit_infidelity(&records).unwrap();
        assert!((fit.coefficient - 2.0).abs() < 1e-12);
        assert!(fit.residual < 1e-15);
        let cubic: Vec<SweepRecord> = default_grid()
            .into_iter()
            .map(|g| SweepRecord::new(g, Scheme::Custom, 1.0 - 2.0 * g * g - 5.0 * g.powi(3)))
            .collect();
        let fit = fit_infidelity_with(&cubic, true).unwrap();
        assert!((fit.coefficient - 2.0).abs() < 1e-8 && (fit.cubic.unwrap() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let few: Vec<SweepRecord> = (1..4).map(|k| SweepRecord::new(k as f64 * 0.01, Scheme::Custom, 0.99)).collect();
        assert!(matches!(fit_infidelity(&few), Err(QecError::DegenerateFit(_))));
        let same: Vec<SweepRecord> = (0..5).map(|_| SweepRecord::new(0.05, Scheme::Custom, 0.99)).collect();
        assert!(fit_infidelity(&same).is_err());
        let mut mixed: Vec<SweepRecord> =
            (1..6).map(|k| SweepRecord::new(k as f64 * 0.01, Scheme::Custom, 0.99)).collect();
        mixed[2].scheme = "leung+sdp".into();
        assert!(fit_infidelity(&mixed).is_err());
    }

    #[test]
    fn fit_sorts_grid() {
        let records: Vec<SweepRecord> =
            [0.05, 0.01, 0.03, 0.02].iter().map(|&g| SweepRecord::new(g, Scheme::Custom, 1.0 - g * g)).collect();
        assert_eq!(fit_infidelity(&records).unwrap().grid, vec![0.01, 0.02, 0.03, 0.05]);
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            SweepRecord::new(0.01, Scheme::OptimizedSdp, 0.999_891_234_567_891_2),
            SweepRecord::new(0.1, Scheme::LeungSdp, 1.0 / 3.0),
        ];
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("gamma,scheme,fidelity,infidelity\n"));
        let back = read_csv(buf.as_slice()).unwrap();
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(b.gamma, to_printed_precision(a.gamma));
            assert_eq!(b.fidelity, to_printed_precision(a.fidelity));
            assert_eq!(b.infidelity, to_printed_precision(a.infidelity));
            assert_eq!(a.scheme, b.scheme);
        }
    }

    #[test]
    fn closed_form_sweep_rows() {
        let config = SweepConfig {
            grid: vec![0.0, 0.05],
            schemes: vec![Scheme::OptimizedAnalytical, Scheme::OptimizedFitted],
            settings: SdpSettings::default(),
            custom_code: None,
        };
        let out = sweep(&config).unwrap();
        assert_eq!(out.records.len(), 4);
        assert_eq!(out.records[0].gamma, 0.0);
        assert_eq!(out.records[1].scheme, "optimized+fitted");
        assert!((out.records[0].fidelity - 1.0).abs() < 1e-12);
        for r in &out.records {
            assert!((r.infidelity - (1.0 - r.fidelity)).abs() <= 1e-15);
        }
        let custom = SweepConfig { schemes: vec![Scheme::Custom], ..config };
        assert!(sweep(&custom).is_err());
    }

    #[test]
    fn overlap_basics() {
        let code = optimized_code(0.05).unwrap().isometry();
        assert!((subspace_overlap(&code, &code) - 1.0).abs() < 1e-14);
        let enc = encoding_channel(&optimized_code(0.05).unwrap());
        let found = code_subspace(&enc, 2).unwrap();
        assert!((subspace_overlap(&code, &found) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let random = random_isometry(&mut rng, 16, 2);
        assert!(subspace_overlap(&code, &random) < 0.9);
        let (aligned, _) = aligned_overlap(&code, &random, 4, 1);
        assert!(aligned < 0.9, "{aligned}");
    }

    #[test]
    fn alignment_undoes_symmetries() {
        let code = optimized_code(0.05).unwrap().isometry();
        // permute qubits, then apply local phases and conjugate
        let moved = permute_rows(&code, &[2, 0, 3, 1]);
        let theta = [0.3, -1.2, 2.0, 0.7];
        let phased = ComplexMatrix::from_fn(16, 2, |x, c| {
            let phi: f64 = (0..4).filter(|q| (x >> (3 - q)) & 1 == 1).map(|q| theta[q]).sum();
            moved[(x, c)] * Complex64::from_polar(1.0, phi)
        })
        .conj();
        assert!(subspace_overlap(&code, &phased) < 0.999);
        let (overlap, _) = aligned_overlap(&code, &phased, 4, 3);
        assert!((overlap - 1.0).abs() < 1e-10, "{overlap}");
    }

    #[test]
    fn permutation_count() {
        let p = permutations(4);
        assert_eq!(p.len(), 24);
        let mut sorted = p.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
    }

    #[test]
    fn comparison_grid_is_checked() {
        assert!(compare_codewords(&[0.5], &SdpSettings::default()).is_err());
    }
}
