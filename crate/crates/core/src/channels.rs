//! Quantum channels in Kraus and Choi form, the amplitude-damping family,
//! and CPTP diagnostics.
//!
//! Choi convention: `X[[i j], [i' j']] = <j| A(|i><i'|) |j'>` with the input
//! index `i` slow, so `X = Σ_K |k><k|` where `k[i * d_out + j] = K[j][i]`.

use serde::{Deserialize, Serialize};

use crate::error::{QecError, Result};
use crate::matrix::{herm_eig, partial_trace, re, ComplexMatrix, Subsystem, C_ZERO, DEFAULT_TOL};

/// Which single-qubit damping operators make up a multi-qubit Kraus operator.
///
/// `pattern` is the bitstring `k1 k2 ... kn` read as a binary number with
/// qubit 1 as the most significant bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DampingPattern {
    pub pattern: usize,
    pub qubits: usize,
}

impl DampingPattern {
    /// Number of decay events (Hamming weight).
    pub fn order(&self) -> usize {
        self.pattern.count_ones() as usize
    }

    pub fn bit(&self, qubit: usize) -> usize {
        (self.pattern >> (self.qubits - 1 - qubit)) & 1
    }

    pub fn label(&self) -> String {
        (0..self.qubits).map(|q| if self.bit(q) == 1 { '1' } else { '0' }).collect()
    }

    pub fn from_label(label: &str) -> Result<Self> {
        let pattern =
            usize::from_str_radix(label, 2).map_err(|_| QecError::Invalid(format!("bad damping label {label:?}")))?;
        Ok(DampingPattern { pattern, qubits: label.len() })
    }
}

#[derive(Serialize, Deserialize)]
struct KrausRepr {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

/// A channel `ρ ↦ Σ K ρ K†` given by its Kraus operators (each `d_out x d_in`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "KrausRepr", into = "KrausRepr")]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
    patterns: Option<Vec<DampingPattern>>,
}

impl TryFrom<KrausRepr> for KrausChannel {
    type Error = QecError;
    fn try_from(r: KrausRepr) -> Result<Self> {
        KrausChannel::new(r.d_in, r.d_out, r.kraus)
    }
}

impl From<KrausChannel> for KrausRepr {
    fn from(k: KrausChannel) -> Self {
        KrausRepr { d_in: k.d_in, d_out: k.d_out, kraus: k.kraus }
    }
}

impl KrausChannel {
    /// Validated constructor: shapes must agree and `Σ K†K = I` within 1e-9.
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(d_in, d_out, kraus, DEFAULT_TOL)
    }

    /// Like [`KrausChannel::new`] with an explicit completeness tolerance
    /// (Frobenius norm of `Σ K†K - I`).
    pub fn with_tolerance(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let ch = Self::unchecked(d_in, d_out, kraus)?;
        let defect = ch.completeness_defect();
        if defect > tol {
            return Err(QecError::Invalid(format!(
                "Kraus operators are not trace preserving (defect {defect:.3e} > {tol:.1e})"
            )));
        }
        Ok(ch)
    }

    /// Shape checks only. Used for trace-decreasing intermediate maps.
    pub fn unchecked(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(QecError::Shape("channel dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(QecError::Shape("a channel needs at least one Kraus operator".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (d_out, d_in)) {
            return Err(QecError::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                bad.rows(),
                bad.cols()
            )));
        }
        if kraus.iter().any(|k| !k.is_finite()) {
            return Err(QecError::NonFinite);
        }
        Ok(KrausChannel { d_in, d_out, kraus, patterns: None })
    }

    /// Attaches damping-pattern labels, one per Kraus operator.
    pub fn with_patterns(mut self, patterns: Vec<DampingPattern>) -> Result<Self> {
        if patterns.len() != self.kraus.len() {
            return Err(QecError::Shape(format!("{} labels for {} Kraus operators", patterns.len(), self.kraus.len())));
        }
        self.patterns = Some(patterns);
        Ok(self)
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel { d_in: d, d_out: d, kraus: vec![ComplexMatrix::identity(d)], patterns: None }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// Damping patterns aligned with [`KrausChannel::kraus`], when the
    /// channel was built by [`nqubit_ad`].
    pub fn patterns(&self) -> Option<&[DampingPattern]> {
        self.patterns.as_deref()
    }

    /// Keeps only operators whose damping order satisfies `keep`.
    /// The result is generally trace decreasing.
    pub fn filter_by_order(&self, keep: impl Fn(usize) -> bool) -> Option<Vec<(DampingPattern, ComplexMatrix)>> {
        let patterns = self.patterns.as_ref()?;
        Some(patterns.iter().zip(&self.kraus).filter(|(p, _)| keep(p.order())).map(|(p, k)| (*p, k.clone())).collect())
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> ComplexMatrix {
        self.kraus.iter().fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| acc + k.adjoint() * k)
    }

    /// `‖Σ K†K - I‖_F`.
    pub fn completeness_defect(&self) -> f64 {
        self.completeness().distance(&ComplexMatrix::identity(self.d_in))
    }
}

#[derive(Serialize, Deserialize)]
struct ChoiRepr {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix,
}

/// Choi matrix of a map from `d_in` to `d_out` dimensions, side `d_in * d_out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiRepr", into = "ChoiRepr")]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix,
}

impl TryFrom<ChoiRepr> for ChoiMatrix {
    type Error = QecError;
    fn try_from(r: ChoiRepr) -> Result<Self> {
        ChoiMatrix::new(r.d_in, r.d_out, r.matrix)
    }
}

impl From<ChoiMatrix> for ChoiRepr {
    fn from(c: ChoiMatrix) -> Self {
        ChoiRepr { d_in: c.d_in, d_out: c.d_out, matrix: c.matrix }
    }
}

impl ChoiMatrix {
    /// Validated constructor: Hermitian, PSD and trace preserving within 1e-9.
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        let x = Self::unchecked(d_in, d_out, matrix)?;
        let report = x.check_cptp(DEFAULT_TOL);
        if report.cp_violation > DEFAULT_TOL {
            return Err(QecError::NotCompletelyPositive(report.min_eigenvalue));
        }
        if report.tp_deviation > DEFAULT_TOL {
            return Err(QecError::Invalid(format!(
                "Choi matrix is not trace preserving (deviation {:.3e})",
                report.tp_deviation
            )));
        }
        Ok(x)
    }

    /// Shape and Hermiticity checks only.
    pub fn unchecked(d_in: usize, d_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        let side = d_in * d_out;
        if side == 0 || matrix.shape() != (side, side) {
            return Err(QecError::DimensionMismatch(format!(
                "Choi matrix for {d_in}->{d_out} must be {side}x{side}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(QecError::NonFinite);
        }
        let defect = matrix.hermiticity_defect();
        if defect > 1e-8 * matrix.max_abs().max(1.0) {
            return Err(QecError::NotHermitian(defect));
        }
        Ok(ChoiMatrix { d_in, d_out, matrix: matrix.hermitian_part() })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr_out X`, which equals the identity for trace-preserving maps.
    pub fn output_trace(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, (self.d_in, self.d_out), Subsystem::Second)
            .expect("shape validated at construction")
    }

    /// `Tr_in X`: the (unnormalized) image of the identity, `A(I)`.
    pub fn input_trace(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, (self.d_in, self.d_out), Subsystem::First).expect("shape validated at construction")
    }

    pub fn check_cptp(&self, tol: f64) -> CptpReport {
        let min_eigenvalue = herm_eig(&self.matrix).map(|e| e.min_eigenvalue()).unwrap_or(f64::NEG_INFINITY);
        let tp_deviation = self.output_trace().distance(&ComplexMatrix::identity(self.d_in));
        CptpReport::new(min_eigenvalue, tp_deviation, tol)
    }

    /// Applies the map to a `d_in x d_in` operator directly from the Choi entries.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(QecError::DimensionMismatch(format!(
                "input is {}x{}, map expects {}x{}",
                rho.rows(),
                rho.cols(),
                self.d_in,
                self.d_in
            )));
        }
        let (di, dout) = (self.d_in, self.d_out);
        Ok(ComplexMatrix::from_fn(dout, dout, |j, jp| {
            let mut acc = C_ZERO;
            for i in 0..di {
                for ip in 0..di {
                    acc += rho[(i, ip)] * self.matrix[(i * dout + j, ip * dout + jp)];
                }
            }
            acc
        }))
    }
}

/// Outcome of a CPTP check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub min_eigenvalue: f64,
    /// `max(0, -min_eigenvalue)`.
    pub cp_violation: f64,
    /// `‖Tr_out X - I‖_F`.
    pub tp_deviation: f64,
    pub tol: f64,
    pub passes: bool,
}

impl CptpReport {
    fn new(min_eigenvalue: f64, tp_deviation: f64, tol: f64) -> Self {
        let cp_violation = (-min_eigenvalue).max(0.0);
        CptpReport {
            min_eigenvalue,
            cp_violation,
            tp_deviation,
            tol,
            passes: cp_violation <= tol && tp_deviation <= tol,
        }
    }
}

/// Single-qubit amplitude damping: `A0 = diag(1, √(1-γ))`, `A1 = √γ |0><1|`.
pub fn ad_kraus(gamma: f64) -> Result<KrausChannel> {
    check_gamma(gamma)?;
    let a0 = ComplexMatrix::diag(&[1.0, (1.0 - gamma).sqrt()]);
    let mut a1 = ComplexMatrix::zeros(2, 2);
    a1[(0, 1)] = re(gamma.sqrt());
    let mut ch = KrausChannel::unchecked(2, 2, vec![a0, a1])?;
    ch.patterns = Some(vec![DampingPattern { pattern: 0, qubits: 1 }, DampingPattern { pattern: 1, qubits: 1 }]);
    Ok(ch)
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(QecError::Domain(format!("damping probability {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// The operator `A_{k1} ⊗ ... ⊗ A_{kn}` for one damping pattern.
pub fn damping_operator(gamma: f64, pattern: DampingPattern) -> Result<ComplexMatrix> {
    let single = ad_kraus(gamma)?;
    let ops = single.kraus();
    Ok((0..pattern.qubits).fold(ComplexMatrix::identity(1), |acc, q| crate::matrix::kron(&acc, &ops[pattern.bit(q)])))
}

/// Independent amplitude damping on `n` qubits: `2^n` Kraus operators
/// ordered by damping pattern ascending.
pub fn nqubit_ad(gamma: f64, n: usize) -> Result<KrausChannel> {
    check_gamma(gamma)?;
    if n == 0 || n > 6 {
        return Err(QecError::Domain(format!("qubit count {n} must be between 1 and 6")));
    }
    let dim = 1usize << n;
    let patterns: Vec<DampingPattern> = (0..dim).map(|p| DampingPattern { pattern: p, qubits: n }).collect();
    let kraus = patterns.iter().map(|&p| damping_operator(gamma, p)).collect::<Result<Vec<_>>>()?;
    let mut ch = KrausChannel::unchecked(dim, dim, kraus)?;
    ch.patterns = Some(patterns);
    Ok(ch)
}

/// Choi matrix `Σ_K |k><k|` with `k[i * d_out + j] = K[j][i]`.
pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let (di, dout) = (ch.d_in, ch.d_out);
    let side = di * dout;
    let mut x = ComplexMatrix::zeros(side, side);
    for k in &ch.kraus {
        let v: Vec<_> = (0..side).map(|a| k[(a % dout, a / dout)]).collect();
        for a in 0..side {
            if v[a] == C_ZERO {
                continue;
            }
            for b in 0..side {
                x[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    ChoiMatrix { d_in: di, d_out: dout, matrix: x }
}

/// Default relative rank cutoff for [`choi_to_kraus`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Kraus operators `√λ · reshape(φ)` for each eigenpair with `λ > rank_tol · λ_max`.
pub fn choi_to_kraus(x: &ChoiMatrix, rank_tol: f64) -> Result<KrausChannel> {
    let eig = herm_eig(&x.matrix)?;
    let lmax = eig.eigenvalues.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let cutoff = rank_tol * lmax;
    if eig.min_eigenvalue() < -cutoff {
        return Err(QecError::NotCompletelyPositive(eig.min_eigenvalue()));
    }
    let (di, dout) = (x.d_in, x.d_out);
    let kraus: Vec<ComplexMatrix> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cutoff)
        .map(|(idx, &l)| {
            let phi = eig.eigenvector(idx);
            let s = l.sqrt();
            ComplexMatrix::from_fn(dout, di, |j, i| phi[i * dout + j] * s)
        })
        .collect();
    if kraus.is_empty() {
        return Err(QecError::Invalid("Choi matrix has no eigenvalue above the rank cutoff".into()));
    }
    KrausChannel::unchecked(di, dout, kraus)
}

/// CPTP diagnostics for a Kraus channel (evaluated on its Choi matrix).
pub fn check_cptp_kraus(ch: &KrausChannel, tol: f64) -> CptpReport {
    kraus_to_choi(ch).check_cptp(tol)
}

/// `second ∘ first`, with all pairwise Kraus products.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<KrausChannel> {
    if first.d_out != second.d_in {
        return Err(QecError::DimensionMismatch(format!(
            "cannot compose {}->{} after {}->{}",
            second.d_in, second.d_out, first.d_in, first.d_out
        )));
    }
    let kraus = second.kraus.iter().flat_map(|a| first.kraus.iter().map(move |b| a * b)).collect();
    KrausChannel::unchecked(first.d_in, second.d_out, kraus)
}

/// `Σ K ρ K†`.
pub fn apply_channel(ch: &KrausChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.shape() != (ch.d_in, ch.d_in) {
        return Err(QecError::DimensionMismatch(format!(
            "state is {}x{}, channel expects {}x{}",
            rho.rows(),
            rho.cols(),
            ch.d_in,
            ch.d_in
        )));
    }
    Ok(ch.kraus.iter().fold(ComplexMatrix::zeros(ch.d_out, ch.d_out), |acc, k| acc + k * rho * k.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::kron;
    use crate::random::{random_density, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket1() -> ComplexMatrix {
        ComplexMatrix::diag(&[0.0, 1.0])
    }

    #[test]
    fn ad_at_zero_is_identity_and_zero() {
        let ch = ad_kraus(0.0).unwrap();
        assert_eq!(ch.kraus()[0], ComplexMatrix::identity(2));
        assert_eq!(ch.kraus()[1].max_abs(), 0.0);
    }

    #[test]
    fn ad_entries() {
        let ch = ad_kraus(0.36).unwrap();
        assert!(ch.kraus()[0].distance(&ComplexMatrix::diag(&[1.0, 0.8])) < 1e-15);
        assert!((ch.kraus()[1][(0, 1)].re - 0.6).abs() < 1e-15);
        assert_eq!(ch.kraus()[1][(1, 0)], C_ZERO);
    }

    #[test]
    fn ad_is_complete_and_rejects_bad_gamma() {
        for g in [0.0, 0.1, 0.37, 1.0] {
            assert!(ad_kraus(g).unwrap().completeness_defect() < 1e-15);
        }
        assert!(matches!(ad_kraus(-0.1), Err(QecError::Domain(_))));
        assert!(matches!(ad_kraus(1.5), Err(QecError::Domain(_))));
        assert!(ad_kraus(f64::NAN).is_err());
    }

    #[test]
    fn four_qubit_damping() {
        let ch = nqubit_ad(0.1, 4).unwrap();
        assert_eq!(ch.len(), 16);
        let e0 = &ch.kraus()[0];
        assert!((e0[(15, 15)].re - 0.81).abs() < 1e-14);
        let labels: Vec<String> = ch.patterns().unwrap().iter().map(|p| p.label()).collect();
        assert_eq!(labels[1], "0001");
        assert_eq!(labels[8], "1000");
        assert_eq!(ch.patterns().unwrap()[11].order(), 3);

        let ideal = nqubit_ad(0.0, 4).unwrap();
        assert_eq!(ideal.kraus()[0], ComplexMatrix::identity(16));
        assert!(ideal.kraus()[1..].iter().all(|k| k.max_abs() == 0.0));
        assert!(nqubit_ad(0.1, 0).is_err());
    }

    #[test]
    fn multi_qubit_completeness() {
        for g in [0.0, 0.1, 0.5, 1.0] {
            for n in 1..=4 {
                assert!(nqubit_ad(g, n).unwrap().completeness_defect() <= 1e-12);
            }
        }
    }

    #[test]
    fn damping_operator_matches_kron() {
        let g = 0.2;
        let ad = ad_kraus(g).unwrap();
        let (a0, a1) = (&ad.kraus()[0], &ad.kraus()[1]);
        let p = DampingPattern::from_label("1001").unwrap();
        let expected = kron(&kron(&kron(a1, a0), a0), a1);
        assert!(damping_operator(g, p).unwrap().distance(&expected) < 1e-15);
    }

    #[test]
    fn identity_choi_is_scaled_bell_projector() {
        let x = kraus_to_choi(&KrausChannel::identity(2));
        assert!((x.matrix().trace().re - 2.0).abs() < 1e-15);
        let eig = herm_eig(x.matrix()).unwrap();
        assert!((eig.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
        let k = choi_to_kraus(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(k.len(), 1);
        assert!(k.kraus()[0].distance(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn damping_choi_is_trace_preserving() {
        for g in [0.0, 0.1, 0.5, 0.9] {
            let x = kraus_to_choi(&ad_kraus(g).unwrap());
            assert!(x.output_trace().distance(&ComplexMatrix::identity(2)) < 1e-14);
            assert!(x.check_cptp(1e-9).passes);
        }
    }

    #[test]
    fn choi_kraus_round_trip_preserves_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = compose(&nqubit_ad(0.3, 2).unwrap(), &nqubit_ad(0.1, 2).unwrap()).unwrap();
        let x = kraus_to_choi(&ch);
        let back = choi_to_kraus(&x, DEFAULT_RANK_TOL).unwrap();
        assert!(back.len() <= 4);
        assert!(back.completeness_defect() < 1e-9);
        for _ in 0..20 {
            let rho = random_density(&mut rng, 4);
            let a = apply_channel(&ch, &rho).unwrap();
            let b = apply_channel(&back, &rho).unwrap();
            assert!(a.distance(&b) < 1e-9);
            assert!(x.apply(&rho).unwrap().distance(&a) < 1e-12);
        }
        assert!(kraus_to_choi(&back).matrix().distance(x.matrix()) < 1e-9);
    }

    #[test]
    fn kraus_count_equals_rank() {
        let x = kraus_to_choi(&nqubit_ad(0.25, 2).unwrap());
        let eig = herm_eig(x.matrix()).unwrap();
        let rank = eig.eigenvalues.iter().filter(|&&l| l > 1e-10 * eig.eigenvalues[0]).count();
        assert_eq!(choi_to_kraus(&x, DEFAULT_RANK_TOL).unwrap().len(), rank);
        assert_eq!(rank, 4);
    }

    #[test]
    fn choi_to_kraus_rejects_negative_spectrum() {
        let m = ComplexMatrix::diag(&[1.0, -0.5, 0.5, 1.0]);
        let x = ChoiMatrix::unchecked(2, 2, m).unwrap();
        assert!(matches!(choi_to_kraus(&x, 1e-10), Err(QecError::NotCompletelyPositive(_))));
    }

    #[test]
    fn cptp_report_flags_violations() {
        assert!(check_cptp_kraus(&ad_kraus(0.3).unwrap(), 1e-9).passes);

        // identity Choi plus a -0.01 eigen-direction orthogonal to it
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [re(0.0), re(s), re(-s), re(0.0)];
        let bad = kraus_to_choi(&KrausChannel::identity(2)).matrix().clone() - ComplexMatrix::outer(&v, &v).scale(0.01);
        let report = ChoiMatrix::unchecked(2, 2, bad).unwrap().check_cptp(1e-9);
        assert!(!report.passes);
        assert!((report.cp_violation - 0.01).abs() < 1e-12);

        let x = kraus_to_choi(&ad_kraus(0.2).unwrap());
        let scaled = ChoiMatrix::unchecked(2, 2, x.matrix().scale(1.1)).unwrap();
        let report = scaled.check_cptp(1e-9);
        assert!(!report.passes);
        assert!((report.tp_deviation - 0.1 * 2f64.sqrt()).abs() < 1e-12);
        assert!(report.cp_violation == 0.0);
    }

    #[test]
    fn validated_choi_constructor() {
        let x = kraus_to_choi(&ad_kraus(0.2).unwrap());
        assert!(ChoiMatrix::new(2, 2, x.matrix().clone()).is_ok());
        assert!(ChoiMatrix::new(2, 2, x.matrix().scale(1.1)).is_err());
        assert!(ChoiMatrix::new(2, 3, x.matrix().clone()).is_err());
    }

    #[test]
    fn composition_semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (g1, g2) = (0.2, 0.35);
        let both = compose(&ad_kraus(g1).unwrap(), &ad_kraus(g2).unwrap()).unwrap();
        assert_eq!(both.len(), 4);
        let direct = ad_kraus(1.0 - (1.0 - g1) * (1.0 - g2)).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut rng, 2);
            let a = apply_channel(&both, &rho).unwrap();
            let b = apply_channel(&direct, &rho).unwrap();
            assert!(a.distance(&b) < 1e-12);
        }
        let id_first = compose(&KrausChannel::identity(2), &direct).unwrap();
        let rho = random_density(&mut rng, 2);
        assert!(apply_channel(&id_first, &rho).unwrap().distance(&apply_channel(&direct, &rho).unwrap()) < 1e-15);
        assert!(compose(&ad_kraus(0.1).unwrap(), &nqubit_ad(0.1, 2).unwrap()).is_err());
    }

    #[test]
    fn damping_on_excited_state() {
        let g = 0.3;
        let out = apply_channel(&ad_kraus(g).unwrap(), &ket1()).unwrap();
        assert!(out.distance(&ComplexMatrix::diag(&[g, 1.0 - g])) < 1e-15);
    }

    #[test]
    fn channel_preserves_trace_and_identity_fixes_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = nqubit_ad(0.27, 3).unwrap();
        for _ in 0..10 {
            let rho = random_density(&mut rng, 8);
            let out = apply_channel(&ch, &rho).unwrap();
            assert!((out.trace() - re(1.0)).norm() < 1e-12);
            let same = apply_channel(&KrausChannel::identity(8), &rho).unwrap();
            assert!(same.distance(&rho) < 1e-15);
        }
        let h = random_hermitian(&mut rng, 4);
        assert!(apply_channel(&ch, &h).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let ch = ad_kraus(0.25).unwrap();
        let s = serde_json::to_string(&ch).unwrap();
        assert!(s.starts_with("{\"d_in\":2,\"d_out\":2,\"kraus\":"));
        let back: KrausChannel = serde_json::from_str(&s).unwrap();
        assert_eq!(back.kraus(), ch.kraus());

        let bad = r#"{"d_in":1,"d_out":1,"kraus":[[[[2.0,0.0]]]]}"#;
        assert!(serde_json::from_str::<KrausChannel>(bad).is_err());

        let x = kraus_to_choi(&ch);
        let s = serde_json::to_string(&x).unwrap();
        let back: ChoiMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let off = r#"{"d_in":1,"d_out":1,"matrix":[[[0.5,0.0]]]}"#;
        assert!(serde_json::from_str::<ChoiMatrix>(off).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn kraus_choi_kraus_is_identity_on_choi(seed in any::<u64>(), g in 0.0f64..1.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // random unitary conjugation keeps the channel generic
                let u = crate::random::random_unitary(&mut rng, 2);
                let base = ad_kraus(g).unwrap();
                let kr: Vec<_> = base.kraus().iter().map(|k| &u * k).collect();
                let ch = KrausChannel::new(2, 2, kr).unwrap();
                let x = kraus_to_choi(&ch);
                let again = kraus_to_choi(&choi_to_kraus(&x, DEFAULT_RANK_TOL).unwrap());
                prop_assert!(again.matrix().distance(x.matrix()) < 1e-9);
                prop_assert!(x.check_cptp(1e-9).passes);
            }
        }
    }
}
