//! Logical codeword fixtures and their encoding/decoding channels.
//!
//! Four-qubit kets `|k1 k2 k3 k4>` live at index `8 k1 + 4 k2 + 2 k3 + k4`,
//! matching the tensor order of the damping operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{kraus_to_choi, ChoiMatrix, KrausChannel};
use crate::error::{QecError, Result};
use crate::matrix::{basis_vector, gram_schmidt, inner, re, vec_norm, ComplexMatrix, C_ZERO};

/// Upper end (exclusive) of the damping range where the optimized
/// `|0_L>` amplitude on `|0000>` is real: `1 - 1/√2`.
pub const OPTIMIZED_CODE_GAMMA_MAX: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

const CODE_TOL: f64 = 1e-12;

/// Computational basis ket from a bit label such as `"0110"`.
pub fn basis_ket(bits: &str) -> Vec<Complex64> {
    let n = bits.len();
    let idx = usize::from_str_radix(bits, 2).expect("label must be a bitstring");
    basis_vector(1 << n, idx)
}

/// Linear combination `Σ coeff |bits>` of computational basis kets.
pub fn ket_combination(terms: &[(f64, &str)]) -> Vec<Complex64> {
    let n = terms[0].1.len();
    let mut v = vec![C_ZERO; 1 << n];
    for &(coeff, bits) in terms {
        v[usize::from_str_radix(bits, 2).expect("bitstring")] += re(coeff);
    }
    v
}

/// One logical qubit: two orthonormal codewords.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodePairRepr")]
pub struct CodePair {
    /// Damping probability the code was tuned for, if any.
    pub gamma: Option<f64>,
    #[serde(with = "crate::matrix::complex_vec_serde")]
    zero_logical: Vec<Complex64>,
    #[serde(with = "crate::matrix::complex_vec_serde")]
    one_logical: Vec<Complex64>,
}

#[derive(Deserialize)]
struct CodePairRepr {
    gamma: Option<f64>,
    #[serde(with = "crate::matrix::complex_vec_serde")]
    zero_logical: Vec<Complex64>,
    #[serde(with = "crate::matrix::complex_vec_serde")]
    one_logical: Vec<Complex64>,
}

impl TryFrom<CodePairRepr> for CodePair {
    type Error = QecError;
    fn try_from(r: CodePairRepr) -> Result<Self> {
        CodePair::normalized(r.gamma, r.zero_logical, r.one_logical)
    }
}

impl CodePair {
    /// Strict constructor: unit norms and orthogonality within 1e-12.
    pub fn new(gamma: Option<f64>, zero_logical: Vec<Complex64>, one_logical: Vec<Complex64>) -> Result<Self> {
        Self::check_dims(&zero_logical, &one_logical)?;
        for (name, v) in [("|0_L>", &zero_logical), ("|1_L>", &one_logical)] {
            let norm = vec_norm(v);
            if (norm - 1.0).abs() > CODE_TOL {
                return Err(QecError::Invalid(format!("{name} has norm {norm}")));
            }
        }
        let overlap = inner(&zero_logical, &one_logical).norm();
        if overlap > CODE_TOL {
            return Err(QecError::Invalid(format!("codewords overlap by {overlap:.3e}")));
        }
        Ok(CodePair { gamma, zero_logical, one_logical })
    }

    /// Orthonormalizes user-supplied codewords (Gram-Schmidt, `|0_L>` first).
    pub fn normalized(gamma: Option<f64>, zero_logical: Vec<Complex64>, one_logical: Vec<Complex64>) -> Result<Self> {
        Self::check_dims(&zero_logical, &one_logical)?;
        let basis = gram_schmidt(&[zero_logical, one_logical], 1e-6);
        if basis.len() != 2 {
            return Err(QecError::Invalid("codewords are (nearly) linearly dependent".into()));
        }
        let mut it = basis.into_iter();
        Self::new(gamma, it.next().unwrap(), it.next().unwrap())
    }

    fn check_dims(a: &[Complex64], b: &[Complex64]) -> Result<()> {
        if a.len() != b.len() || a.len() < 2 || !a.len().is_power_of_two() {
            return Err(QecError::DimensionMismatch(format!(
                "codewords must share a power-of-two dimension, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(())
    }

    pub fn zero_logical(&self) -> &[Complex64] {
        &self.zero_logical
    }

    pub fn one_logical(&self) -> &[Complex64] {
        &self.one_logical
    }

    /// Physical dimension.
    pub fn dim(&self) -> usize {
        self.zero_logical.len()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn codeword(&self, i: usize) -> &[Complex64] {
        match i {
            0 => &self.zero_logical,
            1 => &self.one_logical,
            _ => panic!("logical index {i} out of range"),
        }
    }

    /// Encoding isometry `V = |0_L><0| + |1_L><1|` (`dim x 2`).
    pub fn isometry(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), 2, |r, col| self.codeword(col)[r])
    }

    /// Code-space projector `V V†`.
    pub fn projector(&self) -> ComplexMatrix {
        let v = self.isometry();
        &v * &v.adjoint()
    }

    /// Encodes the logical state `c0 |0_L> + c1 |1_L>`.
    pub fn encode_state(&self, c0: Complex64, c1: Complex64) -> Vec<Complex64> {
        self.zero_logical.iter().zip(&self.one_logical).map(|(a, b)| c0 * a + c1 * b).collect()
    }

    /// Orthonormal basis of the code space's orthocomplement, built by
    /// Gram-Schmidt over `seeds` after the codewords.
    pub fn complement_basis(&self, seeds: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let mut all = vec![self.zero_logical.clone(), self.one_logical.clone()];
        all.extend(seeds.iter().cloned());
        let basis = gram_schmidt(&all, 1e-8);
        basis.into_iter().skip(2).collect()
    }
}

/// The damping-adapted four-qubit code:
/// `|0_L> = √(1 - 1/(2(1-γ)²)) |0000> + 1/(√2 (1-γ)) |1111>`,
/// `|1_L> = (|0011> + |0101> - |1010> + |1100>) / 2`.
pub fn optimized_code(gamma: f64) -> Result<CodePair> {
    if !(0.0..OPTIMIZED_CODE_GAMMA_MAX).contains(&gamma) {
        return Err(QecError::Domain(format!(
            "optimized code needs 0 <= gamma < {OPTIMIZED_CODE_GAMMA_MAX:.6}, got {gamma}"
        )));
    }
    let (a, b) = optimized_amplitudes(gamma);
    let zero = ket_combination(&[(a, "0000"), (b, "1111")]);
    let one = ket_combination(&[(0.5, "0011"), (0.5, "0101"), (-0.5, "1010"), (0.5, "1100")]);
    CodePair::new(Some(gamma), zero, one)
}

/// `(a, b)` amplitudes of `|0000>` and `|1111>` in the optimized `|0_L>`.
pub fn optimized_amplitudes(gamma: f64) -> (f64, f64) {
    let s = 1.0 - gamma;
    ((1.0 - 1.0 / (2.0 * s * s)).sqrt(), 1.0 / (std::f64::consts::SQRT_2 * s))
}

/// The Leung-Nielsen-Chuang-Yamamoto four-qubit code:
/// `|0_L> = (|0000> + |1111>)/√2`, `|1_L> = (|0011> + |1100>)/√2`.
pub fn leung_code() -> CodePair {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = ket_combination(&[(s, "0000"), (s, "1111")]);
    let one = ket_combination(&[(s, "0011"), (s, "1100")]);
    CodePair::new(None, zero, one).expect("fixed codewords are orthonormal")
}

/// Encoding isometry as a single-Kraus channel `2 -> dim`.
pub fn encoding_kraus(code: &CodePair) -> KrausChannel {
    KrausChannel::new(2, code.dim(), vec![code.isometry()]).expect("isometry is trace preserving")
}

/// Choi matrix of the encoding isometry.
pub fn encoding_channel(code: &CodePair) -> ChoiMatrix {
    kraus_to_choi(&encoding_kraus(code))
}

/// Decoding channel `{V†} ∪ {|0><c_j|}` with `c_j` completing the code space
/// from the computational basis.
pub fn decoding_channel(code: &CodePair) -> KrausChannel {
    let seeds: Vec<_> = (0..code.dim()).map(|i| basis_vector(code.dim(), i)).collect();
    decoding_channel_from_seeds(code, &seeds)
}

/// Like [`decoding_channel`] with the orthocomplement seeded by `seeds`.
pub fn decoding_channel_from_seeds(code: &CodePair, seeds: &[Vec<Complex64>]) -> KrausChannel {
    let complement = code.complement_basis(seeds);
    assert_eq!(complement.len(), code.dim() - 2, "seeds must span the complement");
    let zero = basis_vector(2, 0);
    let mut kraus = vec![code.isometry().adjoint()];
    kraus.extend(complement.iter().map(|cvec| ComplexMatrix::outer(&zero, cvec)));
    KrausChannel::new(code.dim(), 2, kraus).expect("completed decoding is trace preserving")
}
