//! Knill–Laflamme matrices of four-qubit codes under amplitude damping and
//! their deviation from exact correctability.
//!
//! Errors are indexed in the order of [`ERROR_LABELS`]: no damping, the four
//! single decays, then the six double decays.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{check_gamma, damping_operator, DampingPattern, KrausChannel};
use crate::codes::{optimized_amplitudes, CodePair};
use crate::error::{QecError, Result};
use crate::matrix::{inner, ComplexMatrix};

pub const ERROR_LABELS: [&str; 11] =
    ["0000", "1000", "0100", "0010", "0001", "1100", "1010", "1001", "0110", "0101", "0011"];

/// Number of errors with at most one decay.
pub const FIRST_ORDER_COUNT: usize = 5;

/// The eleven damping operators of order at most two, in [`ERROR_LABELS`] order.
pub fn error_set(gamma: f64) -> Result<KrausChannel> {
    check_gamma(gamma)?;
    let patterns: Vec<DampingPattern> =
        ERROR_LABELS.iter().map(|l| DampingPattern::from_label(l)).collect::<Result<_>>()?;
    let ops = patterns.iter().map(|&p| damping_operator(gamma, p)).collect::<Result<Vec<_>>>()?;
    KrausChannel::unchecked(16, 16, ops)?.with_patterns(patterns)
}

/// `m_ij[a][b] = <i_L| E_a† E_b |j_L>` over the error set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QecMatrices {
    pub gamma: f64,
    pub m00: ComplexMatrix,
    pub m01: ComplexMatrix,
    pub m11: ComplexMatrix,
    pub error_labels: Vec<String>,
}

impl QecMatrices {
    /// Largest entrywise difference to another set of matrices.
    pub fn max_difference(&self, other: &QecMatrices) -> f64 {
        [(&self.m00, &other.m00), (&self.m01, &other.m01), (&self.m11, &other.m11)]
            .iter()
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }
}

fn labels() -> Vec<String> {
    ERROR_LABELS.iter().map(|s| s.to_string()).collect()
}

/// Computes the three matrices by direct inner products.
pub fn qec_matrices(code: &CodePair, gamma: f64) -> Result<QecMatrices> {
    if code.dim() != 16 {
        return Err(QecError::DimensionMismatch(format!("expected a four-qubit code, got dimension {}", code.dim())));
    }
    let errors = error_set(gamma)?;
    let images = |word: &[Complex64]| -> Vec<Vec<Complex64>> { errors.kraus().iter().map(|e| e.apply(word)).collect() };
    let zero = images(code.zero_logical());
    let one = images(code.one_logical());
    let gram = |l: &[Vec<Complex64>], r: &[Vec<Complex64>]| ComplexMatrix::from_fn(11, 11, |a, b| inner(&l[a], &r[b]));
    Ok(QecMatrices {
        gamma,
        m00: gram(&zero, &zero),
        m01: gram(&zero, &one),
        m11: gram(&one, &one),
        error_labels: labels(),
    })
}

/// Closed forms of the matrices for the optimized code.
///
/// With `a`, `b` the codeword amplitudes and `s = (+1, -1, 0, 0, +1, +1)`
/// the signs of `|1_L>` seen by the double decays:
///
/// ```text
/// m00 = diag(a² + (1-γ)²/2, γ(1-γ)/2 ×4, γ²/2 ×6)
/// m11 = diag((1-γ)², γ(1-γ)/2 ×4, 0 ×6) + (γ²/4) s sᵀ
/// m01[0][5+k] = s_k aγ/2,   m01[5+k][0] = t_k γ(1-γ)/(2√2)
/// ```
///
/// where `t = (+1, +1, 0, 0, -1, +1)`.
pub fn optimized_closed_forms(gamma: f64) -> Result<QecMatrices> {
    // the code itself checks the domain
    crate::codes::optimized_code(gamma)?;
    let g = gamma;
    let (a, _) = optimized_amplitudes(g);
    let s = [1.0, -1.0, 0.0, 0.0, 1.0, 1.0];
    let t = [1.0, 1.0, 0.0, 0.0, -1.0, 1.0];
    let mut m00 = ComplexMatrix::zeros(11, 11);
    let mut m01 = ComplexMatrix::zeros(11, 11);
    let mut m11 = ComplexMatrix::zeros(11, 11);
    m00[(0, 0)] = Complex64::from(a * a + 0.5 * (1.0 - g).powi(2));
    m11[(0, 0)] = Complex64::from((1.0 - g).powi(2));
    for k in 1..FIRST_ORDER_COUNT {
        m00[(k, k)] = Complex64::from(g * (1.0 - g) / 2.0);
        m11[(k, k)] = Complex64::from(g * (1.0 - g) / 2.0);
    }
    for k in 0..6 {
        m00[(5 + k, 5 + k)] = Complex64::from(g * g / 2.0);
        for l in 0..6 {
            m11[(5 + k, 5 + l)] = Complex64::from(g * g / 4.0 * s[k] * s[l]);
        }
        m01[(0, 5 + k)] = Complex64::from(s[k] * a * g / 2.0);
        m01[(5 + k, 0)] = Complex64::from(t[k] * g * (1.0 - g) / (2.0 * std::f64::consts::SQRT_2));
    }
    Ok(QecMatrices { gamma, m00, m01, m11, error_labels: labels() })
}

/// Deviation of the full QEC matrix from the correctable form `I ⊗ C`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationReport {
    /// 22x22, row `i * 11 + a` for logical index `i` and error `a`:
    /// blocks `±(m00 - m11)/2` on the diagonal and `m01`, `m01†` off it.
    pub delta_m: ComplexMatrix,
    pub max_abs: f64,
    pub gamma: f64,
}

/// Builds ΔM with `C = (m00 + m11)/2`.
pub fn deviation_max(q: &QecMatrices) -> DeviationReport {
    let delta_m = deviation_blocks(q);
    DeviationReport { max_abs: delta_m.max_abs(), delta_m, gamma: q.gamma }
}

fn deviation_blocks(q: &QecMatrices) -> ComplexMatrix {
    let half = (&q.m00 - &q.m11).scale(0.5);
    let m10 = q.m01.adjoint();
    ComplexMatrix::from_fn(22, 22, |r, c| {
        let (i, a) = (r / 11, r % 11);
        let (j, b) = (c / 11, c % 11);
        match (i, j) {
            (0, 0) => half[(a, b)],
            (1, 1) => -half[(a, b)],
            (0, 1) => q.m01[(a, b)],
            _ => m10[(a, b)],
        }
    })
}

/// Which errors enter the residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorSubset {
    /// No decay or a single decay.
    #[serde(rename = "e01")]
    UpToFirstOrder,
    #[serde(rename = "all")]
    All,
}

impl ErrorSubset {
    fn size(self) -> usize {
        match self {
            ErrorSubset::UpToFirstOrder => FIRST_ORDER_COUNT,
            ErrorSubset::All => ERROR_LABELS.len(),
        }
    }
}

impl FromStr for ErrorSubset {
    type Err = QecError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e01" => Ok(ErrorSubset::UpToFirstOrder),
            "all" => Ok(ErrorSubset::All),
            other => Err(QecError::Invalid(format!("unknown error subset {other:?} (expected e01 or all)"))),
        }
    }
}

/// `max |<ψ_i|E_a† E_b|ψ_j> - C_ab δ_ij|` over errors in the subset.
pub fn subset_residual(q: &QecMatrices, subset: ErrorSubset) -> f64 {
    let n = subset.size();
    let d = deviation_blocks(q);
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max(d[(i * 11 + a, j * 11 + b)].norm());
                }
            }
        }
    }
    worst
}

/// Power-law fit of the residual against γ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares slope of `log residual` against `log γ`.
///
/// `code_at` supplies the code for each γ, so γ-dependent codes are rebuilt
/// per grid point.
pub fn residual_order(
    code_at: impl Fn(f64) -> Result<CodePair>,
    subset: ErrorSubset,
    gamma_grid: &[f64],
) -> Result<ResidualFit> {
    if gamma_grid.len() < 6 {
        return Err(QecError::Invalid(format!("need at least 6 grid points, got {}", gamma_grid.len())));
    }
    if let Some(g) = gamma_grid.iter().find(|g| !(**g > 0.0 && **g <= 0.1)) {
        return Err(QecError::Domain(format!("grid point {g} outside (0, 0.1]")));
    }
    let points = gamma_grid
        .iter()
        .map(|&g| Ok((g, subset_residual(&qec_matrices(&code_at(g)?, g)?, subset))))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(points)
}

/// Log-log least-squares fit of `(γ, residual)` pairs.
pub fn fit_power_law(points: Vec<(f64, f64)>) -> Result<ResidualFit> {
    if points.iter().all(|p| p.1 < 1e-14) {
        return Err(QecError::DegenerateFit("all residuals vanish".into()));
    }
    if points.iter().any(|p| p.1 < 1e-14) {
        return Err(QecError::DegenerateFit("some residuals vanish, the log-log fit is undefined".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = least_squares_line(&xs, &ys);
    Ok(ResidualFit { slope, intercept, points })
}

pub(crate) fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
