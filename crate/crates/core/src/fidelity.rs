//! Entanglement fidelity in the Choi picture and the direct Kraus picture.
//!
//! Choi picture: `F = Tr[X_DR · f_N(X_E)] / d²` with
//! `f_N(X_E)[[l' i'], [l i]] = Σ_{k k'} X_N[[k l], [k' l']] · X_E[[i k], [i' k']]`,
//! where `X_DR` is indexed `[l i]` (physical input `l`, logical output `i`).
//! The adjoint objective `G` satisfies `Tr[X_DR · f_N(X_E)] = Tr[G · X_E]`.

use num_complex::Complex64;

use crate::channels::{compose, kraus_to_choi, ChoiMatrix, KrausChannel};
use crate::codes::{decoding_channel, encoding_channel, encoding_kraus, CodePair};
use crate::error::{QecError, Result};
use crate::matrix::{ComplexMatrix, C_ZERO};

fn check_noise_and_encoding(noise: &ChoiMatrix, enc: &ChoiMatrix) -> Result<(usize, usize)> {
    let n = noise.d_in();
    if noise.d_out() != n {
        return Err(QecError::DimensionMismatch(format!(
            "noise must map a space to itself, got {}->{}",
            noise.d_in(),
            noise.d_out()
        )));
    }
    if enc.d_out() != n {
        return Err(QecError::DimensionMismatch(format!(
            "encoding outputs dimension {}, noise acts on {n}",
            enc.d_out()
        )));
    }
    Ok((n, enc.d_in()))
}

/// The linear map `X_E ↦ f_N(X_E)`; output side `n·d`, indexed like a
/// recovery-decoding Choi matrix (`n -> d`).
pub fn f_map(noise_choi: &ChoiMatrix, enc_choi: &ChoiMatrix) -> Result<ComplexMatrix> {
    let (n, d) = check_noise_and_encoding(noise_choi, enc_choi)?;
    let xn = noise_choi.matrix();
    let xe = enc_choi.matrix();
    let mut out = ComplexMatrix::zeros(n * d, n * d);
    for i in 0..d {
        for ip in 0..d {
            for k in 0..n {
                for kp in 0..n {
                    let e = xe[(i * n + k, ip * n + kp)];
                    if e == C_ZERO {
                        continue;
                    }
                    for l in 0..n {
                        for lp in 0..n {
                            let nv = xn[(k * n + l, kp * n + lp)];
                            if nv != C_ZERO {
                                out[(lp * d + ip, l * d + i)] += nv * e;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The adjoint objective `G` for optimizing the encoding with the
/// recovery-decoding map fixed; output side `d·n`, indexed like an
/// encoding Choi matrix (`d -> n`).
pub fn f_map_adjoint(noise_choi: &ChoiMatrix, dr_choi: &ChoiMatrix) -> Result<ComplexMatrix> {
    let n = noise_choi.d_in();
    if noise_choi.d_out() != n || dr_choi.d_in() != n {
        return Err(QecError::DimensionMismatch(format!(
            "noise {}->{} does not feed recovery {}->{}",
            noise_choi.d_in(),
            noise_choi.d_out(),
            dr_choi.d_in(),
            dr_choi.d_out()
        )));
    }
    let d = dr_choi.d_out();
    let xn = noise_choi.matrix();
    let xr = dr_choi.matrix();
    let mut out = ComplexMatrix::zeros(d * n, d * n);
    // G[[i' k'], [i k]] = Σ_{l l'} X_N[[k l], [k' l']] · X_DR[[l i], [l' i']]
    for k in 0..n {
        for kp in 0..n {
            for l in 0..n {
                for lp in 0..n {
                    let nv = xn[(k * n + l, kp * n + lp)];
                    if nv == C_ZERO {
                        continue;
                    }
                    for i in 0..d {
                        for ip in 0..d {
                            out[(ip * n + kp, i * n + k)] += nv * xr[(l * d + i, lp * d + ip)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Re Tr[X_DR · f] / d²`, rejecting imaginary residues above 1e-10.
pub fn fidelity_from_choi(dr_choi: &ChoiMatrix, fmapped: &ComplexMatrix) -> Result<f64> {
    let side = dr_choi.matrix().rows();
    if fmapped.shape() != (side, side) {
        return Err(QecError::DimensionMismatch(format!(
            "objective is {}x{}, recovery Choi is {side}x{side}",
            fmapped.rows(),
            fmapped.cols()
        )));
    }
    let d = dr_choi.d_out() as f64;
    let t = dr_choi.matrix().trace_product(fmapped);
    if t.im.abs() > 1e-10 {
        return Err(QecError::ImaginaryResidue(t.im));
    }
    Ok(t.re / (d * d))
}

/// Entanglement fidelity `Σ |Tr K|² / d²` of a `d -> d` channel.
pub fn fidelity_direct(ch: &KrausChannel) -> Result<f64> {
    if ch.d_in() != ch.d_out() {
        return Err(QecError::DimensionMismatch(format!(
            "entanglement fidelity needs a square channel, got {}->{}",
            ch.d_in(),
            ch.d_out()
        )));
    }
    Ok(block_fidelity(ch.kraus(), ch.d_in()))
}

/// `Σ |Tr_d K|² / d²` where `Tr_d` sums the first `d` diagonal entries.
fn block_fidelity(kraus: &[ComplexMatrix], d: usize) -> f64 {
    let sum: f64 = kraus.iter().map(|k| (0..d).map(|i| k[(i, i)]).sum::<Complex64>().norm_sqr()).sum();
    sum / (d * d) as f64
}

/// How the physical recovery is turned back into a logical qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Decoding {
    /// Inverse encoding `V†`; weight that a recovery leaves outside the
    /// code space counts as failure.
    #[default]
    InverseEncoding,
    /// The trace-preserving completion of [`decoding_channel`], which maps
    /// the orthocomplement to `|0>`.
    Completed,
}

/// Recovery stage of a scheme.
#[derive(Clone, Debug)]
pub enum Recovery {
    /// Physical recovery `n -> n`, followed by a decoding.
    Physical(KrausChannel, Decoding),
    /// Fused recovery-and-decoding map `n -> d` given by its Choi matrix.
    Fused(ChoiMatrix),
}

/// Encoding, noise and recovery of one logical qubit.
#[derive(Clone, Debug)]
pub struct SchemeSpec {
    pub code: CodePair,
    pub noise: KrausChannel,
    pub recovery: Recovery,
}

impl SchemeSpec {
    pub fn new(code: CodePair, noise: KrausChannel, recovery: Recovery) -> Result<Self> {
        let n = code.dim();
        if noise.d_in() != n || noise.d_out() != n {
            return Err(QecError::DimensionMismatch(format!(
                "noise {}->{} does not act on the {n}-dimensional code space",
                noise.d_in(),
                noise.d_out()
            )));
        }
        match &recovery {
            Recovery::Physical(r, _) if r.d_in() != n || r.d_out() != n => {
                return Err(QecError::DimensionMismatch(format!(
                    "recovery {}->{} must act on dimension {n}",
                    r.d_in(),
                    r.d_out()
                )))
            }
            Recovery::Fused(x) if x.d_in() != n || x.d_out() != 2 => {
                return Err(QecError::DimensionMismatch(format!(
                    "fused recovery {}->{} must map {n} -> 2",
                    x.d_in(),
                    x.d_out()
                )))
            }
            _ => {}
        }
        Ok(SchemeSpec { code, noise, recovery })
    }

    /// Scheme that applies no correction before decoding.
    pub fn uncorrected(code: CodePair, noise: KrausChannel) -> Result<Self> {
        let n = code.dim();
        Self::new(code, noise, Recovery::Physical(KrausChannel::identity(n), Decoding::InverseEncoding))
    }
}

/// Entanglement fidelity of `D ∘ R ∘ N ∘ E` as a logical `2 -> 2` map.
pub fn scheme_fidelity(s: &SchemeSpec) -> Result<f64> {
    match &s.recovery {
        Recovery::Fused(dr) => {
            let f = f_map(&kraus_to_choi(&s.noise), &encoding_channel(&s.code))?;
            fidelity_from_choi(dr, &f)
        }
        Recovery::Physical(r, decoding) => {
            let physical = compose(r, &compose(&s.noise, &encoding_kraus(&s.code))?)?;
            match decoding {
                Decoding::Completed => fidelity_direct(&compose(&decoding_channel(&s.code), &physical)?),
                Decoding::InverseEncoding => {
                    let vdag = s.code.isometry().adjoint();
                    let logical: Vec<ComplexMatrix> = physical.kraus().iter().map(|k| &vdag * k).collect();
                    Ok(block_fidelity(&logical, 2))
                }
            }
        }
    }
}
