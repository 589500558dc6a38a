//! Alternating maximization of entanglement fidelity over encoding and
//! recovery-decoding Choi matrices.
//!
//! Each half-step maximizes a linear functional `Tr[X C]` over the CPTP set
//! `{X ⪰ 0, Tr_out X = I}`. The solver takes gradient steps of length `1/ρ`
//! along `C` and restores feasibility with one warm-started Dykstra sweep per
//! step (affine shift, then PSD clipping, carrying the PSD correction term).
//! Written out, this is the scaled ADMM iteration
//!
//! ```text
//! X ← Π_affine(Z − U + C/ρ)
//! Z ← Π_psd(X + U)
//! U ← U + X − Z
//! ```
//!
//! with residual-balanced step sizes. The final PSD iterate is mapped onto
//! the trace constraint exactly by the congruence `(M^{-1/2} ⊗ I) Z (M^{-1/2} ⊗ I)`
//! with `M = Tr_out Z`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{kraus_to_choi, ChoiMatrix, KrausChannel};
use crate::error::{QecError, Result};
use crate::fidelity::{f_map, f_map_adjoint, fidelity_from_choi};
use crate::matrix::{inv_sqrt_psd, kron, partial_trace, ComplexMatrix, Subsystem};
use crate::random::{random_hermitian, random_isometry};

/// Logical dimension of the encoded system.
pub const LOGICAL_DIM: usize = 2;

/// Solver and loop controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpSettings {
    /// Convergence threshold for a single subproblem.
    pub tol: f64,
    /// Iteration cap per subproblem.
    pub max_iters: usize,
    /// Fidelity change that ends the alternation.
    pub outer_tol: f64,
    pub max_rounds: usize,
    /// Solver iterations per half-step inside the alternation. The solver
    /// state is carried across rounds, so each half-step continues where the
    /// previous one stopped; the final recovery is solved to `tol`.
    pub inner_iters: usize,
    /// Every few rounds, also try the encoding isometry pushed further along
    /// its recent displacement; kept only if it raises the fidelity.
    pub extrapolate: bool,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            tol: 1e-8,
            max_iters: 5000,
            outer_tol: 1e-9,
            max_rounds: 200,
            inner_iters: 20,
            extrapolate: false,
            restarts: 10,
            seed: 0,
        }
    }
}

impl SdpSettings {
    /// Rejects non-positive values; returns warnings for legal but odd settings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [("tol", self.tol), ("outer_tol", self.outer_tol)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(QecError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("max_iters", self.max_iters),
            ("max_rounds", self.max_rounds),
            ("inner_iters", self.inner_iters),
            ("restarts", self.restarts),
        ] {
            if v == 0 {
                return Err(QecError::Invalid(format!("{name} must be positive")));
            }
        }
        let mut warnings = Vec::new();
        if self.tol < self.outer_tol {
            warnings.push(format!(
                "subproblem tol {:.1e} is tighter than the alternation tol {:.1e}",
                self.tol, self.outer_tol
            ));
        }
        Ok(warnings)
    }
}

/// Warm-start data for the linear CPTP solver.
#[derive(Clone, Debug)]
pub struct SolverState {
    z: ComplexMatrix,
    u: ComplexMatrix,
    rho: f64,
}

/// Outcome of one linear maximization.
#[derive(Clone, Debug)]
pub struct LinearSdpSolution {
    pub choi: ChoiMatrix,
    /// `Tr[X C]` at the returned feasible point.
    pub objective: f64,
    pub iterations: usize,
    /// False when the iteration cap was reached first.
    pub converged: bool,
    pub state: SolverState,
}

/// `W - ((Tr_out W - I) / d_out) ⊗ I`: Frobenius projection onto the
/// trace-preserving affine set.
fn affine_project(w: &ComplexMatrix, d_in: usize, d_out: usize) -> ComplexMatrix {
    let m = partial_trace(w, (d_in, d_out), Subsystem::Second).expect("square by construction");
    let mut out = w.clone();
    for i in 0..d_in {
        for ip in 0..d_in {
            let mut shift = m[(i, ip)];
            if i == ip {
                shift -= 1.0;
            }
            let shift = shift / d_out as f64;
            for j in 0..d_out {
                out[(i * d_out + j, ip * d_out + j)] -= shift;
            }
        }
    }
    out
}

/// PSD part of a Hermitian matrix, without the phase bookkeeping of `herm_eig`.
fn psd_part(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let eig = nalgebra::SymmetricEigen::new(m.hermitian_part().into_inner());
    let mut out = nalgebra::DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * crate::matrix::re(lam);
    }
    ComplexMatrix::from_inner(out)
}

fn spectral_norm(m: &ComplexMatrix) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.hermitian_part().into_inner());
    eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()))
}

/// Maps a PSD matrix with invertible `Tr_out` exactly onto the trace constraint.
fn normalize_trace(z: &ComplexMatrix, d_in: usize, d_out: usize) -> Option<ComplexMatrix> {
    let m = partial_trace(z, (d_in, d_out), Subsystem::Second).ok()?;
    let s = inv_sqrt_psd(&m.hermitian_part()).ok()?;
    if !s.is_finite() {
        return None;
    }
    let a = kron(&s, &ComplexMatrix::identity(d_out));
    Some((&a * z * &a).hermitian_part())
}

/// Frobenius-nearest CPTP Choi matrix, by Dykstra's alternating projections
/// between the trace-preserving affine set and the PSD cone.
pub fn cptp_project(x: &ComplexMatrix, d_in: usize, d_out: usize, tol: f64) -> Result<ChoiMatrix> {
    cptp_project_capped(x, d_in, d_out, tol, 200_000)
}

/// [`cptp_project`] with an explicit iteration cap.
pub fn cptp_project_capped(
    x: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    tol: f64,
    max_iters: usize,
) -> Result<ChoiMatrix> {
    let side = d_in * d_out;
    if x.shape() != (side, side) {
        return Err(QecError::DimensionMismatch(format!(
            "expected a {side}x{side} matrix for {d_in}->{d_out}, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    crate::matrix::check_hermitian(x, crate::matrix::hermitian_tol(x))?;
    let inner_tol = 0.1 * tol;
    let mut cur = x.hermitian_part();
    let mut q = ComplexMatrix::zeros(side, side);
    for _ in 0..max_iters {
        let y = affine_project(&cur, d_in, d_out);
        let z = psd_part(&(&y + &q));
        q = &y + &q - &z;
        let gap = z.distance(&y);
        let step = z.distance(&cur);
        cur = z;
        if gap <= inner_tol && step <= inner_tol {
            let exact = normalize_trace(&cur, d_in, d_out).unwrap_or_else(|| affine_project(&cur, d_in, d_out));
            let choi = ChoiMatrix::unchecked(d_in, d_out, exact)?;
            let report = choi.check_cptp(tol);
            if report.passes {
                return Ok(choi);
            }
        }
    }
    Err(QecError::NonConvergence("CPTP projection", max_iters))
}

/// Maximizes `Tr[X C]` over CPTP Choi matrices `d_in -> d_out`.
///
/// Hitting `settings.max_iters` is not an error: the best feasible point is
/// returned with `converged == false`.
pub fn solve_linear_cptp_max(
    objective: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    settings: &SdpSettings,
) -> Result<LinearSdpSolution> {
    solve_linear_cptp_max_from(objective, d_in, d_out, settings, None)
}

/// [`solve_linear_cptp_max`] warm-started from a previous solver state.
pub fn solve_linear_cptp_max_from(
    objective: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    settings: &SdpSettings,
    warm: Option<&SolverState>,
) -> Result<LinearSdpSolution> {
    let side = d_in * d_out;
    if objective.shape() != (side, side) {
        return Err(QecError::DimensionMismatch(format!(
            "objective must be {side}x{side} for {d_in}->{d_out}, got {}x{}",
            objective.rows(),
            objective.cols()
        )));
    }
    crate::matrix::check_hermitian(objective, crate::matrix::hermitian_tol(objective))?;
    let c = objective.hermitian_part();
    let c_norm = spectral_norm(&c).max(1e-12);

    let (mut z, mut u, mut rho) = match warm {
        Some(s) if s.z.shape() == (side, side) => (s.z.clone(), s.u.clone(), s.rho),
        _ => (ComplexMatrix::identity(side).scale(1.0 / d_out as f64), ComplexMatrix::zeros(side, side), c_norm),
    };

    // residual thresholds, relative to the size of the feasible set
    let scale = (d_in as f64).sqrt();
    let eps_primal = settings.tol * scale;
    let eps_dual = settings.tol * c_norm.max(1.0);
    let mut converged = false;
    let mut iterations = 0;
    let mut last_obj = f64::NAN;
    while iterations < settings.max_iters {
        iterations += 1;
        let x = affine_project(&(&z - &u + c.scale(1.0 / rho)), d_in, d_out);
        let z_prev = z;
        z = psd_part(&(&x + &u));
        u = u + &x - &z;

        let primal = x.distance(&z);
        let dual = rho * z.distance(&z_prev);
        let obj = z.trace_product(&c).re;
        let obj_change = (obj - last_obj).abs();
        last_obj = obj;
        if primal <= eps_primal && dual <= eps_dual && obj_change <= settings.tol {
            converged = true;
            break;
        }
        if iterations % 10 == 0 {
            // residual balancing: a longer gradient step when feasibility lags behind
            if primal > 10.0 * dual {
                rho *= 2.0;
                u = u.scale(0.5);
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                u = u.scale(2.0);
            }
        }
    }

    let feasible = match normalize_trace(&z, d_in, d_out) {
        Some(m) => ChoiMatrix::unchecked(d_in, d_out, m)?,
        None => cptp_project(&z, d_in, d_out, settings.tol.max(1e-10))?,
    };
    let objective_value = feasible.matrix().trace_product(&c).re;
    Ok(LinearSdpSolution {
        choi: feasible,
        objective: objective_value,
        iterations,
        converged,
        state: SolverState { z, u, rho },
    })
}

/// Result of one half-step of the alternation.
#[derive(Clone, Debug)]
pub struct HalfStep {
    pub choi: ChoiMatrix,
    pub fidelity: f64,
    pub converged: bool,
    pub iterations: usize,
    pub state: SolverState,
}

fn check_chain(enc: &ChoiMatrix, noise: &ChoiMatrix) -> Result<()> {
    if noise.d_in() != noise.d_out() || enc.d_out() != noise.d_in() {
        return Err(QecError::DimensionMismatch(format!(
            "encoding {}->{} cannot feed noise {}->{}",
            enc.d_in(),
            enc.d_out(),
            noise.d_in(),
            noise.d_out()
        )));
    }
    Ok(())
}

/// Best recovery-decoding map for a fixed encoding: returns `(X_DR, F_ent)`.
pub fn optimal_recovery(enc: &ChoiMatrix, noise: &ChoiMatrix, settings: &SdpSettings) -> Result<HalfStep> {
    optimal_recovery_from(enc, noise, settings, None)
}

pub fn optimal_recovery_from(
    enc: &ChoiMatrix,
    noise: &ChoiMatrix,
    settings: &SdpSettings,
    warm: Option<&SolverState>,
) -> Result<HalfStep> {
    check_chain(enc, noise)?;
    let d = enc.d_in();
    let c = f_map(noise, enc)?;
    let sol = solve_linear_cptp_max_from(&c, noise.d_out(), d, settings, warm)?;
    let fidelity = fidelity_from_choi(&sol.choi, &c)?;
    Ok(HalfStep { choi: sol.choi, fidelity, converged: sol.converged, iterations: sol.iterations, state: sol.state })
}

/// Best encoding for a fixed recovery-decoding map: returns `(X_E, F_ent)`.
pub fn optimal_encoding(dr: &ChoiMatrix, noise: &ChoiMatrix, settings: &SdpSettings) -> Result<HalfStep> {
    optimal_encoding_from(dr, noise, settings, None)
}

pub fn optimal_encoding_from(
    dr: &ChoiMatrix,
    noise: &ChoiMatrix,
    settings: &SdpSettings,
    warm: Option<&SolverState>,
) -> Result<HalfStep> {
    let g = f_map_adjoint(noise, dr)?;
    adjoint_self_test(dr, noise, &g, settings.seed)?;
    encoding_step(&g, noise.d_in(), dr.d_out(), settings, warm)
}

fn encoding_step(
    g: &ComplexMatrix,
    n: usize,
    d: usize,
    settings: &SdpSettings,
    warm: Option<&SolverState>,
) -> Result<HalfStep> {
    let sol = solve_linear_cptp_max_from(g, d, n, settings, warm)?;
    let fidelity = sol.objective / (d * d) as f64;
    Ok(HalfStep { choi: sol.choi, fidelity, converged: sol.converged, iterations: sol.iterations, state: sol.state })
}

/// Checks `Tr[X_DR f_N(X)] = Tr[G X]` on a random Hermitian `X`.
fn adjoint_self_test(dr: &ChoiMatrix, noise: &ChoiMatrix, g: &ComplexMatrix, seed: u64) -> Result<()> {
    let (n, d) = (noise.d_in(), dr.d_out());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ad70);
    let probe = ChoiMatrix::unchecked(d, n, random_hermitian(&mut rng, d * n))?;
    let lhs = dr.matrix().trace_product(&f_map(noise, &probe)?);
    let rhs = g.trace_product(probe.matrix());
    let residual = (lhs - rhs).norm();
    if residual > 1e-10 * (1.0 + lhs.norm()) {
        return Err(QecError::AdjointMismatch(residual));
    }
    Ok(())
}

/// Random CPTP map: a Haar-style isometry when `d_out >= d_in`, otherwise
/// the CPTP projection of a random Hermitian matrix. Deterministic per seed.
pub fn random_cptp(d_in: usize, d_out: usize, seed: u64) -> Result<ChoiMatrix> {
    if d_in == 0 || d_out == 0 {
        return Err(QecError::Shape("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if d_out >= d_in {
        let v = random_isometry(&mut rng, d_out, d_in);
        Ok(kraus_to_choi(&KrausChannel::new(d_in, d_out, vec![v])?))
    } else {
        let h = random_hermitian(&mut rng, d_in * d_out);
        cptp_project(&h, d_in, d_out, 1e-10)
    }
}

/// Per-restart record of the alternation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart_index: usize,
    pub fidelity: f64,
    pub fidelity_trace: Vec<f64>,
}

/// Best encoding/recovery pair found by the alternation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub enc_choi: ChoiMatrix,
    pub dr_choi: ChoiMatrix,
    pub fidelity: f64,
    /// Fidelity after each completed round (recovery step then encoding step).
    pub fidelity_trace: Vec<f64>,
    pub rounds: usize,
    pub restart_index: usize,
    /// False if the final recovery solve of any restart hit `max_iters`.
    pub converged: bool,
    /// True if the winning restart stopped on `outer_tol` rather than `max_rounds`.
    pub outer_converged: bool,
    /// Every restart's trace, in restart order.
    pub restarts: Vec<RestartTrace>,
}

struct RestartOutcome {
    enc: ChoiMatrix,
    dr: ChoiMatrix,
    fidelity: f64,
    trace: Vec<f64>,
    converged: bool,
    outer_converged: bool,
}

fn run_restart(
    noise: &ChoiMatrix,
    settings: &SdpSettings,
    restart: usize,
    init: Option<&ChoiMatrix>,
) -> Result<RestartOutcome> {
    let n = noise.d_in();
    let d = LOGICAL_DIM;
    let seed = settings.seed.wrapping_add(restart as u64);
    let inner = SdpSettings { max_iters: settings.inner_iters, ..settings.clone() };
    let mut enc = match init {
        Some(e) => e.clone(),
        None => random_cptp(d, n, seed)?,
    };
    let mut c = f_map(noise, &enc)?;
    let mut dr: Option<ChoiMatrix> = None;
    let mut rec_state: Option<SolverState> = None;
    let mut enc_state: Option<SolverState> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut outer_converged = false;
    let mut reach = 1.0;
    let mut anchor = enc.clone();

    for round in 0..settings.max_rounds {
        // each half-step keeps the incumbent unless the solver improved on it
        let rec = solve_linear_cptp_max_from(&c, n, d, &inner, rec_state.as_ref())?;
        let mut settled = rec.converged;
        rec_state = Some(rec.state);
        let new_dr = match dr {
            Some(old) if old.matrix().trace_product(&c).re >= rec.objective => old,
            _ => rec.choi,
        };
        let g = f_map_adjoint(noise, &new_dr)?;
        if trace.is_empty() {
            adjoint_self_test(&new_dr, noise, &g, seed)?;
        }
        let step = encoding_step(&g, n, d, &inner, enc_state.as_ref())?;
        settled &= step.converged;
        enc_state = Some(step.state);
        if step.choi.matrix().trace_product(&g).re > enc.matrix().trace_product(&g).re {
            enc = step.choi;
            c = f_map(noise, &enc)?;
        }
        let mut current = fidelity_from_choi(&new_dr, &c)?;
        let mut new_dr = new_dr;
        if settings.extrapolate && (round + 1) % EXTRAPOLATION_WINDOW == 0 && enc != anchor {
            let candidate = extrapolate_isometry(&anchor, &enc, reach)?;
            let c_cand = f_map(noise, &candidate)?;
            let probe = solve_linear_cptp_max_from(&c_cand, n, d, &inner, rec_state.as_ref())?;
            let f_cand = fidelity_from_choi(&probe.choi, &c_cand)?;
            if f_cand > current {
                enc = candidate;
                c = c_cand;
                new_dr = probe.choi;
                rec_state = Some(probe.state);
                current = f_cand;
                reach = (2.0 * reach).min(1e3);
            } else {
                reach = (0.5 * reach).max(0.5);
            }
        }
        if settings.extrapolate && (round + 1) % EXTRAPOLATION_WINDOW == 0 {
            anchor = enc.clone();
        }
        dr = Some(new_dr);
        let previous = trace.last().copied();
        trace.push(current);
        // a stalled round only counts once both solves have actually converged
        if settled && previous.is_some_and(|p| (current - p).abs() < settings.outer_tol) {
            outer_converged = true;
            break;
        }
    }

    // full-accuracy recovery for the final encoding
    let dr = dr.expect("max_rounds > 0");
    let polished = solve_linear_cptp_max_from(&c, n, d, settings, rec_state.as_ref())?;
    let dr = if polished.objective > dr.matrix().trace_product(&c).re { polished.choi } else { dr };
    let fidelity = fidelity_from_choi(&dr, &c)?;
    Ok(RestartOutcome { enc, dr, fidelity, trace, converged: polished.converged, outer_converged })
}

/// Rounds between extrapolation attempts; the displacement over the window
/// averages out the zig-zag of single rounds.
const EXTRAPOLATION_WINDOW: usize = 10;

/// Isometry `V` (columns) of a rank-one encoding Choi matrix, made exactly
/// isometric by polar decomposition.
fn encoding_isometry(enc: &ChoiMatrix) -> Result<ComplexMatrix> {
    let (d, n) = (enc.d_in(), enc.d_out());
    let eig = crate::matrix::herm_eig(enc.matrix())?;
    let scale = eig.eigenvalues[0].max(0.0).sqrt();
    let v = ComplexMatrix::from_fn(n, d, |k, i| eig.eigenvectors[(i * n + k, 0)] * scale);
    polar(&v)
}

/// `M (M†M)^{-1/2}`.
fn polar(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(m * &inv_sqrt_psd(&(m.adjoint() * m))?)
}

/// `V1 + s (V1 - V0)` after aligning the logical frame of `V1` to `V0`.
fn extrapolate_isometry(before: &ChoiMatrix, after: &ChoiMatrix, s: f64) -> Result<ChoiMatrix> {
    let v0 = encoding_isometry(before)?;
    let v1 = encoding_isometry(after)?;
    let u = polar(&(v0.adjoint() * &v1))?;
    let v1 = &v1 * &u.adjoint();
    let pushed = polar(&(&v1 + &(&v1 - &v0).scale(s)))?;
    Ok(kraus_to_choi(&KrausChannel::unchecked(before.d_in(), before.d_out(), vec![pushed])?))
}

/// Alternating optimization from `settings.restarts` random encodings;
/// the best restart wins (ties go to the lowest index).
pub fn alternate_optimize(noise: &ChoiMatrix, settings: &SdpSettings) -> Result<OptimizationResult> {
    alternate_optimize_from(noise, settings, None)
}

/// [`alternate_optimize`] with restart 0 started from `init` instead of a
/// random encoding.
pub fn alternate_optimize_from(
    noise: &ChoiMatrix,
    settings: &SdpSettings,
    init: Option<&ChoiMatrix>,
) -> Result<OptimizationResult> {
    settings.validate()?;
    if noise.d_in() != noise.d_out() {
        return Err(QecError::DimensionMismatch("noise must map a space to itself".into()));
    }
    if let Some(e) = init {
        if e.d_in() != LOGICAL_DIM || e.d_out() != noise.d_in() {
            return Err(QecError::DimensionMismatch(format!(
                "initial encoding {}->{} does not fit noise on {}",
                e.d_in(),
                e.d_out(),
                noise.d_in()
            )));
        }
    }
    let outcomes: Vec<RestartOutcome> = (0..settings.restarts)
        .into_par_iter()
        .map(|r| run_restart(noise, settings, r, if r == 0 { init } else { None }))
        .collect::<Result<Vec<_>>>()?;
    let best_index =
        outcomes.iter().enumerate().fold(0, |best, (i, o)| if o.fidelity > outcomes[best].fidelity { i } else { best });
    let restarts = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| RestartTrace { restart_index: i, fidelity: o.fidelity, fidelity_trace: o.trace.clone() })
        .collect();
    let converged = outcomes.iter().all(|o| o.converged);
    let best = outcomes.into_iter().nth(best_index).expect("restarts > 0");
    Ok(OptimizationResult {
        rounds: best.trace.len(),
        enc_choi: best.enc,
        dr_choi: best.dr,
        fidelity: best.fidelity,
        fidelity_trace: best.trace,
        restart_index: best_index,
        converged,
        outer_converged: best.outer_converged,
        restarts,
    })
}
