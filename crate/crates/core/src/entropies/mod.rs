//! Entropic quantities of classical-quantum states: von Neumann quantities,
//! one-shot min/max entropies, smoothed and hypothesis-testing variants, and
//! their second-order expansions.

pub mod classical;
pub mod normal;
pub mod quantum;

pub use classical::{
    conditional_entropy_classical, conditional_variance_classical, hypothesis_testing_divergence,
    hypothesis_testing_entropy_classical, max_entropy_closed_form, min_entropy_closed_form,
    shannon, smooth_max_entropy_classical, smooth_min_entropy_classical,
};
pub use normal::{normal_cdf, normal_quantile};
pub use quantum::{guessing_probability, max_entropy_quantum, min_entropy_quantum};

use crate::error::{Error, Result};
use crate::matrix::{self, HermitianOperator, EIG_CUTOFF};
use crate::model::CqState;

/// How a reported entropy value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Method {
    /// Spectral decomposition (von Neumann quantities).
    Spectral,
    /// Exact closed-form expression for commuting states.
    ClosedForm,
    /// Fixed-point POVM iteration for optimal discrimination.
    IterativeDiscrimination,
    /// Projected gradient ascent/descent.
    ProjectedGradient,
    /// Exact solution of the smoothing linear program.
    SmoothingLp,
    /// Neyman–Pearson threshold test.
    NeymanPearson,
}

/// An entropy value together with the route that produced it.
#[derive(Debug, Clone, Copy)]
pub struct EntropyReport {
    pub value: f64,
    pub method: Method,
}

/// Von Neumann entropy `−Tr[ρ log₂ ρ]` of a PSD operator.
pub fn von_neumann(op: &HermitianOperator) -> Result<f64> {
    let d = matrix::eigh(op)?;
    Ok(d.eigenvalues
        .iter()
        .filter(|&&ev| ev > EIG_CUTOFF)
        .map(|&ev| -ev * ev.log2())
        .sum())
}

/// Average conditioning state `ρ̄ = Σ_x p_x ρ^x`.
fn average_block(state: &CqState) -> Result<HermitianOperator> {
    let mut avg = HermitianOperator::zeros(state.block_dim());
    for (p, b) in state.input_dist().probs().iter().zip(state.blocks()) {
        avg = avg.add(&b.base().scale(*p))?;
    }
    Ok(avg)
}

/// Conditional entropy `H(X|Y_D)` of a cq state.
///
/// Classical states use the closed form; otherwise the block structure gives
/// `H(P_X) + Σ_x p_x H(ρ^x) − H(ρ̄)`.
pub fn conditional_entropy(state: &CqState) -> Result<f64> {
    if let Some(j) = state.classical_joint() {
        return Ok(conditional_entropy_classical(&j));
    }
    let probs = state.input_dist().probs();
    let mut h = shannon(probs);
    for (p, b) in probs.iter().zip(state.blocks()) {
        if *p > 1e-14 {
            h += p * von_neumann(b.base())?;
        }
    }
    h -= von_neumann(&average_block(state)?)?;
    Ok(h)
}

/// Conditional entropy through the full joint spectrum, `H(XY_D) − H(Y_D)`.
/// Slower than [`conditional_entropy`] but follows the definition directly;
/// the two agree to numerical precision.
pub fn conditional_entropy_spectral(state: &CqState) -> Result<f64> {
    let joint = state.joint()?;
    Ok(von_neumann(joint.base())? - von_neumann(&average_block(state)?)?)
}

/// Conditional information variance `V(X|Y_D)`.
///
/// For block-diagonal cq states this is
/// `Σ_x p_x Tr[ρ^x D_x²] − H(X|Y_D)²` with
/// `D_x = log₂(p_x ρ^x) − log₂ ρ̄`, which reduces to `Var[−log₂ P(X|Y)]` in
/// the commuting case.
pub fn conditional_info_variance(state: &CqState) -> Result<f64> {
    if let Some(j) = state.classical_joint() {
        return Ok(conditional_variance_classical(&j));
    }
    let avg = average_block(state)?;
    let proj = matrix::positive_part_projector(&avg)?;
    let complement = HermitianOperator::identity(avg.dim()).sub(&proj)?;
    let log_avg = matrix::log2m(&avg)?;
    let probs = state.input_dist().probs();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (p, b) in probs.iter().zip(state.blocks()) {
        if *p <= 1e-14 {
            continue;
        }
        let outside: f64 = matrix::matmul(&complement, b.base())
            .diagonal()
            .iter()
            .map(|z| z.re)
            .sum();
        if outside > 1e-8 {
            return Err(Error::SupportViolation(format!(
                "conditioning state support misses {outside:.3e} of a block"
            )));
        }
        let log_block = matrix::log2m(&b.base().scale(*p))?;
        let d = log_block.sub(&log_avg)?;
        let rd = matrix::matmul(b.base(), &d);
        mean += p * (0..avg.dim()).map(|i| rd[(i, i)].re).sum::<f64>();
        let d2 = matrix::matmul(&d, &d);
        let rd2 = b.base().entries() * d2;
        second += p * (0..avg.dim()).map(|i| rd2[(i, i)].re).sum::<f64>();
    }
    let h = -mean;
    Ok((second - h * h).max(0.0))
}

/// Unsmoothed `H_min(X|Y_D)`.
pub fn min_entropy_zero(state: &CqState) -> Result<EntropyReport> {
    if let Some(j) = state.classical_joint() {
        return Ok(EntropyReport {
            value: min_entropy_closed_form(&j),
            method: Method::ClosedForm,
        });
    }
    min_entropy_quantum(state.input_dist().probs(), state.blocks())
}

/// Unsmoothed `H_max(X|Y_D)`.
pub fn max_entropy_zero(state: &CqState) -> Result<EntropyReport> {
    if let Some(j) = state.classical_joint() {
        return Ok(EntropyReport {
            value: max_entropy_closed_form(&j),
            method: Method::ClosedForm,
        });
    }
    max_entropy_quantum(state.input_dist().probs(), state.blocks())
}

/// Second-order expansion of the smooth min-entropy of `n` copies:
/// `n·h + √(n·v)·Φ⁻¹(q)`. Callers supply the quantile argument `q`
/// (for the min-entropy expansion this is the squared smoothing parameter).
pub fn second_order_min_entropy(h: f64, v: f64, n: usize, quantile_arg: f64) -> Result<f64> {
    check_expansion_args(v, n)?;
    Ok(n as f64 * h + (n as f64 * v).sqrt() * normal_quantile(quantile_arg)?)
}

/// Second-order expansion of the hypothesis-testing entropy of `n` copies:
/// `n·h − √(n·v)·Φ⁻¹(q)`.
pub fn second_order_hypothesis_testing(h: f64, v: f64, n: usize, quantile_arg: f64) -> Result<f64> {
    check_expansion_args(v, n)?;
    Ok(n as f64 * h - (n as f64 * v).sqrt() * normal_quantile(quantile_arg)?)
}

fn check_expansion_args(v: f64, n: usize) -> Result<()> {
    if v < 0.0 {
        return Err(Error::InvalidParameter(format!("negative variance {v}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    Ok(())
}
