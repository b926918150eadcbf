//! Square-root measurement decoders for syndrome-based source compression
//! with quantum side information, plus the averaged error bound used to
//! certify them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    eigh, matmul, pinv_sqrtm, positive_part_projector, CMatrix, DensityOperator,
    HermitianOperator,
};
use crate::model::MAX_QUANTUM_DIM;
use crate::protocol::hash::HashFamily;

const POVM_TOL: f64 = 1e-9;

/// Decoder for one syndrome value: POVM elements on the side-information
/// space, one per source symbol in the syndrome class, plus a failure
/// element completing the measurement.
#[derive(Debug, Clone)]
pub struct SrmDecoder {
    pub syndrome: u64,
    /// `(x, Λ^{x;c})` for each `x` with `g(x) = c`.
    pub elements: Vec<(u64, HermitianOperator)>,
    pub failure: HermitianOperator,
}

fn validate_inputs(probs: &[f64], blocks: &[DensityOperator]) -> Result<usize> {
    if probs.len() != blocks.len() || probs.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {} states",
            probs.len(),
            blocks.len()
        )));
    }
    if probs.len() & (probs.len() - 1) != 0 {
        return Err(Error::InvalidDistribution(format!(
            "alphabet size {} is not a power of two",
            probs.len()
        )));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDistribution(format!(
            "source law sums to {total}"
        )));
    }
    let dim = blocks[0].dim();
    if blocks.iter().any(|b| b.dim() != dim) {
        return Err(Error::DimensionMismatch("ragged state dimensions".into()));
    }
    if probs.len() * dim > MAX_QUANTUM_DIM {
        return Err(Error::SizeLimit(format!(
            "joint dimension {} exceeds cap {MAX_QUANTUM_DIM}",
            probs.len() * dim
        )));
    }
    Ok(dim)
}

fn average_state(probs: &[f64], blocks: &[DensityOperator]) -> Result<HermitianOperator> {
    let mut avg = HermitianOperator::zeros(blocks[0].dim());
    for (&p, b) in probs.iter().zip(blocks) {
        avg = avg.add(&b.base().scale(p))?;
    }
    Ok(avg)
}

/// Per-symbol blocks `Π^x` of the projector onto the positive part of
/// `ψ − 2^{−(m−1)} 𝟙 ⊗ φ`; block-diagonal because `ψ` is classical on X.
pub fn clipping_projectors(
    probs: &[f64],
    blocks: &[DensityOperator],
    m: usize,
) -> Result<Vec<HermitianOperator>> {
    validate_inputs(probs, blocks)?;
    let phi = average_state(probs, blocks)?;
    let scale = 2f64.powi(-(m as i32 - 1));
    probs
        .iter()
        .zip(blocks)
        .map(|(&p, b)| positive_part_projector(&b.base().scale(p).sub(&phi.scale(scale))?))
        .collect()
}

fn re_trace_prod(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let (ae, be) = (a.entries(), b.entries());
    let n = a.dim();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            t += ae[(i, j)] * be[(j, i)];
        }
    }
    t.re
}

fn sandwich(outer: &HermitianOperator, mid: &HermitianOperator) -> Result<HermitianOperator> {
    let om: CMatrix = matmul(outer, mid);
    let prod = &om * outer.entries();
    HermitianOperator::new(prod)
}

/// Square-root-measurement decoder for syndrome `c` of the hash `(family,
/// seed)` applied to the classical part of the state.
pub fn srm_decoder(
    probs: &[f64],
    blocks: &[DensityOperator],
    family: &HashFamily,
    seed: u64,
    c: u64,
    m_override: Option<usize>,
) -> Result<SrmDecoder> {
    let dim = validate_inputs(probs, blocks)?;
    let m = m_override.unwrap_or(family.output_bits);
    let projectors = clipping_projectors(probs, blocks, m)?;
    let members: Vec<u64> = (0..probs.len() as u64)
        .filter(|&x| family.hash(seed, x) == c)
        .collect();
    let mut total = HermitianOperator::zeros(dim);
    for &x in &members {
        total = total.add(&projectors[x as usize])?;
    }
    let root = pinv_sqrtm(&total)?;
    let mut elements = Vec::with_capacity(members.len());
    let mut sum = HermitianOperator::zeros(dim);
    for &x in &members {
        let lam = sandwich(&root, &projectors[x as usize])?;
        sum = sum.add(&lam)?;
        elements.push((x, lam));
    }
    let failure = HermitianOperator::identity(dim).sub(&sum)?;
    let dec = SrmDecoder {
        syndrome: c,
        elements,
        failure,
    };
    let v = povm_violation(&dec)?;
    if v > POVM_TOL {
        return Err(Error::InvalidDensity(format!(
            "measurement violates positivity/completeness by {v}"
        )));
    }
    Ok(dec)
}

/// Largest violation of POVM validity: negative eigenvalues of any element
/// (failure included) and the deviation of the element sum from identity.
pub fn povm_violation(dec: &SrmDecoder) -> Result<f64> {
    let dim = dec.failure.dim();
    let mut worst: f64 = 0.0;
    let mut sum = HermitianOperator::zeros(dim);
    for (_, lam) in &dec.elements {
        let min_eig = eigh(lam)?
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(-min_eig);
        sum = sum.add(lam)?;
    }
    let min_fail = eigh(&dec.failure)?
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    worst = worst.max(-min_fail);
    sum = sum.add(&dec.failure)?;
    worst = worst.max(sum.sub(&HermitianOperator::identity(dim))?.max_abs_entry());
    Ok(worst)
}

/// Exact decoding error `Σ_x P(x) Tr[(𝟙 − Λ^{x;g(x)}) φ^x]` for one hash.
pub fn srm_code_error(
    probs: &[f64],
    blocks: &[DensityOperator],
    family: &HashFamily,
    seed: u64,
) -> Result<f64> {
    validate_inputs(probs, blocks)?;
    let mut success = 0.0;
    for c in 0..(1u64 << family.output_bits) {
        let dec = srm_decoder(probs, blocks, family, seed, c, None)?;
        for (x, lam) in &dec.elements {
            success += probs[*x as usize] * re_trace_prod(lam, blocks[*x as usize].base());
        }
    }
    Ok((1.0 - success).clamp(0.0, 1.0))
}

/// Error averaged over the hash family: exhaustive when the seed space is
/// small, otherwise over `max_seeds` evenly spread seeds.
pub fn srm_family_average_error(
    probs: &[f64],
    blocks: &[DensityOperator],
    family: &HashFamily,
    max_seeds: u64,
) -> Result<f64> {
    let n = family.num_seeds();
    let seeds: Vec<u64> = if n <= max_seeds {
        (0..n).collect()
    } else {
        (0..max_seeds).map(|i| i * (n / max_seeds)).collect()
    };
    let mut total = 0.0;
    for &s in &seeds {
        total += srm_code_error(probs, blocks, family, s)?;
    }
    Ok(total / seeds.len() as f64)
}

/// Family-averaged error bound
/// `2·Tr[(𝟙 − P_XB)ψ] + 4·2^{−m}·Tr[P_XB (𝟙 ⊗ φ)]`.
pub fn srm_error_bound(probs: &[f64], blocks: &[DensityOperator], m: usize) -> Result<f64> {
    let projectors = clipping_projectors(probs, blocks, m)?;
    let phi = average_state(probs, blocks)?;
    let mut outside = 0.0;
    let mut inside = 0.0;
    for ((&p, b), proj) in probs.iter().zip(blocks).zip(&projectors) {
        outside += p * (1.0 - re_trace_prod(proj, b.base()));
        inside += re_trace_prod(proj, &phi);
    }
    Ok(2.0 * outside + 4.0 * 2f64.powi(-(m as i32)) * inside)
}
