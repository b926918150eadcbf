//! Min- and max-entropy of classical-quantum states with genuinely quantum
//! conditioning systems.
//!
//! The min-entropy reduces to an optimal state-discrimination problem solved
//! by a damped fixed-point iteration over POVMs; the max-entropy is a concave
//! fidelity maximization over the conditioning state, solved by projected
//! gradient ascent.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, CMatrix, DensityOperator, HermitianOperator};

use super::{EntropyReport, Method};

const PROB_TOL: f64 = 1e-14;
const DISCRIMINATION_TOL: f64 = 1e-10;
const MAX_DISCRIMINATION_ITERS: usize = 100_000;

fn symmetrize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).map(|z| z * 0.5)
}

fn re_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Optimal guessing probability `max_POVM Σ_x p_x Tr[ρ^x M_x]` by the damped
/// fixed-point iteration
/// `M_x ← G^{-1/2} W_x M_x W_x G^{-1/2}`, `G = Σ_y W_y M_y W_y`, `W_x = p_x ρ^x`.
pub fn guessing_probability(probs: &[f64], blocks: &[DensityOperator]) -> Result<f64> {
    if probs.len() != blocks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities vs {} states",
            probs.len(),
            blocks.len()
        )));
    }
    let dim = blocks[0].dim();
    let active: Vec<usize> = (0..probs.len()).filter(|&x| probs[x] > PROB_TOL).collect();
    if active.len() <= 1 {
        return Ok(1.0);
    }
    let w: Vec<CMatrix> = active
        .iter()
        .map(|&x| blocks[x].base().entries().map(|z| z * probs[x]))
        .collect();
    let n = active.len();
    let eye = CMatrix::identity(dim, dim);
    let mut povm: Vec<CMatrix> = vec![eye.map(|z| z / n as f64); n];
    let mut prev = -1.0f64;
    for _ in 0..MAX_DISCRIMINATION_ITERS {
        let pg: f64 = w.iter().zip(&povm).map(|(wi, mi)| re_trace_product(wi, mi)).sum();
        if (pg - prev).abs() <= DISCRIMINATION_TOL {
            return Ok(pg.clamp(0.0, 1.0));
        }
        prev = pg;
        let mut g = CMatrix::zeros(dim, dim);
        for (wi, mi) in w.iter().zip(&povm) {
            g += wi * mi * wi;
        }
        let gh = HermitianOperator::new(symmetrize(g))?;
        let gm = matrix::pinv_sqrtm(&gh)?.entries().clone();
        let mut next: Vec<CMatrix> = w
            .iter()
            .zip(&povm)
            .map(|(wi, mi)| symmetrize(&gm * wi * mi * wi * &gm))
            .collect();
        // Complete to a resolution of the identity (the raw update only spans
        // the support of G) and damp for stability.
        let mut s = CMatrix::zeros(dim, dim);
        for m in &next {
            s += m;
        }
        let r = (&eye - s).map(|z| z / n as f64);
        for m in next.iter_mut() {
            *m += &r;
        }
        for (mi, ni) in povm.iter_mut().zip(&next) {
            *mi = mi.map(|z| z * 0.5) + ni.map(|z| z * 0.5);
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_DISCRIMINATION_ITERS,
        lower: prev,
        upper: 1.0,
    })
}

/// `H_min(X|B) = −log₂ p_guess` for a cq state given by `(probs, blocks)`.
pub fn min_entropy_quantum(probs: &[f64], blocks: &[DensityOperator]) -> Result<EntropyReport> {
    let pg = guessing_probability(probs, blocks)?;
    Ok(EntropyReport {
        value: -pg.log2(),
        method: Method::IterativeDiscrimination,
    })
}

fn simplex_threshold(sorted_desc: &[f64]) -> f64 {
    let mut css = 0.0;
    let mut theta = sorted_desc[0] - 1.0;
    for (i, &v) in sorted_desc.iter().enumerate() {
        css += v;
        let t = (css - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    theta
}

/// Nearest density operator: project the spectrum onto the simplex.
pub fn project_to_density(h: &HermitianOperator) -> Result<DensityOperator> {
    let d = matrix::eigh(h)?;
    let theta = simplex_threshold(&d.eigenvalues);
    let base = d.apply(|ev| (ev - theta).max(0.0));
    DensityOperator::new(base, true)
}

fn fidelity_objective(probs: &[f64], blocks: &[DensityOperator], sigma: &HermitianOperator) -> Result<f64> {
    let mut acc = 0.0;
    for (p, b) in probs.iter().zip(blocks) {
        if *p <= PROB_TOL {
            continue;
        }
        let f = matrix::fidelity_with_psd(b.base(), sigma)?.max(0.0);
        acc += (p * f).sqrt();
    }
    Ok(acc)
}

/// `H_max(X|B) = 2 log₂ max_σ Σ_x √(p_x F(ρ^x, σ))`, maximized over density
/// operators σ by projected gradient ascent. The objective is concave in σ,
/// so ascent from any interior start converges to the global maximum.
pub fn max_entropy_quantum(probs: &[f64], blocks: &[DensityOperator]) -> Result<EntropyReport> {
    let dim = blocks[0].dim();
    // Average state and the maximally mixed state as starts.
    let mut avg = HermitianOperator::zeros(dim);
    for (p, b) in probs.iter().zip(blocks) {
        avg = avg.add(&b.base().scale(*p))?;
    }
    let starts = vec![
        project_to_density(&avg)?,
        DensityOperator::maximally_mixed(dim),
    ];
    let fd = 1e-5;
    let mut best = f64::NEG_INFINITY;
    for start in starts {
        let mut sigma = start;
        let mut fs = fidelity_objective(probs, blocks, sigma.base())?;
        for _ in 0..300 {
            // Finite-difference gradient over a Hermitian basis.
            let mut grad = CMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in i..dim {
                    let mut dir_re = CMatrix::zeros(dim, dim);
                    dir_re[(i, j)] = Complex64::new(1.0, 0.0);
                    dir_re[(j, i)] = Complex64::new(1.0, 0.0);
                    if i == j {
                        dir_re[(i, i)] = Complex64::new(1.0, 0.0);
                    }
                    let d_re = directional_derivative(probs, blocks, sigma.base(), &dir_re, fd)?;
                    if i == j {
                        grad[(i, i)] = Complex64::new(d_re, 0.0);
                    } else {
                        let mut dir_im = CMatrix::zeros(dim, dim);
                        dir_im[(i, j)] = Complex64::new(0.0, 1.0);
                        dir_im[(j, i)] = Complex64::new(0.0, -1.0);
                        let d_im = directional_derivative(probs, blocks, sigma.base(), &dir_im, fd)?;
                        grad[(i, j)] = Complex64::new(d_re / 2.0, d_im / 2.0);
                        grad[(j, i)] = grad[(i, j)].conj();
                    }
                }
            }
            let gnorm = grad.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if gnorm < 1e-12 {
                break;
            }
            let mut eta = 1.0;
            let mut improved = false;
            while eta > 1e-9 {
                let step = sigma.base().entries() + grad.map(|z| z * (eta / gnorm));
                let cand = project_to_density(&HermitianOperator::new(symmetrize(step))?)?;
                let fc = fidelity_objective(probs, blocks, cand.base())?;
                if fc > fs + 1e-12 {
                    sigma = cand;
                    fs = fc;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.max(fs);
    }
    Ok(EntropyReport {
        value: 2.0 * best.max(1e-300).log2(),
        method: Method::ProjectedGradient,
    })
}

fn directional_derivative(
    probs: &[f64],
    blocks: &[DensityOperator],
    sigma: &HermitianOperator,
    dir: &CMatrix,
    h: f64,
) -> Result<f64> {
    let plus = HermitianOperator::new(sigma.entries() + dir.map(|z| z * h))?;
    let minus = HermitianOperator::new(sigma.entries() - dir.map(|z| z * h))?;
    let fp = fidelity_objective(probs, blocks, &plus)?;
    let fm = fidelity_objective(probs, blocks, &minus)?;
    Ok((fp - fm) / (2.0 * h))
}
