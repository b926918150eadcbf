//! Maximization of rate objectives over input distributions.
//!
//! Objectives (mutual-information and entropy-difference expressions) are
//! optimized over the probability simplex with multistart projected gradient
//! ascent followed by a local pattern-search refinement. All randomness is
//! seeded, so results are reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Euclidean projection onto the probability simplex (sorting algorithm).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    let _ = rho;
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Result of a simplex maximization.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub point: Vec<f64>,
    pub value: f64,
}

const FD_STEP: f64 = 1e-6;

fn ascend<F>(f: &F, start: &[f64], max_iters: usize) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = start.len();
    let mut x = project_simplex(start);
    let mut fx = f(&x)?;
    for _ in 0..max_iters {
        // Forward-difference gradient in the ambient space; the projection
        // handles the simplex constraint.
        let mut g = vec![0.0; n];
        for i in 0..n {
            let mut xp = x.clone();
            xp[i] += FD_STEP;
            let xp = project_simplex(&xp);
            g[i] = (f(&xp)? - fx) / FD_STEP;
        }
        let gnorm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-9 {
            break;
        }
        let mut eta = 0.5;
        let mut improved = false;
        while eta > 1e-9 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(&xi, &gi)| xi + eta * gi).collect();
            let cand = project_simplex(&cand);
            let fc = f(&cand)?;
            if fc > fx + 1e-13 {
                x = cand;
                fx = fc;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(OptimizeResult { point: x, value: fx })
}

/// Local pattern search: coordinate exchanges at shrinking radii.
fn refine<F>(f: &F, start: &OptimizeResult) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = start.point.len();
    let mut best = start.clone();
    for &r in &[0.1f64, 0.03, 0.01, 0.003, 0.001, 0.0003] {
        let mut moved = true;
        while moved {
            moved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let mut cand = best.point.clone();
                    let shift = r.min(cand[j]);
                    if shift <= 0.0 {
                        continue;
                    }
                    cand[i] += shift;
                    cand[j] -= shift;
                    let fc = f(&cand)?;
                    if fc > best.value + 1e-12 {
                        best = OptimizeResult {
                            point: cand,
                            value: fc,
                        };
                        moved = true;
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Maximizes `f` over the probability simplex of the given dimension.
///
/// Starts from the uniform distribution, every vertex, and seeded random
/// interior points; the best ascent result is refined by pattern search.
pub fn maximize_over_simplex<F>(f: F, dim: usize, seed: u64) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if dim == 0 {
        return Err(Error::InvalidParameter("empty simplex".into()));
    }
    if dim == 1 {
        let value = f(&[1.0])?;
        return Ok(OptimizeResult {
            point: vec![1.0],
            value,
        });
    }
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / dim as f64; dim]];
    if dim <= 8 {
        for i in 0..dim {
            let mut v = vec![1e-3; dim];
            v[i] = 1.0;
            starts.push(project_simplex(&v));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    while starts.len() < 16 {
        // Dirichlet(1,...,1) via normalized exponentials.
        let mut v: Vec<f64> = (0..dim)
            .map(|_| -f64::ln(rng.gen_range(1e-12..1.0f64)))
            .collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        starts.push(v);
    }
    let mut best: Option<OptimizeResult> = None;
    for s in &starts {
        let r = ascend(&f, s, 200)?;
        if best.as_ref().map(|b| r.value > b.value).unwrap_or(true) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    refine(&f, &best)
}
