//! Entropic quantities of classical joint distributions: closed forms,
//! exact smoothing, and Neyman–Pearson hypothesis-testing quantities.

use crate::error::{Error, Result};
use crate::model::ClassicalJoint;

use super::{EntropyReport, Method};

/// Entries below this are treated as zero probability.
const MASS_TOL: f64 = 1e-14;

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) || eps.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "smoothing parameter {eps} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Shannon entropy of a nonnegative vector (zero entries contribute zero).
pub fn shannon(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > MASS_TOL)
        .map(|&x| -x * x.log2())
        .sum()
}

/// `H(X|Y)` of a classical joint distribution.
pub fn conditional_entropy_classical(j: &ClassicalJoint) -> f64 {
    let py = j.marginal_y();
    let mut h = 0.0;
    for y in 0..j.ny {
        if py[y] <= MASS_TOL {
            continue;
        }
        for x in 0..j.nx {
            let p = j.get(x, y);
            if p > MASS_TOL {
                h -= p * (p / py[y]).log2();
            }
        }
    }
    h
}

/// Conditional information variance `Var[−log P(X|Y)]`.
pub fn conditional_variance_classical(j: &ClassicalJoint) -> f64 {
    let py = j.marginal_y();
    let h = conditional_entropy_classical(j);
    let mut v = 0.0;
    for y in 0..j.ny {
        if py[y] <= MASS_TOL {
            continue;
        }
        for x in 0..j.nx {
            let p = j.get(x, y);
            if p > MASS_TOL {
                let i = -(p / py[y]).log2();
                v += p * (i - h) * (i - h);
            }
        }
    }
    v.max(0.0)
}

/// `H_min(X|Y) = −log₂ Σ_y max_x P(x,y)`.
pub fn min_entropy_closed_form(j: &ClassicalJoint) -> f64 {
    let s: f64 = (0..j.ny)
        .map(|y| (0..j.nx).map(|x| j.get(x, y)).fold(0.0, f64::max))
        .sum();
    -s.log2()
}

/// `H_max(X|Y) = log₂ Σ_y (Σ_x √P(x,y))²`.
pub fn max_entropy_closed_form(j: &ClassicalJoint) -> f64 {
    let s: f64 = (0..j.ny)
        .map(|y| {
            let t: f64 = (0..j.nx).map(|x| j.get(x, y).max(0.0).sqrt()).sum();
            t * t
        })
        .sum();
    s.log2()
}

/// Smooth min-entropy `H_min^ε(X|Y)` over subnormalized distributions within
/// generalized trace distance ε of the joint.
///
/// The optimum removes mass only from column maxima; the resulting budget
/// allocation is solved exactly by consuming per-column reduction segments in
/// order of marginal cost. Returns `+∞` when the budget can flatten every
/// column to zero.
pub fn smooth_min_entropy_classical(j: &ClassicalJoint, eps: f64) -> Result<EntropyReport> {
    check_eps(eps)?;
    let mut budget = 2.0 * eps;
    // Per column y: sorted values v₁ ≥ ... ≥ v_k ≥ 0. Lowering the running
    // maximum through [v_{k+1}, v_k] costs k units of removed mass per unit of
    // objective reduction.
    let mut segments: Vec<(usize, f64)> = Vec::new();
    let mut m: f64 = 0.0;
    for y in 0..j.ny {
        let mut col: Vec<f64> = (0..j.nx).map(|x| j.get(x, y).max(0.0)).collect();
        col.sort_by(|a, b| b.partial_cmp(a).unwrap());
        m += col[0];
        for k in 1..=j.nx {
            let next = if k < j.nx { col[k] } else { 0.0 };
            let len = col[k - 1] - next;
            if len > 0.0 {
                segments.push((k, len));
            }
        }
    }
    segments.sort_by_key(|&(k, _)| k);
    for (k, len) in segments {
        if budget <= 0.0 {
            break;
        }
        let cost = k as f64 * len;
        if budget >= cost {
            m -= len;
            budget -= cost;
        } else {
            m -= budget / k as f64;
            budget = 0.0;
        }
    }
    let value = if m <= MASS_TOL { f64::INFINITY } else { -m.log2() };
    Ok(EntropyReport {
        value,
        method: Method::SmoothingLp,
    })
}

/// Smooth max-entropy `H_max^ε(X|Y)`: minimized over normalized distributions
/// within total-variation distance ε, by projected gradient descent from
/// several deterministic starts.
pub fn smooth_max_entropy_classical(j: &ClassicalJoint, eps: f64) -> Result<EntropyReport> {
    check_eps(eps)?;
    let p: Vec<f64> = j.entries().to_vec();
    let objective = |q: &[f64]| -> f64 {
        (0..j.ny)
            .map(|y| {
                let s: f64 = (0..j.nx).map(|x| q[x * j.ny + y].max(0.0).sqrt()).sum();
                s * s
            })
            .sum()
    };
    let project = |q: &[f64]| -> Vec<f64> {
        let mut q = crate::optimizer::project_simplex(q);
        let dist: f64 = 0.5 * q.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>();
        if dist > eps {
            let t = eps / dist;
            for (qi, &pi) in q.iter_mut().zip(&p) {
                *qi = pi + t * (*qi - pi);
            }
        }
        q
    };

    // Heuristic start: shift ε of mass from the smallest positive atoms (whose
    // square roots dominate the objective) onto the largest atom.
    let concentrate = {
        let mut q = p.clone();
        let mut order: Vec<usize> = (0..q.len()).filter(|&i| p[i] > MASS_TOL).collect();
        order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap());
        let top = *order.last().unwrap_or(&0);
        let mut remaining = eps;
        for &i in &order {
            if i == top || remaining <= 0.0 {
                continue;
            }
            let take = q[i].min(remaining);
            q[i] -= take;
            q[top] += take;
            remaining -= take;
        }
        q
    };

    let mut best = f64::INFINITY;
    let mut best_q = p.clone();
    for start in [p.clone(), concentrate] {
        let mut q = project(&start);
        let mut fq = objective(&q);
        if fq < best {
            best = fq;
            best_q = q.clone();
        }
        for _ in 0..300 {
            let col: Vec<f64> = (0..j.ny)
                .map(|y| (0..j.nx).map(|x| q[x * j.ny + y].max(0.0).sqrt()).sum())
                .collect();
            let g: Vec<f64> = (0..q.len())
                .map(|i| col[i % j.ny] / q[i].max(1e-10).sqrt())
                .collect();
            let gmax = g.iter().cloned().fold(0.0, f64::max).max(1e-12);
            let mut eta = 0.25;
            let mut improved = false;
            while eta > 1e-10 {
                let cand: Vec<f64> = q
                    .iter()
                    .zip(&g)
                    .map(|(&qi, &gi)| qi - eta * gi / gmax)
                    .collect();
                let cand = project(&cand);
                let fc = objective(&cand);
                if fc < fq - 1e-13 {
                    q = cand;
                    fq = fc;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if fq < best {
            best = fq;
            best_q = q;
        }
    }
    // Pattern-search polish: pairwise mass transfers at shrinking radii,
    // re-projected into the feasible set. Rescues descent stalls caused by
    // the crude ball projection.
    if best_q.len() <= 64 {
        let n = best_q.len();
        let radii = [
            2.0 * eps,
            eps,
            0.5 * eps,
            0.05,
            0.02,
            0.008,
            0.003,
            0.001,
        ];
        for &r in radii.iter().filter(|&&r| r > 0.0) {
            let mut moved = true;
            while moved {
                moved = false;
                for i in 0..n {
                    for k in 0..n {
                        if i == k || best_q[k] <= 0.0 {
                            continue;
                        }
                        let mut cand = best_q.clone();
                        let shift = r.min(cand[k]);
                        cand[k] -= shift;
                        cand[i] += shift;
                        let cand = project(&cand);
                        let fc = objective(&cand);
                        if fc < best - 1e-12 {
                            best = fc;
                            best_q = cand;
                            moved = true;
                        }
                    }
                }
            }
        }
    }
    Ok(EntropyReport {
        value: best.max(MASS_TOL).log2(),
        method: Method::ProjectedGradient,
    })
}

/// Hypothesis-testing divergence `D_h^ε(p‖w) = −log₂ β`, where `β` minimizes
/// `Σ_i w_i t_i` over tests `0 ≤ t ≤ 1` with `Σ_i p_i t_i ≥ 1 − ε`.
///
/// The optimal test is the Neyman–Pearson likelihood-ratio threshold test
/// with at most one fractional atom. Returns `+∞` when `β = 0`.
pub fn hypothesis_testing_divergence(p: &[f64], w: &[f64], eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if p.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "distribution lengths {} vs {}",
            p.len(),
            w.len()
        )));
    }
    if p.iter().any(|&v| v < 0.0) || w.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidDistribution("negative entry".into()));
    }
    let psum: f64 = p.iter().sum();
    if (psum - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDistribution(format!(
            "null hypothesis sums to {psum}"
        )));
    }
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > MASS_TOL).collect();
    // Descending likelihood ratio p/w; atoms with w = 0 come first.
    order.sort_by(|&a, &b| {
        let ra = if w[a] <= MASS_TOL { f64::INFINITY } else { p[a] / w[a] };
        let rb = if w[b] <= MASS_TOL { f64::INFINITY } else { p[b] / w[b] };
        rb.partial_cmp(&ra).unwrap()
    });
    let mut need = 1.0 - eps;
    let mut beta = 0.0;
    for &i in &order {
        if need <= 1e-15 {
            break;
        }
        if p[i] <= need {
            beta += w[i];
            need -= p[i];
        } else {
            beta += w[i] * need / p[i];
            need = 0.0;
        }
    }
    if beta <= MASS_TOL {
        Ok(f64::INFINITY)
    } else {
        Ok(-beta.log2())
    }
}

/// Hypothesis-testing conditional entropy
/// `H_h^ε(X|Y) = −D_h^ε(P_{XY} ‖ 𝟙_X ⊗ P_Y)`.
pub fn hypothesis_testing_entropy_classical(j: &ClassicalJoint, eps: f64) -> Result<EntropyReport> {
    let py = j.marginal_y();
    let mut p = Vec::with_capacity(j.nx * j.ny);
    let mut w = Vec::with_capacity(j.nx * j.ny);
    for x in 0..j.nx {
        for y in 0..j.ny {
            p.push(j.get(x, y));
            w.push(py[y]);
        }
    }
    let d = hypothesis_testing_divergence(&p, &w, eps)?;
    Ok(EntropyReport {
        value: -d,
        method: Method::NeymanPearson,
    })
}
