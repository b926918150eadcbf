//! Compound source coding with side information: one linear syndrome encoder
//! `g : {0,1}^{u_bits} → {0,1}^m` serving several maximum-likelihood decoders
//! at once, one per side-information channel.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::entropies::smooth_max_entropy_classical;
use crate::error::{Error, Result};
use crate::model::{ClassicalJoint, MAX_CLASSICAL_SIZE};
use crate::protocol::hash::{coset_members, gf2_rank, FamilyKind, HashFamily};

/// A measured probability with its Monte Carlo half-width (zero when exact).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalStat {
    pub value: f64,
    pub three_sigma: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Auto,
    Exact,
    MonteCarlo(usize),
}

pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct CompoundSourceCode {
    pub u_bits: usize,
    /// Syndrome length; the syndrome alphabet is `{0,1}^m`.
    pub m: usize,
    /// Rows of `g` as bit masks; always full rank.
    pub rows: Vec<u64>,
    /// Coset `g⁻¹(c)` per syndrome, ascending.
    pub cosets: Vec<Vec<u64>>,
    /// Source law on `{0,1}^{u_bits}`.
    pub prior: Vec<f64>,
    /// Per-decoder likelihood rows `P(y|u)`.
    pub side: Vec<Vec<Vec<f64>>>,
}

/// Draw full-rank encoder rows from the full-matrix family, deterministically
/// from `seed`.
pub fn sample_encoder_rows(u_bits: usize, m: usize, seed: u64) -> Result<Vec<u64>> {
    if m > u_bits {
        return Err(Error::InvalidParameter(format!(
            "syndrome length {m} exceeds source length {u_bits}"
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    // The packed full-matrix seed only fits in a word for m·u_bits ≤ 63;
    // larger matrices are drawn row by row, which is the same distribution.
    let family = if m * u_bits <= 63 {
        Some(HashFamily::new(FamilyKind::FullMatrix, u_bits, m)?)
    } else {
        None
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let rows = match &family {
            Some(f) => f.rows(f.sample_seed(&mut rng)),
            None => (0..m).map(|_| rng.gen_range(0..1u64 << u_bits)).collect(),
        };
        if gf2_rank(&rows) == m {
            return Ok(rows);
        }
    }
    Err(Error::NonConvergence {
        iterations: 10_000,
        lower: 0.0,
        upper: 0.0,
    })
}

/// Syndrome length needed for the target smoothing budget:
/// `⌈max_i H_max^{ε₁}(U|Y_i) − 2log₂ ε₂ + 2log₂(k+1)⌉ + 3`.
///
/// Returns the raw requirement (possibly larger than `u_bits`; callers clamp)
/// together with the per-decoder smooth max-entropies.
pub fn plan_syndrome_bits(
    prior: &[f64],
    side: &[Vec<Vec<f64>>],
    eps1: f64,
    eps2: f64,
) -> Result<(usize, Vec<f64>)> {
    if side.is_empty() {
        return Err(Error::InvalidParameter("no decoders".into()));
    }
    let k = side.len();
    let mut hmaxes = Vec::with_capacity(k);
    for rows in side {
        let joint = joint_from_prior_side(prior, rows)?;
        hmaxes.push(smooth_max_entropy_classical(&joint, eps1)?.value);
    }
    let worst = hmaxes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw = worst - 2.0 * eps2.log2() + 2.0 * ((k + 1) as f64).log2();
    Ok((raw.ceil().max(0.0) as usize + 3, hmaxes))
}

pub fn joint_from_prior_side(prior: &[f64], rows: &[Vec<f64>]) -> Result<ClassicalJoint> {
    if rows.len() != prior.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} likelihood rows for {} source symbols",
            rows.len(),
            prior.len()
        )));
    }
    let ny = rows[0].len();
    let mut p = Vec::with_capacity(prior.len() * ny);
    for (pu, row) in prior.iter().zip(rows) {
        if row.len() != ny {
            return Err(Error::DimensionMismatch("ragged likelihood rows".into()));
        }
        p.extend(row.iter().map(|&w| pu * w));
    }
    ClassicalJoint::new(prior.len(), ny, p)
}

pub fn build_compound_source_code(
    prior: Vec<f64>,
    side: Vec<Vec<Vec<f64>>>,
    m: usize,
    seed: u64,
) -> Result<CompoundSourceCode> {
    let nu = prior.len();
    if nu == 0 || nu & (nu - 1) != 0 {
        return Err(Error::InvalidDistribution(format!(
            "source alphabet size {nu} is not a power of two"
        )));
    }
    let u_bits = nu.trailing_zeros() as usize;
    let total: f64 = prior.iter().sum();
    if prior.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDistribution(format!(
            "source law sums to {total}"
        )));
    }
    if side.is_empty() {
        return Err(Error::InvalidParameter("no decoders".into()));
    }
    for rows in &side {
        if rows.len() != nu {
            return Err(Error::DimensionMismatch(format!(
                "{} likelihood rows for {nu} source symbols",
                rows.len()
            )));
        }
    }
    let rows = sample_encoder_rows(u_bits, m, seed)?;
    let cosets: Vec<Vec<u64>> = (0..(1u64 << m))
        .map(|c| coset_members(&rows, u_bits, c))
        .collect();
    // Full rank guarantees |g⁻¹(c)| = 2^{u_bits − m} for every syndrome.
    debug_assert!(cosets.iter().all(|cs| cs.len() == 1 << (u_bits - m)));
    Ok(CompoundSourceCode {
        u_bits,
        m,
        rows,
        cosets,
        prior,
        side,
    })
}

impl CompoundSourceCode {
    pub fn num_decoders(&self) -> usize {
        self.side.len()
    }

    pub fn encode(&self, u: u64) -> u64 {
        let mut c = 0u64;
        for (i, &row) in self.rows.iter().enumerate() {
            c |= (((row & u).count_ones() as u64) & 1) << i;
        }
        c
    }

    /// `h_i(y, c) = argmax_{u : g(u) = c} P(u)·P(y|u)`, smallest `u` on ties.
    pub fn decode(&self, decoder: usize, y: usize, c: u64) -> u64 {
        let rows = &self.side[decoder];
        let mut best = self.cosets[c as usize][0];
        let mut best_score = -1.0;
        for &u in &self.cosets[c as usize] {
            let score = self.prior[u as usize] * rows[u as usize][y];
            if score > best_score {
                best_score = score;
                best = u;
            }
        }
        best
    }

    pub fn preimage_balance_ok(&self) -> bool {
        let expect = 1usize << (self.u_bits - self.m);
        self.cosets.iter().all(|c| c.len() == expect)
    }

    /// Decoding error `Pr[h_i(Y, g(U)) ≠ U]`; exact enumeration when the
    /// `(u, y)` state space fits the classical size limit, Monte Carlo with a
    /// 3σ half-width otherwise.
    pub fn error_probability(&self, decoder: usize, mode: EvalMode, seed: u64) -> Result<EvalStat> {
        let rows = &self.side[decoder];
        let ny = rows[0].len();
        let exact_feasible = (1usize << self.u_bits).saturating_mul(ny) <= MAX_CLASSICAL_SIZE;
        let exact = match mode {
            EvalMode::Exact => {
                if !exact_feasible {
                    return Err(Error::SizeLimit(format!(
                        "exact evaluation over 2^{} × {ny} states",
                        self.u_bits
                    )));
                }
                true
            }
            EvalMode::MonteCarlo(_) => false,
            EvalMode::Auto => exact_feasible,
        };
        if exact {
            let mut err = 0.0;
            for c in 0..(1u64 << self.m) {
                for y in 0..ny {
                    let dec = self.decode(decoder, y, c);
                    for &u in &self.cosets[c as usize] {
                        if u != dec {
                            err += self.prior[u as usize] * rows[u as usize][y];
                        }
                    }
                }
            }
            return Ok(EvalStat {
                value: err,
                three_sigma: 0.0,
                exact: true,
            });
        }
        let trials = match mode {
            EvalMode::MonteCarlo(t) => t,
            _ => DEFAULT_TRIALS,
        };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut errors = 0usize;
        for _ in 0..trials {
            let u = sample_index(&self.prior, &mut rng) as u64;
            let y = sample_index(&rows[u as usize], &mut rng);
            if self.decode(decoder, y, self.encode(u)) != u {
                errors += 1;
            }
        }
        let p = errors as f64 / trials as f64;
        Ok(EvalStat {
            value: p,
            three_sigma: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
            exact: false,
        })
    }

    pub fn worst_error(&self, mode: EvalMode, seed: u64) -> Result<EvalStat> {
        let mut worst = EvalStat {
            value: -1.0,
            three_sigma: 0.0,
            exact: true,
        };
        for i in 0..self.num_decoders() {
            let stat = self.error_probability(i, mode, seed.wrapping_add(i as u64))?;
            if stat.value > worst.value {
                worst = stat;
            }
        }
        Ok(worst)
    }
}

pub(crate) fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let mut t = rng.gen::<f64>();
    for (i, &w) in weights.iter().enumerate() {
        t -= w;
        if t <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Rows `P(y|u)` for `u_bits` parallel binary symmetric channels with flip
/// probability `flip`, acting on the bit representation of `u`.
pub fn bsc_side_rows(u_bits: usize, flip: f64) -> Vec<Vec<f64>> {
    let n = 1usize << u_bits;
    (0..n)
        .map(|u| {
            (0..n)
                .map(|y| {
                    let d = ((u ^ y) as u64).count_ones() as i32;
                    flip.powi(d) * (1.0 - flip).powi(u_bits as i32 - d)
                })
                .collect()
        })
        .collect()
}
