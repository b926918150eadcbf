//! Binary linear 2-universal hash families over GF(2), with exact collision
//! statistics and coset enumeration for linear encoders.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest seed space we will enumerate exhaustively.
pub const MAX_ENUMERABLE_SEEDS: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// Seeds are full `r × b` GF(2) matrices: `2^{rb}` seeds.
    FullMatrix,
    /// Toeplitz matrices: `2^{b+r−1}` seeds, constant along diagonals.
    Toeplitz,
}

/// A family of linear hash functions `{0,1}^b → {0,1}^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HashFamily {
    pub input_bits: usize,
    pub output_bits: usize,
    pub kind: FamilyKind,
}

impl HashFamily {
    pub fn new(kind: FamilyKind, input_bits: usize, output_bits: usize) -> Result<Self> {
        if input_bits == 0 || input_bits > 20 {
            return Err(Error::InvalidParameter(format!(
                "input_bits {input_bits} outside 1..=20"
            )));
        }
        if output_bits > input_bits {
            return Err(Error::InvalidParameter(format!(
                "output_bits {output_bits} exceeds input_bits {input_bits}"
            )));
        }
        let f = Self {
            input_bits,
            output_bits,
            kind,
        };
        if f.seed_bits() > 63 {
            return Err(Error::SizeLimit(format!(
                "seed space of 2^{} is unrepresentable",
                f.seed_bits()
            )));
        }
        Ok(f)
    }

    pub fn seed_bits(&self) -> usize {
        match self.kind {
            FamilyKind::FullMatrix => self.input_bits * self.output_bits,
            FamilyKind::Toeplitz => self.input_bits + self.output_bits.max(1) - 1,
        }
    }

    pub fn num_seeds(&self) -> u64 {
        1u64 << self.seed_bits()
    }

    pub fn is_enumerable(&self) -> bool {
        self.num_seeds() <= MAX_ENUMERABLE_SEEDS
    }

    /// Matrix rows for a seed; row `i` is a `b`-bit mask.
    pub fn rows(&self, seed: u64) -> Vec<u64> {
        let b = self.input_bits;
        let r = self.output_bits;
        match self.kind {
            FamilyKind::FullMatrix => (0..r)
                .map(|i| (seed >> (i * b)) & ((1u64 << b) - 1))
                .collect(),
            FamilyKind::Toeplitz => (0..r)
                .map(|i| {
                    // M[i][j] = s_{i + b − 1 − j}: constant on diagonals.
                    let mut row = 0u64;
                    for j in 0..b {
                        if seed >> (i + b - 1 - j) & 1 == 1 {
                            row |= 1 << j;
                        }
                    }
                    row
                })
                .collect(),
        }
    }

    /// `f_γ(x)`: output bit `i` is the parity of `row_i & x`.
    pub fn hash(&self, seed: u64, x: u64) -> u64 {
        let mut out = 0u64;
        for (i, row) in self.rows(seed).iter().enumerate() {
            out |= (((row & x).count_ones() as u64) & 1) << i;
        }
        out
    }

    pub fn sample_seed<R: Rng>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.num_seeds())
    }

    /// Exact collision probability `Pr_Γ[f_Γ(x) = f_Γ(x′)]` for a difference
    /// `d = x ⊕ x′ ≠ 0`. Linearity makes the probability a function of `d`
    /// alone, so it is computed as `Pr_Γ[f_Γ(d) = 0]`.
    pub fn collision_probability(&self, d: u64) -> Result<f64> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "collision probability needs distinct inputs".into(),
            ));
        }
        if self.output_bits == 0 {
            return Ok(1.0);
        }
        match self.kind {
            // Rows are independent uniform masks: each output bit of f(d)
            // vanishes with probability exactly ½.
            FamilyKind::FullMatrix => Ok(2f64.powi(-(self.output_bits as i32))),
            FamilyKind::Toeplitz => {
                if !self.is_enumerable() {
                    return Err(Error::SizeLimit(
                        "seed space too large to enumerate".into(),
                    ));
                }
                let hits = (0..self.num_seeds())
                    .filter(|&s| self.hash(s, d) == 0)
                    .count();
                Ok(hits as f64 / self.num_seeds() as f64)
            }
        }
    }
}

/// Solutions of `G u = c` over GF(2) for the matrix given by `rows` (each row
/// a `u_bits`-bit mask), in ascending (lexicographic) order. Empty when the
/// system is inconsistent.
pub fn coset_members(rows: &[u64], u_bits: usize, c: u64) -> Vec<u64> {
    // Gaussian elimination on the augmented system.
    let mut aug: Vec<u64> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| r | ((c >> i & 1) << u_bits))
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..u_bits {
        if let Some(p) = (rank..aug.len()).find(|&i| aug[i] >> col & 1 == 1) {
            aug.swap(rank, p);
            for i in 0..aug.len() {
                if i != rank && aug[i] >> col & 1 == 1 {
                    aug[i] ^= aug[rank];
                }
            }
            pivots.push(col);
            rank += 1;
        }
    }
    // Inconsistent system: a zero row with nonzero augmented bit.
    for row in &aug[rank..] {
        if row >> u_bits & 1 == 1 {
            return Vec::new();
        }
    }
    let free: Vec<usize> = (0..u_bits).filter(|c| !pivots.contains(c)).collect();
    let mut particular = 0u64;
    for (i, &col) in pivots.iter().enumerate() {
        if aug[i] >> u_bits & 1 == 1 {
            particular |= 1 << col;
        }
    }
    let mut basis = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut v = 1u64 << fc;
        for (i, &col) in pivots.iter().enumerate() {
            if aug[i] >> fc & 1 == 1 {
                v |= 1 << col;
            }
        }
        basis.push(v);
    }
    let mut members: Vec<u64> = (0..(1u64 << basis.len()))
        .map(|mask| {
            let mut u = particular;
            for (i, &b) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    u ^= b;
                }
            }
            u
        })
        .collect();
    members.sort_unstable();
    members
}

/// GF(2) rank of a row set.
pub fn gf2_rank(rows: &[u64]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for col in 0..64 {
        if let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> col & 1 == 1) {
            rows.swap(rank, p);
            for i in 0..rows.len() {
                if i != rank && rows[i] >> col & 1 == 1 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}
