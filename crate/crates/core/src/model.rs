//! Broadcast channels, input distributions, induced classical-quantum states
//! and monotone access structures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, DensityOperator, HermitianOperator};

/// Tolerance for probability normalization checks.
pub const PROB_TOL: f64 = 1e-10;
/// Tolerance below which a channel output counts as diagonal (classical).
pub const DIAG_TOL: f64 = 1e-10;
/// Hard cap on any quantum operator dimension handled by this crate.
pub const MAX_QUANTUM_DIM: usize = 64;
/// Cap on classical alphabet sizes produced by product extensions.
pub const MAX_CLASSICAL_SIZE: usize = 1 << 20;

/// A subset of the users `[1:L]`, stored as a bitmask (user `l` ↦ bit `l-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserSet(pub u32);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn from_users(users: &[usize]) -> Self {
        let mut m = 0u32;
        for &u in users {
            assert!(u >= 1 && u <= 32, "user index out of range");
            m |= 1 << (u - 1);
        }
        UserSet(m)
    }

    pub fn full(num_users: usize) -> Self {
        UserSet(((1u64 << num_users) - 1) as u32)
    }

    pub fn contains_user(&self, user: usize) -> bool {
        self.0 & (1 << (user - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &UserSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// 1-indexed users, ascending.
    pub fn users(&self) -> Vec<usize> {
        (1..=32).filter(|&u| self.contains_user(u)).collect()
    }
}

impl fmt::Display for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, u) in self.users().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "}}")
    }
}

/// A probability vector over the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidDistribution("negative entry".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "sums to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A monotone access structure given by its minimal authorized sets.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessStructure {
    num_users: usize,
    minimal_authorized: Vec<UserSet>,
}

impl AccessStructure {
    /// Validates the antichain property and non-emptiness. The full family 𝔸
    /// is the upward closure of the minimal sets, so monotonicity holds by
    /// construction.
    pub fn new(num_users: usize, minimal_authorized: Vec<UserSet>) -> Result<Self> {
        if num_users == 0 || num_users > 16 {
            return Err(Error::InvalidAccessStructure(format!(
                "num_users {num_users} outside supported range 1..=16"
            )));
        }
        if minimal_authorized.is_empty() {
            return Err(Error::InvalidAccessStructure(
                "empty access structure rejected".into(),
            ));
        }
        let full = UserSet::full(num_users);
        for s in &minimal_authorized {
            if s.is_empty() {
                return Err(Error::InvalidAccessStructure(
                    "empty set cannot be authorized".into(),
                ));
            }
            if !s.is_subset_of(&full) {
                return Err(Error::InvalidAccessStructure(format!(
                    "set {s} references users beyond L={num_users}"
                )));
            }
        }
        for (i, a) in minimal_authorized.iter().enumerate() {
            for (j, b) in minimal_authorized.iter().enumerate() {
                if i != j && a.is_subset_of(b) {
                    return Err(Error::InvalidAccessStructure(format!(
                        "minimal sets must form an antichain; {a} ⊆ {b}"
                    )));
                }
            }
        }
        let mut minimal_authorized = minimal_authorized;
        minimal_authorized.sort();
        minimal_authorized.dedup();
        Ok(Self {
            num_users,
            minimal_authorized,
        })
    }

    /// All-user structure 𝔸 = {[1:L]}.
    pub fn all_users(num_users: usize) -> Self {
        Self::new(num_users, vec![UserSet::full(num_users)]).expect("full set is valid")
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn minimal_authorized(&self) -> &[UserSet] {
        &self.minimal_authorized
    }

    pub fn is_authorized(&self, set: &UserSet) -> bool {
        self.minimal_authorized.iter().any(|m| m.is_subset_of(set))
    }

    /// 𝔸: the upward closure of the minimal authorized sets.
    pub fn authorized_sets(&self) -> Vec<UserSet> {
        (0..(1u32 << self.num_users))
            .map(UserSet)
            .filter(|s| self.is_authorized(s))
            .collect()
    }

    /// 𝔹 = 2^{[1:L]} \ 𝔸; always contains the empty set.
    pub fn unauthorized_sets(&self) -> Vec<UserSet> {
        (0..(1u32 << self.num_users))
            .map(UserSet)
            .filter(|s| !self.is_authorized(s))
            .collect()
    }

    /// True when 𝔸 is exactly `{[1:L]}`.
    pub fn is_all_user(&self) -> bool {
        self.minimal_authorized.len() == 1
            && self.minimal_authorized[0] == UserSet::full(self.num_users)
    }
}

/// A classical joint distribution over a pair of finite alphabets, row-major
/// in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalJoint {
    pub nx: usize,
    pub ny: usize,
    p: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(nx: usize, ny: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "joint table has {} entries, expected {}",
                p.len(),
                nx * ny
            )));
        }
        if p.iter().any(|&v| v < -PROB_TOL) {
            return Err(Error::InvalidDistribution("negative joint entry".into()));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDistribution(format!(
                "joint sums to {sum}, expected 1"
            )));
        }
        let p = p.iter().map(|&v| v.max(0.0)).collect();
        Ok(Self { nx, ny, p })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|x| (0..self.ny).map(|y| self.get(x, y)).sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ny)
            .map(|y| (0..self.nx).map(|x| self.get(x, y)).sum())
            .collect()
    }
}

/// Channel outputs: a joint transition table for classical channels, explicit
/// density operators otherwise.
#[derive(Debug, Clone)]
enum ChannelOutputs {
    /// `rows[x][y]` over the product output alphabet.
    Classical(Vec<Vec<f64>>),
    Quantum(Vec<DensityOperator>),
}

/// A classical-quantum broadcast channel `W : x ↦ ρ^x` on the tensor product
/// of the `L` user spaces.
#[derive(Debug, Clone)]
pub struct CqBroadcastChannel {
    input_alphabet_size: usize,
    num_users: usize,
    user_dims: Vec<usize>,
    outputs: ChannelOutputs,
}

impl CqBroadcastChannel {
    /// Classical channel from a joint transition table over the product
    /// output alphabet (mixed-radix, user 1 most significant).
    pub fn classical_from_joint(
        user_dims: Vec<usize>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let out_dim: usize = user_dims.iter().product();
        if rows.is_empty() {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != out_dim {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {out_dim}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidChannel(format!("row {x} has negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidChannel(format!(
                    "row {x} sums to {s}, expected 1"
                )));
            }
        }
        Ok(Self {
            input_alphabet_size: rows.len(),
            num_users: user_dims.len(),
            user_dims,
            outputs: ChannelOutputs::Classical(rows),
        })
    }

    /// Classical channel whose users see conditionally independent outputs:
    /// one row-stochastic matrix per user.
    pub fn classical_from_per_user(per_user: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if per_user.is_empty() {
            return Err(Error::InvalidChannel("no users".into()));
        }
        let nx = per_user[0].len();
        let user_dims: Vec<usize> = per_user
            .iter()
            .map(|m| m.first().map(|r| r.len()).unwrap_or(0))
            .collect();
        let out_dim: usize = user_dims.iter().product();
        let mut rows = Vec::with_capacity(nx);
        for x in 0..nx {
            let mut row = vec![1.0; out_dim];
            for (y, prob) in row.iter_mut().enumerate() {
                let mut rem = y;
                // user 1 most significant
                for (u, dims) in user_dims.iter().enumerate().rev() {
                    let yu = rem % dims;
                    rem /= dims;
                    let m = &per_user[u];
                    if m.len() != nx {
                        return Err(Error::InvalidChannel(format!(
                            "user {} matrix has {} rows, expected {nx}",
                            u + 1,
                            m.len()
                        )));
                    }
                    *prob *= m[x][yu];
                }
            }
            rows.push(row);
        }
        Self::classical_from_joint(user_dims, rows)
    }

    /// Quantum channel from explicit output states.
    pub fn quantum_from_states(
        user_dims: Vec<usize>,
        outputs: Vec<DensityOperator>,
    ) -> Result<Self> {
        let out_dim: usize = user_dims.iter().product();
        if out_dim > MAX_QUANTUM_DIM {
            return Err(Error::SizeLimit(format!(
                "output dimension {out_dim} exceeds cap {MAX_QUANTUM_DIM}"
            )));
        }
        if outputs.is_empty() {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        for (x, rho) in outputs.iter().enumerate() {
            if rho.dim() != out_dim {
                return Err(Error::InvalidChannel(format!(
                    "output {x} has dim {}, expected {out_dim}",
                    rho.dim()
                )));
            }
            if !rho.is_normalized() {
                return Err(Error::InvalidChannel(format!(
                    "output {x} must be normalized"
                )));
            }
        }
        Ok(Self {
            input_alphabet_size: outputs.len(),
            num_users: user_dims.len(),
            user_dims,
            outputs: ChannelOutputs::Quantum(outputs),
        })
    }

    /// Binary symmetric channel to each of `flips.len()` users, independent
    /// flip noise per user.
    pub fn binary_symmetric(flips: &[f64]) -> Result<Self> {
        let per_user = flips
            .iter()
            .map(|&f| vec![vec![1.0 - f, f], vec![f, 1.0 - f]])
            .collect();
        Self::classical_from_per_user(per_user)
    }

    pub fn input_alphabet_size(&self) -> usize {
        self.input_alphabet_size
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn user_dims(&self) -> &[usize] {
        &self.user_dims
    }

    pub fn output_dim(&self) -> usize {
        self.user_dims.iter().product()
    }

    /// True iff every output is diagonal in the computational basis.
    pub fn is_classical(&self) -> bool {
        match &self.outputs {
            ChannelOutputs::Classical(_) => true,
            ChannelOutputs::Quantum(states) => {
                states.iter().all(|s| s.base().is_diagonal(DIAG_TOL))
            }
        }
    }

    /// Transition rows over the product output alphabet, when classical.
    pub fn classical_rows(&self) -> Option<Vec<Vec<f64>>> {
        match &self.outputs {
            ChannelOutputs::Classical(rows) => Some(rows.clone()),
            ChannelOutputs::Quantum(states) => {
                if self.is_classical() {
                    Some(states.iter().map(|s| s.base().diagonal()).collect())
                } else {
                    None
                }
            }
        }
    }

    /// Output state for input `x` as a density operator.
    pub fn output_density(&self, x: usize) -> Result<DensityOperator> {
        match &self.outputs {
            ChannelOutputs::Classical(rows) => {
                if self.output_dim() > MAX_QUANTUM_DIM {
                    return Err(Error::SizeLimit(format!(
                        "classical output alphabet {} too large for a dense operator",
                        self.output_dim()
                    )));
                }
                DensityOperator::from_probabilities(&rows[x])
            }
            ChannelOutputs::Quantum(states) => Ok(states[x].clone()),
        }
    }

    /// Marginal transition rows `P(y_D | x)` onto the users in `subset`,
    /// classical channels only.
    pub fn classical_marginal_rows(&self, subset: &UserSet) -> Result<Vec<Vec<f64>>> {
        let rows = self
            .classical_rows()
            .ok_or_else(|| Error::InvalidChannel("channel is not classical".into()))?;
        let kept: Vec<usize> = (0..self.num_users)
            .filter(|i| subset.contains_user(i + 1))
            .collect();
        let kept_dim: usize = kept.iter().map(|&i| self.user_dims[i]).product();
        let mut out = vec![vec![0.0; kept_dim.max(1)]; self.input_alphabet_size];
        for (x, row) in rows.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                // decompose y, user 1 most significant
                let mut digits = vec![0usize; self.num_users];
                let mut rem = y;
                for i in (0..self.num_users).rev() {
                    digits[i] = rem % self.user_dims[i];
                    rem /= self.user_dims[i];
                }
                let mut idx = 0usize;
                for &i in &kept {
                    idx = idx * self.user_dims[i] + digits[i];
                }
                out[x][idx] += p;
            }
        }
        Ok(out)
    }

    /// Reduced output state on the users in `subset`.
    pub fn output_marginal(&self, x: usize, subset: &UserSet) -> Result<DensityOperator> {
        match &self.outputs {
            ChannelOutputs::Classical(_) => {
                let rows = self.classical_marginal_rows(subset)?;
                DensityOperator::from_probabilities(&rows[x])
            }
            ChannelOutputs::Quantum(_) => {
                let rho = self.output_density(x)?;
                let keep: Vec<usize> = (0..self.num_users)
                    .filter(|i| subset.contains_user(i + 1))
                    .collect();
                if keep.is_empty() {
                    return DensityOperator::from_probabilities(&[1.0]);
                }
                matrix::partial_trace_density(&rho, &self.user_dims, &keep)
            }
        }
    }

    /// `n` independent uses of the channel: input alphabet `𝒳ⁿ`, outputs the
    /// `n`-fold tensor products.
    pub fn product_extension(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        match &self.outputs {
            ChannelOutputs::Classical(rows) => {
                let nx = self.input_alphabet_size;
                let ny = self.output_dim();
                let new_nx = nx.checked_pow(n as u32).filter(|&v| v <= MAX_CLASSICAL_SIZE);
                let new_ny = ny.checked_pow(n as u32).filter(|&v| v <= MAX_CLASSICAL_SIZE);
                let (new_nx, new_ny) = match (new_nx, new_ny) {
                    (Some(a), Some(b)) if a * b <= MAX_CLASSICAL_SIZE => (a, b),
                    _ => {
                        return Err(Error::SizeLimit(format!(
                            "product extension n={n} exceeds classical size cap"
                        )))
                    }
                };
                let mut new_rows = Vec::with_capacity(new_nx);
                for xs in 0..new_nx {
                    let mut row = vec![1.0f64; new_ny];
                    for (ys, prob) in row.iter_mut().enumerate() {
                        let mut xr = xs;
                        let mut yr = ys;
                        let mut p = 1.0;
                        for _ in 0..n {
                            let xd = xr % nx;
                            let yd = yr % ny;
                            xr /= nx;
                            yr /= ny;
                            p *= rows[xd][yd];
                        }
                        *prob = p;
                    }
                    new_rows.push(row);
                }
                // user dims scale per user: each user now sees an n-tuple.
                let user_dims = self
                    .user_dims
                    .iter()
                    .map(|&d| d.pow(n as u32))
                    .collect::<Vec<_>>();
                // NOTE: the joint rows above index outputs by n-tuples of the
                // product alphabet, not by per-user tuples; re-index so user 1
                // stays most significant over its n-tuple.
                let reindexed = reindex_product_rows(&new_rows, &self.user_dims, n);
                Self::classical_from_joint(user_dims, reindexed)
            }
            ChannelOutputs::Quantum(states) => {
                let total_dim = self.output_dim().checked_pow(n as u32);
                match total_dim {
                    Some(d) if d <= MAX_QUANTUM_DIM => {}
                    _ => {
                        return Err(Error::SizeLimit(format!(
                            "quantum product extension n={n} exceeds dim cap {MAX_QUANTUM_DIM}"
                        )))
                    }
                }
                let nx = self.input_alphabet_size;
                let new_nx = nx.pow(n as u32);
                let mut outputs = Vec::with_capacity(new_nx);
                for xs in 0..new_nx {
                    // most significant use first
                    let mut digits = vec![0usize; n];
                    let mut rem = xs;
                    for i in (0..n).rev() {
                        digits[i] = rem % nx;
                        rem /= nx;
                    }
                    let mut acc = states[digits[0]].clone();
                    for &d in &digits[1..] {
                        acc = acc.tensor(&states[d]);
                    }
                    outputs.push(acc);
                }
                let user_dims = vec![self.output_dim().pow(n as u32)];
                // Treat the n-use channel as a single composite space per the
                // original user partition only when L = 1; otherwise keep the
                // composite as one space and record per-user dims as grouped.
                if self.num_users == 1 {
                    Self::quantum_from_states(user_dims, outputs)
                } else {
                    Self::quantum_from_states(
                        self.user_dims.iter().map(|&d| d.pow(n as u32)).collect(),
                        outputs.clone(),
                    )
                    // The Hilbert-space factor order of `outputs` interleaves
                    // uses, so per-user marginals of multi-user quantum
                    // product extensions are not supported beyond n=1.
                }
            }
        }
    }
}

/// Re-index rows from (product-alphabet)ⁿ ordering to per-user grouped
/// ordering, so each user's n outputs are contiguous digits.
fn reindex_product_rows(rows: &[Vec<f64>], user_dims: &[usize], n: usize) -> Vec<Vec<f64>> {
    let ny: usize = user_dims.iter().product();
    let new_ny = rows[0].len();
    let num_users = user_dims.len();
    let mut out = vec![vec![0.0; new_ny]; rows.len()];
    for (x, row) in rows.iter().enumerate() {
        for (ys, &p) in row.iter().enumerate() {
            // ys = tuple of n product-symbols, use 1 most significant
            let mut uses = vec![0usize; n];
            let mut rem = ys;
            for i in (0..n).rev() {
                uses[i] = rem % ny;
                rem /= ny;
            }
            // per-use per-user digits
            let mut digits = vec![vec![0usize; num_users]; n];
            for (i, &yu) in uses.iter().enumerate() {
                let mut r = yu;
                for u in (0..num_users).rev() {
                    digits[i][u] = r % user_dims[u];
                    r /= user_dims[u];
                }
            }
            // grouped index: user 1's n digits most significant
            let mut idx = 0usize;
            for u in 0..num_users {
                for i in 0..n {
                    idx = idx * user_dims[u] + digits[i][u];
                }
            }
            out[x][idx] += p;
        }
    }
    out
}

/// The block-diagonal classical-quantum state `Σ_x P(x)|x⟩⟨x| ⊗ ρ^x_{Y_D}`.
#[derive(Debug, Clone)]
pub struct CqState {
    input_dist: InputDistribution,
    subset: UserSet,
    /// ρ^x_{Y_D} per input symbol.
    blocks: Vec<DensityOperator>,
}

impl CqState {
    /// Assembles a cq state from explicit per-symbol conditioning states.
    pub fn from_blocks(
        input_dist: InputDistribution,
        subset: UserSet,
        blocks: Vec<DensityOperator>,
    ) -> Result<Self> {
        if blocks.len() != input_dist.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for {} input symbols",
                blocks.len(),
                input_dist.len()
            )));
        }
        let dim = blocks[0].dim();
        if blocks.iter().any(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "conditioning blocks differ in dimension".into(),
            ));
        }
        Ok(Self {
            input_dist,
            subset,
            blocks,
        })
    }

    pub fn input_dist(&self) -> &InputDistribution {
        &self.input_dist
    }

    pub fn subset(&self) -> &UserSet {
        &self.subset
    }

    pub fn blocks(&self) -> &[DensityOperator] {
        &self.blocks
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// Assembles the full joint density operator (dim `|𝒳|·dim_D`).
    pub fn joint(&self) -> Result<DensityOperator> {
        let nx = self.input_dist.len();
        let bd = self.block_dim();
        let dim = nx * bd;
        if dim > MAX_QUANTUM_DIM * 4 {
            return Err(Error::SizeLimit(format!(
                "joint dimension {dim} too large to assemble densely"
            )));
        }
        let mut m = matrix::CMatrix::zeros(dim, dim);
        for (x, block) in self.blocks.iter().enumerate() {
            let p = self.input_dist.probs()[x];
            for i in 0..bd {
                for j in 0..bd {
                    m[(x * bd + i, x * bd + j)] = block.base().entries()[(i, j)] * p;
                }
            }
        }
        DensityOperator::new(HermitianOperator::new(m)?, true)
    }

    /// True when every block is diagonal.
    pub fn is_classical(&self) -> bool {
        self.blocks.iter().all(|b| b.base().is_diagonal(DIAG_TOL))
    }

    /// The joint as a classical distribution when all blocks are diagonal.
    pub fn classical_joint(&self) -> Option<ClassicalJoint> {
        if !self.is_classical() {
            return None;
        }
        let nx = self.input_dist.len();
        let ny = self.block_dim();
        let mut p = vec![0.0; nx * ny];
        for (x, block) in self.blocks.iter().enumerate() {
            let px = self.input_dist.probs()[x];
            for (y, &d) in block.base().diagonal().iter().enumerate() {
                p[x * ny + y] = px * d.max(0.0);
            }
        }
        ClassicalJoint::new(nx, ny, p).ok()
    }
}

/// Builds `ψ_{X Y_D}` from an input distribution and the channel marginal on
/// `subset`.
pub fn build_cq_state(
    p: &InputDistribution,
    w: &CqBroadcastChannel,
    subset: &UserSet,
) -> Result<CqState> {
    if p.len() != w.input_alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "input distribution over {} symbols, channel expects {}",
            p.len(),
            w.input_alphabet_size()
        )));
    }
    let blocks = (0..w.input_alphabet_size())
        .map(|x| w.output_marginal(x, subset))
        .collect::<Result<Vec<_>>>()?;
    Ok(CqState {
        input_dist: p.clone(),
        subset: *subset,
        blocks,
    })
}

// ---------------------------------------------------------------------------
// JSON input format
// ---------------------------------------------------------------------------

/// On-disk channel description. Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub users: usize,
    pub input_alphabet: usize,
    pub kind: String,
    pub outputs: OutputsFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_authorized: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputsFile {
    /// Classical: one row-stochastic matrix per user (independent noise).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_user: Option<Vec<Vec<Vec<f64>>>>,
    /// Classical: joint transition table over the product output alphabet.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<Vec<Vec<f64>>>,
    /// Required alongside `joint` and `states`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_dims: Option<Vec<usize>>,
    /// Quantum: one complex matrix per input symbol, entries `[re, im]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

/// On-disk access structure description (users are 1-indexed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccessFile {
    pub users: usize,
    pub minimal_authorized: Vec<Vec<usize>>,
}

pub fn channel_from_file(doc: &ChannelFile) -> Result<CqBroadcastChannel> {
    let w = match doc.kind.as_str() {
        "classical" => {
            if let Some(per_user) = &doc.outputs.per_user {
                if per_user.len() != doc.users {
                    return Err(Error::InvalidChannel(format!(
                        "per_user has {} matrices, expected {}",
                        per_user.len(),
                        doc.users
                    )));
                }
                CqBroadcastChannel::classical_from_per_user(per_user.clone())?
            } else if let Some(joint) = &doc.outputs.joint {
                let dims = doc.outputs.user_dims.clone().ok_or_else(|| {
                    Error::InvalidChannel("joint outputs require user_dims".into())
                })?;
                CqBroadcastChannel::classical_from_joint(dims, joint.clone())?
            } else {
                return Err(Error::InvalidChannel(
                    "classical channel needs per_user or joint outputs".into(),
                ));
            }
        }
        "quantum" => {
            let dims = doc
                .outputs
                .user_dims
                .clone()
                .ok_or_else(|| Error::InvalidChannel("quantum channel needs user_dims".into()))?;
            let raw = doc
                .outputs
                .states
                .as_ref()
                .ok_or_else(|| Error::InvalidChannel("quantum channel needs states".into()))?;
            let mut states = Vec::with_capacity(raw.len());
            for m in raw {
                let dim = m.len();
                let mut cm = matrix::CMatrix::zeros(dim, dim);
                for (i, row) in m.iter().enumerate() {
                    if row.len() != dim {
                        return Err(Error::InvalidChannel("state matrix not square".into()));
                    }
                    for (j, &[re, im]) in row.iter().enumerate() {
                        cm[(i, j)] = num_complex::Complex64::new(re, im);
                    }
                }
                states.push(DensityOperator::new(HermitianOperator::new(cm)?, true)?);
            }
            CqBroadcastChannel::quantum_from_states(dims, states)?
        }
        other => {
            return Err(Error::InvalidChannel(format!(
                "unknown channel kind {other:?}"
            )))
        }
    };
    if w.input_alphabet_size() != doc.input_alphabet {
        return Err(Error::InvalidChannel(format!(
            "outputs define {} input symbols, header says {}",
            w.input_alphabet_size(),
            doc.input_alphabet
        )));
    }
    if w.num_users() != doc.users {
        return Err(Error::InvalidChannel(format!(
            "outputs define {} users, header says {}",
            w.num_users(),
            doc.users
        )));
    }
    Ok(w)
}

pub fn access_from_lists(num_users: usize, lists: &[Vec<usize>]) -> Result<AccessStructure> {
    let minimal = lists.iter().map(|l| UserSet::from_users(l)).collect();
    AccessStructure::new(num_users, minimal)
}
