//! Lifts a compound source code and a shaper into a secret sharing code over
//! a classical broadcast channel, with reliability and secrecy evaluation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::entropies::smooth_min_entropy_classical;
use crate::error::{Error, Result};
use crate::model::{
    AccessStructure, ClassicalJoint, CqBroadcastChannel, InputDistribution, UserSet,
    MAX_CLASSICAL_SIZE,
};
use crate::protocol::hash::{coset_members, gf2_rank};
use crate::protocol::shaper::Shaper;
use crate::protocol::source_code::{sample_encoder_rows, sample_index, EvalMode, EvalStat};
use crate::rates::EpsilonBudget;

/// Evaluation budget for exact enumeration of `(γ, s, y)` state spaces.
const MAX_EXACT_CELLS: u64 = 1 << 24;

/// Secret sharing code: secret `s` picks a coset member `u = Enc_c(s)` of the
/// syndrome encoder `g`, the shaper turns `(u, γ)` into a channel input, and
/// each authorized set runs maximum-likelihood decoding given `(γ, c)`.
#[derive(Debug, Clone)]
pub struct SecretSharingCode {
    pub u_bits: usize,
    /// Syndrome length of `g`; the public syndrome alphabet is `{0,1}^m`.
    pub m: usize,
    pub secret_bits: usize,
    pub rows: Vec<u64>,
    /// `g⁻¹(c)` per syndrome, ascending; `Enc_c` maps `s` to the `s`-th entry.
    pub cosets: Vec<Vec<u64>>,
    pub shaper: Shaper,
    pub c_star: u64,
    pub channel: CqBroadcastChannel,
    pub access: AccessStructure,
    /// Channel marginal rows per authorized set, aligned with
    /// `access.authorized_sets()`.
    marginals_a: Vec<Vec<Vec<f64>>>,
    marginals_b: Vec<Vec<Vec<f64>>>,
}

pub fn lift_to_channel_code(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    shaper: Shaper,
    m: usize,
    g_seed: u64,
    selection_trials: usize,
) -> Result<SecretSharingCode> {
    if !channel.is_classical() {
        return Err(Error::InvalidChannel(
            "channel-code lifting needs a classical channel".into(),
        ));
    }
    if channel.num_users() != access.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "{}-user channel with {}-user access structure",
            channel.num_users(),
            access.num_users()
        )));
    }
    if channel.input_alphabet_size() > shaper.alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "shaper covers {} symbols, channel needs {}",
            shaper.alphabet_size(),
            channel.input_alphabet_size()
        )));
    }
    let u_bits = shaper.family.output_bits;
    if m > u_bits {
        return Err(Error::InvalidParameter(format!(
            "syndrome length {m} exceeds seed length {u_bits}"
        )));
    }
    let rows = sample_encoder_rows(u_bits, m, g_seed)?;
    debug_assert!(gf2_rank(&rows) == m);
    let cosets: Vec<Vec<u64>> = (0..(1u64 << m))
        .map(|c| coset_members(&rows, u_bits, c))
        .collect();
    let marginals_a = access
        .authorized_sets()
        .iter()
        .map(|a| channel.classical_marginal_rows(a))
        .collect::<Result<Vec<_>>>()?;
    let marginals_b = access
        .unauthorized_sets()
        .iter()
        .map(|b| channel.classical_marginal_rows(b))
        .collect::<Result<Vec<_>>>()?;
    let mut code = SecretSharingCode {
        u_bits,
        m,
        secret_bits: u_bits - m,
        rows,
        cosets,
        shaper,
        c_star: 0,
        channel: channel.clone(),
        access: access.clone(),
        marginals_a,
        marginals_b,
    };
    code.c_star = select_encoder(&code, selection_trials, g_seed)?;
    Ok(code)
}

/// Picks the syndrome whose worst-case decoding error plus worst-case
/// secrecy leakage is smallest; ties resolve to the smallest syndrome.
pub fn select_encoder(code: &SecretSharingCode, trials: usize, seed: u64) -> Result<u64> {
    let mut best = (f64::INFINITY, 0u64);
    for c in 0..(1u64 << code.m) {
        let mut score: f64 = 0.0;
        let mut worst_err: f64 = 0.0;
        for i in 0..code.access.authorized_sets().len() {
            let stat = code.reliability_for(c, i, EvalMode::Auto, trials, seed)?;
            worst_err = worst_err.max(stat.value);
        }
        score += worst_err;
        let mut worst_dist: f64 = 0.0;
        for (i, _) in code.access.unauthorized_sets().iter().enumerate() {
            worst_dist = worst_dist.max(code.security_for(c, i)?.value);
        }
        score += worst_dist;
        if score < best.0 {
            best = (score, c);
        }
    }
    Ok(best.1)
}

impl SecretSharingCode {
    pub fn num_secrets(&self) -> u64 {
        1u64 << self.secret_bits
    }

    /// `Enc_c(s)`: the `s`-th coset member in ascending order.
    pub fn encode_to_seed_word(&self, c: u64, s: u64) -> u64 {
        self.cosets[c as usize][s as usize]
    }

    /// Inverse of `Enc_c`.
    pub fn seed_word_to_secret(&self, c: u64, u: u64) -> Option<u64> {
        self.cosets[c as usize]
            .binary_search(&u)
            .ok()
            .map(|i| i as u64)
    }

    fn likelihood(&self, marginal: &[Vec<f64>], gamma: u64, u: u64, y: usize) -> f64 {
        let cond = self.shaper.conditional(gamma, u);
        let nx = self.channel.input_alphabet_size();
        (0..nx).map(|x| cond[x] * marginal[x][y]).sum()
    }

    /// ML decoding of the seed word from `(y, γ, c)`; smallest `u` on ties.
    pub fn decode_seed_word(&self, marginal: &[Vec<f64>], gamma: u64, y: usize, c: u64) -> u64 {
        let mut best = self.cosets[c as usize][0];
        let mut best_score = -1.0;
        for &u in &self.cosets[c as usize] {
            let score = self.likelihood(marginal, gamma, u, y);
            if score > best_score {
                best_score = score;
                best = u;
            }
        }
        best
    }

    fn reliability_for(
        &self,
        c: u64,
        set_idx: usize,
        mode: EvalMode,
        trials: usize,
        seed: u64,
    ) -> Result<EvalStat> {
        let marginal = &self.marginals_a[set_idx];
        let ny = marginal[0].len();
        let gammas = self.shaper.family.num_seeds();
        let cells = gammas * self.num_secrets() * ny as u64;
        let exact = match mode {
            EvalMode::Exact => {
                if cells > MAX_EXACT_CELLS {
                    return Err(Error::SizeLimit(format!(
                        "exact reliability over {cells} states"
                    )));
                }
                true
            }
            EvalMode::MonteCarlo(_) => false,
            EvalMode::Auto => cells <= MAX_EXACT_CELLS,
        };
        if exact {
            let mut err = 0.0;
            let ps = 1.0 / self.num_secrets() as f64;
            let pg = 1.0 / gammas as f64;
            for gamma in 0..gammas {
                for &u in &self.cosets[c as usize] {
                    for y in 0..ny {
                        if self.decode_seed_word(marginal, gamma, y, c) != u {
                            err += ps * pg * self.likelihood(marginal, gamma, u, y);
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
            _ => trials,
        };
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (c << 32) ^ set_idx as u64);
        let mut errors = 0usize;
        for _ in 0..trials {
            let s = rng.gen_range(0..self.num_secrets());
            let u = self.encode_to_seed_word(c, s);
            let gamma = rng.gen_range(0..gammas);
            let x = self.shaper.sample_x(gamma, u, &mut rng);
            let y = sample_index(&marginal[x], &mut rng);
            if self.decode_seed_word(marginal, gamma, y, c) != u {
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

    /// Exact secrecy leakage for one unauthorized set:
    /// `‖P_{S Γ Y_B} − unif_S ⊗ P_{Γ Y_B}‖₁` under the code with syndrome `c`.
    fn security_for(&self, c: u64, set_idx: usize) -> Result<EvalStat> {
        let marginal = &self.marginals_b[set_idx];
        let ny = marginal[0].len();
        let gammas = self.shaper.family.num_seeds();
        let ns = self.num_secrets() as usize;
        let cells = gammas * ns as u64 * ny as u64;
        if cells > MAX_EXACT_CELLS {
            return Err(Error::SizeLimit(format!(
                "exact secrecy evaluation over {cells} states"
            )));
        }
        let ps = 1.0 / ns as f64;
        let pg = 1.0 / gammas as f64;
        let mut dist = 0.0;
        let mut cond = vec![0.0; ns * ny];
        for gamma in 0..gammas {
            cond.iter_mut().for_each(|v| *v = 0.0);
            for (s, &u) in self.cosets[c as usize].iter().enumerate() {
                for y in 0..ny {
                    cond[s * ny + y] = self.likelihood(marginal, gamma, u, y);
                }
            }
            for y in 0..ny {
                let avg: f64 = (0..ns).map(|s| cond[s * ny + y] * ps).sum();
                for s in 0..ns {
                    dist += ps * pg * (cond[s * ny + y] - avg).abs();
                }
            }
        }
        Ok(EvalStat {
            value: dist,
            three_sigma: 0.0,
            exact: true,
        })
    }

    /// Decoding error for one authorized set at the selected syndrome.
    pub fn evaluate_reliability(
        &self,
        subset: &UserSet,
        mode: EvalMode,
        trials: usize,
        seed: u64,
    ) -> Result<EvalStat> {
        let idx = self
            .access
            .authorized_sets()
            .iter()
            .position(|a| a == subset)
            .ok_or_else(|| {
                Error::InvalidAccessStructure(format!("{subset} is not authorized"))
            })?;
        self.reliability_for(self.c_star, idx, mode, trials, seed)
    }

    /// Secrecy leakage for one unauthorized set at the selected syndrome.
    /// The empty set sees nothing, so its leakage is identically zero.
    pub fn evaluate_security(&self, subset: &UserSet) -> Result<EvalStat> {
        let idx = self
            .access
            .unauthorized_sets()
            .iter()
            .position(|b| b == subset)
            .ok_or_else(|| {
                Error::InvalidAccessStructure(format!("{subset} is not unauthorized"))
            })?;
        self.security_for(self.c_star, idx)
    }

    /// Average over syndromes of the worst-case authorized decoding error;
    /// relates the channel code back to the underlying source code.
    pub fn average_syndrome_error(
        &self,
        mode: EvalMode,
        trials: usize,
        seed: u64,
    ) -> Result<f64> {
        let mut total = 0.0;
        for c in 0..(1u64 << self.m) {
            let mut worst: f64 = 0.0;
            for i in 0..self.access.authorized_sets().len() {
                worst = worst.max(self.reliability_for(c, i, mode, trials, seed)?.value);
            }
            total += worst;
        }
        Ok(total / (1u64 << self.m) as f64)
    }

    /// Error of the underlying source code when the seed word is drawn from
    /// the shaped law `P_{f_Γ(X)}` instead of uniformly over a coset.
    pub fn shaped_source_error(&self, set_idx: usize) -> Result<f64> {
        let marginal = &self.marginals_a[set_idx];
        let ny = marginal[0].len();
        let gammas = self.shaper.family.num_seeds();
        let cells = gammas * (1u64 << self.u_bits) * ny as u64;
        if cells > MAX_EXACT_CELLS {
            return Err(Error::SizeLimit(format!(
                "exact source-code evaluation over {cells} states"
            )));
        }
        let pg = 1.0 / gammas as f64;
        let mut err = 0.0;
        for gamma in 0..gammas {
            let law = self.shaper.output_law(gamma);
            for c in 0..(1u64 << self.m) {
                for &u in &self.cosets[c as usize] {
                    if law[u as usize] == 0.0 {
                        continue;
                    }
                    for y in 0..ny {
                        if self.decode_seed_word(marginal, gamma, y, c) != u {
                            err += pg * law[u as usize] * self.likelihood(marginal, gamma, u, y);
                        }
                    }
                }
            }
        }
        Ok(err)
    }

    /// Theoretical total-failure budget `|𝔸|(3ε′ + 2^{−δ/2−1}) +
    /// |𝔹|(4ε′ + 2^{−δ/2})` for comparison against measured values.
    pub fn combined_bound(&self, budget: &EpsilonBudget) -> f64 {
        budget.total_epsilon(
            self.access.authorized_sets().len(),
            self.access.unauthorized_sets().len(),
        )
    }

    /// Leakage bound `4ε′ + 2√(2^{u_bits − H_min^{ε′}(X|Y_B)})` for one
    /// unauthorized set, from the leftover-hash step of the analysis.
    pub fn security_bound(&self, subset: &UserSet, eps_prime: f64) -> Result<f64> {
        let idx = self
            .access
            .unauthorized_sets()
            .iter()
            .position(|b| b == subset)
            .ok_or_else(|| {
                Error::InvalidAccessStructure(format!("{subset} is not unauthorized"))
            })?;
        let marginal = &self.marginals_b[idx];
        let nx = self.channel.input_alphabet_size();
        let ny = marginal[0].len();
        if nx * ny > MAX_CLASSICAL_SIZE {
            return Err(Error::SizeLimit("side-information joint too large".into()));
        }
        let mut flat = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            let px = self.shaper.p_x[x];
            flat.extend(marginal[x].iter().map(|&w| px * w));
        }
        let joint = ClassicalJoint::new(nx, ny, flat)?;
        let hmin = smooth_min_entropy_classical(&joint, eps_prime)?.value;
        Ok(4.0 * eps_prime + 2.0 * 2f64.powf(self.u_bits as f64 - hmin).sqrt())
    }
}

/// Seed-word length from the one-shot analysis:
/// `⌊min_B H_min^{ε′}(X|Y_B) − δ − 2⌋`, clamped to at least 1. Returns the
/// length and the fractional amount lost to rounding.
pub fn select_u_bits(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    budget: &EpsilonBudget,
) -> Result<(usize, f64)> {
    let eps_prime = budget.eps_prime(access.authorized_sets().len());
    let mut worst = f64::INFINITY;
    for b in access.unauthorized_sets() {
        let marginal = channel.classical_marginal_rows(&b)?;
        let nx = channel.input_alphabet_size();
        let ny = marginal[0].len();
        let mut flat = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            flat.extend(marginal[x].iter().map(|&w| p.probs()[x] * w));
        }
        let joint = ClassicalJoint::new(nx, ny, flat)?;
        worst = worst.min(smooth_min_entropy_classical(&joint, eps_prime)?.value);
    }
    let raw = worst - budget.delta - 2.0;
    let bits = raw.floor().max(1.0) as usize;
    Ok((bits, raw - raw.floor()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::hash::FamilyKind;
    use crate::protocol::shaper::{build_shaper, uniformity_gap};

    fn noiseless_two_user() -> (CqBroadcastChannel, AccessStructure) {
        let channel = CqBroadcastChannel::binary_symmetric(&[0.0, 0.0]).unwrap();
        let access =
            AccessStructure::new(2, vec![UserSet::from_users(&[1, 2])]).unwrap();
        (channel, access)
    }

    fn lifted(
        channel: &CqBroadcastChannel,
        access: &AccessStructure,
        u_bits: usize,
        m: usize,
    ) -> SecretSharingCode {
        let nx = channel.input_alphabet_size();
        let p = vec![1.0 / nx as f64; nx];
        let shaper = build_shaper(&p, FamilyKind::Toeplitz, u_bits).unwrap();
        lift_to_channel_code(channel, access, shaper, m, 42, 500).unwrap()
    }

    #[test]
    fn noiseless_channel_errors_only_on_singular_seeds() {
        let (channel, access) = noiseless_two_user();
        let channel = channel.product_extension(2).unwrap();
        let code = lifted(&channel, &access, 2, 1);
        assert_eq!(code.secret_bits, 1);
        // Residual error comes solely from seeds whose hash matrix cannot
        // represent every seed word; the uniformity gap accounts for it.
        let avg = code.average_syndrome_error(EvalMode::Exact, 0, 0).unwrap();
        let (gap, _) = uniformity_gap(&code.shaper, 0.0).unwrap();
        assert!(avg <= gap + 1e-9, "avg {avg} gap {gap}");
        // Under a full-rank seed the decoding is deterministic and exact.
        let marginal = channel
            .classical_marginal_rows(&UserSet::from_users(&[1, 2]))
            .unwrap();
        let full_rank: Vec<u64> = (0..code.shaper.family.num_seeds())
            .filter(|&g| gf2_rank(&code.shaper.family.rows(g)) == code.u_bits)
            .collect();
        assert!(!full_rank.is_empty());
        for &gamma in &full_rank {
            for c in 0..2u64 {
                for &u in &code.cosets[c as usize] {
                    let cond = code.shaper.conditional(gamma, u);
                    for (x, &q) in cond.iter().enumerate() {
                        if q == 0.0 {
                            continue;
                        }
                        let y = marginal[x]
                            .iter()
                            .position(|&p| p > 0.99)
                            .expect("noiseless output");
                        assert_eq!(code.decode_seed_word(&marginal, gamma, y, c), u);
                    }
                }
            }
        }
        // The empty set leaks nothing.
        let empty = code.evaluate_security(&UserSet::from_users(&[])).unwrap();
        assert!(empty.value.abs() < 1e-12);
    }

    #[test]
    fn coset_encoding_round_trips() {
        let (channel, access) = noiseless_two_user();
        let code = lifted(&channel.product_extension(3).unwrap(), &access, 3, 1);
        for c in 0..2u64 {
            for s in 0..code.num_secrets() {
                let u = code.encode_to_seed_word(c, s);
                assert_eq!(code.seed_word_to_secret(c, u), Some(s));
            }
        }
    }

    #[test]
    fn single_user_secrecy_decays_with_noise_toward_them() {
        // User 2 is very noisy: alone they learn little about the secret.
        let channel = CqBroadcastChannel::binary_symmetric(&[0.01, 0.45])
            .unwrap()
            .product_extension(3)
            .unwrap();
        let access = AccessStructure::new(2, vec![UserSet::from_users(&[1, 2])]).unwrap();
        let code = lifted(&channel, &access, 2, 1);
        let d_noisy = code
            .evaluate_security(&UserSet::from_users(&[2]))
            .unwrap()
            .value;
        let d_clean = code
            .evaluate_security(&UserSet::from_users(&[1]))
            .unwrap()
            .value;
        assert!(d_noisy <= d_clean + 1e-9, "noisy {d_noisy} clean {d_clean}");
        assert!((0.0..=2.0).contains(&d_noisy));
    }

    #[test]
    fn selected_syndrome_is_no_worse_than_average() {
        let channel = CqBroadcastChannel::binary_symmetric(&[0.05, 0.1])
            .unwrap()
            .product_extension(3)
            .unwrap();
        let access = AccessStructure::new(2, vec![UserSet::from_users(&[1, 2])]).unwrap();
        let code = lifted(&channel, &access, 2, 1);
        let a = UserSet::from_users(&[1, 2]);
        let chosen = code
            .evaluate_reliability(&a, EvalMode::Exact, 0, 0)
            .unwrap()
            .value
            + code
                .evaluate_security(&UserSet::from_users(&[1]))
                .unwrap()
                .value
                .max(
                    code.evaluate_security(&UserSet::from_users(&[2]))
                        .unwrap()
                        .value,
                );
        let mut avg = 0.0;
        for c in 0..(1u64 << code.m) {
            let mut score = code
                .reliability_for(c, 0, EvalMode::Exact, 0, 0)
                .unwrap()
                .value;
            let mut worst: f64 = 0.0;
            for i in 0..code.access.unauthorized_sets().len() {
                worst = worst.max(code.security_for(c, i).unwrap().value);
            }
            score += worst;
            avg += score / (1u64 << code.m) as f64;
        }
        assert!(chosen <= avg + 1e-9, "chosen {chosen} avg {avg}");
    }

    #[test]
    fn uniform_input_error_bounded_by_tilt_plus_shaped_error() {
        // Lifting argument: avg-over-syndrome error with uniform seed words
        // is at most the uniformity gap plus the shaped-law error.
        let channel = CqBroadcastChannel::binary_symmetric(&[0.08])
            .unwrap()
            .product_extension(3)
            .unwrap();
        let access = AccessStructure::new(1, vec![UserSet::from_users(&[1])]).unwrap();
        let code = lifted(&channel, &access, 2, 1);
        let lhs = code
            .average_syndrome_error(EvalMode::Exact, 0, 0)
            .unwrap();
        let (gap, _) = uniformity_gap(&code.shaper, 0.0).unwrap();
        let shaped = code.shaped_source_error(0).unwrap();
        assert!(lhs <= gap + shaped + 1e-9, "{lhs} vs {gap} + {shaped}");
    }

    #[test]
    fn measured_leakage_respects_leftover_hash_bound() {
        let channel = CqBroadcastChannel::binary_symmetric(&[0.02, 0.3])
            .unwrap()
            .product_extension(4)
            .unwrap();
        let access = AccessStructure::new(2, vec![UserSet::from_users(&[1, 2])]).unwrap();
        let code = lifted(&channel, &access, 2, 1);
        for b in code.access.unauthorized_sets() {
            if b.is_empty() {
                continue;
            }
            let measured = code.evaluate_security(&b).unwrap().value;
            let bound = code.security_bound(&b, 0.05).unwrap();
            assert!(measured <= bound + 1e-9, "{b}: {measured} > {bound}");
        }
    }

    #[test]
    fn u_bits_selection_tracks_eavesdropper_entropy() {
        let channel = CqBroadcastChannel::binary_symmetric(&[0.01, 0.4])
            .unwrap()
            .product_extension(6)
            .unwrap();
        let access = AccessStructure::new(2, vec![UserSet::from_users(&[1, 2])]).unwrap();
        let p = InputDistribution::uniform(channel.input_alphabet_size());
        let tight = EpsilonBudget::new(0.01, 0.01, 1.0).unwrap();
        let loose = EpsilonBudget::new(0.01, 0.01, 3.0).unwrap();
        let (bits_tight, loss) = select_u_bits(&channel, &access, &p, &tight).unwrap();
        let (bits_loose, _) = select_u_bits(&channel, &access, &p, &loose).unwrap();
        assert!(bits_loose <= bits_tight);
        assert!((0.0..1.0).contains(&loss));
        assert!(bits_tight <= 6);
    }
}
