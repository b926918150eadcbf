//! Achievable-rate and converse bounds for secret sharing over broadcast
//! channels: one-shot, second-order, asymptotic, and capacity expressions.

use serde::Serialize;

use crate::entropies;
use crate::error::{Error, Result};
use crate::model::{
    build_cq_state, AccessStructure, ClassicalJoint, CqBroadcastChannel, CqState,
    InputDistribution, UserSet,
};
use crate::optimizer;

/// Smoothing and hashing parameters of the one-shot achievability bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsilonBudget {
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
}

impl EpsilonBudget {
    pub fn new(eps1: f64, eps2: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("eps1", eps1), ("eps2", eps2)] {
            if !(0.0..1.0).contains(&v) || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside (0, 1)"
                )));
            }
        }
        if delta < 0.0 || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta = {delta} negative")));
        }
        Ok(Self { eps1, eps2, delta })
    }

    /// Min-entropy smoothing parameter `ε′ = ε₁(|𝔸|+1) + ε₂` of the general
    /// bound.
    pub fn eps_prime(&self, num_authorized: usize) -> f64 {
        self.eps1 * (num_authorized + 1) as f64 + self.eps2
    }

    /// `ε′ = ε₁ + ε₂` when the only authorized set is the full user set.
    pub fn eps_prime_all_user(&self) -> f64 {
        self.eps1 + self.eps2
    }

    /// Overall secrecy-and-reliability parameter achieved by the general
    /// bound: `|𝔸|(3ε′ + 2^{−δ/2−1}) + |𝔹|(4ε′ + 2^{−δ/2})`.
    pub fn total_epsilon(&self, num_authorized: usize, num_unauthorized: usize) -> f64 {
        let ep = self.eps_prime(num_authorized);
        let t = 2f64.powf(-self.delta / 2.0);
        num_authorized as f64 * (3.0 * ep + 0.5 * t) + num_unauthorized as f64 * (4.0 * ep + t)
    }

    /// Overall parameter in the all-user case:
    /// `3ε′ + 2^{−δ/2−1} + |𝔹|(4ε′ + 2^{−δ/2})`.
    pub fn total_epsilon_all_user(&self, num_unauthorized: usize) -> f64 {
        let ep = self.eps_prime_all_user();
        let t = 2f64.powf(-self.delta / 2.0);
        3.0 * ep + 0.5 * t + num_unauthorized as f64 * (4.0 * ep + t)
    }
}

/// One entropy term of a rate bound, attributed to its user subset.
#[derive(Debug, Clone, Serialize)]
pub struct TermReport {
    pub subset: Vec<usize>,
    pub value: f64,
    /// False when the term was evaluated without smoothing (quantum
    /// conditioning systems fall back to the unsmoothed value).
    pub smoothed: bool,
}

/// A rate bound with its per-subset entropy breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub rate_bits: f64,
    /// All `H_min`-side terms, one per unauthorized set.
    pub min_entropy_terms: Vec<TermReport>,
    /// All `H_max`-side terms, one per authorized set.
    pub max_entropy_terms: Vec<TermReport>,
    /// The binding (minimal) min-entropy term.
    pub binding_min: TermReport,
    /// The binding (maximal) max-entropy term.
    pub binding_max: TermReport,
    pub penalty_bits: f64,
    /// Secrecy-and-reliability parameter guaranteed at this rate, when the
    /// bound carries one.
    pub achieved_epsilon: Option<f64>,
    /// True when any quantum term had to fall back to unsmoothed entropies.
    pub quantum_smoothing_zero: bool,
}

enum TermKind {
    SmoothMin,
    SmoothMax,
}

fn entropy_term(state: &CqState, eps: f64, kind: TermKind) -> Result<TermReport> {
    let (value, smoothed) = if let Some(j) = state.classical_joint() {
        let v = match kind {
            TermKind::SmoothMin => entropies::smooth_min_entropy_classical(&j, eps)?.value,
            TermKind::SmoothMax => entropies::smooth_max_entropy_classical(&j, eps)?.value,
        };
        (v, true)
    } else {
        let v = match kind {
            TermKind::SmoothMin => entropies::min_entropy_zero(state)?.value,
            TermKind::SmoothMax => entropies::max_entropy_zero(state)?.value,
        };
        (v, eps == 0.0)
    };
    Ok(TermReport {
        subset: state.subset().users(),
        value,
        smoothed,
    })
}

fn binding_min(terms: &[TermReport]) -> TermReport {
    terms
        .iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .expect("at least one unauthorized set")
        .clone()
}

fn binding_max(terms: &[TermReport]) -> TermReport {
    terms
        .iter()
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .expect("at least one authorized set")
        .clone()
}

fn check_smoothing_param(name: &str, eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::BudgetViolation(format!(
            "{name} = {eps} leaves (0, 1); smoothing is undefined"
        )));
    }
    Ok(())
}

fn one_shot_terms(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    eps_prime: f64,
    eps1: f64,
) -> Result<(Vec<TermReport>, Vec<TermReport>)> {
    let mut min_terms = Vec::new();
    for b in access.unauthorized_sets() {
        let state = build_cq_state(p, channel, &b)?;
        min_terms.push(entropy_term(&state, eps_prime, TermKind::SmoothMin)?);
    }
    let mut max_terms = Vec::new();
    for a in access.authorized_sets() {
        let state = build_cq_state(p, channel, &a)?;
        max_terms.push(entropy_term(&state, eps1, TermKind::SmoothMax)?);
    }
    Ok((min_terms, max_terms))
}

fn assemble_report(
    min_terms: Vec<TermReport>,
    max_terms: Vec<TermReport>,
    penalty: f64,
    achieved_epsilon: Option<f64>,
) -> RateReport {
    let bm = binding_min(&min_terms);
    let bx = binding_max(&max_terms);
    let quantum_smoothing_zero = min_terms
        .iter()
        .chain(&max_terms)
        .any(|t| !t.smoothed);
    RateReport {
        rate_bits: bm.value - bx.value - penalty,
        binding_min: bm,
        binding_max: bx,
        min_entropy_terms: min_terms,
        max_entropy_terms: max_terms,
        penalty_bits: penalty,
        achieved_epsilon,
        quantum_smoothing_zero,
    }
}

/// General one-shot achievable rate:
/// `min_B H_min^{ε′}(X|Y_B) − max_A H_max^{ε₁}(X|Y_A)
///  − δ − 2log₂(1/ε₂) − 2log₂(|𝔸|+1) − 6`.
pub(crate) fn one_shot_general(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    budget: &EpsilonBudget,
) -> Result<RateReport> {
    let k = access.authorized_sets().len();
    let nb = access.unauthorized_sets().len();
    let eps_prime = budget.eps_prime(k);
    check_smoothing_param("eps'", eps_prime)?;
    let (min_terms, max_terms) = one_shot_terms(channel, access, p, eps_prime, budget.eps1)?;
    let penalty = budget.delta
        + 2.0 * (1.0 / budget.eps2).log2()
        + 2.0 * ((k + 1) as f64).log2()
        + 6.0;
    Ok(assemble_report(
        min_terms,
        max_terms,
        penalty,
        Some(budget.total_epsilon(k, nb)),
    ))
}

/// One-shot achievable rate when the only authorized set is all users; the
/// `2log₂(|𝔸|+1)` penalty disappears and the smoothing parameter tightens to
/// `ε₁ + ε₂`.
pub fn all_user_one_shot_rate(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    budget: &EpsilonBudget,
) -> Result<RateReport> {
    if !access.is_all_user() {
        return Err(Error::InvalidAccessStructure(
            "all-user bound requires the access structure {[1:L]}".into(),
        ));
    }
    let nb = access.unauthorized_sets().len();
    let eps_prime = budget.eps_prime_all_user();
    check_smoothing_param("eps'", eps_prime)?;
    let (min_terms, max_terms) = one_shot_terms(channel, access, p, eps_prime, budget.eps1)?;
    let penalty = budget.delta + 2.0 * (1.0 / budget.eps2).log2() + 6.0;
    Ok(assemble_report(
        min_terms,
        max_terms,
        penalty,
        Some(budget.total_epsilon_all_user(nb)),
    ))
}

/// One-shot achievable rate, selecting the sharper all-user constants when
/// they apply.
pub fn one_shot_achievable_rate(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    budget: &EpsilonBudget,
) -> Result<RateReport> {
    if access.is_all_user() {
        all_user_one_shot_rate(channel, access, p, budget)
    } else {
        one_shot_general(channel, access, p, budget)
    }
}

/// Builds the cq state of `(S, Y_D)` for a secret correlated with the channel
/// input through `p_sx` (rows index `s`, columns index `x`).
fn secret_state(
    channel: &CqBroadcastChannel,
    p_sx: &ClassicalJoint,
    subset: &UserSet,
) -> Result<CqState> {
    if p_sx.ny != channel.input_alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "secret joint has {} input symbols, channel expects {}",
            p_sx.ny,
            channel.input_alphabet_size()
        )));
    }
    let ps = p_sx.marginal_x();
    let mut blocks = Vec::with_capacity(p_sx.nx);
    for s in 0..p_sx.nx {
        let dim = {
            let any = channel.output_marginal(0, subset)?;
            any.dim()
        };
        let mut acc = crate::matrix::HermitianOperator::zeros(dim);
        if ps[s] > 1e-14 {
            for x in 0..p_sx.ny {
                let w = p_sx.get(s, x) / ps[s];
                if w > 1e-14 {
                    acc = acc.add(&channel.output_marginal(x, subset)?.base().scale(w))?;
                }
            }
        } else {
            acc = channel.output_marginal(0, subset)?.base().clone();
        }
        blocks.push(crate::matrix::DensityOperator::new(acc, true)?);
    }
    CqState::from_blocks(InputDistribution::new(ps)?, *subset, blocks)
}

/// One-shot converse at a fixed secret-input correlation `P_{SX}`:
/// `min_B H_min^{√ε}(S|Y_B) − max_A H_max^{√(2ε)}(S|Y_A)`.
pub fn one_shot_converse(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p_sx: &ClassicalJoint,
    eps: f64,
) -> Result<RateReport> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside [0, 1)")));
    }
    let eps_min = eps.sqrt();
    let eps_max = (2.0 * eps).sqrt().min(1.0);
    check_smoothing_param("sqrt(eps)", eps_min)?;
    let mut min_terms = Vec::new();
    for b in access.unauthorized_sets() {
        let state = secret_state(channel, p_sx, &b)?;
        min_terms.push(entropy_term(&state, eps_min, TermKind::SmoothMin)?);
    }
    let mut max_terms = Vec::new();
    for a in access.authorized_sets() {
        let state = secret_state(channel, p_sx, &a)?;
        max_terms.push(entropy_term(&state, eps_max, TermKind::SmoothMax)?);
    }
    Ok(assemble_report(min_terms, max_terms, 0.0, None))
}

/// One-shot converse maximized over `P_{SX}` with a secret alphabet of the
/// given size, via seeded multistart ascent over the joint simplex.
pub fn one_shot_converse_maximized(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    secret_size: usize,
    eps: f64,
    seed: u64,
) -> Result<(RateReport, ClassicalJoint)> {
    let nx = channel.input_alphabet_size();
    let dim = secret_size * nx;
    let objective = |q: &[f64]| -> Result<f64> {
        let j = ClassicalJoint::new(secret_size, nx, q.to_vec())?;
        let r = one_shot_converse(channel, access, &j, eps)?;
        if r.rate_bits.is_finite() {
            Ok(r.rate_bits)
        } else {
            Ok(f64::MAX / 4.0)
        }
    };
    let best = optimizer::maximize_over_simplex(objective, dim, seed)?;
    let j = ClassicalJoint::new(secret_size, nx, best.point.clone())?;
    let report = one_shot_converse(channel, access, &j, eps)?;
    Ok((report, j))
}

/// Second-order (finite block length) rate estimate.
#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderReport {
    pub n: usize,
    /// Per-channel-use rate estimate.
    pub rate_per_symbol: f64,
    /// Half-width of the `O(log n / n)` uncertainty band.
    pub band_per_symbol: f64,
    pub min_entropy_terms: Vec<TermReport>,
    pub max_entropy_terms: Vec<TermReport>,
}

/// Second-order rate at block length `n`:
/// `min_B [H + √(V/n)Φ⁻¹(ε′²)] − max_A [H − √(V/n)Φ⁻¹(ε₁)]`
/// with `ε′ = ε₁(|𝔸|+1)`, within `± O(log n / n)`.
pub fn second_order_rate(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    n: usize,
    eps1: f64,
) -> Result<SecondOrderReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let k = access.authorized_sets().len();
    let eps_prime = eps1 * (k + 1) as f64;
    if !(0.0..1.0).contains(&eps_prime) || eps_prime <= 0.0 {
        return Err(Error::BudgetViolation(format!(
            "eps1 (|A|+1) = {eps_prime} leaves (0, 1)"
        )));
    }
    let nf = n as f64;
    let mut min_terms = Vec::new();
    for b in access.unauthorized_sets() {
        let state = build_cq_state(p, channel, &b)?;
        let h = entropies::conditional_entropy(&state)?;
        let v = entropies::conditional_info_variance(&state)?;
        let total = entropies::second_order_min_entropy(h, v, n, eps_prime * eps_prime)?;
        min_terms.push(TermReport {
            subset: b.users(),
            value: total / nf,
            smoothed: true,
        });
    }
    let mut max_terms = Vec::new();
    for a in access.authorized_sets() {
        let state = build_cq_state(p, channel, &a)?;
        let h = entropies::conditional_entropy(&state)?;
        let v = entropies::conditional_info_variance(&state)?;
        let total = entropies::second_order_hypothesis_testing(h, v, n, eps1)?;
        max_terms.push(TermReport {
            subset: a.users(),
            value: total / nf,
            smoothed: true,
        });
    }
    let bm = binding_min(&min_terms);
    let bx = binding_max(&max_terms);
    Ok(SecondOrderReport {
        n,
        rate_per_symbol: bm.value - bx.value,
        band_per_symbol: nf.log2() / nf,
        min_entropy_terms: min_terms,
        max_entropy_terms: max_terms,
    })
}

/// Asymptotic rate `min_B H(X|Y_B) − max_A H(X|Y_A)`.
pub fn asymptotic_rate(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
) -> Result<RateReport> {
    let mut min_terms = Vec::new();
    for b in access.unauthorized_sets() {
        let state = build_cq_state(p, channel, &b)?;
        min_terms.push(TermReport {
            subset: b.users(),
            value: entropies::conditional_entropy(&state)?,
            smoothed: true,
        });
    }
    let mut max_terms = Vec::new();
    for a in access.authorized_sets() {
        let state = build_cq_state(p, channel, &a)?;
        max_terms.push(TermReport {
            subset: a.users(),
            value: entropies::conditional_entropy(&state)?,
            smoothed: true,
        });
    }
    Ok(assemble_report(min_terms, max_terms, 0.0, None))
}

/// `I(X; Y_{B^c} | Y_B) = H(X|Y_B) − H(X|Y_{[1:L]})`.
pub fn conditional_mutual_information(
    channel: &CqBroadcastChannel,
    p: &InputDistribution,
    b: &UserSet,
) -> Result<f64> {
    let full = UserSet::full(channel.num_users());
    let hb = entropies::conditional_entropy(&build_cq_state(p, channel, b)?)?;
    let hfull = entropies::conditional_entropy(&build_cq_state(p, channel, &full)?)?;
    Ok((hb - hfull).max(0.0))
}

/// Secret sharing capacity `max_{P_X} min_B I(X; Y_{B^c} | Y_B)`, via seeded
/// multistart ascent over input distributions.
pub fn classical_capacity(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    seed: u64,
) -> Result<(f64, InputDistribution)> {
    let nx = channel.input_alphabet_size();
    let unauth = access.unauthorized_sets();
    let objective = |q: &[f64]| -> Result<f64> {
        let p = InputDistribution::new(crate::optimizer::project_simplex(q))?;
        let mut worst = f64::INFINITY;
        for b in &unauth {
            worst = worst.min(conditional_mutual_information(channel, &p, b)?);
        }
        Ok(worst)
    };
    let best = optimizer::maximize_over_simplex(objective, nx, seed)?;
    Ok((
        best.value,
        InputDistribution::new(optimizer::project_simplex(&best.point))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::access_from_lists;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn two_user_channel() -> CqBroadcastChannel {
        CqBroadcastChannel::binary_symmetric(&[0.05, 0.3]).unwrap()
    }

    #[test]
    fn budget_validation_and_epsilons() {
        assert!(EpsilonBudget::new(0.0, 0.1, 1.0).is_err());
        assert!(EpsilonBudget::new(0.1, 1.0, 1.0).is_err());
        assert!(EpsilonBudget::new(0.1, 0.1, -1.0).is_err());
        let b = EpsilonBudget::new(0.01, 0.02, 4.0).unwrap();
        assert!((b.eps_prime(3) - 0.06).abs() < 1e-12);
        assert!((b.eps_prime_all_user() - 0.03).abs() < 1e-12);
        // 𝔸 = 1, 𝔹 = 1, δ = 4: ε = 3ε′ + 2⁻³ + 4ε′ + 2⁻².
        let total = b.total_epsilon(1, 1);
        let ep = 0.01 * 2.0 + 0.02;
        assert!((total - (3.0 * ep + 0.125 + 4.0 * ep + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn one_shot_report_structure() {
        let w = two_user_channel();
        let access = access_from_lists(2, &[vec![1]]).unwrap();
        let p = InputDistribution::uniform(2);
        let budget = EpsilonBudget::new(0.01, 0.01, 10.0).unwrap();
        let r = one_shot_achievable_rate(&w, &access, &p, &budget).unwrap();
        // 𝔸 = {{1},{1,2}}, 𝔹 = {∅,{2}}.
        assert_eq!(r.min_entropy_terms.len(), 2);
        assert_eq!(r.max_entropy_terms.len(), 2);
        assert!(!r.quantum_smoothing_zero);
        assert!(r.achieved_epsilon.is_some());
        // Desk-scale single-shot constants dominate: the rate is negative but
        // reproduces min − max − penalty.
        let recomputed = r.binding_min.value - r.binding_max.value - r.penalty_bits;
        assert!((r.rate_bits - recomputed).abs() < 1e-12);
        let k = 2.0f64 + 1.0;
        let expect_penalty = 10.0 + 2.0 * (1.0f64 / 0.01).log2() + 2.0 * k.log2() + 6.0;
        assert!((r.penalty_bits - expect_penalty).abs() < 1e-12);
    }

    #[test]
    fn all_user_constants_are_sharper() {
        let w = two_user_channel();
        let access = AccessStructure::all_users(2);
        let p = InputDistribution::uniform(2);
        let budget = EpsilonBudget::new(0.02, 0.02, 6.0).unwrap();
        let tight = one_shot_achievable_rate(&w, &access, &p, &budget).unwrap();
        let general = one_shot_general(&w, &access, &p, &budget).unwrap();
        assert!(tight.rate_bits >= general.rate_bits - 1e-9);
        // Penalty difference is exactly 2log₂(|𝔸|+1) = 2.
        assert!((general.penalty_bits - tight.penalty_bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_shot_monotone_in_delta_and_eps2() {
        let w = two_user_channel();
        let access = access_from_lists(2, &[vec![1]]).unwrap();
        let p = InputDistribution::uniform(2);
        let r1 = one_shot_achievable_rate(&w, &access, &p, &EpsilonBudget::new(0.01, 0.01, 5.0).unwrap()).unwrap();
        let r2 = one_shot_achievable_rate(&w, &access, &p, &EpsilonBudget::new(0.01, 0.01, 9.0).unwrap()).unwrap();
        assert!(r2.rate_bits <= r1.rate_bits + 1e-12);
        let r3 = one_shot_achievable_rate(&w, &access, &p, &EpsilonBudget::new(0.01, 0.05, 5.0).unwrap()).unwrap();
        assert!(r3.rate_bits >= r1.rate_bits - 1e-9);
    }

    #[test]
    fn budget_violation_detected() {
        let w = two_user_channel();
        let access = access_from_lists(2, &[vec![1]]).unwrap();
        let p = InputDistribution::uniform(2);
        // ε′ = ε₁(|𝔸|+1) + ε₂ = 0.4·3 + 0.1 > 1.
        let budget = EpsilonBudget::new(0.4, 0.1, 1.0).unwrap();
        assert!(matches!(
            one_shot_achievable_rate(&w, &access, &p, &budget),
            Err(Error::BudgetViolation(_))
        ));
    }

    #[test]
    fn asymptotic_rate_degraded_bsc() {
        // User 1 authorized alone: rate = min(H(X), H(X|Y₂)) − H(X|Y₁)
        //                               = h₂(0.3) − h₂(0.05).
        let w = two_user_channel();
        let access = access_from_lists(2, &[vec![1]]).unwrap();
        let p = InputDistribution::uniform(2);
        let r = asymptotic_rate(&w, &access, &p).unwrap();
        let want = h2(0.3) - h2(0.05);
        assert!((r.rate_bits - want).abs() < 1e-9, "{} vs {want}", r.rate_bits);
        assert!((r.binding_min.value - h2(0.3)).abs() < 1e-9);
        assert_eq!(r.binding_min.subset, vec![2]);
    }

    #[test]
    fn second_order_approaches_asymptotic_rate() {
        let w = two_user_channel();
        let access = access_from_lists(2, &[vec![1]]).unwrap();
        let p = InputDistribution::uniform(2);
        let asym = asymptotic_rate(&w, &access, &p).unwrap().rate_bits;
        let mut prev_gap = f64::INFINITY;
        for n in [100, 1_000, 10_000, 100_000] {
            let r = second_order_rate(&w, &access, &p, n, 0.05).unwrap();
            let gap = (r.rate_per_symbol - asym).abs();
            assert!(gap < prev_gap + 1e-12, "gap not shrinking at n={n}");
            prev_gap = gap;
        }
        // At ε₁ < ½ the dispersion corrections point downward.
        let r = second_order_rate(&w, &access, &p, 1_000, 0.05).unwrap();
        assert!(r.rate_per_symbol < asym);
        assert!(r.band_per_symbol > 0.0);
    }

    #[test]
    fn cmi_matches_direct_classical_formula() {
        // I(X; Y₁ | Y₂) computed from the full joint as an oracle.
        let w = two_user_channel();
        let p = InputDistribution::new(vec![0.3, 0.7]).unwrap();
        let b = UserSet::from_users(&[2]);
        let got = conditional_mutual_information(&w, &p, &b).unwrap();
        let rows = w.classical_rows().unwrap();
        // joint over (x, y1, y2); y index = y1*2 + y2.
        let mut pxy = vec![0.0; 2 * 4];
        for x in 0..2 {
            for y in 0..4 {
                pxy[x * 4 + y] = p.probs()[x] * rows[x][y];
            }
        }
        let mut oracle = 0.0;
        for x in 0..2 {
            for y1 in 0..2 {
                for y2 in 0..2 {
                    let pxyy = pxy[x * 4 + y1 * 2 + y2];
                    if pxyy <= 0.0 {
                        continue;
                    }
                    let py2: f64 = (0..2)
                        .flat_map(|xx| (0..2).map(move |yy1| (xx, yy1)))
                        .map(|(xx, yy1)| pxy[xx * 4 + yy1 * 2 + y2])
                        .sum();
                    let pxy2: f64 = (0..2).map(|yy1| pxy[x * 4 + yy1 * 2 + y2]).sum();
                    let py1y2: f64 = (0..2).map(|xx| pxy[xx * 4 + y1 * 2 + y2]).sum();
                    oracle += pxyy * ((pxyy * py2) / (pxy2 * py1y2)).log2();
                }
            }
        }
        assert!((got - oracle).abs() < 1e-9, "cmi {got} oracle {oracle}");
    }

    #[test]
    fn capacity_single_user_bsc() {
        let w = CqBroadcastChannel::binary_symmetric(&[0.11]).unwrap();
        let access = access_from_lists(1, &[vec![1]]).unwrap();
        let (c, p) = classical_capacity(&w, &access, 11).unwrap();
        let want = 1.0 - h2(0.11);
        assert!((c - want).abs() < 1e-3, "capacity {c} want {want}");
        assert!((p.probs()[0] - 0.5).abs() < 0.02);
    }

    #[test]
    fn capacity_bounded_by_asymptotic_rate_at_optimum() {
        // For the all-user structure over one user the capacity equals the
        // maximized asymptotic rate.
        let w = CqBroadcastChannel::binary_symmetric(&[0.2]).unwrap();
        let access = access_from_lists(1, &[vec![1]]).unwrap();
        let (c, p) = classical_capacity(&w, &access, 3).unwrap();
        let r = asymptotic_rate(&w, &access, &p).unwrap();
        assert!((c - r.rate_bits).abs() < 1e-9);
    }

    #[test]
    fn converse_noiseless_channel() {
        // Noiseless bit to the single authorized user: one secret bit.
        let w = CqBroadcastChannel::binary_symmetric(&[0.0]).unwrap();
        let access = access_from_lists(1, &[vec![1]]).unwrap();
        let p_sx = ClassicalJoint::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let r = one_shot_converse(&w, &access, &p_sx, 0.01).unwrap();
        // min-side: H_min^{√ε}(S) ≥ 1; max-side: smoothing keeps the perfectly
        // correlated H_max near zero.
        assert!(r.rate_bits >= 0.9, "converse rate {}", r.rate_bits);
        assert!(r.rate_bits <= 1.5);
        assert!(r.achieved_epsilon.is_none());
    }

    #[test]
    fn converse_maximization_improves_on_fixed_choice() {
        let w = CqBroadcastChannel::binary_symmetric(&[0.1, 0.4]).unwrap();
        let access = access_from_lists(2, &[vec![1]]).unwrap();
        let skew = ClassicalJoint::new(2, 2, vec![0.8, 0.05, 0.05, 0.1]).unwrap();
        let fixed = one_shot_converse(&w, &access, &skew, 0.01).unwrap();
        let (best, _) = one_shot_converse_maximized(&w, &access, 2, 0.01, 5).unwrap();
        assert!(best.rate_bits >= fixed.rate_bits - 1e-6);
    }
}
