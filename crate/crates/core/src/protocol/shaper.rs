//! Distribution shaper: inverts a hash `f_γ` on a source law `P_X` so that a
//! uniform seed/syndrome pair `(U, Γ)` composed with the shaper reproduces
//! `P_X` exactly. Also hosts the leftover-hash diagnostics.

use rand::Rng;

use crate::entropies::smooth_min_entropy_classical;
use crate::error::{Error, Result};
use crate::model::ClassicalJoint;
use crate::protocol::hash::{FamilyKind, HashFamily};

/// Table budget for exhaustive shaper construction.
const MAX_SHAPER_CELLS: u64 = 1 << 26;

/// Conditional sampler `P_{X|U,Γ}(x|u,γ) = P_X(x)·1[f_γ(x)=u] / P_{f_γ(X)}(u)`
/// tabulated for every seed of an enumerable family.
#[derive(Debug, Clone)]
pub struct Shaper {
    pub family: HashFamily,
    /// Source law padded with zeros to length `2^b`.
    pub p_x: Vec<f64>,
    /// `[seed][u][x]` conditional tables.
    tables: Vec<Vec<Vec<f64>>>,
    /// `[seed][u]` hashed-output laws `P_{f_γ(X)}`.
    u_marginals: Vec<Vec<f64>>,
    /// Slices with a nonempty preimage carrying zero source mass, filled
    /// uniformly over the preimage.
    pub repaired_slices: usize,
    /// Slices whose preimage is empty (seed matrix not surjective), filled
    /// uniformly over the whole alphabet.
    pub unreachable_slices: usize,
}

pub fn build_shaper(p_x: &[f64], kind: FamilyKind, u_bits: usize) -> Result<Shaper> {
    if p_x.is_empty() {
        return Err(Error::InvalidDistribution("empty source law".into()));
    }
    let total: f64 = p_x.iter().sum();
    if p_x.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidDistribution(format!(
            "source law sums to {total}"
        )));
    }
    let b = (p_x.len() as f64).log2().ceil().max(1.0) as usize;
    let family = HashFamily::new(kind, b, u_bits)?;
    if !family.is_enumerable()
        || family.num_seeds() * ((1u64 << u_bits) * (1u64 << b)) > MAX_SHAPER_CELLS
    {
        return Err(Error::SizeLimit(format!(
            "shaper tables need {} seeds over {} slices",
            family.num_seeds(),
            1u64 << u_bits
        )));
    }
    let nx = 1usize << b;
    let nu = 1usize << u_bits;
    let mut padded = p_x.to_vec();
    padded.resize(nx, 0.0);

    let mut tables = Vec::with_capacity(family.num_seeds() as usize);
    let mut u_marginals = Vec::with_capacity(family.num_seeds() as usize);
    let mut repaired = 0usize;
    let mut unreachable = 0usize;
    for seed in 0..family.num_seeds() {
        let mut preimages: Vec<Vec<usize>> = vec![Vec::new(); nu];
        for x in 0..nx {
            preimages[family.hash(seed, x as u64) as usize].push(x);
        }
        let mut conds = Vec::with_capacity(nu);
        let mut marg = Vec::with_capacity(nu);
        for pre in &preimages {
            let mass: f64 = pre.iter().map(|&x| padded[x]).sum();
            let mut row = vec![0.0; nx];
            if mass > 0.0 {
                for &x in pre {
                    row[x] = padded[x] / mass;
                }
            } else if !pre.is_empty() {
                repaired += 1;
                for &x in pre {
                    row[x] = 1.0 / pre.len() as f64;
                }
            } else {
                unreachable += 1;
                row.iter_mut().for_each(|v| *v = 1.0 / nx as f64);
            }
            conds.push(row);
            marg.push(mass);
        }
        tables.push(conds);
        u_marginals.push(marg);
    }
    Ok(Shaper {
        family,
        p_x: padded,
        tables,
        u_marginals,
        repaired_slices: repaired,
        unreachable_slices: unreachable,
    })
}

impl Shaper {
    pub fn alphabet_size(&self) -> usize {
        self.p_x.len()
    }

    pub fn num_outputs(&self) -> usize {
        1 << self.family.output_bits
    }

    pub fn conditional(&self, seed: u64, u: u64) -> &[f64] {
        &self.tables[seed as usize][u as usize]
    }

    /// `P_{f_γ(X)}` for one seed.
    pub fn output_law(&self, seed: u64) -> &[f64] {
        &self.u_marginals[seed as usize]
    }

    /// Seed-averaged hashed-output law `P_{f_Γ(X)}`.
    pub fn averaged_output_law(&self) -> Vec<f64> {
        let n = self.family.num_seeds() as f64;
        let mut avg = vec![0.0; self.num_outputs()];
        for marg in &self.u_marginals {
            for (a, &m) in avg.iter_mut().zip(marg) {
                *a += m / n;
            }
        }
        avg
    }

    /// Max deviation of `Σ_γ P(γ) Σ_u P_{f_γ(X)}(u)·P_{X|U,Γ}(x|u,γ)` from the
    /// source law. Exact reconstruction holds by construction; this measures
    /// accumulated float error.
    pub fn composition_deviation(&self) -> f64 {
        let n = self.family.num_seeds() as f64;
        let mut recon = vec![0.0; self.alphabet_size()];
        for (conds, marg) in self.tables.iter().zip(&self.u_marginals) {
            for (row, &m) in conds.iter().zip(marg) {
                if m > 0.0 {
                    for (r, &c) in recon.iter_mut().zip(row) {
                        *r += m * c / n;
                    }
                }
            }
        }
        recon
            .iter()
            .zip(&self.p_x)
            .map(|(r, p)| (r - p).abs())
            .fold(0.0, f64::max)
    }

    pub fn sample_x<R: Rng>(&self, seed: u64, u: u64, rng: &mut R) -> usize {
        let row = self.conditional(seed, u);
        let mut t = rng.gen::<f64>();
        for (x, &p) in row.iter().enumerate() {
            t -= p;
            if t <= 0.0 {
                return x;
            }
        }
        row.len() - 1
    }
}

/// Variational distance (full L1 norm) of the hashed output from uniform,
/// jointly with the public seed: `E_γ ‖P_{f_γ(X)} − unif‖₁`. Reported with
/// the leftover-hash bound `2ε′ + √(2^{u_bits − H_min^{ε′}(X)})`.
pub fn uniformity_gap(shaper: &Shaper, eps_prime: f64) -> Result<(f64, f64)> {
    let nu = shaper.num_outputs() as f64;
    let seeds = shaper.family.num_seeds();
    let mut gap = 0.0;
    for seed in 0..seeds {
        let dev: f64 = shaper
            .output_law(seed)
            .iter()
            .map(|&p| (p - 1.0 / nu).abs())
            .sum();
        gap += dev / seeds as f64;
    }
    let joint = ClassicalJoint::new(shaper.alphabet_size(), 1, shaper.p_x.clone())?;
    let hmin = smooth_min_entropy_classical(&joint, eps_prime)?.value;
    let bound = 2.0 * eps_prime + 2f64.powf(shaper.family.output_bits as f64 - hmin).sqrt();
    Ok((gap, bound))
}

/// Exact left-hand side `‖ρ_{f_Γ(X)ΓZ} − ρ_U ⊗ ρ_{ΓZ}‖₁` of the leftover-hash
/// inequality against the bound `2ε + √(2^{r − H_min^ε(X|Z)})`.
///
/// `side` gives per-symbol rows `P(z|x)`; `None` means trivial side
/// information.
pub fn leftover_hash_check(
    p_x: &[f64],
    side: Option<&[Vec<f64>]>,
    kind: FamilyKind,
    r: usize,
    eps: f64,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "smoothing parameter {eps} outside [0,1)"
        )));
    }
    let shaper = build_shaper(p_x, kind, r)?;
    let nx = shaper.alphabet_size();
    let nz = match side {
        Some(rows) => {
            if rows.len() != p_x.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} side-information rows for {} symbols",
                    rows.len(),
                    p_x.len()
                )));
            }
            rows[0].len()
        }
        None => 1,
    };
    let row_of = |x: usize| -> Option<&[f64]> {
        side.and_then(|rows| rows.get(x)).map(|r| r.as_slice())
    };
    // P(z) is seed-independent.
    let mut p_z = vec![0.0; nz];
    for x in 0..nx {
        match row_of(x) {
            Some(row) => {
                for (pz, &w) in p_z.iter_mut().zip(row) {
                    *pz += shaper.p_x[x] * w;
                }
            }
            None => p_z[0] += shaper.p_x[x],
        }
    }
    let nu = shaper.num_outputs();
    let uniform = 1.0 / nu as f64;
    let seeds = shaper.family.num_seeds();
    let mut lhs = 0.0;
    for seed in 0..seeds {
        let mut joint = vec![0.0; nu * nz];
        for x in 0..nx {
            if shaper.p_x[x] == 0.0 {
                continue;
            }
            let u = shaper.family.hash(seed, x as u64) as usize;
            match row_of(x) {
                Some(row) => {
                    for (z, &w) in row.iter().enumerate() {
                        joint[u * nz + z] += shaper.p_x[x] * w;
                    }
                }
                None => joint[u * nz] += shaper.p_x[x],
            }
        }
        let mut dev = 0.0;
        for u in 0..nu {
            for z in 0..nz {
                dev += (joint[u * nz + z] - uniform * p_z[z]).abs();
            }
        }
        lhs += dev / seeds as f64;
    }
    let flat: Vec<f64> = (0..nx)
        .flat_map(|x| {
            (0..nz).map(move |z| match row_of(x) {
                Some(row) => p_x.get(x).copied().unwrap_or(0.0) * row[z],
                None => p_x.get(x).copied().unwrap_or(0.0),
            })
        })
        .collect();
    let joint_xz = ClassicalJoint::new(nx, nz, flat)?;
    let hmin = smooth_min_entropy_classical(&joint_xz, eps)?.value;
    let rhs = 2.0 * eps + 2f64.powf(r as f64 - hmin).sqrt();
    Ok((lhs, rhs))
}
