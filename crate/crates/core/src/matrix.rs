//! Dense complex Hermitian linear algebra at small dimension.
//!
//! Everything downstream (entropies, rate bounds, the SRM decoder) reduces to
//! spectral computations on operators of dimension at most a few dozen, so
//! this module keeps to dense `nalgebra` matrices and eigendecompositions.
//! Matrix functions (square root, base-2 logarithm) are always computed via
//! the spectral decomposition, never by series.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max allowed deviation from `A == A†`, per entry.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues with absolute value at or below this are treated as zero for
/// logs, supports and positive parts.
pub const EIG_CUTOFF: f64 = 1e-12;
/// Allowed negativity of density-operator eigenvalues.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of a normalized trace from one.
pub const TRACE_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

/// A Hermitian operator on a finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
}

impl HermitianOperator {
    /// Builds from an explicit matrix, validating Hermiticity.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let dim = entries.nrows();
        let mut deviation = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: HERMITICITY_TOL,
            });
        }
        // Symmetrize so later spectral routines see an exactly Hermitian input.
        let adj = entries.adjoint();
        let entries = (entries + adj).map(|z| z * 0.5);
        Ok(Self { dim, entries })
    }

    /// Hermitian operator from a real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { dim, entries: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[(i, i)].re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.map(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: &self.entries - &other.entries,
        })
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator dims {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// True when the operator is diagonal in the computational basis.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && self.entries[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.entries[(i, i)].re).collect()
    }

    /// Max absolute entry of `self`.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EighResult {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, matching `eigenvalues` order.
    pub eigenvectors: CMatrix,
}

impl EighResult {
    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let dim = self.eigenvalues.len();
        let mut diag = CMatrix::zeros(dim, dim);
        for (i, &ev) in self.eigenvalues.iter().enumerate() {
            diag[(i, i)] = Complex64::new(f(ev), 0.0);
        }
        let m = &self.eigenvectors * diag * self.eigenvectors.adjoint();
        HermitianOperator {
            dim,
            entries: symmetrize(m),
        }
    }
}

fn symmetrize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).map(|z| z * 0.5)
}

/// Hermitian eigendecomposition; eigenvalues returned in descending order.
pub fn eigh(a: &HermitianOperator) -> Result<EighResult> {
    let se = nalgebra::SymmetricEigen::try_new(a.entries.clone(), f64::EPSILON, 10_000).ok_or(
        Error::NonConvergence {
            iterations: 10_000,
            lower: f64::NAN,
            upper: f64::NAN,
        },
    )?;
    let dim = a.dim;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..dim {
            eigenvectors[(r, new_col)] = se.eigenvectors[(r, old_col)];
        }
    }
    Ok(EighResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Kronecker product.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        dim: a.dim * b.dim,
        entries: a.entries.kronecker(&b.entries),
    }
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(a: &HermitianOperator) -> Result<f64> {
    let d = eigh(a)?;
    Ok(d.eigenvalues.iter().map(|ev| ev.abs()).sum())
}

/// Principal square root of a PSD operator (negative noise clipped at zero).
pub fn sqrtm(a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = eigh(a)?;
    Ok(d.apply(|ev| if ev > 0.0 { ev.sqrt() } else { 0.0 }))
}

/// Base-2 logarithm on the support; eigenvalues at or below the cutoff map to zero.
pub fn log2m(a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = eigh(a)?;
    Ok(d.apply(|ev| if ev > EIG_CUTOFF { ev.log2() } else { 0.0 }))
}

/// Projector onto eigenspaces with eigenvalue strictly above the cutoff.
pub fn positive_part_projector(a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = eigh(a)?;
    Ok(d.apply(|ev| if ev > EIG_CUTOFF { 1.0 } else { 0.0 }))
}

/// Pseudo-inverse square root on the support of a PSD operator.
pub fn pinv_sqrtm(a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = eigh(a)?;
    Ok(d.apply(|ev| if ev > EIG_CUTOFF { 1.0 / ev.sqrt() } else { 0.0 }))
}

/// Matrix product of two Hermitian factors; generally not Hermitian, so the
/// raw matrix is returned.
pub fn matmul(a: &HermitianOperator, b: &HermitianOperator) -> CMatrix {
    &a.entries * &b.entries
}

/// Trace norm of an arbitrary matrix: sum of its singular values.
pub fn trace_norm_general(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// A quantum state, possibly subnormalized. The subnormalization is an
/// explicit flag rather than being inferred from the trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    base: HermitianOperator,
    normalized: bool,
}

impl DensityOperator {
    /// Validates PSD-ness and the trace constraint for the requested class.
    pub fn new(base: HermitianOperator, normalized: bool) -> Result<Self> {
        let d = eigh(&base)?;
        if let Some(&min) = d
            .eigenvalues
            .iter()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
        {
            if min < -PSD_TOL {
                return Err(Error::InvalidDensity(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        let tr = base.trace();
        if normalized {
            if (tr - 1.0).abs() > TRACE_TOL {
                return Err(Error::InvalidDensity(format!(
                    "trace {tr} not within {TRACE_TOL:.0e} of 1"
                )));
            }
        } else if tr <= 0.0 || tr > 1.0 + TRACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "subnormalized trace {tr} outside (0, 1]"
            )));
        }
        Ok(Self { base, normalized })
    }

    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_diagonal(probs), true)
    }

    /// Pure state from an (unnormalized) amplitude vector.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let dim = amplitudes.len();
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm;
            }
        }
        Self::new(HermitianOperator { dim, entries: m }, true)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let probs = vec![1.0 / dim as f64; dim];
        Self::from_probabilities(&probs).expect("uniform diagonal is a valid state")
    }

    pub fn base(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.base.trace()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            base: tensor(&self.base, &other.base),
            normalized: self.normalized && other.normalized,
        }
    }
}

/// Partial trace over the complement of `keep`, for an operator on a tensor
/// product with the given factor dimensions. Kept factors preserve their
/// relative order.
pub fn partial_trace(
    rho: &HermitianOperator,
    factor_dims: &[usize],
    keep: &[usize],
) -> Result<HermitianOperator> {
    let total: usize = factor_dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "product of factor dims {total} != operator dim {}",
            rho.dim()
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= factor_dims.len()) {
        return Err(Error::DimensionMismatch(
            "keep index out of range of factor list".into(),
        ));
    }
    let traced: Vec<usize> = (0..factor_dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dim: usize = keep.iter().map(|&i| factor_dims[i]).product();
    let trace_dim: usize = traced.iter().map(|&i| factor_dims[i]).product();

    // Mixed-radix index helpers, most significant factor first.
    let compose = |keep_idx: usize, trace_idx: usize| -> usize {
        let mut digits = vec![0usize; factor_dims.len()];
        let mut k = keep_idx;
        for &f in keep.iter().rev() {
            digits[f] = k % factor_dims[f];
            k /= factor_dims[f];
        }
        let mut t = trace_idx;
        for &f in traced.iter().rev() {
            digits[f] = t % factor_dims[f];
            t /= factor_dims[f];
        }
        let mut idx = 0usize;
        for (f, &d) in digits.iter().enumerate() {
            idx = idx * factor_dims[f] + d;
        }
        idx
    };

    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    for i in 0..keep_dim {
        for j in 0..keep_dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..trace_dim {
                acc += rho.entries()[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(HermitianOperator {
        dim: keep_dim,
        entries: symmetrize(out),
    })
}

/// Partial trace for density operators; preserves the normalization flag.
pub fn partial_trace_density(
    rho: &DensityOperator,
    factor_dims: &[usize],
    keep: &[usize],
) -> Result<DensityOperator> {
    let base = partial_trace(rho.base(), factor_dims, keep)?;
    DensityOperator::new(base, rho.is_normalized())
}

/// Uhlmann fidelity `F(ρ,σ) = ‖√ρ√σ‖₁²`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity dims {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(fidelity_with_psd(rho.base(), sigma.base())?.min(1.0))
}

/// Fidelity against an arbitrary PSD operator (used for `𝟙 ⊗ σ` arguments);
/// no clamp to [0,1].
pub fn fidelity_with_psd(rho: &HermitianOperator, pos: &HermitianOperator) -> Result<f64> {
    let sr = sqrtm(rho)?;
    let ss = sqrtm(pos)?;
    let prod = matmul(&sr, &ss);
    let tn = trace_norm_general(&prod);
    Ok(tn * tn)
}

/// Purified distance `√(1 − F)`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok((1.0 - f).max(0.0).sqrt())
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let diff = rho.base().sub(sigma.base())?;
    Ok(0.5 * trace_norm(&diff)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_hermitian(dim: usize, rng: &mut StdRng) -> HermitianOperator {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..dim {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    pub(crate) fn random_density(dim: usize, rng: &mut StdRng) -> DensityOperator {
        let h = random_hermitian(dim, rng);
        let sq = matmul(&h, &h);
        let h2 = HermitianOperator::new(sq).unwrap();
        let tr = h2.trace();
        DensityOperator::new(h2.scale(1.0 / tr), true).unwrap()
    }

    #[test]
    fn tensor_identity_case() {
        let i2 = HermitianOperator::identity(2);
        let t = tensor(&i2, &i2);
        assert_eq!(t.dim(), 4);
        assert!((t.entries() - CMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn tensor_diagonal_product() {
        let a = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::from_diagonal(&[0.0, 1.0]);
        let t = tensor(&a, &b);
        assert_eq!(t.diagonal(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn tensor_matches_index_formula_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let t = tensor(&a, &b);
        // Independent quadruple-loop Kronecker oracle.
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = a.entries()[(i, j)] * b.entries()[(k, l)];
                        let got = t.entries()[(2 * i + k, 2 * j + l)];
                        assert!((expect - got).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = StdRng::seed_from_u64(11);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(3, &mut rng);
        let joint = rho.tensor(&sigma);
        let reduced = partial_trace(joint.base(), &[2, 3], &[0]).unwrap();
        let diff = reduced.sub(rho.base()).unwrap();
        assert!(diff.max_abs_entry() < 1e-12);
        assert!((reduced.trace() - joint.trace()).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_maximally_entangled() {
        let amp = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let bell = DensityOperator::from_pure(&amp).unwrap();
        for keep in [[0usize], [1usize]] {
            let red = partial_trace(bell.base(), &[2, 2], &keep).unwrap();
            let half = HermitianOperator::identity(2).scale(0.5);
            assert!(red.sub(&half).unwrap().max_abs_entry() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_index_sum_oracle() {
        let mut rng = StdRng::seed_from_u64(13);
        let rho = random_density(4, &mut rng);
        let red = partial_trace(rho.base(), &[2, 2], &[0]).unwrap();
        // Explicit double-index sum oracle: (ρ_A)_{ij} = Σ_k ρ_{(i k),(j k)}.
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    acc += rho.base().entries()[(2 * i + k, 2 * j + k)];
                }
                assert!((acc - red.entries()[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let rho = DensityOperator::maximally_mixed(4);
        assert!(partial_trace(rho.base(), &[3, 2], &[0]).is_err());
    }

    #[test]
    fn eigh_diagonal_and_pauli_x() {
        let d = eigh(&HermitianOperator::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigenvalues.len(), 3);
        assert!((d.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues[2] - 1.0).abs() < 1e-12);

        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = c(1.0, 0.0);
        x[(1, 0)] = c(1.0, 0.0);
        let d = eigh(&HermitianOperator::new(x).unwrap()).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_reconstruction_residual() {
        let mut rng = StdRng::seed_from_u64(17);
        let a = random_hermitian(5, &mut rng);
        let d = eigh(&a).unwrap();
        let rebuilt = d.apply(|ev| ev);
        assert!(a.sub(&rebuilt).unwrap().max_abs_entry() <= 1e-9);
    }

    #[test]
    fn trace_norm_values() {
        let mut rng = StdRng::seed_from_u64(19);
        let rho = random_density(3, &mut rng);
        assert!((trace_norm(rho.base()).unwrap() - 1.0).abs() < 1e-10);
        let a = HermitianOperator::from_diagonal(&[0.5, -0.5]);
        assert!((trace_norm(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_commuting_is_variational_distance() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.2, 0.2, 0.6];
        let rho = DensityOperator::from_probabilities(&p).unwrap();
        let sigma = DensityOperator::from_probabilities(&q).unwrap();
        let diff = rho.base().sub(sigma.base()).unwrap();
        let variational: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
        assert!((trace_norm(&diff).unwrap() - variational).abs() < 1e-12);
    }

    #[test]
    fn fidelity_basic_cases() {
        let mut rng = StdRng::seed_from_u64(23);
        let rho = random_density(3, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);

        let e0 = DensityOperator::from_probabilities(&[1.0, 0.0]).unwrap();
        let e1 = DensityOperator::from_probabilities(&[0.0, 1.0]).unwrap();
        assert!(fidelity(&e0, &e1).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_commuting_bhattacharyya() {
        let p = [0.6, 0.3, 0.1];
        let q = [0.1, 0.4, 0.5];
        let rho = DensityOperator::from_probabilities(&p).unwrap();
        let sigma = DensityOperator::from_probabilities(&q).unwrap();
        let bc: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        assert!((fidelity(&rho, &sigma).unwrap() - bc * bc).abs() < 1e-10);
    }

    #[test]
    fn fidelity_symmetric() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..20 {
            let rho = random_density(3, &mut rng);
            let sigma = random_density(3, &mut rng);
            let f1 = fidelity(&rho, &sigma).unwrap();
            let f2 = fidelity(&sigma, &rho).unwrap();
            assert!((f1 - f2).abs() <= 1e-9);
        }
    }

    #[test]
    fn purified_distance_cases_and_sandwich() {
        let e0 = DensityOperator::from_probabilities(&[1.0, 0.0]).unwrap();
        let e1 = DensityOperator::from_probabilities(&[0.0, 1.0]).unwrap();
        assert!(purified_distance(&e0, &e0).unwrap() < 1e-9);
        assert!((purified_distance(&e0, &e1).unwrap() - 1.0).abs() < 1e-9);

        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..30 {
            let p: f64 = rng.gen_range(0.01..0.99);
            let q: f64 = rng.gen_range(0.01..0.99);
            let rho = DensityOperator::from_probabilities(&[p, 1.0 - p]).unwrap();
            let sigma = DensityOperator::from_probabilities(&[q, 1.0 - q]).unwrap();
            let td = trace_distance(&rho, &sigma).unwrap();
            let pd = purified_distance(&rho, &sigma).unwrap();
            assert!(td <= pd + 1e-9);
            assert!(pd <= (2.0 * td).sqrt() + 1e-9);
        }
    }

    #[test]
    fn trace_distance_monotone_under_partial_trace() {
        let mut rng = StdRng::seed_from_u64(37);
        for _ in 0..25 {
            let rho = random_density(4, &mut rng);
            let sigma = random_density(4, &mut rng);
            let full = rho.base().sub(sigma.base()).unwrap();
            let ra = partial_trace(rho.base(), &[2, 2], &[0]).unwrap();
            let sa = partial_trace(sigma.base(), &[2, 2], &[0]).unwrap();
            let red = ra.sub(&sa).unwrap();
            assert!(trace_norm(&red).unwrap() <= trace_norm(&full).unwrap() + 1e-9);
        }
    }

    #[test]
    fn positive_part_projector_cases() {
        let mut rng = StdRng::seed_from_u64(41);
        let rho = random_density(3, &mut rng);
        let p = positive_part_projector(rho.base()).unwrap();
        // Full-support PSD operator: projector is the identity.
        assert!(p.sub(&HermitianOperator::identity(3)).unwrap().max_abs_entry() < 1e-9);

        let a = HermitianOperator::from_diagonal(&[1.0, -1.0]);
        let p = positive_part_projector(&a).unwrap();
        assert!(p.sub(&HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap().max_abs_entry() < 1e-12);
    }

    #[test]
    fn positive_part_sign_decomposition() {
        // ψ − 2^{−(m−1)} 𝟙⊗φ style operator: the positive/negative split has
        // the claimed trace signs and the two projectors complete to identity.
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..10 {
            let a = random_hermitian(4, &mut rng);
            let plus = positive_part_projector(&a).unwrap();
            let minus = HermitianOperator::identity(4).sub(&plus).unwrap();
            let tp: f64 = matmul(&plus, &a).diagonal().iter().map(|z| z.re).sum();
            let tm: f64 = matmul(&minus, &a).diagonal().iter().map(|z| z.re).sum();
            assert!(tp >= -1e-9);
            assert!(tm <= 1e-9);
            let sum = plus.add(&minus).unwrap();
            assert!(sum.sub(&HermitianOperator::identity(4)).unwrap().max_abs_entry() < 1e-9);
            // Idempotence.
            let pp = HermitianOperator::new(matmul(&plus, &plus)).unwrap();
            assert!(pp.sub(&plus).unwrap().max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn density_validation() {
        let bad = HermitianOperator::from_diagonal(&[1.0, -0.5]);
        assert!(DensityOperator::new(bad, false).is_err());
        let sub = HermitianOperator::from_diagonal(&[0.3, 0.2]);
        let s = DensityOperator::new(sub, false).unwrap();
        assert!(!s.is_normalized());
        let not_one = HermitianOperator::from_diagonal(&[0.3, 0.2]);
        assert!(DensityOperator::new(not_one, true).is_err());
    }

    #[test]
    fn hermiticity_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(HermitianOperator::new(m).is_err());
    }
}
