//! Weighted Hodge Laplacians on the structural simplex and their
//! w-orthonormal eigenbases.
//!
//! With `P_n` the boundary matrix and `W_n` the diagonal weight matrix of
//! dimension `n`, the adjoint of the boundary map with respect to the
//! weighted inner product is `δ_n = W_{n+1}^{-1} P_{n+1}ᵀ W_n`, and
//!
//! ```text
//! L_n = ∂_{n+1} δ_n + δ_{n−1} ∂_n
//!     = P_{n+1} W_{n+1}^{-1} P_{n+1}ᵀ W_n  +  W_n^{-1} P_nᵀ W_{n−1} P_n
//! ```
//!
//! Both terms have the form `W_n^{-1} E` with `E` symmetric, which is what
//! makes `L_n` self-adjoint for the weighted inner product. The code keeps
//! that symmetric "energy" matrix around and derives everything from it, so
//! the eigenproblem can be solved by a symmetric solver after whitening with
//! `W_n^{±1/2}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complex::{boundary_matrix, simplex_count, StructuralSimplex};
use crate::error::{Error, Result};

/// Largest operator dimension handled with dense matrices.
pub const MAX_DENSE_DIM: usize = 5000;

/// Default relative threshold below which an eigenvalue counts as zero.
pub const DEFAULT_KERNEL_TOLERANCE: f64 = 1e-8;

const EIGEN_EPS: f64 = f64::EPSILON;
const EIGEN_MAX_ITER: usize = 100_000;

/// Diagonal inner product `⟨σ, σ'⟩ = w(σ) [σ = σ']` on `n`-signals.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInnerProduct {
    n: usize,
    weights: DVector<f64>,
}

impl WeightedInnerProduct {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("inner product needs at least one weight"));
        }
        if let Some(pos) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::validation(format!(
                "inner-product weight {} at index {pos} is not strictly positive",
                weights[pos]
            )));
        }
        Ok(Self {
            n,
            weights: DVector::from_vec(weights),
        })
    }

    /// The inner product of dimension `n` carried by a structural simplex.
    pub fn from_structural(s: &StructuralSimplex, n: usize) -> Result<Self> {
        if n > s.top_dimension() {
            return Err(Error::validation(format!(
                "dimension {n} out of range for the {}-simplex",
                s.top_dimension()
            )));
        }
        Self::new(n, s.weights(n).to_vec())
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.weights)
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .zip(self.weights.iter())
            .map(|((x, y), w)| x * y * w)
            .sum()
    }
}

/// Which matrix expression is used for the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianConvention {
    /// `∂_{n+1} δ_n + δ_{n−1} ∂_n` with the weighted adjoint.
    #[default]
    Derived,
    /// `W_n^{-1} B_nᵀ W_{n+1} B_n + B_{n−1} W_{n−1}^{-1} B_{n−1}ᵀ W_n` read
    /// with `B_n = P_{n+1}ᵀ` (the only reading under which it type-checks).
    /// Kept for comparison only.
    PrintedStep4,
}

impl std::str::FromStr for LaplacianConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "derived" => Ok(Self::Derived),
            "printed-step4" | "printed" => Ok(Self::PrintedStep4),
            other => Err(Error::validation(format!("unknown Laplacian convention {other:?}"))),
        }
    }
}

impl std::fmt::Display for LaplacianConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Derived => "derived",
            Self::PrintedStep4 => "printed-step4",
        })
    }
}

/// Matrix of the `n`-Laplace operator in the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceOperator {
    n: usize,
    convention: LaplacianConvention,
    weights: WeightedInnerProduct,
    up: DMatrix<f64>,
    down: DMatrix<f64>,
    matrix: DMatrix<f64>,
    energy: DMatrix<f64>,
}

impl LaplaceOperator {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn convention(&self) -> LaplacianConvention {
        self.convention
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn up(&self) -> &DMatrix<f64> {
        &self.up
    }

    pub fn down(&self) -> &DMatrix<f64> {
        &self.down
    }

    pub fn inner_product(&self) -> &WeightedInnerProduct {
        &self.weights
    }

    /// The symmetric matrix `W_n L_n`.
    pub fn energy(&self) -> &DMatrix<f64> {
        &self.energy
    }

    /// `‖W L − (W L)ᵀ‖_F / ‖W L‖_F`, computed from the stored `L`.
    pub fn self_adjointness_residual(&self) -> f64 {
        let wl = DMatrix::from_diagonal(self.weights.weights()) * &self.matrix;
        relative_residual(&(&wl - wl.transpose()), &wl)
    }
}

fn relative_residual(diff: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    let scale = reference.norm();
    if scale == 0.0 {
        diff.norm()
    } else {
        diff.norm() / scale
    }
}

/// `A · diag(c) · Aᵀ`, built so that the result is exactly symmetric.
fn weighted_gram(a: &DMatrix<f64>, c: &[f64]) -> DMatrix<f64> {
    let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * c[j]);
    let mut out = &scaled * a.transpose();
    for i in 0..out.nrows() {
        for j in 0..i {
            let v = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn check_capacity(s: &StructuralSimplex, n: usize) -> Result<usize> {
    let top = s.top_dimension();
    if n > top {
        return Err(Error::validation(format!(
            "dimension {n} out of range for the {top}-simplex"
        )));
    }
    let d = simplex_count(top, n);
    if d > MAX_DENSE_DIM {
        return Err(Error::Capacity(format!(
            "{d} simplices of dimension {n} exceed the dense limit of {MAX_DENSE_DIM}"
        )));
    }
    Ok(d)
}

/// Matrix of the adjoint `δ_n: C_n → C_{n+1}`, `W_{n+1}^{-1} P_{n+1}ᵀ W_n`.
pub fn adjoint_matrix(s: &StructuralSimplex, n: usize) -> Result<DMatrix<f64>> {
    let top = s.top_dimension();
    if n >= top {
        return Err(Error::validation(format!(
            "no adjoint in dimension {n}: the {top}-simplex has no simplices of dimension {}",
            n + 1
        )));
    }
    check_capacity(s, n + 1)?;
    let p = boundary_matrix(top, n + 1)?.to_dense();
    let (wn, wn1) = (s.weights(n), s.weights(n + 1));
    Ok(DMatrix::from_fn(p.ncols(), p.nrows(), |i, j| {
        p[(j, i)] * wn[j] / wn1[i]
    }))
}

/// The weighted `n`-Laplace operator.
pub fn laplacian(s: &StructuralSimplex, n: usize) -> Result<LaplaceOperator> {
    laplacian_with(s, n, LaplacianConvention::Derived)
}

pub fn laplacian_with(
    s: &StructuralSimplex,
    n: usize,
    convention: LaplacianConvention,
) -> Result<LaplaceOperator> {
    let d = check_capacity(s, n)?;
    let top = s.top_dimension();
    let wn = s.weights(n);
    let inv = |w: &[f64]| w.iter().map(|x| 1.0 / x).collect::<Vec<_>>();

    // symmetric parts E_up, E_down with L = W_n^{-1} E
    let energy_up = if n < top {
        let p_up = boundary_matrix(top, n + 1)?.to_dense();
        let inner = match convention {
            LaplacianConvention::Derived => weighted_gram(&p_up, &inv(s.weights(n + 1))),
            LaplacianConvention::PrintedStep4 => weighted_gram(&p_up, s.weights(n + 1)),
        };
        match convention {
            // W_n P W^{-1} Pᵀ W_n
            LaplacianConvention::Derived => {
                DMatrix::from_fn(d, d, |i, j| wn[i] * inner[(i, j)] * wn[j])
            }
            // P W_{n+1} Pᵀ
            LaplacianConvention::PrintedStep4 => inner,
        }
    } else {
        DMatrix::zeros(d, d)
    };
    let energy_down = if n > 0 {
        let p_down_t = boundary_matrix(top, n)?.to_dense().transpose();
        match convention {
            // Pᵀ W_{n−1} P
            LaplacianConvention::Derived => weighted_gram(&p_down_t, s.weights(n - 1)),
            // W_n Pᵀ W_{n−1}^{-1} P W_n
            LaplacianConvention::PrintedStep4 => {
                let inner = weighted_gram(&p_down_t, &inv(s.weights(n - 1)));
                DMatrix::from_fn(d, d, |i, j| wn[i] * inner[(i, j)] * wn[j])
            }
        }
    } else {
        DMatrix::zeros(d, d)
    };

    let unweight = |e: &DMatrix<f64>| DMatrix::from_fn(d, d, |i, j| e[(i, j)] / wn[i]);
    let up = unweight(&energy_up);
    let down = unweight(&energy_down);
    let matrix = &up + &down;
    Ok(LaplaceOperator {
        n,
        convention,
        weights: WeightedInnerProduct::new(n, wn.to_vec())?,
        up,
        down,
        matrix,
        energy: energy_up + energy_down,
    })
}

/// Residuals certifying a Fourier basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisDiagnostics {
    /// `‖W L − (W L)ᵀ‖ / ‖W L‖`
    pub self_adjointness: f64,
    /// `‖F L F^{-1} − diag(λ)‖ / ‖L‖`
    pub diagonalization: f64,
    /// `‖(F^{-1})ᵀ W F^{-1} − I‖`
    pub orthonormality: f64,
    /// `‖F F^{-1} − I‖`
    pub inverse: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub kernel_dimension: usize,
}

/// A w-orthonormal eigenbasis of a Laplace operator.
///
/// Columns of `inverse` are the eigenvectors; `forward` maps canonical
/// coefficients to Fourier coefficients. Within a degenerate eigenspace the
/// basis is whatever orthonormal basis the symmetric solver returns, so
/// coefficients may be redistributed inside that eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBasis {
    n: usize,
    eigenvalues: DVector<f64>,
    forward: DMatrix<f64>,
    inverse: DMatrix<f64>,
    weights: DVector<f64>,
}

impl FourierBasis {
    /// Reassembles a basis from stored parts, checking shapes.
    pub fn from_parts(
        n: usize,
        eigenvalues: Vec<f64>,
        forward: DMatrix<f64>,
        inverse: DMatrix<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let d = eigenvalues.len();
        if forward.shape() != (d, d) || inverse.shape() != (d, d) || weights.len() != d {
            return Err(Error::validation(format!(
                "inconsistent Fourier basis shapes for {d} eigenvalues"
            )));
        }
        let weights = WeightedInnerProduct::new(n, weights)?.weights;
        Ok(Self {
            n,
            eigenvalues: DVector::from_vec(eigenvalues),
            forward,
            inverse,
            weights,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn forward(&self) -> &DMatrix<f64> {
        &self.forward
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Number of eigenvalues below `tolerance · λ_max`.
    pub fn kernel_dimension(&self, tolerance: f64) -> usize {
        let max = self.eigenvalues.iter().copied().fold(0.0, f64::max);
        self.eigenvalues
            .iter()
            .filter(|&&l| l <= tolerance * max)
            .count()
    }

    /// Residual diagnostics against the operator the basis was built from.
    pub fn diagnostics(&self, laplacian: &LaplaceOperator, kernel_tolerance: f64) -> BasisDiagnostics {
        let d = self.size();
        let l = laplacian.matrix();
        let diag = DMatrix::from_diagonal(&self.eigenvalues);
        let conj = &self.forward * l * &self.inverse;
        let gram = self.inverse.transpose() * DMatrix::from_diagonal(&self.weights) * &self.inverse;
        let ident = DMatrix::<f64>::identity(d, d);
        BasisDiagnostics {
            self_adjointness: laplacian.self_adjointness_residual(),
            diagonalization: relative_residual(&(conj - diag), l),
            orthonormality: (gram - &ident).norm(),
            inverse: (&self.forward * &self.inverse - ident).norm(),
            min_eigenvalue: self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
            max_eigenvalue: self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            kernel_dimension: self.kernel_dimension(kernel_tolerance),
        }
    }
}

/// Diagonalizes `laplacian` with eigenvectors orthonormal for `inner`.
///
/// Whitens to `S = W^{-1/2} (W L) W^{-1/2}`, solves `S = Q Λ Qᵀ` with a
/// symmetric eigensolver and returns `F^{-1} = W^{-1/2} Q`, `F = Qᵀ W^{1/2}`.
/// Eigenvalues are sorted ascending and each eigenvector's first
/// non-negligible entry is made positive.
pub fn fourier_basis(laplacian: &LaplaceOperator, inner: &WeightedInnerProduct) -> Result<FourierBasis> {
    let d = laplacian.size();
    if inner.len() != d || inner.weights() != laplacian.inner_product().weights() {
        return Err(Error::validation(format!(
            "inner product of dimension {} does not match the weights of the {}-Laplacian",
            inner.dimension(),
            laplacian.dimension()
        )));
    }
    let w = inner.weights();
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let e = laplacian.energy();
    let whitened = DMatrix::from_fn(d, d, |i, j| e[(i, j)] / (sqrt_w[i] * sqrt_w[j]));

    let eig = SymmetricEigen::try_new(whitened.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::numerical(format!(
            "symmetric eigensolver did not converge for the {}-Laplacian (size {d}, ‖S‖ = {:e})",
            laplacian.dimension(),
            whitened.norm()
        ))
    })?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let max = order
        .last()
        .map(|&k| eig.eigenvalues[k])
        .unwrap_or(0.0)
        .max(0.0);

    let mut eigenvalues = DVector::zeros(d);
    let mut q = DMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[k];
        if lambda < 0.0 {
            if lambda < -1e-10 * max {
                return Err(Error::numerical(format!(
                    "{}-Laplacian has negative eigenvalue {lambda:e} (λ_max = {max:e})",
                    laplacian.dimension()
                )));
            }
            lambda = 0.0;
        }
        eigenvalues[col] = lambda;
        let v = eig.eigenvectors.column(k);
        let peak = v.amax();
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-10 * peak)
            .map_or(1.0, |x| x.signum());
        q.set_column(col, &(v * sign));
    }

    let inverse = DMatrix::from_fn(d, d, |i, j| q[(i, j)] / sqrt_w[i]);
    let forward = DMatrix::from_fn(d, d, |i, j| q[(j, i)] * sqrt_w[j]);
    Ok(FourierBasis {
        n: laplacian.dimension(),
        eigenvalues,
        forward,
        inverse,
        weights: w.clone(),
    })
}

/// Convenience: Laplacian plus Fourier basis for dimension `n`.
pub fn fourier_basis_for(
    s: &StructuralSimplex,
    n: usize,
    convention: LaplacianConvention,
) -> Result<(LaplaceOperator, FourierBasis)> {
    let l = laplacian_with(s, n, convention)?;
    let inner = WeightedInnerProduct::from_structural(s, n)?;
    let basis = fourier_basis(&l, &inner)?;
    Ok((l, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::enumerate_simplices;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(top: usize, seed: u64) -> StructuralSimplex {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..=top)
            .map(|n| {
                (0..simplex_count(top, n))
                    .map(|_| 10f64.powf(rng.random_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        StructuralSimplex::new(top, weights).unwrap()
    }

    #[test]
    fn unit_adjoint_is_transpose() {
        let s = StructuralSimplex::unit(4).unwrap();
        for n in 0..4 {
            let p = boundary_matrix(4, n + 1).unwrap().to_dense();
            assert_eq!(adjoint_matrix(&s, n).unwrap(), p.transpose());
        }
        assert!(adjoint_matrix(&s, 4).is_err());
    }

    #[test]
    fn adjointness_on_random_vectors() {
        let s = random_simplex(4, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in 0..4 {
            let p = boundary_matrix(4, n + 1).unwrap().to_dense();
            let delta = adjoint_matrix(&s, n).unwrap();
            let wn = WeightedInnerProduct::from_structural(&s, n).unwrap();
            let wn1 = WeightedInnerProduct::from_structural(&s, n + 1).unwrap();
            for _ in 0..100 {
                let a = DVector::from_fn(p.ncols(), |_, _| rng.random_range(-1.0..1.0));
                let b = DVector::from_fn(p.nrows(), |_, _| rng.random_range(-1.0..1.0));
                let lhs = wn.inner(&(&p * &a), &b);
                let rhs = wn1.inner(&a, &(&delta * &b));
                assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn zero_laplacian_of_unit_weights_is_complete_graph() {
        for top in 1..=5 {
            let s = StructuralSimplex::unit(top).unwrap();
            let l = laplacian(&s, 0).unwrap();
            let expected = DMatrix::from_fn(top + 1, top + 1, |i, j| {
                if i == j {
                    top as f64
                } else {
                    -1.0
                }
            });
            assert_eq!(l.matrix(), &expected);
            assert!(l.down().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn unit_weights_reduce_to_combinatorial_hodge() {
        for top in 1..=5 {
            let s = StructuralSimplex::unit(top).unwrap();
            for n in 0..=top {
                let l = laplacian(&s, n).unwrap();
                let d = simplex_count(top, n);
                let mut expected = DMatrix::zeros(d, d);
                if n < top {
                    let p = boundary_matrix(top, n + 1).unwrap().to_dense();
                    expected += &p * p.transpose();
                }
                if n > 0 {
                    let p = boundary_matrix(top, n).unwrap().to_dense();
                    expected += p.transpose() * &p;
                }
                assert_eq!(l.matrix(), &expected);
            }
        }
    }

    #[test]
    fn top_dimension_has_only_down_part() {
        let s = random_simplex(4, 3);
        let l = laplacian(&s, 4).unwrap();
        assert_eq!(l.size(), 1);
        assert_eq!(l.up()[(0, 0)], 0.0);
        assert!(l.down()[(0, 0)] > 0.0);
    }

    #[test]
    fn single_edge_spectrum() {
        let s = StructuralSimplex::unit(1).unwrap();
        let (_, f) = fourier_basis_for(&s, 0, LaplacianConvention::Derived).unwrap();
        assert!(f.eigenvalues()[0].abs() < 1e-14);
        assert!((f.eigenvalues()[1] - 2.0).abs() < 1e-14);
        let k = f.inverse().column(0);
        assert!((k[0] - k[1]).abs() < 1e-14 && k[0] > 0.0);
    }

    #[test]
    fn random_weights_residuals_and_kernel() {
        for seed in 0..5 {
            let s = random_simplex(5, seed);
            for n in 0..=5 {
                let (l, f) = fourier_basis_for(&s, n, LaplacianConvention::Derived).unwrap();
                let diag = f.diagnostics(&l, DEFAULT_KERNEL_TOLERANCE);
                assert!(diag.self_adjointness <= 1e-10, "{diag:?}");
                assert!(diag.diagonalization < 1e-8, "{diag:?}");
                assert!(diag.orthonormality < 1e-8, "{diag:?}");
                assert!(diag.inverse < 1e-10, "{diag:?}");
                assert_eq!(diag.kernel_dimension, usize::from(n == 0));
            }
        }
    }

    #[test]
    fn printed_convention_is_self_adjoint_too() {
        let s = random_simplex(4, 11);
        for n in 0..=4 {
            let (l, f) = fourier_basis_for(&s, n, LaplacianConvention::PrintedStep4).unwrap();
            let diag = f.diagnostics(&l, DEFAULT_KERNEL_TOLERANCE);
            assert!(diag.self_adjointness <= 1e-10);
            assert!(diag.diagonalization < 1e-8);
            assert_eq!(diag.kernel_dimension, usize::from(n == 0));
        }
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let s = random_simplex(4, 5);
        let (_, a) = fourier_basis_for(&s, 2, LaplacianConvention::Derived).unwrap();
        let (_, b) = fourier_basis_for(&s, 2, LaplacianConvention::Derived).unwrap();
        assert_eq!(a, b);
        for c in 0..a.size() {
            let col = a.inverse().column(c);
            let first = col.iter().find(|x| x.abs() > 1e-10 * col.amax()).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn mismatched_inner_product_is_rejected() {
        let s = random_simplex(3, 1);
        let l = laplacian(&s, 1).unwrap();
        let wrong = WeightedInnerProduct::new(1, vec![1.0; 6]).unwrap();
        assert!(fourier_basis(&l, &wrong).is_err());
        assert_eq!(enumerate_simplices(3, 1).unwrap().len(), 6);
    }
}
