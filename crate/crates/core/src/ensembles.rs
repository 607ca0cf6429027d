//! Seeded samplers for the matrix ensembles: Ginibre, Haar orthogonal
//! (QR of Ginibre with the sign correction that makes the distribution
//! Haar), truncated orthogonal blocks, and log-Beta draws built from
//! Gaussian norm ratios.
//!
//! Every sampler is a pure function of its arguments and seed, so repeated
//! calls with the same inputs are bit-identical and calls from multiple
//! threads need no synchronization.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 64-bit seed identifying one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// The stream generator for this seed. ChaCha is used for its
    /// cross-platform determinism.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// Description of a product ensemble: truncation size `n` and the
/// truncation depths `l_1..l_N` of the individual factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    n: usize,
    truncations: Vec<usize>,
}

impl EnsembleSpec {
    pub fn new(n: usize, truncations: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("truncation size n must be >= 1"));
        }
        if truncations.is_empty() {
            return Err(Error::invalid("at least one factor is required"));
        }
        Ok(EnsembleSpec { n, truncations })
    }

    /// All factors share the same truncation depth `l`.
    pub fn uniform(n: usize, l: usize, num_factors: usize) -> Result<Self> {
        Self::new(n, vec![l; num_factors])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of factors in the product.
    pub fn num_factors(&self) -> usize {
        self.truncations.len()
    }

    pub fn truncations(&self) -> &[usize] {
        &self.truncations
    }

    /// Smallest truncation depth over the factors.
    pub fn min_truncation(&self) -> usize {
        *self.truncations.iter().min().expect("nonempty")
    }

    /// Largest truncation depth over the factors.
    pub fn max_truncation(&self) -> usize {
        *self.truncations.iter().max().expect("nonempty")
    }
}

/// An ordered set of `k` orthonormal columns in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: DMatrix<f64>,
}

impl Frame {
    /// Wraps a matrix whose columns are orthonormal to within `1e-12`.
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let k = columns.ncols();
        if k == 0 || k > columns.nrows() {
            return Err(Error::invalid("frame size k must satisfy 1 <= k <= n"));
        }
        let gram = columns.transpose() * &columns;
        let mut err = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram[(i, j)] - target).abs());
            }
        }
        if err > 1e-12 {
            return Err(Error::invalid(format!(
                "columns are not orthonormal (max deviation {err:.3e})"
            )));
        }
        Ok(Frame { columns })
    }

    /// The first `k` standard basis vectors of `R^n`.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "frame size k={k} must satisfy 1 <= k <= n={n}"
            )));
        }
        let mut columns = DMatrix::zeros(n, k);
        for i in 0..k {
            columns[(i, i)] = 1.0;
        }
        Ok(Frame { columns })
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn k(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }
}

/// Fills a rows x cols matrix with i.i.d. standard normal entries, drawn
/// in row-major order.
pub fn ginibre_with<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let x: f64 = rng.sample(StandardNormal);
        entries.push(x);
    }
    DMatrix::from_row_slice(rows, cols, &entries)
}

/// Ginibre matrix: i.i.d. standard real Gaussian entries.
pub fn sample_ginibre(rows: usize, cols: usize, seed: Seed) -> Result<DMatrix<f64>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("matrix dimensions must be >= 1"));
    }
    Ok(ginibre_with(rows, cols, &mut seed.rng()))
}

/// Haar orthogonal matrix via QR of a Ginibre matrix. Plain QR is not
/// Haar-distributed; each column of Q is flipped so that the corresponding
/// diagonal entry of R is positive, which restores Haar measure.
pub fn haar_orthogonal_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = ginibre_with(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..dim {
        if r[(i, i)] < 0.0 {
            for row in 0..dim {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    q
}

/// Haar-distributed orthogonal matrix of the given dimension.
pub fn sample_haar_orthogonal(dim: usize, seed: Seed) -> Result<DMatrix<f64>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    Ok(haar_orthogonal_with(dim, &mut seed.rng()))
}

/// Top-left n x n block of a Haar orthogonal (n+l) x (n+l) matrix.
pub fn truncated_orthogonal_with<R: Rng + ?Sized>(n: usize, l: usize, rng: &mut R) -> DMatrix<f64> {
    let full = haar_orthogonal_with(n + l, rng);
    full.view((0, 0), (n, n)).into_owned()
}

/// Truncated orthogonal matrix: the top n x n block of a Haar orthogonal
/// matrix of size (n+l) x (n+l).
pub fn sample_truncated_orthogonal(n: usize, l: usize, seed: Seed) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::invalid("truncation size n must be >= 1"));
    }
    Ok(truncated_orthogonal_with(n, l, &mut seed.rng()))
}

/// One draw of log Beta(n/2, l/2) as the log of a Gaussian norm ratio:
/// (x_1^2 + .. + x_n^2) / ||x||^2 for an (n+l)-vector x of standard
/// normals. No Gamma sampler involved. `l = 0` returns exactly 0.
pub fn log_beta_with<R: Rng + ?Sized>(n: usize, l: usize, rng: &mut R) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let mut head = 0.0f64;
    for _ in 0..n {
        let x: f64 = rng.sample(StandardNormal);
        head += x * x;
    }
    let mut tail = 0.0f64;
    for _ in 0..l {
        let x: f64 = rng.sample(StandardNormal);
        tail += x * x;
    }
    head.ln() - (head + tail).ln()
}

/// Seeded draw of log Beta(n/2, l/2). The l = 0 case is the point mass at
/// Beta value 1, so the log is exactly zero.
pub fn sample_log_beta(n: usize, l: usize, seed: Seed) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    Ok(log_beta_with(n, l, &mut seed.rng()))
}

/// Max-norm deviation of Q^T Q from the identity.
pub fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let p = q.transpose() * q;
    let mut err = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((p[(i, j)] - target).abs());
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ginibre_rejects_zero_dimension() {
        assert!(sample_ginibre(0, 3, Seed(1)).is_err());
        assert!(sample_ginibre(3, 0, Seed(1)).is_err());
        assert!(sample_haar_orthogonal(0, Seed(1)).is_err());
        assert!(sample_truncated_orthogonal(0, 2, Seed(1)).is_err());
        assert!(sample_log_beta(0, 2, Seed(1)).is_err());
    }

    #[test]
    fn ginibre_is_deterministic() {
        let a = sample_ginibre(1, 1, Seed(42)).unwrap();
        let b = sample_ginibre(1, 1, Seed(42)).unwrap();
        assert_eq!(a[(0, 0)].to_bits(), b[(0, 0)].to_bits());

        let a = sample_ginibre(7, 5, Seed(9)).unwrap();
        let b = sample_ginibre(7, 5, Seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ginibre_moments_match_standard_normal() {
        let m = sample_ginibre(400, 250, Seed(3)).unwrap();
        let n = (m.nrows() * m.ncols()) as f64;
        let mean = m.iter().sum::<f64>() / n;
        let var = m.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() <= 3.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() <= 3.0 * (2.0 / n).sqrt(), "var {var}");
    }

    #[test]
    fn haar_dim_one_is_fair_sign() {
        let mut plus = 0usize;
        for s in 0..10_000u64 {
            let q = sample_haar_orthogonal(1, Seed(s)).unwrap();
            let v = q[(0, 0)];
            assert!((v.abs() - 1.0).abs() < 1e-12);
            if v > 0.0 {
                plus += 1;
            }
        }
        let freq = plus as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "sign frequency {freq}");
    }

    #[test]
    fn haar_is_orthogonal() {
        for dim in [1, 2, 3, 8, 33, 64] {
            let q = sample_haar_orthogonal(dim, Seed(dim as u64)).unwrap();
            assert!(orthogonality_defect(&q) <= 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn haar_sign_fix_removes_entry_bias() {
        // A naive QR without the sign correction gives E[Q_11] around 0.5
        // at dim = 2; Haar measure forces mean zero.
        let draws = 10_000;
        let mut sum = 0.0;
        for s in 0..draws {
            let q = sample_haar_orthogonal(2, Seed(s)).unwrap();
            sum += q[(0, 0)];
        }
        let mean = sum / draws as f64;
        // Var Q_11 = 1/2 at dim = 2.
        let se = (0.5f64 / draws as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn haar_entry_second_moment() {
        let dim = 8;
        let draws = 100_000u64;
        let mut sum = 0.0;
        let mut rng = Seed(17).rng();
        for _ in 0..draws {
            let q = haar_orthogonal_with(dim, &mut rng);
            sum += q[(0, 0)] * q[(0, 0)];
        }
        let mean = sum / draws as f64;
        // E Q_11^4 = 3 / (dim (dim + 2)) for Haar O(dim).
        let var = 3.0 / (dim as f64 * (dim as f64 + 2.0)) - (1.0 / dim as f64).powi(2);
        let se = (var / draws as f64).sqrt();
        assert!((mean - 1.0 / dim as f64).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn truncated_with_zero_depth_is_orthogonal() {
        let a = sample_truncated_orthogonal(5, 0, Seed(8)).unwrap();
        assert!(orthogonality_defect(&a) <= 1e-10);
    }

    #[test]
    fn truncated_singular_values_at_most_one() {
        for s in 0..50u64 {
            let a = sample_truncated_orthogonal(4, 3, Seed(s)).unwrap();
            let svals = a.singular_values();
            for v in svals.iter() {
                assert!(*v <= 1.0 + 1e-10, "singular value {v}");
            }
        }
    }

    #[test]
    fn log_beta_zero_depth_is_exactly_zero() {
        for s in 0..5u64 {
            assert_eq!(sample_log_beta(3, 0, Seed(s)).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_beta_mean_matches_log_uniform() {
        // Beta(1, 1) is Uniform(0, 1); E log U = -1, Var log U = 1.
        let draws = 100_000;
        let mut rng = Seed(5).rng();
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += log_beta_with(2, 2, &mut rng);
        }
        let mean = sum / draws as f64;
        let se = (1.0f64 / draws as f64).sqrt();
        assert!((mean + 1.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn log_beta_mean_matches_digamma_difference() {
        // E log Beta(2, 2) = psi(2) - psi(4) = -(1/2 + 1/3) = -5/6.
        let draws = 100_000;
        let mut rng = Seed(6).rng();
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += log_beta_with(4, 4, &mut rng);
        }
        let mean = sum / draws as f64;
        // Var log Beta(2, 2) = psi_1(2) - psi_1(4) = 13/36.
        let se = (13.0f64 / 36.0 / draws as f64).sqrt();
        assert!((mean + 5.0 / 6.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn canonical_frame_shapes() {
        let e1 = Frame::canonical(3, 1).unwrap();
        assert_eq!(e1.columns().column(0).as_slice(), &[1.0, 0.0, 0.0]);

        let id = Frame::canonical(3, 3).unwrap();
        assert_eq!(id.columns(), &DMatrix::<f64>::identity(3, 3));

        assert!(Frame::canonical(2, 3).is_err());
    }

    #[test]
    fn frame_rejects_non_orthonormal_columns() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(Frame::new(m).is_err());
    }

    #[test]
    fn ensemble_spec_accessors() {
        let spec = EnsembleSpec::new(3, vec![2, 5, 1]).unwrap();
        assert_eq!(spec.n(), 3);
        assert_eq!(spec.num_factors(), 3);
        assert_eq!(spec.min_truncation(), 1);
        assert_eq!(spec.max_truncation(), 5);
        assert!(EnsembleSpec::new(0, vec![1]).is_err());
        assert!(EnsembleSpec::new(2, vec![]).is_err());
    }
}
