//! Polynomial moments of Haar orthogonal matrix entries and the exact /
//! Monte Carlo moments of the truncated-block Gram determinant.

use std::collections::HashMap;

use itertools::Itertools;
use num::rational::BigRational;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::ensembles::{haar_orthogonal_with, Seed};
use crate::error::{Error, Result};
use crate::stats::{central_moments, compensated_sum, EmpiricalSample};

use super::matching::PairMatching;
use super::table::{WeingartenTable, WeingartenTableExact};

/// Entry pattern for E[g_{r(1)c(1)} g_{r(2)c(2)} ...] over Haar O(m);
/// indices are 1-based in 1..=m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub row_indices: Vec<usize>,
    pub col_indices: Vec<usize>,
}

/// Longest entry product supported by the exact evaluator.
pub const MAX_MOMENT_FACTORS: usize = 8;

/// Exact mixed moment of Haar orthogonal entries: the sum over pairs of
/// matchings of Wg(coset type) times the row/column coincidence indicators.
/// Odd-length products integrate to zero by the sign symmetry of Haar
/// measure; that case returns 0 rather than an error.
pub fn orthogonal_moment(query: &MomentQuery, m: usize) -> Result<f64> {
    let rows = &query.row_indices;
    let cols = &query.col_indices;
    if rows.len() != cols.len() {
        return Err(Error::invalid(format!(
            "row and column index lists differ in length: {} vs {}",
            rows.len(),
            cols.len()
        )));
    }
    if rows.is_empty() {
        return Err(Error::invalid("empty moment query"));
    }
    if rows.len() > MAX_MOMENT_FACTORS {
        return Err(Error::invalid(format!(
            "at most {MAX_MOMENT_FACTORS} entry factors are supported, got {}",
            rows.len()
        )));
    }
    if m == 0 {
        return Err(Error::invalid("ambient dimension must be >= 1"));
    }
    for &idx in rows.iter().chain(cols.iter()) {
        if idx == 0 || idx > m {
            return Err(Error::invalid(format!(
                "index {idx} outside 1..={m}"
            )));
        }
    }
    if rows.len() % 2 == 1 {
        return Ok(0.0);
    }
    let table = WeingartenTable::new(rows.len() / 2, m)?;
    Ok(moment_from_table(rows, cols, &table))
}

fn matching_survives(matching: &PairMatching, indices: &[usize]) -> bool {
    matching
        .pairs()
        .iter()
        .all(|&(a, b)| indices[a] == indices[b])
}

fn moment_from_table(rows: &[usize], cols: &[usize], table: &WeingartenTable) -> f64 {
    let matchings = table.matchings();
    let row_hits: Vec<usize> = (0..matchings.len())
        .filter(|&i| matching_survives(&matchings[i], rows))
        .collect();
    if row_hits.is_empty() {
        return 0.0;
    }
    let col_hits: Vec<usize> = (0..matchings.len())
        .filter(|&i| matching_survives(&matchings[i], cols))
        .collect();
    let mut total = 0.0;
    for &a in &row_hits {
        for &b in &col_hits {
            total += table.value(a, b);
        }
    }
    total
}

/// Relabels indices by first occurrence so that equal coincidence patterns
/// share a cache key.
fn canonical_pattern(indices: &[usize]) -> Vec<u8> {
    let mut seen: Vec<usize> = Vec::new();
    indices
        .iter()
        .map(|&v| {
            if let Some(pos) = seen.iter().position(|&x| x == v) {
                pos as u8
            } else {
                seen.push(v);
                (seen.len() - 1) as u8
            }
        })
        .collect()
}

/// Memoizing evaluator for the Haar entry moments appearing in the
/// determinant expansion. The underlying integral depends only on the
/// coincidence patterns of the row and column index lists, so results are
/// cached per canonical pattern.
struct MomentEvaluator<'a, T, F>
where
    F: Fn(usize, usize) -> T,
{
    matchings: &'a [PairMatching],
    wg: F,
    cache: HashMap<(Vec<u8>, Vec<u8>), T>,
}

impl<'a, T, F> MomentEvaluator<'a, T, F>
where
    T: Clone + Zero,
    F: Fn(usize, usize) -> T,
{
    fn new(matchings: &'a [PairMatching], wg: F) -> Self {
        MomentEvaluator {
            matchings,
            wg,
            cache: HashMap::new(),
        }
    }

    fn moment(&mut self, rows: &[usize], cols: &[usize]) -> T {
        let key = (canonical_pattern(rows), canonical_pattern(cols));
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let row_hits: Vec<usize> = (0..self.matchings.len())
            .filter(|&i| matching_survives(&self.matchings[i], rows))
            .collect();
        let col_hits: Vec<usize> = (0..self.matchings.len())
            .filter(|&i| matching_survives(&self.matchings[i], cols))
            .collect();
        let mut total = T::zero();
        for &a in &row_hits {
            for &b in &col_hits {
                total = total + (self.wg)(a, b);
            }
        }
        self.cache.insert(key, total.clone());
        total
    }
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

fn validate_det_moment_args(k: usize, n: usize, m: usize, p: usize) -> Result<()> {
    if k == 0 || k > n || n > m {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n <= m, got k={k}, n={n}, m={m}"
        )));
    }
    if m > 64 {
        return Err(Error::invalid(format!(
            "brute-force determinant moments capped at m <= 64, got {m}"
        )));
    }
    match p {
        1 if k <= 3 => Ok(()),
        2 if k <= 2 => Ok(()),
        1 | 2 => Err(Error::invalid(format!(
            "k={k} too large for moment order p={p} (k <= 3 for p=1, k <= 2 for p=2)"
        ))),
        _ => Err(Error::invalid(format!("moment order p must be 1 or 2, got {p}"))),
    }
}

/// Brute-force sum over permutations and distinct row tuples: the signed
/// expansion of E[Z^p] for Z = det(B^T B), B the first k columns of the top
/// n x m block of a Haar orthogonal matrix.
fn det_moment_sum<T, F>(
    k: usize,
    n: usize,
    p: usize,
    evaluator: &mut MomentEvaluator<'_, T, F>,
) -> T
where
    T: Clone + Zero + std::ops::Sub<Output = T>,
    F: Fn(usize, usize) -> T,
{
    let perms: Vec<Vec<usize>> = (0..k).permutations(k).collect();
    let odd: Vec<bool> = perms.iter().map(|s| permutation_is_odd(s)).collect();
    let tuples: Vec<Vec<usize>> = (0..n).permutations(k).collect();
    let mut total = T::zero();
    match p {
        1 => {
            let mut rows = vec![0usize; 2 * k];
            let mut cols = vec![0usize; 2 * k];
            for (sigma, &sigma_odd) in perms.iter().zip(&odd) {
                for tuple in &tuples {
                    for i in 0..k {
                        rows[2 * i] = tuple[i];
                        rows[2 * i + 1] = tuple[i];
                        cols[2 * i] = i;
                        cols[2 * i + 1] = sigma[i];
                    }
                    let term = evaluator.moment(&rows, &cols);
                    total = if sigma_odd { total - term } else { total + term };
                }
            }
        }
        2 => {
            let mut rows = vec![0usize; 4 * k];
            let mut cols = vec![0usize; 4 * k];
            for (sigma, &sigma_odd) in perms.iter().zip(&odd) {
                for (tau, &tau_odd) in perms.iter().zip(&odd) {
                    let negate = sigma_odd != tau_odd;
                    for i in 0..k {
                        cols[2 * i] = i;
                        cols[2 * i + 1] = sigma[i];
                        cols[2 * k + 2 * i] = i;
                        cols[2 * k + 2 * i + 1] = tau[i];
                    }
                    for tuple_a in &tuples {
                        for i in 0..k {
                            rows[2 * i] = tuple_a[i];
                            rows[2 * i + 1] = tuple_a[i];
                        }
                        for tuple_b in &tuples {
                            for i in 0..k {
                                rows[2 * k + 2 * i] = tuple_b[i];
                                rows[2 * k + 2 * i + 1] = tuple_b[i];
                            }
                            let term = evaluator.moment(&rows, &cols);
                            total = if negate { total - term } else { total + term };
                        }
                    }
                }
            }
        }
        _ => unreachable!("validated"),
    }
    total
}

/// Exact E[Z^p] for the k x k Gram determinant of the first k columns of
/// the top block of a Haar O(m) matrix, with n rows kept.
pub fn det_gram_moment_exact(k: usize, n: usize, m: usize, p: usize) -> Result<f64> {
    validate_det_moment_args(k, n, m, p)?;
    let table = WeingartenTable::new(k * p, m)?;
    let mut evaluator = MomentEvaluator::new(table.matchings(), |a, b| table.value(a, b));
    Ok(det_moment_sum(k, n, p, &mut evaluator))
}

/// Exact-rational E[Z^p]; same expansion in BigRational arithmetic. Used
/// where exact equality matters (the m = n case is identically 1).
pub fn det_gram_moment_exact_rational(
    k: usize,
    n: usize,
    m: usize,
    p: usize,
) -> Result<BigRational> {
    validate_det_moment_args(k, n, m, p)?;
    if n > 16 {
        return Err(Error::invalid(format!(
            "rational determinant moments capped at n <= 16, got {n}"
        )));
    }
    let table = WeingartenTableExact::new(k * p, m)?;
    let mut evaluator = MomentEvaluator::new(table.matchings(), |a, b| table.value(a, b).clone());
    Ok(det_moment_sum(k, n, p, &mut evaluator))
}

/// Exact Var Z = E Z^2 - (E Z)^2 at truncation n within ambient dimension m.
pub fn det_gram_variance_exact(k: usize, n: usize, m: usize) -> Result<f64> {
    let first = det_gram_moment_exact(k, n, m, 1)?;
    let second = det_gram_moment_exact(k, n, m, 2)?;
    Ok(second - first * first)
}

/// Monte Carlo moments of Z = det(B^T B) with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetMomentMc {
    pub mean: f64,
    pub variance: f64,
    pub mu4: f64,
    pub se_mean: f64,
}

/// Samples Z over `trials` independent Haar O(n+l) draws.
pub fn det_gram_moment_mc(
    k: usize,
    n: usize,
    l: usize,
    trials: usize,
    seed: Seed,
) -> Result<DetMomentMc> {
    if trials < 100 {
        return Err(Error::invalid(format!(
            "at least 100 trials required, got {trials}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let m = n + l;
    let mut rng = seed.rng();
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials {
        let full = haar_orthogonal_with(m, &mut rng);
        let block = full.view((0, 0), (n, k));
        let gram = block.transpose() * block;
        values.push(gram.determinant());
    }
    let mean = compensated_sum(values.iter().copied()) / trials as f64;
    let sample = EmpiricalSample::new(values)?;
    let variance = central_moments(&sample, 2)?;
    let mu4 = central_moments(&sample, 4)?;
    Ok(DetMomentMc {
        mean,
        variance,
        mu4,
        se_mean: (variance / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num::bigint::BigInt;
    use num::One;

    fn query(rows: &[usize], cols: &[usize]) -> MomentQuery {
        MomentQuery {
            row_indices: rows.to_vec(),
            col_indices: cols.to_vec(),
        }
    }

    #[test]
    fn second_moment_of_single_entry() {
        for m in [2usize, 5, 9] {
            let v = orthogonal_moment(&query(&[1, 1], &[1, 1]), m).unwrap();
            assert_abs_diff_eq!(v, 1.0 / m as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn fourth_moment_diagonal_pattern() {
        // E[g_11^2 g_22^2] at m = 6 equals the diagonal Weingarten entry.
        let v = orthogonal_moment(&query(&[1, 1, 2, 2], &[1, 1, 2, 2]), 6).unwrap();
        assert_abs_diff_eq!(v, 7.0 / 240.0, epsilon = 1e-13);
    }

    #[test]
    fn fourth_moment_cross_pattern() {
        // E[g_11 g_12 g_21 g_22] at m = 6 equals the off-diagonal entry.
        let v = orthogonal_moment(&query(&[1, 1, 2, 2], &[1, 2, 1, 2]), 6).unwrap();
        assert_abs_diff_eq!(v, -1.0 / 240.0, epsilon = 1e-13);
    }

    #[test]
    fn odd_moments_vanish() {
        assert_eq!(orthogonal_moment(&query(&[1], &[1]), 4).unwrap(), 0.0);
        assert_eq!(
            orthogonal_moment(&query(&[1, 1, 2], &[1, 1, 2]), 4).unwrap(),
            0.0
        );
    }

    #[test]
    fn unmatched_rows_vanish() {
        let v = orthogonal_moment(&query(&[1, 2, 3, 4], &[1, 1, 2, 2]), 6).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn row_normalization_closure() {
        // sum_j E[g_11 g_1j ... ] with the pair (1,1),(j,j): sums to 1.
        let m = 7;
        let total: f64 = (1..=m)
            .map(|j| orthogonal_moment(&query(&[1, 1], &[j, j]), m).unwrap())
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn moment_query_validation() {
        assert!(orthogonal_moment(&query(&[1, 1], &[1]), 4).is_err());
        assert!(orthogonal_moment(&query(&[], &[]), 4).is_err());
        assert!(orthogonal_moment(&query(&[0, 1], &[1, 1]), 4).is_err());
        assert!(orthogonal_moment(&query(&[1, 5], &[1, 1]), 4).is_err());
        assert!(orthogonal_moment(
            &query(&[1; 10], &[1; 10]),
            4
        )
        .is_err());
    }

    #[test]
    fn det_moment_k1_is_row_fraction() {
        for (n, m) in [(2usize, 4usize), (3, 5), (4, 4)] {
            let v = det_gram_moment_exact(1, n, m, 1).unwrap();
            assert_abs_diff_eq!(v, n as f64 / m as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn det_moment_no_truncation_is_one() {
        for (k, n, p) in [(1usize, 3usize, 1usize), (1, 3, 2), (2, 4, 1), (2, 4, 2)] {
            let v = det_gram_moment_exact(k, n, n, p).unwrap();
            assert!((v - 1.0).abs() <= 1e-12, "k={k} n={n} p={p}: {v}");
        }
    }

    #[test]
    fn det_moment_rational_no_truncation_is_exactly_one() {
        for (k, n, p) in [(1usize, 4usize, 1usize), (1, 4, 2), (2, 5, 1), (2, 5, 2)] {
            let v = det_gram_moment_exact_rational(k, n, n, p).unwrap();
            assert!(v.is_one(), "k={k} n={n} p={p}: {v}");
        }
    }

    #[test]
    fn det_moment_k2_closed_form() {
        // E Z = n(n-1) / (m(m-1)).
        let v = det_gram_moment_exact(2, 6, 8, 1).unwrap();
        assert_abs_diff_eq!(v, 15.0 / 28.0, epsilon = 1e-12);
        let r = det_gram_moment_exact_rational(2, 6, 8, 1).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(15), BigInt::from(28)));
    }

    #[test]
    fn det_moment_argument_validation() {
        assert!(det_gram_moment_exact(0, 2, 4, 1).is_err());
        assert!(det_gram_moment_exact(3, 2, 4, 1).is_err());
        assert!(det_gram_moment_exact(2, 4, 3, 1).is_err());
        assert!(det_gram_moment_exact(3, 4, 6, 2).is_err());
        assert!(det_gram_moment_exact(4, 5, 8, 1).is_err());
        assert!(det_gram_moment_exact(2, 4, 6, 3).is_err());
    }

    #[test]
    fn det_moment_mc_orthogonal_case() {
        let r = det_gram_moment_mc(2, 4, 0, 200, Seed(3)).unwrap();
        assert_abs_diff_eq!(r.mean, 1.0, epsilon = 1e-12);
        assert!(r.variance <= 1e-24);
    }

    #[test]
    fn det_moment_mc_matches_exact_mean() {
        let r = det_gram_moment_mc(1, 4, 4, 20_000, Seed(8)).unwrap();
        assert!((r.mean - 0.5).abs() <= 3.0 * r.se_mean, "mean {}", r.mean);
    }

    #[test]
    fn det_moment_mc_validation() {
        assert!(det_gram_moment_mc(1, 2, 1, 50, Seed(0)).is_err());
        assert!(det_gram_moment_mc(3, 2, 1, 200, Seed(0)).is_err());
    }
}
