//! Weingarten tables for the orthogonal group: the inverse of the matching
//! Gram matrix G[a][b] = m^loops(a,b).
//!
//! The inverse is a class function of the reduced coset type, so the table
//! is built by solving the small linear system on coset-type classes and
//! expanding it back over all matching pairs; entries of equal type are
//! then equal exactly, and the full product values * G is residual-checked
//! against the identity. An exact-rational construction of the same system
//! backs the acceptance-grade identities.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

use super::matching::{
    enumerate_matchings, loops_between, reduced_coset_type, PairMatching, ReducedCosetType,
};

/// Largest pair count for table construction: 105 x 105 at k = 4.
pub const MAX_TABLE_PAIRS: usize = 4;

/// Shared combinatorial layout of a table: matchings, pairwise loop counts,
/// and the coset-type class of every pair.
struct TableLayout {
    matchings: Vec<PairMatching>,
    loops: Vec<Vec<u8>>,
    classes: Vec<ReducedCosetType>,
    type_index: Vec<Vec<usize>>,
}

fn build_layout(k: usize) -> Result<TableLayout> {
    if k == 0 || k > MAX_TABLE_PAIRS {
        return Err(Error::invalid(format!(
            "table pair count k={k} must satisfy 1 <= k <= {MAX_TABLE_PAIRS}"
        )));
    }
    let matchings = enumerate_matchings(k)?;
    let count = matchings.len();
    let mut loops = vec![vec![0u8; count]; count];
    let mut types = vec![vec![ReducedCosetType::empty(); count]; count];
    for a in 0..count {
        for b in 0..count {
            loops[a][b] = loops_between(&matchings[a], &matchings[b])? as u8;
            types[a][b] = reduced_coset_type(&matchings[a], &matchings[b])?;
        }
    }
    let mut class_set: Vec<ReducedCosetType> = types
        .iter()
        .flat_map(|row| row.iter().cloned())
        .collect();
    class_set.sort();
    class_set.dedup();
    let class_ids: BTreeMap<ReducedCosetType, usize> = class_set
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let type_index = types
        .iter()
        .map(|row| row.iter().map(|t| class_ids[t]).collect())
        .collect();
    Ok(TableLayout {
        matchings,
        loops,
        classes: class_set,
        type_index,
    })
}

impl TableLayout {
    /// One representative matching index per class, measured against the
    /// first (identity-ordered) matching.
    fn class_representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.classes.len()];
        for a in 0..self.matchings.len() {
            let class = self.type_index[a][0];
            if reps[class] == usize::MAX {
                reps[class] = a;
            }
        }
        reps
    }

    /// Coefficient matrix of the class system: row tau (via representative
    /// a_tau), column mu: sum over matchings b of type mu of m^loops(a_tau, b).
    /// The unknowns are the Weingarten values per class; the right-hand side
    /// is the identity-row indicator.
    fn class_system<T: Clone + Zero + std::ops::AddAssign>(
        &self,
        power: impl Fn(u8) -> T,
    ) -> (Vec<Vec<T>>, Vec<T>) {
        let reps = self.class_representatives();
        let nc = self.classes.len();
        let mut a = vec![vec![T::zero(); nc]; nc];
        let mut rhs = vec![T::zero(); nc];
        for (tau, &rep) in reps.iter().enumerate() {
            for b in 0..self.matchings.len() {
                let mu = self.type_index[b][0];
                let term = power(self.loops[rep][b]);
                a[tau][mu] += term;
            }
            // delta_{a_tau, canonical}: the canonical matching represents
            // the empty class, so the indicator hits exactly that row.
            // power(0) is the multiplicative unit.
            if rep == 0 {
                rhs[tau] = power(0);
            }
        }
        (a, rhs)
    }
}

/// Gaussian elimination with partial pivoting, usable for both f64 and
/// exact rationals.
fn solve_linear<T>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>>
where
    T: Clone + Signed + PartialOrd,
{
    let n = rhs.len();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].abs();
        for row in col + 1..n {
            let candidate = a[row][col].abs();
            if candidate > best {
                best = candidate;
                pivot = row;
            }
        }
        if best.is_zero() {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / a[col][col].clone();
            for c in col..n {
                let t = factor.clone() * a[col][c].clone();
                a[row][c] = a[row][c].clone() - t;
            }
            let t = factor * rhs[col].clone();
            rhs[row] = rhs[row].clone() - t;
        }
    }
    let mut x = vec![rhs[0].clone(); n];
    for col in (0..n).rev() {
        let mut acc = rhs[col].clone();
        for c in col + 1..n {
            acc = acc - a[col][c].clone() * x[c].clone();
        }
        x[col] = acc / a[col][col].clone();
    }
    Some(x)
}

/// Floating-point Weingarten table at pair count `k` and ambient dimension
/// `m`.
pub struct WeingartenTable {
    k: usize,
    m: usize,
    layout: TableLayout,
    class_values: Vec<f64>,
    residual: f64,
}

impl WeingartenTable {
    /// Builds the table and verifies values * G = I to 1e-10 in max norm.
    /// Requires m >= k (the Gram matrix is singular below that).
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if m < k {
            return Err(Error::invalid(format!(
                "ambient dimension m={m} must be at least the pair count k={k}"
            )));
        }
        let layout = build_layout(k)?;
        let mf = m as f64;
        let (a, rhs) = layout.class_system(|loops| mf.powi(loops as i32));
        let class_values = solve_linear(a, rhs).ok_or(Error::SingularGram {
            k,
            m,
            residual: f64::INFINITY,
        })?;

        let count = layout.matchings.len();
        let mut residual = 0.0f64;
        for a_idx in 0..count {
            for c_idx in 0..count {
                let mut acc = 0.0f64;
                for b_idx in 0..count {
                    acc += class_values[layout.type_index[a_idx][b_idx]]
                        * mf.powi(layout.loops[b_idx][c_idx] as i32);
                }
                let target = if a_idx == c_idx { 1.0 } else { 0.0 };
                residual = residual.max((acc - target).abs());
            }
        }
        if !(residual <= 1e-10) {
            return Err(Error::SingularGram { k, m, residual });
        }
        Ok(WeingartenTable {
            k,
            m,
            layout,
            class_values,
            residual,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matchings(&self) -> &[PairMatching] {
        &self.layout.matchings
    }

    pub fn num_matchings(&self) -> usize {
        self.layout.matchings.len()
    }

    /// Max-norm residual of values * G - I recorded at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Weingarten value for the matching pair (by enumeration index).
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.class_values[self.layout.type_index[a][b]]
    }

    pub fn loops(&self, a: usize, b: usize) -> usize {
        self.layout.loops[a][b] as usize
    }

    pub fn coset_type(&self, a: usize, b: usize) -> &ReducedCosetType {
        &self.layout.classes[self.layout.type_index[a][b]]
    }

    /// Weingarten value indexed by reduced coset type.
    pub fn value_for_type(&self, mu: &ReducedCosetType) -> Result<f64> {
        self.layout
            .classes
            .iter()
            .position(|c| c == mu)
            .map(|i| self.class_values[i])
            .ok_or_else(|| {
                Error::invalid(format!(
                    "coset type {mu} is not realizable at pair count {}",
                    self.k
                ))
            })
    }

    /// Gram entry m^loops(a,b); the matrix the table inverts.
    pub fn gram(&self, a: usize, b: usize) -> f64 {
        (self.m as f64).powi(self.layout.loops[a][b] as i32)
    }
}

/// Exact-rational Weingarten table; same construction in BigRational
/// arithmetic.
pub struct WeingartenTableExact {
    k: usize,
    m: usize,
    layout: TableLayout,
    class_values: Vec<BigRational>,
}

impl WeingartenTableExact {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if m < k {
            return Err(Error::invalid(format!(
                "ambient dimension m={m} must be at least the pair count k={k}"
            )));
        }
        let layout = build_layout(k)?;
        let (a, rhs) = layout.class_system(|loops| {
            BigRational::from_integer(BigInt::from(m).pow(loops as u32))
        });
        let class_values = solve_linear(a, rhs).ok_or(Error::SingularGram {
            k,
            m,
            residual: f64::INFINITY,
        })?;
        let table = WeingartenTableExact {
            k,
            m,
            layout,
            class_values,
        };
        table.verify_identity()?;
        Ok(table)
    }

    /// Exact check of values * G = I on one representative row per class;
    /// the remaining rows follow by the relabeling symmetry that makes the
    /// inverse a class function.
    fn verify_identity(&self) -> Result<()> {
        let count = self.layout.matchings.len();
        let m_big = BigInt::from(self.m);
        for &rep in &self.layout.class_representatives() {
            for c_idx in 0..count {
                let mut acc = BigRational::zero();
                for b_idx in 0..count {
                    let gram = BigRational::from_integer(
                        m_big.pow(self.layout.loops[b_idx][c_idx] as u32),
                    );
                    acc += self.class_values[self.layout.type_index[rep][b_idx]].clone() * gram;
                }
                let target = if rep == c_idx {
                    BigRational::one()
                } else {
                    BigRational::zero()
                };
                if acc != target {
                    return Err(Error::SingularGram {
                        k: self.k,
                        m: self.m,
                        residual: f64::NAN,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn matchings(&self) -> &[PairMatching] {
        &self.layout.matchings
    }

    pub fn value(&self, a: usize, b: usize) -> &BigRational {
        &self.class_values[self.layout.type_index[a][b]]
    }

    pub fn value_for_type(&self, mu: &ReducedCosetType) -> Result<&BigRational> {
        self.layout
            .classes
            .iter()
            .position(|c| c == mu)
            .map(|i| &self.class_values[i])
            .ok_or_else(|| {
                Error::invalid(format!(
                    "coset type {mu} is not realizable at pair count {}",
                    self.k
                ))
            })
    }
}

/// Convenience: build a table and read the value of one coset type.
pub fn weingarten_value(mu: &ReducedCosetType, k: usize, m: usize) -> Result<f64> {
    WeingartenTable::new(k, m)?.value_for_type(mu)
}

/// Large-dimension expansion of the Weingarten value for a coset type.
///
/// The empty type and the single-transposition type carry three-term
/// expansions:
///   Wg((0)) = m^-k + k(k-1) m^-k-2 - k(k-1) m^-k-3 + O(m^-k-4)
///   Wg((1)) = -m^-k-1 + m^-k-2 - (k^2 + 3k - 7) m^-k-3 + O(m^-k-4)
/// Any other type falls back to the Catalan leading order
/// (-1)^|mu| prod Cat(mu_i) m^(-k-|mu|).
pub fn wg_asymptotic(mu: &ReducedCosetType, k: usize, m: usize) -> f64 {
    let mf = m as f64;
    let kf = k as f64;
    match mu.parts() {
        [] => {
            mf.powi(-(k as i32))
                + kf * (kf - 1.0) * mf.powi(-(k as i32) - 2)
                - kf * (kf - 1.0) * mf.powi(-(k as i32) - 3)
        }
        [1] => {
            -mf.powi(-(k as i32) - 1) + mf.powi(-(k as i32) - 2)
                - (kf * kf + 3.0 * kf - 7.0) * mf.powi(-(k as i32) - 3)
        }
        parts => {
            let weight: usize = mu.weight();
            let sign = if weight % 2 == 0 { 1.0 } else { -1.0 };
            let catalans: f64 = parts
                .iter()
                .map(|&p| catalan(p).expect("parts are small") as f64)
                .product();
            sign * catalans * mf.powi(-((k + weight) as i32))
        }
    }
}

/// Leading-order term alone: (-1)^|mu| prod Cat(mu_i) m^(-k-|mu|).
pub fn wg_leading_order(mu: &ReducedCosetType, k: usize, m: usize) -> f64 {
    let weight = mu.weight();
    let sign = if weight % 2 == 0 { 1.0 } else { -1.0 };
    let catalans: f64 = mu
        .parts()
        .iter()
        .map(|&p| catalan(p).expect("parts are small") as f64)
        .product();
    sign * catalans * (m as f64).powi(-((k + weight) as i32))
}

/// j-th Catalan number, exact through j = 20.
pub fn catalan(j: usize) -> Result<u64> {
    if j > 20 {
        return Err(Error::invalid(format!(
            "Catalan numbers supported through j = 20, got {j}"
        )));
    }
    // binom(2j, j) by the exact multiplicative recurrence, then / (j + 1).
    let mut binom: u128 = 1;
    for i in 1..=j as u128 {
        binom = binom * (j as u128 + i) / i;
    }
    Ok((binom / (j as u128 + 1)) as u64)
}
