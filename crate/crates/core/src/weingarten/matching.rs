//! Perfect matchings of {1..2k} and the loop statistics of matching pairs.

use std::fmt;

use crate::error::{Error, Result};

/// Largest pair count accepted by the enumerator: (2*5 - 1)!! = 945
/// matchings.
pub const MAX_MATCHING_PAIRS: usize = 5;

/// A perfect matching of {1..2k}, stored 0-based as pairs (lo, hi) sorted by
/// their smaller element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairMatching {
    pairs: Vec<(usize, usize)>,
}

impl PairMatching {
    /// Builds a matching from 0-based pairs; they must partition 0..2k.
    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let k = pairs.len();
        if k == 0 {
            return Err(Error::invalid("matching must have at least one pair"));
        }
        let mut seen = vec![false; 2 * k];
        let mut canonical = Vec::with_capacity(k);
        for (a, b) in pairs {
            if a == b || a >= 2 * k || b >= 2 * k || seen[a] || seen[b] {
                return Err(Error::invalid("pairs must partition 0..2k"));
            }
            seen[a] = true;
            seen[b] = true;
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        Ok(PairMatching { pairs: canonical })
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// partner[x] for all x in 0..2k.
    pub fn partner_map(&self) -> Vec<usize> {
        let mut partner = vec![0usize; 2 * self.pairs.len()];
        for &(a, b) in &self.pairs {
            partner[a] = b;
            partner[b] = a;
        }
        partner
    }
}

impl fmt::Display for PairMatching {
    /// 1-based rendering, e.g. `(1,2)(3,4)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(a, b) in &self.pairs {
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        Ok(())
    }
}

/// All (2k-1)!! perfect matchings of {1..2k} in the deterministic order
/// "smallest unpaired element first, partners ascending".
pub fn enumerate_matchings(k: usize) -> Result<Vec<PairMatching>> {
    if k == 0 || k > MAX_MATCHING_PAIRS {
        return Err(Error::invalid(format!(
            "pair count k={k} must satisfy 1 <= k <= {MAX_MATCHING_PAIRS}"
        )));
    }
    let mut out = Vec::new();
    let mut unused: Vec<usize> = (0..2 * k).collect();
    let mut acc = Vec::with_capacity(k);
    fn recurse(
        unused: &mut Vec<usize>,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<PairMatching>,
    ) {
        if unused.is_empty() {
            out.push(PairMatching {
                pairs: acc.clone(),
            });
            return;
        }
        let first = unused[0];
        for idx in 1..unused.len() {
            let partner = unused[idx];
            let mut rest: Vec<usize> = unused
                .iter()
                .copied()
                .filter(|&x| x != first && x != partner)
                .collect();
            acc.push((first, partner));
            recurse(&mut rest, acc, out);
            acc.pop();
        }
    }
    recurse(&mut unused, &mut acc, &mut out);
    Ok(out)
}

/// Number of connected loops in the union multigraph of two matchings on
/// the same ground set. Always between 1 and k.
pub fn loops_between(a: &PairMatching, b: &PairMatching) -> Result<usize> {
    if a.k() != b.k() {
        return Err(Error::invalid(format!(
            "matchings have different sizes: {} vs {}",
            a.k(),
            b.k()
        )));
    }
    Ok(loop_sizes(a, b).len())
}

/// Sizes (in elements) of the alternating loops of the two matchings.
fn loop_sizes(a: &PairMatching, b: &PairMatching) -> Vec<usize> {
    let pa = a.partner_map();
    let pb = b.partner_map();
    let total = pa.len();
    let mut visited = vec![false; total];
    let mut sizes = Vec::new();
    for start in 0..total {
        if visited[start] {
            continue;
        }
        let mut size = 0;
        let mut x = start;
        loop {
            visited[x] = true;
            size += 1;
            let y = pa[x];
            visited[y] = true;
            size += 1;
            x = pb[y];
            if x == start {
                break;
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Partition of loop pair-counts minus one: a loop through 2j elements (j
/// pairs) contributes the part j - 1; zero parts are dropped. Two equal
/// matchings therefore give the empty partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedCosetType {
    parts: Vec<usize>,
}

impl ReducedCosetType {
    /// Normalizes: drops zeros, sorts descending.
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        ReducedCosetType { parts }
    }

    pub fn empty() -> Self {
        ReducedCosetType { parts: Vec::new() }
    }

    pub fn single(part: usize) -> Self {
        Self::new(vec![part])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// |mu|, the sum of the parts.
    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }
}

impl fmt::Display for ReducedCosetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

pub fn reduced_coset_type(a: &PairMatching, b: &PairMatching) -> Result<ReducedCosetType> {
    if a.k() != b.k() {
        return Err(Error::invalid(format!(
            "matchings have different sizes: {} vs {}",
            a.k(),
            b.k()
        )));
    }
    let parts = loop_sizes(a, b)
        .into_iter()
        .map(|elements| elements / 2 - 1)
        .collect();
    Ok(ReducedCosetType::new(parts))
}
