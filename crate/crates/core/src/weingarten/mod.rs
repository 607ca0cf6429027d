//! Exact orthogonal-group Weingarten calculus: perfect matchings and their
//! loop statistics, Gram-inverse tables (floating point and exact
//! rational), polynomial moments of Haar matrix entries, and the moments of
//! truncated-block Gram determinants with Monte Carlo cross-checks.

mod matching;
mod moments;
mod table;

pub use matching::{
    enumerate_matchings, loops_between, reduced_coset_type, PairMatching, ReducedCosetType,
    MAX_MATCHING_PAIRS,
};
pub use moments::{
    det_gram_moment_exact, det_gram_moment_exact_rational, det_gram_moment_mc,
    det_gram_variance_exact, orthogonal_moment, DetMomentMc, MomentQuery, MAX_MOMENT_FACTORS,
};
pub use table::{
    catalan, weingarten_value, wg_asymptotic, wg_leading_order, WeingartenTable,
    WeingartenTableExact, MAX_TABLE_PAIRS,
};
