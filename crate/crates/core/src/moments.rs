//! Closed-form moments of log-Beta variables, their aggregates over a
//! product ensemble, and the concentration / tail / CLT bound evaluators.
//!
//! The bounds carry non-explicit universal constants; every evaluator takes
//! the constant as a caller parameter (defaulting to 1 at the experiment
//! layer) so tests check shape and monotonicity rather than absolute level.

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};

/// B_{2k} / (2k) for k = 1..6; asymptotic series for digamma through x^-12.
const DIGAMMA_SERIES: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
];

/// B_{2k} for k = 1..6; asymptotic series for trigamma through x^-13.
const TRIGAMMA_SERIES: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// Shift point for the asymptotic expansions.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

fn digamma_unchecked(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut x = x;
    while x < ASYMPTOTIC_THRESHOLD {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut term = inv2;
    let mut series = 0.0;
    for c in DIGAMMA_SERIES {
        series += c * term;
        term *= inv2;
    }
    shift + x.ln() - 0.5 / x - series
}

fn trigamma_unchecked(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut x = x;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut term = inv2 * inv;
    let mut series = 0.0;
    for c in TRIGAMMA_SERIES {
        series += c * term;
        term *= inv2;
    }
    shift + inv + 0.5 * inv2 + series
}

/// Digamma function psi(x) = d/dx log Gamma(x), for x > 0.
///
/// Recurrence shifts the argument above 10, then a Bernoulli-coefficient
/// asymptotic series; absolute error below 1e-12 on (0, inf).
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::invalid(format!("digamma requires x > 0, got {x}")));
    }
    Ok(digamma_unchecked(x))
}

/// Trigamma function psi_1(x) = d/dx psi(x), for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::invalid(format!("trigamma requires x > 0, got {x}")));
    }
    Ok(trigamma_unchecked(x))
}

/// Mean and variance of log Beta(n/2, l/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaLogMoments {
    pub mean: f64,
    pub variance: f64,
}

/// mean = psi(n/2) - psi((n+l)/2), variance = psi_1(n/2) - psi_1((n+l)/2).
/// At l = 0 the Beta variable is the point mass at 1, so both are zero.
pub fn beta_log_moments(n: usize, l: usize) -> Result<BetaLogMoments> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if l == 0 {
        return Ok(BetaLogMoments {
            mean: 0.0,
            variance: 0.0,
        });
    }
    let a = n as f64 / 2.0;
    let b = (n + l) as f64 / 2.0;
    Ok(BetaLogMoments {
        mean: digamma_unchecked(a) - digamma_unchecked(b),
        variance: trigamma_unchecked(a) - trigamma_unchecked(b),
    })
}

/// Ensemble-level mean and variance of the normalized log growth:
/// mu = (1/N) sum_i mean_i, sigma2 = (1/N^2) sum_i variance_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateMoments {
    pub mu: f64,
    pub sigma2: f64,
}

pub fn aggregate_moments(spec: &EnsembleSpec) -> AggregateMoments {
    let n = spec.n();
    let num = spec.num_factors() as f64;
    let mut mu = 0.0;
    let mut sigma2 = 0.0;
    for &l in spec.truncations() {
        let m = beta_log_moments(n, l).expect("spec guarantees n >= 1");
        mu += m.mean;
        sigma2 += m.variance;
    }
    AggregateMoments {
        mu: mu / num,
        sigma2: sigma2 / (num * num),
    }
}

/// Sub-Gaussian concentration parameters of the per-factor log variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationParams {
    /// M_i = n^2 (n + l_i + 2) / (n + l_i)^2, one per factor.
    pub per_factor: Vec<f64>,
    /// The same expression evaluated at the largest truncation L; since M_i
    /// decreases in l_i this is the minimum over the factors.
    pub slowest: f64,
    /// M_N, the last factor's parameter.
    pub last: f64,
    /// M_hat = sum_j 1 / M_j.
    pub reciprocal_sum: f64,
    /// p_0 = M_N^2 * M_hat, the moment order where the sub-Gaussian and
    /// sub-exponential regimes cross.
    pub p0: f64,
}

fn per_factor_m(n: usize, l: usize) -> f64 {
    let n = n as f64;
    let l = l as f64;
    n * n * (n + l + 2.0) / ((n + l) * (n + l))
}

pub fn concentration_params(spec: &EnsembleSpec) -> ConcentrationParams {
    let n = spec.n();
    let per_factor: Vec<f64> = spec.truncations().iter().map(|&l| per_factor_m(n, l)).collect();
    let slowest = per_factor_m(n, spec.max_truncation());
    let last = *per_factor.last().expect("nonempty");
    let reciprocal_sum: f64 = per_factor.iter().map(|m| 1.0 / m).sum();
    ConcentrationParams {
        slowest,
        last,
        reciprocal_sum,
        p0: last * last * reciprocal_sum,
        per_factor,
    }
}

/// Moment bound for the centered sum of the per-factor log variables:
/// C (sqrt(p N / M) + p / M) with M evaluated at the largest truncation.
pub fn sum_moment_bound(p: f64, spec: &EnsembleSpec, c: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("moment order p must be >= 1, got {p}")));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("constant must be positive"));
    }
    let m = concentration_params(spec).slowest;
    let num = spec.num_factors() as f64;
    Ok(c * ((p * num / m).sqrt() + p / m))
}

/// Tail bound for the deviation of the normalized log growth from its mean:
/// 2 exp(-c N min(M_hat s^2, M_N s)), capped at 2. Implemented exactly as
/// stated, mixing the reciprocal sum M_hat into the exponent; treat as
/// shape-only.
pub fn sum_tail_bound(s: f64, spec: &EnsembleSpec, c: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::invalid(format!("deviation s must be >= 0, got {s}")));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("constant must be positive"));
    }
    let params = concentration_params(spec);
    let num = spec.num_factors() as f64;
    let exponent = c * num * (params.reciprocal_sum * s * s).min(params.last * s);
    Ok((2.0 * (-exponent).exp()).min(2.0))
}

/// Kolmogorov-Smirnov distance bound for the standardized largest exponent:
/// sqrt(4 C log^2(n) log^2(N/n) n (n + l) / (2 l N)) with l the minimum
/// truncation. Undefined at l = 0 (the formula divides by l).
pub fn clt_ks_bound(spec: &EnsembleSpec, c: f64) -> Result<f64> {
    let n = spec.n();
    let num = spec.num_factors();
    let l = spec.min_truncation();
    if l == 0 {
        return Err(Error::UndefinedBound(
            "KS bound divides by the minimum truncation, which is zero".into(),
        ));
    }
    if n < 2 || num <= n {
        return Err(Error::invalid(format!(
            "KS bound requires N > n >= 2, got n={n}, N={num}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("constant must be positive"));
    }
    let nf = n as f64;
    let numf = num as f64;
    let lf = l as f64;
    let log_n = nf.ln();
    let log_ratio = (numf / nf).ln();
    let value =
        4.0 * c * log_n * log_n * log_ratio * log_ratio * nf * (nf + lf) / (2.0 * lf * numf);
    Ok(value.sqrt())
}

/// Bernstein parameters (v, c) of a Beta(alpha, beta) variable:
/// v = alpha beta / ((alpha+beta)^2 (alpha+beta+1)),
/// c = 2 (beta - alpha) / ((alpha+beta) (alpha+beta+2)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaTailParams {
    pub v: f64,
    pub c: f64,
}

pub fn beta_tail_params(alpha: f64, beta: f64) -> Result<BetaTailParams> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::invalid("Beta shape parameters must be positive"));
    }
    let s = alpha + beta;
    Ok(BetaTailParams {
        v: alpha * beta / (s * s * (s + 1.0)),
        c: 2.0 * (beta - alpha) / (s * (s + 2.0)),
    })
}

/// Simplified upper bound on the Bernstein variance factor of
/// Beta(n/2, l/2): 1 / (2 (n + l + 2)). The exact v (see
/// [`beta_tail_params`]) is tighter and drives the tail tests; this form is
/// exposed for reference.
pub fn beta_tail_v_bound(n: usize, l: usize) -> f64 {
    1.0 / (2.0 * (n + l + 2) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    Upper,
    Lower,
}

/// Bernstein-type tail bound for Beta(alpha, beta) at deviation eps from
/// the mean, capped at 1.
///
/// In the regime where the Bernstein correction applies (beta >= alpha for
/// the upper tail, alpha >= beta for the lower) the bound is
/// exp(-eps^2 / (2 (v + c eps / 3))); otherwise the pure sub-Gaussian form
/// exp(-eps^2 / (2v)). The lower tail is evaluated by reflection
/// (alpha and beta swapped), which keeps the correction term nonnegative.
pub fn beta_tail_bound(alpha: f64, beta: f64, eps: f64, side: TailSide) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::invalid(format!("eps must be >= 0, got {eps}")));
    }
    let (a, b) = match side {
        TailSide::Upper => (alpha, beta),
        TailSide::Lower => (beta, alpha),
    };
    let params = beta_tail_params(a, b)?;
    let denom = if b >= a {
        2.0 * (params.v + params.c * eps / 3.0)
    } else {
        2.0 * params.v
    };
    Ok((-(eps * eps) / denom).exp().min(1.0))
}

/// Deviation radius for the gap between a fixed-frame growth rate and the
/// sum of the top exponents: (k / 2N) log(n / (k eps^2)).
pub fn frame_deviation_allowance(n: usize, k: usize, num_factors: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k={k} must satisfy 1 <= k <= n={n}")));
    }
    if num_factors == 0 {
        return Err(Error::invalid("number of factors must be >= 1"));
    }
    let kf = k as f64;
    Ok(kf / (2.0 * num_factors as f64) * ((n as f64) / (kf * eps * eps)).ln())
}

/// First-order moments of log Z propagated from the moments of Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaLogMoments {
    /// log E Z (first-order mean).
    pub mean_log: f64,
    /// log E Z - Var Z / (2 (E Z)^2), the second-order mean correction.
    pub mean_log_corrected: f64,
    /// Var Z / (E Z)^2.
    pub var_log: f64,
    /// mu_4(Z) / (E Z)^4.
    pub mu4_log: f64,
}

/// Delta method for log Z around E Z.
pub fn delta_method_log(mean: f64, variance: f64, mu4: f64) -> Result<DeltaLogMoments> {
    if !(mean > 0.0) {
        return Err(Error::invalid(format!("mean of Z must be positive, got {mean}")));
    }
    if variance < 0.0 || mu4 < 0.0 {
        return Err(Error::invalid("central moments must be nonnegative"));
    }
    let m2 = mean * mean;
    Ok(DeltaLogMoments {
        mean_log: mean.ln(),
        mean_log_corrected: mean.ln() - variance / (2.0 * m2),
        var_log: variance / m2,
        mu4_log: mu4 / (m2 * m2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleSpec;
    use approx::assert_abs_diff_eq;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn digamma_reference_values() {
        assert_abs_diff_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, epsilon = 1e-12);
        assert_abs_diff_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * 2.0f64.ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, epsilon = 1e-12);
        // Large argument sanity: psi(x) ~ ln x - 1/(2x).
        assert_abs_diff_eq!(
            digamma(1000.0).unwrap(),
            1000.0f64.ln() - 0.0005 - 1.0 / 12.0e6,
            epsilon = 1e-10
        );
    }

    #[test]
    fn trigamma_reference_values() {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_abs_diff_eq!(trigamma(1.0).unwrap(), pi2 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trigamma(0.5).unwrap(), pi2 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trigamma(2.0).unwrap(), pi2 / 6.0 - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn digamma_trigamma_reject_nonpositive() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(trigamma(0.0).is_err());
        assert!(trigamma(-0.5).is_err());
    }

    #[test]
    fn recurrences_hold_on_grid() {
        for x in [0.1, 0.5, 1.0, 3.7, 10.0] {
            let d = (digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x).abs();
            assert!(d <= 1e-12, "digamma recurrence at {x}: {d:.3e}");
            let t = (trigamma(x + 1.0).unwrap() - trigamma(x).unwrap() + 1.0 / (x * x)).abs();
            assert!(t <= 1e-12, "trigamma recurrence at {x}: {t:.3e}");
        }
    }

    #[test]
    fn beta_log_moments_reference_values() {
        let m = beta_log_moments(2, 2).unwrap();
        assert_abs_diff_eq!(m.mean, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.variance, 1.0, epsilon = 1e-12);

        let m = beta_log_moments(4, 4).unwrap();
        assert_abs_diff_eq!(m.mean, -5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.variance, 13.0 / 36.0, epsilon = 1e-12);

        let m = beta_log_moments(2, 0).unwrap();
        assert_eq!((m.mean, m.variance), (0.0, 0.0));
    }

    #[test]
    fn aggregate_moments_substitution() {
        let spec = EnsembleSpec::new(2, vec![2, 2]).unwrap();
        let agg = aggregate_moments(&spec);
        assert_abs_diff_eq!(agg.mu, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(agg.sigma2, 0.5, epsilon = 1e-12);

        let spec = EnsembleSpec::uniform(3, 0, 4).unwrap();
        let agg = aggregate_moments(&spec);
        assert_eq!((agg.mu, agg.sigma2), (0.0, 0.0));

        let spec = EnsembleSpec::uniform(4, 4, 100).unwrap();
        let agg = aggregate_moments(&spec);
        assert_abs_diff_eq!(agg.mu, -5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(agg.sigma2, 13.0 / 36.0 / 100.0, epsilon = 1e-12);
    }

    #[test]
    fn concentration_reference_values() {
        let spec = EnsembleSpec::uniform(2, 2, 3).unwrap();
        let p = concentration_params(&spec);
        assert_abs_diff_eq!(p.per_factor[0], 1.5, epsilon = 1e-12);

        let spec = EnsembleSpec::uniform(4, 4, 5).unwrap();
        let p = concentration_params(&spec);
        assert_abs_diff_eq!(p.per_factor[0], 2.5, epsilon = 1e-12);
        // Constant truncations: p0 = M * N.
        assert_abs_diff_eq!(p.p0, 2.5 * 5.0, epsilon = 1e-12);
    }

    #[test]
    fn per_factor_m_decreases_in_truncation() {
        for n in [2usize, 4, 8] {
            let mut prev = f64::INFINITY;
            for l in 0..=20 {
                let m = per_factor_m(n, l);
                assert!(m > 0.0);
                assert!(m < prev, "M not strictly decreasing at n={n}, l={l}");
                prev = m;
            }
        }
    }

    #[test]
    fn sum_moment_bound_reference() {
        let spec = EnsembleSpec::uniform(4, 4, 100).unwrap();
        let b = sum_moment_bound(2.0, &spec, 1.0).unwrap();
        assert_abs_diff_eq!(b, 80.0f64.sqrt() + 0.8, epsilon = 1e-10);
        // Linearity in the constant.
        assert_abs_diff_eq!(
            sum_moment_bound(2.0, &spec, 2.0).unwrap(),
            2.0 * b,
            epsilon = 1e-10
        );
        // Monotone nondecreasing in p.
        let mut prev = 0.0;
        for p in [1.0, 2.0, 4.0, 9.0, 25.0] {
            let v = sum_moment_bound(p, &spec, 1.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(sum_moment_bound(0.5, &spec, 1.0).is_err());
    }

    #[test]
    fn sum_tail_bound_shape() {
        let spec = EnsembleSpec::uniform(4, 4, 20).unwrap();
        assert_eq!(sum_tail_bound(0.0, &spec, 1.0).unwrap(), 2.0);
        let mut prev = 2.0;
        for s in [0.01, 0.05, 0.1, 0.5, 1.0] {
            let v = sum_tail_bound(s, &spec, 1.0).unwrap();
            assert!(v < prev, "not strictly decreasing at s={s}");
            prev = v;
        }
        assert!(sum_tail_bound(-0.1, &spec, 1.0).is_err());

        // Crossover between the quadratic and linear regimes at
        // s* = M_N / M_hat.
        let params = concentration_params(&spec);
        let s_star = params.last / params.reciprocal_sum;
        let quad = params.reciprocal_sum * s_star * s_star;
        let lin = params.last * s_star;
        assert_abs_diff_eq!(quad, lin, epsilon = 1e-10);
    }

    #[test]
    fn clt_ks_bound_reference() {
        let spec = EnsembleSpec::uniform(4, 4, 10_000).unwrap();
        let b = clt_ks_bound(&spec, 1.0).unwrap();
        assert_abs_diff_eq!(b, 0.4339, epsilon = 5e-4);
        // C quadruples -> bound doubles.
        assert_abs_diff_eq!(clt_ks_bound(&spec, 4.0).unwrap(), 2.0 * b, epsilon = 1e-10);

        let zero = EnsembleSpec::uniform(4, 0, 100).unwrap();
        assert!(matches!(clt_ks_bound(&zero, 1.0), Err(Error::UndefinedBound(_))));

        let small = EnsembleSpec::uniform(4, 4, 3).unwrap();
        assert!(clt_ks_bound(&small, 1.0).is_err());
    }

    #[test]
    fn clt_ks_bound_scales_with_num_factors() {
        // For fixed n, l the bound behaves like log(N/n) / sqrt(N).
        let n = 4;
        let l = 4;
        let b1 = clt_ks_bound(&EnsembleSpec::uniform(n, l, 1000).unwrap(), 1.0).unwrap();
        let b2 = clt_ks_bound(&EnsembleSpec::uniform(n, l, 4000).unwrap(), 1.0).unwrap();
        let expected_ratio = ((4000.0f64 / 4.0).ln() / (1000.0f64 / 4.0).ln()) / 4.0f64.sqrt();
        assert_abs_diff_eq!(b2 / b1, expected_ratio, epsilon = 1e-10);
    }

    #[test]
    fn beta_tail_params_reference() {
        let p = beta_tail_params(0.5, 0.5).unwrap();
        assert_abs_diff_eq!(p.v, 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(p.c, 0.0, epsilon = 1e-12);

        let p = beta_tail_params(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(p.v, 1.0 / 18.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.c, 2.0 / 15.0, epsilon = 1e-12);

        assert!(beta_tail_params(0.0, 1.0).is_err());
    }

    #[test]
    fn beta_tail_v_bound_dominates_exact_v() {
        for (n, l) in [(2usize, 2usize), (4, 4), (4, 2), (8, 2)] {
            let exact = beta_tail_params(n as f64 / 2.0, l as f64 / 2.0).unwrap().v;
            assert!(exact <= beta_tail_v_bound(n, l) + 1e-15);
        }
    }

    #[test]
    fn beta_tail_bound_shape() {
        assert_eq!(beta_tail_bound(1.0, 1.0, 0.0, TailSide::Upper).unwrap(), 1.0);
        let b1 = beta_tail_bound(2.0, 2.0, 0.1, TailSide::Upper).unwrap();
        let b2 = beta_tail_bound(2.0, 2.0, 0.2, TailSide::Upper).unwrap();
        assert!(b2 < b1 && b1 < 1.0);
        // Symmetric shapes give identical upper and lower bounds.
        assert_abs_diff_eq!(
            beta_tail_bound(2.0, 2.0, 0.2, TailSide::Lower).unwrap(),
            b2,
            epsilon = 1e-15
        );
        assert!(beta_tail_bound(1.0, 1.0, -0.1, TailSide::Upper).is_err());
    }

    #[test]
    fn frame_deviation_allowance_reference() {
        let v = frame_deviation_allowance(100, 1, 1000, 0.1).unwrap();
        assert_abs_diff_eq!(v, 1e4f64.ln() / 2000.0, epsilon = 1e-12);
        // Decreasing in the number of factors.
        let v2 = frame_deviation_allowance(100, 1, 2000, 0.1).unwrap();
        assert!(v2 < v);
        assert!(frame_deviation_allowance(100, 1, 1000, 1.0).is_err());
        assert!(frame_deviation_allowance(100, 1, 1000, 0.0).is_err());
    }

    #[test]
    fn delta_method_reference() {
        let d = delta_method_log(1.0, 0.0, 0.0).unwrap();
        assert_eq!((d.mean_log, d.var_log, d.mu4_log), (0.0, 0.0, 0.0));

        let d = delta_method_log(2.0, 0.04, 0.0).unwrap();
        assert_abs_diff_eq!(d.var_log, 0.01, epsilon = 1e-15);

        // Scale invariance: Z -> cZ maps (m, v, mu4) to (cm, c^2 v, c^4 mu4)
        // and leaves var_log and mu4_log unchanged.
        let base = delta_method_log(1.5, 0.2, 0.1).unwrap();
        let scaled = delta_method_log(3.0, 0.8, 1.6).unwrap();
        assert_abs_diff_eq!(base.var_log, scaled.var_log, epsilon = 1e-14);
        assert_abs_diff_eq!(base.mu4_log, scaled.mu4_log, epsilon = 1e-14);

        assert!(delta_method_log(0.0, 0.1, 0.1).is_err());
        assert!(delta_method_log(-1.0, 0.1, 0.1).is_err());
    }
}
