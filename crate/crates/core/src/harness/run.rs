//! Experiment execution: per-trial seed streams, parallel trial loops with
//! worker-count-independent aggregation, and the per-kind runners.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{haar_orthogonal_with, log_beta_with, Seed};
use crate::error::{Error, Result};
use crate::lyapunov::{frame_growth, lyapunov_spectrum, telescoped_growth, SpectrumMode};
use crate::moments::{aggregate_moments, beta_tail_bound, clt_ks_bound, TailSide};
use crate::stats::{
    compensated_sum, ks_one_sample, ks_two_sample, standardize_lyapunov, EmpiricalSample,
};
use crate::weingarten::{det_gram_variance_exact, wg_asymptotic, ReducedCosetType, WeingartenTable};

use super::config::{ExperimentConfig, ExperimentKind};

/// Deterministic, collision-free per-trial seed stream: a bijective 64-bit
/// mix of the master seed and the trial index.
pub fn derive_trial_seed(master: Seed, trial_index: u64) -> Seed {
    const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = master
        .0
        .wrapping_add(trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    Seed(z ^ (z >> 31))
}

/// One persisted trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub value: f64,
    pub standardized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Mean of the value column over all records (compensated, deferred
    /// division).
    pub sample_mean: f64,
    /// Unbiased sample variance of the value column.
    pub sample_variance: f64,
    pub ks_statistic: Option<f64>,
    pub bound_values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    pub master_seed: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
    pub manifest: Manifest,
}

/// Compensated mean and unbiased sample variance.
pub fn summarize_values(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let variance = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, variance)
}

fn resolve_workers(config: &ExperimentConfig) -> usize {
    if let Some(w) = config.workers {
        return w;
    }
    std::env::var("RMTLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

/// Runs `count` independent jobs, preserving index order in the output.
/// `workers = 0` uses the process-global pool.
fn run_indexed<T, F>(workers: usize, count: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let body = || {
        (0..count)
            .into_par_iter()
            .map(|i| job(i))
            .collect::<Result<Vec<T>>>()
    };
    if workers == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        pool.install(body)
    }
}

fn finish(
    config: &ExperimentConfig,
    records: Vec<TrialRecord>,
    ks_statistic: Option<f64>,
    bound_values: BTreeMap<String, f64>,
    started: Instant,
) -> ExperimentResult {
    let mut records = records;
    records.sort_by_key(|r| r.trial);
    let values: Vec<f64> = records.iter().map(|r| r.value).collect();
    let (sample_mean, sample_variance) = summarize_values(&values);
    ExperimentResult {
        config: config.clone(),
        records,
        summary: Summary {
            sample_mean,
            sample_variance,
            ks_statistic,
            bound_values,
        },
        manifest: Manifest {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    }
}

/// Dispatches a validated config to its runner.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    match config.kind {
        ExperimentKind::Clt | ExperimentKind::CltTopk => run_clt_experiment(config),
        ExperimentKind::IdentityCheck => run_identity_check(config),
        ExperimentKind::WeingartenVerify => run_weingarten_verification(config),
        ExperimentKind::Tails => run_tails(config),
        ExperimentKind::Lyapunov => run_lyapunov(config),
    }
}

/// Largest-exponent (or top-k sum) trials with standardization and a KS
/// distance to the Gaussian reference.
pub fn run_clt_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if !matches!(config.kind, ExperimentKind::Clt | ExperimentKind::CltTopk) {
        return Err(Error::Config("run_clt_experiment needs kind clt or clt-topk".into()));
    }
    let started = Instant::now();
    let spec = config.ensemble_spec()?;
    if spec.max_truncation() == 0 {
        return Err(Error::DegenerateVariance);
    }
    let top_k = if config.kind == ExperimentKind::CltTopk {
        config.k
    } else {
        1
    };
    let master = Seed(config.master_seed);
    let workers = resolve_workers(config);
    let values = run_indexed(workers, config.trials, |t| {
        let seed = derive_trial_seed(master, t as u64);
        let spectrum = lyapunov_spectrum(&spec, seed, SpectrumMode::QrAccumulate)?;
        Ok(spectrum.lambdas[..top_k].iter().sum::<f64>())
    })?;

    let standardized = match config.kind {
        ExperimentKind::Clt => standardize_lyapunov(&values, &spec, config.convention)?,
        _ => {
            let (mean, variance) = summarize_values(&values);
            if variance <= 0.0 {
                return Err(Error::Internal(
                    "moment matching needs positive sample variance".into(),
                ));
            }
            let sd = variance.sqrt();
            values.iter().map(|v| (v - mean) / sd).collect()
        }
    };
    let ks = ks_one_sample(&EmpiricalSample::new(standardized.clone())?, 0.0, 1.0)?;

    let mut bounds = BTreeMap::new();
    if spec.min_truncation() >= 1 && spec.n() >= 2 && spec.num_factors() > spec.n() {
        bounds.insert(
            "clt_ks_bound".to_string(),
            clt_ks_bound(&spec, config.constant("C"))?,
        );
    }
    let agg = aggregate_moments(&spec);
    bounds.insert("closed_form_mean".to_string(), agg.mu / 2.0);
    bounds.insert("closed_form_variance".to_string(), agg.sigma2 / 4.0);

    let records = values
        .iter()
        .zip(standardized.iter())
        .enumerate()
        .map(|(t, (&value, &z))| TrialRecord {
            trial: t,
            seed: derive_trial_seed(master, t as u64).0,
            value,
            standardized: Some(z),
        })
        .collect();
    Ok(finish(config, records, Some(ks.statistic), bounds, started))
}

/// Frame growth at k = 1 against the telescoped log-Beta sum: two samples
/// of `trials` draws each and their two-sample KS distance. Record rows
/// 0..trials hold the frame sample, rows trials..2*trials the telescoped
/// sample.
pub fn run_identity_check(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.kind != ExperimentKind::IdentityCheck {
        return Err(Error::Config("run_identity_check needs kind identity-check".into()));
    }
    let started = Instant::now();
    let spec = config.ensemble_spec()?;
    let master = Seed(config.master_seed);
    let workers = resolve_workers(config);
    let trials = config.trials;
    let pairs = run_indexed(workers, trials, |t| {
        let frame_seed = derive_trial_seed(master, 2 * t as u64);
        let telescoped_seed = derive_trial_seed(master, 2 * t as u64 + 1);
        let growth = frame_growth(&spec, 1, frame_seed)?.value;
        let telescoped = telescoped_growth(&spec, telescoped_seed);
        Ok((growth, telescoped))
    })?;
    let frame_values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let telescoped_values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let ks = ks_two_sample(
        &EmpiricalSample::new(frame_values.clone())?,
        &EmpiricalSample::new(telescoped_values.clone())?,
    );

    let mut bounds = BTreeMap::new();
    let (frame_mean, frame_var) = summarize_values(&frame_values);
    let (tele_mean, tele_var) = summarize_values(&telescoped_values);
    bounds.insert("frame_mean".to_string(), frame_mean);
    bounds.insert("frame_variance".to_string(), frame_var);
    bounds.insert("telescoped_mean".to_string(), tele_mean);
    bounds.insert("telescoped_variance".to_string(), tele_var);

    let mut records = Vec::with_capacity(2 * trials);
    for (t, &v) in frame_values.iter().enumerate() {
        records.push(TrialRecord {
            trial: t,
            seed: derive_trial_seed(master, 2 * t as u64).0,
            value: v,
            standardized: None,
        });
    }
    for (t, &v) in telescoped_values.iter().enumerate() {
        records.push(TrialRecord {
            trial: trials + t,
            seed: derive_trial_seed(master, 2 * t as u64 + 1).0,
            value: v,
            standardized: None,
        });
    }
    Ok(finish(config, records, Some(ks.statistic), bounds, started))
}

/// Monte Carlo estimate of every tabulated Weingarten pattern at (k, m),
/// compared against the exact table in standard-error units, plus the
/// asymptotic-expansion and determinant-variance scaling checks. One record
/// per pattern: value = MC mean, standardized = |deviation| / SE.
pub fn run_weingarten_verification(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.kind != ExperimentKind::WeingartenVerify {
        return Err(Error::Config(
            "run_weingarten_verification needs kind weingarten-verify".into(),
        ));
    }
    let started = Instant::now();
    let k = config.k;
    let m = config.ambient_dimension()?;
    if k > 3 {
        return Err(Error::Config(
            "weingarten-verify is limited to k <= 3 (pattern count grows as ((2k-1)!!)^2)".into(),
        ));
    }
    let table = WeingartenTable::new(k, m)?;
    let matchings = table.matchings();
    let count = matchings.len();
    let patterns: Vec<(usize, usize)> = (0..count)
        .flat_map(|a| (0..count).map(move |b| (a, b)))
        .collect();
    // Entry queries: position -> pair index, for rows under matching a and
    // columns under matching b.
    let labels: Vec<Vec<usize>> = matchings
        .iter()
        .map(|mat| {
            let mut label = vec![0usize; 2 * k];
            for (pair_idx, &(x, y)) in mat.pairs().iter().enumerate() {
                label[x] = pair_idx;
                label[y] = pair_idx;
            }
            label
        })
        .collect();

    let master = Seed(config.master_seed);
    let trials = config.trials;
    let workers = resolve_workers(config);
    const CHUNK: usize = 1024;
    let chunk_count = trials.div_ceil(CHUNK);
    // Fixed chunking plus in-order combination keeps sums bit-identical for
    // every worker count.
    let partials = run_indexed(workers, chunk_count, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(trials);
        let mut sums = vec![0.0f64; patterns.len()];
        let mut squares = vec![0.0f64; patterns.len()];
        for t in lo..hi {
            let mut rng = derive_trial_seed(master, t as u64).rng();
            let g = haar_orthogonal_with(m, &mut rng);
            for (p, &(a, b)) in patterns.iter().enumerate() {
                let mut product = 1.0;
                for pos in 0..2 * k {
                    product *= g[(labels[a][pos], labels[b][pos])];
                }
                sums[p] += product;
                squares[p] += product * product;
            }
        }
        Ok((sums, squares))
    })?;
    let mut sums = vec![0.0f64; patterns.len()];
    let mut squares = vec![0.0f64; patterns.len()];
    for (chunk_sums, chunk_squares) in partials {
        for p in 0..patterns.len() {
            sums[p] += chunk_sums[p];
            squares[p] += chunk_squares[p];
        }
    }

    let tf = trials as f64;
    let mut records = Vec::with_capacity(patterns.len());
    let mut max_dev = 0.0f64;
    for (p, &(a, b)) in patterns.iter().enumerate() {
        let mean = sums[p] / tf;
        let variance = (squares[p] / tf - mean * mean).max(0.0) * tf / (tf - 1.0);
        let se = (variance / tf).sqrt();
        let exact = table.value(a, b);
        let dev = if se > 0.0 {
            (mean - exact).abs() / se
        } else {
            0.0
        };
        max_dev = max_dev.max(dev);
        records.push(TrialRecord {
            trial: p,
            seed: master.0,
            value: mean,
            standardized: Some(dev),
        });
    }

    let mut bounds = BTreeMap::new();
    bounds.insert("max_se_deviation".to_string(), max_dev);
    bounds.insert("table_residual".to_string(), table.residual());
    // Asymptotic expansions at the two tabulated coset types.
    if let Ok(exact) = table.value_for_type(&ReducedCosetType::empty()) {
        bounds.insert(
            "asym_err_empty".to_string(),
            (exact - wg_asymptotic(&ReducedCosetType::empty(), k, m)).abs(),
        );
    }
    if k >= 2 {
        if let Ok(exact) = table.value_for_type(&ReducedCosetType::single(1)) {
            bounds.insert(
                "asym_err_single".to_string(),
                (exact - wg_asymptotic(&ReducedCosetType::single(1), k, m)).abs(),
            );
        }
    }
    // Determinant variance scaling Var Z ~ 1/n at fixed truncation depth,
    // reported for the k = 2 reference configuration.
    if k <= 2 {
        let l_ref = 2;
        for n_ref in [8usize, 16, 32] {
            let var = det_gram_variance_exact(2, n_ref, n_ref + l_ref)?;
            bounds.insert(format!("n_var_z[{n_ref}]"), n_ref as f64 * var);
        }
    }
    Ok(finish(config, records, None, bounds, started))
}

/// Empirical upper tails of Beta(alpha, beta) against the Bernstein-type
/// bound at each requested deviation.
pub fn run_tails(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.kind != ExperimentKind::Tails {
        return Err(Error::Config("run_tails needs kind tails".into()));
    }
    let started = Instant::now();
    let alpha = config.alpha.expect("validated");
    let beta = config.beta.expect("validated");
    let (n_half, l_half) = beta_shape_to_gaussian_counts(alpha, beta)?;
    let master = Seed(config.master_seed);
    let workers = resolve_workers(config);
    let values = run_indexed(workers, config.trials, |t| {
        let mut rng = derive_trial_seed(master, t as u64).rng();
        Ok(log_beta_with(n_half, l_half, &mut rng).exp())
    })?;

    let mean = alpha / (alpha + beta);
    let tf = config.trials as f64;
    let mut bounds = BTreeMap::new();
    for &eps in &config.eps {
        let bound = beta_tail_bound(alpha, beta, eps, TailSide::Upper)?;
        let empirical = values.iter().filter(|&&x| x > mean + eps).count() as f64 / tf;
        let se = (bound.min(1.0) * (1.0 - bound.min(1.0)) / tf).sqrt();
        bounds.insert(format!("bound[{eps}]"), bound);
        bounds.insert(format!("empirical[{eps}]"), empirical);
        bounds.insert(format!("binomial_se[{eps}]"), se);
    }

    let records = values
        .iter()
        .enumerate()
        .map(|(t, &value)| TrialRecord {
            trial: t,
            seed: derive_trial_seed(master, t as u64).0,
            value,
            standardized: None,
        })
        .collect();
    Ok(finish(config, records, None, bounds, started))
}

/// Maps Beta shapes to the Gaussian-ratio construction: alpha = n/2,
/// beta = l/2 for integers n >= 1, l >= 1.
fn beta_shape_to_gaussian_counts(alpha: f64, beta: f64) -> Result<(usize, usize)> {
    let n2 = 2.0 * alpha;
    let l2 = 2.0 * beta;
    if (n2 - n2.round()).abs() > 1e-9 || (l2 - l2.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "Beta sampling uses Gaussian norm ratios and needs 2*alpha and 2*beta \
             to be integers; got alpha={alpha}, beta={beta}"
        )));
    }
    let n = n2.round() as usize;
    let l = l2.round() as usize;
    if n == 0 || l == 0 {
        return Err(Error::Config("alpha and beta must be at least 1/2".into()));
    }
    Ok((n, l))
}

/// Raw Lyapunov trials in the requested spectrum mode; reports the top-k
/// sum per trial, with closed-form standardization when available and k = 1.
pub fn run_lyapunov(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.kind != ExperimentKind::Lyapunov {
        return Err(Error::Config("run_lyapunov needs kind lyapunov".into()));
    }
    let started = Instant::now();
    let spec = config.ensemble_spec()?;
    let mode = config.mode.unwrap_or(SpectrumMode::QrAccumulate);
    let top_k = config.k;
    let master = Seed(config.master_seed);
    let workers = resolve_workers(config);
    let values = run_indexed(workers, config.trials, |t| {
        let seed = derive_trial_seed(master, t as u64);
        let spectrum = lyapunov_spectrum(&spec, seed, mode)?;
        Ok(spectrum.lambdas[..top_k].iter().sum::<f64>())
    })?;

    let agg = aggregate_moments(&spec);
    let standardized: Option<Vec<f64>> = if top_k == 1 && agg.sigma2 > 0.0 {
        Some(standardize_lyapunov(&values, &spec, config.convention)?)
    } else {
        None
    };
    let ks = match &standardized {
        Some(z) => Some(ks_one_sample(&EmpiricalSample::new(z.clone())?, 0.0, 1.0)?.statistic),
        None => None,
    };

    let mut bounds = BTreeMap::new();
    if top_k == 1 {
        bounds.insert("closed_form_mean".to_string(), agg.mu / 2.0);
        bounds.insert("closed_form_variance".to_string(), agg.sigma2 / 4.0);
    }
    if spec.min_truncation() >= 1 && spec.n() >= 2 && spec.num_factors() > spec.n() {
        bounds.insert(
            "clt_ks_bound".to_string(),
            clt_ks_bound(&spec, config.constant("C"))?,
        );
    }

    let records = values
        .iter()
        .enumerate()
        .map(|(t, &value)| TrialRecord {
            trial: t,
            seed: derive_trial_seed(master, t as u64).0,
            value,
            standardized: standardized.as_ref().map(|z| z[t]),
        })
        .collect();
    Ok(finish(config, records, ks, bounds, started))
}
