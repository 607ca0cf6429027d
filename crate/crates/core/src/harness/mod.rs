//! Experiment harness: JSON configs, reproducible per-trial seed streams,
//! parallel execution with worker-count-independent results, and CSV/JSONL
//! persistence. Parallelism is capped by the config `workers` field or the
//! `RMTLAB_WORKERS` environment variable.

mod config;
mod emit;
mod run;

pub use config::{ExperimentConfig, ExperimentKind, Truncations};
pub use emit::{
    emit_results, read_trials_csv, recompute_summary, standard_normal_cdf, OutputFormat,
};
pub use run::{
    derive_trial_seed, run_clt_experiment, run_experiment, run_identity_check, run_lyapunov,
    run_tails, run_weingarten_verification, summarize_values, ExperimentResult, Manifest, Summary,
    TrialRecord,
};
