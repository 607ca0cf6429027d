//! Verification laboratory for products of truncated Haar orthogonal
//! matrices: ensemble samplers, numerically stable Lyapunov spectra over
//! long products, closed-form log-Beta moments and concentration bounds,
//! exact Weingarten calculus with Monte Carlo cross-checks, and a
//! reproducible experiment harness.

pub mod ensembles;
pub mod error;
pub mod harness;
pub mod lyapunov;
pub mod moments;
pub mod stats;
pub mod weingarten;

pub use ensembles::{EnsembleSpec, Frame, Seed};
pub use error::{Error, Result};
pub use harness::{derive_trial_seed, ExperimentConfig, ExperimentResult};
pub use lyapunov::{GrowthSample, LyapunovSpectrum, SpectrumMode};
pub use moments::{AggregateMoments, BetaLogMoments, ConcentrationParams};
pub use stats::{Convention, EmpiricalSample, KsResult};
