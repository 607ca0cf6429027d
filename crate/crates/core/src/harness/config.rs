//! Experiment configuration: a single JSON document describing what to run,
//! with which ensemble, how many trials, and under which master seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::lyapunov::SpectrumMode;
use crate::stats::Convention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Largest-exponent CLT check: standardized lambda_1 against N(0, 1).
    Clt,
    /// Sum of the top k exponents against a moment-matched Gaussian.
    CltTopk,
    /// Empirical Beta tails against the Bernstein-type bounds.
    Tails,
    /// Exact Weingarten values against Haar Monte Carlo and asymptotics.
    WeingartenVerify,
    /// Distributional identity between frame growth and the telescoped
    /// log-Beta sum.
    IdentityCheck,
    /// Raw Lyapunov spectrum trials in a selectable mode.
    Lyapunov,
}

/// Either one truncation depth shared by every factor or an explicit list
/// of length N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Truncations {
    Uniform(usize),
    PerFactor(Vec<usize>),
}

impl Default for Truncations {
    fn default() -> Self {
        Truncations::Uniform(0)
    }
}

fn default_k() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub n: usize,
    /// Number of factors in the product.
    #[serde(rename = "N", default)]
    pub num_factors: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub truncations: Truncations,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub convention: Convention,
    /// Non-explicit universal constants by name (C, c, ...); absent entries
    /// default to 1.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Ambient dimension for the Weingarten kinds.
    #[serde(default)]
    pub m: Option<usize>,
    /// Beta shape parameters for the tails kind.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Tail deviations for the tails kind.
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Spectrum mode for the lyapunov kind.
    #[serde(default)]
    pub mode: Option<SpectrumMode>,
    /// Worker override; absent falls back to RMTLAB_WORKERS, then to the
    /// rayon default.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// The named constant, defaulting to 1 when unset.
    pub fn constant(&self, name: &str) -> f64 {
        self.constants.get(name).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        match self.kind {
            ExperimentKind::Tails => {
                if self.alpha.is_none() || self.beta.is_none() {
                    return Err(Error::Config(
                        "tails experiments need alpha and beta".into(),
                    ));
                }
                if self.eps.is_empty() {
                    return Err(Error::Config("tails experiments need eps values".into()));
                }
            }
            ExperimentKind::WeingartenVerify => {
                if self.k == 0 {
                    return Err(Error::Config("weingarten-verify needs k >= 1".into()));
                }
                if self.m.is_none() && self.n == 0 {
                    return Err(Error::Config(
                        "weingarten-verify needs an ambient dimension m (or n with truncations)"
                            .into(),
                    ));
                }
            }
            _ => {
                if self.n == 0 || self.num_factors == 0 {
                    return Err(Error::Config("n and N must be >= 1".into()));
                }
                if let Truncations::PerFactor(list) = &self.truncations {
                    if list.len() != self.num_factors {
                        return Err(Error::Config(format!(
                            "truncation list has length {} but N = {}",
                            list.len(),
                            self.num_factors
                        )));
                    }
                }
                if self.k == 0 || self.k > self.n {
                    return Err(Error::Config(format!(
                        "k={} must satisfy 1 <= k <= n={}",
                        self.k, self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// The product ensemble this config describes.
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        let truncations = match &self.truncations {
            Truncations::Uniform(l) => vec![*l; self.num_factors],
            Truncations::PerFactor(list) => {
                if list.len() != self.num_factors {
                    return Err(Error::Config(format!(
                        "truncation list has length {} but N = {}",
                        list.len(),
                        self.num_factors
                    )));
                }
                list.clone()
            }
        };
        EnsembleSpec::new(self.n, truncations)
    }

    /// Ambient dimension for Weingarten work: explicit m, or n plus the
    /// uniform truncation.
    pub fn ambient_dimension(&self) -> Result<usize> {
        if let Some(m) = self.m {
            return Ok(m);
        }
        match &self.truncations {
            Truncations::Uniform(l) => Ok(self.n + l),
            Truncations::PerFactor(_) => Err(Error::Config(
                "ambient dimension requires explicit m or a uniform truncation".into(),
            )),
        }
    }
}
