//! Gradient-free optimizers driving the VQE loop.
//!
//! Every optimizer works against a plain objective closure so it can be
//! exercised on surrogate landscapes as well as on simulated circuits.

mod nft;
mod simplex;
mod spsa;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use nft::{nft_parameter_update, NftOptimizer, NftParams, SweepOrder};
pub use simplex::{SimplexOptimizer, SimplexParams, SimplexState};
pub use spsa::{spsa_iteration, SpsaOptimizer, SpsaParams};

/// Objective evaluated by an optimizer: parameters in, energy out.
pub type Objective<'a> = dyn FnMut(&[f64]) -> f64 + 'a;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("unknown optimizer kind `{0}` (expected spsa, nft or cobyla_like)")]
    UnknownKind(String),
    #[error("invalid {kind} hyperparameters: {reason}")]
    Hyperparameters { kind: &'static str, reason: String },
}

/// One optimizer in the VQE loop. `step` performs a single update of the
/// current parameters; the run loop records the parameters between steps.
pub trait Optimizer {
    fn step(&mut self, step: usize, params: &mut Vec<f64>, objective: &mut Objective<'_>);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spsa(SpsaParams),
    Nft(NftParams),
    CobylaLike(SimplexParams),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Spsa(_) => "spsa",
            Method::Nft(_) => "nft",
            Method::CobylaLike(_) => "cobyla_like",
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        match self {
            Method::Spsa(p) => p.validate(),
            Method::Nft(_) => Ok(()),
            Method::CobylaLike(p) => p.validate(),
        }
    }
}

/// Optimizer choice plus the seed for every random draw of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOptimizerConfig", into = "RawOptimizerConfig")]
pub struct OptimizerConfig {
    pub method: Method,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn spsa(seed: u64) -> Self {
        Self {
            method: Method::Spsa(SpsaParams::default()),
            seed,
        }
    }

    pub fn nft(seed: u64) -> Self {
        Self {
            method: Method::Nft(NftParams::default()),
            seed,
        }
    }

    pub fn cobyla_like(seed: u64) -> Self {
        Self {
            method: Method::CobylaLike(SimplexParams::default()),
            seed,
        }
    }

    /// Default configuration for a kind name.
    pub fn named(kind: &str, seed: u64) -> Result<Self, OptimizerError> {
        match kind {
            "spsa" => Ok(Self::spsa(seed)),
            "nft" => Ok(Self::nft(seed)),
            "cobyla_like" | "cobyla" => Ok(Self::cobyla_like(seed)),
            other => Err(OptimizerError::UnknownKind(other.to_string())),
        }
    }

    pub fn kind(&self) -> &'static str {
        self.method.name()
    }

    pub(crate) fn build(&self, rng: ChaCha8Rng) -> Box<dyn Optimizer + Send> {
        match &self.method {
            Method::Spsa(p) => Box::new(SpsaOptimizer::new(p.clone(), rng)),
            Method::Nft(p) => Box::new(NftOptimizer::new(p.clone())),
            Method::CobylaLike(p) => Box::new(SimplexOptimizer::new(p.clone())),
        }
    }
}

/// Wire form: `{"kind": "...", "hyperparameters": {...}, "seed": 0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizerConfig {
    kind: String,
    #[serde(default)]
    hyperparameters: serde_json::Value,
    #[serde(default)]
    seed: u64,
}

impl TryFrom<RawOptimizerConfig> for OptimizerConfig {
    type Error = OptimizerError;

    fn try_from(raw: RawOptimizerConfig) -> Result<Self, Self::Error> {
        fn hyper<T: for<'de> Deserialize<'de> + Default>(
            kind: &'static str,
            value: serde_json::Value,
        ) -> Result<T, OptimizerError> {
            if value.is_null() {
                return Ok(T::default());
            }
            serde_json::from_value(value).map_err(|e| OptimizerError::Hyperparameters {
                kind,
                reason: e.to_string(),
            })
        }
        let method = match raw.kind.as_str() {
            "spsa" => Method::Spsa(hyper("spsa", raw.hyperparameters)?),
            "nft" => Method::Nft(hyper("nft", raw.hyperparameters)?),
            "cobyla_like" | "cobyla" => {
                Method::CobylaLike(hyper("cobyla_like", raw.hyperparameters)?)
            }
            other => return Err(OptimizerError::UnknownKind(other.to_string())),
        };
        method.validate()?;
        Ok(Self {
            method,
            seed: raw.seed,
        })
    }
}

impl From<OptimizerConfig> for RawOptimizerConfig {
    fn from(c: OptimizerConfig) -> Self {
        let hyperparameters = match &c.method {
            Method::Spsa(p) => serde_json::to_value(p),
            Method::Nft(p) => serde_json::to_value(p),
            Method::CobylaLike(p) => serde_json::to_value(p),
        }
        .expect("hyperparameters serialize");
        Self {
            kind: c.method.name().to_string(),
            hyperparameters,
            seed: c.seed,
        }
    }
}
