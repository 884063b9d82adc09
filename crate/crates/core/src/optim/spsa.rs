use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Objective, Optimizer, OptimizerError};

/// Gain schedules `a_k = a / (k + 1 + stability)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaParams {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub stability: f64,
}

impl Default for SpsaParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            c: 0.15,
            alpha: 0.602,
            gamma: 0.101,
            stability: 0.0,
        }
    }
}

impl SpsaParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| OptimizerError::Hyperparameters {
            kind: "spsa",
            reason: reason.to_string(),
        };
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(bad("gain `a` must be positive"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(bad("perturbation `c` must be positive"));
        }
        if !(self.alpha >= 0.0 && self.gamma >= 0.0 && self.stability >= 0.0) {
            return Err(bad("decay exponents and stability must be non-negative"));
        }
        Ok(())
    }

    pub fn gain(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.stability).powf(self.alpha)
    }

    pub fn perturbation(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

/// One simultaneous-perturbation update: two evaluations at `θ ± c_k·Δ`
/// with a random sign vector `Δ`, then `θ ← θ − a_k·ĝ`.
pub fn spsa_iteration(
    params: &mut [f64],
    objective: &mut Objective<'_>,
    hyper: &SpsaParams,
    k: usize,
    rng: &mut impl Rng,
) {
    let ck = hyper.perturbation(k);
    let ak = hyper.gain(k);
    let delta: Vec<f64> = (0..params.len())
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let plus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + ck * d).collect();
    let minus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p - ck * d).collect();
    let diff = objective(&plus) - objective(&minus);
    if ak == 0.0 {
        return;
    }
    for (p, d) in params.iter_mut().zip(&delta) {
        *p -= ak * diff / (2.0 * ck * d);
    }
}

pub struct SpsaOptimizer {
    params: SpsaParams,
    rng: ChaCha8Rng,
}

impl SpsaOptimizer {
    pub fn new(params: SpsaParams, rng: ChaCha8Rng) -> Self {
        Self { params, rng }
    }
}

impl Optimizer for SpsaOptimizer {
    fn step(&mut self, step: usize, params: &mut Vec<f64>, objective: &mut Objective<'_>) {
        spsa_iteration(params, objective, &self.params, step, &mut self.rng);
    }
}
