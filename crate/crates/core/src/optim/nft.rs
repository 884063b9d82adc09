use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{Objective, Optimizer};

/// Fits below this amplitude are treated as flat.
const DEGENERATE_AMPLITUDE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NftParams {
    pub sweep_order: SweepOrder,
}

impl NftParams {
    /// Parameter index updated at a given step.
    pub fn index_at(&self, step: usize, count: usize) -> usize {
        match self.sweep_order {
            SweepOrder::Ascending => step % count,
            SweepOrder::Descending => count - 1 - step % count,
        }
    }
}

/// Sets parameter `k` to the exact minimizer of the sinusoid
/// `E(θ_k) = A + B·cos(θ_k − φ)` reconstructed from evaluations at
/// `θ_k` and `θ_k ± π/2`. Returns `false` if the fit is flat and the
/// parameter was left alone.
pub fn nft_parameter_update(params: &mut [f64], k: usize, objective: &mut Objective<'_>) -> bool {
    let theta = params[k];
    let mut at = |value: f64| {
        let mut probe = params.to_vec();
        probe[k] = value;
        objective(&probe)
    };
    let e0 = at(theta);
    let e_plus = at(theta + FRAC_PI_2);
    let e_minus = at(theta - FRAC_PI_2);

    let mean = 0.5 * (e_plus + e_minus);
    let cos_part = e0 - mean;
    let sin_part = 0.5 * (e_minus - e_plus);
    let amplitude = cos_part.hypot(sin_part);
    let scale = 1.0 + e0.abs().max(e_plus.abs()).max(e_minus.abs());
    if !amplitude.is_finite() || amplitude <= DEGENERATE_AMPLITUDE * scale {
        return false;
    }
    // θ − φ, so the minimum sits at φ + π
    let offset = sin_part.atan2(cos_part);
    params[k] = wrap_angle(theta - offset + PI);
    true
}

/// Maps an angle into `(−π, π]`.
fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Sequential per-parameter minimization, one parameter per step.
pub struct NftOptimizer {
    params: NftParams,
}

impl NftOptimizer {
    pub fn new(params: NftParams) -> Self {
        Self { params }
    }
}

impl Optimizer for NftOptimizer {
    fn step(&mut self, step: usize, params: &mut Vec<f64>, objective: &mut Objective<'_>) {
        if params.is_empty() {
            return;
        }
        let k = self.params.index_at(step, params.len());
        nft_parameter_update(params, k, objective);
    }
}
