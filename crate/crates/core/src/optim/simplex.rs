use serde::{Deserialize, Serialize};

use super::{Objective, Optimizer, OptimizerError};

const REFLECT: f64 = 1.0;

/// Dimension-adapted expansion and contraction coefficients (Gao & Han);
/// they reduce to the classic 2 and ½ in one dimension.
fn coefficients(dim: usize) -> (f64, f64) {
    let n = dim.max(1) as f64;
    let expand = 1.0 + 2.0 / n;
    let contract = (0.75 - 1.0 / (2.0 * n)).max(0.5);
    (expand, contract)
}

/// Derivative-free local search over a simplex of `dim + 1` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexParams {
    /// Edge length of the initial simplex around the starting point.
    pub initial_step: f64,
    /// Factor applied to every edge on a shrink.
    pub shrink: f64,
    /// Spread in both values and coordinates below which the simplex has collapsed.
    pub tolerance: f64,
}

impl Default for SimplexParams {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            shrink: 0.5,
            tolerance: 1e-8,
        }
    }
}

impl SimplexParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| OptimizerError::Hyperparameters {
            kind: "cobyla_like",
            reason: reason.to_string(),
        };
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(bad("initial_step must be positive"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(bad("shrink must lie in (0, 1)"));
        }
        if !(self.tolerance > 0.0) {
            return Err(bad("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexMove {
    Reflect,
    Expand,
    ContractOutside,
    ContractInside,
    Shrink,
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState {
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
    converged: bool,
    last_accepted: Vec<f64>,
}

impl SimplexState {
    /// Axis-aligned simplex `x0, x0 + step·e_i`.
    pub fn around(x0: &[f64], step: f64, objective: &mut Objective<'_>) -> Self {
        let mut vertices = vec![x0.to_vec()];
        for i in 0..x0.len() {
            let mut v = x0.to_vec();
            v[i] += step;
            vertices.push(v);
        }
        Self::from_vertices(vertices, objective)
    }

    pub fn from_vertices(vertices: Vec<Vec<f64>>, objective: &mut Objective<'_>) -> Self {
        let values = vertices.iter().map(|v| objective(v)).collect();
        Self::from_evaluated(vertices, values)
    }

    pub fn from_evaluated(vertices: Vec<Vec<f64>>, values: Vec<f64>) -> Self {
        let mut state = Self {
            last_accepted: vertices[0].clone(),
            vertices,
            values,
            converged: false,
        };
        state.order();
        state.last_accepted = state.vertices[0].clone();
        state
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.vertices[0], self.values[0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Vertex accepted by the latest step (the best vertex after a shrink).
    pub fn last_accepted(&self) -> &[f64] {
        &self.last_accepted
    }

    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = idx.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    /// Centroid of every vertex except the worst.
    pub fn centroid(&self) -> Vec<f64> {
        let keep = &self.vertices[..self.vertices.len() - 1];
        let dim = self.vertices[0].len();
        (0..dim)
            .map(|d| keep.iter().map(|v| v[d]).sum::<f64>() / keep.len() as f64)
            .collect()
    }

    /// Point `centroid + coef·(centroid − worst)`.
    pub fn along(&self, coef: f64) -> Vec<f64> {
        let c = self.centroid();
        let worst = self.vertices.last().expect("non-empty simplex");
        c.iter().zip(worst).map(|(c, w)| c + coef * (c - w)).collect()
    }

    fn spread(&self) -> (f64, f64) {
        let f_spread = self.values.last().unwrap() - self.values[0];
        let best = &self.vertices[0];
        let x_spread = self.vertices[1..]
            .iter()
            .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        (f_spread, x_spread)
    }

    fn replace_worst(&mut self, x: Vec<f64>, f: f64) {
        let last = self.vertices.len() - 1;
        self.last_accepted.clone_from(&x);
        self.vertices[last] = x;
        self.values[last] = f;
        self.order();
    }

    /// One reflect/expand/contract/shrink update.
    pub fn step(&mut self, params: &SimplexParams, objective: &mut Objective<'_>) -> SimplexMove {
        if self.converged {
            return SimplexMove::Converged;
        }
        let (f_spread, x_spread) = self.spread();
        if f_spread <= params.tolerance && x_spread <= params.tolerance {
            self.converged = true;
            return SimplexMove::Converged;
        }
        let n = self.values.len() - 1;
        let (expand, contract) = coefficients(n);
        let f_best = self.values[0];
        let f_second = self.values[n.saturating_sub(1)];
        let f_worst = self.values[n];

        let xr = self.along(REFLECT);
        let fr = objective(&xr);
        if fr < f_best {
            let xe = self.along(REFLECT * expand);
            let fe = objective(&xe);
            if fe < fr {
                self.replace_worst(xe, fe);
                return SimplexMove::Expand;
            }
            self.replace_worst(xr, fr);
            return SimplexMove::Reflect;
        }
        if fr < f_second {
            self.replace_worst(xr, fr);
            return SimplexMove::Reflect;
        }
        if fr < f_worst {
            let xc = self.along(REFLECT * contract);
            let fc = objective(&xc);
            if fc <= fr {
                self.replace_worst(xc, fc);
                return SimplexMove::ContractOutside;
            }
        } else {
            let xc = self.along(-contract);
            let fc = objective(&xc);
            if fc < f_worst {
                self.replace_worst(xc, fc);
                return SimplexMove::ContractInside;
            }
        }
        let best = self.vertices[0].clone();
        for i in 1..self.vertices.len() {
            let v: Vec<f64> = self.vertices[i]
                .iter()
                .zip(&best)
                .map(|(x, b)| b + params.shrink * (x - b))
                .collect();
            self.values[i] = objective(&v);
            self.vertices[i] = v;
        }
        self.order();
        self.last_accepted = self.vertices[0].clone();
        SimplexMove::Shrink
    }
}

/// Simplex search recording one accepted point per step.
///
/// The first `dim` steps evaluate the initial simplex one vertex at a time
/// (a sweep over the parameters); afterwards each step is one simplex update
/// and the current point is the vertex it accepted.
pub struct SimplexOptimizer {
    params: SimplexParams,
    building: Option<(Vec<Vec<f64>>, Vec<f64>)>,
    state: Option<SimplexState>,
}

impl SimplexOptimizer {
    pub fn new(params: SimplexParams) -> Self {
        Self {
            params,
            building: None,
            state: None,
        }
    }
}

impl Optimizer for SimplexOptimizer {
    fn step(&mut self, _step: usize, params: &mut Vec<f64>, objective: &mut Objective<'_>) {
        if params.is_empty() {
            return;
        }
        if let Some(state) = self.state.as_mut() {
            state.step(&self.params, objective);
            params.clone_from(&state.last_accepted().to_vec());
            return;
        }
        let (vertices, values) = self.building.get_or_insert_with(|| {
            let f0 = objective(params);
            (vec![params.clone()], vec![f0])
        });
        let mut next = vertices[0].clone();
        next[vertices.len() - 1] += self.params.initial_step;
        values.push(objective(&next));
        vertices.push(next.clone());
        if vertices.len() == next.len() + 1 {
            let (vertices, values) = self.building.take().expect("building simplex");
            self.state = Some(SimplexState::from_evaluated(vertices, values));
        }
        *params = next;
    }
}
