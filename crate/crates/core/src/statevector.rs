//! Dense statevector simulation of the rotation/CNOT ansatz.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubo::{Configuration, IsingHamiltonian};

/// Desk-scale qubit bound for the dense simulator.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("CNOT control and target are both qubit {0}")]
    SameQubit(usize),
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("parameter {0} is not finite")]
    NonFiniteParameter(usize),
    #[error("dimension mismatch: state has {state} qubits, operator has {operator}")]
    DimensionMismatch { state: usize, operator: usize },
    #[error("at least one shot is required")]
    NoShots,
    #[error("amplitudes are not normalized (norm² = {0})")]
    NotNormalized(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Y,
    Z,
}

/// `2^n` complex amplitudes; basis index bit `i` is qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self, SimError> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, k: usize) -> Result<Self, SimError> {
        check_qubits(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[k % (1 << n)] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let n = amps.len().trailing_zeros() as usize;
        if !amps.len().is_power_of_two() {
            return Err(SimError::QubitCount(n));
        }
        check_qubits(n)?;
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimError> {
        if qubit >= self.n {
            return Err(SimError::QubitOutOfRange { qubit, n: self.n });
        }
        Ok(())
    }

    /// Applies `exp(-i·angle·P/2)` for `P ∈ {Y, Z}` on one qubit.
    pub fn rotate(&mut self, qubit: usize, axis: Axis, angle: f64) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        let (s, c) = (angle / 2.0).sin_cos();
        let mask = 1usize << qubit;
        match axis {
            Axis::Y => {
                for k in 0..self.amps.len() {
                    if k & mask == 0 {
                        let a0 = self.amps[k];
                        let a1 = self.amps[k | mask];
                        self.amps[k] = a0 * c - a1 * s;
                        self.amps[k | mask] = a0 * s + a1 * c;
                    }
                }
            }
            Axis::Z => {
                let down = Complex64::new(c, -s);
                let up = Complex64::new(c, s);
                for (k, a) in self.amps.iter_mut().enumerate() {
                    *a *= if k & mask == 0 { down } else { up };
                }
            }
        }
        Ok(())
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(SimError::SameQubit(control));
        }
        let (cm, tm) = (1usize << control, 1usize << target);
        for k in 0..self.amps.len() {
            if k & cm != 0 && k & tm == 0 {
                self.amps.swap(k, k | tm);
            }
        }
        Ok(())
    }

    /// Exact `⟨ψ|H|ψ⟩` for a diagonal Hamiltonian.
    pub fn expectation(&self, h: &IsingHamiltonian) -> Result<f64, SimError> {
        if h.n() != self.n {
            return Err(SimError::DimensionMismatch {
                state: self.n,
                operator: h.n(),
            });
        }
        Ok(self.expectation_diagonal(&h.diagonal()))
    }

    /// `Σ_k |amp_k|² · energies[k]` for precomputed basis energies.
    pub fn expectation_diagonal(&self, energies: &[f64]) -> f64 {
        self.amps
            .iter()
            .zip(energies)
            .map(|(a, e)| a.norm_sqr() * e)
            .sum()
    }

    /// Probability of each qubit reading `|1⟩`.
    pub fn marginals(&self) -> MarginalDistribution {
        let mut p = vec![0.0; self.n];
        for (k, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            for (i, pi) in p.iter_mut().enumerate() {
                if (k >> i) & 1 == 1 {
                    *pi += w;
                }
            }
        }
        MarginalDistribution(p.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    /// Seeded multinomial draw of `shots` measurements in the computational basis.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<Histogram, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_counts_with(shots, &mut rng)
    }

    pub fn sample_counts_with(
        &self,
        shots: u64,
        rng: &mut impl rand::Rng,
    ) -> Result<Histogram, SimError> {
        if shots == 0 {
            return Err(SimError::NoShots);
        }
        let weights = self.probabilities();
        let dist = WeightedIndex::new(&weights).map_err(|_| SimError::NotNormalized(0.0))?;
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(dist.sample(rng)).or_insert(0) += 1;
        }
        Ok(Histogram {
            n: self.n,
            shots,
            counts,
        })
    }
}

fn check_qubits(n: usize) -> Result<(), SimError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(SimError::QubitCount(n));
    }
    Ok(())
}

/// Measurement outcome counts keyed by basis-state index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub n: usize,
    pub shots: u64,
    pub counts: BTreeMap<usize, u64>,
}

impl Histogram {
    /// Counts keyed by bitstring (qubit 0 leftmost).
    pub fn by_bitstring(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .map(|(&k, &c)| (Configuration::from_index(k, self.n).to_string(), c))
            .collect()
    }

    /// Sample mean of the basis energies over all shots.
    pub fn mean_energy(&self, energies: &[f64]) -> f64 {
        let total: f64 = self
            .counts
            .iter()
            .map(|(&k, &c)| energies[k] * c as f64)
            .sum();
        total / self.shots as f64
    }
}

/// Per-qubit probability of `|1⟩`, i.e. per-note loudness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarginalDistribution(pub Vec<f64>);

impl MarginalDistribution {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Alternating rotation layers and CNOT entangling layers.
///
/// Layer 0 is `Ry` then `Rz` on every qubit; each of the `reps` entangling
/// layers applies its CNOT list followed by another `Ry`/`Rz` rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n: usize,
    pub reps: usize,
    pub entanglement: Vec<(usize, usize)>,
}

impl AnsatzSpec {
    /// Linear-chain entanglement `(0,1), (1,2), …`.
    pub fn linear(n: usize, reps: usize) -> Result<Self, SimError> {
        let entanglement = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::new(n, reps, entanglement)
    }

    pub fn new(n: usize, reps: usize, entanglement: Vec<(usize, usize)>) -> Result<Self, SimError> {
        check_qubits(n)?;
        for &(c, t) in &entanglement {
            for q in [c, t] {
                if q >= n {
                    return Err(SimError::QubitOutOfRange { qubit: q, n });
                }
            }
            if c == t {
                return Err(SimError::SameQubit(c));
            }
        }
        Ok(Self {
            n,
            reps,
            entanglement,
        })
    }

    pub fn parameter_count(&self) -> usize {
        2 * self.n * (self.reps + 1)
    }

    pub fn zero_parameters(&self) -> ParameterVector {
        ParameterVector(vec![0.0; self.parameter_count()])
    }

    /// Prepares `U(θ)|0…0⟩`. Parameters are layer-major; within a layer all
    /// `Ry` angles by qubit come first, then all `Rz` angles.
    pub fn prepare(&self, params: &ParameterVector) -> Result<StateVector, SimError> {
        let expected = self.parameter_count();
        if params.len() != expected {
            return Err(SimError::ParameterCount {
                expected,
                got: params.len(),
            });
        }
        if let Some(i) = params.0.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteParameter(i));
        }
        let mut state = StateVector::zero(self.n)?;
        for (layer, angles) in params.0.chunks(2 * self.n).enumerate() {
            if layer > 0 {
                for &(c, t) in &self.entanglement {
                    state.cnot(c, t)?;
                }
            }
            let (ry, rz) = angles.split_at(self.n);
            for (q, &a) in ry.iter().enumerate() {
                state.rotate(q, Axis::Y, a)?;
            }
            for (q, &a) in rz.iter().enumerate() {
                state.rotate(q, Axis::Z, a)?;
            }
        }
        Ok(state)
    }
}

/// Rotation angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}
