//! The VQE loop: per-iteration records, schedules of Hamiltonians and
//! adiabatic transitions between them.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optim::OptimizerConfig;
use crate::qubo::{IsingHamiltonian, QuboError};
use crate::statevector::{AnsatzSpec, MarginalDistribution, ParameterVector, SimError, MAX_QUBITS};

#[derive(Debug, Error)]
pub enum VqeError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("non-finite energy at step {step}")]
    NonFinite {
        step: usize,
        partial: Vec<IterationRecord>,
    },
    #[error("run aborted after {} records", partial.len())]
    Aborted { partial: Vec<IterationRecord> },
}

impl VqeError {
    /// Records completed before the run stopped, if any.
    pub fn partial_records(&self) -> &[IterationRecord] {
        match self {
            VqeError::NonFinite { partial, .. } | VqeError::Aborted { partial } => partial,
            _ => &[],
        }
    }
}

/// One step of the optimization: the datum that gets sonified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    pub segment: usize,
    pub params: ParameterVector,
    pub marginals: MarginalDistribution,
    pub expectation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Receives every record as soon as it is produced. Returning
/// [`Flow::Stop`] aborts the run after the current record.
pub trait Recorder {
    fn record(&mut self, record: &IterationRecord) -> Flow;
}

impl<F: FnMut(&IterationRecord) -> Flow> Recorder for F {
    fn record(&mut self, record: &IterationRecord) -> Flow {
        self(record)
    }
}

/// Recorder that ignores everything.
pub struct Discard;

impl Recorder for Discard {
    fn record(&mut self, _: &IterationRecord) -> Flow {
        Flow::Continue
    }
}

/// One Hamiltonian actually optimized during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub segment: usize,
    /// Interpolation parameter toward `segment` for adiabatic sub-steps.
    pub mix: Option<f64>,
    pub hamiltonian: IsingHamiltonian,
    pub first_step: usize,
    pub iterations: usize,
    /// Lowest basis energy of `hamiltonian`.
    pub ground_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub records: Vec<IterationRecord>,
    pub final_params: ParameterVector,
    pub final_expectation: f64,
    /// Ground energy of the last Hamiltonian in the run.
    pub ground_truth: Option<f64>,
    pub stages: Vec<Stage>,
}

impl RunResult {
    /// Final expectation of each schedule segment.
    pub fn segment_finals(&self) -> Vec<(usize, f64, f64)> {
        let mut out: Vec<(usize, f64, f64)> = Vec::new();
        for stage in &self.stages {
            let last = &self.records[stage.first_step + stage.iterations - 1];
            match out.last_mut() {
                Some(entry) if entry.0 == stage.segment => {
                    *entry = (stage.segment, last.expectation, stage.ground_energy)
                }
                _ => out.push((stage.segment, last.expectation, stage.ground_energy)),
            }
        }
        out
    }

    /// Stage that produced a given step.
    pub fn stage_of(&self, step: usize) -> Option<&Stage> {
        self.stages
            .iter()
            .find(|s| (s.first_step..s.first_step + s.iterations).contains(&step))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    #[default]
    Sequential,
    Adiabatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub hamiltonian: IsingHamiltonian,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub segments: Vec<Segment>,
    pub mode: ScheduleMode,
    pub adiabatic_steps: usize,
}

impl ScheduleSpec {
    pub fn single(hamiltonian: IsingHamiltonian, iterations: usize) -> Self {
        Self {
            segments: vec![Segment {
                hamiltonian,
                iterations,
            }],
            mode: ScheduleMode::Sequential,
            adiabatic_steps: 1,
        }
    }

    pub fn sequential(segments: Vec<Segment>) -> Self {
        Self {
            segments,
            mode: ScheduleMode::Sequential,
            adiabatic_steps: 1,
        }
    }

    pub fn adiabatic(segments: Vec<Segment>, steps: usize) -> Self {
        Self {
            segments,
            mode: ScheduleMode::Adiabatic,
            adiabatic_steps: steps,
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.segments.iter().map(|s| s.iterations).sum()
    }

    fn validate(&self) -> Result<usize, VqeError> {
        let first = self
            .segments
            .first()
            .ok_or_else(|| VqeError::Schedule("at least one segment is required".into()))?;
        let n = first.hamiltonian.n();
        for (i, s) in self.segments.iter().enumerate() {
            if s.hamiltonian.n() != n {
                return Err(VqeError::Shape(format!(
                    "segment {i} has {} spins, segment 0 has {n}",
                    s.hamiltonian.n()
                )));
            }
            if s.iterations == 0 {
                return Err(VqeError::Schedule(format!("segment {i} has a zero budget")));
            }
        }
        if self.mode == ScheduleMode::Adiabatic {
            if self.adiabatic_steps == 0 {
                return Err(VqeError::Schedule("adiabatic_steps must be at least 1".into()));
            }
            for (i, s) in self.segments.iter().enumerate().skip(1) {
                if s.iterations < self.adiabatic_steps {
                    return Err(VqeError::Schedule(format!(
                        "segment {i} budget {} is smaller than adiabatic_steps {}",
                        s.iterations, self.adiabatic_steps
                    )));
                }
            }
        }
        Ok(n)
    }

    /// Expands the schedule into the Hamiltonians actually optimized.
    fn stages(&self) -> Result<Vec<(usize, Option<f64>, IsingHamiltonian, usize)>, VqeError> {
        let mut out = Vec::new();
        for (s, seg) in self.segments.iter().enumerate() {
            if s == 0 || self.mode == ScheduleMode::Sequential {
                out.push((s, None, seg.hamiltonian.clone(), seg.iterations));
                continue;
            }
            let m = self.adiabatic_steps;
            let prev = &self.segments[s - 1].hamiltonian;
            for j in 1..=m {
                // spread the remainder over the earliest sub-steps
                let budget = seg.iterations / m + usize::from(j - 1 < seg.iterations % m);
                let t = j as f64 / m as f64;
                out.push((s, Some(t), prev.interpolate(&seg.hamiltonian, t)?, budget));
            }
        }
        Ok(out)
    }
}

/// Where the initial parameters come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPoint {
    #[default]
    Zeros,
    /// Uniform in `(−π, π)` from a seeded generator.
    Random { seed: u64 },
}

impl InitialPoint {
    pub fn parameters(&self, ansatz: &AnsatzSpec) -> ParameterVector {
        match *self {
            InitialPoint::Zeros => ansatz.zero_parameters(),
            InitialPoint::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pi = std::f64::consts::PI;
                ParameterVector(
                    (0..ansatz.parameter_count())
                        .map(|_| rng.gen_range(-pi..pi))
                        .collect(),
                )
            }
        }
    }
}

/// Ansatz, optimizer and estimator shared by every stage of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Vqe {
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerConfig,
    /// Measurement shots per energy estimate; `None` uses the exact expectation.
    pub shots: Option<u64>,
}

/// Offsets the optimizer seed for the independent shot-sampling stream.
const SHOT_STREAM: u64 = 0x5eed_0f_5a3b1e;

impl Vqe {
    pub fn new(ansatz: AnsatzSpec, optimizer: OptimizerConfig) -> Self {
        Self {
            ansatz,
            optimizer,
            shots: None,
        }
    }

    pub fn with_shots(mut self, shots: Option<u64>) -> Self {
        self.shots = shots;
        self
    }

    /// Optimizes a single Hamiltonian for exactly `iterations` records.
    pub fn run(
        &self,
        h: &IsingHamiltonian,
        iterations: usize,
        initial: &ParameterVector,
        recorder: &mut dyn Recorder,
    ) -> Result<RunResult, VqeError> {
        self.run_schedule(&ScheduleSpec::single(h.clone(), iterations), initial, recorder)
    }

    /// Runs every segment in order, carrying the final parameters of one
    /// stage into the next. Record `t` holds the parameters before update
    /// `t`; the last stage step records without proposing a further update.
    pub fn run_schedule(
        &self,
        schedule: &ScheduleSpec,
        initial: &ParameterVector,
        recorder: &mut dyn Recorder,
    ) -> Result<RunResult, VqeError> {
        let n = schedule.validate()?;
        if n != self.ansatz.n {
            return Err(VqeError::Shape(format!(
                "Hamiltonian has {n} spins, ansatz has {} qubits",
                self.ansatz.n
            )));
        }
        if n > MAX_QUBITS {
            return Err(SimError::QubitCount(n).into());
        }
        if initial.len() != self.ansatz.parameter_count() {
            return Err(VqeError::Shape(format!(
                "initial point has {} parameters, ansatz needs {}",
                initial.len(),
                self.ansatz.parameter_count()
            )));
        }
        self.optimizer
            .method
            .validate()
            .map_err(|e| VqeError::Schedule(e.to_string()))?;

        let mut optimizer_rng = ChaCha8Rng::seed_from_u64(self.optimizer.seed);
        let mut shot_rng = ChaCha8Rng::seed_from_u64(self.optimizer.seed ^ SHOT_STREAM);
        let mut params = initial.0.clone();
        let mut records: Vec<IterationRecord> = Vec::with_capacity(schedule.total_iterations());
        let mut stages = Vec::new();

        for (segment, mix, hamiltonian, iterations) in schedule.stages()? {
            let diagonal = hamiltonian.diagonal();
            let ground_energy = diagonal.iter().copied().fold(f64::INFINITY, f64::min);
            stages.push(Stage {
                segment,
                mix,
                hamiltonian,
                first_step: records.len(),
                iterations,
                ground_energy,
            });
            // each stage gets a fresh optimizer drawing from the run's stream
            let stage_rng = ChaCha8Rng::seed_from_u64(optimizer_rng.gen());
            let mut optimizer = self.optimizer.build(stage_rng);

            for t in 0..iterations {
                let step = records.len();
                let vector = ParameterVector(params.clone());
                let state = self.ansatz.prepare(&vector).map_err(|e| match e {
                    SimError::NonFiniteParameter(_) => VqeError::NonFinite {
                        step,
                        partial: records.clone(),
                    },
                    other => other.into(),
                })?;
                let expectation = match self.shots {
                    None => state.expectation_diagonal(&diagonal),
                    Some(shots) => state.sample_counts_with(shots, &mut shot_rng)?.mean_energy(&diagonal),
                };
                if !expectation.is_finite() {
                    return Err(VqeError::NonFinite {
                        step,
                        partial: records,
                    });
                }
                let record = IterationRecord {
                    step,
                    segment,
                    params: vector,
                    marginals: state.marginals(),
                    expectation,
                };
                let flow = recorder.record(&record);
                records.push(record);
                if flow == Flow::Stop {
                    return Err(VqeError::Aborted { partial: records });
                }
                if t + 1 == iterations {
                    break;
                }

                let failed = Cell::new(false);
                let mut objective = |x: &[f64]| -> f64 {
                    let estimate = self.ansatz.prepare(&ParameterVector(x.to_vec())).and_then(|s| {
                        Ok(match self.shots {
                            None => s.expectation_diagonal(&diagonal),
                            Some(shots) => {
                                s.sample_counts_with(shots, &mut shot_rng)?.mean_energy(&diagonal)
                            }
                        })
                    });
                    match estimate {
                        Ok(e) if e.is_finite() => e,
                        _ => {
                            failed.set(true);
                            f64::NAN
                        }
                    }
                };
                optimizer.step(t, &mut params, &mut objective);
                if failed.get() {
                    log::warn!("non-finite energy during optimizer step {step}");
                }
            }
        }

        let last = records.last().expect("validated schedules are non-empty");
        Ok(RunResult {
            final_params: last.params.clone(),
            final_expectation: last.expectation,
            ground_truth: stages.last().map(|s| s.ground_energy),
            records,
            stages,
        })
    }
}
