//! The JSON run configuration and its resolution into a runnable plan.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optim::{OptimizerConfig, OptimizerError};
use crate::qubo::{chord_qubo, note_index, Boundary, ChordEncoding, ChordSpec, QuboError, QuboProblem};
use crate::statevector::{AnsatzSpec, ParameterVector, SimError};
use crate::vqe::{InitialPoint, ScheduleMode, ScheduleSpec, Segment, Vqe};

/// Upper bound on records per run; every record is kept in memory.
pub const MAX_RECORDS: usize = 100_000;

pub const DEFAULT_ITERATIONS: usize = 150;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Qubo { context: String, source: QuboError },
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("ansatz: {0}")]
    Ansatz(#[from] SimError),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("schedule needs {records} records, the limit is {MAX_RECORDS}")]
    TooManyRecords { records: usize },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    /// Shots per energy estimate; absent means the exact expectation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub initial: InitialPoint,
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_optimizer() -> OptimizerConfig {
    OptimizerConfig::nft(0)
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            optimizer: default_optimizer(),
            ansatz: AnsatzConfig::default(),
            shots: None,
            schedule: None,
            initial: InitialPoint::Zeros,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
}

fn default_reps() -> usize {
    1
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            reps: 1,
            entanglement: Entanglement::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementLayout {
    #[default]
    Linear,
    Circular,
    Full,
}

/// A named layout or an explicit list of `[control, target]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entanglement {
    Named(EntanglementLayout),
    Pairs(Vec<(usize, usize)>),
}

impl Default for Entanglement {
    fn default() -> Self {
        Entanglement::Named(EntanglementLayout::Linear)
    }
}

impl Entanglement {
    pub fn pairs(&self, n: usize) -> Vec<(usize, usize)> {
        let chain = || (0..n.saturating_sub(1)).map(|i| (i, i + 1));
        match self {
            Entanglement::Named(EntanglementLayout::Linear) => chain().collect(),
            Entanglement::Named(EntanglementLayout::Circular) => {
                let mut p: Vec<_> = chain().collect();
                if n > 2 {
                    p.push((n - 1, 0));
                }
                p
            }
            Entanglement::Named(EntanglementLayout::Full) => {
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
            }
            Entanglement::Pairs(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub mode: ScheduleMode,
    pub segments: Vec<SegmentConfig>,
    #[serde(default = "default_adiabatic_steps")]
    pub adiabatic_steps: usize,
}

fn default_adiabatic_steps() -> usize {
    1
}

/// One schedule entry. At most one of `chord`, `qubo_file` and `qubo_csv`
/// may be given; with none, the segment uses the main problem.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chord: Option<ChordConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubo_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubo_csv: Option<String>,
    /// Defaults to the top-level `iterations`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoteRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordConfig {
    pub notes: Vec<NoteRef>,
    pub encoding: ChordEncoding,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChordConfig {
    fn spec(&self) -> Result<ChordSpec, QuboError> {
        let notes = self
            .notes
            .iter()
            .map(|n| match n {
                NoteRef::Index(i) => Ok(*i),
                NoteRef::Name(s) => note_index(s),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChordSpec::new(notes, self.encoding).with_boundary(self.boundary))
    }
}

/// Everything needed to execute a configured run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub vqe: Vqe,
    pub schedule: ScheduleSpec,
    pub initial: ParameterVector,
    /// QUBO of each schedule segment.
    pub problems: Vec<QuboProblem>,
    /// Note labels used for marginals and exports.
    pub labels: Vec<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be at least 1"));
        }
        if self.shots == Some(0) {
            return Err(invalid("shots", "must be at least 1 when given"));
        }
        self.optimizer.method.validate()?;
        if let Some(s) = &self.schedule {
            if s.segments.is_empty() {
                return Err(invalid("schedule.segments", "at least one segment is required"));
            }
            if s.adiabatic_steps == 0 {
                return Err(invalid("schedule.adiabatic_steps", "must be at least 1"));
            }
            for (i, seg) in s.segments.iter().enumerate() {
                let sources = usize::from(seg.chord.is_some())
                    + usize::from(seg.qubo_file.is_some())
                    + usize::from(seg.qubo_csv.is_some());
                if sources > 1 {
                    return Err(invalid(
                        format!("schedule.segments[{i}]"),
                        "give at most one of chord, qubo_file, qubo_csv",
                    ));
                }
                if seg.iterations == Some(0) {
                    return Err(invalid(format!("schedule.segments[{i}].iterations"), "must be at least 1"));
                }
            }
        }
        let records = self.total_records();
        if records > MAX_RECORDS {
            return Err(ConfigError::TooManyRecords { records });
        }
        Ok(())
    }

    /// Records the configured schedule will produce.
    pub fn total_records(&self) -> usize {
        match &self.schedule {
            None => self.iterations,
            Some(s) => s
                .segments
                .iter()
                .map(|seg| seg.iterations.unwrap_or(self.iterations))
                .fold(0usize, usize::saturating_add),
        }
    }

    /// Resolves segment sources and builds the ansatz. `main` is the problem
    /// loaded alongside the config; relative `qubo_file` paths are taken
    /// from `base_dir`.
    pub fn plan(&self, main: Option<&QuboProblem>, base_dir: Option<&Path>) -> Result<RunPlan, ConfigError> {
        self.validate()?;
        let default_segments = [SegmentConfig::default()];
        let (segments, mode, steps) = match &self.schedule {
            Some(s) => (s.segments.as_slice(), s.mode, s.adiabatic_steps),
            None => (&default_segments[..], ScheduleMode::Sequential, 1),
        };

        // chord segments take their size from an explicit problem if any
        let explicit_n = main.map(QuboProblem::n);
        let mut problems = Vec::with_capacity(segments.len());
        for (i, seg) in segments.iter().enumerate() {
            let context = format!("schedule.segments[{i}]");
            let problem = if let Some(chord) = &seg.chord {
                let n = explicit_n.unwrap_or(crate::qubo::CHROMATIC.len());
                chord
                    .spec()
                    .and_then(|spec| chord_qubo(&spec, n))
                    .map_err(|source| ConfigError::Qubo { context, source })?
            } else if let Some(path) = &seg.qubo_file {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full).map_err(|source| ConfigError::Io {
                    path: full.clone(),
                    source,
                })?;
                QuboProblem::parse_csv(&text).map_err(|source| ConfigError::Qubo {
                    context: full.display().to_string(),
                    source,
                })?
            } else if let Some(text) = &seg.qubo_csv {
                QuboProblem::parse_csv(text).map_err(|source| ConfigError::Qubo { context, source })?
            } else {
                main.cloned()
                    .ok_or_else(|| invalid(context, "no chord or QUBO given and no main problem loaded"))?
            };
            problems.push(problem);
        }

        let n = problems[0].n();
        if let Some((i, p)) = problems.iter().enumerate().find(|(_, p)| p.n() != n) {
            return Err(invalid(
                format!("schedule.segments[{i}]"),
                format!("has {} notes, segment 0 has {n}", p.n()),
            ));
        }

        let built: Vec<Segment> = problems
            .iter()
            .zip(segments)
            .map(|(p, seg)| Segment {
                hamiltonian: p.to_ising(),
                iterations: seg.iterations.unwrap_or(self.iterations),
            })
            .collect();
        let schedule = match mode {
            ScheduleMode::Sequential => ScheduleSpec::sequential(built),
            ScheduleMode::Adiabatic => {
                for (i, s) in built.iter().enumerate().skip(1) {
                    if s.iterations < steps {
                        return Err(invalid(
                            format!("schedule.segments[{i}].iterations"),
                            format!("{} is fewer than adiabatic_steps {steps}", s.iterations),
                        ));
                    }
                }
                ScheduleSpec::adiabatic(built, steps)
            }
        };

        let ansatz = AnsatzSpec::new(n, self.ansatz.reps, self.ansatz.entanglement.pairs(n))?;
        let initial = self.initial.parameters(&ansatz);
        let labels = main
            .filter(|m| m.n() == n)
            .unwrap_or(&problems[0])
            .label_names();
        Ok(RunPlan {
            vqe: Vqe::new(ansatz, self.optimizer.clone()).with_shots(self.shots),
            schedule,
            initial,
            problems,
            labels,
        })
    }
}
