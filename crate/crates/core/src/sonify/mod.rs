//! Sonification of VQE trajectories: frame streams, the four mapping
//! strategies, and WAV/JSONL/CSV outputs.

mod additive;
mod arpeggio;
mod stream;
mod subtractive;
mod wav;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use additive::{harmonic_series, map_additive, map_inharmonic};
pub use arpeggio::{arpeggio_events, map_arpeggio, write_events_json, ArpeggioEvent};
pub use stream::{
    build_stream, export_stream, import_stream, read_stream, stream_bytes, write_stream,
    ExportFormat, Frame, LiveNormalizer, SonificationStream, DEFAULT_FRAME_DURATION,
};
pub use subtractive::{map_subtractive, subtractive_bands, BandPass};
pub use wav::{read_wav, render_wav, wav_bytes};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

#[derive(Debug, Error)]
pub enum SonifyError {
    #[error("cannot sonify an empty run")]
    EmptyRun,
    #[error("tuning has {notes} notes but frames carry {marginals} marginals")]
    TuningMismatch { notes: usize, marginals: usize },
    #[error("invalid mapping configuration: {0}")]
    Config(String),
    #[error("partial {partial} would reach {frequency} Hz")]
    NonPositiveFrequency { partial: usize, frequency: f64 },
    #[error("unstable band-pass filter at {frequency} Hz with Q {q} (sample rate {sample_rate})")]
    UnstableFilter { frequency: f64, q: f64, sample_rate: u32 },
    #[error("unknown strategy `{0}`; valid strategies: additive, inharmonic, subtractive, arpeggio")]
    UnknownStrategy(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningMode {
    #[default]
    EqualTemperament,
    HarmonicSeries,
}

/// Note frequencies. Equal temperament: `f_i = f_1·2^(i/12)`; harmonic
/// series: partial `n = i + 1` at `n·f_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tuning {
    pub base_hz: f64,
    pub mode: TuningMode,
    pub notes: usize,
}

impl Default for Tuning {
    fn default() -> Self {
        Self {
            base_hz: 261.63,
            mode: TuningMode::EqualTemperament,
            notes: 12,
        }
    }
}

impl Tuning {
    pub fn equal_temperament(base_hz: f64, notes: usize) -> Self {
        Self {
            base_hz,
            mode: TuningMode::EqualTemperament,
            notes,
        }
    }

    pub fn harmonic_series(base_hz: f64, notes: usize) -> Self {
        Self {
            base_hz,
            mode: TuningMode::HarmonicSeries,
            notes,
        }
    }

    pub fn frequency(&self, i: usize) -> f64 {
        match self.mode {
            TuningMode::EqualTemperament => self.base_hz * 2f64.powf(i as f64 / 12.0),
            TuningMode::HarmonicSeries => (i + 1) as f64 * self.base_hz,
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.notes).map(|i| self.frequency(i)).collect()
    }

    fn validate(&self) -> Result<(), SonifyError> {
        if !(self.base_hz > 0.0 && self.base_hz.is_finite()) {
            return Err(SonifyError::Config(format!(
                "base frequency must be positive, got {}",
                self.base_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Additive,
    Inharmonic,
    Subtractive,
    Arpeggio,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Additive,
        Strategy::Inharmonic,
        Strategy::Subtractive,
        Strategy::Arpeggio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Additive => "additive",
            Strategy::Inharmonic => "inharmonic",
            Strategy::Subtractive => "subtractive",
            Strategy::Arpeggio => "arpeggio",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = SonifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| SonifyError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    pub strategy: Strategy,
    pub tuning: Tuning,
    pub sample_rate: u32,
    /// Inharmonic: `c_n(t) = shift_scale · marginal_n(t)`.
    pub shift_scale: f64,
    /// Subtractive: Q at `u = 0`.
    pub q_min: f64,
    /// Subtractive: Q at `u = 1`.
    pub q_max: f64,
    /// Arpeggio: notes below this marginal are not played.
    pub arpeggio_threshold: f64,
    /// Arpeggio: notes per second at `u = 1`.
    pub arpeggio_max_rate: f64,
    /// Noise seed for the subtractive strategy.
    pub seed: u64,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Additive,
            tuning: Tuning::default(),
            sample_rate: DEFAULT_SAMPLE_RATE,
            shift_scale: 0.5,
            q_min: 2.0,
            q_max: 200.0,
            arpeggio_threshold: 0.1,
            arpeggio_max_rate: 24.0,
            seed: 0,
        }
    }
}

impl MappingConfig {
    /// Defaults for a strategy; the inharmonic mapping uses a harmonic series on C3.
    pub fn for_strategy(strategy: Strategy) -> Self {
        let tuning = match strategy {
            Strategy::Inharmonic => Tuning::harmonic_series(130.81, 12),
            _ => Tuning::default(),
        };
        Self {
            strategy,
            tuning,
            ..Self::default()
        }
    }

    pub fn with_notes(mut self, notes: usize) -> Self {
        self.tuning.notes = notes;
        self
    }

    pub fn validate(&self) -> Result<(), SonifyError> {
        self.tuning.validate()?;
        if self.sample_rate == 0 {
            return Err(SonifyError::Config("sample rate must be positive".into()));
        }
        if !(self.q_min > 0.0 && self.q_min < self.q_max && self.q_max.is_finite()) {
            return Err(SonifyError::Config(format!(
                "need 0 < q_min < q_max, got [{}, {}]",
                self.q_min, self.q_max
            )));
        }
        if !(self.shift_scale >= 0.0 && self.shift_scale.is_finite()) {
            return Err(SonifyError::Config("shift_scale must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.arpeggio_threshold) {
            return Err(SonifyError::Config("arpeggio_threshold must lie in [0, 1]".into()));
        }
        if !(self.arpeggio_max_rate > 0.0 && self.arpeggio_max_rate.is_finite()) {
            return Err(SonifyError::Config("arpeggio_max_rate must be positive".into()));
        }
        Ok(())
    }

    fn check_stream(&self, stream: &SonificationStream) -> Result<(), SonifyError> {
        self.validate()?;
        if stream.frame_duration <= 0.0 || !stream.frame_duration.is_finite() {
            return Err(SonifyError::Config("frame duration must be positive".into()));
        }
        if let Some(f) = stream.frames.iter().find(|f| f.marginals.len() != self.tuning.notes) {
            return Err(SonifyError::TuningMismatch {
                notes: self.tuning.notes,
                marginals: f.marginals.len(),
            });
        }
        Ok(())
    }
}

/// Mono samples in `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f32>,
}

impl AudioBuffer {
    pub fn silent(sample_rate: u32, len: usize) -> Self {
        Self {
            sample_rate,
            samples: vec![0.0; len],
        }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|&s| f64::from(s) * f64::from(s)).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    fn from_mix(sample_rate: u32, mix: Vec<f64>) -> Self {
        Self {
            sample_rate,
            samples: mix.into_iter().map(|s| s.clamp(-1.0, 1.0) as f32).collect(),
        }
    }
}

/// Number of samples covering a whole stream.
fn buffer_len(stream: &SonificationStream, sample_rate: u32) -> usize {
    (stream.frames.len() as f64 * stream.frame_duration * f64::from(sample_rate)).round() as usize
}

/// Per-note control value at a time, linearly interpolated between frame
/// centres and held flat before the first and after the last centre.
fn control_at(stream: &SonificationStream, time: f64, value: impl Fn(&Frame) -> f64) -> f64 {
    let frames = &stream.frames;
    let x = time / stream.frame_duration - 0.5;
    if x <= 0.0 {
        return value(&frames[0]);
    }
    let i = x.floor() as usize;
    if i + 1 >= frames.len() {
        return value(&frames[frames.len() - 1]);
    }
    let frac = x - i as f64;
    let (a, b) = (value(&frames[i]), value(&frames[i + 1]));
    a + (b - a) * frac
}

/// Result of rendering with any strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendering {
    pub buffer: AudioBuffer,
    /// Note events, for the arpeggio strategy.
    pub events: Option<Vec<ArpeggioEvent>>,
}

pub fn render(stream: &SonificationStream, config: &MappingConfig) -> Result<Rendering, SonifyError> {
    Ok(match config.strategy {
        Strategy::Additive => Rendering {
            buffer: map_additive(stream, config)?,
            events: None,
        },
        Strategy::Inharmonic => Rendering {
            buffer: map_inharmonic(stream, config)?,
            events: None,
        },
        Strategy::Subtractive => Rendering {
            buffer: map_subtractive(stream, config)?,
            events: None,
        },
        Strategy::Arpeggio => {
            let (events, buffer) = map_arpeggio(stream, config)?;
            Rendering {
                buffer,
                events: Some(events),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_temperament_frequencies() {
        let t = Tuning::default();
        assert!((t.frequency(4) - 329.63).abs() < 0.01);
        assert!((t.frequency(7) - 392.00).abs() < 0.01);
        assert!((t.frequency(12) - 2.0 * 261.63).abs() < 1e-9);
        let h = Tuning::harmonic_series(100.0, 12);
        assert_eq!(h.frequency(1), 200.0);
    }

    #[test]
    fn strategy_names() {
        assert_eq!("subtractive".parse::<Strategy>().unwrap(), Strategy::Subtractive);
        let err = "granular".parse::<Strategy>().unwrap_err().to_string();
        for s in Strategy::ALL {
            assert!(err.contains(s.name()));
        }
    }

    #[test]
    fn config_validation() {
        assert!(MappingConfig::default().validate().is_ok());
        let bad_q = MappingConfig {
            q_min: 10.0,
            q_max: 5.0,
            ..MappingConfig::default()
        };
        assert!(bad_q.validate().is_err());
        let bad_threshold = MappingConfig {
            arpeggio_threshold: 1.5,
            ..MappingConfig::default()
        };
        assert!(bad_threshold.validate().is_err());
        let bad_shift = MappingConfig {
            shift_scale: -0.1,
            ..MappingConfig::default()
        };
        assert!(bad_shift.validate().is_err());
    }

    #[test]
    fn control_interpolates_between_centres() {
        let mut s = SonificationStream::held(vec!["C".into()], vec![0.0], 0.0, 2, 1.0);
        s.frames[1].marginals[0] = 1.0;
        let m = |f: &Frame| f.marginals[0];
        assert_eq!(control_at(&s, 0.2, m), 0.0);
        assert_eq!(control_at(&s, 1.0, m), 0.5);
        assert_eq!(control_at(&s, 1.7, m), 1.0);
    }
}
