use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{buffer_len, AudioBuffer, Frame, MappingConfig, SonificationStream, SonifyError};

const ATTACK: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArpeggioEvent {
    /// Index of the frame that produced the event.
    pub frame: usize,
    /// Onset time in seconds.
    pub onset: f64,
    pub note: usize,
    pub amplitude: f64,
    /// Sounding length in seconds.
    pub duration: f64,
}

/// Notes played in one frame: those at or above the threshold, quietest
/// first (ties by note index), keeping only the loudest ones that fit.
fn frame_events(index: usize, frame: &Frame, frame_start: f64, dur: f64, config: &MappingConfig) -> Vec<ArpeggioEvent> {
    let mut notes: Vec<(usize, f64)> = frame
        .marginals
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, m)| m >= config.arpeggio_threshold && m > 0.0)
        .collect();
    notes.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let rate = (config.arpeggio_max_rate * frame.u).max(1.0 / dur);
    let slots = ((dur * rate + 1e-9).floor() as usize).max(1);
    let skip = notes.len().saturating_sub(slots);
    let interval = 1.0 / rate;
    notes[skip..]
        .iter()
        .enumerate()
        .map(|(j, &(note, amplitude))| ArpeggioEvent {
            frame: index,
            onset: frame_start + j as f64 * interval,
            note,
            amplitude,
            duration: interval.min(dur),
        })
        .collect()
}

pub fn arpeggio_events(stream: &SonificationStream, config: &MappingConfig) -> Result<Vec<ArpeggioEvent>, SonifyError> {
    config.check_stream(stream)?;
    let dur = stream.frame_duration;
    Ok(stream
        .frames
        .iter()
        .enumerate()
        .flat_map(|(i, f)| frame_events(i, f, i as f64 * dur, dur, config))
        .collect())
}

/// Each frame's chord spread into successive short tones; the rate grows
/// with closeness `u`.
pub fn map_arpeggio(
    stream: &SonificationStream,
    config: &MappingConfig,
) -> Result<(Vec<ArpeggioEvent>, AudioBuffer), SonifyError> {
    let events = arpeggio_events(stream, config)?;
    let fs = f64::from(config.sample_rate);
    let mut mix = vec![0.0f64; buffer_len(stream, config.sample_rate)];
    for e in &events {
        let freq = config.tuning.frequency(e.note);
        let start = (e.onset * fs).round() as usize;
        let len = (e.duration * fs).round() as usize;
        let attack = ATTACK.min(e.duration / 4.0);
        for k in 0..len {
            let Some(slot) = mix.get_mut(start + k) else { break };
            let t = k as f64 / fs;
            let env = if t < attack {
                t / attack
            } else {
                (1.0 - (t - attack) / (e.duration - attack)).max(0.0)
            };
            *slot += e.amplitude * env * (TAU * freq * t).sin();
        }
    }
    Ok((events, AudioBuffer::from_mix(config.sample_rate, mix)))
}

/// Event list as a JSON array.
pub fn write_events_json(events: &[ArpeggioEvent], out: impl Write) -> Result<(), SonifyError> {
    serde_json::to_writer_pretty(out, events).map_err(|e| SonifyError::Parse(e.to_string()))
}
