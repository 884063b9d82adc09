use std::io::{BufRead, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::SonifyError;
use crate::vqe::RunResult;

/// Default seconds of audio per iteration.
pub const DEFAULT_FRAME_DURATION: f64 = 0.25;

/// One iteration as seen by the renderers.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: usize,
    pub segment: usize,
    pub time: f64,
    pub marginals: Vec<f64>,
    /// Raw (Ising-scale) expectation value.
    pub expectation: f64,
    /// Normalized closeness to the ground energy in `[0, 1]`.
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SonificationStream {
    pub labels: Vec<String>,
    pub frame_duration: f64,
    pub frames: Vec<Frame>,
}

impl SonificationStream {
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 * self.frame_duration
    }

    pub fn note_count(&self) -> usize {
        self.labels.len()
    }

    /// Stream of identical frames; handy for rendering a held chord.
    pub fn held(labels: Vec<String>, marginals: Vec<f64>, u: f64, frames: usize, frame_duration: f64) -> Self {
        let frames = (0..frames)
            .map(|i| Frame {
                step: i,
                segment: 0,
                time: i as f64 * frame_duration,
                marginals: marginals.clone(),
                expectation: 0.0,
                u,
            })
            .collect();
        Self {
            labels,
            frame_duration,
            frames,
        }
    }
}

fn check_duration(frame_duration: f64) -> Result<(), SonifyError> {
    if !(frame_duration > 0.0 && frame_duration.is_finite()) {
        return Err(SonifyError::Config(format!(
            "frame duration must be positive, got {frame_duration}"
        )));
    }
    Ok(())
}

/// One frame per record, with `u` measured from the running maximum
/// energy (u = 0) to the whole-run minimum (u = 1).
pub fn build_stream(
    run: &RunResult,
    labels: &[String],
    frame_duration: f64,
) -> Result<SonificationStream, SonifyError> {
    check_duration(frame_duration)?;
    let first = run.records.first().ok_or(SonifyError::EmptyRun)?;
    if first.marginals.len() != labels.len() {
        return Err(SonifyError::TuningMismatch {
            notes: labels.len(),
            marginals: first.marginals.len(),
        });
    }
    let global_min = run
        .records
        .iter()
        .map(|r| r.expectation)
        .fold(f64::INFINITY, f64::min);
    let mut running_max = f64::NEG_INFINITY;
    let frames = run
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            running_max = running_max.max(r.expectation);
            Frame {
                step: r.step,
                segment: r.segment,
                time: i as f64 * frame_duration,
                marginals: r.marginals.0.clone(),
                expectation: r.expectation,
                u: closeness(r.expectation, global_min, running_max),
            }
        })
        .collect();
    Ok(SonificationStream {
        labels: labels.to_vec(),
        frame_duration,
        frames,
    })
}

/// `(hi − e) / (hi − lo)` clamped to `[0, 1]`; 0 when the range is empty.
fn closeness(e: f64, lo: f64, hi: f64) -> f64 {
    let range = hi - lo;
    if !(range > 1e-12 * (1.0 + hi.abs().max(lo.abs()))) {
        return 0.0;
    }
    ((hi - e) / range).clamp(0.0, 1.0)
}

/// Running min–max normalization for frames that arrive one at a time.
#[derive(Debug, Clone, Default)]
pub struct LiveNormalizer {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl LiveNormalizer {
    pub fn push(&mut self, expectation: f64) -> f64 {
        let lo = self.lo.map_or(expectation, |v| v.min(expectation));
        let hi = self.hi.map_or(expectation, |v| v.max(expectation));
        self.lo = Some(lo);
        self.hi = Some(hi);
        closeness(expectation, lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Jsonl,
    Csv,
}

#[derive(Serialize, Deserialize)]
struct JsonFrame {
    step: usize,
    segment: usize,
    time: f64,
    frame_duration: f64,
    marginals: IndexMap<String, f64>,
    expectation: f64,
    u: f64,
}

impl Frame {
    /// The JSONL line for this frame (no trailing newline).
    pub fn to_json_line(&self, labels: &[String], frame_duration: f64) -> String {
        let json = JsonFrame {
            step: self.step,
            segment: self.segment,
            time: self.time,
            frame_duration,
            marginals: labels
                .iter()
                .cloned()
                .zip(self.marginals.iter().copied())
                .collect(),
            expectation: self.expectation,
            u: self.u,
        };
        serde_json::to_string(&json).expect("frame serializes")
    }
}

/// Serializes a stream; one line per frame, plus a header row for CSV.
pub fn write_stream(
    stream: &SonificationStream,
    format: ExportFormat,
    mut out: impl Write,
) -> Result<(), SonifyError> {
    if stream.frames.is_empty() {
        log::warn!("exporting an empty stream");
    }
    match format {
        ExportFormat::Jsonl => {
            for frame in &stream.frames {
                writeln!(out, "{}", frame.to_json_line(&stream.labels, stream.frame_duration))?;
            }
        }
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["step", "segment", "time", "frame_duration"];
            header.extend(stream.labels.iter().map(String::as_str));
            header.extend(["expectation", "u"]);
            w.write_record(&header).map_err(csv_err)?;
            for f in &stream.frames {
                let mut row = vec![
                    f.step.to_string(),
                    f.segment.to_string(),
                    f.time.to_string(),
                    stream.frame_duration.to_string(),
                ];
                row.extend(f.marginals.iter().map(f64::to_string));
                row.push(f.expectation.to_string());
                row.push(f.u.to_string());
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn stream_bytes(stream: &SonificationStream, format: ExportFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    write_stream(stream, format, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn export_stream(
    stream: &SonificationStream,
    format: ExportFormat,
    path: &std::path::Path,
) -> Result<(), SonifyError> {
    std::fs::write(path, stream_bytes(stream, format))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> SonifyError {
    SonifyError::Parse(e.to_string())
}

/// Reads back a stream written by [`write_stream`]. An empty JSONL file
/// has no labels and the default frame duration.
pub fn read_stream(format: ExportFormat, input: impl BufRead) -> Result<SonificationStream, SonifyError> {
    let mut labels: Option<Vec<String>> = None;
    let mut frame_duration = DEFAULT_FRAME_DURATION;
    let mut frames = Vec::new();
    match format {
        ExportFormat::Jsonl => {
            for (n, line) in input.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let jf: JsonFrame = serde_json::from_str(&line)
                    .map_err(|e| SonifyError::Parse(format!("line {}: {e}", n + 1)))?;
                let names: Vec<String> = jf.marginals.keys().cloned().collect();
                match &labels {
                    Some(l) if *l != names => {
                        return Err(SonifyError::Parse(format!(
                            "line {}: marginal labels differ from the first frame",
                            n + 1
                        )))
                    }
                    Some(_) => {}
                    None => labels = Some(names),
                }
                frame_duration = jf.frame_duration;
                frames.push(Frame {
                    step: jf.step,
                    segment: jf.segment,
                    time: jf.time,
                    marginals: jf.marginals.values().copied().collect(),
                    expectation: jf.expectation,
                    u: jf.u,
                });
            }
        }
        ExportFormat::Csv => {
            let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
            let header = r.headers().map_err(csv_err)?.clone();
            if header.len() < 6 {
                return Err(SonifyError::Parse("CSV header is too short".into()));
            }
            let n = header.len() - 6;
            labels = Some(header.iter().skip(4).take(n).map(str::to_string).collect());
            for (row, record) in r.records().enumerate() {
                let record = record.map_err(csv_err)?;
                let num = |i: usize| -> Result<f64, SonifyError> {
                    record[i].parse::<f64>().map_err(|_| {
                        SonifyError::Parse(format!("row {}, column {}: `{}`", row + 2, i + 1, &record[i]))
                    })
                };
                let int = |i: usize| -> Result<usize, SonifyError> {
                    record[i].parse::<usize>().map_err(|_| {
                        SonifyError::Parse(format!("row {}, column {}: `{}`", row + 2, i + 1, &record[i]))
                    })
                };
                frame_duration = num(3)?;
                frames.push(Frame {
                    step: int(0)?,
                    segment: int(1)?,
                    time: num(2)?,
                    marginals: (4..4 + n).map(num).collect::<Result<_, _>>()?,
                    expectation: num(4 + n)?,
                    u: num(5 + n)?,
                });
            }
        }
    }
    Ok(SonificationStream {
        labels: labels.unwrap_or_default(),
        frame_duration,
        frames,
    })
}

pub fn import_stream(format: ExportFormat, path: &std::path::Path) -> Result<SonificationStream, SonifyError> {
    let file = std::fs::File::open(path)?;
    read_stream(format, std::io::BufReader::new(file))
}
