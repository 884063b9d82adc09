use std::fmt;
use std::str::FromStr;

use vqh_core::sonify::{
    build_stream, render, stream_bytes, wav_bytes, ExportFormat, MappingConfig, Strategy, DEFAULT_FRAME_DURATION,
};
use vqh_core::vqe::RunResult;

use crate::error::ApiError;

/// `stream_jsonl` or `wav:<strategy>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArtifactKind {
    StreamJsonl,
    Wav(Strategy),
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactKind::StreamJsonl => f.write_str("stream_jsonl"),
            ArtifactKind::Wav(s) => write!(f, "wav:{s}"),
        }
    }
}

impl FromStr for ArtifactKind {
    type Err = ApiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "stream_jsonl" {
            return Ok(ArtifactKind::StreamJsonl);
        }
        s.strip_prefix("wav:")
            .and_then(|name| name.parse().ok())
            .map(ArtifactKind::Wav)
            .ok_or_else(|| ApiError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub content_type: &'static str,
    pub bytes: Vec<u8>,
}

impl ArtifactKind {
    /// Same stream and mapping defaults as the command line.
    pub fn render(&self, run: &RunResult, labels: &[String]) -> Result<Artifact, ApiError> {
        let stream =
            build_stream(run, labels, DEFAULT_FRAME_DURATION).map_err(|e| ApiError::Render(e.to_string()))?;
        Ok(match self {
            ArtifactKind::StreamJsonl => Artifact {
                content_type: "application/x-ndjson",
                bytes: stream_bytes(&stream, ExportFormat::Jsonl),
            },
            ArtifactKind::Wav(strategy) => {
                let rendering = render(&stream, &MappingConfig::for_strategy(*strategy))
                    .map_err(|e| ApiError::Render(e.to_string()))?;
                Artifact {
                    content_type: "audio/wav",
                    bytes: wav_bytes(&rendering.buffer),
                }
            }
        })
    }
}
