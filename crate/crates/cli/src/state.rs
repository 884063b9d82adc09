use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vqh_core::vqe::RunResult;

use crate::error::CliError;

const FILE: &str = "session.json";

/// The last successful run, kept in the output directory so one-shot
/// `play` invocations find what `runvqe` produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub qubo_path: PathBuf,
    pub config_path: PathBuf,
    pub labels: Vec<String>,
    pub result: RunResult,
}

impl SessionState {
    pub fn load(out_dir: &Path) -> Option<Self> {
        let path = out_dir.join(FILE);
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str(&text) {
            Ok(state) => Some(state),
            Err(e) => {
                log::warn!("ignoring {}: {e}", path.display());
                None
            }
        }
    }

    /// Writes via a temporary file so a crash never leaves half a session.
    pub fn save(&self, out_dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(out_dir).map_err(|e| CliError::input(out_dir, e))?;
        let tmp = out_dir.join(format!("{FILE}.tmp"));
        let text = serde_json::to_string(self).map_err(CliError::runtime)?;
        fs::write(&tmp, text).map_err(|e| CliError::input(&tmp, e))?;
        fs::rename(&tmp, out_dir.join(FILE)).map_err(|e| CliError::input(out_dir, e))
    }
}
