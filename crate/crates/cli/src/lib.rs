//! The `vqh` prompt. Every command works one-shot from the shell or line by
//! line at the interactive prompt; both share the same output directory.

pub mod commands;
pub mod error;
pub mod state;

use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use crate::error::CliError;
use crate::state::SessionState;

pub const OUT_DIR_ENV: &str = "VQH_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "vqh", version, about = "Variational quantum harmonizer")]
pub struct Cli {
    /// Where runs, sonifications and exports are written.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "vqh-out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured schedule on a QUBO and summarize the result.
    Runvqe { qubo: PathBuf, config: PathBuf },
    /// Sonify the last run to a WAV file with a JSONL sidecar.
    Play {
        /// additive, inharmonic, subtractive or arpeggio
        strategy: String,
        /// Seconds of audio per iteration.
        #[arg(long, default_value_t = vqh_core::sonify::DEFAULT_FRAME_DURATION)]
        frame_dur: f64,
        /// WAV path; defaults to `<out-dir>/<strategy>.wav`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed for the subtractive strategy.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustive minimum of a QUBO.
    Oracle { qubo: PathBuf },
    /// Same problem, seed and start under spsa, nft and cobyla_like.
    CompareOptimizers { qubo: PathBuf, config: PathBuf },
    /// HTTP session server for the performance UI.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

/// One line typed at the prompt.
#[derive(Debug, Parser)]
#[command(name = "", no_binary_name = true, disable_version_flag = true)]
struct PromptLine {
    #[command(subcommand)]
    command: Command,
}

pub struct Shell {
    pub out_dir: PathBuf,
    pub state: Option<SessionState>,
}

impl Shell {
    pub fn open(out_dir: PathBuf) -> Self {
        let state = SessionState::load(&out_dir);
        Self { out_dir, state }
    }

    pub fn execute(&mut self, command: Command, out: &mut dyn Write) -> Result<(), CliError> {
        match command {
            Command::Runvqe { qubo, config } => commands::runvqe(self, &qubo, &config, out),
            Command::Play {
                strategy,
                frame_dur,
                out: path,
                seed,
            } => commands::play(self, &strategy, frame_dur, path, seed, out),
            Command::Oracle { qubo } => commands::oracle(&qubo, out),
            Command::CompareOptimizers { qubo, config } => commands::compare_optimizers(self, &qubo, &config, out),
            Command::Serve { port, host } => commands::serve(&host, port, out),
        }
    }

    /// Reads commands until EOF or `exit`. A failing command reports and
    /// leaves the stored run as it was.
    pub fn repl(&mut self, input: impl BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
        let interactive = std::io::stdin().is_terminal();
        let mut status = 0;
        let prompt = |out: &mut dyn Write| {
            if interactive {
                let _ = write!(out, "vqh> ");
                let _ = out.flush();
            }
        };
        prompt(out);
        for line in input.lines() {
            let Ok(line) = line else { break };
            let line = line.trim();
            if matches!(line, "exit" | "quit") {
                break;
            }
            if !line.is_empty() && !line.starts_with('#') {
                status = self.line(line, out, err);
            }
            prompt(out);
        }
        status
    }

    fn line(&mut self, line: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
        let Some(words) = shlex::split(line) else {
            let _ = writeln!(err, "error: unbalanced quotes");
            return 1;
        };
        match PromptLine::try_parse_from(words) {
            Ok(parsed) => match self.execute(parsed.command, out) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    e.exit_code()
                }
            },
            Err(e) => {
                let text = e.render().to_string();
                if e.use_stderr() {
                    let _ = write!(err, "{text}");
                    1
                } else {
                    let _ = write!(out, "{text}");
                    0
                }
            }
        }
    }
}
