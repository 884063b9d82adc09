use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use vqh_core::config::{ConfigError, RunConfig, RunPlan};
use vqh_core::optim::OptimizerConfig;
use vqh_core::qubo::{brute_force_solve, QuboProblem};
use vqh_core::sonify::{
    build_stream, export_stream, render, render_wav, write_events_json, ExportFormat, MappingConfig, SonifyError,
    Strategy, DEFAULT_FRAME_DURATION,
};
use vqh_core::vqe::{Discard, RunResult};

use crate::error::CliError;
use crate::state::SessionState;
use crate::Shell;

/// Brute-force ground energies are only reported up to this size.
pub const ORACLE_REPORT_BITS: usize = 16;

/// Gap below which a run counts as converged.
pub const CONVERGENCE_GAP: f64 = 0.1;

const LISTED_MINIMIZERS: usize = 32;

fn io(e: std::io::Error) -> CliError {
    CliError::runtime(e)
}

pub fn load_qubo(path: &Path) -> Result<QuboProblem, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path, format!("cannot read: {e}")))?;
    QuboProblem::parse_csv(&text).map_err(|e| CliError::input(path, e))
}

fn config_error(path: &Path, e: ConfigError) -> CliError {
    match e {
        ConfigError::Io { path, source } => CliError::input(&path, format!("cannot read: {source}")),
        // a segment's qubo_file, named by its resolved path
        ConfigError::Qubo { context, source } if !context.starts_with("schedule.") => {
            CliError::input(Path::new(&context), source)
        }
        _ => CliError::input(path, e),
    }
}

pub fn load_plan(qubo: &Path, config: &Path) -> Result<(QuboProblem, RunConfig, RunPlan), CliError> {
    let problem = load_qubo(qubo)?;
    let cfg = RunConfig::from_path(config).map_err(|e| config_error(config, e))?;
    let plan = cfg
        .plan(Some(&problem), config.parent())
        .map_err(|e| config_error(config, e))?;
    Ok((problem, cfg, plan))
}

fn execute(plan: &RunPlan) -> Result<RunResult, vqh_core::vqe::VqeError> {
    plan.vqe.run_schedule(&plan.schedule, &plan.initial, &mut Discard)
}

/// Ising energy on the QUBO scale of `problem`.
fn qubo_scale(problem: &QuboProblem, energy: f64) -> f64 {
    (energy + problem.to_ising().offset()) / 4.0
}

pub fn runvqe(shell: &mut Shell, qubo: &Path, config: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (_, cfg, plan) = load_plan(qubo, config)?;
    let result = match execute(&plan) {
        Ok(r) => r,
        Err(e) => {
            let partial = e.partial_records();
            if partial.is_empty() {
                return Err(CliError::runtime(e));
            }
            let path = shell.out_dir.join("partial_run.jsonl");
            save_partial(partial, &plan.labels, &path)?;
            return Err(CliError::Runtime(format!(
                "{e}; {} partial records saved to {}",
                partial.len(),
                path.display()
            )));
        }
    };

    let last = plan.problems.last().expect("plan has a segment");
    let n = last.n();
    writeln!(
        out,
        "records   {} ({} segment{}, {}, {} qubits, {} parameters)",
        result.records.len(),
        plan.problems.len(),
        if plan.problems.len() == 1 { "" } else { "s" },
        cfg.optimizer.kind(),
        n,
        plan.vqe.ansatz.parameter_count()
    )
    .map_err(io)?;
    writeln!(
        out,
        "final     E = {:.6}  cost = {:.6}",
        result.final_expectation,
        qubo_scale(last, result.final_expectation)
    )
    .map_err(io)?;
    if n <= ORACLE_REPORT_BITS {
        let solution = brute_force_solve(last).map_err(CliError::runtime)?;
        let ground = 4.0 * solution.min_cost - last.to_ising().offset();
        writeln!(out, "ground    E = {ground:.6}  cost = {:.6}", solution.min_cost).map_err(io)?;
        writeln!(out, "gap       {:.6}", result.final_expectation - ground).map_err(io)?;
    } else {
        writeln!(out, "ground    not enumerated ({n} > {ORACLE_REPORT_BITS} notes)").map_err(io)?;
    }
    let finals = result.segment_finals();
    if finals.len() > 1 {
        for (segment, energy, ground) in finals {
            writeln!(
                out,
                "segment {segment} final {energy:.6}  ground {ground:.6}  gap {:.6}",
                energy - ground
            )
            .map_err(io)?;
        }
    }

    let state = SessionState {
        qubo_path: qubo.to_path_buf(),
        config_path: config.to_path_buf(),
        labels: plan.labels,
        result,
    };
    state.save(&shell.out_dir)?;
    shell.state = Some(state);
    Ok(())
}

fn save_partial(records: &[vqh_core::vqe::IterationRecord], labels: &[String], path: &Path) -> Result<(), CliError> {
    let last = records.last().expect("non-empty");
    let run = RunResult {
        records: records.to_vec(),
        final_params: last.params.clone(),
        final_expectation: last.expectation,
        ground_truth: None,
        stages: Vec::new(),
    };
    write_jsonl(&run, labels, DEFAULT_FRAME_DURATION, path)
}

fn write_jsonl(run: &RunResult, labels: &[String], frame_dur: f64, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::input(dir, e))?;
    }
    let stream = build_stream(run, labels, frame_dur).map_err(CliError::runtime)?;
    export_stream(&stream, ExportFormat::Jsonl, path).map_err(CliError::runtime)
}

fn sonify_error(e: SonifyError) -> CliError {
    match e {
        SonifyError::UnknownStrategy(_) | SonifyError::Config(_) => CliError::Usage(e.to_string()),
        other => CliError::runtime(other),
    }
}

pub fn play(
    shell: &Shell,
    strategy: &str,
    frame_dur: f64,
    path: Option<PathBuf>,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let strategy: Strategy = strategy.parse().map_err(sonify_error)?;
    let state = shell
        .state
        .as_ref()
        .ok_or_else(|| CliError::Runtime("no completed run; use runvqe first".into()))?;
    let stream = build_stream(&state.result, &state.labels, frame_dur).map_err(sonify_error)?;
    let mut mapping = MappingConfig::for_strategy(strategy).with_notes(state.labels.len());
    if let Some(seed) = seed {
        mapping.seed = seed;
    }
    let rendering = render(&stream, &mapping).map_err(sonify_error)?;

    let wav = path.unwrap_or_else(|| shell.out_dir.join(format!("{strategy}.wav")));
    if let Some(dir) = wav.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::input(dir, e))?;
    }
    render_wav(&rendering.buffer, &wav).map_err(CliError::runtime)?;
    let sidecar = wav.with_extension("jsonl");
    export_stream(&stream, ExportFormat::Jsonl, &sidecar).map_err(CliError::runtime)?;

    let peak = rendering.buffer.peak();
    writeln!(
        out,
        "wrote {} ({:.3} s, peak {:.4} = {:.1} dBFS)",
        wav.display(),
        rendering.buffer.duration(),
        peak,
        20.0 * f64::from(peak).log10()
    )
    .map_err(io)?;
    writeln!(out, "wrote {} ({} frames)", sidecar.display(), stream.frames.len()).map_err(io)?;
    if let Some(events) = &rendering.events {
        let path = wav.with_extension("events.json");
        let file = fs::File::create(&path).map_err(|e| CliError::input(&path, e))?;
        write_events_json(events, std::io::BufWriter::new(file)).map_err(CliError::runtime)?;
        writeln!(out, "wrote {} ({} notes)", path.display(), events.len()).map_err(io)?;
    }
    Ok(())
}

fn bitstring(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

pub fn oracle(qubo: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = load_qubo(qubo)?;
    let n = problem.n();
    let solution = brute_force_solve(&problem).map_err(CliError::runtime)?;
    let offset = problem.to_ising().offset();
    let count = solution.minimizers.len();
    writeln!(out, "notes       {n} ({})", problem.label_names().join(" ")).map_err(io)?;
    writeln!(out, "min cost    {}", solution.min_cost).map_err(io)?;
    writeln!(
        out,
        "ising       E = {} (offset {offset}, E = 4 cost - offset)",
        4.0 * solution.min_cost - offset
    )
    .map_err(io)?;
    if count == 1usize << n {
        writeln!(out, "minimizers  {count} (fully degenerate: every assignment is minimal)").map_err(io)?;
    } else {
        writeln!(out, "minimizers  {count}").map_err(io)?;
    }
    for c in solution.minimizers.iter().take(LISTED_MINIMIZERS) {
        let notes = c.sounding(problem.labels());
        let notes = if notes.is_empty() { "(silence)".to_string() } else { notes.join(" ") };
        writeln!(out, "  {}  {notes}", bitstring(c.bits())).map_err(io)?;
    }
    if count > LISTED_MINIMIZERS {
        writeln!(out, "  ... {} more", count - LISTED_MINIMIZERS).map_err(io)?;
    }
    Ok(())
}

/// First step whose energy is within [`CONVERGENCE_GAP`] of its stage's ground.
pub fn convergence_step(result: &RunResult) -> Option<usize> {
    result.records.iter().find_map(|r| {
        let ground = result.stage_of(r.step)?.ground_energy;
        (r.expectation - ground < CONVERGENCE_GAP).then_some(r.step)
    })
}

/// `Some(count)` when every update touches parameter `step mod count`.
pub fn touched_period(result: &RunResult) -> Option<usize> {
    let count = result.final_params.len();
    let mut moved = false;
    for w in result.records.windows(2) {
        let changed: Vec<usize> = (0..count).filter(|&k| w[0].params.0[k] != w[1].params.0[k]).collect();
        match changed.as_slice() {
            [] => {}
            [k] if *k == w[0].step % count => moved = true,
            _ => return None,
        }
    }
    moved.then_some(count)
}

pub const COMPARED: [&str; 3] = ["spsa", "nft", "cobyla_like"];

pub fn compare_optimizers(shell: &Shell, qubo: &Path, config: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (problem, cfg, _) = load_plan(qubo, config)?;
    let seed = cfg.optimizer.seed;
    writeln!(out, "seed {seed}, initial point {:?}", cfg.initial).map_err(io)?;
    for kind in COMPARED {
        let optimizer = if cfg.optimizer.kind() == kind {
            cfg.optimizer.clone()
        } else {
            OptimizerConfig::named(kind, seed).map_err(CliError::runtime)?
        };
        let variant = RunConfig {
            optimizer,
            ..cfg.clone()
        };
        let plan = variant
            .plan(Some(&problem), config.parent())
            .map_err(|e| config_error(config, e))?;
        let result = execute(&plan).map_err(CliError::runtime)?;
        let path = shell.out_dir.join(format!("compare_{kind}.jsonl"));
        write_jsonl(&result, &plan.labels, DEFAULT_FRAME_DURATION, &path)?;
        let ground = result.stages.last().map_or(f64::NAN, |s| s.ground_energy);
        let converged = convergence_step(&result).map_or("never".to_string(), |s| format!("step {s}"));
        write!(
            out,
            "{kind:<12} final {:.6}  gap {:.6}  converged {converged}",
            result.final_expectation,
            result.final_expectation - ground
        )
        .map_err(io)?;
        if kind == "nft" {
            match touched_period(&result) {
                Some(p) => write!(out, "  touched index = step mod {p}").map_err(io)?,
                None => write!(out, "  touched index not cyclic").map_err(io)?,
            }
        }
        writeln!(out, "  -> {}", path.display()).map_err(io)?;
    }
    Ok(())
}

pub fn serve(host: &str, port: u16, out: &mut dyn Write) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::runtime)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(io)?;
        writeln!(out, "listening on http://{addr}").map_err(io)?;
        out.flush().map_err(io)?;
        vqh_server::serve(listener, vqh_server::ServerConfig::default())
            .await
            .map_err(CliError::runtime)
    })
}
