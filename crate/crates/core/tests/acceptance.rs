//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p vqh-core --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use vqh_core::optim::OptimizerConfig;
use vqh_core::qubo::{brute_force_solve, ChordEncoding, Configuration};
use vqh_core::sonify::{
    arpeggio_events, build_stream, map_additive, read_wav, render, stream_bytes, wav_bytes, ExportFormat,
    MappingConfig, SonificationStream, Strategy, Tuning,
};
use vqh_core::statevector::{AnsatzSpec, Axis, ParameterVector, StateVector};
use vqh_core::vqe::{Discard, InitialPoint, RunResult, ScheduleSpec, Segment, Vqe};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
}

fn check(ok: bool, fail: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(fail())
    }
}

fn example1_vqe(seed: u64) -> Vqe {
    Vqe::new(AnsatzSpec::linear(12, 1).unwrap(), OptimizerConfig::nft(seed))
}

fn paper_energies() -> Outcome {
    let coupled = chord(&["C", "E", "G"], ChordEncoding::Coupled).to_ising();
    let balanced = chord(&["C", "E", "G"], ChordEncoding::Balanced).to_ising();
    let cmaj = Configuration::from_notes(&[0, 4, 7], 12).unwrap();
    let anti = cmaj.complement();
    let got = [
        coupled.energy(&anti).unwrap(),
        coupled.energy(&cmaj).unwrap(),
        balanced.energy(&anti).unwrap(),
        balanced.energy(&cmaj).unwrap(),
    ];
    check(got == [-24.0, 0.0, -12.0, -12.0], || format!("got {got:?}"))?;
    Ok(format!("coupled antiCmaj {} Cmaj {}; balanced {} / {}", got[0], got[1], got[2], got[3]))
}

fn transform_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut configurations = 0usize;
    for case in 0..200 {
        let n = rng.gen_range(1..=10);
        let q = random_qubo(&mut rng, n, case % 2 == 0);
        let h = q.to_ising();
        let m = problem_matrix(&q);
        let mut energies = Vec::with_capacity(1 << n);
        for k in 0..1usize << n {
            let bits = bits_of(k, n);
            let cost = matrix_cost(&m, &bits);
            let e = h.energy(&Configuration::from_bits(bits).unwrap()).unwrap();
            check((e - (4.0 * cost - h.offset())).abs() <= 1e-9, || {
                format!("case {case}: configuration {k} energy {e} vs 4·{cost} − {}", h.offset())
            })?;
            energies.push(e);
        }
        configurations += energies.len();
        let lowest = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let ising_argmin: BTreeSet<usize> = (0..energies.len()).filter(|&k| energies[k] - lowest <= 1e-9).collect();
        let qubo_argmin: BTreeSet<usize> = brute_force_solve(&q)
            .unwrap()
            .minimizers
            .iter()
            .map(Configuration::index)
            .collect();
        check(ising_argmin == qubo_argmin, || format!("case {case}: argmin sets differ"))?;
    }
    Ok(format!("200 problems, {configurations} configurations"))
}

fn example1_convergence(runs: &mut Vec<RunResult>) -> Outcome {
    let h = chord(&["C", "E", "G"], ChordEncoding::Linear).to_ising();
    let ground = h.ground_energy().unwrap();
    let target = c_major_indicator();
    let mut passed = 0;
    let mut worst_gap = 0.0f64;
    for seed in 0..10 {
        let v = example1_vqe(seed);
        let r = v.run(&h, 150, &v.ansatz.zero_parameters(), &mut Discard).unwrap();
        let last = &r.records.last().unwrap().marginals.0;
        let close = last.iter().zip(&target).all(|(m, t)| (m - t).abs() <= 0.1);
        let gap = r.final_expectation - ground;
        worst_gap = worst_gap.max(gap);
        if close && gap.abs() <= 0.1 {
            passed += 1;
        }
        runs.push(r);
    }
    check(passed >= 8, || format!("{passed}/10 seeds converged"))?;
    Ok(format!("{passed}/10 seeds within 0.1, ground {ground}, worst gap {worst_gap:.2e}"))
}

fn progression_structure(runs: &mut Vec<RunResult>) -> Outcome {
    let chords = [["C", "E", "G"], ["F", "A", "C"], ["G", "B", "D"], ["C", "E", "G"]];
    let segments = chords
        .iter()
        .map(|c| Segment {
            hamiltonian: chord(c, ChordEncoding::Linear).to_ising(),
            iterations: 150,
        })
        .collect();
    let v = example1_vqe(0);
    let r = v
        .run_schedule(&ScheduleSpec::sequential(segments), &v.ansatz.zero_parameters(), &mut Discard)
        .unwrap();
    check(r.records.len() == 600, || format!("{} records", r.records.len()))?;
    for b in [150, 300, 450] {
        check(r.records[b].params == r.records[b - 1].params, || format!("no carry-over at step {b}"))?;
        check(r.records[b].segment == r.records[b - 1].segment + 1, || format!("segment tag at step {b}"))?;
    }
    check(r.stages[0].hamiltonian == r.stages[3].hamiltonian, || "segments 1 and 4 differ".into())?;
    check(r.records[0].params != r.records[450].params, || "segments 1 and 4 start equal".into())?;
    let finals: Vec<String> = r.segment_finals().iter().map(|f| format!("{:.2}", f.1)).collect();
    runs.push(r);
    Ok(format!("600 records, carry-over at 150/300/450, finals [{}]", finals.join(", ")))
}

fn variational_bound(runs: &[RunResult]) -> Outcome {
    let mut checked = 0;
    for (i, r) in runs.iter().enumerate() {
        for rec in &r.records {
            let stage = r.stage_of(rec.step).unwrap();
            let ground = brute_force_solve_ising(&stage.hamiltonian);
            check(rec.expectation >= ground - 1e-9, || {
                format!("run {i} step {}: {} < {ground}", rec.step, rec.expectation)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} records across {} runs", runs.len()))
}

fn brute_force_solve_ising(h: &vqh_core::qubo::IsingHamiltonian) -> f64 {
    (0..1usize << h.n())
        .map(|k| ising_energy_direct(h.fields(), h.couplings(), &bits_of(k, h.n())))
        .fold(f64::INFINITY, f64::min)
}

fn simulator_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_amp = 0.0f64;
    let mut worst_norm = 0.0f64;
    for case in 0..100 {
        let n: usize = rng.gen_range(1..=4);
        let reps = rng.gen_range(0..=2);
        let pairs: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        let ansatz = AnsatzSpec::new(n, reps, pairs.clone()).unwrap();
        let params: Vec<f64> = (0..ansatz.parameter_count()).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let state = ansatz.prepare(&ParameterVector(params.clone())).unwrap();
        let oracle = dense_prepare(n, reps, &pairs, &params);
        for (a, b) in state.amplitudes().iter().zip(&oracle) {
            worst_amp = worst_amp.max((a - b).norm());
        }
        // same circuit gate by gate, norm checked after each application
        let mut s = StateVector::zero(n).unwrap();
        for layer in 0..=reps {
            if layer > 0 {
                for &(c, t) in &pairs {
                    s.cnot(c, t).unwrap();
                    worst_norm = worst_norm.max((s.norm_sqr() - 1.0).abs());
                }
            }
            for q in 0..n {
                s.rotate(q, Axis::Y, params[layer * 2 * n + q]).unwrap();
                worst_norm = worst_norm.max((s.norm_sqr() - 1.0).abs());
            }
            for q in 0..n {
                s.rotate(q, Axis::Z, params[layer * 2 * n + n + q]).unwrap();
                worst_norm = worst_norm.max((s.norm_sqr() - 1.0).abs());
            }
        }
        check(worst_amp <= 1e-9, || format!("case {case}: amplitude error {worst_amp:e}"))?;
        check(worst_norm <= 1e-12, || format!("case {case}: norm drift {worst_norm:e}"))?;
    }
    Ok(format!("100 cases, max amplitude error {worst_amp:.1e}, max norm drift {worst_norm:.1e}"))
}

/// Index that changed between consecutive records, if any.
fn touched(r: &RunResult) -> Result<Vec<(usize, Option<usize>)>, String> {
    r.records
        .windows(2)
        .map(|w| {
            let diff: Vec<usize> = (0..w[0].params.len())
                .filter(|&k| w[0].params.0[k] != w[1].params.0[k])
                .collect();
            match diff.len() {
                0 => Ok((w[0].step, None)),
                1 => Ok((w[0].step, Some(diff[0]))),
                _ => Err(format!("step {} changed {} parameters", w[0].step, diff.len())),
            }
        })
        .collect()
}

fn nft_structure(runs: &mut Vec<RunResult>) -> Outcome {
    let h = chord(&["C", "E", "G"], ChordEncoding::Linear).to_ising();
    let v = example1_vqe(0);
    let init = InitialPoint::Random { seed: 12 }.parameters(&v.ansatz);
    let r = v.run(&h, 150, &init, &mut Discard).unwrap();
    let period = v.ansatz.parameter_count();
    check(period == 48, || format!("parameter count {period}"))?;
    let mut per_cycle = vec![BTreeSet::new(); 150 / 48 + 1];
    for (step, k) in touched(&r)? {
        if let Some(k) = k {
            check(k == step % 48, || format!("step {step} touched {k}"))?;
            per_cycle[step / 48].insert(k);
        }
    }
    check(!per_cycle[0].is_empty() && per_cycle[0] == per_cycle[1], || {
        format!("cycles differ: {:?} vs {:?}", per_cycle[0], per_cycle[1])
    })?;
    let moving = per_cycle[0].len();
    runs.push(r);
    Ok(format!("every update touches step mod 48; the same {moving} indices move in each cycle"))
}

fn sonification_spectra(runs: &[RunResult]) -> Outcome {
    let labels = vqh_core::qubo::default_labels(12);
    let held = SonificationStream::held(labels.clone(), c_major_indicator(), 0.0, 2, 1.0);
    let buf = map_additive(&held, &MappingConfig::default()).unwrap();
    let len = 32_768;
    let spec = power_spectrum(&buf.samples[8_000..], len);
    let tuning = Tuning::default();
    let mut weakest = f64::INFINITY;
    for i in [0, 4, 7] {
        let expected = bin_of(tuning.frequency(i), len, buf.sample_rate);
        let (k, p) = peak_near(&spec, expected, 3);
        check(k.abs_diff(expected) <= 2, || format!("note {i} peak at bin {k}, expected {expected}"))?;
        weakest = weakest.min(p);
    }
    let mut dominance = f64::INFINITY;
    for i in (0..12).filter(|i| ![0, 4, 7].contains(i)) {
        dominance = dominance.min(db(weakest / spec[bin_of(tuning.frequency(i), len, buf.sample_rate)]));
    }
    check(dominance >= 40.0, || format!("dominance only {dominance:.1} dB"))?;

    let mut frames = 0;
    for r in runs {
        let stream = build_stream(r, &labels, 0.25).unwrap();
        let events = arpeggio_events(&stream, &MappingConfig::for_strategy(Strategy::Arpeggio)).unwrap();
        for f in 0..stream.frames.len() {
            let these: Vec<_> = events.iter().filter(|e| e.frame == f).collect();
            for w in these.windows(2) {
                let ordered = w[0].amplitude < w[1].amplitude
                    || (w[0].amplitude == w[1].amplitude && w[0].note < w[1].note);
                check(ordered, || format!("frame {f}: {:?}", w))?;
            }
            frames += 1;
        }
    }

    let back = read_wav(wav_bytes(&buf).as_slice()).map_err(|e| e.to_string())?;
    let worst = buf
        .samples
        .iter()
        .zip(&back.samples)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    check(worst <= 1.0 / 32_767.0, || format!("round-trip error {worst:e}"))?;
    Ok(format!(
        "peaks on C/E/G, {dominance:.1} dB dominance; arpeggio order holds in {frames} frames; WAV error {:.2} LSB",
        worst * 32_767.0
    ))
}

fn determinism() -> Outcome {
    let artifacts = || {
        let h = chord(&["C", "E", "G"], ChordEncoding::Linear).to_ising();
        let v = Vqe::new(AnsatzSpec::linear(12, 1).unwrap(), OptimizerConfig::spsa(7)).with_shots(Some(512));
        let init = InitialPoint::Random { seed: 7 }.parameters(&v.ansatz);
        let r = v.run(&h, 60, &init, &mut Discard).unwrap();
        let stream = build_stream(&r, &vqh_core::qubo::default_labels(12), 0.1).unwrap();
        let mut out = vec![stream_bytes(&stream, ExportFormat::Jsonl)];
        for s in Strategy::ALL {
            out.push(wav_bytes(&render(&stream, &MappingConfig::for_strategy(s)).unwrap().buffer));
        }
        out
    };
    let (a, b) = (artifacts(), artifacts());
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        check(x == y, || format!("artifact {i} differs"))?;
    }
    Ok(format!("JSONL and {} WAV files byte-identical", Strategy::ALL.len()))
}

fn main() {
    let mut runs = Vec::new();
    let criteria: Vec<(Criterion, Box<dyn FnMut(&mut Vec<RunResult>) -> Outcome>)> = vec![
        (
            Criterion { name: "reference energies", budget: Some(Duration::from_secs(1)) },
            Box::new(|_| paper_energies()),
        ),
        (
            Criterion { name: "oracle/transform equivalence", budget: Some(Duration::from_secs(30)) },
            Box::new(|_| transform_equivalence()),
        ),
        (
            Criterion { name: "example 1 convergence", budget: Some(Duration::from_secs(60)) },
            Box::new(example1_convergence),
        ),
        (
            Criterion { name: "progression structure", budget: Some(Duration::from_secs(90)) },
            Box::new(progression_structure),
        ),
        (
            Criterion { name: "simulator correctness", budget: None },
            Box::new(|_| simulator_correctness()),
        ),
        (
            Criterion { name: "nft structure", budget: None },
            Box::new(nft_structure),
        ),
        (
            Criterion { name: "variational bound", budget: None },
            Box::new(|runs| variational_bound(runs)),
        ),
        (
            Criterion { name: "sonification spectra", budget: Some(Duration::from_secs(30)) },
            Box::new(|runs| sonification_spectra(runs)),
        ),
        (
            Criterion { name: "determinism", budget: None },
            Box::new(|_| determinism()),
        ),
    ];

    let mut failures = 0;
    for (criterion, mut body) in criteria {
        let start = Instant::now();
        let outcome = body(&mut runs);
        let elapsed = start.elapsed();
        let outcome = match (outcome, criterion.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<30} {:>9.2?}  {detail}", criterion.name, elapsed),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:<30} {:>9.2?}  {why}", criterion.name, elapsed);
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
