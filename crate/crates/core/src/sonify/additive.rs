use std::f64::consts::TAU;

use super::{buffer_len, control_at, AudioBuffer, MappingConfig, SonificationStream, SonifyError};

/// Sums phase-continuous sines. `voice(i, t)` returns the frequency and
/// amplitude of oscillator `i` at time `t`; the mix is divided by `norm`.
fn oscillator_bank(
    len: usize,
    sample_rate: u32,
    voices: usize,
    norm: f64,
    mut voice: impl FnMut(usize, f64) -> (f64, f64),
) -> AudioBuffer {
    let dt = 1.0 / f64::from(sample_rate);
    let mut phases = vec![0.0f64; voices];
    let mut mix = Vec::with_capacity(len);
    for s in 0..len {
        let t = s as f64 * dt;
        let mut acc = 0.0;
        for (i, phase) in phases.iter_mut().enumerate() {
            let (freq, amp) = voice(i, t);
            if amp != 0.0 {
                acc += amp * phase.sin();
            }
            *phase = (*phase + TAU * freq * dt).rem_euclid(TAU);
        }
        mix.push(acc / norm);
    }
    AudioBuffer::from_mix(sample_rate, mix)
}

/// One oscillator per note at its tuning frequency, amplitude following the
/// note's marginal.
pub fn map_additive(stream: &SonificationStream, config: &MappingConfig) -> Result<AudioBuffer, SonifyError> {
    config.check_stream(stream)?;
    let len = buffer_len(stream, config.sample_rate);
    if stream.frames.is_empty() {
        return Ok(AudioBuffer::silent(config.sample_rate, 0));
    }
    let freqs = config.tuning.frequencies();
    let n = freqs.len();
    Ok(oscillator_bank(len, config.sample_rate, n, n.max(1) as f64, |i, t| {
        (freqs[i], control_at(stream, t, |f| f.marginals[i]))
    }))
}

/// Partials `n = 1..N` at `(n − c_n(t))·f_1` with `c_n = shift_scale · marginal_n`
/// and fixed amplitudes `1/n`.
pub fn map_inharmonic(stream: &SonificationStream, config: &MappingConfig) -> Result<AudioBuffer, SonifyError> {
    config.check_stream(stream)?;
    partials(stream, config, config.shift_scale)
}

/// The unshifted harmonic tone that [`map_inharmonic`] bends.
pub fn harmonic_series(stream: &SonificationStream, config: &MappingConfig) -> Result<AudioBuffer, SonifyError> {
    config.check_stream(stream)?;
    partials(stream, config, 0.0)
}

fn partials(stream: &SonificationStream, config: &MappingConfig, shift_scale: f64) -> Result<AudioBuffer, SonifyError> {
    let f1 = config.tuning.base_hz;
    let count = config.tuning.notes;
    for frame in &stream.frames {
        for (i, m) in frame.marginals.iter().enumerate() {
            let n = (i + 1) as f64;
            let frequency = (n - shift_scale * m) * f1;
            if frequency <= 0.0 {
                return Err(SonifyError::NonPositiveFrequency { partial: i + 1, frequency });
            }
        }
    }
    let len = buffer_len(stream, config.sample_rate);
    if stream.frames.is_empty() {
        return Ok(AudioBuffer::silent(config.sample_rate, 0));
    }
    let norm: f64 = (1..=count).map(|n| 1.0 / n as f64).sum();
    Ok(oscillator_bank(len, config.sample_rate, count, norm.max(1.0), |i, t| {
        let n = (i + 1) as f64;
        let shift = if shift_scale == 0.0 {
            0.0
        } else {
            shift_scale * control_at(stream, t, |f| f.marginals[i])
        };
        ((n - shift) * f1, 1.0 / n)
    }))
}
