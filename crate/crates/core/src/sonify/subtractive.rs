use std::f64::consts::TAU;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{buffer_len, control_at, AudioBuffer, MappingConfig, SonificationStream, SonifyError};

/// Second-order band-pass with 0 dB gain at the centre frequency,
/// transposed direct form II.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    z1: f64,
    z2: f64,
}

impl BandPass {
    pub fn new(frequency: f64, q: f64, sample_rate: u32) -> Result<Self, SonifyError> {
        let mut f = Self {
            b0: 0.0,
            b2: 0.0,
            a1: 0.0,
            a2: 0.0,
            z1: 0.0,
            z2: 0.0,
        };
        f.retune(frequency, q, sample_rate)?;
        Ok(f)
    }

    /// New coefficients, keeping the filter state.
    pub fn retune(&mut self, frequency: f64, q: f64, sample_rate: u32) -> Result<(), SonifyError> {
        let fs = f64::from(sample_rate);
        if !(frequency > 0.0 && frequency < fs / 2.0 && q > 0.0 && q.is_finite()) {
            return Err(SonifyError::UnstableFilter {
                frequency,
                q,
                sample_rate,
            });
        }
        let w = TAU * frequency / fs;
        let alpha = w.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        self.b0 = alpha / a0;
        self.b2 = -alpha / a0;
        self.a1 = -2.0 * w.cos() / a0;
        self.a2 = (1.0 - alpha) / a0;
        Ok(())
    }

    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z1;
        self.z1 = -self.a1 * y + self.z2;
        self.z2 = self.b2 * x - self.a2 * y;
        y
    }
}

fn q_at(config: &MappingConfig, u: f64) -> f64 {
    config.q_min + u * (config.q_max - config.q_min)
}

/// Filtered noise for each band before mixing, one vector per note.
/// Band `i` is scaled by its interpolated marginal and by `√Q` so that
/// narrow bands keep roughly the loudness of wide ones.
pub fn subtractive_bands(
    stream: &SonificationStream,
    config: &MappingConfig,
) -> Result<Vec<Vec<f64>>, SonifyError> {
    config.check_stream(stream)?;
    let len = buffer_len(stream, config.sample_rate);
    let freqs = config.tuning.frequencies();
    let q0 = stream.frames.first().map_or(config.q_min, |f| q_at(config, f.u));
    let mut filters = freqs
        .iter()
        .map(|&f| BandPass::new(f, q0, config.sample_rate))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Uniform::new_inclusive(-1.0f64, 1.0);
    let samples_per_frame = stream.frame_duration * f64::from(config.sample_rate);
    let dt = 1.0 / f64::from(config.sample_rate);
    let mut bands = vec![Vec::with_capacity(len); freqs.len()];
    let mut frame = 0usize;
    for s in 0..len {
        let current = ((s as f64 / samples_per_frame) as usize).min(stream.frames.len() - 1);
        if current != frame {
            frame = current;
            let q = q_at(config, stream.frames[frame].u);
            for (filter, &f) in filters.iter_mut().zip(&freqs) {
                filter.retune(f, q, config.sample_rate)?;
            }
        }
        let q = q_at(config, stream.frames[frame].u);
        let makeup = q.sqrt();
        let x = noise.sample(&mut rng);
        let t = s as f64 * dt;
        for (i, filter) in filters.iter_mut().enumerate() {
            let y = filter.process(x);
            let gain = control_at(stream, t, |f| f.marginals[i]);
            bands[i].push(gain * makeup * y);
        }
    }
    Ok(bands)
}

/// Noise through one resonant band per note; Q rises with closeness `u`.
pub fn map_subtractive(stream: &SonificationStream, config: &MappingConfig) -> Result<AudioBuffer, SonifyError> {
    if stream.frames.is_empty() {
        config.check_stream(stream)?;
        return Ok(AudioBuffer::silent(config.sample_rate, 0));
    }
    let bands = subtractive_bands(stream, config)?;
    let n = bands.len().max(1) as f64;
    let len = bands.first().map_or(0, Vec::len);
    let mut mix: Vec<f64> = (0..len).map(|s| bands.iter().map(|b| b[s]).sum::<f64>() / n).collect();
    let peak = mix.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 1.0 {
        mix.iter_mut().for_each(|x| *x /= peak);
    }
    Ok(AudioBuffer::from_mix(config.sample_rate, mix))
}
