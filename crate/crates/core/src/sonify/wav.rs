use std::io::{Cursor, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioBuffer, SonifyError};

fn spec(sample_rate: u32) -> WavSpec {
    WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    }
}

fn quantize(x: f32) -> i16 {
    (f64::from(x).clamp(-1.0, 1.0) * 32767.0).round() as i16
}

fn write_to<W: Write + Seek>(buffer: &AudioBuffer, out: W) -> Result<(), SonifyError> {
    let mut w = WavWriter::new(out, spec(buffer.sample_rate))?;
    {
        let mut samples = w.get_i16_writer(buffer.samples.len() as u32);
        for &x in &buffer.samples {
            samples.write_sample(quantize(x));
        }
        samples.flush()?;
    }
    w.finalize()?;
    Ok(())
}

/// 16-bit PCM mono; samples are clipped to `[−1, 1]` and scaled by 32767.
pub fn render_wav(buffer: &AudioBuffer, path: &Path) -> Result<(), SonifyError> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_to(buffer, file)
}

pub fn wav_bytes(buffer: &AudioBuffer) -> Vec<u8> {
    let mut cursor = Cursor::new(Vec::new());
    write_to(buffer, &mut cursor).expect("writing to memory cannot fail");
    cursor.into_inner()
}

/// Reads a 16-bit mono file back into `[−1, 1]`.
pub fn read_wav(input: impl Read) -> Result<AudioBuffer, SonifyError> {
    let mut r = WavReader::new(input)?;
    let s = r.spec();
    if s.channels != 1 || s.bits_per_sample != 16 || s.sample_format != SampleFormat::Int {
        return Err(SonifyError::Parse(format!(
            "expected 16-bit mono PCM, got {} channel(s) at {} bits",
            s.channels, s.bits_per_sample
        )));
    }
    let samples = r
        .samples::<i16>()
        .map(|x| x.map(|v| f32::from(v) / 32767.0))
        .collect::<Result<_, _>>()?;
    Ok(AudioBuffer {
        sample_rate: s.sample_rate,
        samples,
    })
}
