//! RIFF/WAVE reading and writing. Input support is deliberately narrow:
//! 16-bit PCM or 32-bit IEEE float, one or two channels. Output is always
//! mono 16-bit PCM so written corpora are bit-exactly reproducible.

use std::path::Path;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

const PCM_SCALE: f64 = 32768.0;

fn map_hound_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::FormatError(msg) => Error::Format(format!("{}: {msg}", path.display())),
        hound::Error::Unsupported => {
            Error::Unsupported(format!("{}: unsupported wav encoding", path.display()))
        }
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Reads a wav file as mono f64 samples in `[-1, 1]`.
///
/// Stereo input is downmixed by channel mean; 16-bit PCM is scaled by
/// `1/32768`. Anything other than PCM-16 / float-32 in one or two channels
/// is rejected.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| map_hound_err(path, e))?;
    let spec = reader.spec();

    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::Unsupported(format!(
            "{}: {} channels (only 1 or 2 supported)",
            path.display(),
            spec.channels
        )));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound_err(path, e))?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound_err(path, e))?,
        (fmt, bits) => {
            return Err(Error::Unsupported(format!(
                "{}: {bits}-bit {fmt:?} (only 16-bit PCM and 32-bit float supported)",
                path.display()
            )))
        }
    };

    let samples = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|pair| (pair[0] + pair[1]) / 2.0)
            .collect()
    } else {
        interleaved
    };

    Ok(AudioBuffer::new(samples, spec.sample_rate))
}

/// Quantizes one sample to the 16-bit grid, clamping at full scale.
pub(crate) fn quantize_i16(sample: f64) -> i16 {
    let q = (sample * PCM_SCALE).round();
    q.clamp(-32768.0, 32767.0) as i16
}

/// Writes mono 16-bit PCM. Reading the result back differs from the input
/// by at most one quantization step (2^-15) per sample.
pub fn write_wav(audio: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound_err(path, e))?;
    for &s in &audio.samples {
        writer
            .write_sample(quantize_i16(s))
            .map_err(|e| map_hound_err(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound_err(path, e))
}
