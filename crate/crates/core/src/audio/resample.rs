//! Band-limited sample-rate conversion with a 64-tap Hann-windowed sinc
//! kernel. Quality is sufficient for codec round-trip experiments; this is
//! not a mastering-grade resampler.

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

const HALF_TAPS: isize = 32; // 64-tap kernel

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Hann-windowed sinc interpolation kernel, low-passed at `cutoff` (as a
/// fraction of the source Nyquist) when downsampling.
fn kernel(u: f64, cutoff: f64) -> f64 {
    if u.abs() >= HALF_TAPS as f64 {
        return 0.0;
    }
    let window = 0.5 * (1.0 + (std::f64::consts::PI * u / HALF_TAPS as f64).cos());
    cutoff * sinc(cutoff * u) * window
}

/// Resamples to `target_rate`. Output length is
/// `round(len * target / source)`; equal rates return the input unchanged.
pub fn resample(audio: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidInput("target_rate must be positive".into()));
    }
    if target_rate == audio.sample_rate {
        return Ok(audio.clone());
    }

    let ratio = target_rate as f64 / audio.sample_rate as f64;
    let out_len = (audio.len() as f64 * ratio).round() as usize;
    let cutoff = ratio.min(1.0);
    let x = &audio.samples;

    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let t = n as f64 / ratio;
        let k0 = t.floor() as isize;
        let mut acc = 0.0;
        for k in (k0 - HALF_TAPS + 1)..=(k0 + HALF_TAPS) {
            if k < 0 || k as usize >= x.len() {
                continue;
            }
            acc += x[k as usize] * kernel(t - k as f64, cutoff);
        }
        out.push(acc);
    }

    Ok(AudioBuffer::new(out, target_rate))
}
