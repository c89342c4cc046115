//! Short-time spectral analysis. The public pair `stft`/`istft` uses a
//! periodic Hann window; reconstruction divides by the accumulated window
//! sum, so any hop with full coverage inverts exactly on the interior.
//!
//! The codec schemes use the crate-private rectangular non-overlapping
//! transform (`analyze_rect`/`synthesize_rect`): with hop == frame and no
//! window, a modified spectrum re-analyzes to exactly itself, which is what
//! quantization-lattice detectors need.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_FRAME: usize = 1024;
pub const DEFAULT_HOP: usize = 512;

/// One analysis frame: half-spectrum magnitudes plus phases in (-pi, pi].
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub magnitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub frame_length: usize,
    pub hop: usize,
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect()
}

fn principal_phase(c: Complex<f64>) -> f64 {
    let p = c.im.atan2(c.re);
    if p <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        p
    }
}

/// Hann-windowed short-time transform over full frames starting at
/// multiples of `hop`.
pub fn stft(audio: &AudioBuffer, frame_length: usize, hop: usize) -> Result<Vec<SpectralFrame>> {
    if hop == 0 || hop > frame_length || frame_length > audio.len() {
        return Err(Error::InvalidInput(format!(
            "stft requires 0 < hop <= frame_length <= length (hop {hop}, frame {frame_length}, len {})",
            audio.len()
        )));
    }
    let window = hann(frame_length);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(frame_length);

    let n_frames = (audio.len() - frame_length) / hop + 1;
    let half = frame_length / 2 + 1;
    let mut frames = Vec::with_capacity(n_frames);
    let mut buf = vec![Complex::new(0.0, 0.0); frame_length];

    for t in 0..n_frames {
        let start = t * hop;
        for i in 0..frame_length {
            buf[i] = Complex::new(audio.samples[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        let magnitudes = buf[..half].iter().map(|c| c.norm()).collect();
        let phases = buf[..half].iter().map(|&c| principal_phase(c)).collect();
        frames.push(SpectralFrame {
            magnitudes,
            phases,
            frame_length,
            hop,
        });
    }
    Ok(frames)
}

/// Inverse of [`stft`]: overlap-add with window-sum normalization.
/// Samples with no window coverage (the very edges) come out as zero.
pub fn istft(frames: &[SpectralFrame], length: usize, sample_rate: u32) -> Result<AudioBuffer> {
    if frames.is_empty() {
        return Ok(AudioBuffer::new(vec![0.0; length], sample_rate));
    }
    let n = frames[0].frame_length;
    let hop = frames[0].hop;
    if frames.iter().any(|f| f.frame_length != n || f.hop != hop) {
        return Err(Error::InvalidInput(
            "istft requires uniform frame_length and hop".into(),
        ));
    }
    let half = n / 2 + 1;
    let window = hann(n);
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);

    let total = (frames.len() - 1) * hop + n;
    let mut acc = vec![0.0f64; total];
    let mut wsum = vec![0.0f64; total];
    let mut buf = vec![Complex::new(0.0, 0.0); n];

    for (t, frame) in frames.iter().enumerate() {
        if frame.magnitudes.len() != half || frame.phases.len() != half {
            return Err(Error::InvalidInput(format!(
                "frame {t} has wrong bin count (expected {half})"
            )));
        }
        for k in 0..half {
            let (s, c) = frame.phases[k].sin_cos();
            buf[k] = Complex::new(frame.magnitudes[k] * c, frame.magnitudes[k] * s);
        }
        // bins 0 and n/2 are real-valued coefficients
        buf[0].im = 0.0;
        if n % 2 == 0 {
            buf[n / 2].im = 0.0;
        }
        for k in 1..n - half + 1 {
            buf[n - k] = buf[k].conj();
        }
        ifft.process(&mut buf);
        let start = t * hop;
        for i in 0..n {
            acc[start + i] += buf[i].re / n as f64;
            wsum[start + i] += window[i];
        }
    }

    let mut out = vec![0.0f64; length];
    for i in 0..length.min(total) {
        if wsum[i] > 1e-8 {
            out[i] = acc[i] / wsum[i];
        }
    }
    Ok(AudioBuffer::new(out, sample_rate))
}

/// Non-overlapping rectangular-window analysis: full complex spectra of
/// consecutive `frame`-sample blocks. Exactly invertible per frame.
pub(crate) fn analyze_rect(samples: &[f64], frame: usize) -> Vec<Vec<Complex<f64>>> {
    let n_frames = samples.len() / frame;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(frame);
    let mut out = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let mut buf: Vec<Complex<f64>> = samples[t * frame..(t + 1) * frame]
            .iter()
            .map(|&s| Complex::new(s, 0.0))
            .collect();
        fft.process(&mut buf);
        out.push(buf);
    }
    out
}

/// Inverse of [`analyze_rect`]. The tail of `original` past the last full
/// frame is carried through unchanged.
pub(crate) fn synthesize_rect(frames: &[Vec<Complex<f64>>], original: &AudioBuffer) -> AudioBuffer {
    if frames.is_empty() {
        return original.clone();
    }
    let frame = frames[0].len();
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(frame);
    let mut samples = original.samples.clone();
    for (t, spec) in frames.iter().enumerate() {
        let mut buf = spec.clone();
        ifft.process(&mut buf);
        for i in 0..frame {
            samples[t * frame + i] = buf[i].re / frame as f64;
        }
    }
    AudioBuffer::new(samples, original.sample_rate)
}

/// Writes `v` into bin `k` of a full spectrum while keeping the spectrum
/// Hermitian (real time signal). `k` must lie in `1..=n/2`.
pub(crate) fn set_hermitian(frame: &mut [Complex<f64>], k: usize, v: Complex<f64>) {
    let n = frame.len();
    debug_assert!(k >= 1 && k <= n / 2);
    if n % 2 == 0 && k == n / 2 {
        frame[k] = Complex::new(v.re, 0.0);
    } else {
        frame[k] = v;
        frame[n - k] = v.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noise(len: usize, seed: u64) -> AudioBuffer {
        let mut rng = crate::rng::rng_from_key("stft-test", seed);
        let samples = (0..len).map(|_| rng.random_range(-0.5..0.5)).collect();
        AudioBuffer::new(samples, 16_000)
    }

    #[test]
    fn round_trip_interior_rms_below_tolerance() {
        let a = noise(8_192, 1);
        let frames = stft(&a, 1024, 512).unwrap();
        let back = istft(&frames, a.len(), a.sample_rate).unwrap();
        let lo = 1024;
        let hi = a.len() - 1024;
        let mse: f64 = (lo..hi)
            .map(|i| (a.samples[i] - back.samples[i]).powi(2))
            .sum::<f64>()
            / (hi - lo) as f64;
        assert!(mse.sqrt() < 1e-6, "interior rms {}", mse.sqrt());
    }

    #[test]
    fn zero_input_gives_zero_magnitudes() {
        let a = AudioBuffer::new(vec![0.0; 4096], 16_000);
        let frames = stft(&a, 1024, 512).unwrap();
        for f in &frames {
            assert!(f.magnitudes.iter().all(|&m| m == 0.0));
        }
    }

    #[test]
    fn bin_center_sine_concentrates_energy() {
        // Bin 32 of a 1024 frame: f = 32 * fs / 1024. A Hann-windowed sine at
        // an exact bin center has nonzero coefficients only at k0-1, k0, k0+1.
        let n = 1024;
        let k0 = 32;
        let fs = 16_000u32;
        let samples: Vec<f64> = (0..4096)
            .map(|i| (2.0 * std::f64::consts::PI * k0 as f64 * i as f64 / n as f64).sin() * 0.7)
            .collect();
        let a = AudioBuffer::new(samples, fs);
        let frames = stft(&a, n, n / 2).unwrap();
        let f = &frames[2];
        let total: f64 = f.magnitudes.iter().map(|m| m * m).sum();
        let local: f64 = (k0 - 1..=k0 + 1).map(|k| f.magnitudes[k].powi(2)).sum();
        assert!(local / total > 0.99, "fraction {}", local / total);
    }

    #[test]
    fn phases_in_principal_range() {
        let a = noise(4_096, 2);
        for f in stft(&a, 512, 256).unwrap() {
            for &p in &f.phases {
                assert!(p > -std::f64::consts::PI && p <= std::f64::consts::PI);
            }
        }
    }

    #[test]
    fn precondition_violations_rejected() {
        let a = noise(1_000, 3);
        assert!(stft(&a, 512, 0).is_err());
        assert!(stft(&a, 512, 513).is_err());
        assert!(stft(&a, 2048, 512).is_err());
    }

    #[test]
    fn rect_transform_is_exact() {
        let a = noise(4_100, 4);
        let frames = analyze_rect(&a.samples, 512);
        assert_eq!(frames.len(), 8);
        let back = synthesize_rect(&frames, &a);
        for (x, y) in a.samples.iter().zip(&back.samples) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
