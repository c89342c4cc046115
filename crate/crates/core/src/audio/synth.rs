//! Seeded synthetic audio used by the codec test corpus and the robustness
//! benchmarks: low-passed noise plus a handful of low-frequency tones over
//! a small broadband floor, normalized to a fixed RMS.
//!
//! The broadband floor keeps every spectral bin alive (phase detection
//! needs nonzero host magnitudes) while the overall tilt toward low
//! frequencies leaves the mid band quiet enough for phase coding to stay
//! well inside the imperceptibility budget.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audio::AudioBuffer;

const TARGET_RMS: f64 = 0.06;

/// Deterministic noise-plus-tones mixture at the given rate and length.
pub fn noise_plus_tones(seed: u64, len: usize, sample_rate: u32) -> AudioBuffer {
    let mut rng = crate::rng::rng_from_key("noise-plus-tones", seed);

    let tones: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let freq = rng.random_range(200.0..700.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (freq, phase, 0.033)
        })
        .collect();

    let mut samples = vec![0.0f64; len];
    let mut lowpass = 0.0f64;
    for (n, s) in samples.iter_mut().enumerate() {
        let w: f64 = StandardNormal.sample(&mut rng);
        lowpass = 0.95 * lowpass + 0.0141 * w;
        let floor: f64 = StandardNormal.sample(&mut rng);
        let t = n as f64 / sample_rate as f64;
        let mut v = lowpass + 0.008 * floor;
        for &(freq, phase, amp) in &tones {
            v += amp * (std::f64::consts::TAU * freq * t + phase).sin();
        }
        *s = v;
    }

    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / len.max(1) as f64).sqrt();
    if rms > 0.0 {
        let g = TARGET_RMS / rms;
        for s in &mut samples {
            *s *= g;
        }
    }
    AudioBuffer::new(samples, sample_rate)
}
