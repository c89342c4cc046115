//! Signal-processing attacks for robustness testing, plus the colored-noise
//! training augmentation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audio::{resample, AudioBuffer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum AttackKind {
    /// White Gaussian noise scaled so the realized signal-to-noise ratio
    /// equals `snr_db` exactly.
    AdditiveNoise { snr_db: f64, seed: u64 },
    /// Resample to an intermediate rate and back.
    ResampleChain { intermediate_rate: u32 },
    /// Multiply by `gain`, then clamp to [-1, 1].
    AmplitudeScale { gain: f64 },
}

pub fn attack(audio: &AudioBuffer, kind: &AttackKind) -> Result<AudioBuffer> {
    match *kind {
        AttackKind::AdditiveNoise { snr_db, seed } => {
            if !snr_db.is_finite() {
                return Err(Error::InvalidInput("additive_noise snr must be finite".into()));
            }
            let mut rng = crate::rng::rng_from_key("attack-noise", seed);
            let noise: Vec<f64> = (0..audio.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let p_signal = audio.power();
            let p_noise: f64 = if noise.is_empty() {
                0.0
            } else {
                noise.iter().map(|n| n * n).sum::<f64>() / noise.len() as f64
            };
            let gain = if p_signal == 0.0 || p_noise == 0.0 {
                0.0
            } else {
                (p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt()
            };
            let samples = audio
                .samples
                .iter()
                .zip(&noise)
                .map(|(s, n)| s + gain * n)
                .collect();
            Ok(AudioBuffer::new(samples, audio.sample_rate))
        }
        AttackKind::ResampleChain { intermediate_rate } => {
            if intermediate_rate == 0 {
                return Err(Error::InvalidInput(
                    "resample_chain rate must be positive".into(),
                ));
            }
            let mid = resample(audio, intermediate_rate)?;
            resample(&mid, audio.sample_rate)
        }
        AttackKind::AmplitudeScale { gain } => {
            if !gain.is_finite() {
                return Err(Error::InvalidInput("amplitude_scale gain must be finite".into()));
            }
            let samples = audio
                .samples
                .iter()
                .map(|s| (s * gain).clamp(-1.0, 1.0))
                .collect();
            Ok(AudioBuffer::new(samples, audio.sample_rate))
        }
    }
}

/// Adds white noise shaped by a random 10-tap FIR filter, scaled to a target
/// SNR drawn uniformly from `snr_range`. This is a simplified stationary,
/// signal-independent stand-in for heavier augmentation pipelines; the
/// default range used by the corpus tooling, [10, 40] dB, is a project
/// choice rather than an established constant.
pub fn colored_noise_augment(
    audio: &AudioBuffer,
    snr_range: (f64, f64),
    seed: u64,
) -> Result<AudioBuffer> {
    let (lo, hi) = snr_range;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidInput(format!(
            "snr_range [{lo}, {hi}] must be a non-empty finite interval"
        )));
    }
    let mut rng = crate::rng::rng_from_key("colored-noise", seed);
    let snr_db = if lo == hi { lo } else { rng.random_range(lo..hi) };
    let taps: Vec<f64> = (0..10).map(|_| StandardNormal.sample(&mut rng)).collect();
    let white: Vec<f64> = (0..audio.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();

    // causal FIR, zero initial state
    let mut shaped = vec![0.0f64; audio.len()];
    for i in 0..audio.len() {
        let mut acc = 0.0;
        for (j, t) in taps.iter().enumerate() {
            if i >= j {
                acc += t * white[i - j];
            }
        }
        shaped[i] = acc;
    }

    let p_signal = audio.power();
    let p_shaped: f64 = if shaped.is_empty() {
        0.0
    } else {
        shaped.iter().map(|n| n * n).sum::<f64>() / shaped.len() as f64
    };
    let gain = if p_signal == 0.0 || p_shaped == 0.0 {
        0.0
    } else {
        (p_signal / (p_shaped * 10f64.powf(snr_db / 10.0))).sqrt()
    };
    let samples = audio
        .samples
        .iter()
        .zip(&shaped)
        .map(|(s, n)| s + gain * n)
        .collect();
    Ok(AudioBuffer::new(samples, audio.sample_rate))
}
