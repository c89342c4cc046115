//! Audio container, I/O, preprocessing, spectral transforms, quality
//! metrics and attack operators shared by the codec and corpus modules.

mod attack;
mod resample;
mod snr;
mod stft;
mod synth;
mod wav;

pub use attack::{attack, colored_noise_augment, AttackKind};
pub use resample::resample;
pub use snr::segmental_snr;
pub use stft::{istft, stft, SpectralFrame, DEFAULT_FRAME, DEFAULT_HOP};
pub use synth::noise_plus_tones;
pub use wav::{read_wav, write_wav};

pub(crate) use stft::{analyze_rect, set_hermitian, synthesize_rect};

use crate::error::{Error, Result};

/// The sample rate every corpus record is resampled to before embedding.
pub const TARGET_SAMPLE_RATE: u32 = 16_000;

/// The fixed-length normalization target used by the preprocessing chain.
pub const TARGET_LENGTH: usize = 64_600;

/// Mono PCM audio: amplitudes nominally in `[-1, 1]` at a stated rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        AudioBuffer {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean square of the samples.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }
}

/// Normalizes to exactly `target_len` samples: long inputs are truncated,
/// short ones are tiled end-to-end and cut.
pub fn fix_length(audio: &AudioBuffer, target_len: usize) -> Result<AudioBuffer> {
    if audio.is_empty() {
        return Err(Error::InvalidInput(
            "fix_length requires at least one sample".into(),
        ));
    }
    let mut out = Vec::with_capacity(target_len);
    while out.len() < target_len {
        let take = (target_len - out.len()).min(audio.len());
        out.extend_from_slice(&audio.samples[..take]);
    }
    Ok(AudioBuffer::new(out, audio.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buf(samples: Vec<f64>) -> AudioBuffer {
        AudioBuffer::new(samples, 16_000)
    }

    #[test]
    fn fix_length_identity() {
        let a = buf((0..64_600).map(|i| (i as f64).sin() * 0.1).collect());
        let out = fix_length(&a, 64_600).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn fix_length_tiles_short_input() {
        let a = buf((0..32_300).map(|i| i as f64 * 1e-5).collect());
        let out = fix_length(&a, 64_600).unwrap();
        assert_eq!(out.len(), 64_600);
        assert_eq!(&out.samples[..32_300], &a.samples[..]);
        assert_eq!(&out.samples[32_300..], &a.samples[..]);
    }

    #[test]
    fn fix_length_truncates_long_input() {
        let a = buf((0..100_000).map(|i| (i % 7) as f64 * 0.01).collect());
        let out = fix_length(&a, 64_600).unwrap();
        assert_eq!(out.samples[..], a.samples[..64_600]);
    }

    #[test]
    fn fix_length_rejects_empty() {
        assert!(fix_length(&buf(vec![]), 10).is_err());
    }

    #[test]
    fn fix_length_idempotent() {
        let a = buf((0..1000).map(|i| ((i * 37) % 100) as f64 / 100.0).collect());
        let once = fix_length(&a, 2_500).unwrap();
        let twice = fix_length(&once, 2_500).unwrap();
        assert_eq!(once, twice);
    }
}
