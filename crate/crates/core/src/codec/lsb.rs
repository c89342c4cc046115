//! Least-significant-bit substitution on the 16-bit quantization grid.
//! Each payload bit is replicated over `segment` keyed pseudorandom sample
//! positions and recovered by majority vote. Samples outside the keyed
//! position set are left bit-identical to the input.

use rand::seq::SliceRandom;

use crate::audio::AudioBuffer;
use crate::codec::{CodecConfig, DetectionResult, WatermarkPayload};
use crate::error::Result;

fn quantize(s: f64) -> i32 {
    (s * 32768.0).round().clamp(-32768.0, 32767.0) as i32
}

/// Keyed permutation of all sample indices; bit `i` owns the slice
/// `[i*spread, (i+1)*spread)` of it.
fn positions(len: usize, key: u64) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..len as u32).collect();
    let mut rng = crate::rng::rng_from_key("lsb-positions", key);
    idx.shuffle(&mut rng);
    idx
}

pub(super) fn embed(
    audio: &AudioBuffer,
    payload: &WatermarkPayload,
    config: &CodecConfig,
) -> Result<AudioBuffer> {
    let spread = config.segment;
    let idx = positions(audio.len(), config.key);
    let mut samples = audio.samples.clone();
    for (i, &bit) in payload.bits.iter().enumerate() {
        for &p in &idx[i * spread..(i + 1) * spread] {
            let q = quantize(samples[p as usize]);
            let q = (q & !1) | bit as i32;
            samples[p as usize] = q as f64 / 32768.0;
        }
    }
    Ok(AudioBuffer::new(samples, audio.sample_rate))
}

pub(super) fn detect(
    audio: &AudioBuffer,
    payload_length: usize,
    config: &CodecConfig,
) -> Result<DetectionResult> {
    let spread = config.segment;
    let idx = positions(audio.len(), config.key);
    let mut bits = Vec::with_capacity(payload_length);
    let mut confidence = Vec::with_capacity(payload_length);
    for i in 0..payload_length {
        let ones = idx[i * spread..(i + 1) * spread]
            .iter()
            .filter(|&&p| quantize(audio.samples[p as usize]) & 1 == 1)
            .count() as i64;
        let stat = 2 * ones - spread as i64;
        bits.push(crate::codec::sign_bit(stat as f64));
        confidence.push(stat.unsigned_abs() as f64 / spread as f64);
    }
    Ok(DetectionResult { bits, confidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{self, Scheme};
    use rand::Rng;

    fn test_audio(seed: u64, len: usize) -> AudioBuffer {
        let mut rng = crate::rng::rng_from_key("lsb-test", seed);
        AudioBuffer::new(
            (0..len).map(|_| rng.random_range(-0.5..0.5)).collect(),
            16_000,
        )
    }

    #[test]
    fn round_trip_is_exact() {
        let audio = test_audio(1, 10_000);
        let cfg = CodecConfig::default_for(Scheme::Lsb).with_key(7);
        let mut rng = crate::rng::rng_from_key("payload", 1);
        let payload = WatermarkPayload::random(&mut rng, 32);
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let det = codec::detect(&marked, 32, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }

    #[test]
    fn unselected_samples_untouched() {
        let audio = test_audio(2, 5_000);
        let cfg = CodecConfig::default_for(Scheme::Lsb).with_key(3);
        let payload = WatermarkPayload::new(vec![1; 8]).unwrap();
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let selected: std::collections::HashSet<u32> = positions(audio.len(), 3)
            .into_iter()
            .take(8 * cfg.segment)
            .collect();
        for (i, (a, b)) in audio.samples.iter().zip(&marked.samples).enumerate() {
            if !selected.contains(&(i as u32)) {
                assert!(a.to_bits() == b.to_bits(), "sample {i} changed");
            }
        }
    }

    #[test]
    fn survives_pcm_write_quantization() {
        // detection reads the same grid values after a write/read cycle
        let audio = test_audio(3, 8_000);
        let cfg = CodecConfig::default_for(Scheme::Lsb).with_key(11);
        let payload = WatermarkPayload::new(vec![1, 0, 1, 1, 0, 0, 1, 0]).unwrap();
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let requantized = AudioBuffer::new(
            marked.samples.iter().map(|&s| quantize(s) as f64 / 32768.0).collect(),
            marked.sample_rate,
        );
        let det = codec::detect(&requantized, 8, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }
}
