//! Norm-space quantization: the Euclidean norm of each consecutive
//! `segment`-sample block is moved onto an even/odd lattice of step
//! `strength` by uniform block scaling; detection reads the lattice parity
//! of the recomputed norm. Zero-norm blocks cannot be scaled and are
//! skipped, the bit being re-attempted on the next block; the quantizer
//! never targets the zero lattice point, so embedded and skipped blocks
//! stay distinguishable.

use crate::audio::AudioBuffer;
use crate::codec::{CodecConfig, DetectionResult, WatermarkPayload};
use crate::error::{Error, Result};

fn block_norm(block: &[f64]) -> f64 {
    block.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Nearest nonzero lattice point of parity `bit`.
fn quantize(norm: f64, bit: u8, step: f64) -> f64 {
    let b = bit as f64;
    let min_k = if bit == 0 { 1.0 } else { 0.0 };
    let k = ((norm / step - b) / 2.0).round().max(min_k);
    step * (2.0 * k + b)
}

pub(super) fn embed(
    audio: &AudioBuffer,
    payload: &WatermarkPayload,
    config: &CodecConfig,
) -> Result<AudioBuffer> {
    let seg = config.segment;
    let mut samples = audio.samples.clone();
    let n_blocks = samples.len() / seg;
    let mut bit_cursor = 0usize;
    for block_start in (0..n_blocks).map(|i| i * seg) {
        if bit_cursor >= payload.len() {
            break;
        }
        let block = &mut samples[block_start..block_start + seg];
        let norm = block_norm(block);
        if norm == 0.0 {
            continue; // skipped; bit re-attempted on the next block
        }
        let target = quantize(norm, payload.bits[bit_cursor], config.strength);
        let scale = target / norm;
        for s in block.iter_mut() {
            *s *= scale;
        }
        bit_cursor += 1;
    }
    if bit_cursor < payload.len() {
        return Err(Error::Capacity {
            needed: payload.len(),
            available: bit_cursor,
        });
    }
    Ok(AudioBuffer::new(samples, audio.sample_rate))
}

pub(super) fn detect(
    audio: &AudioBuffer,
    payload_length: usize,
    config: &CodecConfig,
) -> Result<DetectionResult> {
    let seg = config.segment;
    let mut bits = Vec::with_capacity(payload_length);
    let mut confidence = Vec::with_capacity(payload_length);
    for block_start in (0..).map(|i| i * seg).take_while(|s| s + seg <= audio.len()) {
        if bits.len() >= payload_length {
            break;
        }
        let norm = block_norm(&audio.samples[block_start..block_start + seg]);
        if norm == 0.0 {
            continue;
        }
        let u = norm / config.strength;
        let nearest = u.round();
        bits.push((nearest as i64 & 1) as u8);
        confidence.push(2.0 * (0.5 - (u - nearest).abs()).max(0.0));
    }
    // not enough non-zero blocks: pad deterministically
    while bits.len() < payload_length {
        bits.push(0);
        confidence.push(0.0);
    }
    Ok(DetectionResult { bits, confidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{self, Scheme};
    use rand::Rng;

    fn test_audio(seed: u64, len: usize) -> AudioBuffer {
        let mut rng = crate::rng::rng_from_key("norm-test", seed);
        AudioBuffer::new(
            (0..len).map(|_| rng.random_range(-0.3..0.3)).collect(),
            16_000,
        )
    }

    #[test]
    fn round_trip_is_exact() {
        let audio = test_audio(1, 64_600);
        let cfg = CodecConfig::default_for(Scheme::NormSpace).with_key(2);
        let mut rng = crate::rng::rng_from_key("payload", 7);
        let payload = WatermarkPayload::random(&mut rng, 64);
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let det = codec::detect(&marked, 64, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }

    #[test]
    fn zero_blocks_are_skipped_and_reattempted() {
        // first block silent, payload lands on later blocks
        let mut samples = vec![0.0; 1000];
        samples.extend(test_audio(2, 3000).samples);
        let audio = AudioBuffer::new(samples, 16_000);
        let cfg = CodecConfig::default_for(Scheme::NormSpace);
        let payload = WatermarkPayload::new(vec![1, 0, 1]).unwrap();
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        assert!(marked.samples[..1000].iter().all(|&s| s == 0.0));
        let det = codec::detect(&marked, 3, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }

    #[test]
    fn survives_pcm_quantization() {
        let audio = test_audio(3, 32_000);
        let cfg = CodecConfig::default_for(Scheme::NormSpace);
        let mut rng = crate::rng::rng_from_key("payload", 8);
        let payload = WatermarkPayload::random(&mut rng, 32);
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let requantized = AudioBuffer::new(
            marked
                .samples
                .iter()
                .map(|&s| ((s * 32768.0).round().clamp(-32768.0, 32767.0)) / 32768.0)
                .collect(),
            16_000,
        );
        let det = codec::detect(&requantized, 32, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }

    #[test]
    fn tiny_norm_block_carries_bit_zero() {
        // norm well below one step still quantizes onto a nonzero even point
        let mut samples = vec![1e-6; 1000];
        samples.extend(test_audio(4, 1000).samples);
        let audio = AudioBuffer::new(samples, 16_000);
        let cfg = CodecConfig::default_for(Scheme::NormSpace);
        let payload = WatermarkPayload::new(vec![0, 1]).unwrap();
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let det = codec::detect(&marked, 2, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }
}
