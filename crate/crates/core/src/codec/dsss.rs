//! Direct-sequence spread spectrum: each `segment`-sample block carries one
//! bit as a keyed +/-1 chip sequence added at amplitude `strength`.
//! Detection correlates the block with the same chips; the sign of the
//! normalized correlation is the bit.

use rand::Rng;

use crate::audio::AudioBuffer;
use crate::codec::{CodecConfig, DetectionResult, WatermarkPayload};
use crate::error::Result;

fn chips(config: &CodecConfig, segment_index: usize, out: &mut [f64]) {
    let mut rng = crate::rng::rng_from_key_index("dsss-pn", config.key, segment_index as u64);
    for c in out.iter_mut() {
        *c = if rng.random_range(0..2) == 1 { 1.0 } else { -1.0 };
    }
}

pub(super) fn embed(
    audio: &AudioBuffer,
    payload: &WatermarkPayload,
    config: &CodecConfig,
) -> Result<AudioBuffer> {
    let seg = config.segment;
    let mut samples = audio.samples.clone();
    let mut pn = vec![0.0; seg];
    for (i, &bit) in payload.bits.iter().enumerate() {
        chips(config, i, &mut pn);
        let polarity = if bit == 1 { 1.0 } else { -1.0 };
        for (s, c) in samples[i * seg..(i + 1) * seg].iter_mut().zip(&pn) {
            *s += config.strength * polarity * c;
        }
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
    let mut pn = vec![0.0; seg];
    for i in 0..payload_length {
        chips(config, i, &mut pn);
        let corr: f64 = audio.samples[i * seg..(i + 1) * seg]
            .iter()
            .zip(&pn)
            .map(|(s, c)| s * c)
            .sum::<f64>()
            / seg as f64;
        bits.push(crate::codec::sign_bit(corr));
        confidence.push(corr.abs());
    }
    Ok(DetectionResult { bits, confidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{self, bit_error_rate, Scheme};
    use rand::Rng;

    fn test_audio(seed: u64, len: usize) -> AudioBuffer {
        let mut rng = crate::rng::rng_from_key("dsss-test", seed);
        AudioBuffer::new(
            (0..len).map(|_| rng.random_range(-0.2..0.2)).collect(),
            16_000,
        )
    }

    #[test]
    fn round_trip_is_exact() {
        let audio = test_audio(1, 64_600);
        let cfg = CodecConfig::default_for(Scheme::Dsss).with_key(13);
        let mut rng = crate::rng::rng_from_key("payload", 3);
        let payload = WatermarkPayload::random(&mut rng, 8);
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        let det = codec::detect(&marked, 8, &cfg).unwrap();
        assert_eq!(det.bits, payload.bits);
    }

    #[test]
    fn zero_strength_is_identity() {
        let audio = test_audio(2, 16_000);
        let mut cfg = CodecConfig::default_for(Scheme::Dsss).with_key(13);
        cfg.strength = 0.0;
        let payload = WatermarkPayload::new(vec![1, 0]).unwrap();
        let marked = codec::embed(&audio, &payload, &cfg).unwrap();
        assert_eq!(marked.samples, audio.samples);
    }

    #[test]
    fn wrong_key_reads_noise() {
        let mut total = 0.0;
        for seed in 0..40 {
            let audio = test_audio(seed, 64_600);
            let cfg = CodecConfig::default_for(Scheme::Dsss).with_key(13);
            let wrong = CodecConfig::default_for(Scheme::Dsss).with_key(14);
            let mut rng = crate::rng::rng_from_key("payload", seed);
            let payload = WatermarkPayload::random(&mut rng, 8);
            let marked = codec::embed(&audio, &payload, &cfg).unwrap();
            let det = codec::detect(&marked, 8, &wrong).unwrap();
            total += bit_error_rate(&payload, &det.payload()).unwrap();
        }
        let mean = total / 40.0;
        assert!((0.35..=0.65).contains(&mean), "wrong-key mean BER {mean}");
    }
}
