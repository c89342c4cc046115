//! Phase coding on the first analysis frame: bit 1 writes +pi/2, bit 0
//! writes -pi/2 at keyed mid-band bins, and every later frame's phase at
//! those bins is rotated by the same offset so inter-frame phase
//! differences are preserved. Detection reads the sign of the phase at the
//! keyed bins of the first frame.
//!
//! `strength` is a magnitude floor applied to the payload bins of the first
//! frame; without it a near-zero host bin would store no usable phase.

use rand::seq::SliceRandom;
use rustfft::num_complex::Complex;

use crate::audio::{analyze_rect, set_hermitian, synthesize_rect, AudioBuffer};

use crate::codec::{CodecConfig, DetectionResult, WatermarkPayload};
use crate::error::Result;

use std::f64::consts::FRAC_PI_2;

/// Payload bins live in [N/4, 3N/8): mid-band, clear of DC and Nyquist.
fn candidate_bins(frame: usize) -> std::ops::Range<usize> {
    frame / 4..frame * 3 / 8
}

pub(super) fn capacity(len: usize, config: &CodecConfig) -> usize {
    if len < config.frame {
        0
    } else {
        candidate_bins(config.frame).len()
    }
}

fn keyed_bins(config: &CodecConfig, count: usize) -> Vec<usize> {
    let mut bins: Vec<usize> = candidate_bins(config.frame).collect();
    let mut rng = crate::rng::rng_from_key("phase-bins", config.key);
    bins.shuffle(&mut rng);
    bins.truncate(count);
    bins
}

pub(super) fn embed(
    audio: &AudioBuffer,
    payload: &WatermarkPayload,
    config: &CodecConfig,
) -> Result<AudioBuffer> {
    let mut frames = analyze_rect(&audio.samples, config.frame);
    let bins = keyed_bins(config, payload.len());

    for (i, &bit) in payload.bits.iter().enumerate() {
        let k = bins[i];
        let old = frames[0][k];
        let magnitude = old.norm().max(config.strength);
        let target = if bit == 1 { FRAC_PI_2 } else { -FRAC_PI_2 };
        let rotation = Complex::from_polar(1.0, target - old.arg());
        set_hermitian(&mut frames[0], k, Complex::from_polar(magnitude, target));
        for frame in frames.iter_mut().skip(1) {
            let v = frame[k] * rotation;
            set_hermitian(frame, k, v);
        }
    }

    Ok(synthesize_rect(&frames, audio))
}

pub(super) fn detect(
    audio: &AudioBuffer,
    payload_length: usize,
    config: &CodecConfig,
) -> Result<DetectionResult> {
    let frames = analyze_rect(&audio.samples, config.frame);
    let bins = keyed_bins(config, payload_length);
    let mut bits = Vec::with_capacity(payload_length);
    let mut confidence = Vec::with_capacity(payload_length);
    for &k in &bins {
        let c = frames[0][k];
        let phase = c.im.atan2(c.re);
        bits.push(crate::codec::sign_bit(phase));
        // distance from the sign decision boundary, in [0, 1]
        confidence.push(if c.norm() == 0.0 { 0.0 } else { phase.sin().abs() });
    }
    Ok(DetectionResult { bits, confidence })
}
