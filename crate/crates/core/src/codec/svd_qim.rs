//! Quantization index modulation on the leading singular value of 32x32
//! blocks of the magnitude spectrogram. The spectrogram comes from
//! non-overlapping rectangular frames (rows = bins 1..=frame/2, columns =
//! frames), so a modified spectrum re-analyzes to itself exactly and the
//! lattice decision survives the synthesis round trip.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;


use crate::audio::{analyze_rect, set_hermitian, synthesize_rect, AudioBuffer};
use crate::codec::{CodecConfig, DetectionResult, WatermarkPayload};
use crate::error::Result;

const BLOCK: usize = 32;
/// Keeps the quantized leading value strictly above the runner-up so
/// detection re-identifies the same component.
const SEPARATION_GUARD: f64 = 0.25;

fn grid(len: usize, config: &CodecConfig) -> (usize, usize) {
    let rows = config.frame / 2; // bins 1..=frame/2
    let frames = len / config.frame;
    (rows / BLOCK, frames / BLOCK)
}

pub(super) fn capacity(len: usize, config: &CodecConfig) -> usize {
    let (row_blocks, col_blocks) = grid(len, config);
    row_blocks * col_blocks
}

/// Largest singular value, its vectors, and the runner-up value.
fn leading_svd(block: &DMatrix<f64>) -> (f64, Vec<f64>, Vec<f64>, f64) {
    let svd = block.clone().svd(true, true);
    let sv = &svd.singular_values;
    let mut imax = 0;
    for i in 1..sv.len() {
        if sv[i] > sv[imax] {
            imax = i;
        }
    }
    let sigma1 = sv[imax];
    let mut sigma2 = 0.0;
    for i in 0..sv.len() {
        if i != imax && sv[i] > sigma2 {
            sigma2 = sv[i];
        }
    }
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let u1: Vec<f64> = (0..BLOCK).map(|i| u[(i, imax)]).collect();
    let v1: Vec<f64> = (0..BLOCK).map(|j| vt[(imax, j)]).collect();
    (sigma1, u1, v1, sigma2)
}

/// Nearest lattice point of parity `bit` that stays above the runner-up.
fn quantize(sigma1: f64, sigma2: f64, bit: u8, step: f64) -> f64 {
    let b = bit as f64;
    let nearest = ((sigma1 / step - b) / 2.0).round().max(0.0);
    let floor_val = sigma2 + SEPARATION_GUARD * step;
    let min_k = ((floor_val / step - b) / 2.0).ceil().max(0.0);
    step * (2.0 * nearest.max(min_k) + b)
}

pub(super) fn embed(
    audio: &AudioBuffer,
    payload: &WatermarkPayload,
    config: &CodecConfig,
) -> Result<AudioBuffer> {
    let frame = config.frame;
    let mut frames = analyze_rect(&audio.samples, frame);
    let (row_blocks, _) = grid(audio.len(), config);

    for (idx, &bit) in payload.bits.iter().enumerate() {
        let bc = idx / row_blocks;
        let br = idx % row_blocks;
        let bin0 = 1 + br * BLOCK;
        let t0 = bc * BLOCK;

        let block = DMatrix::from_fn(BLOCK, BLOCK, |i, j| frames[t0 + j][bin0 + i].norm());
        let (sigma1, u1, v1, sigma2) = leading_svd(&block);
        let target = quantize(sigma1, sigma2, bit, config.strength);

        if sigma1 < 1e-12 {
            // degenerate block: write a flat rank-1 component with the
            // target leading value
            let amp = target / BLOCK as f64;
            for j in 0..BLOCK {
                for i in 0..BLOCK {
                    set_hermitian(&mut frames[t0 + j], bin0 + i, Complex::new(amp, 0.0));
                }
            }
            continue;
        }

        let delta = target - sigma1;
        for j in 0..BLOCK {
            for i in 0..BLOCK {
                let magnitude = (block[(i, j)] + delta * u1[i] * v1[j]).max(0.0);
                let phase = frames[t0 + j][bin0 + i].arg();
                set_hermitian(&mut frames[t0 + j], bin0 + i, Complex::from_polar(magnitude, phase));
            }
        }
    }

    Ok(synthesize_rect(&frames, audio))
}

pub(super) fn detect(
    audio: &AudioBuffer,
    payload_length: usize,
    config: &CodecConfig,
) -> Result<DetectionResult> {
    let frame = config.frame;
    let frames = analyze_rect(&audio.samples, frame);
    let (row_blocks, _) = grid(audio.len(), config);

    let mut bits = Vec::with_capacity(payload_length);
    let mut confidence = Vec::with_capacity(payload_length);
    for idx in 0..payload_length {
        let bc = idx / row_blocks;
        let br = idx % row_blocks;
        let bin0 = 1 + br * BLOCK;
        let t0 = bc * BLOCK;
        let block = DMatrix::from_fn(BLOCK, BLOCK, |i, j| frames[t0 + j][bin0 + i].norm());
        let sv = block.singular_values();
        let sigma1 = sv.iter().fold(0.0f64, |a, &b| a.max(b));
        let u = sigma1 / config.strength;
        let nearest = u.round();
        bits.push((nearest as i64 & 1) as u8);
        // 2 * distance from the cell midpoint, in [0, 1]
        confidence.push(2.0 * (0.5 - (u - nearest).abs()).max(0.0));
    }
    Ok(DetectionResult { bits, confidence })
}
