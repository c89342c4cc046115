//! Segmental signal-to-noise ratio, the imperceptibility proxy used to
//! keep watermark strengths honest.

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub(crate) const SEGMENT_LEN: usize = 512;
pub(crate) const CLAMP_DB: (f64, f64) = (-10.0, 80.0);
const SILENCE_EPS: f64 = 1e-10;

/// Mean over non-silent segments of `10 log10(sum ref^2 / sum (ref-test)^2)`,
/// each segment value clamped to [-10, 80] dB. Segments whose reference
/// energy is below 1e-10 are skipped; if every segment is silent the metric
/// is undefined.
pub fn segmental_snr(reference: &AudioBuffer, test: &AudioBuffer) -> Result<f64> {
    if reference.len() != test.len() || reference.sample_rate != test.sample_rate {
        return Err(Error::InvalidInput(format!(
            "segmental_snr requires equal lengths and rates ({} @ {} vs {} @ {})",
            reference.len(),
            reference.sample_rate,
            test.len(),
            test.sample_rate
        )));
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for (r, t) in reference
        .samples
        .chunks(SEGMENT_LEN)
        .zip(test.samples.chunks(SEGMENT_LEN))
    {
        let ref_energy: f64 = r.iter().map(|x| x * x).sum();
        if ref_energy < SILENCE_EPS {
            continue;
        }
        let err_energy: f64 = r.iter().zip(t).map(|(x, y)| (x - y) * (x - y)).sum();
        let db = if err_energy == 0.0 {
            CLAMP_DB.1
        } else {
            (10.0 * (ref_energy / err_energy).log10()).clamp(CLAMP_DB.0, CLAMP_DB.1)
        };
        sum += db;
        count += 1;
    }

    if count == 0 {
        return Err(Error::UndefinedMetric(
            "no segment with reference energy above the silence threshold".into(),
        ));
    }
    Ok(sum / count as f64)
}
