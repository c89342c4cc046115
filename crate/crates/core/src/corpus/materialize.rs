//! Materializes a mix plan: reads each record's audio, resamples to the
//! target rate, embeds its assigned watermark (payload seeded from the plan
//! seed and utterance id), and writes 16-bit PCM under the output root
//! mirroring the manifest paths. Clean records go through the identical
//! read/resample/write chain so re-encoding artifacts cannot act as a
//! class proxy.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::audio::{read_wav, resample, segmental_snr, write_wav, TARGET_SAMPLE_RATE};
use crate::codec::{self, WatermarkPayload};
use crate::corpus::{Assignment, GroupMember, MixPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MaterializeOptions {
    /// Bits drawn per watermarked record, seeded by (plan.seed, utt_id).
    pub payload_bits: usize,
    /// Root holding pre-watermarked files for external slots, laid out as
    /// `<external_root>/<slot>/<record path>`.
    pub external_root: Option<PathBuf>,
    /// Worker threads; 0 means the rayon default.
    pub jobs: usize,
}

impl Default for MaterializeOptions {
    fn default() -> Self {
        MaterializeOptions {
            payload_bits: 16,
            external_root: None,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MaterializeReport {
    /// Successfully written watermarked records per member name.
    pub per_member_counts: BTreeMap<String, usize>,
    /// Mean segmental SNR of watermarked vs clean-resampled, per member.
    pub mean_snr_db: BTreeMap<String, f64>,
    pub clean_count: usize,
    pub failures: Vec<(String, String)>,
}

impl MaterializeReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("kind\tname\tcount\tmean_snr_db\n");
        for (name, count) in &self.per_member_counts {
            let snr = self
                .mean_snr_db
                .get(name)
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!("codec\t{name}\t{count}\t{snr}\n"));
        }
        out.push_str(&format!("clean\t-\t{}\t-\n", self.clean_count));
        for (utt, msg) in &self.failures {
            out.push_str(&format!("failure\t{utt}\t-\t{}\n", msg.replace(['\t', '\n'], " ")));
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_tsv().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

enum RecordOutcome {
    Clean,
    Watermarked { member: String, snr_db: f64 },
    Failed(String),
}

fn payload_for(seed: u64, utt_id: &str, bits: usize) -> WatermarkPayload {
    let mut rng = crate::rng::rng_from_parts("payload", &[&seed.to_le_bytes(), utt_id.as_bytes()]);
    WatermarkPayload::random(&mut rng, bits)
}

fn process_record(
    plan: &MixPlan,
    opts: &MaterializeOptions,
    audio_root: &Path,
    out_root: &Path,
    utt_id: &str,
    rel_path: &str,
    assignment: &Assignment,
) -> Result<RecordOutcome> {
    let member = match assignment {
        Assignment::Clean => None,
        Assignment::Watermark { group, member } => Some(
            plan.roster
                .member(*group, member)
                .ok_or_else(|| Error::Validation(format!("unknown member {member}")))?,
        ),
    };

    // external slots supply their own (pre-watermarked) source audio
    let src = match member {
        Some(GroupMember::External(slot)) => {
            let root = opts.external_root.as_ref().ok_or_else(|| {
                Error::Validation(format!("external slot '{slot}' needs --external-root"))
            })?;
            root.join(slot).join(rel_path)
        }
        _ => audio_root.join(rel_path),
    };

    let raw = read_wav(&src)?;
    let clean = resample(&raw, TARGET_SAMPLE_RATE)?;

    let (output, outcome) = match member {
        None => (clean.clone(), RecordOutcome::Clean),
        Some(GroupMember::External(slot)) => (
            clean.clone(),
            RecordOutcome::Watermarked {
                member: slot.clone(),
                snr_db: f64::NAN, // no clean reference for external audio
            },
        ),
        Some(GroupMember::Builtin(cfg)) => {
            let payload = payload_for(plan.seed, utt_id, opts.payload_bits);
            let marked = codec::embed(&clean, &payload, cfg)?;
            let snr_db = segmental_snr(&clean, &marked)?;
            (
                marked,
                RecordOutcome::Watermarked {
                    member: cfg.scheme.name().to_string(),
                    snr_db,
                },
            )
        }
    };

    let dest = out_root.join(rel_path);
    if let Some(parent) = dest.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_wav(&output, &dest)?;
    Ok(outcome)
}

/// Runs the plan against `audio_root`, writing under `out_root`. Per-record
/// failures (missing audio, capacity) are collected in the report; the run
/// continues. Results are aggregated in utterance order so the report is
/// byte-identical regardless of parallelism.
pub fn materialize(
    plan: &MixPlan,
    audio_root: impl AsRef<Path>,
    out_root: impl AsRef<Path>,
    opts: &MaterializeOptions,
) -> Result<MaterializeReport> {
    plan.validate()?;
    let audio_root = audio_root.as_ref();
    let out_root = out_root.as_ref();

    let records: Vec<(&String, &crate::corpus::Label, &Assignment)> = plan
        .assignments
        .iter()
        .map(|(id, (label, a))| (id, label, a))
        .collect();

    let run = |records: &[(&String, &crate::corpus::Label, &Assignment)]| -> Vec<(String, RecordOutcome)> {
        records
            .par_iter()
            .map(|(utt_id, _, assignment)| {
                let rel_path = plan
                    .assignments
                    .get_key_value(*utt_id)
                    .map(|_| ())
                    .and(Some(()));
                let _ = rel_path;
                let path = record_path(plan, utt_id);
                let outcome = match path {
                    Some(p) => process_record(plan, opts, audio_root, out_root, utt_id, &p, assignment)
                        .unwrap_or_else(|e| RecordOutcome::Failed(e.to_string())),
                    None => RecordOutcome::Failed("record path unknown".into()),
                };
                ((*utt_id).clone(), outcome)
            })
            .collect()
    };

    let mut results: Vec<(String, RecordOutcome)> = if opts.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
        pool.install(|| run(&records))
    } else {
        run(&records)
    };
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut report = MaterializeReport::default();
    let mut snr_sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (utt_id, outcome) in results {
        match outcome {
            RecordOutcome::Clean => report.clean_count += 1,
            RecordOutcome::Watermarked { member, snr_db } => {
                *report.per_member_counts.entry(member.clone()).or_insert(0) += 1;
                if snr_db.is_finite() {
                    let entry = snr_sums.entry(member).or_insert((0.0, 0));
                    entry.0 += snr_db;
                    entry.1 += 1;
                }
            }
            RecordOutcome::Failed(msg) => report.failures.push((utt_id, msg)),
        }
    }
    for (member, (sum, count)) in snr_sums {
        report.mean_snr_db.insert(member, sum / count as f64);
    }
    Ok(report)
}

/// The manifest-relative audio path for one record. Paths are not stored in
/// the plan itself; they are carried alongside assignments.
fn record_path(plan: &MixPlan, utt_id: &str) -> Option<String> {
    plan.paths.get(utt_id).cloned()
}
