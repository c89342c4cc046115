//! Mix-plan construction and the line-oriented plan file format.
//!
//! Assignment is a pure function of (sorted records, ratio, seed, roster):
//! records are stratified by label so each class is watermarked at the
//! requested ratio (within one sample), the watermarked set is split
//! between the two groups up to parity, and per-codec counts inside each
//! group differ by at most one, remainders placed by seeded shuffle.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codec::CodecConfig;
use crate::corpus::{Assignment, CodecGroup, GroupMember, GroupRoster, Label, MixPlan, UtteranceRecord};
use crate::error::{Error, Result};

/// round-half-up for non-negative quantities
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

pub fn build_mix_plan(
    records: &[UtteranceRecord],
    ratio: f64,
    seed: u64,
    roster: &GroupRoster,
) -> Result<MixPlan> {
    if records.is_empty() {
        return Err(Error::Validation("empty manifest".into()));
    }
    if !(0.0..=1.0).contains(&ratio) || !ratio.is_finite() {
        return Err(Error::Validation(format!("ratio {ratio} outside [0, 1]")));
    }
    roster.validate()?;

    let mut sorted: Vec<&UtteranceRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    {
        let mut ids: Vec<&str> = sorted.iter().map(|r| r.utt_id.as_str()).collect();
        ids.dedup();
        if ids.len() != sorted.len() {
            return Err(Error::Validation("duplicate utt_id in records".into()));
        }
    }

    let n = sorted.len();
    let total_target = round_half_up(ratio * n as f64);

    // per-class watermark counts: round per class, then repair the +/-1
    // rounding drift against the exact total without leaving any class
    // more than one sample from its proportional share
    let classes = [Label::Bonafide, Label::Spoof];
    let mut class_counts: BTreeMap<Label, (usize, usize)> = BTreeMap::new(); // label -> (N_c, W_c)
    for &label in &classes {
        let n_c = sorted.iter().filter(|r| r.label == label).count();
        if n_c > 0 {
            class_counts.insert(label, (n_c, round_half_up(ratio * n_c as f64)));
        }
    }
    let mut assigned_total: i64 = class_counts.values().map(|(_, w)| *w as i64).sum();
    while assigned_total != total_target as i64 {
        let need_more = assigned_total < total_target as i64;
        // adjust the class with the largest deficit (or surplus) relative
        // to its exact proportional share
        let chosen = class_counts
            .iter()
            .filter(|(_, (n_c, w_c))| if need_more { w_c < n_c } else { *w_c > 0 })
            .min_by(|(_, (na, wa)), (_, (nb, wb))| {
                let da = *wa as f64 - ratio * *na as f64;
                let db = *wb as f64 - ratio * *nb as f64;
                let key_a = if need_more { da } else { -da };
                let key_b = if need_more { db } else { -db };
                key_a.partial_cmp(&key_b).unwrap()
            })
            .map(|(l, _)| *l)
            .ok_or_else(|| Error::Validation("cannot satisfy ratio".into()))?;
        let entry = class_counts.get_mut(&chosen).unwrap();
        entry.1 = if need_more { entry.1 + 1 } else { entry.1 - 1 };
        assigned_total += if need_more { 1 } else { -1 };
    }

    // pick watermarked utterances per class by seeded shuffle
    let mut watermarked: Vec<&UtteranceRecord> = Vec::with_capacity(total_target);
    for (&label, &(_, w_c)) in &class_counts {
        let mut class_records: Vec<&UtteranceRecord> =
            sorted.iter().copied().filter(|r| r.label == label).collect();
        let mut rng =
            crate::rng::rng_from_parts("plan-class", &[&seed.to_le_bytes(), label.as_str().as_bytes()]);
        class_records.shuffle(&mut rng);
        watermarked.extend(class_records.into_iter().take(w_c));
    }

    // split between the two groups up to parity; a seeded coin decides the
    // odd one out
    let mut order_rng = crate::rng::rng_from_parts("plan-group", &[&seed.to_le_bytes()]);
    watermarked.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    watermarked.shuffle(&mut order_rng);
    let w = watermarked.len();
    let extra_to_first: bool = order_rng.random();
    let g0 = if w % 2 == 1 && extra_to_first { w / 2 + 1 } else { w / 2 };

    // per-member quotas inside each group: base count plus seeded-shuffle
    // placement of the remainder
    let mut quotas: [Vec<(String, usize)>; 2] = [Vec::new(), Vec::new()];
    for (gi, group) in roster.groups.iter().enumerate() {
        let group_total = if gi == 0 { g0 } else { w - g0 };
        let m = group.members.len();
        let base = group_total / m;
        let rem = group_total % m;
        let mut member_order: Vec<usize> = (0..m).collect();
        let mut rng = crate::rng::rng_from_parts(
            "plan-codec",
            &[&seed.to_le_bytes(), &(gi as u64).to_le_bytes()],
        );
        member_order.shuffle(&mut rng);
        let mut counts = vec![base; m];
        for &mi in member_order.iter().take(rem) {
            counts[mi] += 1;
        }
        quotas[gi] = group
            .members
            .iter()
            .zip(counts)
            .map(|(member, c)| (member.name().to_string(), c))
            .collect();
    }

    // deal the shuffled watermarked list into the quotas
    let mut assignments: BTreeMap<String, (Label, Assignment)> = sorted
        .iter()
        .map(|r| (r.utt_id.clone(), (r.label, Assignment::Clean)))
        .collect();
    let mut cursor = watermarked.iter();
    for (gi, group_quotas) in quotas.iter().enumerate() {
        for (member, count) in group_quotas {
            for _ in 0..*count {
                let rec = cursor.next().expect("quota sums to watermark count");
                assignments.insert(
                    rec.utt_id.clone(),
                    (
                        rec.label,
                        Assignment::Watermark {
                            group: gi,
                            member: member.clone(),
                        },
                    ),
                );
            }
        }
    }

    let plan = MixPlan {
        ratio,
        seed,
        roster: roster.clone(),
        assignments,
    };
    plan.validate()?;
    Ok(plan)
}

const PLAN_HEADER: &str = "WMPLAN v1";

/// Writes the plan as line-oriented text: header, roster, then one
/// assignment per line.
pub fn serialize_plan(plan: &MixPlan, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(PLAN_HEADER);
    out.push('\n');
    out.push_str(&format!("ratio\t{}\n", plan.ratio));
    out.push_str(&format!("seed\t{}\n", plan.seed));
    for (gi, group) in plan.roster.groups.iter().enumerate() {
        out.push_str(&format!("group\t{gi}\t{}\n", group.name));
        for member in &group.members {
            match member {
                GroupMember::Builtin(cfg) => {
                    out.push_str(&format!("member\t{gi}\tbuiltin\t{}\n", cfg.to_kv()))
                }
                GroupMember::External(slot) => {
                    out.push_str(&format!("member\t{gi}\texternal\t{slot}\n"))
                }
            }
        }
    }
    for (utt_id, (label, assignment)) in &plan.assignments {
        match assignment {
            Assignment::Clean => {
                out.push_str(&format!("assign\t{utt_id}\t{}\tclean\n", label.as_str()))
            }
            Assignment::Watermark { group, member } => out.push_str(&format!(
                "assign\t{utt_id}\t{}\twm\t{group}\t{member}\n",
                label.as_str()
            )),
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Loads and re-validates a serialized plan; any invariant broken by hand
/// edits surfaces as a validation error.
pub fn load_plan(path: impl AsRef<Path>) -> Result<MixPlan> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_plan_str(&text)
}

pub(crate) fn load_plan_str(text: &str) -> Result<MixPlan> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };

    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty plan file".into()))?;
    if first != PLAN_HEADER {
        return Err(parse_err(first_no, format!("expected header '{PLAN_HEADER}'")));
    }

    let mut ratio: Option<f64> = None;
    let mut seed: Option<u64> = None;
    let mut groups: Vec<CodecGroup> = Vec::new();
    let mut assignments: BTreeMap<String, (Label, Assignment)> = BTreeMap::new();

    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        match cols[0] {
            "ratio" if cols.len() == 2 => {
                ratio = Some(
                    cols[1]
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad ratio '{}'", cols[1])))?,
                )
            }
            "seed" if cols.len() == 2 => {
                seed = Some(
                    cols[1]
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad seed '{}'", cols[1])))?,
                )
            }
            "group" if cols.len() == 3 => {
                let gi: usize = cols[1]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad group index '{}'", cols[1])))?;
                if gi != groups.len() {
                    return Err(parse_err(lineno, format!("group {gi} out of order")));
                }
                groups.push(CodecGroup {
                    name: cols[2].to_string(),
                    members: Vec::new(),
                });
            }
            "member" if cols.len() == 4 => {
                let gi: usize = cols[1]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad group index '{}'", cols[1])))?;
                let group = groups
                    .get_mut(gi)
                    .ok_or_else(|| parse_err(lineno, format!("member before group {gi}")))?;
                match cols[2] {
                    "builtin" => group.members.push(GroupMember::Builtin(
                        CodecConfig::from_kv(cols[3])
                            .map_err(|e| parse_err(lineno, e.to_string()))?,
                    )),
                    "external" => group.members.push(GroupMember::External(cols[3].to_string())),
                    other => return Err(parse_err(lineno, format!("unknown member kind '{other}'"))),
                }
            }
            "assign" if cols.len() == 4 || cols.len() == 6 => {
                let utt_id = cols[1].to_string();
                let label = Label::parse(cols[2]).map_err(|e| parse_err(lineno, e.to_string()))?;
                let assignment = match cols[3] {
                    "clean" if cols.len() == 4 => Assignment::Clean,
                    "wm" if cols.len() == 6 => Assignment::Watermark {
                        group: cols[4]
                            .parse()
                            .map_err(|_| parse_err(lineno, format!("bad group '{}'", cols[4])))?,
                        member: cols[5].to_string(),
                    },
                    _ => return Err(parse_err(lineno, format!("malformed assignment '{line}'"))),
                };
                if assignments.insert(utt_id.clone(), (label, assignment)).is_some() {
                    return Err(parse_err(lineno, format!("duplicate assignment for '{utt_id}'")));
                }
            }
            _ => return Err(parse_err(lineno, format!("unrecognized line '{line}'"))),
        }
    }

    let ratio = ratio.ok_or_else(|| Error::Validation("plan missing ratio".into()))?;
    let seed = seed.ok_or_else(|| Error::Validation("plan missing seed".into()))?;
    if groups.len() != 2 {
        return Err(Error::Validation(format!(
            "plan must define exactly 2 groups, found {}",
            groups.len()
        )));
    }
    let plan = MixPlan {
        ratio,
        seed,
        roster: GroupRoster {
            groups: [groups.remove(0), groups.remove(0)],
        },
        assignments,
    };
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(n_spoof: usize, n_bona: usize) -> Vec<UtteranceRecord> {
        let mut out = Vec::new();
        for i in 0..n_spoof {
            out.push(UtteranceRecord {
                utt_id: format!("s{i:05}"),
                path: format!("s{i:05}.wav"),
                label: Label::Spoof,
            });
        }
        for i in 0..n_bona {
            out.push(UtteranceRecord {
                utt_id: format!("b{i:05}"),
                path: format!("b{i:05}.wav"),
                label: Label::Bonafide,
            });
        }
        out
    }

    #[test]
    fn spec_counts_at_half_ratio() {
        let recs = records(600, 400);
        let roster = GroupRoster::handcrafted_split(1);
        let plan = build_mix_plan(&recs, 0.5, 7, &roster).unwrap();
        assert_eq!(plan.watermarked_count(), 500);
        let spoof_wm = plan
            .assignments
            .values()
            .filter(|(l, a)| *l == Label::Spoof && matches!(a, Assignment::Watermark { .. }))
            .count();
        assert_eq!(spoof_wm, 300);
        let groups = plan.group_counts();
        assert_eq!(groups, [250, 250]);
        for members in plan.member_counts() {
            for (_, c) in members {
                assert!(c == 41 || c == 42, "per-codec count {c}");
            }
        }
    }

    #[test]
    fn zero_ratio_is_all_clean() {
        let recs = records(10, 10);
        let roster = GroupRoster::handcrafted_split(1);
        let plan = build_mix_plan(&recs, 0.0, 3, &roster).unwrap();
        assert_eq!(plan.watermarked_count(), 0);
    }

    #[test]
    fn full_ratio_on_odd_count() {
        let recs = records(4, 3);
        let roster = GroupRoster::handcrafted_split(1);
        let plan = build_mix_plan(&recs, 1.0, 11, &roster).unwrap();
        assert_eq!(plan.watermarked_count(), 7);
        let groups = plan.group_counts();
        assert!(groups == [4, 3] || groups == [3, 4], "{groups:?}");
        plan.validate().unwrap();
    }

    #[test]
    fn deterministic_under_identical_inputs() {
        let recs = records(50, 30);
        let roster = GroupRoster::handcrafted_split(5);
        let a = build_mix_plan(&recs, 0.4, 9, &roster).unwrap();
        let b = build_mix_plan(&recs, 0.4, 9, &roster).unwrap();
        assert_eq!(a, b);
        let c = build_mix_plan(&recs, 0.4, 10, &roster).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn serialize_round_trip() {
        let recs = records(30, 20);
        let roster = GroupRoster::with_external_slots(2, &["wm_ext_a".into(), "wm_ext_b".into()]).unwrap();
        let plan = build_mix_plan(&recs, 0.75, 13, &roster).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plan.tsv");
        serialize_plan(&plan, &p).unwrap();
        let back = load_plan(&p).unwrap();
        assert_eq!(plan, back);
    }

    #[test]
    fn hand_edited_ratio_fails_validation_on_load() {
        let recs = records(10, 10);
        let roster = GroupRoster::handcrafted_split(1);
        let plan = build_mix_plan(&recs, 0.5, 3, &roster).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plan.tsv");
        serialize_plan(&plan, &p).unwrap();
        let edited = std::fs::read_to_string(&p).unwrap().replace("ratio\t0.5", "ratio\t0.25");
        std::fs::write(&p, edited).unwrap();
        assert!(matches!(load_plan(&p), Err(Error::Validation(_))));
    }

    #[test]
    fn empty_plan_with_zero_ratio_loads() {
        let roster = GroupRoster::handcrafted_split(1);
        let text = format!(
            "WMPLAN v1\nratio\t0\nseed\t1\ngroup\t0\t{}\nmember\t0\tbuiltin\t{}\ngroup\t1\t{}\nmember\t1\tbuiltin\t{}\n",
            "a",
            CodecConfig::default_for(crate::codec::Scheme::Lsb).to_kv(),
            "b",
            CodecConfig::default_for(crate::codec::Scheme::Dsss).to_kv(),
        );
        let _ = roster;
        let plan = load_plan_str(&text).unwrap();
        assert_eq!(plan.assignments.len(), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "WMPLAN v1\nratio\t0.5\nseed\t1\nbogus line\n";
        match load_plan_str(text) {
            Err(Error::Parse { line: 4, .. }) => {}
            other => panic!("expected parse error at line 4, got {other:?}"),
        }
    }
}
