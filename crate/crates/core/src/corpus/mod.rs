//! Deterministic construction of ratio-controlled watermarked corpus
//! variants: manifest parsing, mix-plan assignment under the balance
//! constraints, plan serialization, and materialization to disk.

mod manifest;
mod materialize;
mod plan;

pub use manifest::{parse_manifest, ManifestFormat};
pub use materialize::{materialize, MaterializeOptions, MaterializeReport};
pub use plan::{build_mix_plan, load_plan, serialize_plan};

use std::collections::BTreeMap;

use crate::codec::{CodecConfig, Scheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Bonafide,
    Spoof,
}

impl Label {
    pub fn parse(s: &str) -> Result<Label> {
        match s {
            "bonafide" => Ok(Label::Bonafide),
            "spoof" => Ok(Label::Spoof),
            other => Err(Error::Validation(format!(
                "unknown label '{other}' (expected 'bonafide' or 'spoof')"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtteranceRecord {
    pub utt_id: String,
    pub path: String,
    pub label: Label,
}

/// One watermarking slot in a group: either a built-in codec or a named
/// slot resolved to user-supplied pre-watermarked audio.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupMember {
    Builtin(CodecConfig),
    External(String),
}

impl GroupMember {
    pub fn name(&self) -> &str {
        match self {
            GroupMember::Builtin(cfg) => cfg.scheme.name(),
            GroupMember::External(slot) => slot,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecGroup {
    pub name: String,
    pub members: Vec<GroupMember>,
}

/// Two named codec groups whose watermarked counts stay within one of each
/// other, mirroring the strict 1:1 group balance of the corpus protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRoster {
    pub groups: [CodecGroup; 2],
}

impl GroupRoster {
    /// All six built-in schemes split into two groups of three. The default
    /// roster when no external watermarkers are supplied.
    pub fn handcrafted_split(key: u64) -> Self {
        let member = |s: Scheme| GroupMember::Builtin(CodecConfig::default_for(s).with_key(key));
        GroupRoster {
            groups: [
                CodecGroup {
                    name: "group-a".into(),
                    members: vec![
                        member(Scheme::Lsb),
                        member(Scheme::Phase),
                        member(Scheme::Dsss),
                    ],
                },
                CodecGroup {
                    name: "group-b".into(),
                    members: vec![
                        member(Scheme::SvdQim),
                        member(Scheme::Patchwork),
                        member(Scheme::NormSpace),
                    ],
                },
            ],
        }
    }

    /// All six built-in schemes as one group, external slots as the other.
    pub fn with_external_slots(key: u64, slots: &[String]) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Validation("external slot list is empty".into()));
        }
        let handcrafted = Scheme::ALL
            .iter()
            .map(|&s| GroupMember::Builtin(CodecConfig::default_for(s).with_key(key)))
            .collect();
        Ok(GroupRoster {
            groups: [
                CodecGroup {
                    name: "handcrafted".into(),
                    members: handcrafted,
                },
                CodecGroup {
                    name: "external".into(),
                    members: slots.iter().map(|s| GroupMember::External(s.clone())).collect(),
                },
            ],
        })
    }

    pub fn validate(&self) -> Result<()> {
        for group in &self.groups {
            if group.members.is_empty() {
                return Err(Error::Validation(format!("group '{}' has no members", group.name)));
            }
            let mut names: Vec<&str> = group.members.iter().map(|m| m.name()).collect();
            names.sort_unstable();
            names.dedup();
            if names.len() != group.members.len() {
                return Err(Error::Validation(format!(
                    "group '{}' has duplicate member names",
                    group.name
                )));
            }
            for member in &group.members {
                if let GroupMember::Builtin(cfg) = member {
                    cfg.validate()?;
                }
            }
        }
        if self.groups[0].name == self.groups[1].name {
            return Err(Error::Validation("group names must differ".into()));
        }
        Ok(())
    }

    pub fn member(&self, group: usize, name: &str) -> Option<&GroupMember> {
        self.groups
            .get(group)?
            .members
            .iter()
            .find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assignment {
    Clean,
    /// Watermark with the named member of the given group.
    Watermark { group: usize, member: String },
}

/// One record's slot in a plan. Carrying the audio path and label makes a
/// serialized plan replayable without the original manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub path: String,
    pub label: Label,
    pub assignment: Assignment,
}

/// Deterministic codec-or-clean assignment for every record of a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct MixPlan {
    pub ratio: f64,
    pub seed: u64,
    pub roster: GroupRoster,
    /// utt_id -> entry; BTreeMap keeps iteration order stable.
    pub assignments: BTreeMap<String, PlanEntry>,
}

impl MixPlan {
    pub fn watermarked_count(&self) -> usize {
        self.assignments
            .values()
            .filter(|e| matches!(e.assignment, Assignment::Watermark { .. }))
            .count()
    }

    pub fn group_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for entry in self.assignments.values() {
            if let Assignment::Watermark { group, .. } = &entry.assignment {
                counts[*group] += 1;
            }
        }
        counts
    }

    /// Watermarked count per member name, per group.
    pub fn member_counts(&self) -> [BTreeMap<String, usize>; 2] {
        let mut counts: [BTreeMap<String, usize>; 2] = [
            self.roster.groups[0].members.iter().map(|m| (m.name().to_string(), 0)).collect(),
            self.roster.groups[1].members.iter().map(|m| (m.name().to_string(), 0)).collect(),
        ];
        for entry in self.assignments.values() {
            if let Assignment::Watermark { group, member } = &entry.assignment {
                *counts[*group].entry(member.clone()).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Re-checks every structural invariant; used both after construction
    /// and when loading a serialized plan.
    pub fn validate(&self) -> Result<()> {
        self.roster.validate()?;
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::Validation(format!("ratio {} outside [0, 1]", self.ratio)));
        }
        let n = self.assignments.len();
        let expected = plan::round_half_up(self.ratio * n as f64);
        let watermarked = self.watermarked_count();
        if watermarked != expected {
            return Err(Error::Validation(format!(
                "watermarked count {watermarked} inconsistent with ratio {} of {n} (expected {expected})",
                self.ratio
            )));
        }

        let groups = self.group_counts();
        if groups[0].abs_diff(groups[1]) > 1 {
            return Err(Error::Validation(format!(
                "group counts {groups:?} differ by more than 1"
            )));
        }

        for (gi, members) in self.member_counts().iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let min = members.values().min().copied().unwrap_or(0);
            let max = members.values().max().copied().unwrap_or(0);
            if max - min > 1 {
                return Err(Error::Validation(format!(
                    "per-codec counts in group {gi} differ by more than 1: {members:?}"
                )));
            }
        }

        for label in [Label::Bonafide, Label::Spoof] {
            let class_n = self
                .assignments
                .values()
                .filter(|e| e.label == label)
                .count();
            if class_n == 0 {
                continue;
            }
            let class_wm = self
                .assignments
                .values()
                .filter(|e| e.label == label && matches!(e.assignment, Assignment::Watermark { .. }))
                .count();
            let target = self.ratio * class_n as f64;
            if (class_wm as f64 - target).abs() > 1.0 + 1e-9 {
                return Err(Error::Validation(format!(
                    "label {}: watermarked {class_wm} of {class_n} deviates from ratio {} by more than 1 sample",
                    label.as_str(),
                    self.ratio
                )));
            }
        }

        // every assignment must reference an existing roster member
        for (utt, entry) in &self.assignments {
            if let Assignment::Watermark { group, member } = &entry.assignment {
                if *group > 1 || self.roster.member(*group, member).is_none() {
                    return Err(Error::Validation(format!(
                        "{utt}: unknown group/member {group}/{member}"
                    )));
                }
            }
        }
        Ok(())
    }
}
