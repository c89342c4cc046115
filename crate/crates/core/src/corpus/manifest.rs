//! Dataset manifest parsing: a native three-column TSV plus an adapter for
//! five-column ASVspoof-style countermeasure protocol lines.

use std::collections::HashSet;
use std::path::Path;

use crate::corpus::{Label, UtteranceRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifestFormat {
    /// `utt_id<TAB>path<TAB>label`
    NativeTsv,
    /// Whitespace-separated five-column protocol lines; utt_id in column 2,
    /// label in column 5. The audio path is derived as `<utt_id>.wav`.
    AsvspoofCm,
}

impl ManifestFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "native_tsv" => Ok(ManifestFormat::NativeTsv),
            "asvspoof_cm" => Ok(ManifestFormat::AsvspoofCm),
            other => Err(Error::Validation(format!("unknown manifest format '{other}'"))),
        }
    }
}

pub fn parse_manifest(path: impl AsRef<Path>, format: ManifestFormat) -> Result<Vec<UtteranceRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest_str(&text, format)
}

pub(crate) fn parse_manifest_str(text: &str, format: ManifestFormat) -> Result<Vec<UtteranceRecord>> {
    let mut records = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_number = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            ManifestFormat::NativeTsv => {
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() != 3 {
                    return Err(Error::Parse {
                        line: line_number,
                        msg: format!("expected 3 tab-separated columns, found {}", cols.len()),
                    });
                }
                UtteranceRecord {
                    utt_id: cols[0].to_string(),
                    path: cols[1].to_string(),
                    label: Label::parse(cols[2])?,
                }
            }
            ManifestFormat::AsvspoofCm => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols.len() != 5 {
                    return Err(Error::Parse {
                        line: line_number,
                        msg: format!("expected 5 whitespace-separated columns, found {}", cols.len()),
                    });
                }
                UtteranceRecord {
                    utt_id: cols[1].to_string(),
                    path: format!("{}.wav", cols[1]),
                    label: Label::parse(cols[4])?,
                }
            }
        };
        if !seen.insert(record.utt_id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate utt_id '{}' at line {line_number}",
                record.utt_id
            )));
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn native_line_parses() {
        let recs = parse_manifest_str("u1\ta/u1.wav\tbonafide\n", ManifestFormat::NativeTsv).unwrap();
        assert_eq!(
            recs,
            vec![UtteranceRecord {
                utt_id: "u1".into(),
                path: "a/u1.wav".into(),
                label: Label::Bonafide,
            }]
        );
    }

    #[test]
    fn duplicate_id_rejected_with_id_in_message() {
        let err = parse_manifest_str(
            "u1\ta.wav\tbonafide\nu1\tb.wav\tspoof\n",
            ManifestFormat::NativeTsv,
        )
        .unwrap_err();
        assert!(err.to_string().contains("u1"), "{err}");
    }

    #[test]
    fn unknown_label_rejected() {
        let err =
            parse_manifest_str("u1\ta.wav\tgenuine\n", ManifestFormat::NativeTsv).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn asvspoof_adapter_reads_columns_two_and_five() {
        let text = "LA_0069 LA_D_1047731 - - bonafide\nLA_0070 LA_D_1105538 - A07 spoof\n";
        let recs = parse_manifest_str(text, ManifestFormat::AsvspoofCm).unwrap();
        assert_eq!(recs[0].utt_id, "LA_D_1047731");
        assert_eq!(recs[0].path, "LA_D_1047731.wav");
        assert_eq!(recs[0].label, Label::Bonafide);
        assert_eq!(recs[1].label, Label::Spoof);
    }

    #[test]
    fn column_count_errors_carry_line_numbers() {
        let err = parse_manifest_str("u1\ta.wav\tbonafide\nu2\tb.wav\n", ManifestFormat::NativeTsv)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
