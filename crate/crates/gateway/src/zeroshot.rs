//! Parsing zero-shot screening verdicts out of model completions.
//!
//! Long completions sometimes restate the instruction, so the class word is
//! taken from the token after the *last* `Output:` marker. Matching is
//! case-insensitive and trailing punctuation is stripped; anything that is
//! not one of the three class words is an error, never a silent negative.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use selfscreen_core::data::Label;

use crate::error::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParsedClass {
    Normal,
    Anxiety,
    Depression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotVerdict {
    pub raw_text: String,
    pub parsed: ParsedClass,
    pub label: Label,
}

const MARKER: &str = "output:";

pub fn parse_zeroshot_output(raw: &str) -> Result<ZeroShotVerdict, GatewayError> {
    // ASCII lowercasing keeps byte offsets valid in the original string.
    let lower = raw.to_ascii_lowercase();
    let pos = lower.rfind(MARKER).ok_or_else(|| GatewayError::UnparseableVerdict {
        raw: raw.to_string(),
    })?;
    let after = &raw[pos + MARKER.len()..];
    let token = after
        .split_whitespace()
        .next()
        .ok_or_else(|| GatewayError::UnparseableVerdict {
            raw: raw.to_string(),
        })?;
    let cleaned = token
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_ascii_lowercase();
    let parsed = match cleaned.as_str() {
        "normal" => ParsedClass::Normal,
        "anxiety" => ParsedClass::Anxiety,
        "depression" => ParsedClass::Depression,
        _ => {
            return Err(GatewayError::UnparseableVerdict {
                raw: raw.to_string(),
            })
        }
    };
    let label = match parsed {
        ParsedClass::Normal => Label::Negative,
        ParsedClass::Anxiety | ParsedClass::Depression => Label::Positive,
    };
    Ok(ZeroShotVerdict {
        raw_text: raw.to_string(),
        parsed,
        label,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub sample_id: String,
    pub raw_text: String,
    pub parsed: ParsedClass,
    pub label: Label,
}

pub fn save_verdicts(verdicts: &[VerdictRecord], path: &Path) -> Result<(), GatewayError> {
    let io_err = |source: std::io::Error| GatewayError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = File::create(path).map_err(io_err)?;
    for v in verdicts {
        writeln!(file, "{}", serde_json::to_string(v).expect("serialize")).map_err(io_err)?;
    }
    Ok(())
}

pub fn load_verdicts(path: &Path) -> Result<Vec<VerdictRecord>, GatewayError> {
    let file = File::open(path).map_err(|source| GatewayError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut verdicts = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| GatewayError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        verdicts.push(
            serde_json::from_str(&line).map_err(|e| GatewayError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn template_conforming_normal() {
        let verdict = parse_zeroshot_output("Output: normal").unwrap();
        assert_eq!(verdict.parsed, ParsedClass::Normal);
        assert_eq!(verdict.label, Label::Negative);
    }

    #[test]
    fn case_insensitive_with_preamble() {
        let verdict = parse_zeroshot_output("She seems tense. Output: Anxiety").unwrap();
        assert_eq!(verdict.parsed, ParsedClass::Anxiety);
        assert_eq!(verdict.label, Label::Positive);
    }

    #[test]
    fn last_marker_wins() {
        let raw = "Follow the template: Output: {result}. The analysis... Output: depression.";
        let verdict = parse_zeroshot_output(raw).unwrap();
        assert_eq!(verdict.parsed, ParsedClass::Depression);
        assert_eq!(verdict.label, Label::Positive);
    }

    #[test]
    fn missing_marker_is_unparseable() {
        let err = parse_zeroshot_output("The person looks fine.").unwrap_err();
        assert!(
            matches!(err, GatewayError::UnparseableVerdict { raw } if raw == "The person looks fine.")
        );
    }

    #[test]
    fn template_echo_is_unparseable() {
        assert!(parse_zeroshot_output("Output: {result}").is_err());
        assert!(parse_zeroshot_output("Output:").is_err());
        assert!(parse_zeroshot_output("Output: happy").is_err());
    }

    #[test]
    fn trailing_punctuation_is_stripped() {
        let verdict = parse_zeroshot_output("OUTPUT: Depression.").unwrap();
        assert_eq!(verdict.parsed, ParsedClass::Depression);
    }

    #[test]
    fn verdict_file_round_trip() {
        let verdicts = vec![VerdictRecord {
            sample_id: "s1".into(),
            raw_text: "Output: normal".into(),
            parsed: ParsedClass::Normal,
            label: Label::Negative,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.jsonl");
        save_verdicts(&verdicts, &path).unwrap();
        assert_eq!(load_verdicts(&path).unwrap(), verdicts);
    }

    fn mixed_case(word: &str, pattern: u32) -> String {
        word.chars()
            .enumerate()
            .map(|(i, c)| {
                if pattern >> (i % 32) & 1 == 1 {
                    c.to_ascii_uppercase()
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .collect()
    }

    proptest! {
        #[test]
        fn total_over_valid_class_words(
            class in 0usize..3,
            case_pattern in any::<u32>(),
            leading_ws in "[ \t]{0,4}",
            trailing_ws in "[ \t]{0,4}",
            preamble in "[A-Za-z .,]{0,40}",
        ) {
            let word = ["normal", "anxiety", "depression"][class];
            let cased = mixed_case(word, case_pattern);
            let marker = mixed_case("Output:", case_pattern.rotate_left(7));
            let raw = format!("{preamble}{marker}{leading_ws}{cased}{trailing_ws}");
            let verdict = parse_zeroshot_output(&raw).unwrap();
            let expected = [ParsedClass::Normal, ParsedClass::Anxiety, ParsedClass::Depression][class];
            prop_assert_eq!(verdict.parsed, expected);
            prop_assert_eq!(verdict.label.is_positive(), class != 0);
        }

        // Never a silent negative: non-matching strings always error.
        #[test]
        fn fuzz_non_matching_always_errors(raw in "[a-zA-Z0-9 .,!?]{0,80}") {
            prop_assume!(!raw.to_ascii_lowercase().contains("output:"));
            prop_assert!(parse_zeroshot_output(&raw).is_err());
        }
    }
}
