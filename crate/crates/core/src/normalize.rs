//! Character-level normalization: substitutions, byte order mark removal,
//! NFC composition and intra-line whitespace merging.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const BOM: char = '\u{feff}';

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub boms_removed: usize,
    pub chars_substituted: usize,
    pub whitespace_runs_merged: usize,
}

impl NormalizationReport {
    pub fn merge(&mut self, other: &NormalizationReport) {
        self.boms_removed += other.boms_removed;
        self.chars_substituted += other.chars_substituted;
        self.whitespace_runs_merged += other.whitespace_runs_merged;
    }
}

/// Character substitutions applied before composition, keyed by the
/// character as it appears in the source document.
pub type SubstitutionMap = BTreeMap<char, char>;

fn is_line_break(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{85}' | '\u{2028}' | '\u{2029}')
}

/// Normalizes raw extracted text.
///
/// Every kind of line break becomes `\n` (CRLF counts as one break). Any
/// other run of whitespace collapses to a single space. Case is untouched.
pub fn normalize_text(raw: &str, substitutions: &SubstitutionMap) -> (String, NormalizationReport) {
    let mut report = NormalizationReport::default();

    let mut stage = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        let c = match substitutions.get(&c) {
            Some(&sub) => {
                report.chars_substituted += 1;
                sub
            }
            None => c,
        };
        match c {
            BOM => report.boms_removed += 1,
            '\r' => {
                if chars.peek() != Some(&'\n') {
                    stage.push('\n');
                }
            }
            c if is_line_break(c) => stage.push('\n'),
            c => stage.push(c),
        }
    }

    let composed: String = stage.nfc().collect();

    let mut out = String::with_capacity(composed.len());
    let mut run_len = 0usize;
    let mut run_is_plain_space = true;
    let flush = |out: &mut String, report: &mut NormalizationReport, len: usize, plain: bool| {
        if len > 0 {
            out.push(' ');
            if len > 1 || !plain {
                report.whitespace_runs_merged += 1;
            }
        }
    };
    for c in composed.chars() {
        if c.is_whitespace() && c != '\n' {
            run_is_plain_space &= c == ' ';
            run_len += 1;
        } else {
            flush(&mut out, &mut report, run_len, run_is_plain_space);
            run_len = 0;
            run_is_plain_space = true;
            out.push(c);
        }
    }
    flush(&mut out, &mut report, run_len, run_is_plain_space);

    (out, report)
}

fn parse_codepoint(tok: &str) -> Option<char> {
    let hex = tok
        .strip_prefix("U+")
        .or_else(|| tok.strip_prefix("u+"))
        .or_else(|| tok.strip_prefix("0x"))
        .or_else(|| tok.strip_prefix("0X"))
        .unwrap_or(tok);
    u32::from_str_radix(hex, 16).ok().and_then(char::from_u32)
}

/// Parses a substitution table: one `FROM TO` pair of hex code points per
/// line (`00AD 002D`, `U+00AD U+002D` or `0xAD 0x2D`), `#` starts a comment.
pub fn parse_substitutions(text: &str, path: &Path) -> Result<SubstitutionMap> {
    let mut map = SubstitutionMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [from, to] = fields[..] else {
            return Err(err(format!("expected two code points, got {line:?}")));
        };
        let from = parse_codepoint(from).ok_or_else(|| err(format!("bad code point {from:?}")))?;
        let to = parse_codepoint(to).ok_or_else(|| err(format!("bad code point {to:?}")))?;
        map.insert(from, to);
    }
    Ok(map)
}

pub fn load_substitutions(path: &Path) -> Result<SubstitutionMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_substitutions(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(s: &str) -> (String, NormalizationReport) {
        normalize_text(s, &SubstitutionMap::new())
    }

    #[test]
    fn composes_combining_acute() {
        assert_eq!(norm("a\u{301}").0, "\u{e1}");
        assert_eq!(norm("Sla\u{301}inte").0, "Sláinte");
    }

    #[test]
    fn merges_whitespace_runs() {
        let (out, rep) = norm("x \t  y");
        assert_eq!(out, "x y");
        assert_eq!(rep.whitespace_runs_merged, 1);
        let (out, rep) = norm("a b");
        assert_eq!(out, "a b");
        assert_eq!(rep.whitespace_runs_merged, 0);
        assert_eq!(norm("a\u{a0}b").0, "a b");
    }

    #[test]
    fn removes_bom() {
        let (out, rep) = norm("\u{feff}text");
        assert_eq!(out, "text");
        assert_eq!(rep.boms_removed, 1);
    }

    #[test]
    fn keeps_line_breaks_and_drops_cr() {
        assert_eq!(norm("a\r\nb\rc\u{2028}d").0, "a\nb\nc\nd");
        assert_eq!(norm("a  \n  b").0, "a \n b");
    }

    #[test]
    fn preserves_case() {
        assert_eq!(norm("TÁ an Roinn").0, "TÁ an Roinn");
    }

    #[test]
    fn substitutions_apply_before_composition() {
        let mut subs = SubstitutionMap::new();
        subs.insert('\u{b4}', '\u{301}');
        let (out, rep) = normalize_text("e\u{b4}", &subs);
        assert_eq!(out, "é");
        assert_eq!(rep.chars_substituted, 1);
    }

    #[test]
    fn parses_substitution_file() {
        let map = parse_substitutions("# header\n00AD 002D\nU+2019 0x27 # quote\n", Path::new("s"))
            .unwrap();
        assert_eq!(map[&'\u{ad}'], '-');
        assert_eq!(map[&'\u{2019}'], '\'');
        assert!(parse_substitutions("00AD\n", Path::new("s")).is_err());
        assert!(parse_substitutions("zz 41\n", Path::new("s")).is_err());
    }

    fn arb_text() -> impl Strategy<Value = String> {
        let pieces = prop_oneof![
            Just("a".to_string()),
            Just("e".to_string()),
            Just("\u{301}".to_string()),
            Just("\u{323}".to_string()),
            Just("\u{302}".to_string()),
            Just("\u{feff}".to_string()),
            Just(" ".to_string()),
            Just("\t".to_string()),
            Just("\u{a0}".to_string()),
            Just("\u{2000}".to_string()),
            Just("\r\n".to_string()),
            Just("\n".to_string()),
            Just("\r".to_string()),
            Just("\u{1100}\u{1161}".to_string()),
            any::<char>().prop_map(String::from),
        ];
        prop::collection::vec(pieces, 0..40).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn idempotent(s in arb_text()) {
            let once = norm(&s).0;
            let twice = norm(&once).0;
            prop_assert_eq!(&twice, &once);
        }

        #[test]
        fn no_bom_or_double_whitespace(s in arb_text()) {
            let out = norm(&s).0;
            prop_assert!(!out.contains(BOM), "BOM survived");
            let chars: Vec<char> = out.chars().collect();
            for w in chars.windows(2) {
                let ws = |c: char| c.is_whitespace() && c != '\n';
                prop_assert!(!(ws(w[0]) && ws(w[1])));
            }
        }
    }
}
