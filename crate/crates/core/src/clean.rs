//! Sentence-pair filtering.
//!
//! Rules are checked in order and a pair is counted under the first one
//! that matches:
//!
//! 1. either side is empty;
//! 2. either side has no alphabetic character;
//! 3. either side is at least `min_detect_chars` long and is detected as
//!    a language other than the one expected for that side;
//! 4. the longer side is more than `ratio_bound` times the shorter one.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::SentencePair;
use crate::error::{Error, Result};
use crate::langid::{detect_string, LanguageProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectRule {
    Empty,
    NonAlpha,
    WrongLanguage,
    LengthRatio,
}

impl fmt::Display for RejectRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectRule::Empty => "empty",
            RejectRule::NonAlpha => "nonalpha",
            RejectRule::WrongLanguage => "wronglang",
            RejectRule::LengthRatio => "ratio",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub removed_empty: usize,
    pub removed_nonalpha: usize,
    pub removed_wronglang: usize,
    pub removed_ratio: usize,
    pub kept: usize,
}

impl CleanReport {
    pub fn total(&self) -> usize {
        self.removed_empty
            + self.removed_nonalpha
            + self.removed_wronglang
            + self.removed_ratio
            + self.kept
    }

    fn count(&mut self, rule: Option<RejectRule>) {
        match rule {
            None => self.kept += 1,
            Some(RejectRule::Empty) => self.removed_empty += 1,
            Some(RejectRule::NonAlpha) => self.removed_nonalpha += 1,
            Some(RejectRule::WrongLanguage) => self.removed_wronglang += 1,
            Some(RejectRule::LengthRatio) => self.removed_ratio += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanParams {
    pub source_lang: String,
    pub target_lang: String,
    pub ratio_bound: f64,
    pub min_detect_chars: usize,
}

pub const DEFAULT_RATIO_BOUND: f64 = 3.0;
pub const DEFAULT_MIN_DETECT_CHARS: usize = 40;

impl CleanParams {
    pub fn new(source_lang: &str, target_lang: &str) -> Self {
        CleanParams {
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            ratio_bound: DEFAULT_RATIO_BOUND,
            min_detect_chars: DEFAULT_MIN_DETECT_CHARS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub pair: SentencePair,
    pub rule: RejectRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanOutcome {
    pub kept: Vec<SentencePair>,
    pub rejected: Vec<Rejected>,
    pub report: CleanReport,
}

fn wrong_language(
    text: &str,
    expected: &str,
    profiles: &[LanguageProfile],
    min_chars: usize,
) -> bool {
    if text.chars().count() < min_chars {
        return false;
    }
    match detect_string(text, profiles) {
        Ok(pred) => pred.language != expected,
        Err(_) => false,
    }
}

/// First rule `pair` violates, if any.
pub fn classify(
    pair: &SentencePair,
    profiles: &[LanguageProfile],
    params: &CleanParams,
) -> Option<RejectRule> {
    let (s, t) = (pair.source.trim(), pair.target.trim());
    if s.is_empty() || t.is_empty() {
        return Some(RejectRule::Empty);
    }
    let has_alpha = |x: &str| x.chars().any(char::is_alphabetic);
    if !has_alpha(s) || !has_alpha(t) {
        return Some(RejectRule::NonAlpha);
    }
    if wrong_language(s, &params.source_lang, profiles, params.min_detect_chars)
        || wrong_language(t, &params.target_lang, profiles, params.min_detect_chars)
    {
        return Some(RejectRule::WrongLanguage);
    }
    let (ls, lt) = (s.chars().count() as f64, t.chars().count() as f64);
    if ls.max(lt) / ls.min(lt) > params.ratio_bound {
        return Some(RejectRule::LengthRatio);
    }
    None
}

pub fn clean_pairs(
    pairs: Vec<SentencePair>,
    profiles: &[LanguageProfile],
    params: &CleanParams,
) -> Result<CleanOutcome> {
    if profiles.len() < 2 {
        return Err(Error::TooFewProfiles(profiles.len()));
    }
    for lang in [&params.source_lang, &params.target_lang] {
        if !profiles.iter().any(|p| p.language() == lang.as_str()) {
            return Err(Error::Config(format!("no language profile for {lang:?}")));
        }
    }
    let verdicts: Vec<Option<RejectRule>> = pairs
        .par_iter()
        .map(|p| classify(p, profiles, params))
        .collect();
    let mut outcome = CleanOutcome {
        kept: Vec::new(),
        rejected: Vec::new(),
        report: CleanReport::default(),
    };
    for (pair, verdict) in pairs.into_iter().zip(verdicts) {
        outcome.report.count(verdict);
        match verdict {
            None => outcome.kept.push(pair),
            Some(rule) => outcome.rejected.push(Rejected { pair, rule }),
        }
    }
    Ok(outcome)
}

/// `rule<TAB>doc_pair_id<TAB>source<TAB>target`, one rejected pair per line.
pub fn write_rejects(rejected: &[Rejected], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in rejected {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.rule,
            r.pair.doc_pair_id,
            r.pair.source.replace('\t', " "),
            r.pair.target.replace('\t', " ")
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
