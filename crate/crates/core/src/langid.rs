//! Character n-gram naive Bayes language identification.
//!
//! Text is lowercased and cut into maximal runs of letters. Each run is
//! padded with one space on either side and contributes all of its 1-, 2-
//! and 3-grams (the bare space unigram excluded). A profile holds additively
//! smoothed n-gram distributions, one per order, each with a single bucket
//! for unseen n-grams. Detection picks the profile with the highest summed
//! log-likelihood under a uniform prior.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TextDocument;
use crate::error::{Error, Result};
use crate::normalize::{normalize_text, SubstitutionMap};

pub const MAX_ORDER: usize = 3;
pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// Lines 1..=HEAD_LINES are always sampled by [`detect_file`].
pub const HEAD_LINES: usize = 50;
/// After the head block, every line whose 1-based number is a multiple of
/// this stride is sampled.
pub const SAMPLE_STRIDE: usize = 100;

/// Calls `f(order, gram)` for every n-gram of `text`.
fn for_each_ngram(text: &str, mut f: impl FnMut(usize, &str)) {
    let lower = text.to_lowercase();
    let mut padded = String::new();
    let mut offsets: Vec<usize> = Vec::new();
    for word in lower
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| !w.is_empty())
    {
        padded.clear();
        padded.push(' ');
        padded.push_str(word);
        padded.push(' ');
        offsets.clear();
        offsets.extend(padded.char_indices().map(|(i, _)| i));
        offsets.push(padded.len());
        let nchars = offsets.len() - 1;
        for n in 1..=MAX_ORDER {
            for start in 0..nchars.saturating_sub(n - 1) {
                let gram = &padded[offsets[start]..offsets[start + n]];
                if n == 1 && gram == " " {
                    continue;
                }
                f(n, gram);
            }
        }
    }
}

/// Serialized form of a profile: raw counts per order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProfileFile {
    language: String,
    smoothing: f64,
    /// Keyed by n-gram order ("1", "2", "3").
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

#[derive(Debug, Clone)]
struct OrderModel {
    log_probs: HashMap<String, f64>,
    unseen_log_prob: f64,
    total: u64,
}

impl OrderModel {
    fn new(counts: &BTreeMap<String, u64>, alpha: f64) -> Self {
        let total: u64 = counts.values().sum();
        let vocab = (counts.len() + 1) as f64;
        let denom = total as f64 + alpha * vocab;
        OrderModel {
            log_probs: counts
                .iter()
                .map(|(g, &c)| (g.clone(), ((c as f64 + alpha) / denom).ln()))
                .collect(),
            unseen_log_prob: (alpha / denom).ln(),
            total,
        }
    }

    fn log_prob(&self, gram: &str) -> f64 {
        self.log_probs
            .get(gram)
            .copied()
            .unwrap_or(self.unseen_log_prob)
    }
}

/// Trained character n-gram model for one language.
#[derive(Debug, Clone)]
pub struct LanguageProfile {
    language: String,
    smoothing: f64,
    counts: [BTreeMap<String, u64>; MAX_ORDER],
    orders: Vec<OrderModel>,
}

impl PartialEq for LanguageProfile {
    fn eq(&self, other: &Self) -> bool {
        self.language == other.language
            && self.smoothing == other.smoothing
            && self.counts == other.counts
    }
}

impl LanguageProfile {
    fn from_counts(
        language: String,
        smoothing: f64,
        counts: [BTreeMap<String, u64>; MAX_ORDER],
    ) -> Result<Self> {
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::Profile(format!(
                "smoothing must be positive, got {smoothing}"
            )));
        }
        if counts.iter().any(|c| c.is_empty()) {
            return Err(Error::Profile(format!(
                "profile {language:?} has an empty n-gram order"
            )));
        }
        let orders = counts
            .iter()
            .map(|c| OrderModel::new(c, smoothing))
            .collect();
        Ok(LanguageProfile {
            language,
            smoothing,
            counts,
            orders,
        })
    }

    /// Re-registers the same model under another language code.
    pub fn relabeled(&self, language: impl Into<String>) -> Self {
        LanguageProfile {
            language: language.into(),
            ..self.clone()
        }
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    /// Raw n-gram counts for `order` (1-based).
    pub fn counts(&self, order: usize) -> &BTreeMap<String, u64> {
        &self.counts[order - 1]
    }

    pub fn total(&self, order: usize) -> u64 {
        self.orders[order - 1].total
    }

    /// Smoothed probability of `gram` under its order's distribution.
    pub fn prob(&self, gram: &str) -> f64 {
        let n = gram.chars().count();
        assert!((1..=MAX_ORDER).contains(&n), "n-gram order out of range");
        self.orders[n - 1].log_prob(gram).exp()
    }

    /// Probability mass reserved for any single unseen n-gram of `order`.
    pub fn unseen_prob(&self, order: usize) -> f64 {
        self.orders[order - 1].unseen_log_prob.exp()
    }

    /// Summed log-probability of every n-gram in `text`.
    pub fn log_likelihood(&self, text: &str) -> f64 {
        let mut ll = 0.0;
        for_each_ngram(text, |n, g| ll += self.orders[n - 1].log_prob(g));
        ll
    }

    pub fn to_json(&self) -> String {
        let file = ProfileFile {
            language: self.language.clone(),
            smoothing: self.smoothing,
            counts: self
                .counts
                .iter()
                .enumerate()
                .map(|(i, c)| ((i + 1).to_string(), c.clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("profile serialize") + "\n"
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ProfileFile =
            serde_json::from_str(json).map_err(|e| Error::Profile(e.to_string()))?;
        let mut counts: [BTreeMap<String, u64>; MAX_ORDER] = Default::default();
        for (order, grams) in file.counts {
            let n: usize = order
                .parse()
                .ok()
                .filter(|n| (1..=MAX_ORDER).contains(n))
                .ok_or_else(|| Error::Profile(format!("bad n-gram order {order:?}")))?;
            if let Some(bad) = grams.keys().find(|g| g.chars().count() != n) {
                return Err(Error::Profile(format!(
                    "n-gram {bad:?} listed under order {n}"
                )));
            }
            counts[n - 1] = grams;
        }
        Self::from_counts(file.language, file.smoothing, counts)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json).map_err(|e| match e {
            Error::Profile(msg) => Error::Profile(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguagePrediction {
    pub language: String,
    /// Posterior of the winning language, in [0, 1].
    pub confidence: f64,
}

pub fn train_profile(language: &str, corpus_text: &str) -> Result<LanguageProfile> {
    train_profile_with(language, corpus_text, DEFAULT_SMOOTHING)
}

pub fn train_profile_with(
    language: &str,
    corpus_text: &str,
    smoothing: f64,
) -> Result<LanguageProfile> {
    let (text, _) = normalize_text(corpus_text, &SubstitutionMap::new());
    let mut counts: [BTreeMap<String, u64>; MAX_ORDER] = Default::default();
    for_each_ngram(&text, |n, g| {
        *counts[n - 1].entry(g.to_string()).or_insert(0) += 1
    });
    if counts[0].is_empty() {
        return Err(Error::EmptyInput("training text has no letters"));
    }
    LanguageProfile::from_counts(language.to_string(), smoothing, counts)
}

pub fn detect_string(s: &str, profiles: &[LanguageProfile]) -> Result<LanguagePrediction> {
    if profiles.len() < 2 {
        return Err(Error::TooFewProfiles(profiles.len()));
    }
    if s.trim().is_empty() {
        return Err(Error::EmptyInput("text to classify is empty"));
    }
    let scores: Vec<f64> = profiles.iter().map(|p| p.log_likelihood(s)).collect();
    let mut best = 0;
    for i in 1..profiles.len() {
        let better = scores[i] > scores[best]
            || (scores[i] == scores[best] && profiles[i].language < profiles[best].language);
        if better {
            best = i;
        }
    }
    let z: f64 = scores.iter().map(|&ll| (ll - scores[best]).exp()).sum();
    Ok(LanguagePrediction {
        language: profiles[best].language.clone(),
        confidence: (1.0 / z).clamp(0.0, 1.0),
    })
}

/// Zero-based indices of the lines [`detect_file`] reads from a document of
/// `line_count` lines: lines 1-50, then lines 100, 200, 300, ... (1-based).
pub fn sample_line_indices(line_count: usize) -> Vec<usize> {
    sample_line_indices_with(line_count, HEAD_LINES, SAMPLE_STRIDE)
}

/// Lines `1..=head` plus every 1-based line number past the head that is a
/// multiple of `stride` (none when `stride` is 0).
pub fn sample_line_indices_with(line_count: usize, head: usize, stride: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..line_count.min(head)).collect();
    if let Some(q) = head.checked_div(stride) {
        let first = (q + 1) * stride;
        idx.extend((first..=line_count).step_by(stride).map(|n| n - 1));
    }
    idx
}

pub fn detect_file(doc: &TextDocument, profiles: &[LanguageProfile]) -> Result<LanguagePrediction> {
    detect_file_with(doc, profiles, HEAD_LINES, SAMPLE_STRIDE)
}

pub fn detect_file_with(
    doc: &TextDocument,
    profiles: &[LanguageProfile],
    head: usize,
    stride: usize,
) -> Result<LanguagePrediction> {
    let sample: Vec<&str> = sample_line_indices_with(doc.lines.len(), head, stride)
        .into_iter()
        .map(|i| doc.lines[i].as_str())
        .filter(|l| !l.trim().is_empty())
        .collect();
    if sample.is_empty() {
        return Err(Error::EmptyInput("all sampled lines are empty"));
    }
    detect_string(&sample.join("\n"), profiles)
}

const EN_PROFILE: &str = include_str!("../data/langid/en.profile.json");
const GA_PROFILE: &str = include_str!("../data/langid/ga.profile.json");

/// The shipped English and Irish profiles.
pub fn bundled_profiles() -> Vec<LanguageProfile> {
    [EN_PROFILE, GA_PROFILE]
        .iter()
        .map(|json| LanguageProfile::from_json(json).expect("bundled profile is valid"))
        .collect()
}
