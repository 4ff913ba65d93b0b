//! Shared document and corpus types, corpus statistics and the on-disk
//! corpus format.
//!
//! A corpus named `corpus` with languages `en`/`ga` is written as:
//!
//! * `corpus.en`, `corpus.ga`: one sentence per line, line *i* of each file
//!   forming pair *i*;
//! * `corpus.tsv`: `source<TAB>target`, with tabs inside a sentence replaced
//!   by a single space;
//! * `corpus.links.tsv`: per-pair provenance (document pair, bead, cost);
//! * `corpus.stats.json`: the [`CorpusStats`] report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sentalign::AlignmentLink;

/// Where a document came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub path: PathBuf,
    /// Extractor tag, e.g. `plain` or the configured command name.
    pub extractor: String,
}

/// A normalized document held as an ordered list of lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextDocument {
    pub doc_id: String,
    pub language: Option<String>,
    pub lines: Vec<String>,
    /// Sum of line lengths in characters.
    pub char_count: usize,
    pub origin: Origin,
}

impl TextDocument {
    /// Builds a document from already-normalized text. Carriage returns and
    /// byte order marks are dropped so the line invariants always hold; a
    /// final newline terminates the last line rather than starting a new one.
    pub fn from_text(doc_id: impl Into<String>, text: &str, origin: Origin) -> Self {
        let text = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<String> = if text.is_empty() {
            Vec::new()
        } else {
            text.split('\n')
                .map(|l| {
                    l.chars()
                        .filter(|&c| c != '\r' && c != '\u{feff}')
                        .collect()
                })
                .collect()
        };
        Self::from_lines(doc_id, lines, origin)
    }

    pub fn from_lines(doc_id: impl Into<String>, lines: Vec<String>, origin: Origin) -> Self {
        let char_count = lines.iter().map(|l| l.chars().count()).sum();
        TextDocument {
            doc_id: doc_id.into(),
            language: None,
            lines,
            char_count,
            origin,
        }
    }

    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

/// One aligned sentence pair with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub source: String,
    pub target: String,
    pub link: AlignmentLink,
    pub doc_pair_id: String,
}

impl SentencePair {
    /// Line breaks inside either side are replaced by spaces.
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        link: AlignmentLink,
        doc_pair_id: impl Into<String>,
    ) -> Self {
        SentencePair {
            source: single_line(source.into()),
            target: single_line(target.into()),
            link,
            doc_pair_id: doc_pair_id.into(),
        }
    }
}

fn single_line(s: String) -> String {
    if s.contains(['\n', '\r']) {
        s.replace(['\n', '\r'], " ")
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
    pub stats: CorpusStats,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<SentencePair>, rule: &TokenRule) -> Self {
        let stats = compute_stats(&pairs, rule);
        ParallelCorpus { pairs, stats }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub line_count: usize,
    /// Unique tokens over source and target combined.
    pub vocab_size: usize,
    pub per_source_counts: BTreeMap<String, usize>,
}

/// How sentences are cut into tokens when counting vocabulary.
///
/// The default splits on Unicode whitespace, strips leading and trailing
/// punctuation from each token and keeps case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRule {
    #[serde(default)]
    pub case_fold: bool,
}

static EDGE_PUNCT: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\p{P}+|\p{P}+$").unwrap());

impl TokenRule {
    pub fn tokens<'a>(&'a self, text: &'a str) -> impl Iterator<Item = String> + 'a {
        text.split_whitespace().filter_map(move |raw| {
            let tok = EDGE_PUNCT.replace_all(raw, "");
            if tok.is_empty() {
                None
            } else if self.case_fold {
                Some(tok.to_lowercase())
            } else {
                Some(tok.into_owned())
            }
        })
    }
}

pub fn compute_stats(pairs: &[SentencePair], rule: &TokenRule) -> CorpusStats {
    let mut vocab = BTreeSet::new();
    let mut per_source_counts = BTreeMap::new();
    for pair in pairs {
        vocab.extend(rule.tokens(&pair.source));
        vocab.extend(rule.tokens(&pair.target));
        *per_source_counts
            .entry(pair.doc_pair_id.clone())
            .or_insert(0) += 1;
    }
    CorpusStats {
        line_count: pairs.len(),
        vocab_size: vocab.len(),
        per_source_counts,
    }
}

/// Paths of the files making up a corpus on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFiles {
    pub source: PathBuf,
    pub target: PathBuf,
    pub tsv: PathBuf,
    pub links: PathBuf,
    pub stats: PathBuf,
}

impl CorpusFiles {
    pub fn new(dir: &Path, name: &str, src_lang: &str, tgt_lang: &str) -> Self {
        CorpusFiles {
            source: dir.join(format!("{name}.{src_lang}")),
            target: dir.join(format!("{name}.{tgt_lang}")),
            tsv: dir.join(format!("{name}.tsv")),
            links: dir.join(format!("{name}.links.tsv")),
            stats: dir.join(format!("{name}.stats.json")),
        }
    }
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus(corpus: &ParallelCorpus, files: &CorpusFiles) -> Result<()> {
    if let Some(dir) = files.source.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    write_lines(&files.source, corpus.pairs.iter().map(|p| p.source.clone()))?;
    write_lines(&files.target, corpus.pairs.iter().map(|p| p.target.clone()))?;
    write_lines(
        &files.tsv,
        corpus.pairs.iter().map(|p| {
            format!(
                "{}\t{}",
                p.source.replace('\t', " "),
                p.target.replace('\t', " ")
            )
        }),
    )?;
    write_lines(
        &files.links,
        corpus.pairs.iter().map(|p| {
            format!(
                "{}\t{}",
                p.doc_pair_id.replace(['\t', '\n'], " "),
                p.link.dump_line()
            )
        }),
    )?;
    let json = serde_json::to_string_pretty(&corpus.stats).expect("stats serialize");
    fs::write(&files.stats, json + "\n").map_err(|e| Error::io(&files.stats, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|l| l.trim_end_matches('\r').to_string())
        .collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok(lines)
}

/// Reads two parallel plain-text files into sentence pairs with default
/// one-to-one provenance.
pub fn read_parallel_text(source: &Path, target: &Path) -> Result<Vec<SentencePair>> {
    let src = read_lines(source)?;
    let tgt = read_lines(target)?;
    if src.len() != tgt.len() {
        return Err(Error::Parse {
            path: target.to_path_buf(),
            line: tgt.len().min(src.len()) + 1,
            msg: format!("{} source lines but {} target lines", src.len(), tgt.len()),
        });
    }
    Ok(src
        .into_iter()
        .zip(tgt)
        .enumerate()
        .map(|(i, (s, t))| SentencePair {
            source: s,
            target: t,
            link: AlignmentLink::one_to_one(i),
            doc_pair_id: String::new(),
        })
        .collect())
}

/// Reads a corpus written by [`write_corpus`]. The links file is optional.
pub fn read_corpus(files: &CorpusFiles, rule: &TokenRule) -> Result<ParallelCorpus> {
    let mut pairs = read_parallel_text(&files.source, &files.target)?;
    if files.links.exists() {
        let links = read_lines(&files.links)?;
        if links.len() != pairs.len() {
            return Err(Error::Parse {
                path: files.links.clone(),
                line: links.len().min(pairs.len()) + 1,
                msg: format!("{} provenance lines for {} pairs", links.len(), pairs.len()),
            });
        }
        for (i, (pair, line)) in pairs.iter_mut().zip(&links).enumerate() {
            let parse_err = |msg: String| Error::Parse {
                path: files.links.clone(),
                line: i + 1,
                msg,
            };
            let (doc_pair_id, rest) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("missing document pair column".into()))?;
            pair.doc_pair_id = doc_pair_id.to_string();
            pair.link = AlignmentLink::parse_dump_line(rest).map_err(parse_err)?;
        }
    }
    Ok(ParallelCorpus::new(pairs, rule))
}
