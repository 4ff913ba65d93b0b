//! Sentence boundary reconstruction for editable text and for hard-wrapped
//! text extracted from PDFs.
//!
//! A boundary falls after `.`, `?` or `!` (optionally followed by closing
//! quotes or brackets) when whitespace and then an uppercase letter, opening
//! quote or opening bracket follow. A full stop does not end a sentence when
//! the token it closes is a listed abbreviation, a single uppercase initial
//! or a leading list number such as `3.`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TextDocument;
use crate::error::{Error, Result};

const TERMINALS: &[char] = &['.', '?', '!'];
const CLOSERS: &[char] = &['"', '\'', '”', '’', '»', ')', ']'];
const OPENERS: &[char] = &['"', '\'', '“', '‘', '„', '«', '(', '['];

static BREAK_PATTERN: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(\(\p{L}\)|\d+\.)(\s|$)").unwrap());
static LIST_NUMBER: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\d+\.$").unwrap());

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbbreviationLexicon {
    pub language: String,
    entries: BTreeSet<String>,
}

impl AbbreviationLexicon {
    pub fn new<I, S>(language: &str, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut lex = AbbreviationLexicon {
            language: language.to_string(),
            entries: BTreeSet::new(),
        };
        for e in entries {
            let e = e.into();
            if !e.ends_with('.') {
                return Err(Error::Config(format!(
                    "abbreviation {e:?} does not end with a full stop"
                )));
            }
            lex.entries.insert(e);
        }
        Ok(lex)
    }

    pub fn empty(language: &str) -> Self {
        AbbreviationLexicon {
            language: language.to_string(),
            entries: BTreeSet::new(),
        }
    }

    /// One entry per line; `#` starts a comment.
    pub fn parse(language: &str, text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let entry = line.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            if !entry.ends_with('.') {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("abbreviation {entry:?} does not end with a full stop"),
                });
            }
            entries.push(entry.to_string());
        }
        Self::new(language, entries)
    }

    pub fn load(language: &str, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(language, &text, path)
    }

    /// The shipped list for `language`, or an empty lexicon.
    pub fn bundled(language: &str) -> Self {
        let text = match language {
            "en" => include_str!("../data/abbrev/en.txt"),
            "ga" => include_str!("../data/abbrev/ga.txt"),
            _ => return Self::empty(language),
        };
        Self::parse(language, text, Path::new(language)).expect("bundled lexicon is valid")
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceList {
    pub doc_id: String,
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Editable,
    Pdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdfOptions {
    /// Rejoin `word-` / `continuation` across line ends.
    pub dehyphenate: bool,
}

impl Default for PdfOptions {
    fn default() -> Self {
        PdfOptions { dehyphenate: true }
    }
}

fn is_initial(token: &str) -> bool {
    let mut chars = token.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

/// Splits one block of text (no hard line breaks inside) into sentences.
fn split_block(block: &str, lex: &AbbreviationLexicon, out: &mut Vec<String>) {
    let chars: Vec<(usize, char)> = block.char_indices().collect();
    let mut start = 0usize; // byte offset of the current sentence
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !TERMINALS.contains(&c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && TERMINALS.contains(&chars[j].1) {
            j += 1;
        }
        let single_stop = c == '.' && j == i + 1;
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k == j || k == chars.len() {
            i = j;
            continue;
        }
        let next = chars[k].1;
        if !(next.is_uppercase() || OPENERS.contains(&next)) {
            i = j;
            continue;
        }
        if single_stop {
            let token_start = block[..pos].rfind(char::is_whitespace).map_or(0, |p| p + 1);
            let token = block[token_start..=pos].trim_start_matches(OPENERS);
            let leading = block[start..token_start].trim().is_empty();
            if lex.contains(token) || is_initial(token) || (leading && LIST_NUMBER.is_match(token))
            {
                i = j;
                continue;
            }
        }
        let end = chars.get(j).map_or(block.len(), |&(p, _)| p);
        push_sentence(&block[start..end], out);
        start = chars[k].0;
        i = k;
    }
    push_sentence(&block[start..], out);
}

fn push_sentence(s: &str, out: &mut Vec<String>) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Splits text from editable sources. Every line break is a hard boundary.
pub fn split_editable(doc: &TextDocument, lex: &AbbreviationLexicon) -> SentenceList {
    let mut sentences = Vec::new();
    for line in &doc.lines {
        split_block(line, lex, &mut sentences);
    }
    SentenceList {
        doc_id: doc.doc_id.clone(),
        sentences,
    }
}

fn ends_sentence(text: &str, lex: &AbbreviationLexicon) -> bool {
    let trimmed = text.trim_end().trim_end_matches(CLOSERS);
    let Some(last) = trimmed.chars().last() else {
        return false;
    };
    if !TERMINALS.contains(&last) {
        return false;
    }
    if last == '.' && !trimmed.ends_with("..") {
        let token = trimmed
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or(trimmed)
            .trim_start_matches(OPENERS);
        if lex.contains(token) || is_initial(token) {
            return false;
        }
    }
    true
}

fn ends_with_word_hyphen(text: &str) -> bool {
    let mut rev = text.chars().rev();
    rev.next() == Some('-') && rev.next().is_some_and(char::is_alphabetic)
}

/// Rebuilds logical blocks from hard-wrapped lines.
///
/// A line joins the previous one unless the previous one ends a sentence or
/// the line opens with a list marker such as `(a)` or `3.`.
pub fn reflow_pdf_lines(
    lines: &[String],
    lex: &AbbreviationLexicon,
    opts: PdfOptions,
) -> Vec<String> {
    let mut blocks: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for raw in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        current = Some(match current.take() {
            None => line.to_string(),
            Some(prev) if ends_sentence(&prev, lex) || BREAK_PATTERN.is_match(line) => {
                blocks.push(prev);
                line.to_string()
            }
            Some(mut prev) => {
                if opts.dehyphenate
                    && ends_with_word_hyphen(&prev)
                    && line.chars().next().is_some_and(char::is_lowercase)
                {
                    prev.pop();
                } else {
                    prev.push(' ');
                }
                prev.push_str(line);
                prev
            }
        });
    }
    blocks.extend(current);
    blocks
}

pub fn split_pdf_text(doc: &TextDocument, lex: &AbbreviationLexicon) -> SentenceList {
    split_pdf_text_with(doc, lex, PdfOptions::default())
}

pub fn split_pdf_text_with(
    doc: &TextDocument,
    lex: &AbbreviationLexicon,
    opts: PdfOptions,
) -> SentenceList {
    let mut sentences = Vec::new();
    for block in reflow_pdf_lines(&doc.lines, lex, opts) {
        split_block(&block, lex, &mut sentences);
    }
    SentenceList {
        doc_id: doc.doc_id.clone(),
        sentences,
    }
}

pub fn split_document(
    doc: &TextDocument,
    lex: &AbbreviationLexicon,
    mode: SplitMode,
    opts: PdfOptions,
) -> SentenceList {
    match mode {
        SplitMode::Editable => split_editable(doc, lex),
        SplitMode::Pdf => split_pdf_text_with(doc, lex, opts),
    }
}
