//! End-to-end corpus construction:
//! extract → normalize → detect → split → align documents → align
//! sentences → clean → stats → write.
//!
//! Per-document and per-pair work runs on the rayon pool; results are
//! collected in input order and every cross-document decision is made
//! sequentially, so a run is a pure function of its config and inputs.

pub mod config;
pub mod extract;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clean::{clean_pairs, write_rejects, CleanParams, CleanReport};
use crate::corpus::{
    write_corpus, CorpusFiles, CorpusStats, ParallelCorpus, SentencePair, TextDocument, TokenRule,
};
use crate::docalign::{align_documents, DocAlignResult, DocumentPair};
use crate::error::{Error, Result};
use crate::langid::{bundled_profiles, detect_file_with, LanguageProfile};
use crate::normalize::{load_substitutions, NormalizationReport, SubstitutionMap};
use crate::sentalign::{align_sentences, total_cost, AlignmentLink, BeadCostModel};
use crate::split::{split_document, AbbreviationLexicon, SentenceList, SplitMode};

pub use config::PipelineConfig;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Extract,
    Split,
    Docalign,
    Sentalign,
    Clean,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Extract => "extract",
            Stage::Split => "split",
            Stage::Docalign => "docalign",
            Stage::Sentalign => "sentalign",
            Stage::Clean => "clean",
        })
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "extract" => Stage::Extract,
            "split" => Stage::Split,
            "docalign" => Stage::Docalign,
            "sentalign" => Stage::Sentalign,
            "clean" => Stage::Clean,
            _ => return Err(format!("unknown stage {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub path: PathBuf,
    pub extractor: String,
    pub lines: usize,
    pub char_count: usize,
    pub normalization: NormalizationReport,
    pub language: Option<String>,
    pub confidence: Option<f64>,
    pub split_mode: Option<SplitMode>,
    pub sentences: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedDocument {
    pub path: PathBuf,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentAlignSummary {
    pub document_pairs: usize,
    pub links: usize,
    /// Link count per bead shape, e.g. `"1-2"`.
    pub shapes: BTreeMap<String, usize>,
    pub total_cost: f64,
}

/// Machine-readable record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: PipelineConfig,
    pub stop_after: Option<Stage>,
    pub documents: Vec<DocumentRecord>,
    pub skipped: Vec<SkippedDocument>,
    pub normalization: NormalizationReport,
    pub docalign: Option<DocAlignResult>,
    pub sentalign: Option<SentAlignSummary>,
    pub clean: Option<CleanReport>,
    pub stats: Option<CorpusStats>,
}

#[derive(Debug)]
pub struct RunOutput {
    /// Absent when the run stopped before the corpus was written.
    pub corpus: Option<ParallelCorpus>,
    pub manifest: RunManifest,
}

/// Output file locations for a configured run.
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub corpus: CorpusFiles,
    pub manifest: PathBuf,
    pub docalign: PathBuf,
    pub alignments: PathBuf,
    pub rejects: PathBuf,
    pub extracted_dir: PathBuf,
    pub split_dir: PathBuf,
}

impl OutputPaths {
    pub fn new(config: &PipelineConfig) -> Self {
        let dir = &config.output_dir;
        let name = &config.corpus_name;
        OutputPaths {
            corpus: CorpusFiles::new(
                dir,
                name,
                &config.languages.source,
                &config.languages.target,
            ),
            manifest: dir.join(format!("{name}.manifest.json")),
            docalign: dir.join(format!("{name}.docalign.tsv")),
            alignments: dir.join(format!("{name}.align.tsv")),
            rejects: dir.join(format!("{name}.rejects.tsv")),
            extracted_dir: dir.join("extracted"),
            split_dir: dir.join("split"),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_manifest(manifest: &RunManifest, paths: &OutputPaths) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serialize");
    write_file(&paths.manifest, &(json + "\n"))
}

fn load_profiles(config: &PipelineConfig) -> Result<Vec<LanguageProfile>> {
    let profiles = if config.langid.profiles.is_empty() {
        bundled_profiles()
    } else {
        config
            .langid
            .profiles
            .iter()
            .map(|p| LanguageProfile::load(p))
            .collect::<Result<Vec<_>>>()?
    };
    for lang in [&config.languages.source, &config.languages.target] {
        if !profiles.iter().any(|p| p.language() == lang.as_str()) {
            return Err(Error::Config(format!("no language profile for {lang:?}")));
        }
    }
    Ok(profiles)
}

fn load_lexicon(config: &PipelineConfig, language: &str) -> Result<AbbreviationLexicon> {
    match config.splitter.abbreviations.get(language) {
        Some(path) => AbbreviationLexicon::load(language, path),
        None => Ok(AbbreviationLexicon::bundled(language)),
    }
}

struct Doc {
    doc: TextDocument,
    record: DocumentRecord,
    sentences: Option<SentenceList>,
}

fn doc_pair_id(pair: &DocumentPair) -> String {
    pair.id()
}

/// Sentence pairs for one aligned document pair. Deletion and insertion
/// beads become pairs with one empty side, which the cleaner removes.
pub fn link_pairs(
    src: &SentenceList,
    tgt: &SentenceList,
    links: &[AlignmentLink],
    doc_pair_id: &str,
) -> Vec<SentencePair> {
    links
        .iter()
        .map(|l| {
            SentencePair::new(
                src.sentences[l.src.clone()].join(" "),
                tgt.sentences[l.tgt.clone()].join(" "),
                l.clone(),
                doc_pair_id,
            )
        })
        .collect()
}

pub fn run_pipeline(config: &PipelineConfig, stop_after: Option<Stage>) -> Result<RunOutput> {
    config.validate()?;
    let profiles = load_profiles(config)?;
    let substitutions = match &config.normalize.substitutions {
        Some(p) => load_substitutions(p)?,
        None => SubstitutionMap::new(),
    };
    let (src_lang, tgt_lang) = (
        config.languages.source.as_str(),
        config.languages.target.as_str(),
    );
    let lexicons: BTreeMap<&str, AbbreviationLexicon> = [src_lang, tgt_lang]
        .into_iter()
        .map(|l| load_lexicon(config, l).map(|lex| (l, lex)))
        .collect::<Result<_>>()?;

    let files = extract::list_input_files(&config.input_dir)?;
    if files.is_empty() {
        return Err(Error::NoDocuments(config.input_dir.clone()));
    }
    let paths = OutputPaths::new(config);
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let mut manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        config: config.clone(),
        stop_after,
        documents: Vec::new(),
        skipped: Vec::new(),
        normalization: NormalizationReport::default(),
        docalign: None,
        sentalign: None,
        clean: None,
        stats: None,
    };
    let skip = |manifest: &mut RunManifest, path: &Path, stage: Stage, reason: String| {
        warn!("skipping {} at {stage}: {reason}", path.display());
        manifest.skipped.push(SkippedDocument {
            path: path.to_path_buf(),
            stage: stage.to_string(),
            reason,
        });
    };

    // extract + normalize
    let extracted: Vec<Result<_>> = files
        .par_iter()
        .map(|f| extract::extract(f, config, &substitutions))
        .collect();
    let mut docs: Vec<Doc> = Vec::new();
    for (file, result) in files.iter().zip(extracted) {
        match result {
            Ok((doc, report)) => {
                manifest.normalization.merge(&report);
                let record = DocumentRecord {
                    doc_id: doc.doc_id.clone(),
                    path: doc.origin.path.clone(),
                    extractor: doc.origin.extractor.clone(),
                    lines: doc.lines.len(),
                    char_count: doc.char_count,
                    normalization: report,
                    language: None,
                    confidence: None,
                    split_mode: None,
                    sentences: None,
                };
                docs.push(Doc {
                    doc,
                    record,
                    sentences: None,
                });
            }
            Err(e) => skip(&mut manifest, file, Stage::Extract, e.to_string()),
        }
    }
    info!("extracted {} of {} files", docs.len(), files.len());
    if stop_after == Some(Stage::Extract) {
        for d in &docs {
            write_file(
                &paths.extracted_dir.join(format!("{}.txt", d.doc.doc_id)),
                &(d.doc.text() + "\n"),
            )?;
        }
        manifest.documents = docs.into_iter().map(|d| d.record).collect();
        write_manifest(&manifest, &paths)?;
        return Ok(RunOutput {
            corpus: None,
            manifest,
        });
    }

    // language detection
    let predictions: Vec<_> = docs
        .par_iter()
        .map(|d| {
            detect_file_with(
                &d.doc,
                &profiles,
                config.langid.head_lines,
                config.langid.stride,
            )
        })
        .collect();
    let mut kept_docs = Vec::new();
    for (mut d, pred) in docs.into_iter().zip(predictions) {
        match pred {
            Ok(p) => {
                d.record.language = Some(p.language.clone());
                d.record.confidence = Some(p.confidence);
                if p.language == src_lang || p.language == tgt_lang {
                    d.doc.language = Some(p.language);
                    kept_docs.push(d);
                } else {
                    let reason = format!(
                        "detected language {:?} is not a configured language",
                        p.language
                    );
                    skip(&mut manifest, &d.record.path, Stage::Extract, reason);
                    manifest.documents.push(d.record);
                }
            }
            Err(e) => {
                skip(
                    &mut manifest,
                    &d.record.path,
                    Stage::Extract,
                    format!("language detection: {e}"),
                );
                manifest.documents.push(d.record);
            }
        }
    }
    let mut docs = kept_docs;

    // sentence splitting
    let splits: Vec<SentenceList> = docs
        .par_iter()
        .map(|d| {
            let mode = config.split_mode(&extract::extension(&d.doc.origin.path));
            let lang = d.doc.language.as_deref().unwrap_or_default();
            split_document(&d.doc, &lexicons[lang], mode, config.splitter.pdf_options())
        })
        .collect();
    for (d, s) in docs.iter_mut().zip(splits) {
        d.record.split_mode = Some(config.split_mode(&extract::extension(&d.doc.origin.path)));
        d.record.sentences = Some(s.sentences.len());
        d.sentences = Some(s);
    }
    if stop_after == Some(Stage::Split) {
        for d in &docs {
            let s = d.sentences.as_ref().expect("split");
            let mut body = s.sentences.join("\n");
            body.push('\n');
            write_file(
                &paths.split_dir.join(format!("{}.txt", d.doc.doc_id)),
                &body,
            )?;
        }
        manifest
            .documents
            .extend(docs.into_iter().map(|d| d.record));
        manifest.documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        write_manifest(&manifest, &paths)?;
        return Ok(RunOutput {
            corpus: None,
            manifest,
        });
    }

    // document alignment
    let mut alignable = Vec::new();
    for d in docs {
        if d.sentences.as_ref().is_some_and(|s| s.sentences.is_empty()) {
            skip(
                &mut manifest,
                &d.record.path,
                Stage::Split,
                "no sentences".into(),
            );
            manifest.documents.push(d.record);
        } else {
            alignable.push(d);
        }
    }
    let docs = alignable;
    manifest
        .documents
        .extend(docs.iter().map(|d| d.record.clone()));
    manifest.documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    let by_id: BTreeMap<&str, &Doc> = docs.iter().map(|d| (d.doc.doc_id.as_str(), d)).collect();
    let sources: Vec<TextDocument> = docs
        .iter()
        .filter(|d| d.doc.language.as_deref() == Some(src_lang))
        .map(|d| d.doc.clone())
        .collect();
    let targets: Vec<TextDocument> = docs
        .iter()
        .filter(|d| d.doc.language.as_deref() == Some(tgt_lang))
        .map(|d| d.doc.clone())
        .collect();
    info!(
        "aligning {} {src_lang} and {} {tgt_lang} documents",
        sources.len(),
        targets.len()
    );
    let doc_result = align_documents(&sources, &targets, &config.docalign);

    let mut mapping = String::from("source\ttarget\tscore\tsize_ratio\titeration\n");
    for p in &doc_result.pairs {
        mapping.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            by_id[p.source_id.as_str()].doc.origin.path.display(),
            by_id[p.target_id.as_str()].doc.origin.path.display(),
            p.score,
            p.size_ratio,
            p.iteration
        ));
    }
    write_file(&paths.docalign, &mapping)?;
    manifest.docalign = Some(doc_result.clone());
    if doc_result.pairs.is_empty() {
        write_manifest(&manifest, &paths)?;
        return Err(Error::NoPairs);
    }
    if stop_after == Some(Stage::Docalign) {
        write_manifest(&manifest, &paths)?;
        return Ok(RunOutput {
            corpus: None,
            manifest,
        });
    }

    // sentence alignment
    let model: BeadCostModel = config.sentalign.model()?;
    let aligned: Vec<Result<Vec<AlignmentLink>>> = doc_result
        .pairs
        .par_iter()
        .map(|p| {
            let s = by_id[p.source_id.as_str()]
                .sentences
                .as_ref()
                .expect("split");
            let t = by_id[p.target_id.as_str()]
                .sentences
                .as_ref()
                .expect("split");
            align_sentences(s, t, &model)
        })
        .collect();
    let mut summary = SentAlignSummary::default();
    let mut dump = String::new();
    let mut pairs = Vec::new();
    for (p, links) in doc_result.pairs.iter().zip(aligned) {
        let links = links?;
        let id = doc_pair_id(p);
        for l in &links {
            dump.push_str(&id);
            dump.push('\t');
            dump.push_str(&l.dump_line());
            dump.push('\n');
            *summary.shapes.entry(l.shape().to_string()).or_insert(0) += 1;
        }
        summary.document_pairs += 1;
        summary.links += links.len();
        summary.total_cost += total_cost(&links);
        let s = by_id[p.source_id.as_str()]
            .sentences
            .as_ref()
            .expect("split");
        let t = by_id[p.target_id.as_str()]
            .sentences
            .as_ref()
            .expect("split");
        pairs.extend(link_pairs(s, t, &links, &id));
    }
    write_file(&paths.alignments, &dump)?;
    manifest.sentalign = Some(summary);
    if stop_after == Some(Stage::Sentalign) {
        write_manifest(&manifest, &paths)?;
        return Ok(RunOutput {
            corpus: None,
            manifest,
        });
    }

    // cleaning
    let params = CleanParams {
        ratio_bound: config.clean.ratio_bound,
        min_detect_chars: config.clean.min_detect_chars,
        ..CleanParams::new(src_lang, tgt_lang)
    };
    let cleaned = clean_pairs(pairs, &profiles, &params)?;
    if config.clean.write_rejects {
        write_rejects(&cleaned.rejected, &paths.rejects)?;
    }
    manifest.clean = Some(cleaned.report);
    if stop_after == Some(Stage::Clean) {
        write_manifest(&manifest, &paths)?;
        return Ok(RunOutput {
            corpus: None,
            manifest,
        });
    }

    let corpus = ParallelCorpus::new(cleaned.kept, &TokenRule::default());
    write_corpus(&corpus, &paths.corpus)?;
    manifest.stats = Some(corpus.stats.clone());
    write_manifest(&manifest, &paths)?;
    info!(
        "wrote {} sentence pairs ({} unique tokens) to {}",
        corpus.stats.line_count,
        corpus.stats.vocab_size,
        config.output_dir.display()
    );
    std::io::stderr().flush().ok();
    Ok(RunOutput {
        corpus: Some(corpus),
        manifest,
    })
}
