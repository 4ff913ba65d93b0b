use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clean::{DEFAULT_MIN_DETECT_CHARS, DEFAULT_RATIO_BOUND};
use crate::docalign::DocAlignParams;
use crate::error::{Error, Result};
use crate::langid::{HEAD_LINES, SAMPLE_STRIDE};
use crate::sentalign::{
    BeadCostModel, BeadShape, DEFAULT_MEAN_RATIO, DEFAULT_PRIORS, DEFAULT_VARIANCE,
    TWO_TO_TWO_PRIOR,
};
use crate::split::{PdfOptions, SplitMode};

/// Pipeline configuration, read from TOML.
///
/// Relative paths are resolved against the directory holding the config
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_corpus_name")]
    pub corpus_name: String,
    pub languages: Languages,
    /// File extension (lowercase, no dot) to command template. `{input}` in
    /// any argument is replaced by the file path; the command must write
    /// UTF-8 text to stdout.
    #[serde(default)]
    pub extractors: BTreeMap<String, String>,
    /// File extension to splitter mode. Unlisted extensions use `pdf` for
    /// `.pdf` files and `editable` otherwise.
    #[serde(default)]
    pub split_modes: BTreeMap<String, SplitMode>,
    #[serde(default)]
    pub normalize: NormalizeConfig,
    #[serde(default)]
    pub langid: LangIdConfig,
    #[serde(default)]
    pub splitter: SplitterConfig,
    #[serde(default)]
    pub docalign: DocAlignParams,
    #[serde(default)]
    pub sentalign: SentAlignConfig,
    #[serde(default)]
    pub clean: CleanConfig,
}

fn default_corpus_name() -> String {
    "corpus".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Languages {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeConfig {
    /// Hex code point substitution table.
    pub substitutions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LangIdConfig {
    /// Profile files; empty means the bundled English and Irish profiles.
    pub profiles: Vec<PathBuf>,
    pub head_lines: usize,
    pub stride: usize,
}

impl Default for LangIdConfig {
    fn default() -> Self {
        LangIdConfig {
            profiles: Vec::new(),
            head_lines: HEAD_LINES,
            stride: SAMPLE_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitterConfig {
    /// Language code to abbreviation list; unlisted languages use the
    /// bundled list when there is one.
    pub abbreviations: BTreeMap<String, PathBuf>,
    pub dehyphenate: bool,
}

impl Default for SplitterConfig {
    fn default() -> Self {
        SplitterConfig {
            abbreviations: BTreeMap::new(),
            dehyphenate: PdfOptions::default().dehyphenate,
        }
    }
}

impl SplitterConfig {
    pub fn pdf_options(&self) -> PdfOptions {
        PdfOptions {
            dehyphenate: self.dehyphenate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentAlignConfig {
    pub mean_ratio: f64,
    pub variance: f64,
    /// Bead shape (`"1-2"`) to prior probability. Empty means the defaults.
    pub priors: BTreeMap<BeadShape, f64>,
    pub allow_two_to_two: bool,
}

impl Default for SentAlignConfig {
    fn default() -> Self {
        SentAlignConfig {
            mean_ratio: DEFAULT_MEAN_RATIO,
            variance: DEFAULT_VARIANCE,
            priors: BTreeMap::new(),
            allow_two_to_two: false,
        }
    }
}

impl SentAlignConfig {
    pub fn model(&self) -> Result<BeadCostModel> {
        let mut priors: BTreeMap<BeadShape, f64> = if self.priors.is_empty() {
            DEFAULT_PRIORS.iter().copied().collect()
        } else {
            self.priors.clone()
        };
        let two = BeadShape::new(2, 2);
        if self.allow_two_to_two {
            if let std::collections::btree_map::Entry::Vacant(e) = priors.entry(two) {
                e.insert(TWO_TO_TWO_PRIOR);
                let total: f64 = priors.values().sum();
                priors.values_mut().for_each(|p| *p /= total);
            }
        } else if priors.contains_key(&two) {
            return Err(Error::Config(
                "2-2 prior given but allow_two_to_two is false".into(),
            ));
        }
        BeadCostModel::new(priors, self.mean_ratio, self.variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub ratio_bound: f64,
    pub min_detect_chars: usize,
    pub write_rejects: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            ratio_bound: DEFAULT_RATIO_BOUND,
            min_detect_chars: DEFAULT_MIN_DETECT_CHARS,
            write_rejects: true,
        }
    }
}

impl PipelineConfig {
    /// Minimal configuration with every default.
    pub fn new(
        input_dir: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
        source: &str,
        target: &str,
    ) -> Self {
        PipelineConfig {
            input_dir: input_dir.into(),
            output_dir: output_dir.into(),
            corpus_name: default_corpus_name(),
            languages: Languages {
                source: source.to_string(),
                target: target.to_string(),
            },
            extractors: BTreeMap::new(),
            split_modes: BTreeMap::new(),
            normalize: NormalizeConfig::default(),
            langid: LangIdConfig::default(),
            splitter: SplitterConfig::default(),
            docalign: DocAlignParams::default(),
            sentalign: SentAlignConfig::default(),
            clean: CleanConfig::default(),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialize")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input_dir);
        fix(&mut self.output_dir);
        if let Some(p) = self.normalize.substitutions.as_mut() {
            fix(p);
        }
        self.langid.profiles.iter_mut().for_each(fix);
        self.splitter.abbreviations.values_mut().for_each(fix);
    }

    pub fn split_mode(&self, extension: &str) -> SplitMode {
        match self.split_modes.get(extension) {
            Some(&mode) => mode,
            None if extension == "pdf" => SplitMode::Pdf,
            None => SplitMode::Editable,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.languages.source == self.languages.target {
            return err("source and target languages must differ".into());
        }
        if !self.input_dir.is_dir() {
            return err(format!(
                "input directory {} does not exist",
                self.input_dir.display()
            ));
        }
        if self.corpus_name.is_empty() || self.corpus_name.contains(['/', '\\']) {
            return err(format!("invalid corpus name {:?}", self.corpus_name));
        }
        let d = &self.docalign;
        if !(d.min_ratio > 0.0 && d.min_ratio <= d.max_ratio) {
            return err(format!(
                "invalid size ratio bounds [{}, {}]",
                d.min_ratio, d.max_ratio
            ));
        }
        if !(0.0..=1.0).contains(&d.threshold) {
            return err(format!(
                "document score threshold {} is outside [0, 1]",
                d.threshold
            ));
        }
        if d.max_iter == 0 {
            return err("docalign.max_iter must be at least 1".into());
        }
        if self.langid.head_lines == 0 && self.langid.stride == 0 {
            return err("language detection samples no lines".into());
        }
        if self.clean.ratio_bound.is_nan() || self.clean.ratio_bound < 1.0 {
            return err(format!(
                "clean.ratio_bound must be at least 1, got {}",
                self.clean.ratio_bound
            ));
        }
        self.sentalign.model()?;
        for (ext, cmd) in &self.extractors {
            if cmd.split_whitespace().next().is_none() {
                return err(format!("empty extractor command for .{ext}"));
            }
        }
        let mut files: Vec<&PathBuf> = self.langid.profiles.iter().collect();
        files.extend(self.splitter.abbreviations.values());
        files.extend(self.normalize.substitutions.iter());
        if let Some(missing) = files.into_iter().find(|p| !p.is_file()) {
            return err(format!("{} does not exist", missing.display()));
        }
        Ok(())
    }
}
