use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::corpus::{Origin, TextDocument};
use crate::error::{Error, Result};
use crate::normalize::{normalize_text, NormalizationReport, SubstitutionMap};

use super::config::PipelineConfig;

pub const PLAIN_EXTRACTOR: &str = "plain";
const PLAIN_EXTENSIONS: &[&str] = &["txt", "text"];

/// Lowercased extension of `path`, or an empty string.
pub fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_lowercase)
        .unwrap_or_default()
}

/// Every non-hidden file under `dir`, recursively, in sorted order.
pub fn list_input_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&d, e))?;
            let path = entry.path();
            if entry.file_name().to_string_lossy().starts_with('.') {
                continue;
            }
            if path.is_dir() {
                stack.push(path);
            } else if path.is_file() {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Document id: the path relative to the input directory, `/`-separated.
pub fn doc_id(input_dir: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(input_dir).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn run_command(template: &str, path: &Path) -> Result<Vec<u8>> {
    let input = path.to_string_lossy();
    let argv: Vec<String> = template
        .split_whitespace()
        .map(|a| a.replace("{input}", &input))
        .collect();
    let (program, args) = argv.split_first().ok_or_else(|| Error::Extract {
        path: path.to_path_buf(),
        msg: "empty extractor command".into(),
    })?;
    let output = Command::new(program)
        .args(args)
        .output()
        .map_err(|e| Error::Extract {
            path: path.to_path_buf(),
            msg: format!("cannot run {program}: {e}"),
        })?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        return Err(Error::Extract {
            path: path.to_path_buf(),
            msg: format!("{program} exited with {}: {}", output.status, stderr.trim()),
        });
    }
    Ok(output.stdout)
}

/// Raw text of `path` and the extractor tag that produced it.
pub fn extract_raw(path: &Path, config: &PipelineConfig) -> Result<(String, String)> {
    let ext = extension(path);
    let (bytes, tag) = if let Some(template) = config.extractors.get(&ext) {
        let tag = template
            .split_whitespace()
            .next()
            .unwrap_or_default()
            .to_string();
        (run_command(template, path)?, tag)
    } else if PLAIN_EXTENSIONS.contains(&ext.as_str()) {
        (
            fs::read(path).map_err(|e| Error::io(path, e))?,
            PLAIN_EXTRACTOR.to_string(),
        )
    } else {
        return Err(Error::Extract {
            path: path.to_path_buf(),
            msg: format!("no extractor configured for {:?} files", ext),
        });
    };
    let text = String::from_utf8(bytes).map_err(|e| Error::Extract {
        path: path.to_path_buf(),
        msg: format!("output is not valid UTF-8: {e}"),
    })?;
    Ok((text, tag))
}

/// Extracts and normalizes one input file.
pub fn extract(
    path: &Path,
    config: &PipelineConfig,
    substitutions: &SubstitutionMap,
) -> Result<(TextDocument, NormalizationReport)> {
    let (raw, tag) = extract_raw(path, config)?;
    let (text, report) = normalize_text(&raw, substitutions);
    let doc = TextDocument::from_text(
        doc_id(&config.input_dir, path),
        &text,
        Origin {
            path: path.to_path_buf(),
            extractor: tag,
        },
    );
    Ok((doc, report))
}
