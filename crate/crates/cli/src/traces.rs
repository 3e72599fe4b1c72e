//! Per-model JSONL traces: one object per prompt, either
//! `{"prompt_id": .., "token": ..}` or `{"prompt_id": .., "embedding": [..]}`.
//! The model id is the file stem.

use std::fs;
use std::path::Path;

use mps_core::{ModelTrace, TraceBundle};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    prompt_id: String,
    #[serde(default)]
    token: Option<u64>,
    #[serde(default)]
    embedding: Option<Vec<f64>>,
}

/// A parsed trace and the prompt ids in file order, each with its line number.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTrace {
    pub trace: ModelTrace,
    pub prompts: Vec<(String, u64)>,
}

pub fn read_trace(path: &Path) -> Result<LoadedTrace> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let model_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::parse(path, None, "cannot derive a model id from the file name"))?
        .to_string();
    parse_trace(path, &model_id, &text)
}

pub fn parse_trace(path: &Path, model_id: &str, text: &str) -> Result<LoadedTrace> {
    let mut prompts: Vec<(String, u64)> = Vec::new();
    let mut tokens = Vec::new();
    let mut embeddings = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw)
            .map_err(|e| CliError::parse(path, Some(line_no), e.to_string()))?;
        if !seen.insert(line.prompt_id.clone()) {
            return Err(CliError::parse(
                path,
                Some(line_no),
                format!("duplicate prompt_id `{}`", line.prompt_id),
            ));
        }
        match (line.token, line.embedding) {
            (Some(t), None) if embeddings.is_empty() => tokens.push(t),
            (None, Some(e)) if tokens.is_empty() => embeddings.push(e),
            (Some(_), Some(_)) | (None, None) => {
                return Err(CliError::parse(
                    path,
                    Some(line_no),
                    "each line needs exactly one of `token` or `embedding`",
                ))
            }
            _ => {
                return Err(CliError::parse(
                    path,
                    Some(line_no),
                    "mixes token and embedding lines",
                ))
            }
        }
        prompts.push((line.prompt_id, line_no));
    }
    if prompts.is_empty() {
        return Err(CliError::parse(path, None, "no trace records"));
    }
    let trace = if embeddings.is_empty() {
        ModelTrace::tokens(model_id, tokens)
    } else {
        ModelTrace::embeddings(model_id, embeddings)?
    };
    Ok(LoadedTrace { trace, prompts })
}

/// Loads a target and its candidates, requiring every file to list the same
/// prompt ids in the same order.
pub fn load_bundle(
    target: &Path,
    candidates: &[impl AsRef<Path>],
) -> Result<(TraceBundle, Vec<String>)> {
    let t = read_trace(target)?;
    let mut traces = Vec::with_capacity(candidates.len());
    for path in candidates {
        let path = path.as_ref();
        let c = read_trace(path)?;
        check_alignment(&t, target, &c, path)?;
        traces.push(c.trace);
    }
    let prompt_ids = t.prompts.into_iter().map(|(id, _)| id).collect();
    Ok((TraceBundle::new(t.trace, traces)?, prompt_ids))
}

fn check_alignment(
    reference: &LoadedTrace,
    ref_path: &Path,
    other: &LoadedTrace,
    path: &Path,
) -> Result<()> {
    for (k, (id, line)) in other.prompts.iter().enumerate() {
        match reference.prompts.get(k) {
            Some((want, _)) if want == id => {}
            Some((want, _)) => {
                return Err(CliError::parse(
                    path,
                    Some(*line),
                    format!(
                        "prompt_id `{id}` does not match `{want}` in {}",
                        ref_path.display()
                    ),
                ))
            }
            None => {
                return Err(CliError::parse(
                    path,
                    Some(*line),
                    format!("extra prompt `{id}` not in {}", ref_path.display()),
                ))
            }
        }
    }
    if other.prompts.len() < reference.prompts.len() {
        let (missing, _) = &reference.prompts[other.prompts.len()];
        return Err(CliError::parse(
            path,
            None,
            format!("missing prompt `{missing}`"),
        ));
    }
    Ok(())
}
