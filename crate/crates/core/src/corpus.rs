//! Passage loading.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Passage {
    pub id: String,
    pub text: String,
}

/// Loads passages from a directory of `.txt` files (sorted by file name, id =
/// file stem), a single `.txt` file, or a JSONL file whose lines carry a
/// `"text"` field and optionally an `"id"`.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Passage>> {
    let path = path.as_ref();
    let unavailable = |e: std::io::Error| Error::SourceUnavailable(format!("{}: {e}", path.display()));
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(unavailable)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        let passages = files.iter().map(|f| load_text_file(f)).collect::<Result<Vec<_>>>()?;
        if passages.is_empty() {
            return Err(Error::SourceUnavailable(format!("{}: no .txt passages", path.display())));
        }
        return Ok(passages);
    }
    if path.extension().is_some_and(|x| x == "jsonl") {
        let text = std::fs::read_to_string(path).map_err(unavailable)?;
        return parse_jsonl(&text);
    }
    Ok(vec![load_text_file(path)?])
}

fn load_text_file(path: &Path) -> Result<Passage> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::SourceUnavailable(format!("{}: {e}", path.display())))?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Passage { id, text })
}

/// Parses JSONL passages; blank lines are skipped and missing ids become the line number.
pub fn parse_jsonl(text: &str) -> Result<Vec<Passage>> {
    #[derive(Deserialize)]
    struct Line {
        text: String,
        #[serde(default)]
        id: Option<serde_json::Value>,
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: Line = serde_json::from_str(line).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        let id = match l.id {
            Some(serde_json::Value::String(s)) => s,
            Some(v) => v.to_string(),
            None => format!("{}", i + 1),
        };
        out.push(Passage { id, text: l.text });
    }
    Ok(out)
}
