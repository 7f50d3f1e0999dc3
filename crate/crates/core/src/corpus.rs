//! Dataset ingestion, tokenization and seeded train/validation splitting.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: usize,
    pub text: String,
    /// 1 = humorous, 0 = not.
    pub label: u8,
    pub embedding: Option<Vec<f64>>,
}

/// Column names of the text and label fields in a dataset CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub text_column: String,
    pub label_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            text_column: "text".into(),
            label_column: "humor".into(),
        }
    }
}

impl CsvSchema {
    pub fn new(text_column: impl Into<String>, label_column: impl Into<String>) -> Self {
        CsvSchema {
            text_column: text_column.into(),
            label_column: label_column.into(),
        }
    }
}

/// A sentence after punctuation stripping and whitespace splitting.
///
/// `tokens` is the lowercase stream used for every lexical lookup; `surface`
/// keeps the original casing position-for-position and only feeds the tagger.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
    pub surface: Vec<String>,
    pub original: String,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Builds a tokenized text from already-split surface tokens.
    pub fn from_surface<S: AsRef<str>>(surface: &[S]) -> Self {
        let surface: Vec<String> = surface.iter().map(|s| s.as_ref().to_string()).collect();
        TokenizedText {
            tokens: surface.iter().map(|s| s.to_lowercase()).collect(),
            original: surface.join(" "),
            surface,
        }
    }
}

/// Removes ASCII punctuation. Non-ASCII punctuation is kept.
pub fn strip_punctuation(s: &str) -> String {
    s.chars().filter(|c| !c.is_ascii_punctuation()).collect()
}

pub fn tokenize(text: &str) -> TokenizedText {
    let stripped = strip_punctuation(text);
    let surface: Vec<String> = stripped.split_whitespace().map(str::to_string).collect();
    TokenizedText {
        tokens: surface.iter().map(|s| s.to_lowercase()).collect(),
        surface,
        original: text.to_string(),
    }
}

fn parse_label(raw: &str, row: usize) -> Result<u8> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(1),
        "0" | "false" => Ok(0),
        other => Err(Error::Value(format!(
            "row {row}: label {other:?} is not binary (expected 0/1 or true/false)"
        ))),
    }
}

/// Reads a whitespace-separated vector per line. Blank lines are ignored.
pub fn load_embedding_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut dim = None;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| {
                Error::parse(
                    path.display().to_string(),
                    format!("line {}", lineno + 1),
                    e.to_string(),
                )
            })?;
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Value(format!("line {}: non-finite value {bad}", lineno + 1)));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Shape(format!(
                    "line {}: embedding has {} values, expected {d}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_dataset(path: &Path, schema: &CsvSchema, embedding_path: Option<&Path>) -> Result<Vec<Example>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Schema(format!("{}: {other:?}", path.display())),
        })?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column {name:?}", path.display())))
    };
    let text_idx = find(&schema.text_column)?;
    let label_idx = find(&schema.label_column)?;

    let mut examples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let text = record
            .get(text_idx)
            .ok_or_else(|| Error::Schema(format!("row {row}: missing text field")))?;
        let label = record
            .get(label_idx)
            .ok_or_else(|| Error::Schema(format!("row {row}: missing label field")))?;
        examples.push(Example {
            id: row,
            text: text.to_string(),
            label: parse_label(label, row)?,
            embedding: None,
        });
    }

    if let Some(emb_path) = embedding_path {
        let rows = load_embedding_rows(emb_path)?;
        if rows.len() != examples.len() {
            return Err(Error::Alignment(format!(
                "{} has {} vectors but {} has {} rows",
                emb_path.display(),
                rows.len(),
                path.display(),
                examples.len()
            )));
        }
        for (ex, v) in examples.iter_mut().zip(rows) {
            ex.embedding = Some(v);
        }
    }
    Ok(examples)
}

/// Writes examples back out; embeddings (if any) go to `embedding_path`.
pub fn write_dataset(
    path: &Path,
    examples: &[Example],
    schema: &CsvSchema,
    embedding_path: Option<&Path>,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([schema.text_column.as_str(), schema.label_column.as_str()])?;
    for ex in examples {
        writer.write_record([ex.text.as_str(), if ex.label == 1 { "1" } else { "0" }])?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;

    if let Some(emb_path) = embedding_path {
        let file = File::create(emb_path).map_err(|e| Error::io(emb_path, e))?;
        let mut out = BufWriter::new(file);
        for ex in examples {
            let v = ex
                .embedding
                .as_ref()
                .ok_or_else(|| Error::Alignment(format!("example {} has no embedding", ex.id)))?;
            let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).map_err(|e| Error::io(emb_path, e))?;
        }
        out.flush().map_err(|e| Error::io(emb_path, e))?;
    }
    Ok(())
}

/// Seeded partition of `0..n` into (train, validation) index lists.
///
/// The validation size is `round(n * val_fraction)` clamped to `1..=n-1`.
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 examples to split, got {n}")));
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "val_fraction must be in (0,1), got {val_fraction}"
        )));
    }
    let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let val = order[..n_val].to_vec();
    let train = order[n_val..].to_vec();
    Ok((train, val))
}

pub fn split(examples: &[Example], val_fraction: f64, seed: u64) -> Result<(Vec<Example>, Vec<Example>)> {
    let (train, val) = split_indices(examples.len(), val_fraction, seed)?;
    Ok((
        train.into_iter().map(|i| examples[i].clone()).collect(),
        val.into_iter().map(|i| examples[i].clone()).collect(),
    ))
}
