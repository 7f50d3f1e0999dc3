//! Word-embedding tables (word2vec text/binary) and the two incongruity
//! features: the largest and smallest cosine distance between content words.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphy::Pos;
use crate::postag::TaggedSentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

impl EmbeddingFormat {
    /// `.bin` files are binary, everything else is text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => EmbeddingFormat::Binary,
            _ => EmbeddingFormat::Text,
        }
    }
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(EmbeddingFormat::Text),
            "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            other => Err(Error::Argument(format!("unknown embedding format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    norms: Vec<f64>,
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Adds a vector. Zero-norm vectors are rejected with `Ok(false)`;
    /// a repeated word keeps its first vector.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector for {word:?} has {} values, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Value(format!("vector for {word:?} is not finite")));
        }
        let n = norm(vector);
        if n == 0.0 {
            return Ok(false);
        }
        if self.index.contains_key(word) {
            warn!("duplicate embedding for {word:?}; keeping the first");
            return Ok(true);
        }
        self.index.insert(word.to_string(), self.norms.len());
        self.vectors.extend_from_slice(vector);
        self.norms.push(n);
        Ok(true)
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// `1 - cos(u, v)` for two in-vocabulary words, clamped to `[0, 2]`.
    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        Some(self.distance_by_index(i, j))
    }

    fn distance_by_index(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let u = &self.vectors[i * self.dim..(i + 1) * self.dim];
        let v = &self.vectors[j * self.dim..(j + 1) * self.dim];
        let dot: f64 = u.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
        (1.0 - dot / (self.norms[i] * self.norms[j])).clamp(0.0, 2.0)
    }

    pub fn load(path: &Path, format: EmbeddingFormat) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let reader = BufReader::with_capacity(1 << 20, file);
        match format {
            EmbeddingFormat::Text => Self::from_text_reader(reader, &name),
            EmbeddingFormat::Binary => Self::from_binary_reader(reader, &name),
        }
    }

    fn parse_header(line: &str, name: &str) -> Result<(usize, usize)> {
        let bad = || Error::parse(name, "header", format!("expected \"count dim\", got {line:?}"));
        let mut it = line.split_whitespace();
        let count = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let dim: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() || dim == 0 {
            return Err(bad());
        }
        Ok((count, dim))
    }

    /// `count dim` header, then one `word v1 .. vd` line per entry.
    pub fn from_text_reader(reader: impl BufRead, name: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|e| Error::parse(name, "header", e.to_string()))?,
            None => return Err(Error::parse(name, "header", "empty file")),
        };
        let (count, dim) = Self::parse_header(&header, name)?;
        let mut table = EmbeddingTable::new(dim);
        let mut rows = 0usize;
        let mut dropped = 0usize;
        let mut buf = Vec::with_capacity(dim);
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse(name, format!("line {lineno}"), e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            if rows == count {
                return Err(Error::parse(
                    name,
                    format!("line {lineno}"),
                    format!("more than {count} rows"),
                ));
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields.next().unwrap_or_default();
            buf.clear();
            for f in fields {
                let x: f32 = f
                    .parse()
                    .map_err(|_| Error::parse(name, format!("line {lineno}"), format!("bad number {f:?}")))?;
                buf.push(x);
            }
            if buf.len() != dim {
                return Err(Error::parse(
                    name,
                    format!("line {lineno}"),
                    format!("{} values, expected {dim}", buf.len()),
                ));
            }
            if !table
                .insert(word, &buf)
                .map_err(|e| Error::parse(name, format!("line {lineno}"), e.to_string()))?
            {
                dropped += 1;
            }
            rows += 1;
        }
        if rows != count {
            return Err(Error::parse(
                name,
                "end of file",
                format!("header promises {count} rows, found {rows}"),
            ));
        }
        if dropped > 0 {
            warn!("{name}: dropped {dropped} zero-norm vectors");
        }
        Ok(table)
    }

    /// word2vec binary layout: ASCII `count dim\n` header, then per entry the
    /// word terminated by a space followed by `dim` little-endian `f32`s.
    /// Newlines between entries are skipped.
    pub fn from_binary_reader(mut reader: impl BufRead, name: &str) -> Result<Self> {
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| Error::parse(name, "header", e.to_string()))?;
        let (count, dim) = Self::parse_header(header.trim_end(), name)?;
        let mut table = EmbeddingTable::new(dim);
        let mut word = Vec::new();
        let mut raw = vec![0u8; dim * 4];
        let mut vec = vec![0f32; dim];
        let mut dropped = 0usize;
        for entry in 0..count {
            let truncated = || Error::parse(name, format!("entry {entry}"), "truncated file");
            word.clear();
            loop {
                let mut byte = [0u8; 1];
                match reader.read(&mut byte) {
                    Ok(0) => return Err(truncated()),
                    Ok(_) => match byte[0] {
                        b' ' => break,
                        b'\n' | b'\r' if word.is_empty() => continue,
                        b => word.push(b),
                    },
                    Err(e) => return Err(Error::parse(name, format!("entry {entry}"), e.to_string())),
                }
            }
            reader.read_exact(&mut raw).map_err(|_| truncated())?;
            for (x, chunk) in vec.iter_mut().zip(raw.chunks_exact(4)) {
                *x = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
            let w = String::from_utf8_lossy(&word);
            if !table
                .insert(&w, &vec)
                .map_err(|e| Error::parse(name, format!("entry {entry}"), e.to_string()))?
            {
                dropped += 1;
            }
        }
        if dropped > 0 {
            warn!("{name}: dropped {dropped} zero-norm vectors");
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IncongruityFeatures {
    /// Largest pairwise cosine distance between content words.
    pub disconnection: f64,
    /// Smallest pairwise cosine distance between content words.
    pub repetition: f64,
}

/// Content words are NN*/VB*/JJ*/RB* tokens whose lowercase form is in the
/// table. Repeated words at different positions are distinct pair members.
pub fn incongruity(sentence: &TaggedSentence, table: &EmbeddingTable) -> IncongruityFeatures {
    let ids: Vec<usize> = sentence
        .tokens
        .iter()
        .zip(&sentence.tags)
        .filter(|(_, t)| Pos::from_ptb(t).is_some())
        .filter_map(|(w, _)| table.index.get(&w.to_lowercase()).copied())
        .collect();
    if ids.len() < 2 {
        return IncongruityFeatures::default();
    }
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (a, &i) in ids.iter().enumerate() {
        for &j in &ids[a + 1..] {
            let d = table.distance_by_index(i, j);
            hi = hi.max(d);
            lo = lo.min(d);
        }
    }
    IncongruityFeatures {
        disconnection: hi,
        repetition: lo,
    }
}
