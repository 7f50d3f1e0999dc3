//! CMU Pronouncing Dictionary reader and alliteration/rhyme chain features.
//!
//! Only the first listed pronunciation of a word is used. Words missing from
//! the dictionary are skipped without breaking a chain.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedText;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct PronLexicon {
    entries: HashMap<String, Vec<Vec<String>>>,
}

/// `word(2)` -> `word`; anything else is returned unchanged.
fn base_word(word: &str) -> &str {
    if let Some(stem) = word.strip_suffix(')') {
        if let Some((base, n)) = stem.rsplit_once('(') {
            if !base.is_empty() && !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) {
                return base;
            }
        }
    }
    word
}

impl PronLexicon {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::resource("phonetics", format!("{}: {e}", path.display())))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Accepts both the `cmudict-0.7b` layout (`;;;` comments, upper case,
    /// two-space separator) and `cmudict.dict` (lower case, trailing `#`
    /// comments). Non-UTF-8 bytes are replaced.
    pub fn from_reader(reader: impl Read, source_name: &str) -> Result<Self> {
        let mut entries: HashMap<String, Vec<Vec<String>>> = HashMap::new();
        let mut reader = BufReader::new(reader);
        let mut raw = Vec::new();
        let mut lineno = 0usize;
        loop {
            raw.clear();
            let n = reader
                .read_until(b'\n', &mut raw)
                .map_err(|e| Error::parse(source_name, format!("line {}", lineno + 1), e.to_string()))?;
            if n == 0 {
                break;
            }
            lineno += 1;
            let line = String::from_utf8_lossy(&raw);
            if line.starts_with(";;;") {
                continue;
            }
            let line = line.split_once('#').map_or(&*line, |(l, _)| l);
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let phones: Vec<String> = fields.map(str::to_string).collect();
            if phones.is_empty() {
                return Err(Error::parse(
                    source_name,
                    format!("line {lineno}"),
                    format!("{word:?} has no phonemes"),
                ));
            }
            entries.entry(base_word(word).to_lowercase()).or_default().push(phones);
        }
        Ok(PronLexicon { entries })
    }

    /// Number of distinct base words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pronunciations(&self, word: &str) -> Option<&[Vec<String>]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn first_pronunciation(&self, word: &str) -> Option<&[String]> {
        self.pronunciations(word).and_then(|p| p.first()).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(&word.to_lowercase())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn strip_stress(phone: &str) -> &str {
    phone.trim_end_matches(|c: char| c.is_ascii_digit())
}

fn is_vowel(phone: &str) -> bool {
    phone.ends_with(|c: char| c.is_ascii_digit())
}

/// First phoneme without its stress digit.
pub fn alliteration_key(pron: &[String]) -> Option<String> {
    pron.first().map(|p| strip_stress(p).to_string())
}

/// Phonemes from the last vowel to the end, stress digits removed. `None`
/// when the pronunciation has no vowel.
pub fn rhyme_key(pron: &[String]) -> Option<String> {
    let last = pron.iter().rposition(|p| is_vowel(p))?;
    Some(
        pron[last..]
            .iter()
            .map(|p| strip_stress(p))
            .collect::<Vec<_>>()
            .join(" "),
    )
}

/// Number of maximal runs of at least two equal adjacent keys, and the
/// longest such run (0 if none).
pub fn chain_stats<K: PartialEq>(keys: &[K]) -> (usize, usize) {
    let mut count = 0;
    let mut max = 0;
    let mut start = 0;
    for i in 1..=keys.len() {
        if i == keys.len() || keys[i] != keys[start] {
            let len = i - start;
            if len >= 2 {
                count += 1;
                max = max.max(len);
            }
            start = i;
        }
    }
    (count, max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PhoneticFeatures {
    pub allit_count: usize,
    pub allit_max_len: usize,
    pub rhyme_count: usize,
    pub rhyme_max_len: usize,
}

pub fn phonetic_features(text: &TokenizedText, lex: &PronLexicon) -> PhoneticFeatures {
    let prons: Vec<&[String]> = text.tokens.iter().filter_map(|t| lex.first_pronunciation(t)).collect();
    let allit: Vec<String> = prons.iter().filter_map(|p| alliteration_key(p)).collect();
    // vowel-less entries (e.g. "hmm" -> HH M) have no rime and are skipped
    let rhyme: Vec<String> = prons.iter().filter_map(|p| rhyme_key(p)).collect();
    let (allit_count, allit_max_len) = chain_stats(&allit);
    let (rhyme_count, rhyme_max_len) = chain_stats(&rhyme);
    PhoneticFeatures {
        allit_count,
        allit_max_len,
        rhyme_count,
        rhyme_max_len,
    }
}
