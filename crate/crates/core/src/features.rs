//! The canonical 33-feature vector and feature-matrix CSV files.
//!
//! | columns | group       | source                                      |
//! |---------|-------------|---------------------------------------------|
//! | 0..10   | `nrclex`    | emotion counts                              |
//! | 10..24  | `syntactic` | chunk statistics                            |
//! | 24..33  | `semantic`  | incongruity, ambiguity, alliteration, rhyme |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::chunker::{sse_features, Chunker};
use crate::corpus::{tokenize, Example, TokenizedText};
use crate::distsem::{incongruity, EmbeddingTable};
use crate::emolex::EmoLex;
use crate::error::{Error, Result};
use crate::models::Matrix;
use crate::phonetics::{phonetic_features, PronLexicon};
use crate::postag::{parse_pretagged, TaggedSentence, TaggerModel};
use crate::wordnet::{ambiguity_features, WordnetGraph, DEFAULT_SENSE_CAP};

pub const N_FEATURES: usize = 33;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "fear",
    "anger",
    "anticipation",
    "trust",
    "surprise",
    "positive",
    "negative",
    "sadness",
    "disgust",
    "joy",
    "np_count",
    "vp_count",
    "pp_count",
    "sbar_count",
    "lr_np",
    "lr_vp",
    "lr_pp",
    "apl1_np",
    "apl1_vp",
    "apl1_pp",
    "apl2_np",
    "apl2_vp",
    "apl2_pp",
    "rp_nv",
    "disconnection",
    "repetition",
    "sense_combination",
    "sense_farmost",
    "sense_closest",
    "allit_count",
    "allit_max_len",
    "rhyme_count",
    "rhyme_max_len",
];

pub type FeatureVector33 = [f64; N_FEATURES];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureGroup {
    Nrclex,
    Syntactic,
    Semantic,
    Combined,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 4] = [
        FeatureGroup::Nrclex,
        FeatureGroup::Syntactic,
        FeatureGroup::Semantic,
        FeatureGroup::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Nrclex => "nrclex",
            FeatureGroup::Syntactic => "syntactic",
            FeatureGroup::Semantic => "semantic",
            FeatureGroup::Combined => "combined",
        }
    }

    pub fn range(self) -> Range<usize> {
        match self {
            FeatureGroup::Nrclex => 0..10,
            FeatureGroup::Syntactic => 10..24,
            FeatureGroup::Semantic => 24..33,
            FeatureGroup::Combined => 0..33,
        }
    }

    pub fn columns(self) -> Vec<usize> {
        self.range().collect()
    }

    pub fn names(self) -> Vec<String> {
        FEATURE_NAMES[self.range()].iter().map(|s| s.to_string()).collect()
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureGroup::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| {
            Error::Argument(format!(
                "unknown feature group {s:?} (nrclex, syntactic, semantic, combined)"
            ))
        })
    }
}

/// Loaded resources. Any of them may be absent; featurization fails with a
/// resource error naming the first missing module.
#[derive(Debug, Default)]
pub struct Resources {
    pub emolex: Option<EmoLex>,
    pub tagger: Option<TaggerModel>,
    pub chunker: Chunker,
    pub embeddings: Option<EmbeddingTable>,
    pub wordnet: Option<WordnetGraph>,
    pub pronunciations: Option<PronLexicon>,
    pub sense_cap: usize,
}

impl Resources {
    pub fn new() -> Self {
        Resources {
            sense_cap: DEFAULT_SENSE_CAP,
            ..Default::default()
        }
    }

    /// Checks every resource needed for featurization. The tagger is only
    /// needed for raw (untagged) input.
    pub fn check(&self, pretagged: bool) -> Result<()> {
        fn need<T>(r: &Option<T>, module: &'static str) -> Result<()> {
            match r {
                Some(_) => Ok(()),
                None => Err(Error::resource(module, "resource not loaded")),
            }
        }
        need(&self.emolex, "emolex")?;
        if !pretagged {
            need(&self.tagger, "postag")?;
        }
        need(&self.embeddings, "distsem")?;
        need(&self.wordnet, "wordnet")?;
        need(&self.pronunciations, "phonetics")
    }
}

fn missing(module: &'static str) -> Error {
    Error::resource(module, "resource not loaded")
}

/// Features for a tokenized sentence and its tagging (aligned position for
/// position).
pub fn featurize_tagged(text: &TokenizedText, tagged: &TaggedSentence, res: &Resources) -> Result<FeatureVector33> {
    let emolex = res.emolex.as_ref().ok_or_else(|| missing("emolex"))?;
    let emb = res.embeddings.as_ref().ok_or_else(|| missing("distsem"))?;
    let wn = res.wordnet.as_ref().ok_or_else(|| missing("wordnet"))?;
    let pron = res.pronunciations.as_ref().ok_or_else(|| missing("phonetics"))?;
    if text.len() != tagged.len() {
        return Err(Error::Alignment(format!(
            "{} tokens but {} tags",
            text.len(),
            tagged.len()
        )));
    }
    let mut out = [0.0; N_FEATURES];
    out[..10].copy_from_slice(&emolex.emotion_features(text).as_f64());
    let tree = res.chunker.chunk(tagged);
    out[10..24].copy_from_slice(&sse_features(&tree, tagged.len()).to_array());
    let inc = incongruity(tagged, emb);
    let amb = ambiguity_features(tagged, wn, res.sense_cap);
    let ph = phonetic_features(text, pron);
    out[24..].copy_from_slice(&[
        inc.disconnection,
        inc.repetition,
        amb.sense_combination,
        amb.sense_farmost,
        amb.sense_closest,
        ph.allit_count as f64,
        ph.allit_max_len as f64,
        ph.rhyme_count as f64,
        ph.rhyme_max_len as f64,
    ]);
    Ok(out)
}

/// Raw text: tokenize, tag, then [`featurize_tagged`].
pub fn featurize_text(text: &str, res: &Resources) -> Result<FeatureVector33> {
    let tokens = tokenize(text);
    let tagger = res.tagger.as_ref().ok_or_else(|| missing("postag"))?;
    let tagged = tagger.tag(&tokens);
    featurize_tagged(&tokens, &tagged, res)
}

/// Pre-tagged `token/TAG ...` text. Tokens are taken as given.
pub fn featurize_pretagged(line: &str, res: &Resources) -> Result<FeatureVector33> {
    let tagged = parse_pretagged(line)?;
    let text = TokenizedText::from_surface(&tagged.tokens);
    featurize_tagged(&text, &tagged, res)
}

pub fn featurize(example: &Example, res: &Resources, pretagged: bool) -> Result<FeatureVector33> {
    let r = if pretagged {
        featurize_pretagged(&example.text, res)
    } else {
        featurize_text(&example.text, res)
    };
    r.map_err(|e| Error::Example {
        id: example.id,
        source: Box::new(e),
    })
}

/// Feature rows with their labels, in example order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub rows: Vec<FeatureVector33>,
    pub labels: Vec<u8>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn matrix(&self, group: FeatureGroup) -> Matrix {
        let range = group.range();
        let data = self
            .rows
            .iter()
            .flat_map(|r| r[range.clone()].iter().copied())
            .collect();
        Matrix::new(self.rows.len(), range.len(), data).expect("rows have fixed width")
    }

    pub fn select(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Header of the 33 names plus `label`; values in shortest round-trip form.
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{},label", FEATURE_NAMES.join(","))?;
        let mut line = String::new();
        for (row, label) in self.rows.iter().zip(&self.labels) {
            line.clear();
            for v in row {
                line.push_str(&v.to_string());
                line.push(',');
            }
            line.push_str(&label.to_string());
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(file)
    }

    pub fn read_from(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Schema(format!(
                "feature CSV header does not match the canonical 33 names + label (got {} columns)",
                header.len()
            )));
        }
        let mut table = FeatureTable::default();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row_no = i + 1;
            let mut row = [0.0; N_FEATURES];
            for (j, slot) in row.iter_mut().enumerate() {
                let v: f64 = rec[j].parse().map_err(|_| {
                    Error::Value(format!(
                        "row {row_no}, column {}: {:?} is not a number",
                        FEATURE_NAMES[j], &rec[j]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::Value(format!(
                        "row {row_no}, column {}: non-finite value",
                        FEATURE_NAMES[j]
                    )));
                }
                *slot = v;
            }
            let label = match rec[N_FEATURES].trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::Value(format!("row {row_no}: label {other:?} is not 0/1"))),
            };
            table.rows.push(row);
            table.labels.push(label);
        }
        Ok(table)
    }
}

/// Featurizes every example on a pool of `jobs` threads. Rows come back in
/// example order; on failure the error of the lowest-index failing example is
/// returned, so the outcome does not depend on `jobs`.
pub fn featurize_dataset(examples: &[Example], res: &Resources, jobs: usize, pretagged: bool) -> Result<FeatureTable> {
    res.check(pretagged)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Argument(format!("cannot start {jobs} worker threads: {e}")))?;
    let rows: Vec<Result<FeatureVector33>> =
        pool.install(|| examples.par_iter().map(|ex| featurize(ex, res, pretagged)).collect());
    let mut table = FeatureTable::default();
    for (ex, row) in examples.iter().zip(rows) {
        table.rows.push(row?);
        table.labels.push(ex.label);
    }
    Ok(table)
}
