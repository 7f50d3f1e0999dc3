//! Greedy averaged-perceptron part-of-speech tagger (Penn Treebank tags).
//!
//! Training follows the usual recipe: the tagger predicts left to right with
//! its own previous guesses as context, updates on every mistake, and the
//! final weights are the average over all updates. Frequent unambiguous
//! words are tagged by dictionary lookup and never reach the perceptron.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedText;
use crate::error::{Error, Result};
use crate::rng;

pub const MODEL_FORMAT: &str = "humorkit-tagger";
pub const MODEL_VERSION: u32 = 1;

const START: [&str; 2] = ["-START-", "-START2-"];
const END: [&str; 2] = ["-END-", "-END2-"];

/// Words seen at least this often with one dominant tag go into the tag dictionary.
const TAGDICT_MIN_COUNT: usize = 20;
const TAGDICT_MIN_RATIO: f64 = 0.97;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn to_pretagged(&self) -> String {
        self.tokens
            .iter()
            .zip(&self.tags)
            .map(|(w, t)| format!("{w}/{t}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Parses one `token/TAG token/TAG ...` line. The tag is whatever follows
/// the last `/` of each whitespace-separated item.
pub fn parse_pretagged(line: &str) -> Result<TaggedSentence> {
    let mut sent = TaggedSentence::default();
    for item in line.split_whitespace() {
        match item.rsplit_once('/') {
            Some((word, tag)) if !word.is_empty() && !tag.is_empty() => {
                sent.tokens.push(word.to_string());
                sent.tags.push(tag.to_string());
            }
            _ => {
                return Err(Error::parse(
                    "pretagged text",
                    format!("item {item:?}"),
                    "expected token/TAG",
                ))
            }
        }
    }
    Ok(sent)
}

/// One sentence per non-blank line, pre-tagged format.
pub fn read_tagged_corpus(path: &Path) -> Result<Vec<TaggedSentence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_pretagged(&line).map_err(|e| match e {
            Error::Parse { location, message, .. } => Error::parse(
                path.display().to_string(),
                format!("line {}, {location}", i + 1),
                message,
            ),
            other => other,
        })?);
    }
    Ok(out)
}

fn normalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => {
            if word.len() == 4 && word.chars().all(|c| c.is_ascii_digit()) {
                "!YEAR".into()
            } else {
                "!DIGITS".into()
            }
        }
        _ => word.to_lowercase(),
    }
}

fn suffix(word: &str, n: usize) -> &str {
    match word.char_indices().rev().nth(n.saturating_sub(1)) {
        Some((i, _)) => &word[i..],
        None => word,
    }
}

fn prefix(word: &str) -> &str {
    match word.char_indices().nth(1) {
        Some((i, _)) => &word[..i],
        None => word,
    }
}

/// Collapsed character-class pattern: "McDonald2" -> "XxXxd".
fn shape(word: &str) -> String {
    let mut out = String::new();
    for c in word.chars() {
        let k = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_ascii_digit() {
            'd'
        } else {
            'o'
        };
        if !out.ends_with(k) {
            out.push(k);
        }
        if out.len() >= 6 {
            break;
        }
    }
    out
}

/// `context` is the normalized sentence padded with two START and two END markers.
fn features(i: usize, surface: &str, context: &[String], prev: &str, prev2: &str) -> Vec<String> {
    let w = &context[i + 2];
    let wm1 = &context[i + 1];
    let wp1 = &context[i + 3];
    vec![
        "bias".to_string(),
        format!("w {w}"),
        format!("s1 {}", suffix(w, 1)),
        format!("s2 {}", suffix(w, 2)),
        format!("s3 {}", suffix(w, 3)),
        format!("p1 {}", prefix(w)),
        format!("shape {}", shape(surface)),
        format!("t-1 {prev}"),
        format!("t-2 {prev2}"),
        format!("t-1t-2 {prev} {prev2}"),
        format!("t-1w {prev} {w}"),
        format!("w-1 {wm1}"),
        format!("s3-1 {}", suffix(wm1, 3)),
        format!("w-2 {}", context[i]),
        format!("w+1 {wp1}"),
        format!("s3+1 {}", suffix(wp1, 3)),
        format!("w+2 {}", context[i + 4]),
    ]
}

fn padded_context(surface: &[String]) -> Vec<String> {
    let mut ctx: Vec<String> = START.iter().map(|s| s.to_string()).collect();
    ctx.extend(surface.iter().map(|w| normalize(w)));
    ctx.extend(END.iter().map(|s| s.to_string()));
    ctx
}

#[derive(Debug, Clone, Copy, Default)]
struct Param {
    weight: f64,
    total: f64,
    stamp: u64,
}

/// Mutable perceptron state used only during training.
struct Trainer {
    n_classes: usize,
    feature_ids: HashMap<String, usize>,
    // per feature: (class, param), sorted by class
    params: Vec<Vec<(u16, Param)>>,
    instances: u64,
}

impl Trainer {
    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; self.n_classes];
        for f in feats {
            if let Some(&id) = self.feature_ids.get(f) {
                for (c, p) in &self.params[id] {
                    scores[*c as usize] += p.weight;
                }
            }
        }
        scores
    }

    fn bump(&mut self, feature: &str, class: u16, delta: f64) {
        let id = match self.feature_ids.get(feature) {
            Some(&id) => id,
            None => {
                let id = self.params.len();
                self.feature_ids.insert(feature.to_string(), id);
                self.params.push(Vec::new());
                id
            }
        };
        let slot = &mut self.params[id];
        let pos = match slot.binary_search_by_key(&class, |(c, _)| *c) {
            Ok(pos) => pos,
            Err(pos) => {
                slot.insert(pos, (class, Param::default()));
                pos
            }
        };
        let p = &mut slot[pos].1;
        p.total += (self.instances - p.stamp) as f64 * p.weight;
        p.stamp = self.instances;
        p.weight += delta;
    }

    fn update(&mut self, truth: u16, guess: u16, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in feats {
            self.bump(f, truth, 1.0);
            self.bump(f, guess, -1.0);
        }
    }

    fn averaged(self) -> HashMap<String, Vec<(u16, f64)>> {
        let n = self.instances.max(1) as f64;
        let mut out = HashMap::new();
        for (name, id) in self.feature_ids {
            let mut ws = Vec::new();
            for (c, p) in &self.params[id] {
                let total = p.total + (self.instances - p.stamp) as f64 * p.weight;
                let avg = (total / n * 1000.0).round() / 1000.0;
                if avg != 0.0 {
                    ws.push((*c, avg));
                }
            }
            if !ws.is_empty() {
                out.insert(name, ws);
            }
        }
        out
    }
}

fn argmax(scores: &[f64]) -> u16 {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best as u16
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    classes: Vec<String>,
    tagdict: HashMap<String, u16>,
    weights: HashMap<String, Vec<(u16, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct TaggerFile {
    format: String,
    version: u32,
    classes: Vec<String>,
    tagdict: BTreeMap<String, String>,
    weights: BTreeMap<String, Vec<(u16, f64)>>,
}

fn build_tagdict(corpus: &[TaggedSentence]) -> HashMap<String, String> {
    let mut counts: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for s in corpus {
        for (w, t) in s.tokens.iter().zip(&s.tags) {
            *counts.entry(w).or_default().entry(t).or_default() += 1;
        }
    }
    let mut dict = HashMap::new();
    for (word, tags) in counts {
        let n: usize = tags.values().sum();
        // ties broken by tag name so the dictionary is seed- and hash-independent
        let (tag, c) = tags
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .unwrap();
        if n >= TAGDICT_MIN_COUNT && *c as f64 / n as f64 >= TAGDICT_MIN_RATIO {
            dict.insert(word.to_string(), tag.to_string());
        }
    }
    dict
}

pub fn train_tagger(corpus: &[TaggedSentence], epochs: usize, seed: u64) -> Result<TaggerModel> {
    if corpus.is_empty() {
        return Err(Error::Size("tagger training corpus is empty".into()));
    }
    if epochs == 0 {
        return Err(Error::Argument("epochs must be at least 1".into()));
    }
    if let Some(bad) = corpus.iter().find(|s| s.tokens.len() != s.tags.len()) {
        return Err(Error::Shape(format!(
            "sentence has {} tokens but {} tags",
            bad.tokens.len(),
            bad.tags.len()
        )));
    }
    let mut classes: Vec<String> = corpus.iter().flat_map(|s| s.tags.iter().cloned()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() > u16::MAX as usize {
        return Err(Error::Size("too many distinct tags".into()));
    }
    let class_id: HashMap<&str, u16> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i as u16))
        .collect();
    let tagdict: HashMap<String, u16> = build_tagdict(corpus)
        .into_iter()
        .map(|(w, t)| {
            let id = class_id[t.as_str()];
            (w, id)
        })
        .collect();

    let mut trainer = Trainer {
        n_classes: classes.len(),
        feature_ids: HashMap::new(),
        params: Vec::new(),
        instances: 0,
    };
    let mut rng = rng::seeded(seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let sent = &corpus[si];
            let context = padded_context(&sent.tokens);
            let (mut prev, mut prev2) = (START[0].to_string(), START[1].to_string());
            for (i, word) in sent.tokens.iter().enumerate() {
                let guess = match tagdict.get(word) {
                    Some(&t) => t,
                    None => {
                        let feats = features(i, word, &context, &prev, &prev2);
                        let guess = argmax(&trainer.scores(&feats));
                        trainer.update(class_id[sent.tags[i].as_str()], guess, &feats);
                        guess
                    }
                };
                prev2 = std::mem::replace(&mut prev, classes[guess as usize].clone());
            }
        }
    }
    Ok(TaggerModel {
        weights: trainer.averaged(),
        classes,
        tagdict,
    })
}

impl TaggerModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, feats: &[String]) -> u16 {
        let mut scores = vec![0.0; self.classes.len()];
        for f in feats {
            if let Some(ws) = self.weights.get(f) {
                for (c, w) in ws {
                    scores[*c as usize] += w;
                }
            }
        }
        argmax(&scores)
    }

    /// Tags surface-form tokens (original casing).
    pub fn tag_tokens<S: AsRef<str>>(&self, surface: &[S]) -> TaggedSentence {
        let tokens: Vec<String> = surface.iter().map(|s| s.as_ref().to_string()).collect();
        let context = padded_context(&tokens);
        let mut tags = Vec::with_capacity(tokens.len());
        let (mut prev, mut prev2) = (START[0].to_string(), START[1].to_string());
        for (i, word) in tokens.iter().enumerate() {
            let t = match self.tagdict.get(word) {
                Some(&t) => t,
                None => self.predict(&features(i, word, &context, &prev, &prev2)),
            };
            let tag = self.classes[t as usize].clone();
            prev2 = std::mem::replace(&mut prev, tag.clone());
            tags.push(tag);
        }
        TaggedSentence { tokens, tags }
    }

    pub fn tag(&self, text: &TokenizedText) -> TaggedSentence {
        self.tag_tokens(&text.surface)
    }

    /// Token-level accuracy against gold tags.
    pub fn accuracy(&self, gold: &[TaggedSentence]) -> f64 {
        let (mut right, mut total) = (0usize, 0usize);
        for s in gold {
            let pred = self.tag_tokens(&s.tokens);
            right += pred.tags.iter().zip(&s.tags).filter(|(a, b)| a == b).count();
            total += s.len();
        }
        if total == 0 {
            0.0
        } else {
            right as f64 / total as f64
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TaggerFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            classes: self.classes.clone(),
            tagdict: self
                .tagdict
                .iter()
                .map(|(w, t)| (w.clone(), self.classes[*t as usize].clone()))
                .collect(),
            weights: self.weights.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: TaggerFile = serde_json::from_str(s)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Schema(format!("not a tagger model (format {:?})", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Schema(format!(
                "unsupported tagger model version {}",
                file.version
            )));
        }
        let class_id: HashMap<&str, u16> = file
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as u16))
            .collect();
        let mut tagdict = HashMap::new();
        for (w, t) in file.tagdict {
            let id = *class_id
                .get(t.as_str())
                .ok_or_else(|| Error::Schema(format!("tag dictionary uses unknown tag {t:?}")))?;
            tagdict.insert(w, id);
        }
        for (f, ws) in &file.weights {
            if ws
                .iter()
                .any(|(c, w)| *c as usize >= file.classes.len() || !w.is_finite())
            {
                return Err(Error::Schema(format!("invalid weights for feature {f:?}")));
            }
        }
        Ok(TaggerModel {
            classes: file.classes,
            tagdict,
            weights: file.weights.into_iter().collect(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        out.write_all(self.to_json()?.as_bytes())
            .map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
