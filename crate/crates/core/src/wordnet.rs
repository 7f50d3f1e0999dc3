//! WordNet 3.0 database reader, hypernym graph and the ambiguity features.
//!
//! Synsets are nodes of a graph whose edges are the `@` (hypernym) and `@i`
//! (instance hypernym) pointers. Each part of speech gets one virtual root
//! that acts as the hypernym of every synset of that POS without one, so any
//! two same-POS synsets share an ancestor.
//!
//! The path length between two synsets is the shortest climb from each to a
//! common ancestor, summed. Paths that go down and back up (for example via a
//! shared hyponym with two hypernyms) do not count.
//!
//! `sense_combination` reads the product of per-word sense counts in its log
//! form, `Σ ln k_w`; the committed interpretation of the weight in the
//! original formulation is "number of senses of the word".

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphy::{self, Exceptions, Pos};
use crate::postag::TaggedSentence;

pub const DEFAULT_SENSE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId(pub u32);

impl SynsetId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    pos: Pos,
    /// `None` for the virtual root.
    offset: Option<u32>,
}

/// `(pos, offset)` of a synset in the database files.
pub type SynsetKey = (Pos, u32);

/// Accumulates synsets, hypernym pointers and lemma entries, then validates
/// them into a [`WordnetGraph`].
#[derive(Debug, Default)]
pub struct WordnetBuilder {
    synsets: Vec<(Pos, u32, Vec<SynsetKey>)>,
    lemmas: Vec<(Pos, String, Vec<u32>)>,
    exceptions: Exceptions,
}

impl WordnetBuilder {
    pub fn add_synset(&mut self, pos: Pos, offset: u32, hypernyms: Vec<SynsetKey>) -> &mut Self {
        self.synsets.push((pos, offset, hypernyms));
        self
    }

    pub fn add_lemma(&mut self, pos: Pos, lemma: &str, offsets: Vec<u32>) -> &mut Self {
        self.lemmas.push((pos, lemma.to_string(), offsets));
        self
    }

    pub fn exceptions(&mut self, exceptions: Exceptions) -> &mut Self {
        self.exceptions = exceptions;
        self
    }

    pub fn build(self) -> Result<WordnetGraph> {
        let mut nodes = Vec::with_capacity(self.synsets.len() + 4);
        let mut keys = HashMap::with_capacity(self.synsets.len());
        for pos in Pos::ALL {
            nodes.push(Node { pos, offset: None });
        }
        for (pos, offset, _) in &self.synsets {
            let id = nodes.len() as u32;
            if keys.insert((*pos, *offset), id).is_some() {
                return Err(Error::Value(format!("duplicate synset {offset} ({pos:?})")));
            }
            nodes.push(Node {
                pos: *pos,
                offset: Some(*offset),
            });
        }
        let mut up: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        for (pos, offset, hypernyms) in &self.synsets {
            let child = keys[&(*pos, *offset)];
            let mut has_parent = false;
            for (hpos, hoff) in hypernyms {
                let parent = *keys.get(&(*hpos, *hoff)).ok_or_else(|| {
                    Error::Value(format!("synset {offset}: hypernym {hoff} ({hpos:?}) does not exist"))
                })?;
                if parent != child {
                    up[child as usize].push(parent);
                    has_parent = true;
                }
            }
            if !has_parent {
                up[child as usize].push(virtual_root(*pos));
            }
        }
        for list in &mut up {
            list.sort_unstable();
            list.dedup();
        }
        link_top_cycles(&mut up, &nodes);
        let mut index: [HashMap<String, Vec<SynsetId>>; 4] = Default::default();
        for (pos, lemma, offsets) in self.lemmas {
            let ids = offsets
                .iter()
                .map(|o| {
                    keys.get(&(pos, *o))
                        .map(|&i| SynsetId(i))
                        .ok_or_else(|| Error::Value(format!("lemma {lemma:?} lists missing synset {o}")))
                })
                .collect::<Result<Vec<_>>>()?;
            index[pos as usize].insert(lemma, ids);
        }
        Ok(WordnetGraph {
            nodes,
            keys,
            up,
            index,
            exceptions: self.exceptions,
        })
    }
}

fn virtual_root(pos: Pos) -> u32 {
    pos as u32
}

fn climb_set(up: &[Vec<u32>], from: u32) -> HashSet<u32> {
    let mut seen = HashSet::from([from]);
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        for &v in &up[u as usize] {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen
}

/// Hypernym cycles with no way out (WordNet 3.0 has a few among verbs) never
/// reach a virtual root. Every member of such a cycle is treated as
/// parentless: it gets its POS root as an extra hypernym.
fn link_top_cycles(up: &mut [Vec<u32>], nodes: &[Node]) {
    let mut down: Vec<Vec<u32>> = vec![Vec::new(); up.len()];
    for (child, parents) in up.iter().enumerate() {
        for &p in parents {
            down[p as usize].push(child as u32);
        }
    }
    let mut reaches_root = vec![false; up.len()];
    let mut stack: Vec<u32> = Pos::ALL.iter().map(|&p| virtual_root(p)).collect();
    while let Some(u) = stack.pop() {
        if !std::mem::replace(&mut reaches_root[u as usize], true) {
            stack.extend(&down[u as usize]);
        }
    }
    let stranded: Vec<u32> = (0..up.len() as u32).filter(|&u| !reaches_root[u as usize]).collect();
    let tops: Vec<u32> = stranded
        .iter()
        .copied()
        .filter(|&u| climb_set(up, u).iter().all(|&a| climb_set(up, a).contains(&u)))
        .collect();
    for u in tops {
        let root = virtual_root(nodes[u as usize].pos);
        let list = &mut up[u as usize];
        list.push(root);
        list.sort_unstable();
    }
}

#[derive(Debug, Clone)]
pub struct WordnetGraph {
    nodes: Vec<Node>,
    keys: HashMap<SynsetKey, u32>,
    /// Hypernyms of each node; the virtual root stands in for a missing one.
    up: Vec<Vec<u32>>,
    index: [HashMap<String, Vec<SynsetId>>; 4],
    exceptions: Exceptions,
}

fn data_line_error(path: &Path, offset: &str, msg: impl Into<String>) -> Error {
    Error::parse(path.display().to_string(), format!("synset {offset}"), msg)
}

fn open_required(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::resource("wordnet", format!("{}: {e}", path.display())))
}

fn parse_data_file(path: &Path, pos: Pos, builder: &mut WordnetBuilder) -> Result<()> {
    for line in open_required(path)?.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        let data = line.split_once(" | ").map_or(line.as_str(), |(d, _)| d);
        let f: Vec<&str> = data.split_whitespace().collect();
        let off_str = f.first().copied().unwrap_or("?");
        let bad = |msg: &str| data_line_error(path, off_str, msg);
        let offset: u32 = off_str.parse().map_err(|_| bad("bad offset"))?;
        if f.len() < 4 {
            return Err(bad("too few fields"));
        }
        if f[2].chars().next().and_then(Pos::from_wordnet_char) != Some(pos) {
            return Err(bad(&format!("synset type {:?} does not belong in this file", f[2])));
        }
        let w_cnt = usize::from_str_radix(f[3], 16).map_err(|_| bad("bad word count"))?;
        let p_at = 4 + 2 * w_cnt;
        let p_cnt: usize = f
            .get(p_at)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad pointer count"))?;
        if f.len() < p_at + 1 + 4 * p_cnt {
            return Err(bad("truncated pointer list"));
        }
        let mut hypernyms = Vec::new();
        for p in f[p_at + 1..p_at + 1 + 4 * p_cnt].chunks_exact(4) {
            if p[0] == "@" || p[0] == "@i" {
                let target: u32 = p[1].parse().map_err(|_| bad("bad pointer offset"))?;
                let tpos = p[2]
                    .chars()
                    .next()
                    .and_then(Pos::from_wordnet_char)
                    .ok_or_else(|| bad("bad pointer part of speech"))?;
                hypernyms.push((tpos, target));
            }
        }
        builder.add_synset(pos, offset, hypernyms);
    }
    Ok(())
}

fn parse_index_file(path: &Path, pos: Pos, builder: &mut WordnetBuilder) -> Result<()> {
    for (i, line) in open_required(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::parse(path.display().to_string(), format!("line {}", i + 1), msg);
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 4 {
            return Err(bad("too few fields"));
        }
        let synset_cnt: usize = f[2].parse().map_err(|_| bad("bad synset count"))?;
        if f.len() < 4 + synset_cnt {
            return Err(bad("truncated offset list"));
        }
        let offsets = f[f.len() - synset_cnt..]
            .iter()
            .map(|s| s.parse::<u32>().map_err(|_| bad("bad synset offset")))
            .collect::<Result<Vec<_>>>()?;
        builder.add_lemma(pos, f[0], offsets);
    }
    Ok(())
}

impl WordnetGraph {
    /// Reads `index.*`, `data.*` and optional `*.exc` files from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::resource(
                "wordnet",
                format!("{} is not a directory", dir.display()),
            ));
        }
        let mut builder = WordnetBuilder::default();
        for pos in Pos::ALL {
            parse_data_file(&dir.join(format!("data.{}", pos.file_suffix())), pos, &mut builder)?;
            parse_index_file(&dir.join(format!("index.{}", pos.file_suffix())), pos, &mut builder)?;
        }
        builder.exceptions(Exceptions::load_dir(dir)?);
        builder.build().map_err(|e| match e {
            Error::Value(msg) => Error::parse(dir.display().to_string(), "graph", msg),
            other => other,
        })
    }

    /// Number of real synsets of `pos`.
    pub fn synset_count(&self, pos: Pos) -> usize {
        self.nodes.iter().filter(|n| n.pos == pos && n.offset.is_some()).count()
    }

    /// Node count including the four virtual roots.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn synset(&self, pos: Pos, offset: u32) -> Option<SynsetId> {
        self.keys.get(&(pos, offset)).map(|&i| SynsetId(i))
    }

    pub fn virtual_root(&self, pos: Pos) -> SynsetId {
        SynsetId(virtual_root(pos))
    }

    pub fn pos(&self, id: SynsetId) -> Option<Pos> {
        self.nodes.get(id.idx()).map(|n| n.pos)
    }

    /// Database offset; `None` for virtual roots and unknown ids.
    pub fn offset(&self, id: SynsetId) -> Option<u32> {
        self.nodes.get(id.idx()).and_then(|n| n.offset)
    }

    /// Direct hypernyms, or the virtual root for a synset without any.
    pub fn hypernyms(&self, id: SynsetId) -> &[u32] {
        self.up.get(id.idx()).map_or(&[], Vec::as_slice)
    }

    /// Every ancestor of `id` (itself included) with its shortest climb.
    pub fn ancestors(&self, id: SynsetId) -> Result<HashMap<u32, u32>> {
        self.check(id)?;
        let mut dist = HashMap::from([(id.0, 0)]);
        let mut queue = VecDeque::from([id.0]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for &v in &self.up[u as usize] {
                if let Entry::Vacant(e) = dist.entry(v) {
                    e.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Senses of an already-lemmatized word, in index order.
    pub fn synsets(&self, lemma: &str, pos: Pos) -> &[SynsetId] {
        self.index[pos as usize].get(lemma).map_or(&[], Vec::as_slice)
    }

    /// `NLTK`-style `word.pos.nn` lookup, e.g. `("dog", Noun, 1)`.
    pub fn sense(&self, lemma: &str, pos: Pos, n: usize) -> Option<SynsetId> {
        n.checked_sub(1).and_then(|i| self.synsets(lemma, pos).get(i).copied())
    }

    pub fn lemmatize(&self, word: &str, pos: Pos) -> Option<String> {
        let index = &self.index[pos as usize];
        morphy::morphy(word, pos, Some(&self.exceptions), |w| index.contains_key(w))
    }

    fn check(&self, id: SynsetId) -> Result<()> {
        if id.idx() < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::Lookup(format!("unknown synset id {}", id.0)))
        }
    }

    /// Edges on the shortest path through a common ancestor; `None` across
    /// POS.
    pub fn path_length(&self, a: SynsetId, b: SynsetId) -> Result<Option<u32>> {
        let (da, db) = (self.ancestors(a)?, self.ancestors(b)?);
        if self.nodes[a.idx()].pos != self.nodes[b.idx()].pos {
            return Ok(None);
        }
        Ok(meet(&da, &db))
    }

    /// `1 / (1 + L)`; `None` for cross-POS pairs.
    pub fn path_similarity(&self, a: SynsetId, b: SynsetId) -> Result<Option<f64>> {
        Ok(self.path_length(a, b)?.map(|l| 1.0 / (1.0 + f64::from(l))))
    }
}

/// Shortest combined climb to an ancestor present in both maps.
fn meet(a: &HashMap<u32, u32>, b: &HashMap<u32, u32>) -> Option<u32> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().filter_map(|(n, d)| large.get(n).map(|e| d + e)).min()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AmbiguityFeatures {
    pub sense_combination: f64,
    /// Largest path similarity between senses of two different words.
    pub sense_farmost: f64,
    /// Smallest such path similarity.
    pub sense_closest: f64,
}

/// A token that contributes to the ambiguity features.
#[derive(Debug, Clone, PartialEq)]
pub struct QualifyingWord {
    pub position: usize,
    pub lemma: String,
    pub pos: Pos,
    pub senses: Vec<SynsetId>,
}

/// Tokens tagged NN*/VB*/JJ*/RB* whose lemma under that POS is indexed.
pub fn qualifying_words(sentence: &TaggedSentence, g: &WordnetGraph) -> Vec<QualifyingWord> {
    sentence
        .tokens
        .iter()
        .zip(&sentence.tags)
        .enumerate()
        .filter_map(|(position, (tok, tag))| {
            let pos = Pos::from_ptb(tag)?;
            let lemma = g.lemmatize(&tok.to_lowercase(), pos)?;
            let senses = g.synsets(&lemma, pos).to_vec();
            (!senses.is_empty()).then_some(QualifyingWord {
                position,
                lemma,
                pos,
                senses,
            })
        })
        .collect()
}

/// Ambiguity features with at most `sense_cap` senses per word entering the
/// pairwise similarity search. Only noun-noun and verb-verb pairs of words at
/// different positions are compared.
pub fn ambiguity_features(sentence: &TaggedSentence, g: &WordnetGraph, sense_cap: usize) -> AmbiguityFeatures {
    let words = qualifying_words(sentence, g);
    let sense_combination = words.iter().map(|w| (w.senses.len() as f64).ln()).sum();
    let mut ancestors: HashMap<SynsetId, HashMap<u32, u32>> = HashMap::new();
    for w in words.iter().filter(|w| matches!(w.pos, Pos::Noun | Pos::Verb)) {
        for &s in w.senses.iter().take(sense_cap) {
            ancestors
                .entry(s)
                .or_insert_with(|| g.ancestors(s).expect("indexed synsets exist"));
        }
    }
    let mut lo = u32::MAX;
    let mut hi = 0u32;
    let mut any = false;
    for (i, wi) in words.iter().enumerate() {
        if !matches!(wi.pos, Pos::Noun | Pos::Verb) {
            continue;
        }
        for wj in words[i + 1..].iter().filter(|w| w.pos == wi.pos) {
            for &a in wi.senses.iter().take(sense_cap) {
                for &b in wj.senses.iter().take(sense_cap) {
                    let len = meet(&ancestors[&a], &ancestors[&b]).expect("same-POS synsets share the virtual root");
                    lo = lo.min(len);
                    hi = hi.max(len);
                    any = true;
                }
            }
        }
    }
    let sim = |l: u32| 1.0 / (1.0 + f64::from(l));
    AmbiguityFeatures {
        sense_combination,
        sense_farmost: if any { sim(lo) } else { 0.0 },
        sense_closest: if any { sim(hi) } else { 0.0 },
    }
}
