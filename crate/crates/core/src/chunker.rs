//! Two-level shallow parse over Penn Treebank tags and the fourteen
//! structural-element statistics computed from it.
//!
//! The cascade runs three greedy, left-to-right, longest-match passes:
//!
//! 1. `NP := (DT|PRP$)? (JJ|JJR|JJS)* (NN|NNS|NNP|NNPS|PRP)+`
//! 2. `PP := (IN|TO) NP`, with the NP as the PP's child
//! 3. `VP := MD? VB*+` followed by any contiguous run of NP/PP chunks, which
//!    become the VP's children
//!
//! Subordinate-clause markers are counted separately: tokens tagged `IN` or
//! `WDT` whose lowercase form is in the subordinator list.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::postag::TaggedSentence;

pub const DEFAULT_SUBORDINATORS: &[&str] = &[
    "after", "although", "as", "because", "before", "if", "once", "since", "so", "than", "that", "though", "unless",
    "until", "when", "whenever", "where", "whereas", "while", "whether",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChunkKind {
    NP,
    PP,
    VP,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub kind: ChunkKind,
    /// Token span `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub children: Vec<Chunk>,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    fn leaf(kind: ChunkKind, start: usize, end: usize) -> Chunk {
        Chunk {
            kind,
            start,
            end,
            children: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChunkTree {
    pub chunks: Vec<Chunk>,
    pub sbar_marker_positions: Vec<usize>,
}

impl ChunkTree {
    /// Depth-first walk yielding `(chunk, has_same_kind_ancestor)`.
    pub fn walk(&self) -> Vec<(&Chunk, bool)> {
        fn go<'a>(c: &'a Chunk, ancestors: &mut Vec<ChunkKind>, out: &mut Vec<(&'a Chunk, bool)>) {
            out.push((c, ancestors.contains(&c.kind)));
            ancestors.push(c.kind);
            for child in &c.children {
                go(child, ancestors, out);
            }
            ancestors.pop();
        }
        let mut out = Vec::new();
        let mut ancestors = Vec::new();
        for c in &self.chunks {
            go(c, &mut ancestors, &mut out);
        }
        out
    }
}

fn is_noun_head(tag: &str) -> bool {
    matches!(tag, "NN" | "NNS" | "NNP" | "NNPS" | "PRP")
}

fn is_adjective(tag: &str) -> bool {
    matches!(tag, "JJ" | "JJR" | "JJS")
}

fn is_verb(tag: &str) -> bool {
    matches!(tag, "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ")
}

enum Item {
    Token(usize),
    Chunk(Chunk),
}

#[derive(Debug, Clone)]
pub struct Chunker {
    subordinators: HashSet<String>,
}

impl Default for Chunker {
    fn default() -> Self {
        Chunker::with_subordinators(DEFAULT_SUBORDINATORS.iter().copied())
    }
}

impl Chunker {
    pub fn with_subordinators<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Chunker {
            subordinators: words.into_iter().map(|w| w.as_ref().trim().to_lowercase()).collect(),
        }
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn load_subordinators(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let words: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if words.is_empty() {
            return Err(Error::resource(
                "chunker",
                format!("{} lists no subordinators", path.display()),
            ));
        }
        Ok(Chunker::with_subordinators(words))
    }

    pub fn subordinators(&self) -> impl Iterator<Item = &str> {
        self.subordinators.iter().map(String::as_str)
    }

    pub fn chunk(&self, sentence: &TaggedSentence) -> ChunkTree {
        let tags: Vec<&str> = sentence.tags.iter().map(String::as_str).collect();
        let items = np_pass(&tags);
        let items = pp_pass(items, &tags);
        let items = vp_pass(items, &tags);
        let chunks = items
            .into_iter()
            .filter_map(|it| match it {
                Item::Chunk(c) => Some(c),
                Item::Token(_) => None,
            })
            .collect();
        let sbar_marker_positions = sentence
            .tokens
            .iter()
            .zip(&tags)
            .enumerate()
            .filter(|(_, (w, t))| matches!(**t, "IN" | "WDT") && self.subordinators.contains(&w.to_lowercase()))
            .map(|(i, _)| i)
            .collect();
        ChunkTree {
            chunks,
            sbar_marker_positions,
        }
    }
}

fn np_pass(tags: &[&str]) -> Vec<Item> {
    let mut items = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let mut j = i;
        if matches!(tags[j], "DT" | "PRP$") {
            j += 1;
        }
        while j < tags.len() && is_adjective(tags[j]) {
            j += 1;
        }
        let heads = j;
        while j < tags.len() && is_noun_head(tags[j]) {
            j += 1;
        }
        if j > heads {
            items.push(Item::Chunk(Chunk::leaf(ChunkKind::NP, i, j)));
            i = j;
        } else {
            items.push(Item::Token(i));
            i += 1;
        }
    }
    items
}

fn pp_pass(items: Vec<Item>, tags: &[&str]) -> Vec<Item> {
    let mut out = Vec::with_capacity(items.len());
    let mut iter = items.into_iter().peekable();
    while let Some(item) = iter.next() {
        if let Item::Token(i) = item {
            if matches!(tags[i], "IN" | "TO") {
                if let Some(Item::Chunk(np)) = iter.peek() {
                    if np.kind == ChunkKind::NP {
                        let Some(Item::Chunk(np)) = iter.next() else {
                            unreachable!()
                        };
                        out.push(Item::Chunk(Chunk {
                            kind: ChunkKind::PP,
                            start: i,
                            end: np.end,
                            children: vec![np],
                        }));
                        continue;
                    }
                }
            }
        }
        out.push(item);
    }
    out
}

fn vp_pass(items: Vec<Item>, tags: &[&str]) -> Vec<Item> {
    let token_tag = |item: &Option<Item>| match item {
        Some(Item::Token(i)) => Some((*i, tags[*i])),
        _ => None,
    };
    let mut slots: Vec<Option<Item>> = items.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(slots.len());
    let mut k = 0;
    while k < slots.len() {
        let mut m = k;
        if matches!(token_tag(&slots[m]), Some((_, "MD"))) {
            m += 1;
        }
        let verbs_from = m;
        while m < slots.len() && token_tag(&slots[m]).is_some_and(|(_, t)| is_verb(t)) {
            m += 1;
        }
        if m == verbs_from {
            out.push(slots[k].take().expect("slot consumed twice"));
            k += 1;
            continue;
        }
        let start = token_tag(&slots[k]).expect("VP starts at a token").0;
        let mut end = token_tag(&slots[m - 1]).expect("VP verb is a token").0 + 1;
        let mut children = Vec::new();
        while let Some(Some(Item::Chunk(c))) = slots.get(m) {
            if !matches!(c.kind, ChunkKind::NP | ChunkKind::PP) {
                break;
            }
            end = c.end;
            if let Some(Item::Chunk(c)) = slots[m].take() {
                children.push(c);
            }
            m += 1;
        }
        out.push(Item::Chunk(Chunk {
            kind: ChunkKind::VP,
            start,
            end,
            children,
        }));
        k = m;
    }
    out
}

/// Structural-element statistics, field order = canonical feature order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SseFeatures {
    pub np_count: f64,
    pub vp_count: f64,
    pub pp_count: f64,
    pub sbar_count: f64,
    pub lr_np: f64,
    pub lr_vp: f64,
    pub lr_pp: f64,
    pub apl1_np: f64,
    pub apl1_vp: f64,
    pub apl1_pp: f64,
    pub apl2_np: f64,
    pub apl2_vp: f64,
    pub apl2_pp: f64,
    pub rp_nv: f64,
}

impl SseFeatures {
    pub const NAMES: [&'static str; 14] = [
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
    ];

    pub fn to_array(&self) -> [f64; 14] {
        [
            self.np_count,
            self.vp_count,
            self.pp_count,
            self.sbar_count,
            self.lr_np,
            self.lr_vp,
            self.lr_pp,
            self.apl1_np,
            self.apl1_vp,
            self.apl1_pp,
            self.apl2_np,
            self.apl2_vp,
            self.apl2_pp,
            self.rp_nv,
        ]
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Default)]
struct KindStats {
    count: usize,
    total_len: usize,
    maximal_count: usize,
    maximal_len: usize,
}

pub fn sse_features(tree: &ChunkTree, sentence_len: usize) -> SseFeatures {
    if sentence_len == 0 {
        return SseFeatures::default();
    }
    let mut stats: [KindStats; 3] = Default::default();
    let slot = |k: ChunkKind| match k {
        ChunkKind::NP => 0,
        ChunkKind::VP => 1,
        ChunkKind::PP => 2,
    };
    let mut rp_sum = 0.0;
    let mut rp_n = 0usize;
    for (c, nested_in_same_kind) in tree.walk() {
        let s = &mut stats[slot(c.kind)];
        s.count += 1;
        s.total_len += c.len();
        if !nested_in_same_kind {
            s.maximal_count += 1;
            s.maximal_len += c.len();
        }
        if c.kind == ChunkKind::VP {
            let inner: Vec<usize> = c
                .children
                .iter()
                .filter(|ch| matches!(ch.kind, ChunkKind::NP | ChunkKind::PP))
                .map(Chunk::len)
                .collect();
            if !inner.is_empty() {
                let mean = inner.iter().sum::<usize>() as f64 / inner.len() as f64;
                rp_sum += ratio(mean, c.len() as f64);
                rp_n += 1;
            }
        }
    }
    let n = sentence_len as f64;
    let [np, vp, pp] = &stats;
    let lr = |s: &KindStats| ratio(s.maximal_len as f64, n);
    let apl1 = |s: &KindStats| ratio(s.total_len as f64, s.count as f64);
    let apl2 = |s: &KindStats| ratio(s.maximal_len as f64, s.maximal_count as f64);
    SseFeatures {
        np_count: np.count as f64,
        vp_count: vp.count as f64,
        pp_count: pp.count as f64,
        sbar_count: tree.sbar_marker_positions.len() as f64,
        lr_np: lr(np),
        lr_vp: lr(vp),
        lr_pp: lr(pp),
        apl1_np: apl1(np),
        apl1_vp: apl1(vp),
        apl1_pp: apl1(pp),
        apl2_np: apl2(np),
        apl2_vp: apl2(vp),
        apl2_pp: apl2(pp),
        rp_nv: ratio(rp_sum, rp_n as f64),
    }
}
