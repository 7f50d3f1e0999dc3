//! WordNet-style morphological base-form recovery ("morphy").
//!
//! A surface form is mapped to candidate lemmas by an exception table and
//! per-POS suffix detachment rules. Candidates are only accepted if a caller
//! supplied predicate (usually "is in the lexicon") holds, so the same rules
//! serve both WordNet and the emotion lexicon.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    /// File suffix used by the WordNet database (`data.noun`, ...).
    pub fn file_suffix(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }

    pub fn from_wordnet_char(c: char) -> Option<Pos> {
        match c {
            'n' => Some(Pos::Noun),
            'v' => Some(Pos::Verb),
            'a' | 's' => Some(Pos::Adj),
            'r' => Some(Pos::Adv),
            _ => None,
        }
    }

    /// Maps a Penn Treebank tag to its WordNet class (NN*, VB*, JJ*, RB*).
    pub fn from_ptb(tag: &str) -> Option<Pos> {
        if tag.starts_with("NN") {
            Some(Pos::Noun)
        } else if tag.starts_with("VB") {
            Some(Pos::Verb)
        } else if tag.starts_with("JJ") {
            Some(Pos::Adj)
        } else if tag.starts_with("RB") {
            Some(Pos::Adv)
        } else {
            None
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

const NOUN_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ses", "s"),
    ("ves", "f"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("men", "man"),
    ("ies", "y"),
];

const VERB_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ies", "y"),
    ("es", "e"),
    ("es", ""),
    ("ed", "e"),
    ("ed", ""),
    ("ing", "e"),
    ("ing", ""),
];

const ADJ_RULES: &[(&str, &str)] = &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")];

fn rules(pos: Pos) -> &'static [(&'static str, &'static str)] {
    match pos {
        Pos::Noun => NOUN_RULES,
        Pos::Verb => VERB_RULES,
        Pos::Adj => ADJ_RULES,
        Pos::Adv => &[],
    }
}

/// Irregular inflections, `<pos>.exc` style: `inflected base [base ...]`.
#[derive(Debug, Clone, Default)]
pub struct Exceptions {
    maps: [HashMap<String, Vec<String>>; 4],
}

impl Exceptions {
    pub fn insert(&mut self, pos: Pos, inflected: &str, bases: Vec<String>) {
        self.maps[pos.index()].insert(inflected.to_string(), bases);
    }

    pub fn get(&self, pos: Pos, inflected: &str) -> Option<&[String]> {
        self.maps[pos.index()].get(inflected).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.maps.iter().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Loads every `<pos>.exc` file present in `dir`. Missing files are skipped.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut exc = Exceptions::default();
        for pos in Pos::ALL {
            let path = dir.join(format!("{}.exc", pos.file_suffix()));
            if !path.exists() {
                continue;
            }
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                let mut parts = line.split_whitespace();
                if let Some(inflected) = parts.next() {
                    let bases: Vec<String> = parts.map(str::to_string).collect();
                    if !bases.is_empty() {
                        exc.insert(pos, inflected, bases);
                    }
                }
            }
        }
        Ok(exc)
    }
}

fn apply_rules(forms: &[String], pos: Pos) -> Vec<String> {
    let mut out = Vec::new();
    for form in forms {
        for (old, new) in rules(pos) {
            if let Some(stem) = form.strip_suffix(old) {
                let base = format!("{stem}{new}");
                if !base.is_empty() {
                    out.push(base);
                }
            }
        }
    }
    out
}

fn keep_known(forms: impl IntoIterator<Item = String>, known: &impl Fn(&str) -> bool) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in forms {
        if known(&f) && !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// All accepted base forms of `word` under `pos`, best first.
///
/// Mirrors the classic morphy procedure: exceptions win outright; otherwise
/// the word itself plus one round of detachment is checked, and further
/// rounds are only tried while nothing is accepted.
pub fn base_forms(word: &str, pos: Pos, exceptions: Option<&Exceptions>, known: impl Fn(&str) -> bool) -> Vec<String> {
    if let Some(bases) = exceptions.and_then(|e| e.get(pos, word)) {
        let forms = std::iter::once(word.to_string()).chain(bases.iter().cloned());
        return keep_known(forms, &known);
    }
    let mut forms = apply_rules(&[word.to_string()], pos);
    let first = keep_known(std::iter::once(word.to_string()).chain(forms.iter().cloned()), &known);
    if !first.is_empty() {
        return first;
    }
    // every rule shortens or preserves length; bounded anyway
    for _ in 0..8 {
        if forms.is_empty() {
            break;
        }
        forms = apply_rules(&forms, pos);
        let found = keep_known(forms.iter().cloned(), &known);
        if !found.is_empty() {
            return found;
        }
    }
    Vec::new()
}

pub fn morphy(word: &str, pos: Pos, exceptions: Option<&Exceptions>, known: impl Fn(&str) -> bool) -> Option<String> {
    base_forms(word, pos, exceptions, known).into_iter().next()
}
