//! NRC word-emotion lexicon and the ten per-sentence emotion counts.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::{Add, AddAssign};
use std::path::Path;

use log::warn;

use crate::corpus::TokenizedText;
use crate::error::{Error, Result};
use crate::morphy::{self, Exceptions, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Emotion {
    Fear,
    Anger,
    Anticipation,
    Trust,
    Surprise,
    Positive,
    Negative,
    Sadness,
    Disgust,
    Joy,
}

impl Emotion {
    /// Canonical feature order.
    pub const ALL: [Emotion; 10] = [
        Emotion::Fear,
        Emotion::Anger,
        Emotion::Anticipation,
        Emotion::Trust,
        Emotion::Surprise,
        Emotion::Positive,
        Emotion::Negative,
        Emotion::Sadness,
        Emotion::Disgust,
        Emotion::Joy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Fear => "fear",
            Emotion::Anger => "anger",
            Emotion::Anticipation => "anticipation",
            Emotion::Trust => "trust",
            Emotion::Surprise => "surprise",
            Emotion::Positive => "positive",
            Emotion::Negative => "negative",
            Emotion::Sadness => "sadness",
            Emotion::Disgust => "disgust",
            Emotion::Joy => "joy",
        }
    }

    pub fn from_name(name: &str) -> Option<Emotion> {
        Emotion::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One count per emotion, in [`Emotion::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct EmotionVector(pub [u32; 10]);

impl EmotionVector {
    pub fn get(&self, e: Emotion) -> u32 {
        self.0[e.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn as_f64(&self) -> [f64; 10] {
        self.0.map(f64::from)
    }
}

impl Add for EmotionVector {
    type Output = EmotionVector;

    fn add(mut self, rhs: EmotionVector) -> EmotionVector {
        self += rhs;
        self
    }
}

impl AddAssign for EmotionVector {
    fn add_assign(&mut self, rhs: EmotionVector) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmoLex {
    table: HashMap<String, EmotionVector>,
    exceptions: Option<Exceptions>,
}

impl EmoLex {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses `word<TAB>emotion<TAB>0|1` lines. Blank lines are ignored.
    pub fn from_reader(reader: impl Read, source_name: &str) -> Result<Self> {
        let mut table: HashMap<String, EmotionVector> = HashMap::new();
        let mut seen: HashMap<(String, Emotion), usize> = HashMap::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse(source_name, format!("line {lineno}"), e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |msg: String| Error::parse(source_name, format!("line {lineno}"), msg);
            let [word, emotion, flag] = fields[..] else {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            let emotion =
                Emotion::from_name(emotion.trim()).ok_or_else(|| bad(format!("unknown emotion {emotion:?}")))?;
            let flag = match flag.trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(bad(format!("association flag {other:?} is not 0/1"))),
            };
            let word = word.trim().to_lowercase();
            if word.is_empty() {
                return Err(bad("empty word".into()));
            }
            if let Some(prev) = seen.insert((word.clone(), emotion), lineno) {
                warn!(
                    "{source_name}: duplicate entry {word}/{} at line {lineno} overrides line {prev}",
                    emotion.name()
                );
            }
            table.entry(word).or_default().0[emotion.index()] = flag;
        }
        Ok(EmoLex {
            table,
            exceptions: None,
        })
    }

    /// Uses irregular-form exceptions (e.g. WordNet `*.exc`) during lemma fallback.
    pub fn with_exceptions(mut self, exceptions: Exceptions) -> Self {
        self.exceptions = Some(exceptions);
        self
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&EmotionVector> {
        self.table.get(word)
    }

    /// Surface form first, then the first noun/verb/adjective base form that
    /// is in the lexicon.
    pub fn lookup(&self, token: &str) -> Option<&EmotionVector> {
        if let Some(v) = self.table.get(token) {
            return Some(v);
        }
        let known = |w: &str| self.table.contains_key(w);
        [Pos::Noun, Pos::Verb, Pos::Adj]
            .into_iter()
            .find_map(|pos| morphy::morphy(token, pos, self.exceptions.as_ref(), known))
            .and_then(|lemma| self.table.get(&lemma))
    }

    pub fn emotion_features(&self, text: &TokenizedText) -> EmotionVector {
        text.tokens
            .iter()
            .filter_map(|t| self.lookup(t))
            .fold(EmotionVector::default(), |acc, v| acc + *v)
    }
}
