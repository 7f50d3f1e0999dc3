//! Helpers shared by the CLI test targets.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use humorkit::features::FEATURE_NAMES;

pub fn humorkit() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_humorkit"));
    cmd.env_remove("HUMORKIT_RESOURCES").env("RUST_LOG", "error");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    humorkit().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

const HEADER: &str = "  1 toy database\n";

/// A complete but tiny resource root: every module has something to load.
pub fn toy_resources(root: &Path) -> PathBuf {
    let w = |rel: &str, text: &str| {
        let path = root.join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    };
    let mut emolex = String::new();
    for (word, emotions) in [
        ("abandon", &["fear", "negative", "sadness"][..]),
        ("happy", &["joy", "positive", "trust"][..]),
        ("dog", &["positive"][..]),
    ] {
        for e in [
            "anger",
            "anticipation",
            "disgust",
            "fear",
            "joy",
            "negative",
            "positive",
            "sadness",
            "surprise",
            "trust",
        ] {
            writeln!(emolex, "{word}\t{e}\t{}", u8::from(emotions.contains(&e))).unwrap();
        }
    }
    w("emolex/NRC-Emotion-Lexicon-Wordlevel-v0.92.txt", &emolex);

    w(
        "wordnet/data.noun",
        &format!(
            "{HEADER}00000010 03 n 01 entity 0 000 | root\n\
             00000020 05 n 01 animal 0 001 @ 00000010 n 0000 | a beast\n\
             00000030 05 n 01 dog 0 001 @ 00000020 n 0000 | a dog\n\
             00000040 05 n 01 cat 0 001 @ 00000020 n 0000 | a cat\n\
             00000050 05 n 01 man 0 001 @ 00000010 n 0000 | a person\n"
        ),
    );
    w(
        "wordnet/index.noun",
        &format!(
            "{HEADER}animal n 1 1 @ 1 0 00000020\ncat n 1 1 @ 1 0 00000040\n\
             dog n 2 1 @ 2 0 00000030 00000050\nentity n 1 0 1 0 00000010\nman n 1 1 @ 1 0 00000050\n"
        ),
    );
    w(
        "wordnet/data.verb",
        &format!("{HEADER}00000100 38 v 01 run 0 000 00 | move fast\n00000200 38 v 01 chase 0 000 00 | follow\n"),
    );
    w(
        "wordnet/index.verb",
        &format!("{HEADER}chase v 1 0 1 0 00000200\nrun v 1 0 1 0 00000100\n"),
    );
    for pos in ["adj", "adv"] {
        w(&format!("wordnet/data.{pos}"), HEADER);
        w(&format!("wordnet/index.{pos}"), HEADER);
    }
    w("wordnet/noun.exc", "men man\n");

    w(
        "cmudict/cmudict.dict",
        ";;; toy\nthe DH AH0\ndog D AO1 G\ncat K AE1 T\nhat HH AE1 T\nchased CH EY1 S T\na AH0\na(2) EY1\nhappy HH AE1 P IY0\n",
    );
    w(
        "embeddings/toy.txt",
        "5 3\ndog 1 0.2 0\ncat 0.9 0.3 0.1\nhat 0 1 0\nchased 0.1 0.2 1\nhappy 0.5 0.5 0.5\n",
    );
    root.join("embeddings/toy.txt")
}

/// Arguments that point every module at the toy root.
pub fn toy_args(root: &Path) -> Vec<String> {
    vec![
        "--resources".into(),
        p(root).into(),
        "--set".into(),
        format!("embeddings={}", p(&root.join("embeddings/toy.txt"))),
    ]
}

pub const SENTENCES: &[&str] = &[
    "The dog chased the cat.",
    "A happy man abandoned his hat!",
    "Cats and dogs run.",
    "The cat in the hat.",
    "Why did the dog run? Because the cat chased it.",
    "I abandon all hope, happy or not.",
];

pub fn write_sentences(path: &Path, n: usize) {
    let mut text = String::from("text,humor\n");
    for i in 0..n {
        writeln!(text, "\"{}\",{}", SENTENCES[i % SENTENCES.len()], i % 2).unwrap();
    }
    fs::write(path, text).unwrap();
}

/// Feature CSV with random values where `fear` (column 0) and `np_count`
/// carry the label.
pub fn write_features(path: &Path, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = FEATURE_NAMES.join(",") + ",label\n";
    for _ in 0..n {
        let label: u8 = rng.gen_range(0..2);
        let mut row: Vec<String> = (0..FEATURE_NAMES.len())
            .map(|_| rng.gen_range(0..5).to_string())
            .collect();
        row[0] = (f64::from(label) * 2.0 + rng.gen::<f64>()).to_string();
        row[10] = (f64::from(label) + rng.gen::<f64>() * 1.5).to_string();
        row.push(label.to_string());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}
