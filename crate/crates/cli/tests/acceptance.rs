//! Acceptance suite. Prints one PASS/FAIL line per criterion followed by the
//! measured values, and exits nonzero if any criterion fails.
//!
//! Resources come from `$HUMORKIT_RESOURCES` (default `<workspace>/resources`).
//! The ColBERT humor dataset is read from `$HUMORKIT_COLBERT_CSV` or
//! `<resources>/colbert/dataset.csv`; without it the table reproduction
//! cannot run and is reported as a failure, and the ordering and fusion
//! checks fall back to `<resources>/proxy/humor_proxy.csv`.

mod common;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use humorkit::chunker::{sse_features, Chunker, SseFeatures};
use humorkit::corpus::{load_dataset, split_indices, tokenize, CsvSchema, Example};
use humorkit::distsem::{EmbeddingFormat, EmbeddingTable};
use humorkit::emolex::EmoLex;
use humorkit::features::{featurize_dataset, featurize_text, FeatureGroup, FeatureTable, Resources};
use humorkit::models::{
    roc_auc, train_boost, train_mlp, train_tree, BoostParams, Matrix, MlpConfig, MlpModel, Model, TreeParams,
};
use humorkit::morphy::{Exceptions, Pos};
use humorkit::phonetics::{phonetic_features, PronLexicon};
use humorkit::postag::{parse_pretagged, TaggerModel};
use humorkit::rng::{derive_seed, seeded};
use humorkit::wordnet::{SynsetId, WordnetGraph};

const SEED: u64 = 42;
const VAL_FRACTION: f64 = 0.2;
const SUBSAMPLE: usize = 40_000;
const TABLE_TOLERANCE: f64 = 0.04;
const ORDERING_SLACK: f64 = 0.01;
const FUSION_SLACK: f64 = 0.02;
const BOW_DIM: usize = 64;
const FUZZ_SENTENCES: usize = 10_000;

/// Published accuracies per group (nrclex, syntactic, semantic, combined).
const TREE_TARGETS: [f64; 4] = [0.61, 0.72, 0.67, 0.74];
const BOOST_TARGETS: [f64; 4] = [0.61, 0.71, 0.65, 0.72];
const GROUPS: [FeatureGroup; 4] = [
    FeatureGroup::Nrclex,
    FeatureGroup::Syntactic,
    FeatureGroup::Semantic,
    FeatureGroup::Combined,
];

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("     {line}"));
    }

    fn blocked(reason: String) -> Self {
        Verdict {
            pass: false,
            lines: vec![format!("BLOCKED {reason}")],
        }
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn resource_root() -> PathBuf {
    std::env::var_os("HUMORKIT_RESOURCES").map_or_else(|| workspace().join("resources"), PathBuf::from)
}

fn load_resources(root: &Path) -> Result<Resources, String> {
    let need = |rel: &str| {
        let p = root.join(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(format!("{} is missing", p.display()))
        }
    };
    let wn_dir = need("wordnet")?;
    let emb = need("embeddings/glove100.bin")?;
    let mut res = Resources::new();
    let exceptions = Exceptions::load_dir(&wn_dir).map_err(|e| e.to_string())?;
    res.emolex = Some(
        EmoLex::load(&need("emolex/NRC-Emotion-Lexicon-Wordlevel-v0.92.txt")?)
            .map_err(|e| e.to_string())?
            .with_exceptions(exceptions),
    );
    res.tagger = Some(TaggerModel::load(&workspace().join("data/tagger/model.json")).map_err(|e| e.to_string())?);
    res.chunker = Chunker::default();
    res.embeddings = Some(EmbeddingTable::load(&emb, EmbeddingFormat::from_path(&emb)).map_err(|e| e.to_string())?);
    res.wordnet = Some(WordnetGraph::load(&wn_dir).map_err(|e| e.to_string())?);
    res.pronunciations = Some(PronLexicon::load(&need("cmudict/cmudict.dict")?).map_err(|e| e.to_string())?);
    Ok(res)
}

struct Corpus {
    name: String,
    examples: Vec<Example>,
    table: FeatureTable,
    featurize_secs: f64,
}

fn colbert_path(root: &Path) -> Option<PathBuf> {
    let p = std::env::var_os("HUMORKIT_COLBERT_CSV").map_or_else(|| root.join("colbert/dataset.csv"), PathBuf::from);
    p.exists().then_some(p)
}

fn prepare(name: &str, path: &Path, res: &Resources, limit: Option<usize>) -> Result<Corpus, String> {
    let mut examples = load_dataset(path, &CsvSchema::default(), None).map_err(|e| e.to_string())?;
    if let Some(limit) = limit.filter(|&l| examples.len() > l) {
        let mut idx: Vec<usize> = (0..examples.len()).collect();
        idx.shuffle(&mut seeded(SEED));
        idx.truncate(limit);
        idx.sort_unstable();
        examples = idx.into_iter().map(|i| examples[i].clone()).collect();
        for (k, e) in examples.iter_mut().enumerate() {
            e.id = k;
        }
    }
    let t = Instant::now();
    let table = featurize_dataset(&examples, res, 1, false).map_err(|e| e.to_string())?;
    Ok(Corpus {
        name: name.to_string(),
        examples,
        table,
        featurize_secs: t.elapsed().as_secs_f64(),
    })
}

struct Split {
    train: Vec<usize>,
    val: Vec<usize>,
}

impl Split {
    fn of(n: usize) -> Split {
        let (train, val) = split_indices(n, VAL_FRACTION, SEED).expect("valid split");
        Split { train, val }
    }

    fn labels(&self, y: &[u8]) -> (Vec<u8>, Vec<u8>) {
        (
            self.train.iter().map(|&i| y[i]).collect(),
            self.val.iter().map(|&i| y[i]).collect(),
        )
    }
}

/// Validation accuracy of tree and boost for each group, in `GROUPS` order.
fn group_accuracies(c: &Corpus) -> ([f64; 4], [f64; 4], f64) {
    let t = Instant::now();
    let split = Split::of(c.table.len());
    let (yt, yv) = split.labels(&c.table.labels);
    let mut tree = [0.0; 4];
    let mut boost = [0.0; 4];
    for (k, g) in GROUPS.iter().enumerate() {
        let x = c.table.matrix(*g);
        let (xt, xv) = (x.select_rows(&split.train), x.select_rows(&split.val));
        let tp = TreeParams {
            seed: SEED,
            ..TreeParams::default()
        };
        let bp = BoostParams {
            seed: SEED,
            ..BoostParams::default()
        };
        let m = Model::Tree(train_tree(&xt, &yt, &tp).unwrap());
        tree[k] = m.evaluate(&xv, None, &yv, 0.5).unwrap().accuracy;
        let m = Model::Boost(train_boost(&xt, &yt, &bp).unwrap());
        boost[k] = m.evaluate(&xv, None, &yv, 0.5).unwrap().accuracy;
    }
    (tree, boost, t.elapsed().as_secs_f64())
}

fn criterion_table(colbert: Option<&Corpus>, acc: Option<&([f64; 4], [f64; 4], f64)>) -> Verdict {
    let (Some(c), Some((tree, boost, secs))) = (colbert, acc) else {
        return Verdict::blocked(
            "ColBERT humor dataset not found (set HUMORKIT_COLBERT_CSV or place it at <resources>/colbert/dataset.csv)"
                .into(),
        );
    };
    let mut v = Verdict::new();
    v.note(format!(
        "{}: {} examples, featurized in {:.1}s, trained in {secs:.1}s",
        c.name,
        c.examples.len(),
        c.featurize_secs
    ));
    for (model, got, want) in [("tree", tree, TREE_TARGETS), ("boost", boost, BOOST_TARGETS)] {
        for k in 0..4 {
            let ok = (got[k] - want[k]).abs() <= TABLE_TOLERANCE;
            v.check(
                ok,
                format!(
                    "{model:<5} {:<9} accuracy {:.4} target {:.2} ±{TABLE_TOLERANCE}",
                    GROUPS[k].name(),
                    got[k],
                    want[k]
                ),
            );
        }
    }
    v
}

fn criterion_ordering(c: &Corpus, acc: &([f64; 4], [f64; 4], f64)) -> Verdict {
    let mut v = Verdict::new();
    v.note(format!("dataset {} ({} examples)", c.name, c.examples.len()));
    for (model, got) in [("tree", &acc.0), ("boost", &acc.1)] {
        let combined = got[3];
        for k in 0..3 {
            v.check(
                combined >= got[k] - ORDERING_SLACK,
                format!(
                    "{model:<5} combined {combined:.4} >= {} {:.4} - {ORDERING_SLACK}",
                    GROUPS[k].name(),
                    got[k]
                ),
            );
        }
    }
    v
}

/// Mean of per-word random vectors; every distinct token gets its own
/// vector from one seeded stream, in order of first appearance.
fn bag_of_words_embeddings(texts: &[&str], dim: usize, seed: u64) -> Matrix {
    let mut rng = seeded(seed);
    let mut vocab: HashMap<String, Vec<f64>> = HashMap::new();
    let scale = 1.0 / (dim as f64).sqrt();
    let rows: Vec<Vec<f64>> = texts
        .iter()
        .map(|t| {
            let tokens = tokenize(t).tokens;
            let mut sum = vec![0.0; dim];
            for tok in &tokens {
                let vec = vocab.entry(tok.clone()).or_insert_with(|| {
                    (0..dim)
                        .map(|_| if rng.gen::<bool>() { scale } else { -scale })
                        .collect()
                });
                for (s, x) in sum.iter_mut().zip(vec.iter()) {
                    *s += x;
                }
            }
            let n = tokens.len().max(1) as f64;
            sum.iter().map(|s| s / n).collect()
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

fn criterion_fusion(c: &Corpus) -> Verdict {
    let mut v = Verdict::new();
    let t = Instant::now();
    let cfg = MlpConfig {
        seed: SEED,
        normalize: true,
        ..MlpConfig::default()
    };
    v.check(
        cfg.epochs == 10 && cfg.batch_size == 64,
        format!(
            "recipe: {} epochs, batch {}, Adam, binary cross-entropy",
            cfg.epochs, cfg.batch_size
        ),
    );
    let texts: Vec<&str> = c.examples.iter().map(|e| e.text.as_str()).collect();
    let emb = bag_of_words_embeddings(&texts, BOW_DIM, derive_seed(SEED, 7, 0));
    let split = Split::of(c.table.len());
    let (yt, yv) = split.labels(&c.table.labels);
    let x = c.table.matrix(FeatureGroup::Combined);
    let (xt, xv) = (x.select_rows(&split.train), x.select_rows(&split.val));
    let (et, ev) = (emb.select_rows(&split.train), emb.select_rows(&split.val));
    let only = Model::Mlp(train_mlp(&xt, None, &yt, &cfg).unwrap());
    let fused = Model::Mlp(train_mlp(&xt, Some(&et), &yt, &cfg).unwrap());
    let a_only = only.evaluate(&xv, None, &yv, 0.5).unwrap().accuracy;
    let a_fused = fused.evaluate(&xv, Some(&ev), &yv, 0.5).unwrap().accuracy;
    v.note(format!(
        "dataset {}, {BOW_DIM}-d random-projection bag-of-words embeddings, standardized features",
        c.name
    ));
    v.check(
        a_fused >= a_only - FUSION_SLACK,
        format!("fusion accuracy {a_fused:.4} >= features-only {a_only:.4} - {FUSION_SLACK}"),
    );
    v.note(format!("runtime {:.1}s", t.elapsed().as_secs_f64()));
    v
}

fn fraction(s: &str) -> f64 {
    match s.split_once('/') {
        Some((p, q)) => p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

fn oracle_sse() -> (bool, String) {
    let text = fs::read_to_string(workspace().join("crates/core/tests/data/sse_golden.tsv")).unwrap();
    let chunker = Chunker::default();
    let mut n = 0;
    let mut bad = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut fields = line.split('\t');
        let sentence = parse_pretagged(fields.next().unwrap()).unwrap();
        let want: Vec<f64> = fields.map(fraction).collect();
        let got = sse_features(&chunker.chunk(&sentence), sentence.len()).to_array();
        for k in 0..14 {
            if got[k] != want[k] {
                bad.push(format!("{} on sentence {n}", SseFeatures::NAMES[k]));
            }
        }
        n += 1;
    }
    (
        n == 20 && bad.is_empty(),
        format!("SSE golden corpus: {n} sentences, mismatches {bad:?}"),
    )
}

/// Upward distances from `source` by plain BFS over the whole graph.
fn climb(g: &WordnetGraph, source: SynsetId) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.node_count()];
    dist[source.0 as usize] = Some(0);
    let mut queue = std::collections::VecDeque::from([source.0]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u as usize].unwrap();
        for &v in g.hypernyms(SynsetId(u)) {
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn oracle_wordnet(g: &WordnetGraph) -> (bool, String) {
    let dog = g.sense("dog", Pos::Noun, 1).unwrap();
    let cat = g.sense("cat", Pos::Noun, 1).unwrap();
    let dog_cat = g.path_similarity(dog, cat).unwrap();
    let n = g.node_count() as u32;
    let mut rng = seeded(derive_seed(SEED, 4, 1));
    let (mut pairs, mut mismatches) = (0, 0);
    while pairs < 50 {
        let a = SynsetId(rng.gen_range(4..n));
        let b = SynsetId(rng.gen_range(4..n));
        if g.pos(a) != g.pos(b) {
            continue;
        }
        let (da, db) = (climb(g, a), climb(g, b));
        let len = da.iter().zip(&db).filter_map(|(x, y)| Some((*x)? + (*y)?)).min();
        let want = len.map(|l| 1.0 / (1.0 + f64::from(l)));
        if g.path_similarity(a, b).unwrap() != want {
            mismatches += 1;
        }
        pairs += 1;
    }
    (
        dog_cat == Some(0.2) && mismatches == 0,
        format!("WordNet: dog.n.01/cat.n.01 = {dog_cat:?}, {mismatches}/{pairs} random same-POS pairs differ from BFS"),
    )
}

fn maximal_runs(keys: &[String]) -> (usize, usize) {
    let n = keys.len();
    let mut runs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let uniform = keys[i..=j].iter().all(|k| *k == keys[i]);
            let left = i == 0 || keys[i - 1] != keys[i];
            let right = j + 1 == n || keys[j + 1] != keys[i];
            if uniform && left && right {
                runs.push(j - i + 1);
            }
        }
    }
    (runs.len(), runs.into_iter().max().unwrap_or(0))
}

fn oracle_phonetics(lex: &PronLexicon) -> (bool, String) {
    let unstress = |p: &str| p.chars().filter(|c| !c.is_ascii_digit()).collect::<String>();
    let first_key = |pron: &[String]| unstress(&pron[0]);
    let rime_key = |pron: &[String]| {
        let at = pron.iter().rposition(|p| p.chars().any(|c| c.is_ascii_digit()))?;
        Some(pron[at..].iter().map(|p| unstress(p)).collect::<Vec<_>>().join(" "))
    };
    let mut words: Vec<&str> = lex.words().collect();
    words.sort_unstable();
    let mut by_first: HashMap<String, Vec<&str>> = HashMap::new();
    let mut by_rime: HashMap<String, Vec<&str>> = HashMap::new();
    for w in &words {
        let pron = lex.first_pronunciation(w).unwrap();
        by_first.entry(first_key(pron)).or_default().push(w);
        if let Some(r) = rime_key(pron) {
            by_rime.entry(r).or_default().push(w);
        }
    }
    let mut firsts: Vec<&Vec<&str>> = by_first.values().collect();
    firsts.sort();
    let mut rimes: Vec<&Vec<&str>> = by_rime.values().filter(|v| v.len() > 1).collect();
    rimes.sort();

    let mut rng = seeded(derive_seed(SEED, 4, 2));
    let mut mismatches = 0;
    let mut chains = 0;
    for _ in 0..1000 {
        let classes = [
            firsts[rng.gen_range(0..firsts.len())],
            firsts[rng.gen_range(0..firsts.len())],
            rimes[rng.gen_range(0..rimes.len())],
            rimes[rng.gen_range(0..rimes.len())],
        ];
        let len = rng.gen_range(0..16);
        let seq: Vec<&str> = (0..len)
            .map(|_| {
                let class = classes[rng.gen_range(0..classes.len())];
                class[rng.gen_range(0..class.len())]
            })
            .collect();
        let prons: Vec<&[String]> = seq.iter().map(|w| lex.first_pronunciation(w).unwrap()).collect();
        let allit: Vec<String> = prons.iter().map(|p| first_key(p)).collect();
        let rime: Vec<String> = prons.iter().filter_map(|p| rime_key(p)).collect();
        let (ac, am) = maximal_runs(&allit);
        let (rc, rm) = maximal_runs(&rime);
        chains += ac + rc;
        let got = phonetic_features(&humorkit::corpus::TokenizedText::from_surface(&seq), lex);
        if (got.allit_count, got.allit_max_len, got.rhyme_count, got.rhyme_max_len) != (ac, am, rc, rm) {
            mismatches += 1;
        }
    }
    (
        mismatches == 0,
        format!("phonetics: {mismatches}/1000 random in-lexicon sequences differ from the maximal-run oracle ({chains} chains)"),
    )
}

fn oracle_auc() -> (bool, String) {
    let mut rng = seeded(derive_seed(SEED, 4, 3));
    let y: Vec<u8> = (0..500).map(|_| rng.gen_range(0..2)).collect();
    // scores on a coarse grid so that ties are common
    let scores: Vec<f64> = y
        .iter()
        .map(|&l| (f64::from(l) * 0.3 + rng.gen::<f64>() * 20.0).round() / 20.0)
        .collect();
    let (mut num, mut pos, mut neg) = (0.0, 0usize, 0usize);
    for i in 0..500 {
        if y[i] == 1 {
            pos += 1;
            for j in 0..500 {
                if y[j] == 0 {
                    num += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        } else {
            neg += 1;
        }
    }
    let want = num / (pos * neg) as f64;
    let got = roc_auc(&scores, &y).unwrap();
    (
        (got - want).abs() < 1e-12,
        format!("roc_auc {got:.15} vs pairwise {want:.15} (tolerance 1e-12)"),
    )
}

fn worst_gradient_error(model: &mut MlpModel, x: &Matrix, emb: Option<&Matrix>, y: &[u8], coords: &[usize]) -> f64 {
    let rows: Vec<usize> = (0..x.rows()).collect();
    let (_, analytic) = model.loss_and_grad(x, emb, y, &rows).unwrap();
    let base = model.params_flat();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for &k in coords {
        let mut p = base.clone();
        p[k] = base[k] + h;
        model.set_params_flat(&p).unwrap();
        let up = model.loss_and_grad(x, emb, y, &rows).unwrap().0;
        p[k] = base[k] - h;
        model.set_params_flat(&p).unwrap();
        let down = model.loss_and_grad(x, emb, y, &rows).unwrap().0;
        let numeric = (up - down) / (2.0 * h);
        let rel = (analytic[k] - numeric).abs() / analytic[k].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    model.set_params_flat(&base).unwrap();
    worst
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn oracle_gradients() -> (bool, String) {
    let mut rng = seeded(derive_seed(SEED, 4, 4));
    let small = MlpConfig {
        hand_hidden: 7,
        hand_out: 5,
        emb_hidden: 9,
        emb_out: 4,
        head_hidden: 6,
        ..MlpConfig::default()
    };
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (config, d_emb, sample) in [
        (small, 0, None),
        (small, 6, None),
        (MlpConfig::default(), 16, Some(400)),
    ] {
        let x = random_matrix(6, 33, &mut rng);
        let e = random_matrix(6, d_emb.max(1), &mut rng);
        let y = [1, 0, 0, 1, 1, 0];
        let mut m = MlpModel::new(33, d_emb, config);
        let params: Vec<f64> = (0..m.n_params()).map(|_| rng.gen_range(-0.3..0.3)).collect();
        m.set_params_flat(&params).unwrap();
        let coords: Vec<usize> = match sample {
            None => (0..m.n_params()).collect(),
            Some(k) => (0..k).map(|_| rng.gen_range(0..m.n_params())).collect(),
        };
        checked += coords.len();
        worst = worst.max(worst_gradient_error(&mut m, &x, (d_emb > 0).then_some(&e), &y, &coords));
    }
    (
        worst < 1e-4,
        format!("MLP gradients: max relative error {worst:.2e} over {checked} coordinates (limit 1e-4)"),
    )
}

/// Best Gini split by trying every midpoint of every feature.
fn exhaustive_split(x: &Matrix, y: &[u8]) -> Option<(usize, Vec<bool>)> {
    let n = x.rows();
    let gini = |rows: &[usize]| {
        if rows.is_empty() {
            return 0.0;
        }
        let p = rows.iter().filter(|&&i| y[i] == 1).count() as f64 / rows.len() as f64;
        1.0 - p * p - (1.0 - p) * (1.0 - p)
    };
    let all: Vec<usize> = (0..n).collect();
    let parent = gini(&all);
    let mut best: Option<(f64, usize, Vec<bool>)> = None;
    for f in 0..x.cols() {
        let mut values: Vec<f64> = (0..n).map(|i| x.get(i, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let goes_left: Vec<bool> = (0..n).map(|i| x.get(i, f) <= t).collect();
            let left: Vec<usize> = all.iter().copied().filter(|&i| goes_left[i]).collect();
            let right: Vec<usize> = all.iter().copied().filter(|&i| !goes_left[i]).collect();
            let child = (left.len() as f64 * gini(&left) + right.len() as f64 * gini(&right)) / n as f64;
            let gain = parent - child;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.0 + 1e-12) {
                best = Some((gain, f, goes_left));
            }
        }
    }
    best.map(|(_, f, part)| (f, part))
}

fn oracle_tree_split() -> (bool, String) {
    let mut mismatches = Vec::new();
    for seed in 0..10u64 {
        let mut rng = seeded(derive_seed(SEED, 4, 100 + seed));
        // one decimal place so that value ties and gain ties both occur
        let x = Matrix::new(
            50,
            5,
            (0..250)
                .map(|_| (rng.gen_range(0.0..3.0_f64) * 10.0).round() / 10.0)
                .collect(),
        )
        .unwrap();
        let y: Vec<u8> = (0..50)
            .map(|i| u8::from(x.get(i, 2) + rng.gen_range(-1.0..1.0) > 1.5))
            .collect();
        let tree = train_tree(
            &x,
            &y,
            &TreeParams {
                max_depth: 1,
                ..TreeParams::default()
            },
        )
        .unwrap();
        let got = tree
            .root_split()
            .map(|s| (s.feature, (0..50).map(|i| x.get(i, s.feature) <= s.threshold).collect()));
        if got != exhaustive_split(&x, &y) {
            mismatches.push(seed);
        }
    }
    (
        mismatches.is_empty(),
        format!("tree root split vs exhaustive search on 10 random 50x5 matrices, mismatching seeds {mismatches:?}"),
    )
}

fn criterion_oracles(res: Option<&Resources>) -> Verdict {
    let mut v = Verdict::new();
    let (ok, line) = oracle_sse();
    v.check(ok, line);
    match res {
        Some(r) => {
            let (ok, line) = oracle_wordnet(r.wordnet.as_ref().unwrap());
            v.check(ok, line);
            let (ok, line) = oracle_phonetics(r.pronunciations.as_ref().unwrap());
            v.check(ok, line);
        }
        None => v.check(
            false,
            "WordNet and phonetics oracles need the resource directory".into(),
        ),
    }
    for (ok, line) in [oracle_auc(), oracle_gradients(), oracle_tree_split()] {
        v.check(ok, line);
    }
    v
}

fn cli(root: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let o = common::humorkit()
        .arg("--resources")
        .arg(root)
        .arg("--seed")
        .arg(SEED.to_string())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(o.stdout)
    } else {
        Err(format!(
            "humorkit {args:?} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        ))
    }
}

fn criterion_determinism(root: &Path, source: &Path) -> Result<Verdict, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |name: &str| dir.path().join(name);
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let text = fs::read_to_string(source).map_err(|e| e.to_string())?;
    let mut csv_rows = csv::Reader::from_reader(text.as_bytes());
    let mut writer = csv::Writer::from_path(d("input.csv")).map_err(|e| e.to_string())?;
    writer
        .write_record(csv_rows.headers().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut texts = Vec::new();
    for r in csv_rows.records().take(1500) {
        let r = r.map_err(|e| e.to_string())?;
        texts.push(r[0].to_string());
        writer.write_record(&r).map_err(|e| e.to_string())?;
    }
    writer.flush().map_err(|e| e.to_string())?;
    let emb = bag_of_words_embeddings(&texts.iter().map(String::as_str).collect::<Vec<_>>(), 16, 3);
    let mut emb_text = String::new();
    for i in 0..emb.rows() {
        let row: Vec<String> = emb.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(emb_text, "{}", row.join(" ")).unwrap();
    }
    fs::write(d("emb.txt"), emb_text).map_err(|e| e.to_string())?;

    let mut v = Verdict::new();
    let mut same =
        |what: &str, a: &[u8], b: &[u8]| v.check(a == b, format!("{what} identical across runs ({} bytes)", a.len()));
    let input = s(&d("input.csv"));
    let mut feature_files = Vec::new();
    for jobs in ["1", "8", "1"] {
        let out = d(&format!("features-{}.csv", feature_files.len()));
        cli(
            root,
            &["featurize", "--input", &input, "--output", &s(&out), "--jobs", jobs],
        )?;
        feature_files.push(fs::read(&out).map_err(|e| e.to_string())?);
    }
    same(
        "feature CSV, --jobs 1 vs --jobs 8",
        &feature_files[0],
        &feature_files[1],
    );
    same("feature CSV, repeated run", &feature_files[0], &feature_files[2]);

    let features = s(&d("features-0.csv"));
    let emb_file = s(&d("emb.txt"));
    for model in ["tree", "boost", "mlp"] {
        let mut artifacts = Vec::new();
        for run in 0..2 {
            let m = s(&d(&format!("{model}-{run}.json")));
            let r = s(&d(&format!("{model}-{run}.report")));
            let mut args = vec![
                "train",
                "--features",
                &features,
                "--model-type",
                model,
                "--model-out",
                &m,
                "--report",
                &r,
            ];
            if model == "mlp" {
                args.extend(["--embeddings-file", emb_file.as_str()]);
            }
            let train_out = cli(root, &args)?;
            let mut eval = vec!["eval", "--model", &m, "--features", &features];
            let mut predict = vec!["predict", "--model", &m, "--features", &features];
            if model == "mlp" {
                eval.extend(["--embeddings-file", emb_file.as_str()]);
                predict.extend(["--embeddings-file", emb_file.as_str()]);
            }
            let eval_out = cli(root, &eval)?;
            let predict_out = cli(root, &predict)?;
            let explain_out = if model == "mlp" {
                Vec::new()
            } else {
                cli(
                    root,
                    &[
                        "explain",
                        "--model",
                        &m,
                        "--features",
                        &features,
                        "--method",
                        "permutation",
                        "--repeats",
                        "3",
                    ],
                )?
            };
            artifacts.push([
                fs::read(&m).map_err(|e| e.to_string())?,
                fs::read(&r).map_err(|e| e.to_string())?,
                train_out,
                eval_out,
                predict_out,
                explain_out,
            ]);
        }
        for (k, what) in [
            "model file",
            "report file",
            "train output",
            "eval output",
            "predictions",
            "explanation",
        ]
        .iter()
        .enumerate()
        {
            if model == "mlp" && k == 5 {
                continue;
            }
            same(&format!("{model} {what}"), &artifacts[0][k], &artifacts[1][k]);
        }
    }
    Ok(v)
}

fn fuzz_sentence(rng: &mut impl Rng, vocab: &[&str]) -> String {
    const PUNCT: [&str; 8] = [".", ",", "!", "?", "'s", "...", "\"", "-"];
    let len = rng.gen_range(0..30);
    let mut words = Vec::with_capacity(len);
    for _ in 0..len {
        let mut w = match rng.gen_range(0..20) {
            0 => (0..rng.gen_range(1..8))
                .map(|_| rng.gen_range(b'a'..=b'z') as char)
                .collect(),
            1 => rng.gen_range(0..1000).to_string(),
            _ => vocab[rng.gen_range(0..vocab.len())].to_string(),
        };
        if rng.gen_range(0..6) == 0 {
            w = w.to_uppercase();
        }
        if rng.gen_range(0..5) == 0 {
            w.push_str(PUNCT[rng.gen_range(0..PUNCT.len())]);
        }
        words.push(w);
    }
    words.join(" ")
}

fn criterion_fuzz(res: &Resources, corpus: &Corpus) -> Verdict {
    let mut vocab: Vec<String> = corpus.examples.iter().flat_map(|e| tokenize(&e.text).tokens).collect();
    vocab.sort_unstable();
    vocab.dedup();
    let vocab: Vec<&str> = vocab.iter().map(String::as_str).collect();
    let mut rng = seeded(derive_seed(SEED, 6, 0));
    let mut violations: HashMap<&str, usize> = HashMap::new();
    let mut errors = 0;
    for _ in 0..FUZZ_SENTENCES {
        let text = fuzz_sentence(&mut rng, &vocab);
        let n_tokens = tokenize(&text).len() as f64;
        let f = match featurize_text(&text, res) {
            Ok(f) => f,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        let mut flag = |name, bad: bool| {
            if bad {
                *violations.entry(name).or_default() += 1;
            }
        };
        flag("finite", f.iter().any(|x| !x.is_finite()));
        flag("disconnection >= repetition", f[24] < f[25]);
        flag("sense_farmost >= sense_closest", f[27] < f[28]);
        flag("lr_* in [0,1]", f[14..17].iter().any(|x| !(0.0..=1.0).contains(x)));
        flag("emotion counts <= tokens", f[..10].iter().any(|&x| x > n_tokens));
        flag("allit_max_len != 1", f[30] == 1.0);
        flag("rhyme_max_len != 1", f[32] == 1.0);
    }
    let mut v = Verdict::new();
    let total: usize = violations.values().sum();
    v.check(
        total == 0 && errors == 0,
        format!("{FUZZ_SENTENCES} generated sentences: {total} invariant violations, {errors} featurization errors"),
    );
    let mut names: Vec<_> = violations.into_iter().collect();
    names.sort();
    for (name, count) in names {
        v.note(format!("{name}: {count}"));
    }
    v
}

fn main() -> ExitCode {
    let root = resource_root();
    let t = Instant::now();
    let res = load_resources(&root);
    let res_ok = res.as_ref().ok();
    if let Err(e) = &res {
        println!("resources unavailable: {e}");
    }

    let colbert = match (res_ok, colbert_path(&root)) {
        (Some(r), Some(p)) => match prepare("ColBERT", &p, r, Some(SUBSAMPLE)) {
            Ok(c) => Some(c),
            Err(e) => {
                println!("cannot featurize {}: {e}", p.display());
                None
            }
        },
        _ => None,
    };
    let proxy = res_ok.and_then(|r| prepare("proxy", &root.join("proxy/humor_proxy.csv"), r, None).ok());
    let colbert_acc = colbert.as_ref().map(group_accuracies);
    let main_corpus = colbert.as_ref().or(proxy.as_ref());
    let main_acc = match (&colbert_acc, main_corpus) {
        (Some(a), _) => Some(*a),
        (None, Some(c)) => Some(group_accuracies(c)),
        _ => None,
    };

    let missing = |what: &str| Verdict::blocked(format!("{what} unavailable under {}", root.display()));
    let verdicts: Vec<(&str, Verdict)> = vec![
        (
            "1 table reproduction, tree and boost per feature group",
            criterion_table(colbert.as_ref(), colbert_acc.as_ref()),
        ),
        (
            "2 combined features >= each single group - 0.01",
            match (main_corpus, &main_acc) {
                (Some(c), Some(a)) => criterion_ordering(c, a),
                _ => missing("labeled corpus"),
            },
        ),
        (
            "3 fusion MLP >= features-only MLP - 0.02",
            main_corpus.map_or_else(|| missing("labeled corpus"), criterion_fusion),
        ),
        ("4 oracle suites", criterion_oracles(res_ok)),
        (
            "5 determinism of the CLI pipeline",
            match main_corpus {
                Some(_) if res_ok.is_some() => {
                    let source = colbert_path(&root)
                        .filter(|_| colbert.is_some())
                        .unwrap_or_else(|| root.join("proxy/humor_proxy.csv"));
                    criterion_determinism(&root, &source).unwrap_or_else(Verdict::blocked)
                }
                _ => missing("resources"),
            },
        ),
        (
            "6 feature invariants under fuzzing",
            match (res_ok, main_corpus) {
                (Some(r), Some(c)) => criterion_fuzz(r, c),
                _ => missing("resources"),
            },
        ),
    ];

    let mut failed = 0;
    println!();
    for (name, v) in &verdicts {
        println!("[{}] {name}", if v.pass { "PASS" } else { "FAIL" });
        for l in &v.lines {
            println!("       {l}");
        }
        failed += usize::from(!v.pass);
    }
    println!(
        "\nacceptance: {} passed, {failed} failed ({:.1}s)",
        verdicts.len() - failed,
        t.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
