mod config;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use humorkit::chunker::Chunker;
use humorkit::corpus::{load_dataset, load_embedding_rows, split_indices};
use humorkit::distsem::{EmbeddingFormat, EmbeddingTable};
use humorkit::emolex::EmoLex;
use humorkit::features::{featurize_dataset, FeatureGroup, FeatureTable, Resources, FEATURE_NAMES};
use humorkit::models::{
    feature_importance, train_boost, train_mlp, train_tree, EvalReport, ImportanceMethod, Matrix, Model, ModelFile,
};
use humorkit::morphy::Exceptions;
use humorkit::phonetics::PronLexicon;
use humorkit::postag::{read_tagged_corpus, train_tagger, TaggerModel};
use humorkit::wordnet::WordnetGraph;
use humorkit::Error;

use config::Config;
use error::CliError;

/// Tagger shipped with the binary, used when no `tagger` path is configured.
const SHIPPED_TAGGER: &str = include_str!("../../../data/tagger/model.json");

#[derive(Parser)]
#[command(name = "humorkit", version, about = "Hand-crafted humor features and classifiers")]
struct Cli {
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Config override, repeatable: `--set tree.max_depth=6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Resource root directory (overrides `HUMORKIT_RESOURCES`).
    #[arg(long, global = true)]
    resources: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Raw (or pre-tagged) sentences CSV to the 33-feature CSV.
    Featurize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Text column holds `token/TAG` sequences.
        #[arg(long)]
        pretagged: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Train the part-of-speech tagger from a `token/TAG` corpus.
    TrainTagger {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        /// Hold out the last N sentences and report accuracy on them.
        #[arg(long, default_value_t = 0)]
        holdout: usize,
    },
    /// Train on a seeded split of a feature CSV and report validation metrics.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum)]
        model_type: ModelType,
        #[arg(long, default_value = "combined")]
        feature_groups: String,
        #[arg(long)]
        model_out: PathBuf,
        #[command(flatten)]
        emb: EmbeddingArgs,
        /// Standardize features inside the MLP.
        #[arg(long)]
        normalize: bool,
        /// Also write the machine-readable report lines here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a saved model on a labeled feature CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        emb: EmbeddingArgs,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Print `id,score` for every row of a feature CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        emb: EmbeddingArgs,
    },
    /// Ranked feature importance.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "impurity")]
        method: String,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[command(flatten)]
        emb: EmbeddingArgs,
    },
}

#[derive(Args)]
struct EmbeddingArgs {
    /// One whitespace-separated vector per feature row (MLP only).
    #[arg(long)]
    embeddings_file: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelType {
    Tree,
    Boost,
    Mlp,
}

fn resource_error(module: &'static str, e: impl std::fmt::Display) -> CliError {
    CliError::Core(Error::Resource {
        module,
        message: e.to_string(),
    })
}

fn require(path: &Path, module: &'static str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(resource_error(module, format!("{} does not exist", path.display())))
    }
}

fn load_tagger(cfg: &Config) -> Result<TaggerModel, CliError> {
    match &cfg.tagger {
        Some(p) => {
            require(p, "postag")?;
            TaggerModel::load(p).map_err(|e| resource_error("postag", e))
        }
        None => TaggerModel::from_json(SHIPPED_TAGGER).map_err(|e| resource_error("postag", e)),
    }
}

fn load_resources(cfg: &Config, pretagged: bool) -> Result<Resources, CliError> {
    let (emolex_p, wn_p, cmu_p, emb_p) = (
        cfg.emolex_path(),
        cfg.wordnet_path(),
        cfg.cmudict_path(),
        cfg.embeddings_path(),
    );
    // check every path before spending time on loading
    require(&emolex_p, "emolex")?;
    require(&wn_p, "wordnet")?;
    require(&cmu_p, "phonetics")?;
    require(&emb_p, "distsem")?;
    if let Some(p) = &cfg.subordinators {
        require(p, "chunker")?;
    }

    let mut res = Resources::new();
    res.sense_cap = cfg.sense_cap;
    let exceptions = Exceptions::load_dir(&wn_p).map_err(|e| resource_error("wordnet", e))?;
    res.emolex = Some(
        EmoLex::load(&emolex_p)
            .map_err(|e| resource_error("emolex", e))?
            .with_exceptions(exceptions),
    );
    if !pretagged {
        res.tagger = Some(load_tagger(cfg)?);
    }
    if let Some(p) = &cfg.subordinators {
        res.chunker = Chunker::load_subordinators(p).map_err(|e| resource_error("chunker", e))?;
    }
    let format = cfg
        .embeddings_format
        .unwrap_or_else(|| EmbeddingFormat::from_path(&emb_p));
    res.embeddings = Some(EmbeddingTable::load(&emb_p, format).map_err(|e| resource_error("distsem", e))?);
    res.wordnet = Some(WordnetGraph::load(&wn_p).map_err(|e| resource_error("wordnet", e))?);
    res.pronunciations = Some(PronLexicon::load(&cmu_p).map_err(|e| resource_error("phonetics", e))?);
    info!("resources loaded");
    Ok(res)
}

fn load_embeddings(args: &EmbeddingArgs, rows: usize) -> Result<Option<Matrix>, CliError> {
    let Some(path) = &args.embeddings_file else {
        return Ok(None);
    };
    let vectors = load_embedding_rows(path)?;
    if vectors.len() != rows {
        return Err(Error::Alignment(format!("{} embedding rows for {rows} feature rows", vectors.len())).into());
    }
    Ok(Some(Matrix::from_rows(&vectors)?))
}

/// Columns of the canonical 33 that a model was trained on.
fn model_columns(file: &ModelFile) -> Result<Vec<usize>, CliError> {
    file.feature_names
        .iter()
        .map(|n| {
            FEATURE_NAMES
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| Error::Schema(format!("model feature {n:?} is not a canonical feature")).into())
        })
        .collect()
}

fn model_inputs(
    file: &ModelFile,
    table: &FeatureTable,
    emb: &EmbeddingArgs,
) -> Result<(Matrix, Option<Matrix>), CliError> {
    let x = table
        .matrix(FeatureGroup::Combined)
        .select_columns(&model_columns(file)?)?;
    let e = load_embeddings(emb, table.len())?;
    if let Model::Mlp(m) = &file.model {
        match &e {
            None if m.d_emb > 0 => {
                return Err(CliError::Config("this model needs --embeddings-file".into()));
            }
            Some(e) if e.cols() != m.d_emb => {
                return Err(Error::Shape(format!("embedding width {} but model expects {}", e.cols(), m.d_emb)).into());
            }
            _ => {}
        }
    }
    Ok((x, e))
}

fn print_report(out: &mut impl Write, header: &str, r: &EvalReport) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    writeln!(out, "{:<10} {:>8}", "metric", "value")?;
    for (name, v) in [
        ("accuracy", r.accuracy),
        ("precision", r.precision),
        ("recall", r.recall),
        ("f1", r.f1),
        ("roc_auc", r.roc_auc),
    ] {
        writeln!(out, "{name:<10} {v:>8.4}")?;
    }
    if !r.roc_auc_defined {
        writeln!(out, "note: only one class present, roc_auc reported as 0")?;
    }
    for line in r.machine_lines() {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Other(format!("cannot write output: {e}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(root) = cli.resources {
        cfg.resource_root = root;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Featurize {
            input,
            output,
            pretagged,
            jobs,
        } => {
            let res = load_resources(&cfg, pretagged)?;
            let examples = load_dataset(&input, &cfg.schema, None)?;
            let table = featurize_dataset(&examples, &res, jobs.unwrap_or(cfg.jobs), pretagged)?;
            table.write_csv(&output)?;
            info!("wrote {} rows to {}", table.len(), output.display());
        }
        Command::TrainTagger {
            corpus,
            output,
            epochs,
            holdout,
        } => {
            let sentences = read_tagged_corpus(&corpus)?;
            if holdout >= sentences.len() {
                return Err(CliError::Config(format!(
                    "holdout {holdout} leaves no training sentences ({} in corpus)",
                    sentences.len()
                )));
            }
            let (train, test) = sentences.split_at(sentences.len() - holdout);
            let model = train_tagger(train, epochs, cfg.seed)?;
            model.save(&output)?;
            writeln!(out, "trained_sentences={}", train.len()).map_err(io_err)?;
            if !test.is_empty() {
                writeln!(out, "holdout_sentences={}", test.len()).map_err(io_err)?;
                writeln!(out, "holdout_accuracy={}", model.accuracy(test)).map_err(io_err)?;
            }
        }
        Command::Train {
            features,
            model_type,
            feature_groups,
            model_out,
            emb,
            normalize,
            report,
        } => {
            let group: FeatureGroup = feature_groups.parse()?;
            let table = FeatureTable::read_csv(&features)?;
            let e = load_embeddings(&emb, table.len())?;
            if model_type == ModelType::Mlp && e.is_none() {
                return Err(CliError::Config("--model-type mlp requires --embeddings-file".into()));
            }
            let x = table.matrix(group);
            let (train_idx, val_idx) = split_indices(table.len(), cfg.val_fraction, cfg.seed)?;
            let xt = x.select_rows(&train_idx);
            let xv = x.select_rows(&val_idx);
            let yt: Vec<u8> = train_idx.iter().map(|&i| table.labels[i]).collect();
            let yv: Vec<u8> = val_idx.iter().map(|&i| table.labels[i]).collect();
            let (et, ev) = match &e {
                Some(e) => (Some(e.select_rows(&train_idx)), Some(e.select_rows(&val_idx))),
                None => (None, None),
            };
            let (tree_p, boost_p, mut mlp_p) = cfg.seeded();
            mlp_p.normalize |= normalize;
            let model = match model_type {
                ModelType::Tree => Model::Tree(train_tree(&xt, &yt, &tree_p)?),
                ModelType::Boost => Model::Boost(train_boost(&xt, &yt, &boost_p)?),
                ModelType::Mlp => Model::Mlp(train_mlp(&xt, et.as_ref(), &yt, &mlp_p)?),
            };
            // embeddings are only read by an MLP
            let ev = if model_type == ModelType::Mlp { ev } else { None };
            let r = model.evaluate(&xv, ev.as_ref(), &yv, 0.5)?;
            let file = ModelFile::new(model, group.names(), cfg.seed)?;
            file.save(&model_out)?;
            let header = format!(
                "model={} groups={} seed={} n_train={} n_val={}",
                file.model.type_name(),
                group.name(),
                cfg.seed,
                train_idx.len(),
                val_idx.len()
            );
            print_report(&mut out, &header, &r).map_err(io_err)?;
            if let Some(path) = report {
                let mut text = header + "\n";
                for l in r.machine_lines() {
                    text.push_str(&l);
                    text.push('\n');
                }
                std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
            }
        }
        Command::Eval {
            model,
            features,
            emb,
            threshold,
        } => {
            let file = ModelFile::load(&model)?;
            let table = FeatureTable::read_csv(&features)?;
            let (x, e) = model_inputs(&file, &table, &emb)?;
            let r = file.model.evaluate(&x, e.as_ref(), &table.labels, threshold)?;
            let header = format!("model={} seed={} n={}", file.model.type_name(), file.seed, table.len());
            print_report(&mut out, &header, &r).map_err(io_err)?;
        }
        Command::Predict { model, features, emb } => {
            let file = ModelFile::load(&model)?;
            let table = FeatureTable::read_csv(&features)?;
            let (x, e) = model_inputs(&file, &table, &emb)?;
            for (i, p) in file.model.predict_batch(&x, e.as_ref())?.iter().enumerate() {
                writeln!(out, "{i},{p}").map_err(io_err)?;
            }
        }
        Command::Explain {
            model,
            features,
            method,
            repeats,
            emb,
        } => {
            let method: ImportanceMethod = method.parse()?;
            let file = ModelFile::load(&model)?;
            let table = FeatureTable::read_csv(&features)?;
            let (x, e) = model_inputs(&file, &table, &emb)?;
            let ranked = feature_importance(
                &file.model,
                &x,
                e.as_ref(),
                &table.labels,
                &file.feature_names,
                method,
                repeats,
                cfg.seed,
            )?;
            writeln!(out, "feature,score").map_err(io_err)?;
            for (name, score) in ranked {
                writeln!(out, "{name},{score}").map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
