//! `ssnb` command line: corpus training and prediction, corpus generation,
//! grid runs and their analysis, and feature-selection comparisons.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::classifier::{log_joint, train_supervised, NBModel};
use crate::corpus::{
    load_corpus, load_labeled, load_unlabeled, write_labeled, write_unlabeled, Corpus, CorpusKind, UnlabeledCorpus,
};
use crate::em::{train_em, EmConfig};
use crate::harness::{
    compare_feature_selection, curve_shape, degradation_interval, helpful_interval, run_grid, write_svg,
    AccuracySurface, DataSource, GridConfig, Method, SelectionConfig,
};
use crate::math::normalize_log_weights;
use crate::synth::{generate, generate_table1, table1_generator, GeneratorConfig, FIGURE1_BLOCKS, FIGURE2_BLOCKS};
use crate::vocabulary::{
    build_word_pool, load_wordlist, truncate, vectorize, LabeledVectors, UnlabeledVectors, Vocabulary,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "ssnb", version, about = "Semi-supervised naive Bayes experiments")]
pub struct Cli {
    /// Global seed; commands with their own seed flag prefer it.
    #[arg(long, global = true, env = "SSNB_SEED")]
    pub seed: Option<u64>,

    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a supervised or EM model.
    Train(TrainArgs),
    /// Label sentences with a trained model.
    Predict(PredictArgs),
    /// Generate synthetic corpora.
    Generate(GenerateArgs),
    /// Run an experiment grid.
    Grid(GridArgs),
    /// Report intervals and curve shapes of a grid CSV.
    Analyze(AnalyzeArgs),
    /// Score features with information gain and compare selections.
    SelectFeatures(SelectArgs),
}

#[derive(Debug, Args)]
pub struct EmFlags {
    /// JSON EM config; flags override its fields.
    #[arg(long)]
    pub em_config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl EmFlags {
    fn resolve(&self) -> Result<EmConfig> {
        let mut config = match &self.em_config {
            Some(path) => read_json::<EmConfig>(path, "EM config")?,
            None => EmConfig::default(),
        };
        if let Some(a) = self.alpha {
            config.alpha = a;
        }
        if let Some(l) = self.lambda {
            config.lambda = l;
        }
        if let Some(m) = self.max_iterations {
            config.max_iterations = m;
        }
        if let Some(t) = self.tolerance {
            config.rel_tolerance = t;
        }
        config.validate()?;
        Ok(config)
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.em_config.iter().cloned().collect()
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub labeled: PathBuf,
    /// Unlabeled corpus; enables EM and adds its words to the pool.
    #[arg(long)]
    pub unlabeled: Option<PathBuf>,
    /// Train on the labeled corpus only, keeping the unlabeled words in
    /// the vocabulary.
    #[arg(long)]
    pub supervised: bool,
    #[command(flatten)]
    pub em: EmFlags,
    /// Dictionary size; defaults to every observed word.
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Words appended after the observed ones.
    #[arg(long)]
    pub wordlist: Option<PathBuf>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// EM trace CSV; defaults to `<out>.trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// The input carries gold labels; accuracy is logged.
    #[arg(long)]
    pub labeled: bool,
    /// JSONL predictions; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Ten company pools and a 5342-sentence unlabeled pool.
    Table1,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, default_value = "data")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated seeds replacing the config's list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub block: usize,
    /// Minimum accuracy loss for the degradation interval.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub labeled: PathBuf,
    #[arg(long)]
    pub unlabeled: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub em: EmFlags,
    /// Selected size as a share of the word pool.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Hardened pseudo-labels instead of soft responsibilities.
    #[arg(long)]
    pub hard: bool,
    /// Leave test words out of the pool.
    #[arg(long)]
    pub exclude_test_words: bool,
    /// Also train on both selections and print the accuracy table.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, default_value = "features")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    timestamp: String,
}

impl RunManifest {
    fn new(command: &'static str, config: serde_json::Value, seeds: Vec<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            seeds,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: format!("invalid {what}: {e}"),
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn to_value(value: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args, cli.seed.unwrap_or(0)),
        Command::Predict(args) => cmd_predict(args),
        Command::Generate(args) => cmd_generate(args, cli.seed),
        Command::Grid(args) => cmd_grid(args, cli.seed),
        Command::Analyze(args) => cmd_analyze(args),
        Command::SelectFeatures(args) => cmd_select(args, cli.seed.unwrap_or(0)),
    }
}

fn cmd_train(args: TrainArgs, seed: u64) -> Result<()> {
    let config = args.em.resolve()?;
    let labeled = load_labeled(&args.labeled)?;
    if labeled.is_empty() {
        return Err(Error::validation(format!("{} has no sentences", args.labeled.display())));
    }
    let unlabeled = match &args.unlabeled {
        Some(p) => load_unlabeled(p)?,
        None => UnlabeledCorpus::new(Vec::new())?,
    };
    let fallback = match &args.wordlist {
        Some(p) => load_wordlist(p)?,
        None => Vec::new(),
    };
    let empty_test = crate::corpus::LabeledCorpus::empty(labeled.class_names().to_vec());
    let pool = build_word_pool(&labeled, &empty_test, &unlabeled, &fallback, seed);
    let vocab = truncate(&pool, args.vocab_size.unwrap_or(pool.observed_len().max(1)))?;
    let l = LabeledVectors::from_corpus(&labeled, &vocab);
    let u = UnlabeledVectors::from_corpus(&unlabeled, &vocab);
    let (model, trace) = if args.unlabeled.is_some() && !args.supervised {
        train_em(&l, &u, &config)?
    } else {
        let model = train_supervised(&l, config.alpha)?;
        let (_, trace) = train_em(&l, &UnlabeledVectors::empty(vocab.size()), &config)?;
        (model, trace)
    };
    log::info!(
        "trained on {} labeled / {} unlabeled sentences, V = {}, {} EM iterations",
        labeled.len(),
        unlabeled.len(),
        vocab.size(),
        trace.iterations
    );
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let model = model.with_vocabulary(vocab.words().to_vec())?;
    model.save(&args.out)?;
    let trace_path = args.trace.clone().unwrap_or_else(|| sibling(&args.out, ".trace.csv"));
    trace.write_csv(&trace_path)?;

    let mut manifest = RunManifest::new(
        "train",
        json!({"em": to_value(&config), "supervised": args.supervised, "vocab_size": vocab.size(), "pool_seed": seed}),
        vec![seed],
    );
    for p in [Some(&args.labeled), args.unlabeled.as_ref(), args.wordlist.as_ref()].into_iter().flatten() {
        manifest.input(p)?;
    }
    for p in args.em.inputs() {
        manifest.input(&p)?;
    }
    manifest.output(&args.out);
    manifest.output(&trace_path);
    manifest.write(&sibling(&args.out, ".manifest.json"))
}

#[derive(Serialize)]
struct Prediction<'a> {
    id: &'a str,
    label: &'a str,
    posterior: Vec<f64>,
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = NBModel::load(&args.model)?;
    let words = model
        .vocabulary
        .clone()
        .ok_or_else(|| Error::validation(format!("{} stores no vocabulary", args.model.display())))?;
    let vocab = Vocabulary::from_words(words)?;
    let corpus = load_corpus(
        &args.input,
        if args.labeled { CorpusKind::Labeled } else { CorpusKind::Unlabeled },
    )?;
    let (sentences, gold): (Vec<_>, Vec<Option<usize>>) = match &corpus {
        Corpus::Labeled(c) => {
            if c.class_names() != model.class_names.as_slice() {
                return Err(Error::validation("input classes differ from the model's classes"));
            }
            (c.sentences().iter().collect(), c.sentences().iter().map(|s| s.label).collect())
        }
        Corpus::Unlabeled(c) => (c.sentences().iter().collect(), vec![None; c.len()]),
    };
    let mut out = String::new();
    let mut correct = 0usize;
    for (s, g) in sentences.iter().zip(&gold) {
        let mut scores = log_joint(&model, &vectorize(s, &vocab))?;
        let label = crate::classifier::argmax(&scores);
        normalize_log_weights(&mut scores);
        if *g == Some(label) {
            correct += 1;
        }
        let line = serde_json::to_string(&Prediction {
            id: &s.id,
            label: &model.class_names[label],
            posterior: scores,
        })
        .map_err(|e| Error::Internal(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    if matches!(corpus, Corpus::Labeled(_)) && !sentences.is_empty() {
        log::info!("accuracy {:.4} on {} sentences", correct as f64 / sentences.len() as f64, sentences.len());
    }
    match &args.out {
        Some(path) => fs::write(path, out).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_generate(args: GenerateArgs, seed: Option<u64>) -> Result<()> {
    create_dir(&args.out)?;
    match (&args.config, args.preset) {
        (Some(path), None) => {
            let mut config: GeneratorConfig = read_json(path, "generator config")?;
            if let Some(s) = seed {
                config.seed = s;
            }
            config.validate()?;
            let data = generate(&config)?;
            let mut manifest = RunManifest::new("generate", to_value(&config), vec![config.seed]);
            manifest.input(path)?;
            let files = [
                ("labeled.jsonl", Some(&data.labeled), None),
                ("unlabeled.jsonl", None, Some(&data.unlabeled)),
                ("test.jsonl", Some(&data.test), None),
            ];
            for (name, labeled, unlabeled) in files {
                let p = args.out.join(name);
                match (labeled, unlabeled) {
                    (Some(l), _) => write_labeled(&p, l)?,
                    (_, Some(u)) => write_unlabeled(&p, u)?,
                    _ => unreachable!(),
                }
                manifest.output(&p);
            }
            let model_path = args.out.join("true_model.json");
            data.true_model.save(&model_path)?;
            manifest.output(&model_path);
            log::info!(
                "generated {} labeled, {} unlabeled, {} test sentences in {}",
                data.labeled.len(),
                data.unlabeled.len(),
                data.test.len(),
                args.out.display()
            );
            manifest.write(&args.out.join("manifest.json"))
        }
        (None, Some(Preset::Table1)) => {
            let config = table1_generator(seed.unwrap_or(0));
            let data = generate_table1(&config)?;
            let mut manifest = RunManifest::new("generate", json!({"preset": "table1", "generator": to_value(&config)}), vec![config.seed]);
            let labeled_dir = args.out.join("labeled");
            create_dir(&labeled_dir)?;
            for (company, pool) in &data.pools {
                let p = labeled_dir.join(format!("{}.jsonl", company.code));
                write_labeled(&p, pool)?;
                manifest.output(&p);
            }
            let unlabeled_path = args.out.join("unlabeled.jsonl");
            write_unlabeled(&unlabeled_path, &data.unlabeled)?;
            manifest.output(&unlabeled_path);
            let model_path = args.out.join("true_model.json");
            data.true_model.save(&model_path)?;
            manifest.output(&model_path);
            for (name, order) in [("grid_figure1.json", FIGURE1_BLOCKS), ("grid_figure2.json", FIGURE2_BLOCKS)] {
                let grid = GridConfig::new(
                    DataSource::Files {
                        labeled_blocks: order.iter().map(|c| PathBuf::from(format!("labeled/{c}.jsonl"))).collect(),
                        unlabeled: PathBuf::from("unlabeled.jsonl"),
                        test: None,
                        test_fraction: 0.2,
                        split_seed: config.seed,
                    },
                    vec![100, 200, 400, 800, 1200, 1600, 2000, 2400],
                );
                let p = args.out.join(name);
                write_json(&p, &grid)?;
                manifest.output(&p);
            }
            let labeled_total: usize = data.pools.iter().map(|(_, p)| p.len()).sum();
            log::info!(
                "table preset: {} labeled sentences in {} pools, {} unlabeled",
                labeled_total,
                data.pools.len(),
                data.unlabeled.len()
            );
            manifest.write(&args.out.join("manifest.json"))
        }
        _ => Err(Error::validation("generate needs exactly one of --config or --preset")),
    }
}

fn cmd_grid(args: GridArgs, seed: Option<u64>) -> Result<()> {
    let mut config = GridConfig::load(&args.config)?;
    if let Some(seeds) = args.seeds {
        config.seeds = seeds;
    } else if let Some(s) = seed {
        config.seeds = vec![s];
    }
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(Error::validation("--workers must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let surface = pool.install(|| run_grid(&config))?;
    if surface.records.is_empty() {
        return Err(Error::validation("every grid cell failed; see the log"));
    }
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("grid", to_value(&config), config.seeds.clone());
    manifest.input(&args.config)?;
    for p in config.input_files() {
        manifest.input(&p)?;
    }
    let csv_path = args.out.join("surface.csv");
    surface.write_csv(&csv_path)?;
    manifest.output(&csv_path);
    for block in surface.blocks() {
        let p = args.out.join(format!("block_{block}.svg"));
        write_svg(&surface, block, &p)?;
        manifest.output(&p);
    }
    if !surface.failures.is_empty() {
        let p = args.out.join("failures.json");
        write_json(&p, &surface.failures)?;
        manifest.output(&p);
    }
    log::info!(
        "{} records, {} failed cells, written to {}",
        surface.records.len(),
        surface.failures.len(),
        args.out.display()
    );
    manifest.write(&args.out.join("manifest.json"))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let surface = AccuracySurface::read_csv(&args.csv)?;
    let helpful = helpful_interval(&surface, args.block)?;
    let degradation = degradation_interval(&surface, args.block, args.delta)?;
    let mut curves = Vec::new();
    for step in surface.unlabeled_sizes(args.block) {
        for method in [Method::Supervised, Method::Em] {
            if surface.median_curve(args.block, step, method).is_empty() {
                continue;
            }
            match curve_shape(&surface, args.block, step, method) {
                Ok(shape) => curves.push(json!({
                    "unlabeled_size": step,
                    "method": method.to_string(),
                    "peak_vocab": shape.peak_vocab,
                    "peak_accuracy": shape.peak_accuracy,
                    "rises_then_falls": shape.rises_then_falls,
                })),
                Err(e) => log::warn!("no curve shape for unlabeled = {step}, {method}: {e}"),
            }
        }
    }
    let report = json!({
        "block": args.block,
        "delta": args.delta,
        "helpful_interval": helpful,
        "degradation_interval": degradation,
        "curves": curves,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn cmd_select(args: SelectArgs, seed: u64) -> Result<()> {
    let config = SelectionConfig {
        em: args.em.resolve()?,
        vocab_fraction: args.fraction,
        vocab_size: args.vocab_size,
        hard: args.hard,
        include_test_words: !args.exclude_test_words,
        seed,
    };
    let labeled = load_labeled(&args.labeled)?;
    let unlabeled = load_unlabeled(&args.unlabeled)?;
    let test = load_labeled(&args.test)?;
    let comparison = compare_feature_selection(&labeled, &unlabeled, &test, &config)?;
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("select-features", to_value(&config), vec![seed]);
    for p in [&args.labeled, &args.unlabeled, &args.test] {
        manifest.input(p)?;
    }
    let pseudo = args.out.join("scores_pseudo_label.csv");
    comparison.pseudo_label_scores.write_csv(&comparison.pool, &pseudo)?;
    manifest.output(&pseudo);
    let plain = args.out.join("scores_labeled_only.csv");
    comparison.labeled_only_scores.write_csv(&comparison.pool, &plain)?;
    manifest.output(&plain);
    if args.compare {
        let table = comparison.to_csv();
        let p = args.out.join("comparison.csv");
        fs::write(&p, &table).map_err(|e| Error::io(&p, e))?;
        manifest.output(&p);
        print!("{table}");
        println!(
            "# pseudo_label >= labeled_only: {}",
            comparison.pseudo_label_at_least_labeled_only()
        );
    }
    manifest.write(&args.out.join("manifest.json"))
}
