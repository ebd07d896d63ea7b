//! Experiment grid over labeled blocks, unlabeled amounts, vocabulary sizes
//! and seeds, plus analysis of the resulting accuracy surfaces.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{evaluate, train_supervised};
use crate::corpus::{load_labeled, load_unlabeled, split, LabeledCorpus, UnlabeledCorpus};
use crate::em::{e_step, log_likelihood, train_em, EmConfig};
use crate::feature_selection::{expected_counts, information_gain, select_features, FeatureScores};
use crate::math::median;
use crate::rng;
use crate::synth::{generate, GeneratorConfig, TrueModel};
use crate::vocabulary::{
    build_word_pool, load_wordlist, synthetic_wordlist, truncate, LabeledVectors, OrderedWordPool,
    UnlabeledVectors, Vocabulary,
};
use crate::{Error, Result};

/// Cumulative unlabeled sizes of the three additions (0 = supervised).
pub const DEFAULT_UNLABELED_STEPS: [usize; 4] = [0, 1485, 2999, 5342];

pub const CSV_COLUMNS: [&str; 9] = [
    "labeled_block",
    "labeled_size",
    "unlabeled_size",
    "vocab_size",
    "seed",
    "method",
    "accuracy",
    "log_likelihood",
    "em_iterations",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Supervised,
    Em,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Supervised => "supervised",
            Method::Em => "em",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "supervised" => Ok(Method::Supervised),
            "em" => Ok(Method::Em),
            other => Err(Error::validation(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolOrder {
    /// Labeled and test words, then unlabeled words, then the fallback list.
    #[default]
    Procedure,
    /// Synthetic data only: every class-specific generator word, then every
    /// shared noise word, then the fallback list.
    InformativeFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Block `k` trains on files `0..=k`. Without an explicit test file each
    /// block file is split once and the held-out parts form a test set
    /// shared by every block.
    Files {
        labeled_blocks: Vec<PathBuf>,
        unlabeled: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test: Option<PathBuf>,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
        #[serde(default)]
        split_seed: u64,
    },
    /// One generated corpus per grid seed (the seed replaces
    /// `generator.seed`); block `k` is the first `labeled_blocks[k]`
    /// labeled sentences.
    Synthetic {
        generator: GeneratorConfig,
        labeled_blocks: Vec<usize>,
    },
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_steps() -> Vec<usize> {
    DEFAULT_UNLABELED_STEPS.to_vec()
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_methods() -> Vec<Method> {
    vec![Method::Supervised, Method::Em]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub data: DataSource,
    #[serde(default = "default_steps")]
    pub unlabeled_steps: Vec<usize>,
    pub vocab_sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub em: EmConfig,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub pool_order: PoolOrder,
    /// Whether test-set words enter the first pool segment.
    #[serde(default = "default_true")]
    pub include_test_words: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_wordlist: Option<PathBuf>,
    /// Generated pseudo-words appended after any fallback list.
    #[serde(default)]
    pub fallback_synthetic_words: usize,
}

impl GridConfig {
    pub fn new(data: DataSource, vocab_sizes: Vec<usize>) -> Self {
        GridConfig {
            data,
            unlabeled_steps: default_steps(),
            vocab_sizes,
            seeds: default_seeds(),
            em: EmConfig::default(),
            methods: default_methods(),
            pool_order: PoolOrder::default(),
            include_test_words: true,
            fallback_wordlist: None,
            fallback_synthetic_words: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_sizes.is_empty() || self.vocab_sizes[0] == 0 {
            return Err(Error::validation("vocab_sizes must be non-empty and positive"));
        }
        if self.vocab_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("vocab_sizes must be strictly ascending"));
        }
        if self.unlabeled_steps.first() != Some(&0) {
            return Err(Error::validation("unlabeled_steps must start at 0"));
        }
        if self.unlabeled_steps.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::validation("unlabeled_steps must be non-decreasing"));
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("seeds is empty"));
        }
        let distinct: BTreeSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::validation("seeds contain duplicates"));
        }
        if self.methods.is_empty() {
            return Err(Error::validation("methods is empty"));
        }
        self.em.validate()?;
        match &self.data {
            DataSource::Files { labeled_blocks, test_fraction, test, .. } => {
                if labeled_blocks.is_empty() {
                    return Err(Error::validation("labeled_blocks is empty"));
                }
                if test.is_none() && !(*test_fraction > 0.0 && *test_fraction < 1.0) {
                    return Err(Error::validation("test_fraction must lie in (0, 1)"));
                }
                if self.pool_order == PoolOrder::InformativeFirst {
                    return Err(Error::validation(
                        "informative_first pool order needs a synthetic data source",
                    ));
                }
            }
            DataSource::Synthetic { generator, labeled_blocks } => {
                generator.validate()?;
                if labeled_blocks.is_empty() || labeled_blocks[0] == 0 {
                    return Err(Error::validation("labeled_blocks must be non-empty and positive"));
                }
                if labeled_blocks.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::validation("labeled_blocks must be non-decreasing"));
                }
                if generator.n_test == 0 {
                    return Err(Error::validation("synthetic grids need n_test > 0"));
                }
            }
        }
        Ok(())
    }

    /// Reads a JSON config; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: GridConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: format!("invalid grid config: {e}"),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DataSource::Files { labeled_blocks, unlabeled, test, .. } = &mut config.data {
            labeled_blocks.iter_mut().for_each(resolve);
            resolve(unlabeled);
            if let Some(t) = test {
                resolve(t);
            }
        }
        if let Some(w) = &mut config.fallback_wordlist {
            resolve(w);
        }
        config.validate()?;
        Ok(config)
    }

    /// Input files the grid reads, for manifests.
    pub fn input_files(&self) -> Vec<PathBuf> {
        let mut files = Vec::new();
        if let DataSource::Files { labeled_blocks, unlabeled, test, .. } = &self.data {
            files.extend(labeled_blocks.iter().cloned());
            files.push(unlabeled.clone());
            files.extend(test.iter().cloned());
        }
        files.extend(self.fallback_wordlist.iter().cloned());
        files
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub labeled_block: usize,
    pub labeled_size: usize,
    pub unlabeled_size: usize,
    pub vocab_size: usize,
    pub seed: u64,
    pub method: Method,
    pub accuracy: f64,
    pub log_likelihood: f64,
    pub em_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub labeled_block: usize,
    pub unlabeled_size: usize,
    pub vocab_size: usize,
    pub seed: u64,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracySurface {
    pub records: Vec<Record>,
    pub failures: Vec<CellFailure>,
}

struct Dataset {
    /// Cumulative training corpus per block.
    blocks: Vec<LabeledCorpus>,
    test: LabeledCorpus,
    unlabeled: UnlabeledCorpus,
    true_model: Option<TrueModel>,
}

fn load_file_dataset(
    labeled_blocks: &[PathBuf],
    unlabeled: &Path,
    test: Option<&Path>,
    test_fraction: f64,
    split_seed: u64,
) -> Result<Dataset> {
    let mut blocks: Vec<LabeledCorpus> = Vec::with_capacity(labeled_blocks.len());
    let mut held_out: Option<LabeledCorpus> = match test {
        Some(p) => Some(load_labeled(p)?),
        None => None,
    };
    let explicit_test = test.is_some();
    for (i, path) in labeled_blocks.iter().enumerate() {
        let corpus = load_labeled(path)?;
        let train = if explicit_test {
            corpus
        } else {
            let (train, part) = split(&corpus, test_fraction, rng::mix(&[split_seed, i as u64]))?;
            match &mut held_out {
                Some(t) => t.extend(&part)?,
                None => held_out = Some(part),
            }
            train
        };
        let mut cumulative = match blocks.last() {
            Some(prev) => prev.clone(),
            None => LabeledCorpus::empty(train.class_names().to_vec()),
        };
        cumulative.extend(&train)?;
        blocks.push(cumulative);
    }
    let test = held_out.expect("at least one block");
    if test.class_names() != blocks[0].class_names() {
        return Err(Error::validation("test set classes differ from the labeled blocks"));
    }
    if test.is_empty() {
        return Err(Error::validation("the test set is empty"));
    }
    Ok(Dataset {
        blocks,
        test,
        unlabeled: load_unlabeled(unlabeled)?,
        true_model: None,
    })
}

fn synthetic_dataset(generator: &GeneratorConfig, blocks: &[usize], max_step: usize, seed: u64) -> Result<Dataset> {
    let config = GeneratorConfig {
        seed,
        n_labeled: *blocks.last().expect("validated"),
        n_unlabeled: max_step,
        ..generator.clone()
    };
    let data = generate(&config)?;
    Ok(Dataset {
        blocks: blocks.iter().map(|&n| data.labeled.prefix(n)).collect(),
        test: data.test,
        unlabeled: data.unlabeled,
        true_model: Some(data.true_model),
    })
}

fn fallback_words(config: &GridConfig) -> Result<Vec<String>> {
    let mut words = match &config.fallback_wordlist {
        Some(path) => load_wordlist(path)?,
        None => Vec::new(),
    };
    words.extend(synthetic_wordlist(config.fallback_synthetic_words));
    Ok(words)
}

fn informative_first_pool(model: &TrueModel, fallback: &[String], seed: u64) -> Result<OrderedWordPool> {
    let mut informative = model.informative_words();
    let mut noise = model.noise_words();
    informative.shuffle(&mut rng::seeded(seed, rng::stream::POOL_LABELED));
    noise.shuffle(&mut rng::seeded(seed, rng::stream::POOL_UNLABELED));
    let boundaries = (informative.len(), informative.len() + noise.len());
    let mut words: indexmap::IndexSet<String> = informative.into_iter().chain(noise).collect();
    words.extend(fallback.iter().filter(|w| !w.is_empty()).cloned());
    OrderedWordPool::from_parts(words.into_iter().collect(), boundaries)
}

struct Cell<'a> {
    seed_index: usize,
    seed: u64,
    block: usize,
    step: usize,
    dataset: &'a Dataset,
    pool: Arc<OrderedWordPool>,
}

fn cell_records(
    cell: &Cell<'_>,
    vocab_size: usize,
    config: &GridConfig,
) -> Vec<std::result::Result<Record, CellFailure>> {
    let unlabeled_size = config.unlabeled_steps[cell.step];
    let failure = |method: Method, e: &Error| CellFailure {
        labeled_block: cell.block,
        unlabeled_size,
        vocab_size,
        seed: cell.seed,
        method,
        message: e.to_string(),
    };
    let vocab = match truncate(&cell.pool, vocab_size) {
        Ok(v) => v,
        Err(e) => return config.methods.iter().map(|&m| Err(failure(m, &e))).collect(),
    };
    let train = &cell.dataset.blocks[cell.block];
    let labeled = LabeledVectors::from_corpus(train, &vocab);
    let test = LabeledVectors::from_corpus(&cell.dataset.test, &vocab);
    let unlabeled = UnlabeledVectors::from_corpus(&cell.dataset.unlabeled.prefix(unlabeled_size), &vocab);
    config
        .methods
        .iter()
        .map(|&method| {
            let outcome = match method {
                Method::Supervised => train_supervised(&labeled, config.em.alpha).and_then(|model| {
                    let ll = log_likelihood(&model, &labeled, &UnlabeledVectors::empty(vocab.size()), 0.0)?;
                    Ok((evaluate(&model, &test)?, ll, 0))
                }),
                Method::Em => train_em(&labeled, &unlabeled, &config.em).and_then(|(model, trace)| {
                    Ok((evaluate(&model, &test)?, trace.final_log_likelihood(), trace.iterations))
                }),
            };
            outcome
                .map(|(accuracy, log_likelihood, em_iterations)| Record {
                    labeled_block: cell.block,
                    labeled_size: train.len(),
                    unlabeled_size,
                    vocab_size,
                    seed: cell.seed,
                    method,
                    accuracy,
                    log_likelihood,
                    em_iterations,
                })
                .map_err(|e| failure(method, &e))
        })
        .collect()
}

/// Runs every (block, step, V, seed, method) cell on the current rayon pool.
/// Records come back sorted by grid coordinates regardless of scheduling.
pub fn run_grid(config: &GridConfig) -> Result<AccuracySurface> {
    config.validate()?;
    let max_step = *config.unlabeled_steps.last().expect("validated");
    let datasets: Vec<Arc<Dataset>> = match &config.data {
        DataSource::Files { labeled_blocks, unlabeled, test, test_fraction, split_seed } => {
            let ds = Arc::new(load_file_dataset(
                labeled_blocks,
                unlabeled,
                test.as_deref(),
                *test_fraction,
                *split_seed,
            )?);
            vec![ds; config.seeds.len()]
        }
        DataSource::Synthetic { generator, labeled_blocks } => config
            .seeds
            .par_iter()
            .map(|&seed| synthetic_dataset(generator, labeled_blocks, max_step, seed).map(Arc::new))
            .collect::<Result<_>>()?,
    };
    if datasets[0].unlabeled.len() < max_step {
        return Err(Error::validation(format!(
            "unlabeled step {max_step} exceeds the {} available unlabeled sentences",
            datasets[0].unlabeled.len()
        )));
    }
    let fallback = fallback_words(config)?;
    let num_blocks = datasets[0].blocks.len();

    let mut coordinates = Vec::new();
    for (seed_index, &seed) in config.seeds.iter().enumerate() {
        for block in 0..num_blocks {
            for step in 0..config.unlabeled_steps.len() {
                coordinates.push((seed_index, seed, block, step));
            }
        }
    }
    let cells = coordinates
        .into_par_iter()
        .map(|(seed_index, seed, block, step)| {
            let dataset = &*datasets[seed_index];
            let pool_seed = rng::mix(&[seed, block as u64]);
            let pool = match config.pool_order {
                PoolOrder::Procedure => {
                    let empty = LabeledCorpus::empty(dataset.test.class_names().to_vec());
                    let test = if config.include_test_words { &dataset.test } else { &empty };
                    build_word_pool(
                        &dataset.blocks[block],
                        test,
                        &dataset.unlabeled.prefix(config.unlabeled_steps[step]),
                        &fallback,
                        pool_seed,
                    )
                }
                PoolOrder::InformativeFirst => informative_first_pool(
                    dataset.true_model.as_ref().expect("synthetic source"),
                    &fallback,
                    pool_seed,
                )?,
            };
            Ok(Cell { seed_index, seed, block, step, dataset, pool: Arc::new(pool) })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for cell in &cells {
        for v_index in 0..config.vocab_sizes.len() {
            jobs.push((cell, v_index));
        }
    }
    let mut results: Vec<_> = jobs
        .into_par_iter()
        .map(|(cell, v_index)| {
            let key = (cell.block, cell.step, v_index, cell.seed_index);
            (key, cell_records(cell, config.vocab_sizes[v_index], config))
        })
        .collect();
    results.sort_by_key(|(key, _)| *key);

    let mut surface = AccuracySurface::default();
    for (_, outcomes) in results {
        for outcome in outcomes {
            match outcome {
                Ok(r) => surface.records.push(r),
                Err(f) => {
                    log::warn!(
                        "cell block={} unlabeled={} V={} seed={} {} failed: {}",
                        f.labeled_block, f.unlabeled_size, f.vocab_size, f.seed, f.method, f.message
                    );
                    surface.failures.push(f);
                }
            }
        }
    }
    Ok(surface)
}

impl AccuracySurface {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.records.is_empty() {
            return Err(Error::validation("cannot write an empty accuracy surface"));
        }
        let csv_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Internal(format!("writing {}: {other:?}", path.display())),
        };
        let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
        for r in &self.records {
            writer.serialize(r).map_err(csv_err)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }

    /// Parses a CSV written by [`AccuracySurface::write_csv`]; every column
    /// of [`CSV_COLUMNS`] must be present.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        for column in CSV_COLUMNS {
            if !headers.iter().any(|h| h == column) {
                return Err(parse_err(1, format!("missing column {column:?}")));
            }
        }
        let mut records = Vec::new();
        for (i, row) in reader.deserialize::<Record>().enumerate() {
            let record = row.map_err(|e| parse_err(i + 2, e.to_string()))?;
            if !(0.0..=1.0).contains(&record.accuracy) {
                return Err(parse_err(i + 2, format!("accuracy {} outside [0, 1]", record.accuracy)));
            }
            records.push(record);
        }
        Ok(AccuracySurface { records, failures: Vec::new() })
    }

    pub fn blocks(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.labeled_block).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn vocab_sizes(&self, block: usize) -> Vec<usize> {
        self.block_records(block).map(|r| r.vocab_size).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn unlabeled_sizes(&self, block: usize) -> Vec<usize> {
        self.block_records(block).map(|r| r.unlabeled_size).collect::<BTreeSet<_>>().into_iter().collect()
    }

    fn block_records(&self, block: usize) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.labeled_block == block)
    }

    fn require_block(&self, block: usize) -> Result<()> {
        if self.block_records(block).next().is_none() {
            return Err(Error::validation(format!("labeled block {block} is not in the surface")));
        }
        Ok(())
    }

    /// Median accuracy over seeds for each vocabulary size of one series.
    pub fn median_curve(&self, block: usize, unlabeled_size: usize, method: Method) -> Vec<(usize, f64)> {
        self.vocab_sizes(block)
            .into_iter()
            .filter_map(|v| {
                let accs: Vec<f64> = self
                    .block_records(block)
                    .filter(|r| r.unlabeled_size == unlabeled_size && r.method == method && r.vocab_size == v)
                    .map(|r| r.accuracy)
                    .collect();
                median(&accs).map(|m| (v, m))
            })
            .collect()
    }
}

/// Inclusive range of vocabulary sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VocabInterval {
    pub start: usize,
    pub end: usize,
    /// Number of grid vocabulary sizes inside the interval.
    pub points: usize,
}

/// Longest run of consecutive `true` values; ties go to the leftmost run.
pub fn longest_run(flags: &[bool]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &f) in flags.iter().chain(std::iter::once(&false)).enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(bs, be)| i - 1 - s > be - bs) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Per vocabulary size, the median-EM minus median-baseline accuracy for
/// every unlabeled step above zero. The baseline is the step-0 supervised
/// series, or step-0 EM when the grid has no supervised method.
pub fn accuracy_gains(surface: &AccuracySurface, block: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    surface.require_block(block)?;
    let has_supervised = surface
        .block_records(block)
        .any(|r| r.unlabeled_size == 0 && r.method == Method::Supervised);
    let baseline_method = if has_supervised { Method::Supervised } else { Method::Em };
    let baseline = surface.median_curve(block, 0, baseline_method);
    if baseline.is_empty() {
        return Err(Error::validation(format!("block {block} has no unlabeled-size-0 records")));
    }
    let steps: Vec<usize> = surface.unlabeled_sizes(block).into_iter().filter(|&s| s > 0).collect();
    if steps.is_empty() {
        return Err(Error::validation(format!("block {block} has no unlabeled step above 0")));
    }
    let curves: Vec<Vec<(usize, f64)>> = steps.iter().map(|&s| surface.median_curve(block, s, Method::Em)).collect();
    let mut gains = Vec::new();
    for (v, base) in baseline {
        let diffs: Option<Vec<f64>> = curves
            .iter()
            .map(|c| c.iter().find(|(cv, _)| *cv == v).map(|(_, acc)| acc - base))
            .collect();
        if let Some(d) = diffs {
            gains.push((v, d));
        }
    }
    if gains.is_empty() {
        return Err(Error::validation(format!("block {block} has no complete vocabulary column")));
    }
    Ok(gains)
}

fn interval_where(gains: &[(usize, Vec<f64>)], keep: impl Fn(&[f64]) -> bool) -> Option<VocabInterval> {
    let flags: Vec<bool> = gains.iter().map(|(_, d)| keep(d)).collect();
    longest_run(&flags).map(|(a, b)| VocabInterval {
        start: gains[a].0,
        end: gains[b].0,
        points: b - a + 1,
    })
}

/// Longest vocabulary run where every unlabeled amount keeps or improves
/// the supervised accuracy.
pub fn helpful_interval(surface: &AccuracySurface, block: usize) -> Result<Option<VocabInterval>> {
    let gains = accuracy_gains(surface, block)?;
    Ok(interval_where(&gains, |d| d.iter().all(|&x| x >= 0.0)))
}

/// Longest vocabulary run where every unlabeled amount loses at least
/// `delta` accuracy against the supervised baseline.
pub fn degradation_interval(surface: &AccuracySurface, block: usize, delta: f64) -> Result<Option<VocabInterval>> {
    let gains = accuracy_gains(surface, block)?;
    Ok(interval_where(&gains, |d| d.iter().all(|&x| x <= -delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveShape {
    pub peak_vocab: usize,
    pub peak_accuracy: f64,
    pub rises_then_falls: bool,
}

/// Shape of a median accuracy curve over ascending vocabulary sizes.
pub fn shape_of(curve: &[(usize, f64)]) -> Result<CurveShape> {
    if curve.len() < 3 {
        return Err(Error::validation(format!(
            "curve shape needs at least 3 vocabulary sizes, got {}",
            curve.len()
        )));
    }
    let mut peak = 0;
    for (i, &(_, acc)) in curve.iter().enumerate() {
        if acc > curve[peak].1 {
            peak = i;
        }
    }
    let peak_accuracy = curve[peak].1;
    Ok(CurveShape {
        peak_vocab: curve[peak].0,
        peak_accuracy,
        rises_then_falls: curve[0].1 < peak_accuracy && curve[curve.len() - 1].1 < peak_accuracy,
    })
}

pub fn curve_shape(
    surface: &AccuracySurface,
    block: usize,
    unlabeled_size: usize,
    method: Method,
) -> Result<CurveShape> {
    surface.require_block(block)?;
    shape_of(&surface.median_curve(block, unlabeled_size, method))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// SVG line chart for one block: median accuracy against vocabulary size,
/// one polyline per unlabeled amount (step 0 shows the supervised series
/// when present) and dotted verticals at the helpful interval.
pub fn render_svg(surface: &AccuracySurface, block: usize) -> Result<String> {
    surface.require_block(block)?;
    let steps = surface.unlabeled_sizes(block);
    let has_supervised = surface.block_records(block).any(|r| r.method == Method::Supervised);
    let series: Vec<(usize, Vec<(usize, f64)>)> = steps
        .iter()
        .map(|&s| {
            let method = if s == 0 && has_supervised { Method::Supervised } else { Method::Em };
            (s, surface.median_curve(block, s, method))
        })
        .filter(|(_, c)| !c.is_empty())
        .collect();
    let vocab = surface.vocab_sizes(block);
    let (width, height) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 60.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let (v_min, v_max) = (vocab[0] as f64, *vocab.last().expect("non-empty") as f64);
    let accs = series.iter().flat_map(|(_, c)| c.iter().map(|p| p.1));
    let (mut y_min, mut y_max) = accs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a), hi.max(a)));
    y_min = (y_min - 0.02).max(0.0);
    y_max = (y_max + 0.02).min(1.0);
    if y_max <= y_min {
        y_max = (y_min + 0.1).min(1.0);
        y_min = y_max - 0.1;
    }
    let x = |v: f64| {
        if v_max > v_min {
            left + (v - v_min) / (v_max - v_min) * plot_w
        } else {
            left + plot_w / 2.0
        }
    };
    let y = |a: f64| top + (y_max - a) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let labeled = surface.block_records(block).next().map(|r| r.labeled_size).unwrap_or(0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">Labeled block {block} ({labeled} sentences)</text>"#,
        left + plot_w / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<g stroke="black" fill="none"><line x1="{left}" y1="{0}" x2="{1}" y2="{0}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{0}"/></g>"#,
        top + plot_h,
        left + plot_w
    );
    let tick_step = vocab.len().div_ceil(8).max(1);
    for v in vocab.iter().step_by(tick_step) {
        let px = x(*v as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{0}" x2="{px:.2}" y2="{1}" stroke="black"/><text x="{px:.2}" y="{2}" text-anchor="middle">{v}</text>"#,
            top + plot_h,
            top + plot_h + 5.0,
            top + plot_h + 20.0
        );
    }
    for k in 0..=5 {
        let a = y_min + (y_max - y_min) * k as f64 / 5.0;
        let py = y(a);
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{1}" y="{2:.2}" text-anchor="end">{a:.3}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">vocabulary size</text>"#,
        left + plot_w / 2.0,
        height - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">accuracy</text>"#,
        top + plot_h / 2.0
    );
    if let Ok(Some(interval)) = helpful_interval(surface, block) {
        for bound in [interval.start, interval.end] {
            let px = x(bound as f64);
            let _ = writeln!(
                svg,
                r#"<line class="helpful-bound" x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{0}" stroke="gray" stroke-dasharray="3,3"/>"#,
                top + plot_h
            );
        }
    }
    for (i, (step, curve)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = curve.iter().map(|&(v, a)| format!("{:.2},{:.2}", x(v as f64), y(a))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 10.0 + 20.0 * i as f64;
        let lx = left + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{0}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{1}" y="{2}">unlabeled = {step}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg(surface: &AccuracySurface, block: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(surface, block)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub em: EmConfig,
    /// Selected size as a share of the observed word pool.
    pub vocab_fraction: f64,
    /// Overrides `vocab_fraction` when set.
    pub vocab_size: Option<usize>,
    /// Use argmax pseudo-labels instead of soft responsibilities.
    pub hard: bool,
    pub include_test_words: bool,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            em: EmConfig::default(),
            vocab_fraction: 0.5,
            vocab_size: None,
            hard: false,
            include_test_words: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRow {
    pub selection: String,
    pub vocab_size: usize,
    pub supervised_accuracy: f64,
    pub em_accuracy: f64,
    pub em_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionComparison {
    pub pool: OrderedWordPool,
    pub pseudo_label_scores: FeatureScores,
    pub labeled_only_scores: FeatureScores,
    pub rows: Vec<SelectionRow>,
}

impl SelectionComparison {
    /// Whether EM under pseudo-label selection matched or beat EM under
    /// labeled-only selection.
    pub fn pseudo_label_at_least_labeled_only(&self) -> bool {
        self.rows[0].em_accuracy >= self.rows[1].em_accuracy
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("selection,vocab_size,supervised_accuracy,em_accuracy,em_iterations\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.selection, r.vocab_size, r.supervised_accuracy, r.em_accuracy, r.em_iterations
            );
        }
        out
    }
}

/// Scores the observed word pool with information gain twice, once from
/// labeled counts plus EM pseudo-labels and once from labeled counts only,
/// then trains EM on the top words of each ranking and evaluates on `test`.
pub fn compare_feature_selection(
    labeled: &LabeledCorpus,
    unlabeled: &UnlabeledCorpus,
    test: &LabeledCorpus,
    config: &SelectionConfig,
) -> Result<SelectionComparison> {
    config.em.validate()?;
    if labeled.is_empty() || test.is_empty() {
        return Err(Error::validation("feature selection needs labeled and test sentences"));
    }
    if test.class_names() != labeled.class_names() {
        return Err(Error::validation("test classes differ from the labeled classes"));
    }
    let empty = LabeledCorpus::empty(labeled.class_names().to_vec());
    let pool_test = if config.include_test_words { test } else { &empty };
    let pool = build_word_pool(labeled, pool_test, unlabeled, &[], config.seed);
    if pool.is_empty() {
        return Err(Error::validation("the word pool is empty"));
    }
    let size = match config.vocab_size {
        Some(v) => v,
        None => {
            if !(config.vocab_fraction > 0.0 && config.vocab_fraction <= 1.0) {
                return Err(Error::validation("vocab_fraction must lie in (0, 1]"));
            }
            ((config.vocab_fraction * pool.len() as f64).floor() as usize).max(1)
        }
    };
    let full = Vocabulary::from_words(pool.words().to_vec())?;
    let labeled_full = LabeledVectors::from_corpus(labeled, &full);
    let unlabeled_full = UnlabeledVectors::from_corpus(unlabeled, &full);
    let (model, _) = train_em(&labeled_full, &unlabeled_full, &config.em)?;
    let mut resp = e_step(&model, &unlabeled_full)?;
    if config.hard {
        resp = resp.hardened();
    }
    let pseudo_label_scores =
        information_gain(&expected_counts(&labeled_full, &unlabeled_full, &resp, config.em.lambda)?)?;
    let labeled_only_scores = information_gain(&expected_counts(&labeled_full, &unlabeled_full, &resp, 0.0)?)?;

    let mut rows = Vec::new();
    for (name, scores) in [("pseudo_label", &pseudo_label_scores), ("labeled_only", &labeled_only_scores)] {
        let vocab = select_features(scores, &pool, size)?;
        let l = LabeledVectors::from_corpus(labeled, &vocab);
        let u = UnlabeledVectors::from_corpus(unlabeled, &vocab);
        let t = LabeledVectors::from_corpus(test, &vocab);
        let supervised = train_supervised(&l, config.em.alpha)?;
        let (em_model, trace) = train_em(&l, &u, &config.em)?;
        rows.push(SelectionRow {
            selection: name.to_string(),
            vocab_size: size,
            supervised_accuracy: evaluate(&supervised, &t)?,
            em_accuracy: evaluate(&em_model, &t)?,
            em_iterations: trace.iterations,
        });
    }
    Ok(SelectionComparison {
        pool,
        pseudo_label_scores,
        labeled_only_scores,
        rows,
    })
}
