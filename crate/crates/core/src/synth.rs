//! Synthetic corpora drawn from a known naive Bayes mixture.
//!
//! Each class owns `words_per_class` words; `shared_noise_words` more are
//! shared by every class. A document picks a class from
//! `class_proportions`, a sub-cluster `s` uniformly, a length from
//! `max(1, Poisson(mean_length * (1 + length_class_coupling * c / (C - 1))))`,
//! then draws tokens i.i.d. from
//!
//! ```text
//! P(w | c, s) = (1 - noise_mass) * class_{c,s}(w) + noise_mass * topic_s(w)
//! ```
//!
//! where `class_{c,s}` is a symmetric Dirichlet(`word_concentration`) draw
//! over the words of class `c` and `topic_s` one over the noise words.
//! Topic `s` is shared by sub-cluster `s` of every class. With one
//! sub-cluster the process is exactly a naive Bayes mixture and noise words
//! carry no class information. With `S > 1` each class is a mixture of `S`
//! multinomials whose noise topics cut across the classes, which breaks the
//! one-component-per-class assumption. A positive coupling makes length
//! depend on the class.
//!
//! All draws use ChaCha8 streams derived from `seed`; the labeled, unlabeled
//! and test corpora come from separate streams, so each corpus is a prefix
//! of the same corpus generated with a larger size.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::classifier::argmax;
use crate::corpus::{LabeledCorpus, Sentence, UnlabeledCorpus, DEFAULT_CLASSES};
use crate::math::log_sum_exp;
use crate::rng;
use crate::vocabulary::pseudo_word;
use crate::{Error, Result};

/// Width of the letter code in generated words (`26^4` distinct words).
const WORD_CODE_WIDTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Defaults to positive/negative/neutral for three classes and
    /// `class0..` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
    pub class_proportions: Vec<f64>,
    pub words_per_class: usize,
    pub shared_noise_words: usize,
    pub word_concentration: f64,
    /// Share of every sub-cluster's token mass on the shared noise words.
    pub noise_mass: f64,
    pub mean_length: f64,
    pub length_class_coupling: f64,
    pub subclusters_per_class: usize,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            class_names: None,
            class_proportions: MICROSOFT_PROPORTIONS.to_vec(),
            words_per_class: 200,
            shared_noise_words: 1000,
            word_concentration: 0.3,
            noise_mass: 0.75,
            mean_length: 8.0,
            length_class_coupling: 0.0,
            subclusters_per_class: 1,
            n_labeled: 100,
            n_unlabeled: 2000,
            n_test: 1000,
            seed: 0,
        }
    }
}

/// Positive/negative/neutral shares of the Microsoft row of the labeled
/// data table (383 sentences).
pub const MICROSOFT_PROPORTIONS: [f64; 3] = [0.22, 0.19, 0.59];

impl GeneratorConfig {
    pub fn num_classes(&self) -> usize {
        self.class_proportions.len()
    }

    pub fn resolved_class_names(&self) -> Vec<String> {
        match &self.class_names {
            Some(names) => names.clone(),
            None if self.num_classes() == DEFAULT_CLASSES.len() => {
                DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect()
            }
            None => (0..self.num_classes()).map(|c| format!("class{c}")).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_simplex(&self.class_proportions)?;
        if let Some(names) = &self.class_names {
            if names.len() != self.num_classes() {
                return Err(Error::validation(format!(
                    "{} class names for {} class proportions",
                    names.len(),
                    self.num_classes()
                )));
            }
        }
        if self.subclusters_per_class == 0 {
            return Err(Error::validation("subclusters_per_class must be at least 1"));
        }
        if self.words_per_class == 0 {
            return Err(Error::validation("words_per_class must be at least 1"));
        }
        if !(self.word_concentration > 0.0 && self.word_concentration.is_finite()) {
            return Err(Error::validation("word_concentration must be positive"));
        }
        if !(0.0..1.0).contains(&self.noise_mass) {
            return Err(Error::validation("noise_mass must lie in [0, 1)"));
        }
        if !(self.mean_length > 0.0 && self.mean_length.is_finite()) {
            return Err(Error::validation("mean_length must be positive"));
        }
        if !(self.length_class_coupling >= 0.0 && self.length_class_coupling.is_finite()) {
            return Err(Error::validation("length_class_coupling must be non-negative"));
        }
        let total_words = self.num_classes() * self.words_per_class + self.shared_noise_words;
        if total_words >= 26usize.pow(WORD_CODE_WIDTH as u32) {
            return Err(Error::validation(format!("too many generator words ({total_words})")));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: GeneratorConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: format!("invalid generator config: {e}"),
        })?;
        config.validate()?;
        Ok(config)
    }
}

fn validate_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::validation("class_proportions is empty"));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::validation(format!("class_proportions {p:?} has a negative entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "class_proportions {p:?} sum to {sum}, not 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WordRole {
    Class { class: usize },
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub class: usize,
    pub subcluster: usize,
    /// Share of the class's documents drawn from this component.
    pub weight: f64,
    pub word_probs: Vec<f64>,
}

/// The generating process: class priors, length means and one word
/// distribution per (class, sub-cluster).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueModel {
    pub class_names: Vec<String>,
    pub class_priors: Vec<f64>,
    pub mean_lengths: Vec<f64>,
    pub words: Vec<String>,
    pub roles: Vec<WordRole>,
    pub components: Vec<Component>,
}

impl TrueModel {
    pub fn num_classes(&self) -> usize {
        self.class_priors.len()
    }

    /// Class-specific words in generator order.
    pub fn informative_words(&self) -> Vec<String> {
        self.words
            .iter()
            .zip(&self.roles)
            .filter(|(_, r)| matches!(r, WordRole::Class { .. }))
            .map(|(w, _)| w.clone())
            .collect()
    }

    pub fn noise_words(&self) -> Vec<String> {
        self.words
            .iter()
            .zip(&self.roles)
            .filter(|(_, r)| matches!(r, WordRole::Noise))
            .map(|(w, _)| w.clone())
            .collect()
    }

    fn word_index(&self) -> HashMap<&str, usize> {
        self.words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(self)
            .map_err(|e| Error::Internal(format!("serializing true model: {e}")))?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.iter_mut().for_each(|d| *d /= total);
    } else {
        draws.iter_mut().for_each(|d| *d = 1.0 / n as f64);
    }
    draws
}

/// Draws the word distributions for `config` from its true-model stream.
pub fn build_true_model(config: &GeneratorConfig) -> Result<TrueModel> {
    config.validate()?;
    let classes = config.num_classes();
    let subclusters = config.subclusters_per_class;
    let mut rng = rng::seeded(config.seed, rng::stream::TRUE_MODEL);

    let mut words = Vec::new();
    let mut roles = Vec::new();
    let mut class_ranges = Vec::with_capacity(classes);
    for c in 0..classes {
        let start = words.len();
        for _ in 0..config.words_per_class {
            words.push(pseudo_word('w', words.len(), WORD_CODE_WIDTH));
            roles.push(WordRole::Class { class: c });
        }
        class_ranges.push(start..words.len());
    }
    let noise_start = words.len();
    for _ in 0..config.shared_noise_words {
        words.push(pseudo_word('w', words.len(), WORD_CODE_WIDTH));
        roles.push(WordRole::Noise);
    }
    let noise_mass = if config.shared_noise_words == 0 { 0.0 } else { config.noise_mass };
    // One noise topic per sub-cluster index, shared by every class.
    let topics: Vec<Vec<f64>> = (0..subclusters)
        .map(|_| dirichlet(&mut rng, config.shared_noise_words, config.word_concentration))
        .collect();

    let mut components = Vec::with_capacity(classes * subclusters);
    for (c, range) in class_ranges.iter().enumerate() {
        for (s, topic) in topics.iter().enumerate() {
            let class_dist = dirichlet(&mut rng, range.len(), config.word_concentration);
            let mut word_probs = vec![0.0; words.len()];
            for (k, p) in class_dist.into_iter().enumerate() {
                word_probs[range.start + k] = (1.0 - noise_mass) * p;
            }
            for (k, &p) in topic.iter().enumerate() {
                word_probs[noise_start + k] = noise_mass * p;
            }
            components.push(Component {
                class: c,
                subcluster: s,
                weight: 1.0 / subclusters as f64,
                word_probs,
            });
        }
    }
    let mean_lengths = (0..classes)
        .map(|c| {
            let offset = if classes > 1 { c as f64 / (classes - 1) as f64 } else { 0.0 };
            config.mean_length * (1.0 + config.length_class_coupling * offset)
        })
        .collect();
    Ok(TrueModel {
        class_names: config.resolved_class_names(),
        class_priors: config.class_proportions.clone(),
        mean_lengths,
        words,
        roles,
        components,
    })
}

/// Samples documents from a true model; the class mix can be overridden.
pub struct Sampler<'a> {
    model: &'a TrueModel,
    class_dist: WeightedIndex<f64>,
    lengths: Vec<Poisson<f64>>,
    /// Per class, the component indices and their word samplers.
    components: Vec<Vec<WeightedIndex<f64>>>,
}

impl<'a> Sampler<'a> {
    pub fn new(model: &'a TrueModel, class_proportions: &[f64]) -> Result<Self> {
        validate_simplex(class_proportions)?;
        if class_proportions.len() != model.num_classes() {
            return Err(Error::dimension(model.num_classes(), class_proportions.len(), "class proportions"));
        }
        let class_dist = WeightedIndex::new(class_proportions)
            .map_err(|e| Error::validation(format!("class proportions: {e}")))?;
        let lengths = model
            .mean_lengths
            .iter()
            .map(|&m| Poisson::new(m).map_err(|e| Error::validation(format!("mean length {m}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut components = vec![Vec::new(); model.num_classes()];
        for comp in &model.components {
            let dist = WeightedIndex::new(&comp.word_probs)
                .map_err(|e| Error::Internal(format!("word distribution: {e}")))?;
            components[comp.class].push(dist);
        }
        Ok(Sampler {
            model,
            class_dist,
            lengths,
            components,
        })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng, id: String, labeled: bool) -> Sentence {
        let class = self.class_dist.sample(rng);
        let subs = &self.components[class];
        let sub = if subs.len() > 1 { rng.random_range(0..subs.len()) } else { 0 };
        let length = (self.lengths[class].sample(rng) as usize).max(1);
        let tokens = (0..length)
            .map(|_| self.model.words[subs[sub].sample(rng)].clone())
            .collect();
        Sentence {
            id,
            tokens,
            label: labeled.then_some(class),
        }
    }

    pub fn labeled(&self, rng: &mut ChaCha8Rng, n: usize, prefix: &str) -> LabeledCorpus {
        let sentences = (0..n)
            .map(|i| self.sample(rng, format!("{prefix}-{i:06}"), true))
            .collect();
        LabeledCorpus::new(sentences, self.model.class_names.clone()).expect("generated labels are in range")
    }

    pub fn unlabeled(&self, rng: &mut ChaCha8Rng, n: usize, prefix: &str) -> UnlabeledCorpus {
        let sentences = (0..n)
            .map(|i| self.sample(rng, format!("{prefix}-{i:06}"), false))
            .collect();
        UnlabeledCorpus::new(sentences).expect("generated sentences are unlabeled")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub labeled: LabeledCorpus,
    pub unlabeled: UnlabeledCorpus,
    pub test: LabeledCorpus,
    pub true_model: TrueModel,
}

pub fn generate(config: &GeneratorConfig) -> Result<SyntheticData> {
    let true_model = build_true_model(config)?;
    let sampler = Sampler::new(&true_model, &config.class_proportions)?;
    let labeled = sampler.labeled(&mut rng::seeded(config.seed, rng::stream::LABELED), config.n_labeled, "l");
    let unlabeled =
        sampler.unlabeled(&mut rng::seeded(config.seed, rng::stream::UNLABELED), config.n_unlabeled, "u");
    let test = sampler.labeled(&mut rng::seeded(config.seed, rng::stream::TEST), config.n_test, "t");
    Ok(SyntheticData {
        labeled,
        unlabeled,
        test,
        true_model,
    })
}

fn log_length_pmf(length: usize, mean: f64) -> f64 {
    // Lengths are max(1, Poisson), so 1 also absorbs the zero draw.
    if length <= 1 {
        return -mean + (1.0 + mean).ln();
    }
    let log_factorial: f64 = (2..=length).map(|k| (k as f64).ln()).sum();
    -mean + length as f64 * mean.ln() - log_factorial
}

/// Log joint `P(x, c)` of the true generating process for each class,
/// marginalizing sub-clusters and including the length distribution.
pub fn true_log_joint(model: &TrueModel, word_ids: &[usize]) -> Vec<f64> {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for &w in word_ids {
        *counts.entry(w).or_default() += 1.0;
    }
    let mut counts: Vec<(usize, f64)> = counts.into_iter().collect();
    counts.sort_unstable_by_key(|&(w, _)| w);
    (0..model.num_classes())
        .map(|c| {
            let per_component: Vec<f64> = model
                .components
                .iter()
                .filter(|comp| comp.class == c)
                .map(|comp| {
                    comp.weight.ln()
                        + counts
                            .iter()
                            .map(|&(w, x)| x * comp.word_probs[w].ln())
                            .sum::<f64>()
                })
                .collect();
            model.class_priors[c].ln()
                + log_length_pmf(word_ids.len(), model.mean_lengths[c])
                + log_sum_exp(&per_component)
        })
        .collect()
}

/// Accuracy of the exact posterior classifier of the generating process.
pub fn bayes_optimal_accuracy(true_model: &TrueModel, test: &LabeledCorpus) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::validation("cannot score an empty test set"));
    }
    if test.num_classes() != true_model.num_classes() {
        return Err(Error::dimension(true_model.num_classes(), test.num_classes(), "classes"));
    }
    let index = true_model.word_index();
    let mut correct = 0usize;
    for s in test.sentences() {
        let ids = s
            .tokens
            .iter()
            .map(|t| {
                index.get(t.as_str()).copied().ok_or_else(|| {
                    Error::validation(format!("word {t:?} of sentence {} is not in the true model", s.id))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if argmax(&true_log_joint(true_model, &ids)) == s.label.expect("labeled") {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// One company row of the labeled data table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Company {
    pub code: &'static str,
    pub name: &'static str,
    pub industry: &'static str,
    pub labeled_sentences: usize,
    /// Positive, negative, neutral shares.
    pub proportions: [f64; 3],
}

pub const TABLE1: [Company; 10] = [
    Company { code: "Ac", name: "Accenture", industry: "Consulting", labeled_sentences: 356, proportions: [0.39, 0.21, 0.40] },
    Company { code: "Ae", name: "AECOM", industry: "Engineering", labeled_sentences: 396, proportions: [0.20, 0.17, 0.63] },
    Company { code: "Ax", name: "AXA", industry: "Insurance", labeled_sentences: 695, proportions: [0.31, 0.18, 0.51] },
    Company { code: "Cs", name: "Cisco", industry: "Telecom", labeled_sentences: 583, proportions: [0.37, 0.26, 0.37] },
    Company { code: "Co", name: "Coach", industry: "Luxury Goods", labeled_sentences: 328, proportions: [0.33, 0.08, 0.59] },
    Company { code: "De", name: "Dell", industry: "Manufacturing", labeled_sentences: 587, proportions: [0.27, 0.08, 0.65] },
    Company { code: "Fd", name: "Ford", industry: "Automobile", labeled_sentences: 646, proportions: [0.34, 0.15, 0.51] },
    Company { code: "Ms", name: "Microsoft", industry: "Software", labeled_sentences: 383, proportions: [0.22, 0.19, 0.59] },
    Company { code: "Mon", name: "Monsanto", industry: "Agriculture", labeled_sentences: 459, proportions: [0.35, 0.10, 0.55] },
    Company { code: "Mor", name: "Morgan Stanley", industry: "Banking", labeled_sentences: 812, proportions: [0.17, 0.14, 0.69] },
];

pub const TABLE1_LABELED_TOTAL: usize = 5245;
pub const TABLE1_UNLABELED_TOTAL: usize = 5342;

/// Unlabeled pool layout: companies are added in three groups whose
/// cumulative sizes are 1485, 2999 and 5342 sentences.
pub const TABLE1_UNLABELED_GROUPS: [(&[&str], usize); 3] = [
    (&["Co", "De", "Ae"], 1485),
    (&["Fd", "Ax", "Ms"], 2999),
    (&["Ac", "Cs", "Mon", "Mor"], 5342),
];

/// Labeled block orders of the two sweeps (cumulative company sets).
pub const FIGURE1_BLOCKS: [&str; 5] = ["Ms", "Co", "De", "Mon", "Ae"];
pub const FIGURE2_BLOCKS: [&str; 5] = ["Ms", "Mon", "Mor", "Cs", "Ac"];

pub fn company(code: &str) -> Option<&'static Company> {
    TABLE1.iter().find(|c| c.code == code)
}

/// Splits `total` across `weights` by largest remainder.
fn apportion(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    let mut shares: Vec<usize> = weights.iter().map(|&w| total * w / sum).collect();
    let mut remainders: Vec<(usize, usize)> =
        weights.iter().enumerate().map(|(i, &w)| (total * w % sum, i)).collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = total - shares.iter().sum::<usize>();
    for &(_, i) in remainders.iter().take(missing) {
        shares[i] += 1;
    }
    shares
}

/// Generator settings behind the table preset: three classes, two
/// sub-clusters per class, sentence-like lengths.
pub fn table1_generator(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        class_proportions: TABLE1_POOLED_PROPORTIONS.to_vec(),
        words_per_class: 200,
        shared_noise_words: 1500,
        word_concentration: 0.5,
        noise_mass: 0.6,
        mean_length: 20.0,
        subclusters_per_class: 2,
        n_labeled: 0,
        n_unlabeled: 0,
        n_test: 0,
        seed,
        ..GeneratorConfig::default()
    }
}

/// Size-weighted class mix over all ten companies.
pub const TABLE1_POOLED_PROPORTIONS: [f64; 3] = pooled_proportions();

const fn pooled_proportions() -> [f64; 3] {
    let mut acc = [0.0; 3];
    let mut i = 0;
    while i < TABLE1.len() {
        let mut c = 0;
        while c < 3 {
            acc[c] += TABLE1[i].proportions[c] * TABLE1[i].labeled_sentences as f64;
            c += 1;
        }
        i += 1;
    }
    let total = acc[0] + acc[1] + acc[2];
    [acc[0] / total, acc[1] / total, 1.0 - acc[0] / total - acc[1] / total]
}

#[derive(Debug, Clone)]
pub struct Table1Data {
    /// One labeled pool per company, in table order.
    pub pools: Vec<(Company, LabeledCorpus)>,
    /// Unlabeled sentences grouped so prefixes of 1485, 2999 and 5342
    /// sentences cover the three company groups.
    pub unlabeled: UnlabeledCorpus,
    pub true_model: TrueModel,
}

pub fn generate_table1(config: &GeneratorConfig) -> Result<Table1Data> {
    let true_model = build_true_model(config)?;
    if true_model.num_classes() != 3 {
        return Err(Error::validation("the table preset needs exactly three classes"));
    }
    let mut pools = Vec::with_capacity(TABLE1.len());
    for (i, company) in TABLE1.iter().enumerate() {
        let sampler = Sampler::new(&true_model, &company.proportions)?;
        let mut rng = rng::seeded(rng::mix(&[config.seed, i as u64]), rng::stream::LABELED);
        let prefix = company.code.to_lowercase();
        pools.push((*company, sampler.labeled(&mut rng, company.labeled_sentences, &prefix)));
    }
    let mut sentences = Vec::with_capacity(TABLE1_UNLABELED_TOTAL);
    let mut previous = 0;
    for (codes, cumulative) in TABLE1_UNLABELED_GROUPS {
        let members: Vec<&Company> = codes.iter().map(|c| company(c).expect("known code")).collect();
        let sizes = apportion(
            cumulative - previous,
            &members.iter().map(|c| c.labeled_sentences).collect::<Vec<_>>(),
        );
        for (member, size) in members.into_iter().zip(sizes) {
            let idx = TABLE1.iter().position(|c| c.code == member.code).expect("known code");
            let sampler = Sampler::new(&true_model, &member.proportions)?;
            let mut rng = rng::seeded(rng::mix(&[config.seed, idx as u64]), rng::stream::UNLABELED);
            let prefix = format!("{}-u", member.code.to_lowercase());
            sentences.extend(sampler.unlabeled(&mut rng, size, &prefix).sentences().iter().cloned());
        }
        previous = cumulative;
    }
    Ok(Table1Data {
        pools,
        unlabeled: UnlabeledCorpus::new(sentences)?,
        true_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> GeneratorConfig {
        GeneratorConfig {
            class_proportions: vec![0.5, 0.5],
            words_per_class: 20,
            shared_noise_words: 0,
            mean_length: 30.0,
            n_labeled: 50,
            n_unlabeled: 0,
            n_test: 200,
            seed: 5,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn rejects_invalid_simplex() {
        let bad = GeneratorConfig {
            class_proportions: vec![0.5, 0.6],
            ..GeneratorConfig::default()
        };
        assert!(matches!(generate(&bad), Err(Error::Validation(_))));
        let negative = GeneratorConfig {
            class_proportions: vec![1.5, -0.5],
            ..GeneratorConfig::default()
        };
        assert!(generate(&negative).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let config = GeneratorConfig {
            n_unlabeled: 50,
            n_test: 20,
            seed: 17,
            ..GeneratorConfig::default()
        };
        assert_eq!(generate(&config).unwrap(), generate(&config).unwrap());
        let other = GeneratorConfig { seed: 18, ..config.clone() };
        assert_ne!(generate(&config).unwrap().labeled, generate(&other).unwrap().labeled);
    }

    #[test]
    fn corpora_are_prefix_stable() {
        let small = GeneratorConfig { n_labeled: 10, n_unlabeled: 20, n_test: 5, ..GeneratorConfig::default() };
        let large = GeneratorConfig { n_labeled: 30, n_unlabeled: 60, n_test: 5, ..small.clone() };
        let a = generate(&small).unwrap();
        let b = generate(&large).unwrap();
        assert_eq!(a.labeled, b.labeled.prefix(10));
        assert_eq!(a.unlabeled, b.unlabeled.prefix(20));
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn microsoft_label_frequencies_within_three_sigma() {
        let config = GeneratorConfig {
            n_labeled: 383,
            n_unlabeled: 0,
            n_test: 0,
            seed: 2012,
            ..GeneratorConfig::default()
        };
        let data = generate(&config).unwrap();
        let n = 383.0;
        for (c, &p) in MICROSOFT_PROPORTIONS.iter().enumerate() {
            let count = data.labeled.labels().filter(|&l| l == c).count() as f64;
            let sigma = (n * p * (1.0 - p)).sqrt();
            assert!((count - n * p).abs() <= 3.0 * sigma, "class {c}: {count}");
        }
    }

    #[test]
    fn true_model_is_a_distribution() {
        let config = GeneratorConfig { subclusters_per_class: 3, ..GeneratorConfig::default() };
        let model = build_true_model(&config).unwrap();
        assert_eq!(model.components.len(), 9);
        for comp in &model.components {
            let s: f64 = comp.word_probs.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
        assert_eq!(model.informative_words().len(), 600);
        assert_eq!(model.noise_words().len(), 1000);
        assert!(model.words.iter().all(|w| crate::corpus::tokenize(w) == vec![w.clone()]));
    }

    #[test]
    fn separable_construction_is_perfect() {
        let data = generate(&separable()).unwrap();
        assert_eq!(bayes_optimal_accuracy(&data.true_model, &data.test).unwrap(), 1.0);
    }

    #[test]
    fn single_class_is_perfect() {
        let config = GeneratorConfig {
            class_proportions: vec![1.0],
            n_test: 30,
            ..GeneratorConfig::default()
        };
        let data = generate(&config).unwrap();
        assert_eq!(bayes_optimal_accuracy(&data.true_model, &data.test).unwrap(), 1.0);
    }

    #[test]
    fn bayes_optimal_matches_length_one_enumeration() {
        // Two classes over three words; every document has one token.
        let model = TrueModel {
            class_names: vec!["a".into(), "b".into()],
            class_priors: vec![0.6, 0.4],
            mean_lengths: vec![1.0, 1.0],
            words: vec!["x".into(), "y".into(), "z".into()],
            roles: vec![WordRole::Noise; 3],
            components: vec![
                Component { class: 0, subcluster: 0, weight: 1.0, word_probs: vec![0.5, 0.3, 0.2] },
                Component { class: 1, subcluster: 0, weight: 1.0, word_probs: vec![0.1, 0.3, 0.6] },
            ],
        };
        // Test set = every (word, class) pair weighted by its exact mass,
        // realized as many copies; expected accuracy = sum_w max_c P(w, c).
        let mut sentences = Vec::new();
        let mut expected = 0.0;
        for (w, word) in model.words.iter().enumerate() {
            let joint: Vec<f64> = (0..2).map(|c| model.class_priors[c] * model.components[c].word_probs[w]).collect();
            expected += joint.iter().cloned().fold(0.0, f64::max);
            for (c, &mass) in joint.iter().enumerate() {
                let copies = (mass * 1000.0).round() as usize;
                for k in 0..copies {
                    sentences.push(Sentence::labeled(format!("{w}-{c}-{k}"), word, c));
                }
            }
        }
        let test = LabeledCorpus::new(sentences, model.class_names.clone()).unwrap();
        let acc = bayes_optimal_accuracy(&model, &test).unwrap();
        // x: 0.30 vs 0.04, y: 0.18 vs 0.12, z: 0.12 vs 0.24
        assert!((expected - 0.72).abs() < 1e-12);
        assert!((acc - expected).abs() < 1e-12);
    }

    #[test]
    fn bayes_optimal_rejects_unknown_words() {
        let data = generate(&separable()).unwrap();
        let test = LabeledCorpus::new(vec![Sentence::labeled("q", "unknownword", 0)], data.test.class_names().to_vec()).unwrap();
        assert!(bayes_optimal_accuracy(&data.true_model, &test).is_err());
    }

    #[test]
    fn table1_constants() {
        let total: usize = TABLE1.iter().map(|c| c.labeled_sentences).sum();
        assert_eq!(total, TABLE1_LABELED_TOTAL);
        for c in &TABLE1 {
            assert!((c.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{}", c.code);
        }
        let pooled: f64 = TABLE1_POOLED_PROPORTIONS.iter().sum();
        assert!((pooled - 1.0).abs() < 1e-12);
        assert_eq!(apportion(10, &[1, 1, 1]), vec![4, 3, 3]);
    }

    #[test]
    fn table1_sizes() {
        let data = generate_table1(&table1_generator(3)).unwrap();
        assert_eq!(data.pools.len(), 10);
        let labeled: usize = data.pools.iter().map(|(_, p)| p.len()).sum();
        assert_eq!(labeled, TABLE1_LABELED_TOTAL);
        assert_eq!(data.unlabeled.len(), TABLE1_UNLABELED_TOTAL);
        let codes_at = |i: usize| data.unlabeled.sentences()[i].id.split('-').next().unwrap().to_string();
        assert!(["co", "de", "ae"].contains(&codes_at(1484).as_str()));
        assert!(["fd", "ax", "ms"].contains(&codes_at(1485).as_str()));
        assert!(["fd", "ax", "ms"].contains(&codes_at(2998).as_str()));
        assert!(["ac", "cs", "mon", "mor"].contains(&codes_at(2999).as_str()));
    }
}
