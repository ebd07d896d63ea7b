//! Semi-supervised naive Bayes by expectation-maximization.
//!
//! The objective is the labeled joint log-likelihood plus `lambda` times the
//! unlabeled marginal log-likelihood:
//!
//! ```text
//! L(theta) = sum_i log P(x_i, y_i) + lambda * sum_j log sum_c P(x_j, c)
//! ```
//!
//! The E-step computes class posteriors (responsibilities) for every
//! unlabeled document; the M-step re-estimates the model from labeled counts
//! plus `lambda`-weighted expected counts. Smoothing makes the M-step a MAP
//! update, so the quantity EM never decreases is `L` plus the Dirichlet
//! log-prior `alpha * (sum log prior_c + sum log word_{c,w})`. The trace
//! records both.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{log_joint, train_supervised, ClassWordCounts, NBModel, DEFAULT_ALPHA};
use crate::math::{log_sum_exp, normalize_log_weights, CompensatedSum};
use crate::vocabulary::{LabeledVectors, UnlabeledVectors};
use crate::{Error, Result};

/// Guards the relative-change test against a zero objective.
const REL_EPSILON: f64 = 1e-12;

/// Class posteriors of the unlabeled documents, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    rows: Vec<Vec<f64>>,
    num_classes: usize,
}

impl Responsibilities {
    /// Rows must each have `num_classes` non-negative entries summing to one.
    pub fn new(rows: Vec<Vec<f64>>, num_classes: usize) -> Result<Self> {
        for row in &rows {
            if row.len() != num_classes {
                return Err(Error::dimension(num_classes, row.len(), "responsibility columns"));
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&r| !(0.0..=1.0).contains(&r)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::validation(format!(
                    "responsibility row {row:?} is not a distribution"
                )));
            }
        }
        Ok(Responsibilities { rows, num_classes })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One-hot rows at each row's argmax (ties to the lowest class).
    pub fn hardened(&self) -> Responsibilities {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let best = crate::classifier::argmax(row);
                (0..self.num_classes).map(|c| if c == best { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        Responsibilities {
            rows,
            num_classes: self.num_classes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmInit {
    /// Start from the model trained on the labeled documents alone.
    #[default]
    Supervised,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmConfig {
    pub alpha: f64,
    /// Weight of the unlabeled term.
    pub lambda: f64,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub init: EmInit,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            alpha: DEFAULT_ALPHA,
            lambda: 1.0,
            max_iterations: 100,
            rel_tolerance: 1e-6,
            init: EmInit::Supervised,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::validation(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation(format!(
                "lambda must be a finite non-negative weight, got {}",
                self.lambda
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("max_iterations must be at least 1"));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::validation("rel_tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `lambda`-weighted log-likelihood.
    pub log_likelihood: f64,
    /// Log-likelihood plus the smoothing log-prior; non-decreasing.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmTrace {
    /// Entry 0 is the initial model; entry `t` follows the `t`-th M-step.
    pub entries: Vec<TraceEntry>,
    pub converged: bool,
    pub iterations: usize,
}

impl EmTrace {
    pub fn final_log_likelihood(&self) -> f64 {
        self.entries.last().map_or(f64::NAN, |e| e.log_likelihood)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "iteration,log_likelihood,objective").map_err(io)?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.iteration, e.log_likelihood, e.objective).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

fn check_dims(model: &NBModel, dim: usize) -> Result<()> {
    if model.vocab_size != dim {
        return Err(Error::dimension(model.vocab_size, dim, "model vocabulary size"));
    }
    Ok(())
}

pub fn log_likelihood(
    model: &NBModel,
    labeled: &LabeledVectors,
    unlabeled: &UnlabeledVectors,
    lambda: f64,
) -> Result<f64> {
    check_dims(model, labeled.dim)?;
    check_dims(model, unlabeled.dim)?;
    let mut total = CompensatedSum::new();
    for (doc, &label) in labeled.docs.iter().zip(&labeled.labels) {
        total.add(log_joint(model, doc)?[label]);
    }
    if lambda != 0.0 {
        let marginals = unlabeled
            .docs
            .par_iter()
            .map(|doc| log_joint(model, doc).map(|s| log_sum_exp(&s)))
            .collect::<Result<Vec<_>>>()?;
        let unlabeled_sum: CompensatedSum = marginals.into_iter().collect();
        total.add(lambda * unlabeled_sum.value());
    }
    Ok(total.value())
}

/// `alpha * (sum_c log prior_c + sum_{c,w} log word_{c,w})`: the
/// Dirichlet(alpha + 1) log-density up to a constant.
pub fn log_prior(model: &NBModel) -> f64 {
    let mut acc: CompensatedSum = model.log_priors.iter().copied().collect();
    for row in &model.log_word_probs {
        for &v in row {
            acc.add(v);
        }
    }
    model.alpha * acc.value()
}

pub fn e_step(model: &NBModel, unlabeled: &UnlabeledVectors) -> Result<Responsibilities> {
    check_dims(model, unlabeled.dim)?;
    let rows = unlabeled
        .docs
        .par_iter()
        .map(|doc| {
            let mut scores = log_joint(model, doc)?;
            normalize_log_weights(&mut scores);
            Ok(scores)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Responsibilities {
        rows,
        num_classes: model.num_classes(),
    })
}

pub fn m_step(
    labeled: &LabeledVectors,
    unlabeled: &UnlabeledVectors,
    resp: &Responsibilities,
    config: &EmConfig,
) -> Result<NBModel> {
    if resp.len() != unlabeled.len() {
        return Err(Error::dimension(unlabeled.len(), resp.len(), "responsibility rows"));
    }
    if resp.num_classes() != labeled.num_classes() {
        return Err(Error::dimension(labeled.num_classes(), resp.num_classes(), "classes"));
    }
    let mut counts = ClassWordCounts::from_labeled(labeled);
    counts.add_soft(unlabeled, resp.rows(), config.lambda)?;
    NBModel::from_counts(&counts, config.alpha, labeled.class_names.clone())
}

fn trace_entry(
    iteration: usize,
    model: &NBModel,
    labeled: &LabeledVectors,
    unlabeled: &UnlabeledVectors,
    lambda: f64,
) -> Result<TraceEntry> {
    let ll = log_likelihood(model, labeled, unlabeled, lambda)?;
    Ok(TraceEntry {
        iteration,
        log_likelihood: ll,
        objective: ll + log_prior(model),
    })
}

/// Runs EM from the supervised model until the relative change of the
/// objective drops below `rel_tolerance` or `max_iterations` M-steps ran.
pub fn train_em(
    labeled: &LabeledVectors,
    unlabeled: &UnlabeledVectors,
    config: &EmConfig,
) -> Result<(NBModel, EmTrace)> {
    config.validate()?;
    if labeled.is_empty() {
        return Err(Error::validation("EM needs at least one labeled document"));
    }
    if labeled.dim != unlabeled.dim {
        return Err(Error::dimension(labeled.dim, unlabeled.dim, "unlabeled vector length"));
    }
    let mut model = match config.init {
        EmInit::Supervised => train_supervised(labeled, config.alpha)?,
    };
    let mut trace = EmTrace {
        entries: vec![trace_entry(0, &model, labeled, unlabeled, config.lambda)?],
        converged: false,
        iterations: 0,
    };
    if unlabeled.is_empty() {
        trace.converged = true;
        return Ok((model, trace));
    }
    for iteration in 1..=config.max_iterations {
        let resp = e_step(&model, unlabeled)?;
        model = m_step(labeled, unlabeled, &resp, config)?;
        let entry = trace_entry(iteration, &model, labeled, unlabeled, config.lambda)?;
        let previous = trace.entries.last().expect("initial entry").objective;
        trace.entries.push(entry);
        trace.iterations = iteration;
        let change = (entry.objective - previous).abs() / (previous.abs() + REL_EPSILON);
        if change < config.rel_tolerance {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        log::debug!("EM stopped after {} iterations without converging", trace.iterations);
    }
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::CountVector;
    use proptest::prelude::*;

    fn toy_labeled() -> LabeledVectors {
        // vocab {good, bad}: pos "good good", "good bad"; neg "bad bad"
        LabeledVectors::new(
            vec![
                CountVector::from_dense(&[2, 0]),
                CountVector::from_dense(&[1, 1]),
                CountVector::from_dense(&[0, 2]),
            ],
            vec![0, 0, 1],
            2,
            2,
        )
        .unwrap()
    }

    fn bad_doc() -> UnlabeledVectors {
        UnlabeledVectors::new(vec![CountVector::from_dense(&[0, 1])], 2).unwrap()
    }

    #[test]
    fn likelihood_without_unlabeled_is_labeled_term() {
        let labeled = toy_labeled();
        let model = train_supervised(&labeled, 1.0).unwrap();
        let ll = log_likelihood(&model, &labeled, &UnlabeledVectors::empty(2), 1.0).unwrap();
        let direct: f64 = labeled
            .docs
            .iter()
            .zip(&labeled.labels)
            .map(|(d, &y)| log_joint(&model, d).unwrap()[y])
            .sum();
        assert!((ll - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_ignores_unlabeled() {
        let labeled = toy_labeled();
        let model = train_supervised(&labeled, 1.0).unwrap();
        let a = log_likelihood(&model, &labeled, &UnlabeledVectors::empty(2), 0.0).unwrap();
        let b = log_likelihood(&model, &labeled, &bad_doc(), 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn toy_likelihood_matches_enumeration() {
        let labeled = toy_labeled();
        let model = train_supervised(&labeled, 1.0).unwrap();
        // Oracle: P(x, c) for x = "bad" enumerated from the closed-form toy
        // estimates prior = (3/5, 2/5), P(bad|pos) = 1/3, P(bad|neg) = 3/4.
        let p_pos: f64 = 3.0 / 5.0 * (1.0 / 3.0);
        let p_neg = 2.0 / 5.0 * (3.0 / 4.0);
        let labeled_term = (3.0f64 / 5.0 * (2.0 / 3.0) * (2.0 / 3.0)).ln()
            + (3.0f64 / 5.0 * (2.0 / 3.0) * (1.0 / 3.0)).ln()
            + (2.0f64 / 5.0 * (3.0 / 4.0) * (3.0 / 4.0)).ln();
        let expected = labeled_term + (p_pos + p_neg).ln();
        let ll = log_likelihood(&model, &labeled, &bad_doc(), 1.0).unwrap();
        assert!((ll - expected).abs() < 1e-12, "{ll} vs {expected}");
    }

    #[test]
    fn likelihood_dimension_mismatch() {
        let labeled = toy_labeled();
        let model = train_supervised(&labeled, 1.0).unwrap();
        let wrong = UnlabeledVectors::new(vec![CountVector::from_dense(&[1, 0, 0])], 3).unwrap();
        assert!(log_likelihood(&model, &labeled, &wrong, 1.0).is_err());
        assert!(e_step(&model, &wrong).is_err());
    }

    #[test]
    fn e_step_uniform_model() {
        let model = NBModel::uniform(vec!["a".into(), "b".into(), "c".into()], 4, 1.0);
        let docs = UnlabeledVectors::new(
            vec![CountVector::from_dense(&[1, 2, 0, 0]), CountVector::zeros(4)],
            4,
        )
        .unwrap();
        let resp = e_step(&model, &docs).unwrap();
        for row in resp.rows() {
            for &r in row {
                assert!((r - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn e_step_toy_posterior() {
        let model = train_supervised(&toy_labeled(), 1.0).unwrap();
        let resp = e_step(&model, &bad_doc()).unwrap();
        // Enumeration: P(pos, bad) = 3/5 * 1/3 = 1/5, P(neg, bad) = 2/5 * 3/4 = 3/10.
        let (p_pos, p_neg) = (1.0 / 5.0, 3.0 / 10.0);
        let z = p_pos + p_neg;
        assert!((resp.rows()[0][0] - p_pos / z).abs() < 1e-12);
        assert!((resp.rows()[0][1] - p_neg / z).abs() < 1e-12);
        assert!((resp.rows()[0][0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn e_step_zero_document_gets_prior() {
        let model = train_supervised(&toy_labeled(), 1.0).unwrap();
        let docs = UnlabeledVectors::new(vec![CountVector::zeros(2)], 2).unwrap();
        let resp = e_step(&model, &docs).unwrap();
        for (r, p) in resp.rows()[0].iter().zip(&model.log_priors) {
            assert!((r - p.exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn m_step_zero_lambda_is_supervised() {
        let labeled = toy_labeled();
        let resp = Responsibilities::new(vec![vec![0.3, 0.7]], 2).unwrap();
        let config = EmConfig {
            lambda: 0.0,
            ..EmConfig::default()
        };
        let model = m_step(&labeled, &bad_doc(), &resp, &config).unwrap();
        assert_eq!(model, train_supervised(&labeled, 1.0).unwrap());
    }

    #[test]
    fn m_step_one_hot_matches_concatenated_training() {
        let labeled = toy_labeled();
        let unlabeled = UnlabeledVectors::new(
            vec![CountVector::from_dense(&[0, 1]), CountVector::from_dense(&[3, 1])],
            2,
        )
        .unwrap();
        let resp = Responsibilities::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 2).unwrap();
        let model = m_step(&labeled, &unlabeled, &resp, &EmConfig::default()).unwrap();
        let mut docs = labeled.docs.clone();
        docs.extend(unlabeled.docs.iter().cloned());
        let combined = LabeledVectors::new(docs, vec![0, 0, 1, 1, 0], 2, 2).unwrap();
        let expected = train_supervised(&combined, 1.0).unwrap();
        for (a, b) in model.log_word_probs.iter().flatten().zip(expected.log_word_probs.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in model.log_priors.iter().zip(&expected.log_priors) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn m_step_soft_counts_match_oracle() {
        let labeled = toy_labeled();
        let r = [0.4, 0.6];
        let resp = Responsibilities::new(vec![r.to_vec()], 2).unwrap();
        let model = m_step(&labeled, &bad_doc(), &resp, &EmConfig::default()).unwrap();
        // Soft-count oracle: N(pos,good)=3, N(pos,bad)=1+r0, N(neg,good)=0,
        // N(neg,bad)=2+r1; D(pos)=2+r0, D(neg)=1+r1.
        let n = [[3.0, 1.0 + r[0]], [0.0, 2.0 + r[1]]];
        let d = [2.0 + r[0], 1.0 + r[1]];
        for c in 0..2 {
            let nc = n[c][0] + n[c][1];
            for w in 0..2 {
                let p = (n[c][w] + 1.0) / (nc + 2.0);
                assert!((model.log_word_probs[c][w].exp() - p).abs() < 1e-12);
            }
            assert!((model.log_priors[c].exp() - (d[c] + 1.0) / (4.0 + 2.0)).abs() < 1e-12);
        }
        // N(pos, bad) = 1 + 0.4 with the labeled "good bad" contributing one.
        assert!((n[0][1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn m_step_rejects_mismatched_rows() {
        let resp = Responsibilities::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], 2).unwrap();
        assert!(m_step(&toy_labeled(), &bad_doc(), &resp, &EmConfig::default()).is_err());
    }

    #[test]
    fn train_em_without_unlabeled_is_supervised() {
        let labeled = toy_labeled();
        let (model, trace) = train_em(&labeled, &UnlabeledVectors::empty(2), &EmConfig::default()).unwrap();
        assert_eq!(model, train_supervised(&labeled, 1.0).unwrap());
        assert_eq!(trace.entries.len(), 1);
        assert!(trace.converged);
        assert_eq!(trace.iterations, 0);
    }

    #[test]
    fn train_em_zero_lambda_stops_after_one_iteration() {
        let labeled = toy_labeled();
        let config = EmConfig {
            lambda: 0.0,
            ..EmConfig::default()
        };
        let (model, trace) = train_em(&labeled, &bad_doc(), &config).unwrap();
        assert_eq!(model, train_supervised(&labeled, 1.0).unwrap());
        assert_eq!(trace.iterations, 1);
        assert!(trace.converged);
    }

    #[test]
    fn train_em_rejects_bad_config() {
        let labeled = toy_labeled();
        let bad = EmConfig {
            lambda: -1.0,
            ..EmConfig::default()
        };
        assert!(train_em(&labeled, &bad_doc(), &bad).is_err());
        let empty = LabeledVectors::new(vec![], vec![], 2, 2).unwrap();
        assert!(train_em(&empty, &bad_doc(), &EmConfig::default()).is_err());
    }

    #[test]
    fn hardened_rows_are_one_hot() {
        let resp = Responsibilities::new(vec![vec![0.2, 0.8], vec![0.5, 0.5]], 2).unwrap();
        let hard = resp.hardened();
        assert_eq!(hard.rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let (_, trace) = train_em(&toy_labeled(), &bad_doc(), &EmConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        trace.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,log_likelihood,objective"));
        assert_eq!(lines.count(), trace.entries.len());
    }

    /// Random small instance: two classes, every labeled class non-empty.
    fn instance(
        dim: usize,
        labeled: Vec<(Vec<u32>, usize)>,
        unlabeled: Vec<Vec<u32>>,
    ) -> (LabeledVectors, UnlabeledVectors) {
        let mut docs: Vec<_> = labeled.iter().map(|(d, _)| CountVector::from_dense(&d[..dim])).collect();
        let mut labels: Vec<_> = labeled.iter().map(|(_, c)| *c).collect();
        docs.push(CountVector::from_dense(&vec![1; dim]));
        labels.push(0);
        docs.push(CountVector::from_dense(&vec![1; dim]));
        labels.push(1);
        let labeled = LabeledVectors::new(docs, labels, 2, dim).unwrap();
        let unlabeled = UnlabeledVectors::new(
            unlabeled.iter().map(|d| CountVector::from_dense(&d[..dim])).collect(),
            dim,
        )
        .unwrap();
        (labeled, unlabeled)
    }

    fn counts(max: u32) -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0..=max, 3)
    }

    fn linear_marginal(model: &NBModel, doc: &[u32]) -> Vec<f64> {
        // Direct product of probabilities, no log space.
        let joint: Vec<f64> = (0..model.num_classes())
            .map(|c| {
                let mut p = model.log_priors[c].exp();
                for (w, &x) in doc.iter().enumerate() {
                    for _ in 0..x {
                        p *= model.log_word_probs[c][w].exp();
                    }
                }
                p
            })
            .collect();
        let z: f64 = joint.iter().sum();
        joint.iter().map(|p| p / z).collect()
    }

    #[test]
    fn converged_model_is_a_fixed_point() {
        let (labeled, unlabeled) = instance(
            3,
            vec![(vec![3, 0, 1], 0), (vec![0, 2, 2], 1), (vec![2, 1, 0], 0)],
            vec![vec![1, 0, 2], vec![4, 1, 0], vec![0, 3, 1], vec![2, 2, 2], vec![0, 0, 5]],
        );
        let config = EmConfig {
            rel_tolerance: 1e-15,
            max_iterations: 10_000,
            ..EmConfig::default()
        };
        let (model, trace) = train_em(&labeled, &unlabeled, &config).unwrap();
        assert!(trace.converged);
        let next = m_step(&labeled, &unlabeled, &e_step(&model, &unlabeled).unwrap(), &config).unwrap();
        for (a, b) in model.log_priors.iter().zip(&next.log_priors) {
            assert!((a.exp() - b.exp()).abs() < 1e-6);
        }
        for (ra, rb) in model.log_word_probs.iter().zip(&next.log_word_probs) {
            for (a, b) in ra.iter().zip(rb) {
                assert!((a.exp() - b.exp()).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn e_step_rows_sum_to_one(
            labeled in proptest::collection::vec((counts(6), 0usize..2), 0..5),
            unlabeled in proptest::collection::vec(counts(40), 1..6),
        ) {
            let (labeled, unlabeled) = instance(3, labeled, unlabeled);
            let model = train_supervised(&labeled, 1.0).unwrap();
            for row in e_step(&model, &unlabeled).unwrap().rows() {
                let total: f64 = row.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn e_step_matches_enumeration(
            dim in 1usize..=3,
            labeled in proptest::collection::vec((counts(4), 0usize..2), 0..4),
            unlabeled in proptest::collection::vec(counts(4), 0..=3),
        ) {
            let (labeled, unlabeled_vectors) = instance(dim, labeled, unlabeled.clone());
            let model = train_supervised(&labeled, 0.5).unwrap();
            let resp = e_step(&model, &unlabeled_vectors).unwrap();
            for (row, doc) in resp.rows().iter().zip(&unlabeled) {
                let oracle = linear_marginal(&model, &doc[..dim]);
                for (r, o) in row.iter().zip(&oracle) {
                    prop_assert!((r - o).abs() < 1e-12, "{r} vs {o}");
                }
            }
        }

        #[test]
        fn objective_never_decreases(
            labeled in proptest::collection::vec((counts(5), 0usize..2), 0..4),
            unlabeled in proptest::collection::vec(counts(8), 1..8),
            lambda in 0.05f64..2.0,
            alpha in 0.1f64..2.0,
        ) {
            let (labeled, unlabeled) = instance(3, labeled, unlabeled);
            let config = EmConfig { alpha, lambda, max_iterations: 50, ..EmConfig::default() };
            let (_, trace) = train_em(&labeled, &unlabeled, &config).unwrap();
            for pair in trace.entries.windows(2) {
                prop_assert!(pair[1].objective >= pair[0].objective - 1e-9, "{:?}", pair);
            }
        }
    }
}
