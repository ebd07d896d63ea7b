//! Multinomial naive Bayes with additive smoothing, entirely in natural-log
//! space.
//!
//! With `D_c` documents and `N_{c,w}` tokens of word `w` in class `c`, the
//! estimates are
//!
//! ```text
//! prior_c      = (D_c + alpha) / (D + alpha * C)
//! word_{c,w}   = (N_{c,w} + alpha) / (N_c + alpha * V)
//! ```
//!
//! The same estimator is used by the EM M-step with fractional counts.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::vocabulary::{CountVector, LabeledVectors, UnlabeledVectors};
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Per-class document mass and word counts; fractional when unlabeled
/// documents contribute through responsibilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWordCounts {
    pub doc_mass: Vec<f64>,
    /// `C x V`, row per class.
    pub word_counts: Vec<Vec<f64>>,
}

impl ClassWordCounts {
    pub fn zeros(num_classes: usize, dim: usize) -> Self {
        ClassWordCounts {
            doc_mass: vec![0.0; num_classes],
            word_counts: vec![vec![0.0; dim]; num_classes],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.doc_mass.len()
    }

    pub fn dim(&self) -> usize {
        self.word_counts.first().map_or(0, Vec::len)
    }

    /// Hard counts from labeled documents, accumulated in document order.
    pub fn from_labeled(labeled: &LabeledVectors) -> Self {
        let mut counts = ClassWordCounts::zeros(labeled.num_classes(), labeled.dim);
        for (doc, &label) in labeled.docs.iter().zip(&labeled.labels) {
            counts.doc_mass[label] += 1.0;
            let row = &mut counts.word_counts[label];
            for (w, x) in doc.iter() {
                row[w] += x;
            }
        }
        counts
    }

    /// Adds `weight * rows[j][c]` of each unlabeled document `j` to class
    /// `c`. A zero weight leaves the counts bit-for-bit unchanged.
    pub fn add_soft(
        &mut self,
        unlabeled: &UnlabeledVectors,
        rows: &[Vec<f64>],
        weight: f64,
    ) -> Result<()> {
        if unlabeled.len() != rows.len() {
            return Err(Error::dimension(unlabeled.len(), rows.len(), "responsibility rows"));
        }
        if unlabeled.dim != self.dim() {
            return Err(Error::dimension(self.dim(), unlabeled.dim, "unlabeled vector length"));
        }
        if weight == 0.0 {
            return Ok(());
        }
        let classes = self.num_classes();
        for (doc, row) in unlabeled.docs.iter().zip(rows) {
            if row.len() != classes {
                return Err(Error::dimension(classes, row.len(), "responsibility columns"));
            }
            for (c, &r) in row.iter().enumerate() {
                let mass = weight * r;
                if mass == 0.0 {
                    continue;
                }
                self.doc_mass[c] += mass;
                let counts = &mut self.word_counts[c];
                for (w, x) in doc.iter() {
                    counts[w] += mass * x;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBModel {
    pub class_names: Vec<String>,
    pub alpha: f64,
    pub vocab_size: usize,
    pub log_priors: Vec<f64>,
    /// `C x V`, row per class.
    pub log_word_probs: Vec<Vec<f64>>,
    /// Dictionary words in index order, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<Vec<String>>,
}

impl NBModel {
    /// Smoothed estimates from (possibly fractional) counts.
    pub fn from_counts(counts: &ClassWordCounts, alpha: f64, class_names: Vec<String>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::validation(format!("smoothing alpha must be positive, got {alpha}")));
        }
        let classes = counts.num_classes();
        if class_names.len() != classes {
            return Err(Error::dimension(classes, class_names.len(), "class names"));
        }
        let dim = counts.dim();
        let total_docs: f64 = counts.doc_mass.iter().sum();
        let log_prior_norm = (total_docs + alpha * classes as f64).ln();
        let log_priors = counts
            .doc_mass
            .iter()
            .map(|&d| (d + alpha).ln() - log_prior_norm)
            .collect();
        let log_word_probs = counts
            .word_counts
            .iter()
            .map(|row| {
                let total: f64 = row.iter().sum();
                let norm = (total + alpha * dim as f64).ln();
                row.iter().map(|&n| (n + alpha).ln() - norm).collect()
            })
            .collect();
        Ok(NBModel {
            class_names,
            alpha,
            vocab_size: dim,
            log_priors,
            log_word_probs,
            vocabulary: None,
        })
    }

    pub fn with_vocabulary(mut self, words: Vec<String>) -> Result<Self> {
        if words.len() != self.vocab_size {
            return Err(Error::dimension(self.vocab_size, words.len(), "vocabulary words"));
        }
        self.vocabulary = Some(words);
        Ok(self)
    }

    pub fn num_classes(&self) -> usize {
        self.log_priors.len()
    }

    /// Uniform priors and uniform word distributions.
    pub fn uniform(class_names: Vec<String>, vocab_size: usize, alpha: f64) -> Self {
        let classes = class_names.len();
        NBModel {
            class_names,
            alpha,
            vocab_size,
            log_priors: vec![-(classes as f64).ln(); classes],
            log_word_probs: vec![vec![-(vocab_size as f64).ln(); vocab_size]; classes],
            vocabulary: None,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("serializing model: {e}")))?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: NBModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: format!("invalid model file: {e}"),
        })?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let classes = self.class_names.len();
        if self.log_priors.len() != classes || self.log_word_probs.len() != classes {
            return Err(Error::validation("model class dimensions disagree"));
        }
        if self.log_word_probs.iter().any(|r| r.len() != self.vocab_size) {
            return Err(Error::validation("model word rows do not match vocab_size"));
        }
        if let Some(v) = &self.vocabulary {
            if v.len() != self.vocab_size {
                return Err(Error::validation("model vocabulary does not match vocab_size"));
            }
        }
        Ok(())
    }
}

pub fn train_supervised(labeled: &LabeledVectors, alpha: f64) -> Result<NBModel> {
    if labeled.is_empty() {
        return Err(Error::validation("cannot train on an empty labeled corpus"));
    }
    NBModel::from_counts(
        &ClassWordCounts::from_labeled(labeled),
        alpha,
        labeled.class_names.clone(),
    )
}

/// `log P(x, c)` for every class, up to the multinomial coefficient which
/// is shared by all classes.
pub fn log_joint(model: &NBModel, counts: &CountVector) -> Result<Vec<f64>> {
    if counts.dim() != model.vocab_size {
        return Err(Error::dimension(model.vocab_size, counts.dim(), "count vector length"));
    }
    Ok(model
        .log_priors
        .iter()
        .zip(&model.log_word_probs)
        .map(|(&prior, row)| prior + counts.iter().map(|(w, x)| x * row[w]).sum::<f64>())
        .collect())
}

/// Index of the maximum score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn predict(model: &NBModel, counts: &CountVector) -> Result<usize> {
    Ok(argmax(&log_joint(model, counts)?))
}

/// Fraction of test documents predicted correctly.
pub fn evaluate(model: &NBModel, test: &LabeledVectors) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::validation("cannot evaluate on an empty test set"));
    }
    let correct = test
        .docs
        .par_iter()
        .zip(test.labels.par_iter())
        .map(|(doc, &label)| predict(model, doc).map(|p| usize::from(p == label)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(correct as f64 / test.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabeledCorpus, Sentence};
    use crate::vocabulary::Vocabulary;
    use proptest::prelude::*;

    // pos: "good good", "good bad"; neg: "bad bad"; vocab {good, bad}
    fn toy() -> (LabeledVectors, Vocabulary) {
        let vocab = Vocabulary::from_words(vec!["good".into(), "bad".into()]).unwrap();
        let corpus = LabeledCorpus::new(
            vec![
                Sentence::labeled("1", "good good", 0),
                Sentence::labeled("2", "good bad", 0),
                Sentence::labeled("3", "bad bad", 1),
            ],
            vec!["pos".into(), "neg".into()],
        )
        .unwrap();
        (LabeledVectors::from_corpus(&corpus, &vocab), vocab)
    }

    /// Counts straight from the raw strings, independent of vectorization.
    fn count_oracle(docs: &[(&str, usize)], words: &[&str], classes: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut d = vec![0.0; classes];
        let mut n = vec![vec![0.0; words.len()]; classes];
        for (text, c) in docs {
            d[*c] += 1.0;
            for tok in text.split(' ') {
                let w = words.iter().position(|x| *x == tok).unwrap();
                n[*c][w] += 1.0;
            }
        }
        (d, n)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn toy_estimates_match_count_oracle() {
        let (data, _) = toy();
        let model = train_supervised(&data, 1.0).unwrap();
        let (d, n) = count_oracle(&[("good good", 0), ("good bad", 0), ("bad bad", 1)], &["good", "bad"], 2);
        let total_d: f64 = d.iter().sum();
        for c in 0..2 {
            assert!(close(model.log_priors[c].exp(), (d[c] + 1.0) / (total_d + 2.0)));
            let nc: f64 = n[c].iter().sum();
            for w in 0..2 {
                assert!(close(model.log_word_probs[c][w].exp(), (n[c][w] + 1.0) / (nc + 2.0)));
            }
        }
        // Frozen values from the oracle.
        assert!(close(model.log_word_probs[0][0].exp(), 2.0 / 3.0));
        assert!(close(model.log_word_probs[0][1].exp(), 1.0 / 3.0));
        assert!(close(model.log_word_probs[1][0].exp(), 1.0 / 4.0));
        assert!(close(model.log_word_probs[1][1].exp(), 3.0 / 4.0));
        assert!(close(model.log_priors[0].exp(), 3.0 / 5.0));
        assert!(close(model.log_priors[1].exp(), 2.0 / 5.0));
    }

    #[test]
    fn single_class_has_unit_prior() {
        let docs = vec![CountVector::from_dense(&[1, 0]), CountVector::from_dense(&[0, 3])];
        let data = LabeledVectors::new(docs, vec![0, 0], 1, 2).unwrap();
        let model = train_supervised(&data, 1.0).unwrap();
        assert_eq!(model.log_priors, vec![0.0]);
    }

    #[test]
    fn empty_class_row_is_uniform() {
        let docs = vec![CountVector::from_dense(&[2, 1])];
        let data = LabeledVectors::new(docs, vec![0], 2, 2).unwrap();
        let model = train_supervised(&data, 1.0).unwrap();
        assert!(close(model.log_word_probs[1][0].exp(), 0.5));
        assert!(close(model.log_word_probs[1][1].exp(), 0.5));
    }

    #[test]
    fn training_errors() {
        let empty = LabeledVectors::new(vec![], vec![], 2, 2).unwrap();
        assert!(train_supervised(&empty, 1.0).is_err());
        let (data, _) = toy();
        assert!(train_supervised(&data, 0.0).is_err());
        assert!(train_supervised(&data, -1.0).is_err());
    }

    #[test]
    fn log_joint_examples() {
        let (data, _) = toy();
        let model = train_supervised(&data, 1.0).unwrap();
        assert_eq!(log_joint(&model, &CountVector::zeros(2)).unwrap(), model.log_priors);
        let good = CountVector::from_dense(&[1, 0]);
        let scores = log_joint(&model, &good).unwrap();
        assert!(close(scores[0], (3.0f64 / 5.0).ln() + (2.0f64 / 3.0).ln()));
        assert!(close(scores[1], (2.0f64 / 5.0).ln() + (1.0f64 / 4.0).ln()));
        assert!(log_joint(&model, &CountVector::zeros(3)).is_err());

        let uniform = NBModel::uniform(vec!["a".into(), "b".into(), "c".into()], 4, 1.0);
        let s = log_joint(&uniform, &CountVector::from_dense(&[3, 0, 1, 2])).unwrap();
        assert!(s.iter().all(|&v| v == s[0]));
    }

    #[test]
    fn predict_examples() {
        let (data, _) = toy();
        let model = train_supervised(&data, 1.0).unwrap();
        assert_eq!(predict(&model, &CountVector::from_dense(&[1, 0])).unwrap(), 0);
        assert_eq!(predict(&model, &CountVector::from_dense(&[0, 1])).unwrap(), 1);
        // zero counts: prior 3/5 wins
        assert_eq!(predict(&model, &CountVector::zeros(2)).unwrap(), 0);
        let uniform = NBModel::uniform(vec!["a".into(), "b".into()], 2, 1.0);
        assert_eq!(predict(&uniform, &CountVector::from_dense(&[5, 1])).unwrap(), 0);
    }

    #[test]
    fn evaluate_examples() {
        let (data, _) = toy();
        let model = train_supervised(&data, 1.0).unwrap();
        let test = LabeledVectors::new(
            vec![CountVector::from_dense(&[1, 0]), CountVector::from_dense(&[0, 1])],
            vec![0, 1],
            2,
            2,
        )
        .unwrap();
        assert_eq!(evaluate(&model, &test).unwrap(), 1.0);
        let flipped = LabeledVectors::new(test.docs.clone(), vec![1, 0], 2, 2).unwrap();
        assert_eq!(evaluate(&model, &flipped).unwrap(), 0.0);
        let empty = LabeledVectors::new(vec![], vec![], 2, 2).unwrap();
        assert!(evaluate(&model, &empty).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let (data, vocab) = toy();
        let model = train_supervised(&data, 0.5)
            .unwrap()
            .with_vocabulary(vocab.words().to_vec())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        let back = NBModel::load(&path).unwrap();
        for (a, b) in model.log_word_probs.iter().flatten().zip(back.log_word_probs.iter().flatten()) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(back, model);
    }

    fn labeled_strategy() -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<usize>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(0u32..4, 5), n),
                prop::collection::vec(0usize..3, n),
            )
        })
    }

    proptest! {
        #[test]
        fn estimates_are_normalized((docs, labels) in labeled_strategy(), alpha in 0.01f64..5.0) {
            let docs = docs.iter().map(|d| CountVector::from_dense(d)).collect();
            let data = LabeledVectors::new(docs, labels, 3, 5).unwrap();
            let model = train_supervised(&data, alpha).unwrap();
            let prior_sum: f64 = model.log_priors.iter().map(|l| l.exp()).sum();
            prop_assert!((prior_sum - 1.0).abs() < 1e-9);
            for row in &model.log_word_probs {
                let s: f64 = row.iter().map(|l| l.exp()).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|v| v.is_finite()));
            }
        }

        #[test]
        fn predict_ignores_monotone_transforms(scores in prop::collection::vec(-50.0f64..50.0, 1..6), shift in -10.0f64..10.0) {
            let transformed: Vec<f64> = scores.iter().map(|s| (s + shift).exp()).collect();
            prop_assert_eq!(argmax(&scores), argmax(&transformed));
        }

        #[test]
        fn duplication_invariant_as_alpha_vanishes((docs, labels) in labeled_strategy()) {
            let dv: Vec<CountVector> = docs.iter().map(|d| CountVector::from_dense(d)).collect();
            let once = LabeledVectors::new(dv.clone(), labels.clone(), 3, 5).unwrap();
            let twice = LabeledVectors::new(
                dv.iter().chain(&dv).cloned().collect(),
                labels.iter().chain(&labels).copied().collect(),
                3,
                5,
            ).unwrap();
            let alpha = 1e-9;
            let a = train_supervised(&once, alpha).unwrap();
            let b = train_supervised(&twice, alpha).unwrap();
            for (x, y) in a.log_priors.iter().zip(&b.log_priors) {
                prop_assert!((x.exp() - y.exp()).abs() < 1e-6);
            }
            for (ra, rb) in a.log_word_probs.iter().zip(&b.log_word_probs) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((x.exp() - y.exp()).abs() < 1e-6);
                }
            }
        }
    }
}
