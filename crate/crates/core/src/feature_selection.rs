//! Feature scoring from labeled and pseudo-labeled counts.
//!
//! Expected class/word counts combine hard counts from labeled sentences
//! with responsibility-weighted counts from unlabeled ones. Setting the
//! unlabeled weight to zero gives the labeled-only baseline through the same
//! code path.
//!
//! Information gain is computed on a per-document occurrence indicator. The
//! counts only record token totals, so the presence mass of word `w` in
//! class `c` is taken as `min(count[c][w], doc_mass[c])`; this is exact when
//! a word occurs at most once per sentence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::classifier::ClassWordCounts;
use crate::em::Responsibilities;
use crate::math::entropy;
use crate::vocabulary::{LabeledVectors, OrderedWordPool, UnlabeledVectors, Vocabulary};
use crate::{Error, Result};

pub type SoftClassWordCounts = ClassWordCounts;

pub fn expected_counts(
    labeled: &LabeledVectors,
    unlabeled: &UnlabeledVectors,
    resp: &Responsibilities,
    lambda: f64,
) -> Result<SoftClassWordCounts> {
    if labeled.dim != unlabeled.dim {
        return Err(Error::dimension(labeled.dim, unlabeled.dim, "unlabeled vector length"));
    }
    if resp.num_classes() != labeled.num_classes() {
        return Err(Error::dimension(labeled.num_classes(), resp.num_classes(), "classes"));
    }
    let mut counts = ClassWordCounts::from_labeled(labeled);
    counts.add_soft(unlabeled, resp.rows(), lambda)?;
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScores {
    pub scores: Vec<f64>,
}

impl FeatureScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Writes `word,score,rank` rows in pool order; rank 1 is the best word.
    pub fn write_csv(&self, pool: &OrderedWordPool, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if pool.len() != self.len() {
            return Err(Error::dimension(pool.len(), self.len(), "scores per pool word"));
        }
        let order = ranking(&self.scores);
        let mut rank = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r + 1;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "word,score,rank").map_err(io)?;
        for (i, word) in pool.words().iter().enumerate() {
            writeln!(out, "{},{},{}", word, self.scores[i], rank[i]).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// `H(class) - H(class | occurrence)` in nats for every word column.
pub fn information_gain(counts: &SoftClassWordCounts) -> Result<FeatureScores> {
    let total: f64 = counts.doc_mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::validation("information gain needs positive document mass"));
    }
    let class_entropy = entropy(&counts.doc_mass);
    let classes = counts.num_classes();
    let scores = (0..counts.dim())
        .into_par_iter()
        .map(|w| {
            let mut present = vec![0.0; classes];
            let mut absent = vec![0.0; classes];
            for c in 0..classes {
                let mass = counts.doc_mass[c];
                present[c] = counts.word_counts[c][w].clamp(0.0, mass.max(0.0));
                absent[c] = (mass - present[c]).max(0.0);
            }
            let p_mass: f64 = present.iter().sum();
            let a_mass: f64 = absent.iter().sum();
            let conditional =
                (p_mass / total) * entropy(&present) + (a_mass / total) * entropy(&absent);
            (class_entropy - conditional).max(0.0)
        })
        .collect();
    Ok(FeatureScores { scores })
}

/// Indices sorted by descending score; equal scores keep index order.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// The `size` best-scoring pool words, indexed by descending score.
pub fn select_features(
    scores: &FeatureScores,
    pool: &OrderedWordPool,
    size: usize,
) -> Result<Vocabulary> {
    if scores.len() != pool.len() {
        return Err(Error::dimension(pool.len(), scores.len(), "scores per pool word"));
    }
    if size == 0 {
        return Err(Error::validation("vocabulary size must be positive"));
    }
    if size > pool.len() {
        return Err(Error::validation(format!(
            "cannot select {size} features from a pool of {}",
            pool.len()
        )));
    }
    let words = ranking(&scores.scores)
        .into_iter()
        .take(size)
        .map(|i| pool.words()[i].clone())
        .collect();
    Vocabulary::from_words(words)
}
