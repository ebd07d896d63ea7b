//! Word pools, dictionaries and bag-of-words count vectors.
//!
//! The pool is ordered the way dictionaries grow in the experiments: words
//! seen in the labeled training and test sentences come first in a seeded
//! random order, then novel words from the unlabeled sentences (also
//! shuffled), then novel words from a fallback word list in file order. A
//! dictionary of size `V` is the first `V` pool words, so dictionaries for
//! increasing `V` are nested.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use indexmap::IndexSet;
use rand::seq::SliceRandom;

use crate::corpus::{LabeledCorpus, Sentence, UnlabeledCorpus};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedWordPool {
    words: Vec<String>,
    /// End of the labeled/test segment and end of the unlabeled segment.
    boundaries: (usize, usize),
}

impl OrderedWordPool {
    /// Pool with an explicit order. `boundaries` must be non-decreasing and
    /// within the word count; words must be distinct.
    pub fn from_parts(words: Vec<String>, boundaries: (usize, usize)) -> Result<Self> {
        if boundaries.0 > boundaries.1 || boundaries.1 > words.len() {
            return Err(Error::validation(format!(
                "pool boundaries {boundaries:?} invalid for {} words",
                words.len()
            )));
        }
        let distinct: IndexSet<&str> = words.iter().map(String::as_str).collect();
        if distinct.len() != words.len() {
            return Err(Error::validation("word pool contains duplicates"));
        }
        Ok(OrderedWordPool { words, boundaries })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn boundaries(&self) -> (usize, usize) {
        self.boundaries
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of pool words that came from corpus sentences rather than the
    /// fallback list.
    pub fn observed_len(&self) -> usize {
        self.boundaries.1
    }
}

fn collect_unique<'a>(
    sentences: impl Iterator<Item = &'a Sentence>,
    exclude: &IndexSet<String>,
) -> IndexSet<String> {
    let mut seen = IndexSet::new();
    for s in sentences {
        for t in &s.tokens {
            if !exclude.contains(t) {
                seen.insert(t.clone());
            }
        }
    }
    seen
}

pub fn build_word_pool(
    labeled_train: &LabeledCorpus,
    test: &LabeledCorpus,
    unlabeled: &UnlabeledCorpus,
    fallback_wordlist: &[String],
    seed: u64,
) -> OrderedWordPool {
    let mut known: IndexSet<String> = IndexSet::new();

    let mut first: Vec<String> = collect_unique(
        labeled_train.sentences().iter().chain(test.sentences()),
        &known,
    )
    .into_iter()
    .collect();
    first.shuffle(&mut rng::seeded(seed, rng::stream::POOL_LABELED));
    known.extend(first.iter().cloned());

    let mut second: Vec<String> = collect_unique(unlabeled.sentences().iter(), &known)
        .into_iter()
        .collect();
    second.shuffle(&mut rng::seeded(seed, rng::stream::POOL_UNLABELED));
    known.extend(second.iter().cloned());

    let boundaries = (first.len(), first.len() + second.len());
    for w in fallback_wordlist {
        if !w.is_empty() {
            known.insert(w.clone());
        }
    }
    OrderedWordPool {
        words: known.into_iter().collect(),
        boundaries,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Vocabulary { words, index })
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }
}

/// The first `size` words of the pool.
pub fn truncate(pool: &OrderedWordPool, size: usize) -> Result<Vocabulary> {
    if size == 0 {
        return Err(Error::validation("vocabulary size must be positive"));
    }
    if size > pool.len() {
        return Err(Error::validation(format!(
            "vocabulary size {size} exceeds the word pool ({} words); supply a larger fallback word list",
            pool.len()
        )));
    }
    Vocabulary::from_words(pool.words[..size].to_vec())
}

/// Sparse bag-of-words counts; `entries` are `(word index, count)` sorted by
/// index with no zero counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    dim: usize,
    entries: Vec<(u32, u32)>,
}

impl CountVector {
    pub fn from_dense(counts: &[u32]) -> Self {
        CountVector {
            dim: counts.len(),
            entries: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i as u32, c))
                .collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        CountVector {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|&(i, c)| (i as usize, c as f64))
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut dense = vec![0; self.dim];
        for &(i, c) in &self.entries {
            dense[i as usize] = c;
        }
        dense
    }
}

pub fn vectorize(sentence: &Sentence, vocab: &Vocabulary) -> CountVector {
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for t in &sentence.tokens {
        if let Some(i) = vocab.get(t) {
            *counts.entry(i as u32).or_default() += 1;
        }
    }
    let mut entries: Vec<(u32, u32)> = counts.into_iter().collect();
    entries.sort_unstable();
    CountVector {
        dim: vocab.size(),
        entries,
    }
}

/// Labeled sentences as count vectors over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVectors {
    pub docs: Vec<CountVector>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub dim: usize,
}

impl LabeledVectors {
    pub fn new(
        docs: Vec<CountVector>,
        labels: Vec<usize>,
        num_classes: usize,
        dim: usize,
    ) -> Result<Self> {
        if docs.len() != labels.len() {
            return Err(Error::dimension(docs.len(), labels.len(), "labels per document"));
        }
        if let Some(d) = docs.iter().find(|d| d.dim() != dim) {
            return Err(Error::dimension(dim, d.dim(), "document vector length"));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::validation(format!(
                "label {l} outside 0..{num_classes}"
            )));
        }
        Ok(LabeledVectors {
            docs,
            labels,
            class_names: (0..num_classes).map(|c| format!("class{c}")).collect(),
            dim,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.class_names.len() {
            return Err(Error::dimension(self.class_names.len(), names.len(), "class names"));
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn from_corpus(corpus: &LabeledCorpus, vocab: &Vocabulary) -> Self {
        LabeledVectors {
            docs: corpus.sentences().iter().map(|s| vectorize(s, vocab)).collect(),
            labels: corpus.labels().collect(),
            class_names: corpus.class_names().to_vec(),
            dim: vocab.size(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledVectors {
    pub docs: Vec<CountVector>,
    pub dim: usize,
}

impl UnlabeledVectors {
    pub fn new(docs: Vec<CountVector>, dim: usize) -> Result<Self> {
        if let Some(d) = docs.iter().find(|d| d.dim() != dim) {
            return Err(Error::dimension(dim, d.dim(), "document vector length"));
        }
        Ok(UnlabeledVectors { docs, dim })
    }

    pub fn empty(dim: usize) -> Self {
        UnlabeledVectors {
            docs: Vec::new(),
            dim,
        }
    }

    pub fn from_corpus(corpus: &UnlabeledCorpus, vocab: &Vocabulary) -> Self {
        UnlabeledVectors {
            docs: corpus.sentences().iter().map(|s| vectorize(s, vocab)).collect(),
            dim: vocab.size(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Fixed-width lowercase base-26 rendering of `index` after `prefix`.
/// Distinct indices below `26^width` give distinct letter-only words.
pub fn pseudo_word(prefix: char, index: usize, width: usize) -> String {
    let mut letters = vec![b'a'; width];
    let mut n = index;
    for slot in letters.iter_mut().rev() {
        *slot = b'a' + (n % 26) as u8;
        n /= 26;
    }
    debug_assert_eq!(n, 0, "index {index} does not fit in {width} letters");
    let mut word = String::with_capacity(width + 1);
    word.push(prefix);
    word.push_str(std::str::from_utf8(&letters).expect("ascii"));
    word
}

/// Deterministic stand-in for an English word list: `count` distinct
/// pseudo-words starting with `z`. They never collide with generator words.
pub fn synthetic_wordlist(count: usize) -> Vec<String> {
    (0..count).map(|i| pseudo_word('z', i, 5)).collect()
}

/// One word per line; blank lines are skipped and words are lowercased.
pub fn load_wordlist(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect())
}
