//! Sentences, tokenization, JSONL corpus files and train/test splits.
//!
//! A corpus file is UTF-8 JSON lines. Labeled files start with a header
//! record naming the classes, followed by one sentence per line:
//!
//! ```text
//! {"classes": ["positive", "negative", "neutral"]}
//! {"id": "ms-0001", "text": "Revenue increased in fiscal year.", "label": "positive"}
//! ```
//!
//! Unlabeled files carry the same sentence records without a `label`; a
//! header line is accepted but not required.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

/// Default class names: positive, negative, neutral.
pub const DEFAULT_CLASSES: [&str; 3] = ["positive", "negative", "neutral"];

/// Splits text into lowercase runs of letters. Anything that is not a
/// letter (digits, punctuation, whitespace, apostrophes, hyphens) separates
/// tokens and is dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            // Some lowercase mappings emit combining marks; keep letters only.
            current.extend(ch.to_lowercase().filter(|c| c.is_alphabetic()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: Option<usize>,
}

impl Sentence {
    pub fn unlabeled(id: impl Into<String>, text: &str) -> Self {
        Sentence {
            id: id.into(),
            tokens: tokenize(text),
            label: None,
        }
    }

    pub fn labeled(id: impl Into<String>, text: &str, label: usize) -> Self {
        Sentence {
            id: id.into(),
            tokens: tokenize(text),
            label: Some(label),
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    sentences: Vec<Sentence>,
    class_names: Vec<String>,
}

impl LabeledCorpus {
    pub fn new(sentences: Vec<Sentence>, class_names: Vec<String>) -> Result<Self> {
        if class_names.is_empty() {
            return Err(Error::validation("a labeled corpus needs at least one class"));
        }
        let classes = class_names.len();
        for s in &sentences {
            match s.label {
                Some(l) if l < classes => {}
                Some(l) => {
                    return Err(Error::validation(format!(
                        "sentence {} has label {l} outside 0..{classes}",
                        s.id
                    )))
                }
                None => {
                    return Err(Error::validation(format!(
                        "sentence {} has no label",
                        s.id
                    )))
                }
            }
        }
        Ok(LabeledCorpus {
            sentences,
            class_names,
        })
    }

    pub fn empty(class_names: Vec<String>) -> Self {
        LabeledCorpus {
            sentences: Vec::new(),
            class_names,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.sentences.iter().map(|s| s.label.expect("labeled corpus"))
    }

    /// The first `n` sentences (or all of them).
    pub fn prefix(&self, n: usize) -> LabeledCorpus {
        LabeledCorpus {
            sentences: self.sentences[..n.min(self.len())].to_vec(),
            class_names: self.class_names.clone(),
        }
    }

    /// Sentences at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledCorpus {
        LabeledCorpus {
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Appends the sentences of `other`; class names must agree.
    pub fn extend(&mut self, other: &LabeledCorpus) -> Result<()> {
        if other.class_names != self.class_names {
            return Err(Error::validation(format!(
                "class names differ: {:?} vs {:?}",
                self.class_names, other.class_names
            )));
        }
        self.sentences.extend(other.sentences.iter().cloned());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnlabeledCorpus {
    sentences: Vec<Sentence>,
}

impl UnlabeledCorpus {
    pub fn new(sentences: Vec<Sentence>) -> Result<Self> {
        if let Some(s) = sentences.iter().find(|s| s.label.is_some()) {
            return Err(Error::validation(format!(
                "sentence {} carries a label in an unlabeled corpus",
                s.id
            )));
        }
        Ok(UnlabeledCorpus { sentences })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn prefix(&self, n: usize) -> UnlabeledCorpus {
        UnlabeledCorpus {
            sentences: self.sentences[..n.min(self.len())].to_vec(),
        }
    }

    /// Drops the labels of a labeled corpus.
    pub fn from_labeled(corpus: &LabeledCorpus) -> Self {
        UnlabeledCorpus {
            sentences: corpus
                .sentences
                .iter()
                .map(|s| Sentence {
                    label: None,
                    ..s.clone()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Labeled,
    Unlabeled,
}

/// A loaded corpus of either kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Corpus {
    Labeled(LabeledCorpus),
    Unlabeled(UnlabeledCorpus),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    classes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

pub fn load_corpus(path: impl AsRef<Path>, kind: CorpusKind) -> Result<Corpus> {
    match kind {
        CorpusKind::Labeled => load_labeled(path).map(Corpus::Labeled),
        CorpusKind::Unlabeled => load_unlabeled(path).map(Corpus::Unlabeled),
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    Ok(lines)
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn resolve_label(raw: &str, classes: &[String]) -> Option<usize> {
    if let Some(i) = classes.iter().position(|c| c == raw) {
        return Some(i);
    }
    raw.trim().parse::<usize>().ok().filter(|&i| i < classes.len())
}

pub fn load_labeled(path: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut iter = lines.into_iter();
    let (header_line, header) = iter
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing {\"classes\": [...]} header"))?;
    let header: Header = serde_json::from_str(&header)
        .map_err(|e| parse_error(path, header_line, format!("bad header: {e}")))?;
    if header.classes.is_empty() {
        return Err(parse_error(path, header_line, "header lists no classes"));
    }
    let mut sentences = Vec::new();
    for (line_no, line) in iter {
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| parse_error(path, line_no, format!("malformed record: {e}")))?;
        let raw = record
            .label
            .ok_or_else(|| parse_error(path, line_no, "labeled record without a label"))?;
        let label = resolve_label(&raw, &header.classes).ok_or_else(|| {
            parse_error(
                path,
                line_no,
                format!(
                    "label {raw:?} is not one of {} classes {:?}",
                    header.classes.len(),
                    header.classes
                ),
            )
        })?;
        sentences.push(Sentence::labeled(record.id, &record.text, label));
    }
    Ok(LabeledCorpus {
        sentences,
        class_names: header.classes,
    })
}

pub fn load_unlabeled(path: impl AsRef<Path>) -> Result<UnlabeledCorpus> {
    let path = path.as_ref();
    let mut sentences = Vec::new();
    for (idx, (line_no, line)) in read_lines(path)?.into_iter().enumerate() {
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| parse_error(path, line_no, format!("malformed record: {e}")))?;
        if idx == 0 && value.get("classes").is_some() {
            continue;
        }
        let record: Record = serde_json::from_value(value)
            .map_err(|e| parse_error(path, line_no, format!("malformed record: {e}")))?;
        if record.label.is_some() {
            return Err(parse_error(
                path,
                line_no,
                "labeled record in an unlabeled corpus",
            ));
        }
        sentences.push(Sentence::unlabeled(record.id, &record.text));
    }
    Ok(UnlabeledCorpus { sentences })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_json_line<T: Serialize>(out: &mut impl Write, path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)
        .map_err(|e| Error::Internal(format!("serializing record: {e}")))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn write_labeled(path: impl AsRef<Path>, corpus: &LabeledCorpus) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    write_json_line(
        &mut out,
        path,
        &Header {
            classes: corpus.class_names.clone(),
        },
    )?;
    for s in &corpus.sentences {
        let label = s.label.map(|l| corpus.class_names[l].clone());
        write_json_line(
            &mut out,
            path,
            &Record {
                id: s.id.clone(),
                text: s.text(),
                label,
            },
        )?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_unlabeled(path: impl AsRef<Path>, corpus: &UnlabeledCorpus) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for s in &corpus.sentences {
        write_json_line(
            &mut out,
            path,
            &Record {
                id: s.id.clone(),
                text: s.text(),
                label: None,
            },
        )?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Seeded partition of `0..n` into (train, test) index lists, each in
/// ascending order, with `round(test_fraction * n)` test indices.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(Error::validation(format!(
            "test fraction {test_fraction} outside [0, 1]"
        )));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed, rng::stream::SPLIT));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Splits a labeled corpus into (train, test); sentences keep their
/// original relative order inside each part.
pub fn split(
    corpus: &LabeledCorpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let (train, test) = split_indices(corpus.len(), test_fraction, seed)?;
    Ok((corpus.select(&train), corpus.select(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn classes() -> Vec<String> {
        DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect()
    }

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn tokenize_drops_numbers_and_punctuation() {
        assert_eq!(
            tokenize("Revenue increased 12% in 2012."),
            vec!["revenue", "increased", "in"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("ABC abc"), vec!["abc", "abc"]);
    }

    #[test]
    fn tokenize_splits_hyphens_and_apostrophes() {
        assert_eq!(
            tokenize("year-over-year company's"),
            vec!["year", "over", "year", "company", "s"]
        );
        assert_eq!(tokenize("Café ÜBER"), vec!["café", "über"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,64}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn split_is_a_partition(n in 0usize..200, frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let (train, test) = split_indices(n, frac, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), n);
            prop_assert_eq!(test.len(), (frac * n as f64).round() as usize);
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(split_indices(n, frac, seed).unwrap(), (train, test));
        }
    }

    #[test]
    fn loads_valid_labeled_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "l.jsonl",
            concat!(
                "{\"classes\": [\"positive\", \"negative\", \"neutral\"]}\n",
                "{\"id\": \"a\", \"text\": \"Sales grew 5%.\", \"label\": \"positive\"}\n",
                "{\"id\": \"b\", \"text\": \"Costs rose\", \"label\": \"negative\"}\n",
                "{\"id\": \"c\", \"text\": \"The company operates\", \"label\": \"2\"}\n",
            ),
        );
        let corpus = load_labeled(&path).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.labels().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(corpus.sentences()[0].tokens, vec!["sales", "grew"]);
    }

    #[test]
    fn out_of_range_label_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "l.jsonl",
            concat!(
                "{\"classes\": [\"positive\", \"negative\", \"neutral\"]}\n",
                "{\"id\": \"a\", \"text\": \"fine\", \"label\": \"0\"}\n",
                "{\"id\": \"b\", \"text\": \"bad\", \"label\": \"5\"}\n",
            ),
        );
        match load_labeled(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a line-numbered error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "u.jsonl", "{\"id\": \"a\", \"text\": \"x\"}\n{oops\n");
        match load_unlabeled(&path) {
            Err(e @ Error::Parse { line: 2, .. }) => assert_eq!(e.exit_code(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_file_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "l.jsonl", "{\"classes\": [\"a\", \"b\"]}\n");
        let corpus = load_labeled(&path).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(corpus.num_classes(), 2);
    }

    #[test]
    fn labeled_record_in_unlabeled_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "u.jsonl",
            "{\"id\": \"a\", \"text\": \"x\"}\n{\"id\": \"b\", \"text\": \"y\", \"label\": \"positive\"}\n",
        );
        assert!(matches!(load_unlabeled(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_corpus("/nonexistent/l.jsonl", CorpusKind::Labeled).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("/nonexistent/l.jsonl"));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = LabeledCorpus::new(
            vec![
                Sentence::labeled("1", "good results", 0),
                Sentence::labeled("2", "weak demand", 1),
            ],
            classes(),
        )
        .unwrap();
        let path = dir.path().join("out.jsonl");
        write_labeled(&path, &corpus).unwrap();
        assert_eq!(load_labeled(&path).unwrap(), corpus);

        let unlabeled = UnlabeledCorpus::from_labeled(&corpus);
        let upath = dir.path().join("u.jsonl");
        write_unlabeled(&upath, &unlabeled).unwrap();
        assert_eq!(load_unlabeled(&upath).unwrap(), unlabeled);
    }

    #[test]
    fn split_boundaries() {
        let corpus = LabeledCorpus::new(
            (0..10)
                .map(|i| Sentence::labeled(i.to_string(), "w", i % 3))
                .collect(),
            classes(),
        )
        .unwrap();
        let (train, test) = split(&corpus, 0.0, 1).unwrap();
        assert_eq!((train.len(), test.len()), (10, 0));
        assert_eq!(train, corpus);
        let (train, test) = split(&corpus, 1.0, 1).unwrap();
        assert_eq!((train.len(), test.len()), (0, 10));
        assert_eq!(test, corpus);
        assert_eq!(split(&corpus, 0.3, 9).unwrap(), split(&corpus, 0.3, 9).unwrap());
        assert!(split(&corpus, 1.5, 9).is_err());
    }

    #[test]
    fn labeled_corpus_validates_labels() {
        assert!(LabeledCorpus::new(vec![Sentence::labeled("x", "a", 3)], classes()).is_err());
        assert!(LabeledCorpus::new(vec![Sentence::unlabeled("x", "a")], classes()).is_err());
        assert!(UnlabeledCorpus::new(vec![Sentence::labeled("x", "a", 0)]).is_err());
    }
}
