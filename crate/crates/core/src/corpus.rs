//! Labeled lexical-sample corpora and their bag-of-words matrices.
//!
//! A corpus holds every context of one ambiguous target word together with
//! its sense label. Contexts are tokenized into lowercase alphabetic terms,
//! stopwords and the target word itself are removed, and the surviving terms
//! form the columns of the document-term matrix.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use ndarray::Array2;

use crate::error::{DkpcaError, Result};
use crate::scalar::Real;

const BUNDLED_STOPWORDS: &str = include_str!("../resources/stopwords_en.txt");

/// Default cap on `documents * terms` for dense document-term matrices.
pub const DEFAULT_MAX_CELLS: usize = 400_000_000;

/// On-disk layout of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetFormat {
    /// One `label<TAB>text` instance per line, UTF-8, blank lines ignored.
    #[default]
    Tsv,
}

/// The word being disambiguated and the surface forms removed from contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetWord {
    lemma: String,
    forms: BTreeSet<String>,
}

impl TargetWord {
    /// Target matched on its lowercase lemma only.
    pub fn new(lemma: &str) -> Self {
        let lemma = lemma.trim().to_lowercase();
        let forms = BTreeSet::from([lemma.clone()]);
        TargetWord { lemma, forms }
    }

    /// Lemma plus its regular plural, e.g. `interest` / `interests`.
    pub fn with_plural(lemma: &str) -> Self {
        let target = TargetWord::new(lemma);
        let plural = format!("{}s", target.lemma);
        target.with_forms([plural])
    }

    pub fn with_forms<I, S>(mut self, forms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.forms.extend(
            forms
                .into_iter()
                .map(|f| f.as_ref().trim().to_lowercase())
                .filter(|f| !f.is_empty()),
        );
        self
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    pub fn forms(&self) -> &BTreeSet<String> {
        &self.forms
    }

    pub fn matches(&self, token: &str) -> bool {
        self.forms.contains(token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub label: String,
    pub text: String,
}

impl Instance {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let label = label.into().trim().to_string();
        let text = text.into();
        if label.is_empty() {
            return Err(DkpcaError::dataset("instance has an empty sense label"));
        }
        if text.trim().is_empty() {
            return Err(DkpcaError::dataset(format!(
                "instance labeled {label:?} has empty text"
            )));
        }
        Ok(Instance { label, text })
    }
}

/// All labeled contexts of one target word, in file order.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    target: TargetWord,
    instances: Vec<Instance>,
    sense_inventory: BTreeSet<String>,
}

impl LabeledCorpus {
    /// Requires at least two instances and at least two distinct senses.
    pub fn new(target: TargetWord, instances: Vec<Instance>) -> Result<Self> {
        if instances.len() < 2 {
            return Err(DkpcaError::dataset(format!(
                "corpus needs at least 2 instances, found {}",
                instances.len()
            )));
        }
        let sense_inventory: BTreeSet<String> =
            instances.iter().map(|i| i.label.clone()).collect();
        if sense_inventory.len() < 2 {
            return Err(DkpcaError::dataset(format!(
                "corpus needs at least 2 distinct senses, found {}",
                sense_inventory.len()
            )));
        }
        Ok(LabeledCorpus {
            target,
            instances,
            sense_inventory,
        })
    }

    pub fn target(&self) -> &TargetWord {
        &self.target
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn sense_inventory(&self) -> &BTreeSet<String> {
        &self.sense_inventory
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.instances.iter().map(|i| i.label.clone()).collect()
    }

    /// Instance count per sense, in inventory order.
    pub fn sense_counts(&self) -> Vec<(String, usize)> {
        self.sense_inventory
            .iter()
            .map(|s| {
                let n = self.instances.iter().filter(|i| &i.label == s).count();
                (s.clone(), n)
            })
            .collect()
    }
}

/// Reads a dataset file.
pub fn load_dataset(path: &Path, format: DatasetFormat, target: TargetWord) -> Result<LabeledCorpus> {
    match format {
        DatasetFormat::Tsv => {
            let file = fs::File::open(path).map_err(|source| DkpcaError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_tsv(BufReader::new(file), path, target)
        }
    }
}

/// Parses `label<TAB>text` lines. `origin` is only used in error messages.
pub fn parse_tsv<R: BufRead>(reader: R, origin: &Path, target: TargetWord) -> Result<LabeledCorpus> {
    let mut instances = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DkpcaError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: &str| DkpcaError::Parse {
            path: origin.to_path_buf(),
            line: line_no,
            message: message.to_string(),
        };
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `label<TAB>text`, found no tab"))?;
        if label.trim().is_empty() {
            return Err(parse_err("empty sense label"));
        }
        if text.trim().is_empty() {
            return Err(parse_err("empty context text"));
        }
        instances.push(Instance::new(label, text)?);
    }
    LabeledCorpus::new(target, instances).map_err(|e| match e {
        DkpcaError::Dataset(msg) => DkpcaError::Dataset(format!("{}: {msg}", origin.display())),
        other => other,
    })
}

/// Stopword set, matched against lowercase tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    pub fn empty() -> Self {
        StopWords::default()
    }

    /// The English list shipped with the crate.
    pub fn bundled() -> Self {
        StopWords::parse(BUNDLED_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|source| DkpcaError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(StopWords::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Lowercase alphabetic tokens of `text`, stopwords removed, order and
/// duplicates preserved.
///
/// Whitespace-separated chunks lose their leading and trailing punctuation;
/// a chunk whose remaining core holds any non-alphabetic character
/// (digits, inner hyphens, apostrophes) is dropped entirely.
pub fn tokenize(text: &str, stopwords: &StopWords) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|chunk| {
            let core = chunk.trim_matches(|c: char| !c.is_alphanumeric());
            if core.is_empty() || !core.chars().all(char::is_alphabetic) {
                return None;
            }
            let token = core.to_lowercase();
            (!stopwords.contains(&token)).then_some(token)
        })
        .collect()
}

/// Ordered, duplicate-free term list with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Terms in first-occurrence order; later duplicates are ignored.
    pub fn from_terms<I: IntoIterator<Item = String>>(terms: I) -> Self {
        let mut vocab = Vocabulary {
            terms: Vec::new(),
            index: HashMap::new(),
        };
        for term in terms {
            if !vocab.index.contains_key(&term) {
                vocab.index.insert(term.clone(), vocab.terms.len());
                vocab.terms.push(term);
            }
        }
        vocab
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Union of all instance tokens minus stopwords and target forms.
pub fn build_vocabulary(corpus: &LabeledCorpus, stopwords: &StopWords) -> Result<Vocabulary> {
    let target = corpus.target();
    let vocab = Vocabulary::from_terms(
        corpus
            .instances()
            .iter()
            .flat_map(|inst| tokenize(&inst.text, stopwords))
            .filter(|tok| !target.matches(tok)),
    );
    if vocab.is_empty() {
        return Err(DkpcaError::dataset(format!(
            "vocabulary for target {:?} is empty after filtering",
            target.lemma()
        )));
    }
    Ok(vocab)
}

/// Raw term-frequency matrix, one row per document.
#[derive(Debug, Clone)]
pub struct DocumentTermMatrix<T> {
    values: Array2<T>,
    vocab: Vocabulary,
}

impl<T: Real> DocumentTermMatrix<T> {
    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn term_count(&self) -> usize {
        self.values.ncols()
    }

    /// Elementwise indicator `D > 0`.
    pub fn incidence(&self) -> IncidenceMatrix<T> {
        IncidenceMatrix {
            values: self
                .values
                .mapv(|v| if v > T::zero() { T::one() } else { T::zero() }),
        }
    }
}

/// Binary document-term incidence.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix<T> {
    values: Array2<T>,
}

impl<T: Real> IncidenceMatrix<T> {
    pub fn values(&self) -> &Array2<T> {
        &self.values
    }
}

pub fn build_doc_term_matrix<T: Real>(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
) -> Result<(DocumentTermMatrix<T>, IncidenceMatrix<T>)> {
    build_doc_term_matrix_capped(corpus, vocab, DEFAULT_MAX_CELLS)
}

/// Counts every vocabulary term in every document. Tokens outside `vocab`
/// (stopwords, the target word) are ignored.
pub fn build_doc_term_matrix_capped<T: Real>(
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    max_cells: usize,
) -> Result<(DocumentTermMatrix<T>, IncidenceMatrix<T>)> {
    let m = corpus.len();
    let n = vocab.len();
    let cells = m.saturating_mul(n);
    if cells > max_cells {
        return Err(DkpcaError::Resource(format!(
            "document-term matrix {m}x{n} exceeds the cap of {max_cells} cells"
        )));
    }
    let mut values = Array2::<T>::zeros((m, n));
    let none = StopWords::empty();
    for (row, inst) in corpus.instances().iter().enumerate() {
        for tok in tokenize(&inst.text, &none) {
            if let Some(col) = vocab.position(&tok) {
                values[[row, col]] += T::one();
            }
        }
    }
    if let Some(col) = (0..n).find(|&j| values.column(j).iter().all(|v| v.is_zero())) {
        return Err(DkpcaError::Contract(format!(
            "vocabulary term {:?} does not occur in this corpus",
            vocab.terms()[col]
        )));
    }
    let dtm = DocumentTermMatrix {
        values,
        vocab: vocab.clone(),
    };
    let incidence = dtm.incidence();
    Ok((dtm, incidence))
}
