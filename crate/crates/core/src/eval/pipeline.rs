//! End-to-end experiment: bag of words → kernel → KPCA → KNN over splits.
//!
//! The kernel and its projection are computed once over every instance;
//! labels only enter through the classifier trained on each split.

use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::metrics::{compute_metrics, MetricSet};
use super::report::{fingerprint, EvaluationReport, ReportRow};
use super::split::{make_splits, make_stratified_splits, Split, SplitPlan};
use crate::classify::{knn_fit, DEFAULT_K};
use crate::corpus::{
    build_doc_term_matrix_capped, build_vocabulary, DocumentTermMatrix, IncidenceMatrix, LabeledCorpus,
    StopWords, DEFAULT_MAX_CELLS,
};
use crate::error::{DkpcaError, Result};
use crate::kernels::{build_kernel, KernelKind, KernelMatrix, KernelParams, DEFAULT_LAMBDA, DEFAULT_STEPS};
use crate::kpca::{
    center_kernel, project, select_dimension, symmetric_eigendecomposition, DimensionPolicy, EigenSpectrum,
    Projection,
};
use crate::scalar::Real;

pub const DEFAULT_DIMENSION: usize = 1710;

/// Everything that determines the document embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConfig {
    pub kernel: KernelParams,
    pub dimension: DimensionPolicy,
    pub stopwords: StopWords,
    pub max_cells: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            kernel: KernelParams::diffusion(DEFAULT_LAMBDA, DEFAULT_STEPS),
            dimension: DimensionPolicy::Explicit(DEFAULT_DIMENSION),
            stopwords: StopWords::bundled(),
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl EmbeddingConfig {
    pub fn canonical(&self) -> String {
        let words: Vec<&str> = self.stopwords.iter().collect();
        format!(
            "{};{};stopwords={}",
            self.kernel.canonical(),
            self.dimension.canonical(),
            fingerprint(&words.join("\n"))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub embedding: EmbeddingConfig,
    pub k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            embedding: EmbeddingConfig::default(),
            k: DEFAULT_K,
        }
    }
}

/// Tf matrix and incidence of the whole corpus.
pub fn bag_of_words<T: Real>(
    corpus: &LabeledCorpus,
    config: &EmbeddingConfig,
) -> Result<(DocumentTermMatrix<T>, IncidenceMatrix<T>)> {
    let vocab = build_vocabulary(corpus, &config.stopwords)?;
    build_doc_term_matrix_capped(corpus, &vocab, config.max_cells)
}

/// Configured kernel over every instance of `corpus`.
pub fn corpus_kernel<T: Real>(corpus: &LabeledCorpus, config: &EmbeddingConfig) -> Result<KernelMatrix<T>> {
    let (dtm, incidence) = bag_of_words::<T>(corpus, config)?;
    log::info!(
        "bag of words: {} documents x {} terms",
        dtm.doc_count(),
        dtm.term_count()
    );
    build_kernel(&dtm, &incidence, &config.kernel)
}

/// Projected documents of one corpus, ready for repeated classification.
#[derive(Debug, Clone)]
pub struct Embedding<T> {
    dataset: String,
    labels: Vec<String>,
    inventory: BTreeSet<String>,
    kernel_kind: KernelKind,
    spectrum: EigenSpectrum<T>,
    projection: Projection<T>,
    points: Array2<T>,
    target_forms: String,
    config: EmbeddingConfig,
}

impl<T: Real> Embedding<T> {
    pub fn build(dataset: &str, corpus: &LabeledCorpus, config: &EmbeddingConfig) -> Result<Self> {
        let kernel = corpus_kernel(corpus, config)?;
        Embedding::from_kernel(dataset, corpus, &kernel, config)
    }

    /// Centers, eigendecomposes and projects a kernel already built over `corpus`.
    pub fn from_kernel(
        dataset: &str,
        corpus: &LabeledCorpus,
        kernel: &KernelMatrix<T>,
        config: &EmbeddingConfig,
    ) -> Result<Self> {
        if kernel.size() != corpus.len() {
            return Err(DkpcaError::parameter(format!(
                "kernel is {0}x{0} but the corpus has {1} instances",
                kernel.size(),
                corpus.len()
            )));
        }
        let centered = center_kernel(kernel)?;
        log::info!("eigendecomposing {}x{} centered kernel", kernel.size(), kernel.size());
        let spectrum = symmetric_eigendecomposition(&centered)?;
        let d = select_dimension(&spectrum, config.dimension)?;
        let projection = project(&spectrum, d)?;
        log::info!(
            "projected to {d} dimensions ({:.1}% of variance)",
            projection.retained_variance_ratio().as_f64() * 100.0
        );
        let forms: Vec<&str> = corpus.target().forms().iter().map(String::as_str).collect();
        Ok(Embedding {
            dataset: dataset.to_string(),
            labels: corpus.labels(),
            inventory: corpus.sense_inventory().clone(),
            kernel_kind: kernel.kind(),
            points: projection.points(),
            spectrum,
            projection,
            target_forms: forms.join(","),
            config: config.clone(),
        })
    }

    /// Reprojects the same spectrum under another dimension policy.
    pub fn with_dimension(&self, policy: DimensionPolicy) -> Result<Self> {
        let d = select_dimension(&self.spectrum, policy)?;
        let projection = project(&self.spectrum, d)?;
        Ok(Embedding {
            points: projection.points(),
            projection,
            config: EmbeddingConfig {
                dimension: policy,
                ..self.config.clone()
            },
            ..self.clone()
        })
    }

    fn canonical(&self) -> String {
        format!(
            "dataset={};target={};{}",
            self.dataset,
            self.target_forms,
            self.config.canonical()
        )
    }

    pub fn dataset(&self) -> &str {
        &self.dataset
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn spectrum(&self) -> &EigenSpectrum<T> {
        &self.spectrum
    }

    pub fn projection(&self) -> &Projection<T> {
        &self.projection
    }

    pub fn kernel_kind(&self) -> KernelKind {
        self.kernel_kind
    }

    pub fn splits(&self, plan: &SplitPlan) -> Result<Vec<Split>> {
        if plan.stratified {
            make_stratified_splits(&self.labels, plan)
        } else {
            make_splits(self.labels.len(), plan)
        }
    }

    /// Fits KNN on the training rows and predicts the test rows.
    pub fn predict_split(&self, split: &Split, k: usize) -> Result<Vec<String>> {
        let train_points = self.points.select(Axis(0), &split.train);
        let train_labels: Vec<String> = split.train.iter().map(|&i| self.labels[i].clone()).collect();
        let model = knn_fit(train_points.view(), &train_labels, k)?;
        let test_points = self.points.select(Axis(0), &split.test);
        model.predict_rows(test_points.view())
    }

    pub fn score_split(&self, split: &Split, k: usize) -> Result<MetricSet> {
        let predictions = self.predict_split(split, k)?;
        let truth: Vec<String> = split.test.iter().map(|&i| self.labels[i].clone()).collect();
        compute_metrics(&predictions, &truth, &self.inventory)
    }

    /// Runs every repeat of `plan`. With `threads > 1` repeats run on a
    /// dedicated pool; results are identical either way.
    pub fn evaluate(&self, k: usize, plan: &SplitPlan, threads: usize) -> Result<ReportRow> {
        let splits = self.splits(plan)?;
        let mut warnings = Vec::new();
        let train_size = splits.first().map_or(0, |s| s.train.len());
        if train_size < self.inventory.len() {
            let msg = format!(
                "{}: ratio {} gives {train_size} training instances for {} senses; some senses go unseen",
                self.dataset,
                plan.ratio,
                self.inventory.len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }

        let score = |(r, split): (usize, &Split)| {
            self.score_split(split, k).map_err(|e| DkpcaError::InRepeat {
                dataset: self.dataset.clone(),
                repeat: r,
                source: Box::new(e),
            })
        };
        let per_repeat: Vec<MetricSet> = if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| DkpcaError::Resource(e.to_string()))?;
            pool.install(|| splits.par_iter().enumerate().map(score).collect::<Result<_>>())?
        } else {
            splits.iter().enumerate().map(score).collect::<Result<_>>()?
        };
        let mean = MetricSet::mean(&per_repeat).expect("at least one repeat");
        Ok(ReportRow {
            dataset: self.dataset.clone(),
            kernel: self.kernel_kind,
            ratio: plan.ratio,
            per_repeat,
            mean,
            fingerprint: fingerprint(&format!("{};k={k};{}", self.canonical(), plan.canonical())),
            warnings,
        })
    }
}

/// One report row for `plan`, single-threaded.
pub fn run_experiment<T: Real>(
    dataset: &str,
    corpus: &LabeledCorpus,
    config: &PipelineConfig,
    plan: &SplitPlan,
) -> Result<EvaluationReport> {
    plan.validate()?;
    let embedding = Embedding::<T>::build(dataset, corpus, &config.embedding)?;
    let row = embedding.evaluate(config.k, plan, 1)?;
    Ok(EvaluationReport { rows: vec![row] })
}
