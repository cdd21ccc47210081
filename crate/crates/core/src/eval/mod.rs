//! Repeated train/test evaluation at fixed labeled ratios.

mod metrics;
mod pipeline;
mod report;
mod split;

pub use metrics::{compute_metrics, per_class_f1, MetricSet};
pub use pipeline::{
    bag_of_words, corpus_kernel, run_experiment, Embedding, EmbeddingConfig, PipelineConfig, DEFAULT_DIMENSION,
};
pub use report::{fingerprint, EvaluationReport, ReportRow, CSV_HEADER};
pub use split::{
    make_splits, make_stratified_splits, repeat_seed, Split, SplitPlan, DEFAULT_RATIOS, DEFAULT_REPEATS,
    DEFAULT_SEED,
};
