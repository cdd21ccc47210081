//! Diffusion kernel PCA for supervised word sense disambiguation.
//!
//! The pipeline turns labeled contexts of an ambiguous word into a
//! bag-of-words matrix, builds a document kernel (linear, Gaussian,
//! polynomial or semantic diffusion), embeds the documents with kernel PCA
//! and classifies them with k-nearest neighbors over seeded train/test
//! splits.
//!
//! Numeric types are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the usual double-precision choice.
//!
//! ```
//! use dkpca::corpus::{Instance, LabeledCorpus, TargetWord};
//! use dkpca::eval::{run_experiment, PipelineConfig, SplitPlan};
//!
//! let texts = [("1", "cold dark room"), ("2", "mold causes sickness")];
//! let instances = texts
//!     .iter()
//!     .cycle()
//!     .take(8)
//!     .map(|(l, t)| Instance::new(*l, *t).unwrap())
//!     .collect();
//! let corpus = LabeledCorpus::new(TargetWord::new("room"), instances).unwrap();
//! let config = PipelineConfig { k: 1, ..PipelineConfig::default() };
//! let plan = SplitPlan::new(0.5, 2, 7).unwrap();
//! let report = run_experiment::<f64>("toy", &corpus, &config, &plan).unwrap();
//! assert_eq!(report.rows[0].mean.accuracy, 1.0);
//! ```

pub mod classify;
pub mod corpus;
mod error;
pub mod eval;
pub mod kernels;
pub mod kpca;
pub mod linalg;
mod scalar;

pub use error::{DkpcaError, Result};
pub use scalar::Real;

pub type DocumentTermMatrix64 = corpus::DocumentTermMatrix<f64>;
pub type IncidenceMatrix64 = corpus::IncidenceMatrix<f64>;
pub type KernelMatrix64 = kernels::KernelMatrix<f64>;
pub type CooccurrenceMatrix64 = kernels::CooccurrenceMatrix<f64>;
pub type SemanticMatrix64 = kernels::SemanticMatrix<f64>;
pub type CenteredKernel64 = kpca::CenteredKernel<f64>;
pub type EigenSpectrum64 = kpca::EigenSpectrum<f64>;
pub type Projection64 = kpca::Projection<f64>;
pub type KnnModel64<L> = classify::KnnModel<f64, L>;
pub type Embedding64 = eval::Embedding<f64>;

pub type KernelMatrix32 = kernels::KernelMatrix<f32>;
pub type EigenSpectrum32 = kpca::EigenSpectrum<f32>;
pub type Projection32 = kpca::Projection<f32>;
