//! Document Gram matrices: linear, Gaussian, polynomial and semantic diffusion.
//!
//! The diffusion kernel spreads similarity along term co-occurrence chains.
//! With `G = BᵀB` the term co-occurrence counts of the binary incidence
//! matrix `B`, the semantic matrix is the truncated series
//!
//! ```text
//! S = I + λG + λ²G²/2! + … + λᵖGᵖ/p!
//! ```
//!
//! and the document kernel is `K = (DS)(DS)ᵀ` for the term-frequency matrix `D`.

pub mod cache;
mod mercer;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::corpus::{DocumentTermMatrix, IncidenceMatrix};
use crate::error::{DkpcaError, Result};
use crate::linalg::{gram_of_rows, mirror_upper};
use crate::scalar::Real;

pub use mercer::{validate_mercer, MercerVerdict};

pub const DEFAULT_LAMBDA: f64 = 0.0039;
pub const DEFAULT_STEPS: usize = 3;
pub const DEFAULT_MAX_STEPS: usize = 8;
pub const DEFAULT_POLY_DEGREE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    Linear,
    Rbf,
    Poly,
    Diffusion,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Linear,
        KernelKind::Rbf,
        KernelKind::Poly,
        KernelKind::Diffusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
            KernelKind::Poly => "poly",
            KernelKind::Diffusion => "diffusion",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            KernelKind::Linear => 0,
            KernelKind::Rbf => 1,
            KernelKind::Poly => 2,
            KernelKind::Diffusion => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        KernelKind::ALL.into_iter().find(|k| k.code() == code)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = DkpcaError;

    fn from_str(s: &str) -> Result<Self> {
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                DkpcaError::parameter(format!(
                    "unknown kernel {s:?} (expected linear, rbf, poly or diffusion)"
                ))
            })
    }
}

/// Which document-term matrix the co-occurrence counts are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CooccurrenceSource {
    /// Binary incidence `B`, so `G[j][j]` counts documents containing term `j`.
    #[default]
    Incidence,
    /// Raw term frequencies, kept for ablations.
    TermFrequency,
}

/// Kernel choice and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelParams {
    Linear,
    Rbf {
        /// Bandwidth; `None` resolves to `sqrt(N/2)`, i.e. `γ = 1/N`.
        sigma: Option<f64>,
        /// `false` uses the unsquared distance in the exponent.
        squared: bool,
    },
    Poly {
        degree: u32,
    },
    Diffusion {
        lambda: f64,
        steps: usize,
        cooccurrence: CooccurrenceSource,
    },
}

impl KernelParams {
    pub fn kind(&self) -> KernelKind {
        match self {
            KernelParams::Linear => KernelKind::Linear,
            KernelParams::Rbf { .. } => KernelKind::Rbf,
            KernelParams::Poly { .. } => KernelKind::Poly,
            KernelParams::Diffusion { .. } => KernelKind::Diffusion,
        }
    }

    pub fn diffusion(lambda: f64, steps: usize) -> Self {
        KernelParams::Diffusion {
            lambda,
            steps,
            cooccurrence: CooccurrenceSource::Incidence,
        }
    }

    /// Stable `key=value` rendering used for fingerprints.
    pub fn canonical(&self) -> String {
        match self {
            KernelParams::Linear => "kernel=linear".into(),
            KernelParams::Rbf { sigma, squared } => format!(
                "kernel=rbf;sigma={};squared={squared}",
                sigma.map_or_else(|| "auto".to_string(), |s| format!("{s:?}"))
            ),
            KernelParams::Poly { degree } => format!("kernel=poly;degree={degree}"),
            KernelParams::Diffusion {
                lambda,
                steps,
                cooccurrence,
            } => format!(
                "kernel=diffusion;lambda={lambda:?};steps={steps};g_from_tf={}",
                *cooccurrence == CooccurrenceSource::TermFrequency
            ),
        }
    }
}

/// Symmetric positive semi-definite document Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T> {
    values: Array2<T>,
    params: KernelParams,
}

impl<T: Real> KernelMatrix<T> {
    /// Wraps an externally computed Gram matrix.
    pub fn from_values(values: Array2<T>, params: KernelParams) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(DkpcaError::parameter(format!(
                "kernel matrix must be square, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(KernelMatrix { values, params })
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn kind(&self) -> KernelKind {
        self.params.kind()
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }
}

/// Term-by-term co-occurrence counts `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix<T> {
    values: Array2<T>,
}

impl<T: Real> CooccurrenceMatrix<T> {
    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }
}

/// Truncated diffusion series over term space.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMatrix<T> {
    values: Array2<T>,
    lambda: f64,
    steps: usize,
}

impl<T: Real> SemanticMatrix<T> {
    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    /// True when the series degenerates to the identity.
    pub fn is_identity(&self) -> bool {
        self.lambda == 0.0 || self.steps == 0
    }
}

fn check_rows<T: Real>(data: &ArrayView2<T>) -> Result<()> {
    if data.nrows() == 0 {
        return Err(DkpcaError::EmptyInput("no documents".into()));
    }
    Ok(())
}

/// `K = D Dᵀ`.
pub fn gram_linear<T: Real>(data: ArrayView2<T>) -> Result<KernelMatrix<T>> {
    check_rows(&data)?;
    Ok(KernelMatrix {
        values: gram_of_rows(data),
        params: KernelParams::Linear,
    })
}

/// Gaussian kernel `exp(-‖x_i - x_j‖² / 2σ²)`; with `squared == false` the
/// distance enters unsquared.
pub fn gram_rbf<T: Real>(data: ArrayView2<T>, sigma: f64, squared: bool) -> Result<KernelMatrix<T>> {
    check_rows(&data)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(DkpcaError::parameter(format!(
            "rbf sigma must be positive and finite, got {sigma}"
        )));
    }
    let inner = gram_of_rows(data);
    let m = inner.nrows();
    let denom = T::of(2.0 * sigma * sigma);
    let mut k = Array2::<T>::zeros((m, m));
    for i in 0..m {
        k[[i, i]] = T::one();
        for j in (i + 1)..m {
            let two = T::of(2.0);
            let d2 = (inner[[i, i]] + inner[[j, j]] - two * inner[[i, j]]).max(T::zero());
            let d = if squared { d2 } else { d2.sqrt() };
            let v = (-d / denom).exp();
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(KernelMatrix {
        values: k,
        params: KernelParams::Rbf {
            sigma: Some(sigma),
            squared,
        },
    })
}

/// `(⟨x_i, x_j⟩ + 1)^degree`.
pub fn gram_poly<T: Real>(data: ArrayView2<T>, degree: u32) -> Result<KernelMatrix<T>> {
    check_rows(&data)?;
    if degree < 1 {
        return Err(DkpcaError::parameter("polynomial degree must be at least 1"));
    }
    let exponent = i32::try_from(degree)
        .map_err(|_| DkpcaError::parameter(format!("polynomial degree {degree} too large")))?;
    let values = gram_of_rows(data).mapv(|g| (g + T::one()).powi(exponent));
    Ok(KernelMatrix {
        values,
        params: KernelParams::Poly { degree },
    })
}

/// `G = BᵀB` over the columns of `incidence`.
pub fn cooccurrence_matrix<T: Real>(incidence: ArrayView2<T>) -> Result<CooccurrenceMatrix<T>> {
    check_rows(&incidence)?;
    Ok(CooccurrenceMatrix {
        values: gram_of_rows(incidence.t()),
    })
}

pub fn diffusion_semantic_matrix<T: Real>(
    g: &CooccurrenceMatrix<T>,
    lambda: f64,
    steps: usize,
) -> Result<SemanticMatrix<T>> {
    diffusion_semantic_matrix_capped(g, lambda, steps, DEFAULT_MAX_STEPS)
}

/// `S = Σ_{p=0}^{steps} λᵖGᵖ/p!`, accumulated with a running power of `G`
/// and a running coefficient `λᵖ/p!`.
pub fn diffusion_semantic_matrix_capped<T: Real>(
    g: &CooccurrenceMatrix<T>,
    lambda: f64,
    steps: usize,
    max_steps: usize,
) -> Result<SemanticMatrix<T>> {
    check_diffusion_params(lambda, steps, max_steps)?;
    let n = g.size();
    let mut s = Array2::<T>::eye(n);
    if lambda == 0.0 || steps == 0 {
        return Ok(SemanticMatrix {
            values: s,
            lambda,
            steps,
        });
    }

    let lam = T::of(lambda);
    let mut power = g.values.clone();
    let mut coef = lam;
    s.scaled_add(coef, &power);
    for p in 2..=steps {
        power = power.dot(&g.values);
        mirror_upper(&mut power);
        coef = coef * lam / T::from_usize(p).unwrap();
        s.scaled_add(coef, &power);
    }
    Ok(SemanticMatrix {
        values: s,
        lambda,
        steps,
    })
}

fn check_diffusion_params(lambda: f64, steps: usize, max_steps: usize) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(DkpcaError::parameter(format!(
            "decay factor lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if steps > max_steps {
        return Err(DkpcaError::parameter(format!(
            "diffusion steps {steps} exceed the cap of {max_steps}"
        )));
    }
    Ok(())
}

/// `K = (DS)(DS)ᵀ`, forming `P = DS` first.
pub fn gram_diffusion<T: Real>(data: ArrayView2<T>, s: &SemanticMatrix<T>) -> Result<KernelMatrix<T>> {
    check_rows(&data)?;
    if s.size() != data.ncols() {
        return Err(DkpcaError::parameter(format!(
            "semantic matrix is {}x{} but documents have {} terms",
            s.size(),
            s.size(),
            data.ncols()
        )));
    }
    let params = KernelParams::diffusion(s.lambda, s.steps);
    let values = if s.is_identity() {
        gram_of_rows(data)
    } else {
        let projected = data.dot(&s.values);
        gram_of_rows(projected.view())
    };
    Ok(KernelMatrix { values, params })
}

/// Builds the configured kernel over all documents of `dtm`.
pub fn build_kernel<T: Real>(
    dtm: &DocumentTermMatrix<T>,
    incidence: &IncidenceMatrix<T>,
    params: &KernelParams,
) -> Result<KernelMatrix<T>> {
    let data = dtm.values().view();
    match *params {
        KernelParams::Linear => gram_linear(data),
        KernelParams::Rbf { sigma, squared } => {
            let sigma = sigma.unwrap_or_else(|| (dtm.term_count() as f64 / 2.0).sqrt());
            gram_rbf(data, sigma, squared)
        }
        KernelParams::Poly { degree } => gram_poly(data, degree),
        KernelParams::Diffusion {
            lambda,
            steps,
            cooccurrence,
        } => {
            let source = match cooccurrence {
                CooccurrenceSource::Incidence => incidence.values().view(),
                CooccurrenceSource::TermFrequency => data,
            };
            if lambda == 0.0 || steps == 0 {
                // The series is the identity; skip the N×N work entirely.
                check_diffusion_params(lambda, steps, DEFAULT_MAX_STEPS)?;
                return Ok(KernelMatrix {
                    values: gram_of_rows(data),
                    params: *params,
                });
            }
            log::debug!("co-occurrence matrix over {} terms", dtm.term_count());
            let g = cooccurrence_matrix(source)?;
            let s = diffusion_semantic_matrix(&g, lambda, steps)?;
            let k = gram_diffusion(data, &s)?;
            Ok(KernelMatrix {
                values: k.values,
                params: *params,
            })
        }
    }
}
