//! Kernel principal component analysis over a precomputed Gram matrix.
//!
//! The kernel is double-centered (`K̂ = J K J` with `J = I - 11ᵀ/m`),
//! eigendecomposed, and the documents are embedded as the columns of
//! `Y = Λ_d^{1/2} W_dᵀ` for the `d` leading eigenpairs. Squared distances
//! between columns of `Y` at full dimension equal the feature-space
//! distances `K̂_ii + K̂_jj - 2K̂_ij`.

mod spectrum_csv;

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{DkpcaError, Result};
use crate::kernels::{KernelKind, KernelMatrix};
use crate::linalg::{jacobi_eigen, mirror_upper, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL};
use crate::scalar::Real;

pub use spectrum_csv::write_spectrum_csv;

/// Eigenvalues with `|λ| < CLAMP_REL_TOL · λ_max` are set to zero.
pub const CLAMP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CenteredKernel<T> {
    values: Array2<T>,
    source_kind: Option<KernelKind>,
}

impl<T: Real> CenteredKernel<T> {
    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn source_kind(&self) -> Option<KernelKind> {
        self.source_kind
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }
}

pub fn center_kernel<T: Real>(k: &KernelMatrix<T>) -> Result<CenteredKernel<T>> {
    let mut c = center_gram(k.values().view())?;
    c.source_kind = Some(k.kind());
    Ok(c)
}

/// Double-centers any square matrix.
///
/// Evaluated as `K_ij - r_i - c_j + g` with row means `r`, column means `c`
/// and grand mean `g`, which equals `J K Jᵀ` without forming `J`.
pub fn center_gram<T: Real>(k: ArrayView2<T>) -> Result<CenteredKernel<T>> {
    let m = k.nrows();
    if m == 0 {
        return Err(DkpcaError::EmptyInput("cannot center a 0x0 kernel".into()));
    }
    if k.ncols() != m {
        return Err(DkpcaError::parameter(format!(
            "kernel must be square, got {}x{}",
            m,
            k.ncols()
        )));
    }
    let mf = T::from_usize(m).unwrap();
    let row_means: Array1<T> = k.rows().into_iter().map(|r| r.sum() / mf).collect();
    let col_means: Array1<T> = k.columns().into_iter().map(|c| c.sum() / mf).collect();
    let grand = row_means.sum() / mf;
    let mut values = Array2::from_shape_fn((m, m), |(i, j)| {
        k[[i, j]] - row_means[i] - col_means[j] + grand
    });
    mirror_upper(&mut values);
    Ok(CenteredKernel {
        values,
        source_kind: None,
    })
}

/// Descending eigenvalues and matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum<T> {
    eigenvalues: Array1<T>,
    eigenvectors: Array2<T>,
}

impl<T: Real> EigenSpectrum<T> {
    pub fn eigenvalues(&self) -> &Array1<T> {
        &self.eigenvalues
    }

    /// Column `i` is the eigenvector of `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &Array2<T> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn positive_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&v| v > T::zero()).count()
    }

    pub fn positive_sum(&self) -> T {
        self.eigenvalues
            .iter()
            .filter(|&&v| v > T::zero())
            .copied()
            .sum()
    }

    /// `Σ_{i<=d} λ_i / Σ λ_i` over positive eigenvalues, for `d = 1..=len`.
    pub fn cumulative_ratios(&self) -> Vec<T> {
        let total = self.positive_sum();
        let mut acc = T::zero();
        self.eigenvalues
            .iter()
            .map(|&v| {
                if v > T::zero() {
                    acc += v;
                }
                if total > T::zero() { acc / total } else { T::zero() }
            })
            .collect()
    }
}

pub fn symmetric_eigendecomposition<T: Real>(k: &CenteredKernel<T>) -> Result<EigenSpectrum<T>> {
    eigendecompose(k.values().view())
}

/// Full spectrum of a symmetric matrix, sorted descending.
///
/// Eigenvalues within `CLAMP_REL_TOL · λ_max` of zero become exactly zero.
/// Each eigenvector is signed so that its largest-magnitude component
/// (first one on ties) is positive.
pub fn eigendecompose<T: Real>(a: ArrayView2<T>) -> Result<EigenSpectrum<T>> {
    let raw = jacobi_eigen(a, T::tolerance(JACOBI_REL_TOL), JACOBI_MAX_SWEEPS)?;
    log::debug!("Jacobi converged in {} sweeps (n = {})", raw.sweeps, a.nrows());
    let n = raw.values.len();

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep solver order.
    order.sort_by(|&i, &j| raw.values[j].partial_cmp(&raw.values[i]).unwrap());

    let lambda_max = raw.values.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let clamp = T::tolerance(CLAMP_REL_TOL) * lambda_max;
    let eigenvalues: Array1<T> = order
        .iter()
        .map(|&i| {
            let v = raw.values[i];
            if v.abs() < clamp { T::zero() } else { v }
        })
        .collect();

    let mut eigenvectors = Array2::<T>::zeros((n, n));
    let tie = T::one() - T::epsilon() * T::of(64.0);
    for (dst, &src) in order.iter().enumerate() {
        let col = raw.vectors.column(src);
        let peak = col.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
        let lead = col.iter().find(|x| x.abs() >= peak * tie).copied().unwrap_or(T::one());
        let sign = if lead < T::zero() { -T::one() } else { T::one() };
        eigenvectors
            .column_mut(dst)
            .assign(&col.mapv(|x| x * sign));
    }
    Ok(EigenSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimensionPolicy {
    /// Keep `d` components, clamped to the number of positive eigenvalues.
    Explicit(usize),
    /// Smallest `d` whose cumulative variance ratio reaches `τ ∈ (0, 1]`.
    VarianceThreshold(f64),
}

impl DimensionPolicy {
    pub fn canonical(&self) -> String {
        match self {
            DimensionPolicy::Explicit(d) => format!("dim={d}"),
            DimensionPolicy::VarianceThreshold(t) => format!("dim_threshold={t:?}"),
        }
    }
}

pub fn select_dimension<T: Real>(spectrum: &EigenSpectrum<T>, policy: DimensionPolicy) -> Result<usize> {
    if spectrum.is_empty() {
        return Err(DkpcaError::EmptyInput("empty spectrum".into()));
    }
    if let DimensionPolicy::VarianceThreshold(tau) = policy {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(DkpcaError::parameter(format!(
                "variance threshold must lie in (0, 1], got {tau}"
            )));
        }
    }
    let positive = spectrum.positive_count();
    if positive == 0 {
        return Err(DkpcaError::Numeric(
            "degenerate kernel: no positive eigenvalues after centering".into(),
        ));
    }
    match policy {
        DimensionPolicy::Explicit(0) => Err(DkpcaError::parameter("dimension must be at least 1")),
        DimensionPolicy::Explicit(d) => Ok(d.min(positive)),
        DimensionPolicy::VarianceThreshold(tau) => {
            let tau = T::of(tau);
            let ratios = spectrum.cumulative_ratios();
            Ok(ratios
                .iter()
                .take(positive)
                .position(|&r| r >= tau)
                .map_or(positive, |i| i + 1))
        }
    }
}

/// Low-dimensional document coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    coordinates: Array2<T>,
    retained_variance_ratio: T,
}

impl<T: Real> Projection<T> {
    /// `d × m`; column `i` is document `i`.
    pub fn coordinates(&self) -> &Array2<T> {
        &self.coordinates
    }

    pub fn dimension(&self) -> usize {
        self.coordinates.nrows()
    }

    pub fn doc_count(&self) -> usize {
        self.coordinates.ncols()
    }

    pub fn retained_variance_ratio(&self) -> T {
        self.retained_variance_ratio
    }

    /// `m × d`, one row per document.
    pub fn points(&self) -> Array2<T> {
        self.coordinates.t().to_owned()
    }
}

/// `Y = Λ_d^{1/2} W_dᵀ`.
pub fn project<T: Real>(spectrum: &EigenSpectrum<T>, d: usize) -> Result<Projection<T>> {
    if d == 0 {
        return Err(DkpcaError::parameter("projection dimension must be at least 1"));
    }
    let positive = spectrum.positive_count();
    if d > positive {
        return Err(DkpcaError::parameter(format!(
            "projection dimension {d} exceeds the {positive} positive eigenvalues"
        )));
    }
    let scales = spectrum.eigenvalues.slice(s![..d]).mapv(|v| v.sqrt());
    let mut coordinates = spectrum.eigenvectors.slice(s![.., ..d]).t().to_owned();
    for (mut row, &scale) in coordinates.rows_mut().into_iter().zip(scales.iter()) {
        row.mapv_inplace(|x| x * scale);
    }
    let kept: T = spectrum.eigenvalues.slice(s![..d]).sum();
    Ok(Projection {
        coordinates,
        retained_variance_ratio: kept / spectrum.positive_sum(),
    })
}
