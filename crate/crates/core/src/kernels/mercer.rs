use ndarray::ArrayView2;

use crate::linalg::{jacobi_eigen, max_abs, max_asymmetry, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL};
use crate::scalar::Real;

/// Outcome of a Mercer check: symmetry and positive semi-definiteness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MercerVerdict<T> {
    /// `max |K - Kᵀ|`.
    pub max_asymmetry: T,
    /// Smallest eigenvalue of the symmetric part; `None` if the solver failed.
    pub min_eigenvalue: Option<T>,
    pub max_entry: T,
    pub passed: bool,
}

impl<T: Real> MercerVerdict<T> {
    /// Re-judges against tolerances relative to `max |K_ij|`.
    pub fn passes_relative(&self, symmetry_rel: T, eigen_rel: T) -> bool {
        let scale = self.max_entry;
        self.max_asymmetry <= symmetry_rel * scale
            && self
                .min_eigenvalue
                .is_some_and(|ev| ev >= -eigen_rel * scale)
    }
}

/// Passes iff `max |K - Kᵀ| <= tol` and every eigenvalue is `>= -tol`.
pub fn validate_mercer<T: Real>(k: ArrayView2<T>, tol: T) -> MercerVerdict<T> {
    let max_entry = max_abs(k);
    if k.nrows() != k.ncols() || k.nrows() == 0 {
        return MercerVerdict {
            max_asymmetry: T::infinity(),
            min_eigenvalue: None,
            max_entry,
            passed: false,
        };
    }
    let asym = max_asymmetry(k);
    let min_eigenvalue = jacobi_eigen(k, T::tolerance(JACOBI_REL_TOL), JACOBI_MAX_SWEEPS)
        .ok()
        .map(|e| e.values.iter().fold(T::infinity(), |acc, &v| acc.min(v)));
    let passed = asym <= tol && min_eigenvalue.is_some_and(|ev| ev >= -tol);
    MercerVerdict {
        max_asymmetry: asym,
        min_eigenvalue,
        max_entry,
        passed,
    }
}
