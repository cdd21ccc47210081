//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar usable by the kernel, KPCA and KNN code.
///
/// Implemented for `f32` and `f64`. Relative tolerances stated for `f64`
/// are widened through [`Real::tolerance`] when the precision cannot reach them.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for configuration parameters.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 converts to every Real")
    }

    /// Conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// `requested` unless it is below what this precision can resolve, in
    /// which case a multiple of machine epsilon is returned instead.
    fn tolerance(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::of(64.0);
        Self::of(requested).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}
