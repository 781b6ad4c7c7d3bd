//! Scalar abstraction for probabilities and increments.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type a probability can be stored in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless widening used when comparing against uniform draws and when
    /// serializing.
    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("f32/f64 always convert to f64")
    }

    /// Narrowing conversion from a configuration value.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("f32/f64 accept any f64")
    }

    /// Tolerance used to merge lattice states that differ only by
    /// accumulated rounding.
    fn lattice_tolerance() -> Self {
        Self::epsilon().sqrt()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn is_probability<T: Scalar>(p: T) -> bool {
    p >= T::zero() && p <= T::one()
}
