//! Scalar abstraction shared by every geometric routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point coordinate type: `f32` or `f64`.
///
/// Embeddings are produced by sines and cosines of arbitrary bend angles, so
/// only floating types are meaningful here; exact rationals would not survive
/// the first rotation.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Default minimum separation below which two features count as touching.
    fn default_clearance() -> Self;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Scalar for f64 {
    fn default_clearance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn default_clearance() -> Self {
        1e-4
    }
}
