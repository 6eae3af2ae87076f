use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the closed-form models are evaluated in.
///
/// Implemented for `f32` and `f64`. The simulator always samples in `f64`
/// and converts scenario values through [`ToPrimitive`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion of integer RAO counts and constants.
    fn from_u64_lossy(v: u64) -> Self {
        Self::from_u64(v).expect("every u64 is representable as a float")
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal fits the scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Relative agreement used when two routes to the same quantity must match.
pub(crate) fn rel_close<T: Scalar>(a: T, b: T, rel: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::min_positive_value());
    (a - b).abs() <= rel * scale
}
