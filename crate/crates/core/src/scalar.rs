//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the filter, fusion and metric code is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or sample.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 is representable in every Scalar")
    }

    /// Widening conversion used at I/O and RNG boundaries.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Numerically stable `ln(Σ exp(x_i))`. Returns `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let max = values
        .iter()
        .copied()
        .fold(T::neg_infinity(), |acc, v| if v > acc { v } else { acc });
    if max == T::neg_infinity() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Scalar>(angle: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = angle % two_pi;
    if a <= -T::PI() {
        a = a + two_pi;
    } else if a > T::PI() {
        a = a - two_pi;
    }
    a
}
