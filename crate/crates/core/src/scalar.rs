//! Scalar abstraction: the shift/suspension layer is generic over the value
//! type (exact rationals for cocycle identities, floats for entropy work).

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::Zero;

/// Minimal bound for roof/potential values: additive arithmetic with order.
/// Satisfied by `f32`, `f64`, and `num_rational::Ratio<i64>`.
pub trait Scalar:
    Clone
    + PartialOrd
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + fmt::Debug
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialOrd
        + Zero
        + Add<Output = T>
        + Sub<Output = T>
        + Neg<Output = T>
        + fmt::Debug
{
}

/// Floating-point scalar for entropy, pressure, and geometry.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for converting an `f64` constant into a generic real.
pub fn rf<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in Real type")
}

/// Exact rational scalar used where cocycle identities are checked exactly.
pub type Rational = num_rational::Ratio<i64>;
