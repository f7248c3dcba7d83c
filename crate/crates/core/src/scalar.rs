//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through [`Real`], implemented for `f32` and `f64`.

use std::fmt;
use std::iter::Sum;

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
///
/// `nalgebra::RealField` supplies the elementary functions; the num-traits
/// casts move literals and counters in and out. `num_traits::Float` is
/// deliberately not a supertrait: its by-value methods shadow the
/// `ComplexField` ones and make every `abs`/`sqrt` call ambiguous.
pub trait Real:
    nalgebra::RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Default
    + Sum
    + fmt::Display
    + fmt::LowerExp
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Shorthand for embedding an `f64` literal into the scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable")
    }

    /// Conversion from a sample count.
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("count not representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
