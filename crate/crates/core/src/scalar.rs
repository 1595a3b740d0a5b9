//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real floating point type the solvers are generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + FftNum + Default + Sum + Display + LowerExp + Debug {
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into `Self`.
    fn of_usize(n: usize) -> Self {
        Self::from(n).expect("usize representable in scalar type")
    }

    /// Converts a signed wavenumber into `Self`.
    fn of_i64(k: i64) -> Self {
        Self::from(k).expect("i64 representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
