//! Scalar abstraction: the numeric kernels are generic over the float type.

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, NumAssign};
use std::fmt;
use std::iter::Sum;

/// Floating-point scalar usable throughout the library (f32 or f64).
pub trait Scalar:
    Float
    + NumAssign
    + ScalarOperand
    + LinalgScalar
    + Sum
    + fmt::Display
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 constant not representable")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
