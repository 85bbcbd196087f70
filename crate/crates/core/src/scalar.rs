//! Floating-point scalar abstraction shared by every raster computation.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;
use std::fmt::Debug;
use std::iter::Sum;

/// Scalar type used for intensities, filter responses and descriptors.
///
/// Implemented for `f32` and `f64`. Geometry (points, homographies) and
/// similarity scores always use `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Sum + Default + Debug
{
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}
