//! Scalar abstraction shared by every lab module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the lab is generic over (`f32` or `f64`).
pub trait Real:
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
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable")
    }

    /// Converts an index into the scalar type.
    #[inline]
    fn idx(k: u64) -> Self {
        Self::from_u64(k).expect("index representable")
    }
}

impl<T> Real for T where
    T: Float
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
}

/// Complex value over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

/// Relative comparison with an absolute floor near zero.
pub fn close<T: Real>(a: T, b: T, rel: T, abs: T) -> bool {
    let diff = (a - b).abs();
    diff <= abs || diff <= rel * a.abs().max(b.abs())
}

/// Least-squares line through `(x, y)` pairs: `(slope, intercept, correlation)`.
///
/// Returns `None` for fewer than two points or zero spread in `x`.
pub fn linear_fit<T: Real>(points: &[(T, T)]) -> Option<(T, T, T)> {
    if points.len() < 2 {
        return None;
    }
    let n = T::idx(points.len() as u64);
    let mean_x = points.iter().map(|p| p.0).sum::<T>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<T>() / n;
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let corr = if syy > T::zero() {
        sxy / (sxx * syy).sqrt()
    } else {
        T::zero()
    };
    Some((slope, mean_y - slope * mean_x, corr))
}
