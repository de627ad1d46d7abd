//! Compensated (Kahan–Babuška–Neumaier) accumulators for real and complex terms.

use std::ops::AddAssign;

use crate::scalar::{Cx, Real};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, term: T) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp = self.comp + ((self.sum - t) + term);
        } else {
            self.comp = self.comp + ((term - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Real> AddAssign<T> for CompensatedSum<T> {
    fn add_assign(&mut self, rhs: T) {
        self.add(rhs);
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for t in iter {
            acc.add(t);
        }
        acc
    }
}

/// Compensated sum of complex terms; real and imaginary parts carried separately.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
}

impl<T: Real> ComplexSum<T> {
    pub fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, term: Cx<T>) {
        self.re.add(term.re);
        self.im.add(term.im);
    }

    #[inline]
    pub fn value(&self) -> Cx<T> {
        Cx::new(self.re.value(), self.im.value())
    }
}

impl<T: Real> AddAssign<Cx<T>> for ComplexSum<T> {
    fn add_assign(&mut self, rhs: Cx<T>) {
        self.add(rhs);
    }
}

impl<T: Real> FromIterator<Cx<T>> for ComplexSum<T> {
    fn from_iter<I: IntoIterator<Item = Cx<T>>>(iter: I) -> Self {
        let mut acc = Self::new();
        for t in iter {
            acc.add(t);
        }
        acc
    }
}

/// Compensated sum of an iterator of reals.
pub fn sum_real<T: Real, I: IntoIterator<Item = T>>(terms: I) -> T {
    terms.into_iter().collect::<CompensatedSum<T>>().value()
}

/// Compensated sum of an iterator of complex values.
pub fn sum_complex<T: Real, I: IntoIterator<Item = Cx<T>>>(terms: I) -> Cx<T> {
    terms.into_iter().collect::<ComplexSum<T>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let s = sum_real([1e200f64, 0.1, 0.2, 0.3, -1e200]);
        assert!((s - 0.6).abs() < 1e-15);
    }

    #[test]
    fn beats_naive_on_harmonic_tail() {
        // Sum 1/k^2 forward in f32: compensated stays within a few ulps of the f64 value.
        let exact: f64 = (1..=200_000u64).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
        let comp = sum_real((1..=200_000u64).map(|k| 1.0f32 / (k as f32 * k as f32)));
        let naive: f32 = (1..=200_000u64).map(|k| 1.0f32 / (k as f32 * k as f32)).sum();
        assert!((comp as f64 - exact).abs() < (naive as f64 - exact).abs());
        assert!((comp as f64 - exact).abs() < 1e-6);
    }

    #[test]
    fn complex_parts_are_independent() {
        let s = sum_complex([Cx::new(1e16f64, -1.0), Cx::new(1.0, 1e16), Cx::new(-1e16, -1e16)]);
        assert_eq!(s, Cx::new(1.0, -1.0));
    }
}
