//! Explicit step-3 sequence whose product double sequence satisfies the
//! `ℓ^p` class inequalities for `p > 1` but not for `p = 1`, and whose double
//! sine series diverges at `(2π/3, 2π/3)`.
//!
//! ```text
//! a_n = 3 / (n ln(n+1))                                    n ≡ 1 (mod 3)
//! a_n = 1 / (n ln(n+1))                                    n ≡ 2 (mod 3), or n ≡ 3 (mod 6)
//! a_n = 1 / ((n−3) ln(n−2)) + 1 / (n^{1+1/p} ln(n+1))      n ≡ 0 (mod 6)
//! c_mn = a_m a_n
//! ```

use crate::class_lab::{rhs_col_bound, BoundSpec};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use crate::sequence::{col_block_p_norm, DecayEnvelope, DoubleSequenceRule, SequenceRule};
use crate::sum::CompensatedSum;

/// Residue class of an index in the four-case definition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropCase {
    /// `n ≡ 1 (mod 3)`.
    One,
    /// `n ≡ 2 (mod 3)`.
    Two,
    /// `n ≡ 3 (mod 6)`.
    OddThree,
    /// `n ≡ 0 (mod 6)`.
    Six,
}

impl PropCase {
    pub fn of(n: u64) -> Self {
        match n % 6 {
            1 | 4 => PropCase::One,
            2 | 5 => PropCase::Two,
            3 => PropCase::OddThree,
            _ => PropCase::Six,
        }
    }
}

/// `a_n` for `n >= 1`, `p > 1`.
pub fn prop_single_term<T: Real>(n: u64, p: T) -> T {
    assert!(n >= 1, "index starts at 1");
    let nf = T::idx(n);
    let log_next = (nf + T::one()).ln();
    match PropCase::of(n) {
        PropCase::One => T::lit(3.0) / (nf * log_next),
        PropCase::Two | PropCase::OddThree => T::one() / (nf * log_next),
        PropCase::Six => {
            let three = T::lit(3.0);
            let lead = T::one() / ((nf - three) * (nf - T::lit(2.0)).ln());
            lead + T::one() / (nf.powf(T::one() + p.recip()) * log_next)
        }
    }
}

/// `c_mn = a_m a_n`.
pub fn prop_double_term<T: Real>(m: u64, n: u64, p: T) -> T {
    prop_single_term(m, p) * prop_single_term(n, p)
}

/// The sequence `a_n` for a fixed `p > 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropSequence<T> {
    p: T,
}

impl<T: Real> PropSequence<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::invalid("p", format!("need p > 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn term(&self, n: u64) -> T {
        prop_single_term(n, self.p)
    }

    pub fn double_term(&self, m: u64, n: u64) -> T {
        prop_double_term(m, n, self.p)
    }

    pub fn single_rule(&self) -> SequenceRule<T> {
        let p = self.p;
        SequenceRule::real(format!("proposition(p={p})"), move |n| {
            if n == 0 {
                T::zero()
            } else {
                prop_single_term(n, p)
            }
        })
        .with_first_index(1)
    }

    /// Product rule `c_mn = a_m a_n` with the envelope `a_n <= (3/ln 2)/n`.
    pub fn double_rule(&self) -> DoubleSequenceRule<T> {
        let p = self.p;
        let c0 = T::lit(3.0) / T::LN_2();
        DoubleSequenceRule::new(format!("proposition(p={p})"), move |m, n| {
            Cx::new(prop_double_term(m, n, p), T::zero())
        })
        .with_decay(DecayEnvelope::Polynomial {
            scale: c0 * c0,
            row_exponent: T::one(),
            col_exponent: T::one(),
        })
    }
}

/// Partial sums of `Σ a_k sin(2πk/3)` in groups of six next to their
/// logarithmically divergent lower bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceCertificate<T> {
    pub p: T,
    /// `(N, S_N)` with `S_N = Σ_{k=1}^{6N+5} a_k sin(2πk/3)`.
    pub partial_sums: Vec<(u64, T)>,
    /// `(N, L_N)` with `L_N = 4 sin(2π/3) Σ_{k=0}^{N} 1/((6k+5) ln(6k+5))`.
    pub lower_bounds: Vec<(u64, T)>,
    pub verified: bool,
    /// First `N` with `S_N < L_N` or `L_N <= L_{N-1}`.
    pub first_failure: Option<u64>,
}

impl<T: Real> DivergenceCertificate<T> {
    pub fn len(&self) -> usize {
        self.partial_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_sums.is_empty()
    }

    pub fn last_lower_bound(&self) -> T {
        self.lower_bounds.last().map(|x| x.1).unwrap_or(T::zero())
    }
}

/// Builds the certificate for `N = 0..=n_max`.
pub fn divergence_certificate<T: Real>(n_max: u64, p: T) -> Result<DivergenceCertificate<T>> {
    let seq = PropSequence::new(p)?;
    if n_max >= (1 << 40) {
        return Err(Error::invalid("n_max", "too large"));
    }
    let s = (T::lit(2.0) * T::PI() / T::lit(3.0)).sin();
    let four_s = T::lit(4.0) * s;
    let mut partial_sums = Vec::with_capacity(n_max as usize + 1);
    let mut lower_bounds = Vec::with_capacity(n_max as usize + 1);
    let mut brackets = CompensatedSum::new();
    let mut harmonic = CompensatedSum::new();
    let mut first_failure = None;
    let mut prev_lower = T::neg_infinity();
    for big_n in 0..=n_max {
        let b = 6 * big_n;
        brackets.add((seq.term(b + 1) - seq.term(b + 2)) + (seq.term(b + 4) - seq.term(b + 5)));
        let q = T::idx(b + 5);
        harmonic.add(T::one() / (q * q.ln()));
        let sn = s * brackets.value();
        let ln_ = four_s * harmonic.value();
        if first_failure.is_none() && (sn < ln_ || ln_ <= prev_lower) {
            first_failure = Some(big_n);
        }
        prev_lower = ln_;
        partial_sums.push((big_n, sn));
        lower_bounds.push((big_n, ln_));
    }
    Ok(DivergenceCertificate {
        p,
        partial_sums,
        lower_bounds,
        verified: first_failure.is_none(),
        first_failure,
    })
}

/// Ratio of `Σ_{k=n}^{2n−1} |c_mk − c_{m,k+3}|` to the column bound of `spec` at `(m, n)`.
///
/// For the max-window family this grows like `n^{1−1/p}` up to logarithms,
/// so no constant makes the `ℓ^1` column inequality hold.
pub fn dgm1_violation_ratio<T: Real>(m: u64, n: u64, p: T, spec: &BoundSpec<T>) -> Result<T> {
    let c = PropSequence::new(p)?.double_rule();
    let lhs = col_block_p_norm(&c, m, n, T::one(), 3);
    let rhs = rhs_col_bound(&c, m, n, spec)?;
    if !(rhs.value > T::zero()) {
        return Err(Error::invalid("spec", "column bound vanishes"));
    }
    Ok(lhs / rhs.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class_lab::BoundFamily;
    use crate::kernel::sin_product;
    use crate::scalar::linear_fit;
    use proptest::prelude::*;

    #[test]
    fn explicit_terms() {
        assert_eq!(prop_single_term(1, 2.0), 3.0 / 2f64.ln());
        assert_eq!(prop_single_term(2, 2.0), 1.0 / (2.0 * 3f64.ln()));
        let a6 = 1.0 / (3.0 * 4f64.ln()) + 1.0 / (6f64.powf(1.5) * 7f64.ln());
        assert!((prop_single_term(6, 2.0) - a6).abs() <= 1e-16);
        assert!((prop_single_term::<f64>(6, 2.0) - 0.2754155267722712).abs() <= 1e-15);
        assert_eq!(prop_double_term(1, 1, 2.0), (3.0 / 2f64.ln()).powi(2));
        assert_eq!(prop_double_term(6, 6, 2.0), prop_single_term::<f64>(6, 2.0).powi(2));
        assert!(PropSequence::new(1.0).is_err());
    }

    #[test]
    fn residue_identities() {
        let p = 1.7;
        for n in 1..5000u64 {
            let w = n as f64 * (n as f64 + 1.0).ln() * prop_single_term(n, p);
            match PropCase::of(n) {
                PropCase::One => assert!((w - 3.0).abs() <= 1e-12),
                PropCase::Two | PropCase::OddThree => assert!((w - 1.0).abs() <= 1e-12),
                PropCase::Six => assert!(w > 1.0),
            }
        }
    }

    #[test]
    fn symmetric_and_positive() {
        for m in 1..60 {
            for n in 1..60 {
                assert_eq!(prop_double_term(m, n, 3.0), prop_double_term(n, m, 3.0));
                assert!(prop_double_term(m, n, 3.0) > 0.0);
            }
        }
    }

    #[test]
    fn envelope_dominates() {
        let c = PropSequence::new(2.0).unwrap().double_rule();
        let env = *c.decay().unwrap();
        for j in 1..200 {
            for k in [1u64, 5, 6, 12, 99] {
                assert!(c.eval(j, k).re <= env.scale() * env.row_factor(j) * env.col_factor(k));
            }
        }
    }

    #[test]
    fn loglog_weight_along_residue_one() {
        for m in (100..400).filter(|m| m % 3 == 1) {
            for n in [100u64, 103, 1000, 10_000] {
                let (mf, nf) = (m as f64, n as f64);
                let v = mf * nf * mf.ln() * nf.ln() * prop_double_term(m, n, 2.0);
                assert!(v >= 8.0 && v < 9.0, "{m} {n} {v}");
            }
        }
    }

    #[test]
    fn certificate_matches_direct_series() {
        let cert = divergence_certificate(200, 2.0).unwrap();
        assert!(cert.verified);
        let x = 2.0 * std::f64::consts::PI / 3.0;
        let mut acc = CompensatedSum::new();
        let mut k = 0u64;
        for &(big_n, sn) in &cert.partial_sums {
            while k < 6 * big_n + 5 {
                k += 1;
                acc.add(prop_single_term(k, 2.0) * sin_product(k as f64, x));
            }
            assert!((acc.value() - sn).abs() <= 1e-13 * (1.0 + sn.abs()), "N={big_n}");
        }
        let s = (2.0 * std::f64::consts::PI / 3.0).sin();
        let s0 = s * ((prop_single_term(1, 2.0) - prop_single_term(2, 2.0))
            + (prop_single_term(4, 2.0) - prop_single_term(5, 2.0)));
        assert_eq!(cert.partial_sums[0].1, s0);
        assert!(prop_single_term(1, 2.0) > prop_single_term(2, 2.0));
        assert!(prop_single_term(4, 2.0) > prop_single_term(5, 2.0));
    }

    #[test]
    fn certificate_increments() {
        let cert = divergence_certificate(10_000, 2.0).unwrap();
        let s = (2.0 * std::f64::consts::PI / 3.0).sin();
        for w in cert.lower_bounds.windows(2).take(500) {
            let q = (6 * w[1].0 + 5) as f64;
            assert!(((w[1].1 - w[0].1) - 4.0 * s / (q * q.ln())).abs() <= 1e-13);
        }
        let (s100, s10k) = (cert.partial_sums[100].1, cert.partial_sums[10_000].1);
        let gain: f64 = (101..=10_000u64)
            .map(|k| {
                let q = (6 * k + 5) as f64;
                1.0 / (q * q.ln())
            })
            .sum();
        assert!(s10k > s100 + 4.0 * s * gain);
    }

    #[test]
    fn violation_ratio_grows() {
        let spec = BoundSpec::new(BoundFamily::MaxWindow, 2, 64).unwrap();
        let ns: Vec<u64> = (4..=12).map(|e| 1u64 << e).collect();
        let ratios: Vec<f64> = ns.iter().map(|&n| dgm1_violation_ratio(4, n, 2.0, &spec).unwrap()).collect();
        for w in ratios.windows(2) {
            assert!(w[1] > w[0]);
        }
        let pts: Vec<(f64, f64)> = ns.iter().zip(&ratios).map(|(&n, &r)| ((n as f64).ln(), r.ln())).collect();
        let (slope, _, corr) = linear_fit(&pts).unwrap();
        assert!(slope > 0.05 && corr >= 0.9, "slope {slope} corr {corr}");
        // Local slopes climb toward 1 - 1/p as the O(1/n) residue terms fade.
        let local: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        assert!(local[local.len() - 1] > local[2]);
        assert!(local[local.len() - 1] < 0.5);
    }

    proptest! {
        #[test]
        fn terms_positive(n in 1u64..10_000_000, p in 1.01f64..50.0) {
            prop_assert!(prop_single_term(n, p) > 0.0);
        }
    }
}
