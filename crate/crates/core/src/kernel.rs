//! Dirichlet-type kernels, the step-`r` summation-by-parts identity and the
//! half-band estimates that bound partial sums of a sine series.
//!
//! For `r >= 1` and `x` away from the points `2lπ/r`:
//!
//! ```text
//! D̃_{k,r}(x) = cos((k + r/2) x) / (2 sin(r x / 2))
//! D_{k,r}(x) = sin((k + r/2) x) / (2 sin(r x / 2))
//! ```
//!
//! and for `m >= n`
//!
//! ```text
//! Σ_{k=n}^{m} a_k sin(kx) = −Σ_{k=n}^{m} Δ_r a_k D̃_{k,r}(x)
//!                          + Σ_{k=m+1}^{m+r} a_k D̃_{k,−r}(x)
//!                          − Σ_{k=n}^{n+r−1} a_k D̃_{k,−r}(x).
//! ```
//!
//! Phases `(k + r/2) x` are formed with an error-free product so that the
//! identity holds to a few ulps of the summed magnitudes even for large `k`.

use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use crate::sequence::{diff_r, SequenceRule};
use crate::sum::{ComplexSum, CompensatedSum};

/// `|sin(r x / 2)|` at or below this value is treated as a singular abscissa.
pub const SINGULAR_GUARD: f64 = 1e-12;

/// `cos(a·x)` with the product `a·x` carried as an unevaluated hi + lo pair.
#[inline]
pub fn cos_product<T: Real>(a: T, x: T) -> T {
    let hi = a * x;
    let lo = a.mul_add(x, -hi);
    let (s, c) = hi.sin_cos();
    c - s * lo
}

/// `sin(a·x)` with the product `a·x` carried as an unevaluated hi + lo pair.
#[inline]
pub fn sin_product<T: Real>(a: T, x: T) -> T {
    let hi = a * x;
    let lo = a.mul_add(x, -hi);
    let (s, c) = hi.sin_cos();
    s + c * lo
}

fn half_step_sine<T: Real>(r: i64, x: T) -> Result<T> {
    let rf = T::from_i64(r).expect("step representable");
    let s = sin_product(rf / T::lit(2.0), x);
    if s.abs() <= T::lit(SINGULAR_GUARD) {
        let l = (rf * x / (T::lit(2.0) * T::PI())).round();
        let nearest = T::lit(2.0) * l * T::PI() / rf;
        return Err(Error::Singular {
            x: x.to_f64().unwrap_or(f64::NAN),
            r,
            l: l.to_i64().unwrap_or(0),
            nearest: nearest.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(s)
}

fn shifted_index<T: Real>(k: u64, r: i64) -> T {
    T::idx(k) + T::from_i64(r).expect("step representable") / T::lit(2.0)
}

/// `D̃_{k,r}(x)`; negative `r` uses the same formula.
pub fn dirichlet_tilde<T: Real>(k: u64, r: i64, x: T) -> Result<T> {
    let s = half_step_sine(r, x)?;
    Ok(cos_product(shifted_index::<T>(k, r), x) / (T::lit(2.0) * s))
}

/// `D_{k,r}(x)`; negative `r` uses the same formula.
pub fn dirichlet_d<T: Real>(k: u64, r: i64, x: T) -> Result<T> {
    let s = half_step_sine(r, x)?;
    Ok(sin_product(shifted_index::<T>(k, r), x) / (T::lit(2.0) * s))
}

/// Which half of the band `(2lπ/r, (2l+2)π/r)` an abscissa lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfBand {
    /// `(2lπ/r, (2l+1)π/r)`
    First,
    /// `((2l+1)π/r, (2l+2)π/r)`
    Second,
}

/// Abscissa located within the band structure of step `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPoint<T> {
    pub x: T,
    pub r: u64,
    pub l: i64,
    pub half: HalfBand,
}

impl<T: Real> KernelPoint<T> {
    /// Band index `l = ⌊r x / 2π⌋`; the half is chosen by comparing `r x/π − 2l` with 1.
    pub fn locate(x: T, r: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("r", "step must be >= 1"));
        }
        half_step_sine(r as i64, x)?;
        let t = T::idx(r) * x / T::PI();
        let l = (t / T::lit(2.0)).floor();
        let s = t - T::lit(2.0) * l;
        let l = l.to_i64().expect("band index representable");
        if s == T::one() || s <= T::zero() || s >= T::lit(2.0) {
            return Err(Error::OutsideHalfBand {
                x: x.to_f64().unwrap_or(f64::NAN),
                r,
                l,
            });
        }
        let half = if s < T::one() {
            HalfBand::First
        } else {
            HalfBand::Second
        };
        Ok(Self { x, r, l, half })
    }

    /// Upper bound on `|D̃_{k,±r}(x)|` valid on this half-band.
    pub fn kernel_bound(&self) -> T {
        kernel_band_bound(self.x, self.r, self.l).expect("located point lies inside its half-band")
    }
}

/// `1/(2(r x/π − 2l))` on the first half-band of `l`, `1/(2(2(l+1) − r x/π))` on the second.
///
/// Both follow from `|sin(r x/2)| >= r x/π − 2l` resp. `>= 2(l+1) − r x/π`.
pub fn kernel_band_bound<T: Real>(x: T, r: u64, l: i64) -> Result<T> {
    if r == 0 {
        return Err(Error::invalid("r", "step must be >= 1"));
    }
    let lf = T::from_i64(l).expect("band index representable");
    let s = T::idx(r) * x / T::PI() - T::lit(2.0) * lf;
    let two = T::lit(2.0);
    if s > T::zero() && s < T::one() {
        Ok(T::one() / (two * s))
    } else if s > T::one() && s < two {
        Ok(T::one() / (two * (two - s)))
    } else {
        Err(Error::OutsideHalfBand {
            x: x.to_f64().unwrap_or(f64::NAN),
            r,
            l,
        })
    }
}

/// The three pieces of the summation-by-parts identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SbpDecomposition<T> {
    /// `−Σ_{k=n}^{m} Δ_r a_k D̃_{k,r}(x)`
    pub main_term: Cx<T>,
    /// `Σ_{k=m+1}^{m+r} a_k D̃_{k,−r}(x)`
    pub upper_boundary: Cx<T>,
    /// `−Σ_{k=n}^{n+r−1} a_k D̃_{k,−r}(x)`
    pub lower_boundary: Cx<T>,
    pub total: Cx<T>,
}

/// Rewrites `Σ_{k=n}^{m} a_k sin(kx)` through step-`r` differences.
pub fn sbp_decompose<T: Real>(
    seq: &SequenceRule<T>,
    n: u64,
    m: u64,
    r: u64,
    x: T,
) -> Result<SbpDecomposition<T>> {
    if r == 0 {
        return Err(Error::invalid("r", "step must be >= 1"));
    }
    if m < n || n < seq.first_index() {
        return Err(Error::invalid("n..m", format!("need first_index <= n <= m, got {n}..{m}")));
    }
    let s = half_step_sine(r as i64, x)?;
    let inv = T::one() / (T::lit(2.0) * s);
    let ri = r as i64;

    // D̃_{k,r} = cos((k + r/2)x)·inv, D̃_{k,−r} = −cos((k − r/2)x)·inv.
    let mut main = ComplexSum::new();
    for k in n..=m {
        main.add(diff_r(seq, k, r) * cos_product(shifted_index::<T>(k, ri), x));
    }
    let mut upper = ComplexSum::new();
    for k in m + 1..=m + r {
        upper.add(seq.eval(k) * cos_product(shifted_index::<T>(k, -ri), x));
    }
    let mut lower = ComplexSum::new();
    for k in n..n + r {
        lower.add(seq.eval(k) * cos_product(shifted_index::<T>(k, -ri), x));
    }

    let main_term = -main.value() * inv;
    let upper_boundary = -upper.value() * inv;
    let lower_boundary = lower.value() * inv;
    let mut total = ComplexSum::new();
    total.add(main_term);
    total.add(upper_boundary);
    total.add(lower_boundary);
    Ok(SbpDecomposition {
        main_term,
        upper_boundary,
        lower_boundary,
        total: total.value(),
    })
}

/// `Σ_{k=n}^{m} a_k sin(kx)` with compensated summation and exact-product phases.
pub fn sine_partial_sum<T: Real>(seq: &SequenceRule<T>, n: u64, m: u64, x: T) -> Cx<T> {
    let mut acc = ComplexSum::new();
    for k in n..=m {
        acc.add(seq.eval(k) * sin_product(T::idx(k), x));
    }
    acc.value()
}

/// Right-hand side of the half-band partial-sum estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma2Bound<T> {
    pub l: i64,
    pub half: HalfBand,
    /// Kernel bound from the half-band sine inequality.
    pub kernel_bound: T,
    /// Prefactor as displayed in the estimate: `π/(2(rx − 2πl))` on the first
    /// half-band and `π/(2(l+1)π − rx)` on the second.
    pub displayed_prefactor: T,
    /// `Σ_{k=n}^{N} |Δ_r a_k|`
    pub difference_sum: T,
    /// `Σ_{k=N+1}^{N+r} |a_k|`
    pub upper_sum: T,
    /// `Σ_{k=n}^{n+r−1} |a_k|`
    pub lower_sum: T,
    /// `kernel_bound · (difference_sum + upper_sum + lower_sum)`
    pub value: T,
    /// `displayed_prefactor · (difference_sum + upper_sum + lower_sum)`
    pub displayed_value: T,
}

/// Bound on `|Σ_{k=n}^{N} a_k sin(kx)|` for `x` strictly inside a half-band.
pub fn lemma2_bound<T: Real>(
    seq: &SequenceRule<T>,
    n: u64,
    big_n: u64,
    r: u64,
    x: T,
) -> Result<Lemma2Bound<T>> {
    if big_n < n || n < seq.first_index() {
        return Err(Error::invalid("n..N", format!("need first_index <= n <= N, got {n}..{big_n}")));
    }
    let point = KernelPoint::locate(x, r)?;
    let kernel_bound = point.kernel_bound();
    let difference_sum: CompensatedSum<T> = (n..=big_n).map(|k| diff_r(seq, k, r).norm()).collect();
    let upper_sum: CompensatedSum<T> = (big_n + 1..=big_n + r).map(|k| seq.eval(k).norm()).collect();
    let lower_sum: CompensatedSum<T> = (n..n + r).map(|k| seq.eval(k).norm()).collect();
    let (d, u, lo) = (difference_sum.value(), upper_sum.value(), lower_sum.value());
    let total = d + u + lo;

    let rx = T::idx(r) * x;
    let lf = T::from_i64(point.l).expect("band index representable");
    let displayed_prefactor = match point.half {
        HalfBand::First => T::PI() / (T::lit(2.0) * (rx - T::lit(2.0) * T::PI() * lf)),
        HalfBand::Second => T::PI() / (T::lit(2.0) * (lf + T::one()) * T::PI() - rx),
    };
    Ok(Lemma2Bound {
        l: point.l,
        half: point.half,
        kernel_bound,
        displayed_prefactor,
        difference_sum: d,
        upper_sum: u,
        lower_sum: lo,
        value: kernel_bound * total,
        displayed_value: displayed_prefactor * total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Reference values at 40 significant digits for the exact binary64 abscissae.
    const HIGH_PRECISION: [(u64, i64, f64, f64, f64); 6] = [
        (0, 1, 0.7, 0.5, 1.3697560795418917273),
        (3, 2, 1.25, -0.50523699494429205714, 0.14945562850947405195),
        (17, 5, 2.9, 0.00080929773950854445317, 0.60747317674026180039),
        (100, 3, 0.4, 0.21109541256747694522, -0.85998691107429310309),
        (250, 4, 5.5, 0.26459509163986497632, 0.42425739154041194259),
        (7, -3, 1.1, 0.11590224438797905233, -0.48799749741741119339),
    ];

    fn oracle_sine_sum(vals: &[Cx<f64>], n: u64, m: u64, x: f64) -> Cx<f64> {
        // Independent direct sum: Neumaier on each part, phase k·x split with fma.
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let (mut cre, mut cim) = (0.0f64, 0.0f64);
        for k in n..=m {
            let kf = k as f64;
            let hi = kf * x;
            let lo = kf.mul_add(x, -hi);
            let s = hi.sin() + hi.cos() * lo;
            let a = vals.get((k - 1) as usize).copied().unwrap_or_default();
            for (acc, comp, t) in [(&mut re, &mut cre, a.re * s), (&mut im, &mut cim, a.im * s)] {
                let u = *acc + t;
                *comp += if acc.abs() >= t.abs() { (*acc - u) + t } else { (t - u) + *acc };
                *acc = u;
            }
        }
        Cx::new(re + cre, im + cim)
    }

    #[test]
    fn kernel_examples() {
        assert!(dirichlet_tilde(0, 2, PI / 2.0).unwrap().abs() < 1e-16);
        assert!((dirichlet_tilde(1, 2, PI / 2.0).unwrap() + 0.5).abs() < 1e-15);
        match dirichlet_tilde(0, 3, 2.0 * PI / 3.0) {
            Err(Error::Singular { l, nearest, .. }) => {
                assert_eq!(l, 1);
                assert!((nearest - 2.0 * PI / 3.0).abs() < 1e-15);
            }
            other => panic!("expected singularity, got {other:?}"),
        }
        assert!((dirichlet_d(0, 1, PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        for x in [0.3, 1.0, 2.0, 2.5] {
            assert!((dirichlet_d::<f64>(0, 2, x).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn kernels_match_high_precision() {
        for (k, r, x, d, dt) in HIGH_PRECISION {
            let got_d = dirichlet_d(k, r, x).unwrap();
            let got_t = dirichlet_tilde(k, r, x).unwrap();
            assert!((got_d - d).abs() <= 1e-14 * d.abs().max(1.0), "D {k} {r} {x}: {got_d} vs {d}");
            assert!((got_t - dt).abs() <= 1e-14 * dt.abs().max(1.0), "D~ {k} {r} {x}: {got_t} vs {dt}");
        }
    }

    #[test]
    fn band_bound_examples() {
        assert!((kernel_band_bound(PI / 2.0, 1, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((kernel_band_bound(PI / 4.0, 2, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(kernel_band_bound(PI, 1, 0).is_err());
        assert!(kernel_band_bound(0.0, 1, 0).is_err());
        assert!(kernel_band_bound(1.0, 1, 1).is_err());
        // Second half-band: r = 1, l = 0, x = 3π/2 → 1/(2(2 − 3/2)) = 1.
        assert!((kernel_band_bound(1.5 * PI, 1, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn band_bound_is_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let r = rng.gen_range(1..=5u64);
            let l = rng.gen_range(0..3i64);
            let width = 2.0 * PI / r as f64;
            let x = (l as f64) * width + rng.gen_range(0.01..0.99) * width;
            if let Ok(b) = kernel_band_bound(x, r, l) {
                let shifted = kernel_band_bound(x + width, r, l + 1).unwrap();
                assert!((b - shifted).abs() <= 1e-9 * b);
            }
        }
    }

    #[test]
    fn locate_picks_half_band() {
        let p = KernelPoint::locate(1.0f64, 3).unwrap();
        assert_eq!((p.l, p.half), (0, HalfBand::First));
        let p = KernelPoint::locate(1.5f64, 3).unwrap();
        assert_eq!((p.l, p.half), (0, HalfBand::Second));
        let p = KernelPoint::locate(2.5f64, 3).unwrap();
        assert_eq!((p.l, p.half), (1, HalfBand::First));
        assert!(KernelPoint::locate(2.0 * PI / 3.0, 3).is_err());
    }

    #[test]
    fn sbp_zero_and_delta() {
        let zero = SequenceRule::<f64>::constant(Cx::new(0.0, 0.0));
        let d = sbp_decompose(&zero, 3, 17, 2, 1.3).unwrap();
        assert_eq!(d.total, Cx::new(0.0, 0.0));

        for (n, m, r, x) in [(4u64, 4u64, 1u64, 0.9f64), (4, 10, 3, 2.2), (7, 30, 5, 0.5)] {
            let delta = SequenceRule::<f64>::real("delta", move |k| if k == n { 1.0 } else { 0.0 });
            let d = sbp_decompose(&delta, n, m, r, x).unwrap();
            let want = (n as f64 * x).sin();
            assert!((d.total.re - want).abs() <= 1e-13, "{n} {m} {r} {x}");
            assert!(d.total.im.abs() <= 1e-15);
        }
    }

    #[test]
    fn sbp_matches_direct_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let vals: Vec<Cx<f64>> = (0..60)
            .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let seq = SequenceRule::from_values("rand", vals.clone());
        let d = sbp_decompose(&seq, 5, 40, 3, 1.0).unwrap();
        let direct = oracle_sine_sum(&vals, 5, 40, 1.0);
        assert!((d.total - direct).norm() <= 1e-12 * direct.norm());
        let parts = d.main_term + d.upper_boundary + d.lower_boundary;
        assert!((parts - d.total).norm() <= 1e-14 * (1.0 + d.total.norm()));
    }

    #[test]
    fn sbp_error_grows_only_like_inverse_sine_near_singularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vals: Vec<Cx<f64>> = (0..120)
            .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let seq = SequenceRule::from_values("rand", vals.clone());
        for dist in [1e-2, 1e-4, 1e-6] {
            let x = 2.0 * PI / 3.0 + dist;
            let d = sbp_decompose(&seq, 1, 100, 3, x).unwrap();
            let direct = oracle_sine_sum(&vals, 1, 100, x);
            let sine = (1.5 * x).sin().abs();
            assert!((d.total - direct).norm() <= 1e-13 * (1.0 + direct.norm()) / sine);
        }
    }

    #[test]
    fn sbp_rejects_singular_and_bad_range() {
        let seq = SequenceRule::<f64>::real("1/k", |k| 1.0 / k as f64);
        assert!(matches!(sbp_decompose(&seq, 1, 10, 2, PI), Err(Error::Singular { .. })));
        assert!(sbp_decompose(&seq, 5, 4, 1, 1.0).is_err());
    }

    #[test]
    fn band_bound_dominates_examples() {
        let zero = SequenceRule::<f64>::constant(Cx::new(0.0, 0.0));
        assert_eq!(lemma2_bound(&zero, 1, 20, 2, 0.7).unwrap().value, 0.0);

        let sq = SequenceRule::<f64>::real("1/k^2", |k| 1.0 / (k * k) as f64);
        let b = lemma2_bound(&sq, 4, 64, 1, 0.3).unwrap();
        let direct = sine_partial_sum(&sq, 4, 64, 0.3).norm();
        assert!(direct <= b.value);
        assert_eq!(b.half, HalfBand::First);
        // On the first half-band the displayed prefactor and the kernel bound coincide.
        assert!((b.displayed_prefactor - b.kernel_bound).abs() <= 1e-12 * b.kernel_bound);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let vals: Vec<Cx<f64>> = (0..80)
                .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let seq = SequenceRule::from_values("rand", vals);
            let b = lemma2_bound(&seq, 3, 70, 3, 2.0).unwrap();
            assert_eq!((b.l, b.half), (0, HalfBand::Second));
            assert!(b.value.is_finite());
            assert!(sine_partial_sum(&seq, 3, 70, 2.0).norm() <= b.value);
            // Displayed second-half prefactor is twice the kernel bound.
            assert!((b.displayed_prefactor - 2.0 * b.kernel_bound).abs() <= 1e-12 * b.kernel_bound);
        }
    }
}
