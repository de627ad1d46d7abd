//! Single and double complex sequences as evaluation rules, step-`r` difference
//! operators and dyadic block `p`-norms.
//!
//! Sequences are never stored as arrays: a rule maps an index to a value and is
//! evaluated on demand. Hot loops that revisit the same indices can layer a
//! [`TabulatedRule`] on top.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::scalar::{Cx, Real};
use crate::sum::CompensatedSum;

/// Largest index any scan is allowed to touch.
pub const MAX_HORIZON: u64 = 1 << 24;

type SingleFn<T> = dyn Fn(u64) -> Cx<T> + Send + Sync;
type DoubleFn<T> = dyn Fn(u64, u64) -> Cx<T> + Send + Sync;

/// Complex sequence `k ↦ a_k`, defined for `k >= first_index`.
#[derive(Clone)]
pub struct SequenceRule<T> {
    eval: Arc<SingleFn<T>>,
    label: String,
    first_index: u64,
}

impl<T: Real> SequenceRule<T> {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Cx<T> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            label: label.into(),
            first_index: 1,
        }
    }

    /// Real-valued rule.
    pub fn real<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> T + Send + Sync + 'static,
    {
        Self::new(label, move |k| Cx::new(f(k), T::zero()))
    }

    /// Finite data `a_1, a_2, …`, zero beyond the last value.
    pub fn from_values(label: impl Into<String>, values: Vec<Cx<T>>) -> Self {
        Self::new(label, move |k| {
            k.checked_sub(1)
                .and_then(|i| values.get(i as usize))
                .copied()
                .unwrap_or_else(|| Cx::new(T::zero(), T::zero()))
        })
    }

    pub fn constant(value: Cx<T>) -> Self {
        Self::new("constant", move |_| value)
    }

    pub fn with_first_index(mut self, first_index: u64) -> Self {
        self.first_index = first_index;
        self
    }

    #[inline]
    pub fn eval(&self, k: u64) -> Cx<T> {
        (self.eval)(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn first_index(&self) -> u64 {
        self.first_index
    }

    /// `k ↦ s · a_k`.
    pub fn scaled(&self, s: Cx<T>) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |k| inner(k) * s),
            label: format!("{}*scaled", self.label),
            first_index: self.first_index,
        }
    }

    /// Pointwise linear combination `k ↦ α a_k + β b_k`.
    pub fn combine(&self, alpha: Cx<T>, other: &Self, beta: Cx<T>) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self {
            eval: Arc::new(move |k| f(k) * alpha + g(k) * beta),
            label: format!("{}+{}", self.label, other.label),
            first_index: self.first_index.max(other.first_index),
        }
    }
}

impl<T> fmt::Debug for SequenceRule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceRule")
            .field("label", &self.label)
            .field("first_index", &self.first_index)
            .finish()
    }
}

/// Envelope `|c_jk| <= scale · row(j) · col(k)` declared alongside a double rule.
///
/// Tails of rules carrying an envelope can be truncated with a rigorous residual;
/// rules without one only ever produce inconclusive tail evidence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayEnvelope<T> {
    /// `row(j) = q_row^j`, `col(k) = q_col^k` with ratios in `(0, 1]`.
    Geometric { scale: T, row_ratio: T, col_ratio: T },
    /// `row(j) = j^{-a}`, `col(k) = k^{-b}`.
    Polynomial {
        scale: T,
        row_exponent: T,
        col_exponent: T,
    },
}

impl<T: Real> DecayEnvelope<T> {
    pub fn scale(&self) -> T {
        match *self {
            DecayEnvelope::Geometric { scale, .. } | DecayEnvelope::Polynomial { scale, .. } => {
                scale
            }
        }
    }

    pub fn row_factor(&self, j: u64) -> T {
        match *self {
            DecayEnvelope::Geometric { row_ratio, .. } => row_ratio.powf(T::idx(j)),
            DecayEnvelope::Polynomial { row_exponent, .. } => T::idx(j).powf(-row_exponent),
        }
    }

    pub fn col_factor(&self, k: u64) -> T {
        self.transposed().row_factor(k)
    }

    /// Upper bound on `Σ_{j >= from} row(j)`, or `None` when the series diverges.
    pub fn row_tail(&self, from: u64) -> Option<T> {
        let from = from.max(1);
        match *self {
            DecayEnvelope::Geometric { row_ratio, .. } => {
                (row_ratio < T::one()).then(|| row_ratio.powf(T::idx(from)) / (T::one() - row_ratio))
            }
            DecayEnvelope::Polynomial { row_exponent, .. } => (row_exponent > T::one()).then(|| {
                let f = T::idx(from);
                f.powf(-row_exponent) + f.powf(T::one() - row_exponent) / (row_exponent - T::one())
            }),
        }
    }

    pub fn col_tail(&self, from: u64) -> Option<T> {
        self.transposed().row_tail(from)
    }

    /// Smallest index from which `j ln j · row(j)` is nonincreasing, if any.
    pub fn row_weighted_peak(&self) -> Option<u64> {
        match *self {
            DecayEnvelope::Geometric { row_ratio, .. } => {
                if row_ratio >= T::one() {
                    return None;
                }
                // d/dj [j ln j q^j] <= 0 once (ln j + 1) / (j ln j) <= -ln q.
                let neg_log_q = -row_ratio.ln();
                let mut j = 2u64;
                while j < MAX_HORIZON {
                    let jf = T::idx(j);
                    if (jf.ln() + T::one()) / (jf * jf.ln()) <= neg_log_q {
                        return Some(j);
                    }
                    j += 1;
                }
                None
            }
            DecayEnvelope::Polynomial { row_exponent, .. } => {
                // j^{1-a} ln j decreases for j >= exp(1/(a-1)).
                if row_exponent <= T::one() {
                    return None;
                }
                let peak = (T::one() / (row_exponent - T::one())).exp().ceil();
                peak.to_u64().map(|p| p.max(2))
            }
        }
    }

    pub fn transposed(&self) -> Self {
        match *self {
            DecayEnvelope::Geometric {
                scale,
                row_ratio,
                col_ratio,
            } => DecayEnvelope::Geometric {
                scale,
                row_ratio: col_ratio,
                col_ratio: row_ratio,
            },
            DecayEnvelope::Polynomial {
                scale,
                row_exponent,
                col_exponent,
            } => DecayEnvelope::Polynomial {
                scale,
                row_exponent: col_exponent,
                col_exponent: row_exponent,
            },
        }
    }

    fn rescaled(&self, factor: T) -> Self {
        match *self {
            DecayEnvelope::Geometric {
                scale,
                row_ratio,
                col_ratio,
            } => DecayEnvelope::Geometric {
                scale: scale * factor,
                row_ratio,
                col_ratio,
            },
            DecayEnvelope::Polynomial {
                scale,
                row_exponent,
                col_exponent,
            } => DecayEnvelope::Polynomial {
                scale: scale * factor,
                row_exponent,
                col_exponent,
            },
        }
    }
}

/// Complex double sequence `(j, k) ↦ c_jk`, defined for `j, k >= 1`.
#[derive(Clone)]
pub struct DoubleSequenceRule<T> {
    eval: Arc<DoubleFn<T>>,
    label: String,
    decay: Option<DecayEnvelope<T>>,
}

impl<T: Real> DoubleSequenceRule<T> {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64, u64) -> Cx<T> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            label: label.into(),
            decay: None,
        }
    }

    pub fn real<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64, u64) -> T + Send + Sync + 'static,
    {
        Self::new(label, move |j, k| Cx::new(f(j, k), T::zero()))
    }

    pub fn zero() -> Self {
        Self::new("zero", |_, _| Cx::new(T::zero(), T::zero())).with_decay(
            DecayEnvelope::Geometric {
                scale: T::zero(),
                row_ratio: T::lit(0.5),
                col_ratio: T::lit(0.5),
            },
        )
    }

    /// Row-major `rows × cols` table indexed from `(1, 1)`, zero outside its support.
    pub fn from_table(label: impl Into<String>, rows: u64, cols: u64, values: Vec<Cx<T>>) -> Self {
        assert_eq!(values.len() as u64, rows * cols, "table shape mismatch");
        Self::new(label, move |j, k| {
            if j >= 1 && k >= 1 && j <= rows && k <= cols {
                values[((j - 1) * cols + (k - 1)) as usize]
            } else {
                Cx::new(T::zero(), T::zero())
            }
        })
    }

    /// `c_jk = a_j · b_k`.
    pub fn product(a: &SequenceRule<T>, b: &SequenceRule<T>) -> Self {
        let (f, g) = (a.eval.clone(), b.eval.clone());
        Self::new(format!("{}x{}", a.label, b.label), move |j, k| f(j) * g(k))
    }

    /// `c_jk = a_j + b_k`.
    pub fn additive(a: &SequenceRule<T>, b: &SequenceRule<T>) -> Self {
        let (f, g) = (a.eval.clone(), b.eval.clone());
        Self::new(format!("{}+{}", a.label, b.label), move |j, k| f(j) + g(k))
    }

    pub fn with_decay(mut self, envelope: DecayEnvelope<T>) -> Self {
        self.decay = Some(envelope);
        self
    }

    #[inline]
    pub fn eval(&self, j: u64, k: u64) -> Cx<T> {
        (self.eval)(j, k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay(&self) -> Option<&DecayEnvelope<T>> {
        self.decay.as_ref()
    }

    /// `(j, k) ↦ c_kj`.
    pub fn transposed(&self) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |j, k| inner(k, j)),
            label: format!("{}^T", self.label),
            decay: self.decay.map(|d| d.transposed()),
        }
    }

    /// `(j, k) ↦ s · c_jk`; a declared envelope is rescaled by `|s|`.
    pub fn scaled(&self, s: Cx<T>) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |j, k| inner(j, k) * s),
            label: format!("{}*scaled", self.label),
            decay: self.decay.map(|d| d.rescaled(s.norm())),
        }
    }

    /// Pointwise linear combination; the envelope is dropped.
    pub fn combine(&self, alpha: Cx<T>, other: &Self, beta: Cx<T>) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(format!("{}+{}", self.label, other.label), move |j, k| {
            f(j, k) * alpha + g(j, k) * beta
        })
    }

    /// Row `k ↦ c_jk` as a single sequence.
    pub fn row(&self, j: u64) -> SequenceRule<T> {
        let inner = self.eval.clone();
        SequenceRule::new(format!("{}[{j},.]", self.label), move |k| inner(j, k))
    }

    /// Column `j ↦ c_jk` as a single sequence.
    pub fn column(&self, k: u64) -> SequenceRule<T> {
        let inner = self.eval.clone();
        SequenceRule::new(format!("{}[.,{k}]", self.label), move |j| inner(j, k))
    }

    /// Evaluates the rule once on `[1, rows] × [1, cols]`.
    pub fn tabulate(&self, rows: u64, cols: u64) -> TabulatedRule<T> {
        TabulatedRule::build(self, rows, cols)
    }
}

impl<T> fmt::Debug for DoubleSequenceRule<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DoubleSequenceRule")
            .field("label", &self.label)
            .field("decay", &self.decay)
            .finish()
    }
}

/// Memoized rectangle of a double rule; lookups outside it fall through to the rule.
#[derive(Clone)]
pub struct TabulatedRule<T> {
    rule: DoubleSequenceRule<T>,
    rows: u64,
    cols: u64,
    data: Vec<Cx<T>>,
}

impl<T: Real> TabulatedRule<T> {
    fn build(rule: &DoubleSequenceRule<T>, rows: u64, cols: u64) -> Self {
        assert!(rows <= MAX_HORIZON && cols <= MAX_HORIZON, "table exceeds horizon cap");
        let mut data = vec![Cx::new(T::zero(), T::zero()); (rows * cols) as usize];
        if cols > 0 {
            data.par_chunks_mut(cols as usize)
                .enumerate()
                .for_each(|(i, row)| {
                    let j = i as u64 + 1;
                    for (kk, slot) in row.iter_mut().enumerate() {
                        *slot = rule.eval(j, kk as u64 + 1);
                    }
                });
        }
        Self {
            rule: rule.clone(),
            rows,
            cols,
            data,
        }
    }

    #[inline]
    pub fn get(&self, j: u64, k: u64) -> Cx<T> {
        if j >= 1 && k >= 1 && j <= self.rows && k <= self.cols {
            self.data[((j - 1) * self.cols + (k - 1)) as usize]
        } else {
            self.rule.eval(j, k)
        }
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    pub fn rule(&self) -> &DoubleSequenceRule<T> {
        &self.rule
    }
}

/// `Δ_r a_k = a_k − a_{k+r}`.
#[inline]
pub fn diff_r<T: Real>(seq: &SequenceRule<T>, k: u64, r: u64) -> Cx<T> {
    debug_assert!(r >= 1);
    seq.eval(k) - seq.eval(k + r)
}

/// `Δ_{r0} c_jk = c_jk − c_{j+r,k}`.
#[inline]
pub fn diff_r0<T: Real>(c: &DoubleSequenceRule<T>, j: u64, k: u64, r: u64) -> Cx<T> {
    c.eval(j, k) - c.eval(j + r, k)
}

/// `Δ_{0r} c_jk = c_jk − c_{j,k+r}`.
#[inline]
pub fn diff_0r<T: Real>(c: &DoubleSequenceRule<T>, j: u64, k: u64, r: u64) -> Cx<T> {
    c.eval(j, k) - c.eval(j, k + r)
}

/// `Δ_{rr} c_jk = c_jk − c_{j+r,k} − c_{j,k+r} + c_{j+r,k+r}`.
#[inline]
pub fn diff_rr<T: Real>(c: &DoubleSequenceRule<T>, j: u64, k: u64, r: u64) -> Cx<T> {
    c.eval(j, k) - c.eval(j + r, k) - c.eval(j, k + r) + c.eval(j + r, k + r)
}

/// `(Σ |x_i|^p)^{1/p}` over nonnegative magnitudes, evaluated as `max · (Σ (x_i/max)^p)^{1/p}`.
pub fn lp_norm<T: Real>(magnitudes: &[T], p: T) -> T {
    assert!(p > T::zero(), "p must be positive");
    let max = magnitudes.iter().copied().fold(T::zero(), T::max);
    if max <= T::zero() {
        return T::zero();
    }
    let inner: CompensatedSum<T> = magnitudes.iter().map(|&x| (x / max).powf(p)).collect();
    max * inner.value().powf(T::one() / p)
}

fn check_block(m: u64, r: u64) {
    assert!(m >= 1, "block start must be >= 1");
    assert!(r >= 1, "step must be >= 1");
    assert!(2 * m <= MAX_HORIZON, "block exceeds horizon cap");
}

/// `(Σ_{k=m}^{2m−1} |Δ_r a_k|^p)^{1/p}`.
pub fn block_p_norm<T: Real>(seq: &SequenceRule<T>, m: u64, p: T, r: u64) -> T {
    check_block(m, r);
    let mags: Vec<T> = (m..2 * m).map(|k| diff_r(seq, k, r).norm()).collect();
    lp_norm(&mags, p)
}

/// Row condition: `(Σ_{j=m}^{2m−1} |Δ_{r0} c_jn|^p)^{1/p}`.
pub fn row_block_p_norm<T: Real>(c: &DoubleSequenceRule<T>, m: u64, n: u64, p: T, r: u64) -> T {
    check_block(m, r);
    let mags: Vec<T> = (m..2 * m).map(|j| diff_r0(c, j, n, r).norm()).collect();
    lp_norm(&mags, p)
}

/// Column condition: `(Σ_{k=n}^{2n−1} |Δ_{0r} c_mk|^p)^{1/p}`.
pub fn col_block_p_norm<T: Real>(c: &DoubleSequenceRule<T>, m: u64, n: u64, p: T, r: u64) -> T {
    check_block(n, r);
    let mags: Vec<T> = (n..2 * n).map(|k| diff_0r(c, m, k, r).norm()).collect();
    lp_norm(&mags, p)
}

/// Mixed condition: `(Σ_{j=m}^{2m−1} Σ_{k=n}^{2n−1} |Δ_{rr} c_jk|^p)^{1/p}`.
pub fn double_block_p_norm<T: Real>(c: &DoubleSequenceRule<T>, m: u64, n: u64, p: T, r: u64) -> T {
    check_block(m, r);
    check_block(n, r);
    let mut mags = Vec::with_capacity((m * n) as usize);
    for j in m..2 * m {
        for k in n..2 * n {
            mags.push(diff_rr(c, j, k, r).norm());
        }
    }
    lp_norm(&mags, p)
}
