//! Rectangular partial sums of double sine series, finite-range evidence of
//! regular convergence, and the decay and tail quantities that enter the
//! sufficient conditions for it.
//!
//! A double series converges regularly when every rectangle sum
//! `Σ_{j=m}^{M} Σ_{k=n}^{N} c_jk sin(jx) sin(ky)` with `m + n` large is small.
//! [`regular_remainder_sup`] measures the largest such rectangle over a grid of
//! points for a list of thresholds on `m + n`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::sin_product;
use crate::scalar::{linear_fit, Cx, Real};
use crate::sequence::{diff_0r, diff_r0, diff_rr, DoubleSequenceRule, MAX_HORIZON};
use crate::sum::{CompensatedSum, ComplexSum};

/// Largest rectangle sup at the last threshold for a converging verdict.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Smallest rectangle sup at the last threshold for a diverging verdict.
pub const DIVERGENCE_FLOOR: f64 = 0.1;
/// A sup sequence whose log-log slope against the threshold stays above this is flat.
pub const FLAT_SLOPE: f64 = -0.5;
/// Number of trailing thresholds inspected by the verdict rules.
pub const VERDICT_WINDOW: usize = 4;
/// Largest rectangle cap the remainder profiler will tabulate.
pub const MAX_REMAINDER_CAP: u64 = 4096;
/// Upper indices below this are all sampled by the remainder profiler.
pub const DENSE_INDEX_LIMIT: u64 = 64;
/// Growth factor between sampled upper indices beyond the dense range.
pub const INDEX_GROWTH: f64 = 1.125;

/// `Σ_{j=m}^{M} Σ_{k=n}^{N} c_jk sin(jx) sin(ky)`.
pub fn double_partial_sum<T: Real>(
    c: &DoubleSequenceRule<T>,
    m: u64,
    big_m: u64,
    n: u64,
    big_n: u64,
    x: T,
    y: T,
) -> Cx<T> {
    assert!(1 <= m && m <= big_m && 1 <= n && n <= big_n, "need 1 <= m <= M, 1 <= n <= N");
    let sin_y: Vec<T> = (n..=big_n).map(|k| sin_product(T::idx(k), y)).collect();
    let mut outer = ComplexSum::new();
    for j in m..=big_m {
        let sx = sin_product(T::idx(j), x);
        if sx == T::zero() {
            continue;
        }
        let mut inner = ComplexSum::new();
        for (k, &sy) in (n..=big_n).zip(&sin_y) {
            inner.add(c.eval(j, k) * sy);
        }
        outer.add(inner.value() * sx);
    }
    outer.value()
}

/// Abscissas inside `(0, π]` kept away from the singular points `2lπ/r`.
///
/// Each interval `(jπ/r, (j+1)π/r)` receives `points_per_band` equispaced points
/// in `[jπ/r + e, (j+1)π/r − e]` (its midpoint when there is only one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub r: u64,
    pub points_per_band: u64,
    pub exclusion_radius: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(r: u64, points_per_band: u64, exclusion_radius: T) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("r", "step must be >= 1"));
        }
        if points_per_band == 0 {
            return Err(Error::invalid("points_per_band", "need at least one point"));
        }
        let half_width = T::PI() / (T::lit(2.0) * T::idx(r));
        if !(exclusion_radius > T::zero() && exclusion_radius < half_width) {
            return Err(Error::invalid(
                "exclusion_radius",
                format!("must lie in (0, pi/(2r)), got {exclusion_radius}"),
            ));
        }
        Ok(Self {
            r,
            points_per_band,
            exclusion_radius,
        })
    }

    pub fn abscissas(&self) -> Vec<T> {
        let w = T::PI() / T::idx(self.r);
        let e = self.exclusion_radius;
        let mut out = Vec::with_capacity((self.r * self.points_per_band) as usize);
        for j in 0..self.r {
            let lo = T::idx(j) * w;
            if self.points_per_band == 1 {
                out.push(lo + w / T::lit(2.0));
                continue;
            }
            let step = (w - e - e) / T::idx(self.points_per_band - 1);
            for i in 0..self.points_per_band {
                out.push(lo + e + T::idx(i) * step);
            }
        }
        out
    }

    pub fn points(&self) -> Vec<(T, T)> {
        let xs = self.abscissas();
        xs.iter().flat_map(|&x| xs.iter().map(move |&y| (x, y))).collect()
    }

    /// Grid point closest to `(x, y)`; ties go to the first in grid order.
    pub fn nearest(&self, x: T, y: T) -> (T, T) {
        let xs = self.abscissas();
        let pick = |t: T| {
            xs.iter()
                .copied()
                .fold((T::infinity(), T::zero()), |best, v| {
                    let d = (v - t).abs();
                    if d < best.0 { (d, v) } else { best }
                })
                .1
        };
        (pick(x), pick(y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConvergenceVerdict {
    Converging,
    NotConverging,
    Inconclusive,
}

impl ConvergenceVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            ConvergenceVerdict::Converging => "Converging",
            ConvergenceVerdict::NotConverging => "NotConverging",
            ConvergenceVerdict::Inconclusive => "Inconclusive",
        }
    }
}

/// Largest rectangle found for one threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemainderEntry<T> {
    pub threshold: u64,
    /// Lower corner `(m, n)`, with `m + n > threshold`.
    pub m: u64,
    pub n: u64,
    /// Upper corner `(M, N)`.
    pub big_m: u64,
    pub big_n: u64,
    pub sup: T,
    pub x: T,
    pub y: T,
}

/// Per-threshold sups at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSups<T> {
    pub x: T,
    pub y: T,
    pub sups: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemainderProfile<T> {
    /// One entry per threshold, in increasing threshold order.
    pub entries: Vec<RemainderEntry<T>>,
    pub caps: (u64, u64),
    pub verdict: ConvergenceVerdict,
    pub per_point: Vec<PointSups<T>>,
}

impl<T: Real> RemainderProfile<T> {
    pub fn sups(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.sup).collect()
    }

    pub fn sup_at(&self, threshold: u64) -> Option<T> {
        self.entries.iter().find(|e| e.threshold == threshold).map(|e| e.sup)
    }
}

/// Verdict for a sup sequence indexed by increasing thresholds.
pub fn remainder_verdict<T: Real>(thresholds: &[u64], sups: &[T]) -> ConvergenceVerdict {
    let len = sups.len().min(thresholds.len());
    if len == 0 {
        return ConvergenceVerdict::Inconclusive;
    }
    let from = len.saturating_sub(VERDICT_WINDOW);
    let tail = &sups[from..len];
    let last = tail[tail.len() - 1];
    let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    if last < T::lit(CONVERGENCE_TOL) && nonincreasing {
        return ConvergenceVerdict::Converging;
    }
    if last > T::lit(DIVERGENCE_FLOOR) && tail.len() >= 2 {
        let pts: Vec<(T, T)> = thresholds[from..len]
            .iter()
            .zip(tail)
            .map(|(&t, &s)| (T::idx(t).ln(), s.ln()))
            .collect();
        if let Some((slope, _, _)) = linear_fit(&pts) {
            if slope >= T::lit(FLAT_SLOPE) {
                return ConvergenceVerdict::NotConverging;
            }
        }
    }
    ConvergenceVerdict::Inconclusive
}

/// Sampled rectangle corners: every index below [`DENSE_INDEX_LIMIT`], then
/// geometric steps of [`INDEX_GROWTH`], always including `0` and `cap`.
pub fn remainder_indices(cap: u64) -> Vec<u64> {
    let mut idx: Vec<u64> = (0..=DENSE_INDEX_LIMIT.min(cap)).collect();
    let mut v = DENSE_INDEX_LIMIT;
    while v < cap {
        v = (v + 1).max((v as f64 * INDEX_GROWTH).ceil() as u64).min(cap);
        idx.push(v);
    }
    idx.dedup();
    idx
}

struct RemainderTable<T> {
    cap: u64,
    vals: Vec<Cx<T>>,
    real: bool,
    idx: Vec<u64>,
}

#[derive(Clone, Copy)]
struct Corner<T> {
    value: T,
    a0: usize,
    b0: usize,
    a1: usize,
    b1: usize,
}

impl<T: Real> RemainderTable<T> {
    fn build(c: &DoubleSequenceRule<T>, cap: u64) -> Self {
        let mut vals = vec![Cx::new(T::zero(), T::zero()); (cap * cap) as usize];
        vals.par_chunks_mut(cap as usize).enumerate().for_each(|(j, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                *v = c.eval(j as u64 + 1, k as u64 + 1);
            }
        });
        let real = vals.iter().all(|v| v.im == T::zero());
        Self {
            cap,
            vals,
            real,
            idx: remainder_indices(cap),
        }
    }

    /// `Q[j][b] = Σ_{k <= idx[b]} c_jk sin(ky)` for `j = 1..=cap`.
    fn row_prefixes(&self, y: T) -> Vec<Cx<T>> {
        let s = self.idx.len();
        let sin_y: Vec<T> = (1..=self.cap).map(|k| sin_product(T::idx(k), y)).collect();
        let mut q = vec![Cx::new(T::zero(), T::zero()); self.cap as usize * s];
        q.par_chunks_mut(s).enumerate().for_each(|(j, out)| {
            let row = &self.vals[j * self.cap as usize..(j + 1) * self.cap as usize];
            let mut acc = ComplexSum::new();
            let mut b = 1;
            for k in 1..=self.cap {
                acc.add(row[k as usize - 1] * sin_y[k as usize - 1]);
                while b < s && self.idx[b] == k {
                    out[b] = acc.value();
                    b += 1;
                }
            }
        });
        q
    }

    /// `F[a][b] = Σ_{j <= idx[a]} Σ_{k <= idx[b]} c_jk sin(jx) sin(ky)`.
    fn corner_sums(&self, q: &[Cx<T>], x: T) -> Vec<Cx<T>> {
        let s = self.idx.len();
        let mut f = vec![Cx::new(T::zero(), T::zero()); s * s];
        let mut acc: Vec<ComplexSum<T>> = vec![ComplexSum::new(); s];
        let mut a = 1;
        for j in 1..=self.cap {
            let sx = sin_product(T::idx(j), x);
            let qrow = &q[(j as usize - 1) * s..j as usize * s];
            for (sum, &qv) in acc.iter_mut().zip(qrow) {
                sum.add(qv * sx);
            }
            while a < s && self.idx[a] == j {
                for (b, sum) in acc.iter().enumerate() {
                    f[a * s + b] = sum.value();
                }
                a += 1;
            }
        }
        f
    }

    /// `best[a0][b0] = max_{a1 > a0, b1 > b0} |F(a1,b1) − F(a0,b1) − F(a1,b0) + F(a0,b0)|`.
    fn best_rectangles(&self, f: &[Cx<T>]) -> Vec<Corner<T>> {
        let s = self.idx.len();
        let none = Corner {
            value: T::neg_infinity(),
            a0: 0,
            b0: 0,
            a1: 0,
            b1: 0,
        };
        let mut best = vec![none; s * s];
        let mut h = vec![Cx::new(T::zero(), T::zero()); s];
        let mut suf_max = vec![(T::zero(), 0usize); s];
        let mut suf_min = vec![(T::zero(), 0usize); s];
        for b0 in 0..s - 1 {
            for b1 in b0 + 1..s {
                for a in 0..s {
                    h[a] = f[a * s + b1] - f[a * s + b0];
                }
                if self.real {
                    suf_max[s - 1] = (h[s - 1].re, s - 1);
                    suf_min[s - 1] = (h[s - 1].re, s - 1);
                    for a in (0..s - 1).rev() {
                        suf_max[a] = if h[a].re > suf_max[a + 1].0 { (h[a].re, a) } else { suf_max[a + 1] };
                        suf_min[a] = if h[a].re < suf_min[a + 1].0 { (h[a].re, a) } else { suf_min[a + 1] };
                    }
                }
                for a0 in 0..s - 1 {
                    let (value, a1) = if self.real {
                        let up = suf_max[a0 + 1].0 - h[a0].re;
                        let down = h[a0].re - suf_min[a0 + 1].0;
                        if up >= down {
                            (up, suf_max[a0 + 1].1)
                        } else {
                            (down, suf_min[a0 + 1].1)
                        }
                    } else {
                        let mut top = (T::neg_infinity(), a0 + 1);
                        for a1 in a0 + 1..s {
                            let v = (h[a1] - h[a0]).norm();
                            if v > top.0 {
                                top = (v, a1);
                            }
                        }
                        top
                    };
                    let slot = &mut best[a0 * s + b0];
                    if value > slot.value {
                        *slot = Corner { value, a0, b0, a1, b1 };
                    }
                }
            }
        }
        best
    }

    fn sups_at(&self, x: T, y: T, q: &[Cx<T>], thresholds: &[u64]) -> Vec<RemainderEntry<T>> {
        let f = self.corner_sums(q, x);
        let best = self.best_rectangles(&f);
        let s = self.idx.len();
        thresholds
            .iter()
            .map(|&t| {
                let mut top: Option<Corner<T>> = None;
                for a0 in 0..s - 1 {
                    for b0 in 0..s - 1 {
                        if self.idx[a0] + self.idx[b0] + 2 <= t {
                            continue;
                        }
                        let cand = best[a0 * s + b0];
                        if top.map_or(true, |c| cand.value > c.value) {
                            top = Some(cand);
                        }
                    }
                }
                let c = top.expect("cap exceeds every threshold");
                RemainderEntry {
                    threshold: t,
                    m: self.idx[c.a0] + 1,
                    n: self.idx[c.b0] + 1,
                    big_m: self.idx[c.a1],
                    big_n: self.idx[c.b1],
                    sup: c.value.max(T::zero()),
                    x,
                    y,
                }
            })
            .collect()
    }
}

fn check_thresholds(thresholds: &[u64], cap: u64) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::invalid("thresholds", "need at least one threshold"));
    }
    if thresholds.windows(2).any(|w| w[1] <= w[0]) || thresholds[0] == 0 {
        return Err(Error::invalid("thresholds", "must be positive and strictly increasing"));
    }
    if cap < 2 || cap > MAX_REMAINDER_CAP {
        return Err(Error::invalid("cap", format!("must lie in [2, {MAX_REMAINDER_CAP}], got {cap}")));
    }
    let last = *thresholds.last().expect("nonempty");
    if cap < last {
        return Err(Error::invalid("cap", format!("cap {cap} below the largest threshold {last}")));
    }
    Ok(())
}

fn profile_points<T: Real>(
    c: &DoubleSequenceRule<T>,
    xs: &[T],
    ys: &[T],
    thresholds: &[u64],
    cap: u64,
) -> Result<RemainderProfile<T>> {
    check_thresholds(thresholds, cap)?;
    let table = RemainderTable::build(c, cap);
    let per_y: Vec<Vec<Vec<RemainderEntry<T>>>> = ys
        .iter()
        .map(|&y| {
            let q = table.row_prefixes(y);
            xs.par_iter().map(|&x| table.sups_at(x, y, &q, thresholds)).collect()
        })
        .collect();
    let mut per_point = Vec::with_capacity(xs.len() * ys.len());
    let mut entries: Vec<Option<RemainderEntry<T>>> = vec![None; thresholds.len()];
    for (xi, &x) in xs.iter().enumerate() {
        for (yi, &y) in ys.iter().enumerate() {
            let point = &per_y[yi][xi];
            for (slot, e) in entries.iter_mut().zip(point) {
                if slot.map_or(true, |s| e.sup > s.sup) {
                    *slot = Some(*e);
                }
            }
            per_point.push(PointSups {
                x,
                y,
                sups: point.iter().map(|e| e.sup).collect(),
            });
        }
    }
    let entries: Vec<RemainderEntry<T>> = entries.into_iter().map(|e| e.expect("grid is nonempty")).collect();
    let sups: Vec<T> = entries.iter().map(|e| e.sup).collect();
    Ok(RemainderProfile {
        verdict: remainder_verdict(thresholds, &sups),
        entries,
        caps: (cap, cap),
        per_point,
    })
}

/// Largest rectangle sums over the grid for each threshold on `m + n`.
///
/// Upper corners `M, N <= cap` and lower corners are drawn from
/// [`remainder_indices`]; the reported sups are therefore lower bounds on the
/// exact suprema over all rectangles inside the cap.
pub fn regular_remainder_sup<T: Real>(
    c: &DoubleSequenceRule<T>,
    grid: &GridSpec<T>,
    thresholds: &[u64],
    cap: u64,
) -> Result<RemainderProfile<T>> {
    let xs = grid.abscissas();
    profile_points(c, &xs, &xs, thresholds, cap)
}

/// [`regular_remainder_sup`] at a single point.
pub fn point_remainder_sup<T: Real>(
    c: &DoubleSequenceRule<T>,
    x: T,
    y: T,
    thresholds: &[u64],
    cap: u64,
) -> Result<RemainderProfile<T>> {
    profile_points(c, &[x], &[y], thresholds, cap)
}

/// Outcome of the regular-convergence check at `(2 l1 π/r, 2 l2 π/r)`.
#[derive(Clone, Debug, PartialEq)]
pub enum RationalPointOutcome<T> {
    /// `r <= 2`: no such interior points exist.
    TriviallySatisfied,
    Evaluated(RemainderProfile<T>),
}

impl<T: Real> RationalPointOutcome<T> {
    pub fn verdict(&self) -> ConvergenceVerdict {
        match self {
            RationalPointOutcome::TriviallySatisfied => ConvergenceVerdict::Converging,
            RationalPointOutcome::Evaluated(p) => p.verdict,
        }
    }
}

/// Admissible `l` for step `r`: `1..=r/2 − 1` for even `r`, `1..=⌊r/2⌋` for odd `r`.
pub fn rational_point_range(r: u64) -> std::ops::RangeInclusive<u64> {
    if r % 2 == 0 {
        1..=(r / 2).saturating_sub(1)
    } else {
        1..=r / 2
    }
}

pub fn rational_point_regular_convergence<T: Real>(
    c: &DoubleSequenceRule<T>,
    r: u64,
    l1: u64,
    l2: u64,
    thresholds: &[u64],
    cap: u64,
) -> Result<RationalPointOutcome<T>> {
    if r == 0 {
        return Err(Error::invalid("r", "step must be >= 1"));
    }
    if r <= 2 {
        return Ok(RationalPointOutcome::TriviallySatisfied);
    }
    let range = rational_point_range(r);
    if !range.contains(&l1) || !range.contains(&l2) {
        return Err(Error::invalid(
            "l1,l2",
            format!("need values in {}..={} for r = {r}", range.start(), range.end()),
        ));
    }
    let at = |l: u64| T::lit(2.0) * T::idx(l) * T::PI() / T::idx(r);
    point_remainder_sup(c, at(l1), at(l2), thresholds, cap).map(RationalPointOutcome::Evaluated)
}

/// Index paths along which `m + n → ∞` is sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierSampling {
    /// Largest index sampled on any path.
    pub horizon: u64,
    /// Base points per doubling.
    pub steps_per_octave: u32,
    /// Consecutive indices taken at every base point (6 covers every residue mod 6).
    pub cluster: u64,
}

impl Default for FrontierSampling {
    fn default() -> Self {
        Self {
            horizon: 1 << 20,
            steps_per_octave: 4,
            cluster: 6,
        }
    }
}

impl FrontierSampling {
    /// Points on `m = n`, `m = 2n`, `n = 2m`, `(m, origin)` and `(origin, n)`,
    /// sorted by `m + n`.
    pub fn points(&self, origin: u64) -> Vec<(u64, u64)> {
        let mut bases = Vec::new();
        let mut i = 0u32;
        loop {
            let v = (origin as f64 * 2f64.powf(i as f64 / self.steps_per_octave as f64)).round() as u64;
            if v > self.horizon {
                break;
            }
            if bases.last() != Some(&v) {
                bases.push(v);
            }
            i += 1;
        }
        let mut pts = Vec::new();
        for &v in &bases {
            for d in 0..self.cluster {
                let u = v + d;
                pts.extend([(u, u), (2 * u, u), (u, 2 * u), (u, origin), (origin, u)]);
            }
        }
        pts.retain(|&(m, n)| m <= self.horizon && n <= self.horizon && m >= origin && n >= origin);
        pts.sort_by_key(|&(m, n)| (m + n, m));
        pts.dedup();
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecayVerdict {
    Decaying,
    NotDecaying,
    Inconclusive,
}

impl DecayVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            DecayVerdict::Decaying => "Decaying",
            DecayVerdict::NotDecaying => "NotDecaying",
            DecayVerdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySample<T> {
    pub m: u64,
    pub n: u64,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport<T> {
    pub samples: Vec<DecaySample<T>>,
    /// `(threshold, max of value over samples with m + n >= threshold)`.
    pub max_tail: Vec<(u64, T)>,
    /// Slope of `ln value` against `ln(m + n)` over positive samples.
    pub trend_fit: Option<T>,
    pub verdict: DecayVerdict,
}

/// Decaying when the last tail max is at most half the first, flat when it keeps 90%.
fn decay_report<T: Real, F: Fn(u64, u64) -> T + Sync>(
    thresholds: &[u64],
    sampling: &FrontierSampling,
    origin: u64,
    weight: F,
) -> Result<DecayReport<T>> {
    if thresholds.is_empty() {
        return Err(Error::invalid("thresholds", "need at least one threshold"));
    }
    if thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("thresholds", "must be strictly increasing"));
    }
    if sampling.horizon > MAX_HORIZON || *thresholds.last().expect("nonempty") > 2 * sampling.horizon {
        return Err(Error::invalid("horizon", "thresholds exceed the sampled frontier"));
    }
    let samples: Vec<DecaySample<T>> = sampling
        .points(origin)
        .par_iter()
        .map(|&(m, n)| DecaySample {
            m,
            n,
            value: weight(m, n),
        })
        .collect();
    let max_tail: Vec<(u64, T)> = thresholds
        .iter()
        .map(|&t| {
            let v = samples
                .iter()
                .filter(|s| s.m + s.n >= t)
                .map(|s| s.value)
                .fold(T::zero(), T::max);
            (t, v)
        })
        .collect();
    let pts: Vec<(T, T)> = samples
        .iter()
        .filter(|s| s.value > T::zero())
        .map(|s| (T::idx(s.m + s.n).ln(), s.value.ln()))
        .collect();
    let trend_fit = linear_fit(&pts).map(|f| f.0);
    let first = max_tail[0].1;
    let last = max_tail[max_tail.len() - 1].1;
    let verdict = if last == T::zero() || last <= T::lit(0.5) * first {
        DecayVerdict::Decaying
    } else if last >= T::lit(0.9) * first {
        DecayVerdict::NotDecaying
    } else {
        DecayVerdict::Inconclusive
    };
    Ok(DecayReport {
        samples,
        max_tail,
        trend_fit,
        verdict,
    })
}

/// Samples `jk |c_jk|` along the frontier paths from `(1, 1)`.
pub fn check_zak_sneider<T: Real>(c: &DoubleSequenceRule<T>, thresholds: &[u64]) -> Result<DecayReport<T>> {
    check_zak_sneider_with(c, thresholds, &FrontierSampling::default())
}

pub fn check_zak_sneider_with<T: Real>(
    c: &DoubleSequenceRule<T>,
    thresholds: &[u64],
    sampling: &FrontierSampling,
) -> Result<DecayReport<T>> {
    decay_report(thresholds, sampling, 1, |j, k| T::idx(j) * T::idx(k) * c.eval(j, k).norm())
}

/// Samples `mn ln m ln n |c_mn|` along the frontier paths from `(2, 2)`.
pub fn check_loglog_decay<T: Real>(c: &DoubleSequenceRule<T>, thresholds: &[u64]) -> Result<DecayReport<T>> {
    check_loglog_decay_with(c, thresholds, &FrontierSampling::default())
}

pub fn check_loglog_decay_with<T: Real>(
    c: &DoubleSequenceRule<T>,
    thresholds: &[u64],
    sampling: &FrontierSampling,
) -> Result<DecayReport<T>> {
    decay_report(thresholds, sampling, 2, |m, n| {
        let (mf, nf) = (T::idx(m), T::idx(n));
        mf * nf * mf.ln() * nf.ln() * c.eval(m, n).norm()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailStatus {
    /// `residual` bounds what truncation at the horizon can hide.
    Bounded,
    /// No decay envelope, a non-summable envelope, or a horizon before its peak.
    Inconclusive,
}

/// `sup_{j ∈ [m, horizon]} j ln j Σ_{k=n}^{horizon} |c_jk|` and its truncation residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailSup<T> {
    pub value: T,
    /// Index attaining the sup.
    pub argmax: u64,
    /// The untruncated sup lies in `[value, value + residual]`.
    pub residual: Option<T>,
    pub status: TailStatus,
}

/// Row form: `sup_{j >= m} j ln j Σ_{k >= n} |c_jk|`.
pub fn check_row_tail_sup<T: Real>(c: &DoubleSequenceRule<T>, m: u64, n: u64, horizon: u64) -> Result<TailSup<T>> {
    if m < 2 {
        return Err(Error::invalid("m", "need m >= 2"));
    }
    if n < 1 || horizon < m.max(n) || horizon > MAX_HORIZON {
        return Err(Error::invalid("horizon", format!("need max(m, n) <= horizon <= {MAX_HORIZON}")));
    }
    let weighted: Vec<(u64, T)> = (m..=horizon)
        .into_par_iter()
        .map(|j| {
            let tail = (n..=horizon).map(|k| c.eval(j, k).norm()).collect::<CompensatedSum<T>>().value();
            let jf = T::idx(j);
            (j, jf * jf.ln() * tail)
        })
        .collect();
    let (argmax, value) = weighted
        .iter()
        .copied()
        .fold((m, T::neg_infinity()), |best, (j, v)| if v > best.1 { (j, v) } else { best });
    let residual = c.decay().and_then(|env| {
        let peak = env.row_weighted_peak()?;
        if horizon + 1 < peak {
            return None;
        }
        let inner_tail = env.col_tail(horizon + 1)?;
        let full_tail = env.col_tail(n)?;
        let w = |j: u64| {
            let jf = T::idx(j);
            jf * jf.ln() * env.row_factor(j)
        };
        let inner = (m..=horizon).map(w).fold(T::zero(), T::max) * env.scale() * inner_tail;
        let outer = w(horizon + 1) * env.scale() * full_tail;
        Some(inner.max(outer))
    });
    Ok(TailSup {
        value: value.max(T::zero()),
        argmax,
        status: if residual.is_some() {
            TailStatus::Bounded
        } else {
            TailStatus::Inconclusive
        },
        residual,
    })
}

/// Column form: `sup_{k >= n} k ln k Σ_{j >= m} |c_jk|`.
pub fn check_col_tail_sup<T: Real>(c: &DoubleSequenceRule<T>, m: u64, n: u64, horizon: u64) -> Result<TailSup<T>> {
    check_row_tail_sup(&c.transposed(), n, m, horizon)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::invalid("p", "need p >= 1"));
    }
    Ok(())
}

fn check_horizon(m: u64, n: u64, r: u64, horizon: u64) -> Result<()> {
    if m < 1 || n < 1 || r < 1 {
        return Err(Error::invalid("m,n,r", "need m, n, r >= 1"));
    }
    if horizon < m.max(n) || horizon + r > MAX_HORIZON {
        return Err(Error::invalid("horizon", "need max(m, n) <= horizon and horizon + r <= 2^24"));
    }
    Ok(())
}

/// `(mn)^{1/p} Σ_{j=m}^{horizon} Σ_{k=n}^{horizon} |Δ_rr c_jk|`.
pub fn check_lemma4_tail<T: Real>(
    c: &DoubleSequenceRule<T>,
    p: T,
    r: u64,
    m: u64,
    n: u64,
    horizon: u64,
) -> Result<T> {
    check_p(p.to_f64().unwrap_or(f64::NAN))?;
    check_horizon(m, n, r, horizon)?;
    let rows: Vec<T> = (m..=horizon)
        .into_par_iter()
        .map(|j| (n..=horizon).map(|k| diff_rr(c, j, k, r).norm()).collect::<CompensatedSum<T>>().value())
        .collect();
    let total = rows.into_iter().collect::<CompensatedSum<T>>().value();
    Ok((T::idx(m) * T::idx(n)).powf(p.recip()) * total)
}

/// Row form: `m^{1/p} sup_{k ∈ [n, horizon]} k Σ_{j=m}^{horizon} |Δ_r0 c_jk|`.
pub fn check_lemma5_tail<T: Real>(
    c: &DoubleSequenceRule<T>,
    p: T,
    r: u64,
    m: u64,
    n: u64,
    horizon: u64,
) -> Result<T> {
    check_p(p.to_f64().unwrap_or(f64::NAN))?;
    check_horizon(m, n, r, horizon)?;
    let sup = (n..=horizon)
        .into_par_iter()
        .map(|k| {
            let s = (m..=horizon).map(|j| diff_r0(c, j, k, r).norm()).collect::<CompensatedSum<T>>().value();
            T::idx(k) * s
        })
        .reduce(T::zero, T::max);
    Ok(T::idx(m).powf(p.recip()) * sup)
}

/// Column form: `n^{1/p} sup_{j ∈ [m, horizon]} j Σ_{k=n}^{horizon} |Δ_0r c_jk|`.
pub fn check_lemma5_col_tail<T: Real>(
    c: &DoubleSequenceRule<T>,
    p: T,
    r: u64,
    m: u64,
    n: u64,
    horizon: u64,
) -> Result<T> {
    check_p(p.to_f64().unwrap_or(f64::NAN))?;
    check_horizon(m, n, r, horizon)?;
    let sup = (m..=horizon)
        .into_par_iter()
        .map(|j| {
            let s = (n..=horizon).map(|k| diff_0r(c, j, k, r).norm()).collect::<CompensatedSum<T>>().value();
            T::idx(j) * s
        })
        .reduce(T::zero, T::max);
    Ok(T::idx(n).powf(p.recip()) * sup)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogIntegral<T> {
    /// `ln ln(n + N) − ln ln(n + N^{1/p})`.
    pub value: T,
    /// `ln p`.
    pub bound: T,
    pub holds: bool,
}

/// `∫_{n+N^{1/p}}^{n+N} dk / (k ln k)` in closed form, next to its bound `ln p`.
pub fn log_integral_bound<T: Real>(n: u64, big_n: u64, p: T) -> Result<LogIntegral<T>> {
    if n < 1 || big_n < 1 {
        return Err(Error::invalid("n,N", "need n, N >= 1"));
    }
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::invalid("p", "need p >= 1"));
    }
    let nf = T::idx(n);
    let upper = (nf + T::idx(big_n)).ln().ln();
    let lower = (nf + T::idx(big_n).powf(p.recip())).ln().ln();
    let value = upper - lower;
    let bound = p.ln();
    Ok(LogIntegral {
        value,
        bound,
        holds: value <= bound + T::lit(1e-12),
    })
}
