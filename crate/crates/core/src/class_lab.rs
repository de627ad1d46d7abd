//! Right-hand-side bound families of the general-monotone class hierarchy and
//! finite membership evidence for double sequences.
//!
//! A class is described by three inequalities, one per difference direction:
//!
//! ```text
//! (Σ_{j=m}^{2m−1} |Δ_{r0} c_jn|^p)^{1/p}              <= C · row_bound(m, n)
//! (Σ_{k=n}^{2n−1} |Δ_{0r} c_mk|^p)^{1/p}              <= C · col_bound(m, n)
//! (Σ_{j=m}^{2m−1} Σ_{k=n}^{2n−1} |Δ_{rr} c_jk|^p)^{1/p} <= C · mixed_bound(m, n)
//! ```
//!
//! [`BoundFamily`] selects the shape of the right-hand sides: mean-value windows
//! `[⌊m/λ⌋, ⌊λm⌋]`, a maximum over windows `b(m) <= M <= λ b(m)`, or a supremum
//! over `M >= b(m)`. The max-window and sup-window families both bound the mixed
//! difference by a supremum over the frontier `M + N >= b(m + n)`.
//!
//! Suprema over unbounded index sets are truncated at `horizon_cap`; a maximizer
//! sitting on the cap is reported as truncated and degrades the verdict.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{linear_fit, Real};
use crate::sequence::{
    col_block_p_norm, diff_0r, diff_r0, diff_rr, double_block_p_norm, lp_norm, row_block_p_norm,
    DoubleSequenceRule, MAX_HORIZON,
};
use crate::sum::CompensatedSum;

/// Slope above which a fitted ratio trend counts as unbounded growth.
pub const GROWTH_SLOPE_THRESHOLD: f64 = 0.05;
/// Minimum span, in octaves of the block start, for a trend fit to be trusted.
pub const MIN_FIT_OCTAVES: f64 = 6.0;
/// Minimum correlation of the trend fit for a violation verdict.
pub const MIN_FIT_CORRELATION: f64 = 0.9;
/// Relative slack used by the block-wise inclusion checks.
pub const INCLUSION_RTOL: f64 = 1e-12;
/// Largest frontier table side the scanner will allocate.
pub const MAX_FRONTIER_EXTENT: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundFamily {
    /// Windows `[⌊m/λ⌋, ⌊λm⌋]`, scaled by `1/m`.
    MeanValue,
    /// `max_{b(m) <= M <= λ b(m)} Σ_{j=M}^{2M}`, scaled by `1/m`.
    MaxWindow,
    /// `sup_{M >= b(m)} Σ_{j=M}^{2M}`, scaled by `1/m`.
    SupWindow,
}

impl BoundFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BoundFamily::MeanValue => "mean-value",
            BoundFamily::MaxWindow => "max-window",
            BoundFamily::SupWindow => "sup-window",
        }
    }

    fn min_lambda(&self) -> u64 {
        match self {
            BoundFamily::MeanValue | BoundFamily::MaxWindow => 2,
            BoundFamily::SupWindow => 1,
        }
    }
}

impl std::str::FromStr for BoundFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-value" | "mean" | "mvbvds" => Ok(BoundFamily::MeanValue),
            "max-window" | "max" | "sbvds1" => Ok(BoundFamily::MaxWindow),
            "sup-window" | "sup" | "sbvds2" => Ok(BoundFamily::SupWindow),
            other => Err(Error::invalid("family", format!("unknown bound family `{other}`"))),
        }
    }
}

/// Which right-hand-side family to evaluate, with `λ`, `b(l)` and the truncation cap.
#[derive(Clone)]
pub struct BoundSpec<T> {
    family: BoundFamily,
    lambda: u64,
    b: Arc<dyn Fn(u64) -> T + Send + Sync>,
    b_label: String,
    horizon_cap: u64,
}

impl<T: Real> BoundSpec<T> {
    /// Spec with the default `b(l) = max(1, ⌊l/λ⌋)`.
    pub fn new(family: BoundFamily, lambda: u64, horizon_cap: u64) -> Result<Self> {
        let lam = lambda.max(1);
        let spec = Self {
            family,
            lambda,
            b: Arc::new(move |l| T::idx((l / lam).max(1))),
            b_label: "max(1,floor(l/lambda))".into(),
            horizon_cap,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_b<F>(mut self, label: impl Into<String>, b: F) -> Result<Self>
    where
        F: Fn(u64) -> T + Send + Sync + 'static,
    {
        self.b = Arc::new(b);
        self.b_label = label.into();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let min = self.family.min_lambda();
        if self.lambda < min {
            return Err(Error::invalid(
                "lambda",
                format!("{} requires lambda >= {min}, got {}", self.family.name(), self.lambda),
            ));
        }
        if self.horizon_cap < 2 || self.horizon_cap > MAX_HORIZON / 2 {
            return Err(Error::invalid(
                "horizon_cap",
                format!("must lie in [2, {}], got {}", MAX_HORIZON / 2, self.horizon_cap),
            ));
        }
        let mut prev = T::zero();
        for l in 1..=self.horizon_cap {
            let v = (self.b)(l);
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid("b", format!("b({l}) must be positive and finite")));
            }
            if self.family == BoundFamily::SupWindow && v < prev {
                return Err(Error::invalid("b", format!("b must be nondecreasing, b({l}) < b({})", l - 1)));
            }
            prev = v;
        }
        if !((self.b)(self.horizon_cap) > (self.b)(1)) {
            return Err(Error::invalid("b", "b(horizon_cap) must exceed b(1)"));
        }
        Ok(())
    }

    pub fn family(&self) -> BoundFamily {
        self.family
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn horizon_cap(&self) -> u64 {
        self.horizon_cap
    }

    pub fn b_label(&self) -> &str {
        &self.b_label
    }

    pub fn b(&self, l: u64) -> T {
        (self.b)(l)
    }

    fn b_floor_index(&self, l: u64) -> u64 {
        self.b(l).ceil().to_u64().unwrap_or(u64::MAX).max(1)
    }

    fn b_ceil_index(&self, l: u64) -> u64 {
        (T::idx(self.lambda) * self.b(l)).floor().to_u64().unwrap_or(u64::MAX)
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for BoundSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundSpec")
            .field("family", &self.family)
            .field("lambda", &self.lambda)
            .field("b", &self.b_label)
            .field("horizon_cap", &self.horizon_cap)
            .finish()
    }
}

/// How trustworthy an evaluated right-hand side is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundStatus {
    Exact,
    /// The supremum's maximizer sits on `horizon_cap`.
    Truncated,
    /// `horizon_cap` lies below the window start `b(·)`; no window was searched.
    Inconclusive,
}

/// Evaluated right-hand side (without the constant `C`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhsBound<T> {
    pub value: T,
    /// Window start(s) attaining the max/sup; `None` for mean-value windows.
    pub maximizer: Option<(u64, u64)>,
    pub status: BoundStatus,
}

/// Difference direction of one class inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Row,
    Column,
    Mixed,
}

impl Component {
    pub fn name(&self) -> &'static str {
        match self {
            Component::Row => "row",
            Component::Column => "column",
            Component::Mixed => "mixed",
        }
    }
}

fn floor_div(m: u64, lambda: u64) -> u64 {
    (m / lambda).max(1)
}

fn sum_abs_line<T: Real, F: Fn(u64) -> T>(from: u64, to: u64, f: F) -> T {
    (from..=to).map(f).collect::<CompensatedSum<T>>().value()
}

/// Suffix sums of `|v_i|` for `i` in `[1, extent]`, answering window sums in O(1).
struct LineSums<T> {
    suffix: Vec<T>,
}

impl<T: Real> LineSums<T> {
    fn build<F: Fn(u64) -> T>(extent: u64, abs: F) -> Self {
        let mut suffix = vec![T::zero(); extent as usize + 2];
        let mut acc = CompensatedSum::new();
        for i in (1..=extent).rev() {
            acc.add(abs(i));
            suffix[i as usize] = acc.value();
        }
        Self { suffix }
    }

    fn window(&self, from: u64, to: u64) -> T {
        self.suffix[from as usize] - self.suffix[to as usize + 1]
    }
}

/// Row/column window maximum shared by the row and column bounds.
///
/// `abs(i)` yields `|c|` along the varying index; `start` is the block start.
fn line_bound<T: Real, F: Fn(u64) -> T + Sync>(
    spec: &BoundSpec<T>,
    start: u64,
    abs: F,
) -> RhsBound<T> {
    let scale = T::one() / T::idx(start);
    match spec.family {
        BoundFamily::MeanValue => {
            let lo = floor_div(start, spec.lambda);
            let hi = start * spec.lambda;
            RhsBound {
                value: scale * sum_abs_line(lo, hi, &abs),
                maximizer: None,
                status: BoundStatus::Exact,
            }
        }
        BoundFamily::MaxWindow | BoundFamily::SupWindow => {
            let lo = spec.b_floor_index(start);
            let (hi, capped) = if spec.family == BoundFamily::MaxWindow {
                (spec.b_ceil_index(start).max(lo), false)
            } else {
                (spec.horizon_cap, true)
            };
            if lo > hi {
                return RhsBound {
                    value: T::zero(),
                    maximizer: None,
                    status: BoundStatus::Inconclusive,
                };
            }
            let sums = LineSums::build(2 * hi, &abs);
            let mut best = T::neg_infinity();
            let mut arg = lo;
            for w in lo..=hi {
                let v = sums.window(w, 2 * w);
                if v > best {
                    best = v;
                    arg = w;
                }
            }
            let status = if capped && arg == hi {
                BoundStatus::Truncated
            } else {
                BoundStatus::Exact
            };
            RhsBound {
                value: scale * best.max(T::zero()),
                maximizer: Some((arg, arg)),
                status,
            }
        }
    }
}

/// Suffix table `S(j, k) = Σ_{j' >= j, k' >= k} |c_{j'k'}|` on `[1, extent]²`.
pub struct FrontierTable<T> {
    extent: u64,
    stride: usize,
    data: Vec<T>,
}

impl<T: Real> FrontierTable<T> {
    pub fn build(c: &DoubleSequenceRule<T>, extent: u64) -> Result<Self> {
        if extent > MAX_FRONTIER_EXTENT * 2 + 1 {
            return Err(Error::invalid(
                "horizon_cap",
                format!("frontier table side {extent} exceeds {}", MAX_FRONTIER_EXTENT * 2 + 1),
            ));
        }
        let stride = extent as usize + 2;
        let mut data = vec![T::zero(); stride * stride];
        // Row suffixes, one row per task.
        data.par_chunks_mut(stride)
            .enumerate()
            .skip(1)
            .take(extent as usize)
            .for_each(|(j, row)| {
                let mut acc = CompensatedSum::new();
                for k in (1..=extent as usize).rev() {
                    acc.add(c.eval(j as u64, k as u64).norm());
                    row[k] = acc.value();
                }
            });
        for j in (1..extent as usize).rev() {
            let (head, tail) = data.split_at_mut((j + 1) * stride);
            let below = &tail[..stride];
            let row = &mut head[j * stride..];
            for k in 1..=extent as usize {
                row[k] = row[k] + below[k];
            }
        }
        Ok(Self {
            extent,
            stride,
            data,
        })
    }

    pub fn extent(&self) -> u64 {
        self.extent
    }

    #[inline]
    fn at(&self, j: u64, k: u64) -> T {
        self.data[j as usize * self.stride + k as usize]
    }

    /// `Σ_{j=j0}^{j1} Σ_{k=k0}^{k1} |c_jk|` for ranges inside the table.
    #[inline]
    pub fn window(&self, j0: u64, j1: u64, k0: u64, k1: u64) -> T {
        debug_assert!(j1 <= self.extent && k1 <= self.extent);
        let v = self.at(j0, k0) - self.at(j1 + 1, k0) - self.at(j0, k1 + 1) + self.at(j1 + 1, k1 + 1);
        v.max(T::zero())
    }

    /// `sup_{M+N >= threshold, 1 <= M,N <= cap} Σ_{j=M}^{2M} Σ_{k=N}^{2N} |c_jk|`.
    fn frontier_sup(&self, threshold: u64, cap: u64) -> RhsBound<T> {
        assert!(2 * cap <= self.extent, "frontier table too small for cap");
        if threshold > 2 * cap {
            return RhsBound {
                value: T::zero(),
                maximizer: None,
                status: BoundStatus::Inconclusive,
            };
        }
        let mut best = T::neg_infinity();
        let mut arg = (0, 0);
        for big_m in 1..=cap {
            let n_lo = threshold.saturating_sub(big_m).max(1);
            for big_n in n_lo..=cap {
                let v = self.window(big_m, 2 * big_m, big_n, 2 * big_n);
                if v > best {
                    best = v;
                    arg = (big_m, big_n);
                }
            }
        }
        let status = if arg.0 == cap || arg.1 == cap {
            BoundStatus::Truncated
        } else {
            BoundStatus::Exact
        };
        RhsBound {
            value: best.max(T::zero()),
            maximizer: Some(arg),
            status,
        }
    }
}

fn check_row_pre<T: Real>(spec: &BoundSpec<T>, m: u64, n: u64) -> Result<()> {
    if spec.family != BoundFamily::SupWindow && m < spec.lambda {
        return Err(Error::invalid("m", format!("need m >= lambda = {}, got {m}", spec.lambda)));
    }
    if m < 1 || n < 1 {
        return Err(Error::invalid("m,n", "indices start at 1"));
    }
    Ok(())
}

/// Row bound at `(m, n)`: window sums of `|c_jn|` over `j`, times `1/m`.
pub fn rhs_row_bound<T: Real>(
    c: &DoubleSequenceRule<T>,
    m: u64,
    n: u64,
    spec: &BoundSpec<T>,
) -> Result<RhsBound<T>> {
    check_row_pre(spec, m, n)?;
    Ok(line_bound(spec, m, |j| c.eval(j, n).norm()))
}

/// Column bound at `(m, n)`: window sums of `|c_mk|` over `k`, times `1/n`.
pub fn rhs_col_bound<T: Real>(
    c: &DoubleSequenceRule<T>,
    m: u64,
    n: u64,
    spec: &BoundSpec<T>,
) -> Result<RhsBound<T>> {
    check_row_pre(spec, n, m)?;
    let mut b = line_bound(spec, n, |k| c.eval(m, k).norm());
    b.maximizer = b.maximizer.map(|(w, _)| (w, w));
    Ok(b)
}

fn mixed_bound_with<T: Real>(
    c: &DoubleSequenceRule<T>,
    m: u64,
    n: u64,
    spec: &BoundSpec<T>,
    table: impl FnOnce() -> Result<Arc<FrontierTable<T>>>,
) -> Result<RhsBound<T>> {
    if spec.family != BoundFamily::SupWindow && (m < spec.lambda || n < spec.lambda) {
        return Err(Error::invalid(
            "m,n",
            format!("need m,n >= lambda = {}, got ({m}, {n})", spec.lambda),
        ));
    }
    if m < 1 || n < 1 {
        return Err(Error::invalid("m,n", "indices start at 1"));
    }
    let scale = T::one() / (T::idx(m) * T::idx(n));
    match spec.family {
        BoundFamily::MeanValue => {
            let (j0, j1) = (floor_div(m, spec.lambda), m * spec.lambda);
            let (k0, k1) = (floor_div(n, spec.lambda), n * spec.lambda);
            let mut acc = CompensatedSum::new();
            for j in j0..=j1 {
                for k in k0..=k1 {
                    acc.add(c.eval(j, k).norm());
                }
            }
            Ok(RhsBound {
                value: scale * acc.value(),
                maximizer: None,
                status: BoundStatus::Exact,
            })
        }
        BoundFamily::MaxWindow | BoundFamily::SupWindow => {
            let threshold = spec.b_floor_index(m + n);
            if threshold > 2 * spec.horizon_cap {
                return Ok(RhsBound {
                    value: T::zero(),
                    maximizer: None,
                    status: BoundStatus::Inconclusive,
                });
            }
            let table = table()?;
            let mut b = table.frontier_sup(threshold, spec.horizon_cap);
            b.value = b.value * scale;
            Ok(b)
        }
    }
}

/// Mixed bound at `(m, n)`: double window sums, times `1/(mn)`.
///
/// Builds a frontier table of side `2·horizon_cap + 1` per call for the
/// max/sup families; use [`MembershipScanner`] for repeated queries.
pub fn rhs_mixed_bound<T: Real>(
    c: &DoubleSequenceRule<T>,
    m: u64,
    n: u64,
    spec: &BoundSpec<T>,
) -> Result<RhsBound<T>> {
    mixed_bound_with(c, m, n, spec, || {
        FrontierTable::build(c, 2 * spec.horizon_cap + 1).map(Arc::new)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Consistent => "Consistent",
            Verdict::Violated => "Violated",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

/// One class inequality evaluated on one block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockEvidence<T> {
    pub m: u64,
    pub n: u64,
    pub component: Component,
    pub lhs: T,
    pub rhs: T,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<T>,
    pub status: BoundStatus,
    pub maximizer: Option<(u64, u64)>,
}

/// Least-squares trend of `ln ratio` against `ln start` for one component.
///
/// The start is `m` for rows, `n` for columns and `m·n` for the mixed inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentFit<T> {
    pub component: Component,
    pub slope: T,
    pub correlation: T,
    pub octaves: T,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport<T> {
    pub per_block: Vec<BlockEvidence<T>>,
    /// Largest finite ratio: a measured lower bound on the class constant.
    pub c_estimate: T,
    pub verdict: Verdict,
    /// Largest trusted slope over components, if any component spans enough octaves.
    pub growth_fit: Option<T>,
    pub fits: Vec<ComponentFit<T>>,
}

impl<T: Real> MembershipReport<T> {
    pub fn fit(&self, component: Component) -> Option<&ComponentFit<T>> {
        self.fits.iter().find(|f| f.component == component)
    }
}

fn fit_component<T: Real>(rows: &[BlockEvidence<T>], component: Component) -> Option<ComponentFit<T>> {
    let pts: Vec<(T, T)> = rows
        .iter()
        .filter(|e| e.component == component)
        .filter_map(|e| {
            let ratio = e.ratio?;
            if !(ratio > T::zero()) || !ratio.is_finite() {
                return None;
            }
            let start = match component {
                Component::Row => T::idx(e.m),
                Component::Column => T::idx(e.n),
                Component::Mixed => T::idx(e.m) * T::idx(e.n),
            };
            Some((start.ln(), ratio.ln()))
        })
        .collect();
    let (lo, hi) = pts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
        (lo.min(p.0), hi.max(p.0))
    });
    let (slope, _, correlation) = linear_fit(&pts)?;
    Some(ComponentFit {
        component,
        slope,
        correlation,
        octaves: (hi - lo) / T::LN_2(),
        points: pts.len(),
    })
}

fn summarize<T: Real>(per_block: Vec<BlockEvidence<T>>) -> MembershipReport<T> {
    let c_estimate = per_block
        .iter()
        .filter_map(|e| e.ratio)
        .fold(T::zero(), T::max);
    let fits: Vec<ComponentFit<T>> = [Component::Row, Component::Column, Component::Mixed]
        .into_iter()
        .filter_map(|comp| fit_component(&per_block, comp))
        .collect();
    let trusted: Vec<&ComponentFit<T>> = fits
        .iter()
        .filter(|f| f.octaves >= T::lit(MIN_FIT_OCTAVES))
        .collect();
    let growth_fit = trusted.iter().map(|f| f.slope).reduce(T::max);
    let grows = trusted.iter().any(|f| {
        f.slope > T::lit(GROWTH_SLOPE_THRESHOLD) && f.correlation >= T::lit(MIN_FIT_CORRELATION)
    });
    let zero_rhs = per_block
        .iter()
        .any(|e| e.rhs == T::zero() && e.lhs > T::zero() && e.status == BoundStatus::Exact);
    let uncertain = per_block.iter().any(|e| e.status != BoundStatus::Exact);
    let verdict = if zero_rhs || grows {
        Verdict::Violated
    } else if uncertain {
        Verdict::Inconclusive
    } else {
        Verdict::Consistent
    };
    MembershipReport {
        per_block,
        c_estimate,
        verdict,
        growth_fit,
        fits,
    }
}

/// Reusable membership scanner for one sequence and one bound specification.
///
/// The frontier table for the mixed supremum is built on first use and shared
/// by every later scan.
pub struct MembershipScanner<T> {
    c: DoubleSequenceRule<T>,
    spec: BoundSpec<T>,
    table: OnceLock<Arc<FrontierTable<T>>>,
}

impl<T: Real> MembershipScanner<T> {
    pub fn new(c: DoubleSequenceRule<T>, spec: BoundSpec<T>) -> Self {
        Self {
            c,
            spec,
            table: OnceLock::new(),
        }
    }

    pub fn spec(&self) -> &BoundSpec<T> {
        &self.spec
    }

    fn frontier(&self) -> Result<Arc<FrontierTable<T>>> {
        if let Some(t) = self.table.get() {
            return Ok(t.clone());
        }
        let t = Arc::new(FrontierTable::build(&self.c, 2 * self.spec.horizon_cap + 1)?);
        Ok(self.table.get_or_init(|| t).clone())
    }

    pub fn rhs_row(&self, m: u64, n: u64) -> Result<RhsBound<T>> {
        rhs_row_bound(&self.c, m, n, &self.spec)
    }

    pub fn rhs_col(&self, m: u64, n: u64) -> Result<RhsBound<T>> {
        rhs_col_bound(&self.c, m, n, &self.spec)
    }

    pub fn rhs_mixed(&self, m: u64, n: u64) -> Result<RhsBound<T>> {
        mixed_bound_with(&self.c, m, n, &self.spec, || self.frontier())
    }

    fn check_blocks(&self, blocks: &[(u64, u64)]) -> Result<()> {
        if blocks.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        let min = self.spec.lambda.max(1);
        for &(m, n) in blocks {
            if m < min || n < min {
                return Err(Error::invalid(
                    "blocks",
                    format!("block ({m}, {n}) lies below lambda = {}", self.spec.lambda),
                ));
            }
            if 2 * m.max(n) + self.spec.lambda * m.max(n) > MAX_HORIZON {
                return Err(Error::invalid("blocks", format!("block ({m}, {n}) exceeds horizon cap")));
            }
        }
        Ok(())
    }

    /// Evaluates the three class inequalities with exponent `p` and step `r` on every block.
    pub fn scan(&self, p: T, r: u64, blocks: &[(u64, u64)]) -> Result<MembershipReport<T>> {
        if !(p > T::zero()) {
            return Err(Error::invalid("p", "exponent must be positive"));
        }
        if r == 0 {
            return Err(Error::invalid("r", "step must be >= 1"));
        }
        self.check_blocks(blocks)?;
        if self.spec.family != BoundFamily::MeanValue {
            self.frontier()?;
        }
        let rows: Result<Vec<[BlockEvidence<T>; 3]>> = blocks
            .par_iter()
            .map(|&(m, n)| {
                let ev = |component, lhs: T, b: RhsBound<T>| BlockEvidence {
                    m,
                    n,
                    component,
                    lhs,
                    rhs: b.value,
                    ratio: (b.value > T::zero()).then(|| lhs / b.value),
                    status: b.status,
                    maximizer: b.maximizer,
                };
                Ok([
                    ev(Component::Row, row_block_p_norm(&self.c, m, n, p, r), self.rhs_row(m, n)?),
                    ev(Component::Column, col_block_p_norm(&self.c, m, n, p, r), self.rhs_col(m, n)?),
                    ev(Component::Mixed, double_block_p_norm(&self.c, m, n, p, r), self.rhs_mixed(m, n)?),
                ])
            })
            .collect();
        Ok(summarize(rows?.into_iter().flatten().collect()))
    }
}

/// One-shot membership evidence; see [`MembershipScanner::scan`].
pub fn membership_scan<T: Real>(
    c: &DoubleSequenceRule<T>,
    p: T,
    r: u64,
    spec: &BoundSpec<T>,
    blocks: &[(u64, u64)],
) -> Result<MembershipReport<T>> {
    MembershipScanner::new(c.clone(), spec.clone()).scan(p, r, blocks)
}

/// Left-hand sides compared block by block for an inclusion check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InclusionRow<T> {
    pub m: u64,
    pub n: u64,
    pub component: Component,
    /// Quantity that must not exceed `upper`.
    pub lower: T,
    pub upper: T,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InclusionReport<T> {
    pub rows: Vec<InclusionRow<T>>,
    pub violations: Vec<InclusionRow<T>>,
    pub holds: bool,
}

fn inclusion_report<T: Real>(rows: Vec<InclusionRow<T>>) -> InclusionReport<T> {
    let violations: Vec<_> = rows.iter().filter(|r| !r.holds).copied().collect();
    InclusionReport {
        holds: violations.is_empty(),
        rows,
        violations,
    }
}

fn within<T: Real>(lower: T, upper: T) -> bool {
    lower <= upper * (T::one() + T::lit(INCLUSION_RTOL))
}

/// Block-wise check that every `p2` block norm is at most the `p1` block norm (`p1 <= p2`).
pub fn embedding_check<T: Real>(
    c: &DoubleSequenceRule<T>,
    r: u64,
    p1: T,
    p2: T,
    blocks: &[(u64, u64)],
) -> Result<InclusionReport<T>> {
    if !(p1 > T::zero() && p1 <= p2) {
        return Err(Error::invalid("p1,p2", "need 0 < p1 <= p2"));
    }
    if blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let rows: Vec<InclusionRow<T>> = blocks
        .par_iter()
        .flat_map_iter(|&(m, n)| {
            let pairs = [
                (Component::Row, row_block_p_norm(c, m, n, p2, r), row_block_p_norm(c, m, n, p1, r)),
                (Component::Column, col_block_p_norm(c, m, n, p2, r), col_block_p_norm(c, m, n, p1, r)),
                (Component::Mixed, double_block_p_norm(c, m, n, p2, r), double_block_p_norm(c, m, n, p1, r)),
            ];
            pairs.into_iter().map(move |(component, lower, upper)| InclusionRow {
                m,
                n,
                component,
                lower,
                upper,
                holds: within(lower, upper),
            })
        })
        .collect();
    Ok(inclusion_report(rows))
}

fn line_norm<T: Real, F: Fn(u64) -> T>(from: u64, len: u64, p: T, f: F) -> T {
    let mags: Vec<T> = (from..from + len).map(f).collect();
    lp_norm(&mags, p)
}

/// Block-wise triangle-inequality chain behind the step inclusion for `r1 | r2`:
/// the step-`r2` block norm is at most the sum of the `q = r2/r1` shifted step-`r1`
/// block norms (`q²` shifts for the mixed difference).
pub fn divisor_embedding_check<T: Real>(
    c: &DoubleSequenceRule<T>,
    p: T,
    r1: u64,
    r2: u64,
    blocks: &[(u64, u64)],
) -> Result<InclusionReport<T>> {
    if r1 == 0 || r2 == 0 || r2 % r1 != 0 {
        return Err(Error::NotDivisible { r1, r2 });
    }
    if !(p >= T::one()) {
        return Err(Error::invalid("p", "the step inclusion needs p >= 1"));
    }
    if blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let q = r2 / r1;
    let rows: Vec<InclusionRow<T>> = blocks
        .par_iter()
        .flat_map_iter(|&(m, n)| {
            let row_lhs = row_block_p_norm(c, m, n, p, r2);
            let row_rhs = (0..q)
                .map(|i| line_norm(m, m, p, |j| diff_r0(c, j + i * r1, n, r1).norm()))
                .collect::<CompensatedSum<T>>()
                .value();
            let col_lhs = col_block_p_norm(c, m, n, p, r2);
            let col_rhs = (0..q)
                .map(|i| line_norm(n, n, p, |k| diff_0r(c, m, k + i * r1, r1).norm()))
                .collect::<CompensatedSum<T>>()
                .value();
            let mixed_lhs = double_block_p_norm(c, m, n, p, r2);
            let mut mixed_rhs = CompensatedSum::new();
            for i in 0..q {
                for i2 in 0..q {
                    let mut mags = Vec::with_capacity((m * n) as usize);
                    for j in m..2 * m {
                        for k in n..2 * n {
                            mags.push(diff_rr(c, j + i * r1, k + i2 * r1, r1).norm());
                        }
                    }
                    mixed_rhs.add(lp_norm(&mags, p));
                }
            }
            [
                (Component::Row, row_lhs, row_rhs),
                (Component::Column, col_lhs, col_rhs),
                (Component::Mixed, mixed_lhs, mixed_rhs.value()),
            ]
            .into_iter()
            .map(move |(component, lower, upper)| InclusionRow {
                m,
                n,
                component,
                lower,
                upper,
                holds: within(lower, upper),
            })
        })
        .collect();
    Ok(inclusion_report(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Cx;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geo() -> DoubleSequenceRule<f64> {
        DoubleSequenceRule::real("2^-j-k", |j, k| 0.5f64.powi((j + k) as i32))
    }

    fn random_table(seed: u64, size: u64) -> DoubleSequenceRule<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..size * size)
            .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        DoubleSequenceRule::from_table("rand", size, size, vals)
    }

    fn spec(family: BoundFamily, lambda: u64, cap: u64) -> BoundSpec<f64> {
        BoundSpec::new(family, lambda, cap).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(BoundSpec::<f64>::new(BoundFamily::MeanValue, 1, 64).is_err());
        assert!(BoundSpec::<f64>::new(BoundFamily::SupWindow, 1, 64).is_ok());
        let s = spec(BoundFamily::SupWindow, 1, 64);
        assert!(s.clone().with_b("decreasing", |l| 100.0 / l as f64).is_err());
        assert!(s.clone().with_b("flat", |_| 3.0).is_err());
        assert!(s.with_b("sqrt", |l| (l as f64).sqrt()).is_ok());
        assert_eq!(spec(BoundFamily::MaxWindow, 2, 64).b(9), 4.0);
        assert_eq!("sup".parse::<BoundFamily>().unwrap(), BoundFamily::SupWindow);
        assert!("nope".parse::<BoundFamily>().is_err());
    }

    #[test]
    fn zero_sequence_bounds_vanish() {
        let z = DoubleSequenceRule::<f64>::zero();
        for family in [BoundFamily::MeanValue, BoundFamily::MaxWindow, BoundFamily::SupWindow] {
            let s = spec(family, 2, 32);
            assert_eq!(rhs_row_bound(&z, 4, 3, &s).unwrap().value, 0.0);
            assert_eq!(rhs_col_bound(&z, 3, 4, &s).unwrap().value, 0.0);
            assert_eq!(rhs_mixed_bound(&z, 4, 4, &s).unwrap().value, 0.0);
        }
    }

    #[test]
    fn mean_value_row_direct_loop() {
        let c = DoubleSequenceRule::<f64>::real("2^-j", |j, _| 0.5f64.powi(j as i32));
        let got = rhs_row_bound(&c, 4, 1, &spec(BoundFamily::MeanValue, 2, 32)).unwrap();
        let mut oracle = 0.0;
        for j in 2..=8 {
            oracle += 0.5f64.powi(j);
        }
        oracle /= 4.0;
        assert!((got.value - oracle).abs() <= 1e-14 * oracle);
    }

    #[test]
    fn sup_window_row_maximizer_scan() {
        let c = DoubleSequenceRule::<f64>::real("1/j^2", |j, _| 1.0 / (j * j) as f64);
        let s = spec(BoundFamily::SupWindow, 1, 64).with_b("l", |l| l as f64).unwrap();
        let got = rhs_row_bound(&c, 8, 1, &s).unwrap();
        // Scan M in [8, 64] and confirm windows decrease so M = 8 wins.
        let window = |big_m: u64| (big_m..=2 * big_m).map(|j| 1.0 / (j * j) as f64).sum::<f64>();
        let mut prev = f64::INFINITY;
        for big_m in 8..=64 {
            let w = window(big_m);
            assert!(w < prev);
            prev = w;
        }
        assert_eq!(got.maximizer, Some((8, 8)));
        assert_eq!(got.status, BoundStatus::Exact);
        assert!((got.value - window(8) / 8.0).abs() <= 1e-14);
    }

    #[test]
    fn max_window_col_scan() {
        let c = DoubleSequenceRule::<f64>::real("2^-k", |_, k| 0.5f64.powi(k as i32));
        let s = spec(BoundFamily::MaxWindow, 2, 64).with_b("l", |l| l as f64).unwrap();
        let got = rhs_col_bound(&c, 1, 4, &s).unwrap();
        let window = |big_n: u64| (big_n..=2 * big_n).map(|k| 0.5f64.powi(k as i32)).sum::<f64>();
        let (arg, best) = (4..=8).map(|nn| (nn, window(nn))).fold((0, 0.0), |acc, x| {
            if x.1 > acc.1 { x } else { acc }
        });
        assert_eq!(arg, 4);
        assert_eq!(got.maximizer.unwrap().0, 4);
        assert!((got.value - best / 4.0).abs() <= 1e-14 * best);
    }

    #[test]
    fn symmetric_rule_row_col_swap() {
        let c = DoubleSequenceRule::<f64>::real("1/(j+k)^2", |j, k| 1.0 / ((j + k) * (j + k)) as f64);
        for family in [BoundFamily::MeanValue, BoundFamily::MaxWindow, BoundFamily::SupWindow] {
            let s = spec(family, 2, 40);
            for (m, n) in [(2, 5), (7, 3), (4, 4)] {
                let col = rhs_col_bound(&c, m, n, &s).unwrap().value;
                let row = rhs_row_bound(&c, n, m, &s).unwrap().value;
                assert!((col - row).abs() <= 1e-15 * row.max(1e-300));
            }
        }
    }

    #[test]
    fn mean_value_mixed_double_loop() {
        let got = rhs_mixed_bound(&geo(), 2, 2, &spec(BoundFamily::MeanValue, 2, 16)).unwrap();
        let mut oracle = 0.0;
        for j in 1..=4 {
            for k in 1..=4 {
                oracle += 0.5f64.powi(j + k);
            }
        }
        oracle /= 4.0;
        assert!((got.value - oracle).abs() <= 1e-14 * oracle);
    }

    #[test]
    fn sup_mixed_factorizes_for_separable() {
        let u = |j: u64| 1.0 / (j as f64).powf(1.3);
        let v = |k: u64| (0.8f64).powi(k as i32) + 0.01 / k as f64;
        let c = DoubleSequenceRule::<f64>::real("u*v", move |j, k| u(j) * v(k));
        let cap = 20;
        let s = spec(BoundFamily::SupWindow, 1, cap);
        let (m, n) = (5, 7);
        let got = rhs_mixed_bound(&c, m, n, &s).unwrap();
        let threshold = s.b(m + n).ceil() as u64;
        let row_w = |big_m: u64| (big_m..=2 * big_m).map(u).sum::<f64>();
        let col_w = |big_n: u64| (big_n..=2 * big_n).map(v).sum::<f64>();
        let mut best = 0.0f64;
        for big_m in 1..=cap {
            for big_n in 1..=cap {
                if big_m + big_n >= threshold {
                    best = best.max(row_w(big_m) * col_w(big_n));
                }
            }
        }
        let oracle = best / (m * n) as f64;
        assert!((got.value - oracle).abs() <= 1e-12 * oracle, "{} vs {}", got.value, oracle);
    }

    #[test]
    fn cap_below_window_is_inconclusive() {
        let c = geo();
        let s = spec(BoundFamily::SupWindow, 1, 4);
        let b = rhs_row_bound(&c, 100, 1, &s).unwrap();
        assert_eq!(b.status, BoundStatus::Inconclusive);
        let b = rhs_mixed_bound(&c, 40, 40, &s).unwrap();
        assert_eq!(b.status, BoundStatus::Inconclusive);
    }

    #[test]
    fn increasing_windows_hit_the_cap() {
        let c = DoubleSequenceRule::<f64>::real("j", |j, _| j as f64);
        let s = spec(BoundFamily::SupWindow, 1, 32);
        assert_eq!(rhs_row_bound(&c, 4, 1, &s).unwrap().status, BoundStatus::Truncated);
    }

    #[test]
    fn membership_zero_and_geometric() {
        let blocks: Vec<(u64, u64)> = [2u64, 4, 8, 16, 32, 64]
            .iter()
            .flat_map(|&m| [2u64, 4, 8, 16, 32, 64].into_iter().map(move |n| (m, n)))
            .collect();
        let zero = membership_scan(
            &DoubleSequenceRule::<f64>::zero(),
            1.0,
            1,
            &spec(BoundFamily::MeanValue, 2, 64),
            &blocks,
        )
        .unwrap();
        assert_eq!(zero.verdict, Verdict::Consistent);
        assert_eq!(zero.c_estimate, 0.0);

        let rep = membership_scan(&geo(), 1.0, 1, &spec(BoundFamily::MeanValue, 2, 64), &blocks).unwrap();
        assert_eq!(rep.verdict, Verdict::Consistent);
        assert!(rep.c_estimate.is_finite() && rep.c_estimate < 10.0);
        assert_eq!(rep.per_block.len(), 3 * blocks.len());
        let max_ratio = rep.per_block.iter().filter_map(|e| e.ratio).fold(0.0, f64::max);
        assert_eq!(rep.c_estimate, max_ratio);
    }

    #[test]
    fn membership_errors() {
        let s = spec(BoundFamily::MeanValue, 2, 32);
        assert!(matches!(membership_scan(&geo(), 1.0, 1, &s, &[]), Err(Error::EmptyBlocks)));
        assert!(membership_scan(&geo(), 1.0, 1, &s, &[(1, 4)]).is_err());
        assert!(membership_scan(&geo(), 0.0, 1, &s, &[(4, 4)]).is_err());
    }

    #[test]
    fn zero_rhs_with_positive_lhs_is_violation() {
        let c = DoubleSequenceRule::<f64>::real("spike", |j, k| if j == 40 && k == 2 { 1.0 } else { 0.0 });
        let s = spec(BoundFamily::MaxWindow, 2, 64).with_b("l/8", |l| (l as f64 / 8.0).max(1.0)).unwrap();
        // Row block m = 20 reaches j + r = 40; windows M in [2.5, 5] only reach j <= 10.
        let rep = membership_scan(&c, 1.0, 20, &s, &[(20, 2)]).unwrap();
        assert_eq!(rep.verdict, Verdict::Violated);
    }

    #[test]
    fn family_ordering_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let c = random_table(rng.gen(), 40);
            let b = |l: u64| (l / 2).max(1) as f64;
            let max = spec(BoundFamily::MaxWindow, 2, 40).with_b("l/2", b).unwrap();
            let sup = spec(BoundFamily::SupWindow, 2, 40).with_b("l/2", b).unwrap();
            for m in [2u64, 4, 6, 10] {
                let bm = rhs_row_bound(&c, m, 3, &max).unwrap().value;
                let bs = rhs_row_bound(&c, m, 3, &sup).unwrap().value;
                assert!(bs >= bm);
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let c = random_table(23, 32);
        let blocks: Vec<(u64, u64)> = (1..=16).flat_map(|m| (1..=16).map(move |n| (m, n))).collect();
        assert!(embedding_check(&c, 1, 1.0, 2.0, &blocks).unwrap().holds);
        let same = embedding_check(&c, 2, 1.5, 1.5, &blocks).unwrap();
        assert!(same.rows.iter().all(|r| r.lower == r.upper));
        let single = embedding_check(&c, 1, 0.7, 3.0, &[(1, 1)]).unwrap();
        assert!(single.rows.iter().all(|r| r.lower == r.upper));
        assert!(embedding_check(&c, 1, 2.0, 1.0, &blocks).is_err());
    }

    #[test]
    fn divisor_examples() {
        let c = DoubleSequenceRule::<f64>::real("1/jk", |j, k| 1.0 / (j * k) as f64);
        let blocks: Vec<(u64, u64)> = [1u64, 2, 4, 8, 16, 32, 64]
            .iter()
            .flat_map(|&m| [1u64, 4, 16, 64].into_iter().map(move |n| (m, n)))
            .collect();
        assert!(divisor_embedding_check(&c, 1.0, 1, 3, &blocks).unwrap().holds);
        let eq = divisor_embedding_check(&c, 2.0, 2, 2, &blocks).unwrap();
        assert!(eq.rows.iter().all(|r| r.lower == r.upper));
        let flat = DoubleSequenceRule::<f64>::real("7", |_, _| 7.0);
        let rep = divisor_embedding_check(&flat, 1.0, 1, 2, &blocks).unwrap();
        assert!(rep.rows.iter().all(|r| r.lower == 0.0 && r.upper == 0.0));
        assert!(matches!(
            divisor_embedding_check(&c, 1.0, 2, 3, &blocks),
            Err(Error::NotDivisible { r1: 2, r2: 3 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn ratios_scale_invariant(seed in 0u64..1000, s in 0.01f64..50.0) {
            let c = random_table(seed, 24);
            let blocks = [(2u64, 2u64), (3, 5), (6, 4)];
            let sp = spec(BoundFamily::MaxWindow, 2, 12);
            let base = membership_scan(&c, 1.5, 1, &sp, &blocks).unwrap();
            let scaled = membership_scan(&c.scaled(Cx::new(s, 0.0)), 1.5, 1, &sp, &blocks).unwrap();
            for (a, b) in base.per_block.iter().zip(&scaled.per_block) {
                prop_assert!((b.lhs - s * a.lhs).abs() <= 1e-12 * s * a.lhs.max(1e-300));
                prop_assert!((b.rhs - s * a.rhs).abs() <= 1e-12 * s * a.rhs.max(1e-300));
                if let (Some(x), Some(y)) = (a.ratio, b.ratio) {
                    prop_assert!((x - y).abs() <= 1e-11 * x.max(1e-300));
                }
            }
        }
    }
}
