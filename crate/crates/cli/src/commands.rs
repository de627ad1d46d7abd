use std::path::PathBuf;

use dgm_core::class_lab::{BlockEvidence, BoundStatus, InclusionReport};
use dgm_core::convergence::{
    check_loglog_decay_with, check_zak_sneider_with, RationalPointOutcome, RemainderProfile,
};
use dgm_core::kernel::{sbp_decompose, sine_partial_sum};
use dgm_core::scalar::linear_fit;
use dgm_core::{
    check_col_tail_sup, check_lemma4_tail, check_lemma5_col_tail, check_lemma5_tail,
    check_row_tail_sup, dgm1_violation_ratio, dirichlet_tilde, divergence_certificate,
    divisor_embedding_check, embedding_check, lemma2_bound, log_integral_bound, point_remainder_sup,
    rational_point_regular_convergence, regular_remainder_sup, Bound, BoundFamily, Component,
    ConvergenceVerdict, DecayReport, DecayVerdict, FrontierSampling, Grid, KernelPoint,
    MembershipScanner, TailStatus, Verdict,
};

use crate::config::{parse_blocks, parse_kv, parse_list, parse_pair, usage, Config, UsageError};
use crate::output::{num, opt_num, OutDir, Plot};
use crate::seqs::{SeqArgs, SeqChoice};
use crate::{BlockArgs, OutArgs, Outcome};

fn core(e: dgm_core::Error) -> UsageError {
    usage(e.to_string())
}

fn out_dir(cfg: &Config, out: &OutArgs) -> Result<OutDir, UsageError> {
    let root = cfg.or("out-dir", out.out_dir.clone(), PathBuf::from("dgm-out"))?;
    OutDir::new(root, !cfg.flag("no-plot", out.no_plot)?)
}

fn powers_of_two(from: u64, to: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut x = from.max(1).next_power_of_two();
    while x <= to {
        v.push(x);
        x *= 2;
    }
    v
}

fn blocks(cfg: &Config, b: &BlockArgs, default: &[u64]) -> Result<Vec<(u64, u64)>, UsageError> {
    if let Some(text) = cfg.pick::<String>("blocks", b.blocks.clone())? {
        return parse_blocks(&text);
    }
    let ms = match cfg.pick::<String>("m-list", b.m_list.clone())? {
        Some(t) => parse_list("m-list", &t)?,
        None => default.to_vec(),
    };
    let ns = match cfg.pick::<String>("n-list", b.n_list.clone())? {
        Some(t) => parse_list("n-list", &t)?,
        None => default.to_vec(),
    };
    Ok(ms.iter().flat_map(|&m| ns.iter().map(move |&n| (m, n))).collect())
}

fn positive(name: &str, v: f64) -> Result<f64, UsageError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("`{name}` must be positive, got {v}")))
    }
}

fn step(name: &str, v: u64) -> Result<u64, UsageError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(usage(format!("`{name}` must be at least 1")))
    }
}

fn status_name(s: BoundStatus) -> &'static str {
    match s {
        BoundStatus::Exact => "exact",
        BoundStatus::Truncated => "truncated",
        BoundStatus::Inconclusive => "inconclusive",
    }
}

fn block_start(e: &BlockEvidence<f64>) -> f64 {
    match e.component {
        Component::Row => e.m as f64,
        Component::Column => e.n as f64,
        Component::Mixed => (e.m * e.n) as f64,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn membership(
    cfg: &Config,
    seq: &SeqArgs,
    p: Option<f64>,
    r: Option<u64>,
    family: Option<String>,
    lambda: Option<u64>,
    cap: Option<u64>,
    b: &BlockArgs,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let choice = SeqChoice::resolve(seq, cfg, None)?;
    let c = choice.double()?;
    let p = positive("p", cfg.or("p", p, 1.0)?)?;
    let r = step("r", cfg.or("r", r, 1)?)?;
    let family: BoundFamily = cfg.or("family", family, "mean-value".into())?.parse().map_err(core)?;
    let lambda = cfg.or("lambda", lambda, 2)?;
    let cap = cfg.or("cap", cap, 256)?;
    let spec = Bound::new(family, lambda, cap).map_err(core)?;
    let blocks = blocks(cfg, b, &powers_of_two(lambda.max(2), 64))?;
    let report = MembershipScanner::new(c, spec).scan(p, r, &blocks).map_err(core)?;

    let mut dir = out_dir(cfg, out)?;
    let rows: Vec<Vec<String>> = report
        .per_block
        .iter()
        .map(|e| {
            vec![
                e.m.to_string(),
                e.n.to_string(),
                e.component.name().into(),
                num(e.lhs),
                num(e.rhs),
                opt_num(e.ratio),
                status_name(e.status).into(),
                e.maximizer.map(|m| m.0.to_string()).unwrap_or_default(),
                e.maximizer.map(|m| m.1.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    dir.csv(
        "membership.csv",
        &["m", "n", "component", "lhs", "rhs", "ratio", "status", "argmax_m", "argmax_n"],
        &rows,
    )?;
    let fits: Vec<Vec<String>> = report
        .fits
        .iter()
        .map(|f| {
            vec![
                f.component.name().into(),
                num(f.slope),
                num(f.correlation),
                num(f.octaves),
                f.points.to_string(),
            ]
        })
        .collect();
    dir.csv("membership_fit.csv", &["component", "slope", "correlation", "octaves", "points"], &fits)?;
    let mut plot = Plot::new(&format!("lhs/rhs for {}", choice.name), "block start", "ratio").log_x().log_y();
    for comp in [Component::Row, Component::Column, Component::Mixed] {
        let mut pts: Vec<(f64, f64)> = report
            .per_block
            .iter()
            .filter(|e| e.component == comp)
            .filter_map(|e| e.ratio.map(|r| (block_start(e), r)))
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        plot = plot.with(comp.name(), pts);
    }
    dir.svg("membership.svg", &plot)?;

    println!(
        "membership: {} c_estimate={} growth_fit={} blocks={}",
        report.verdict.name(),
        num(report.c_estimate),
        opt_num(report.growth_fit),
        blocks.len()
    );
    Ok(match report.verdict {
        Verdict::Consistent => Outcome::Pass,
        Verdict::Violated => Outcome::Fail,
        Verdict::Inconclusive => Outcome::Inconclusive,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn embedding(
    cfg: &Config,
    seq: &SeqArgs,
    kind: Option<String>,
    r: Option<u64>,
    r2: Option<u64>,
    p: Option<f64>,
    p1: Option<f64>,
    p2: Option<f64>,
    b: &BlockArgs,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let c = SeqChoice::resolve(seq, cfg, None)?.double()?;
    let blocks = blocks(cfg, b, &powers_of_two(1, 32))?;
    let kind = cfg.or("kind", kind, "lp".to_string())?;
    let r = step("r", cfg.or("r", r, 1)?)?;
    let (report, label): (InclusionReport<f64>, String) = match kind.as_str() {
        "lp" => {
            let p1 = positive("p1", cfg.or("p1", p1, 1.0)?)?;
            let p2 = positive("p2", cfg.or("p2", p2, 2.0)?)?;
            (embedding_check(&c, r, p1, p2, &blocks).map_err(core)?, format!("p1={p1} p2={p2}"))
        }
        "divisor" => {
            let r2 = step("r2", cfg.or("r2", r2, 2 * r)?)?;
            let p = positive("p", cfg.or("p", p, 1.0)?)?;
            (divisor_embedding_check(&c, p, r, r2, &blocks).map_err(core)?, format!("r1={r} r2={r2}"))
        }
        other => return Err(usage(format!("`kind`: expected lp or divisor, got `{other}`"))),
    };
    let mut dir = out_dir(cfg, out)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|e| {
            vec![
                e.m.to_string(),
                e.n.to_string(),
                e.component.name().into(),
                num(e.lower),
                num(e.upper),
                e.holds.to_string(),
            ]
        })
        .collect();
    dir.csv("embedding.csv", &["m", "n", "component", "lower", "upper", "holds"], &rows)?;
    println!(
        "embedding({kind}): {} {label} violations={}",
        if report.holds { "Holds" } else { "Violated" },
        report.violations.len()
    );
    Ok(if report.holds { Outcome::Pass } else { Outcome::Fail })
}

pub fn sbp(
    cfg: &Config,
    seq: &SeqArgs,
    n: Option<u64>,
    m: Option<u64>,
    r: Option<u64>,
    x: Option<f64>,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let a = SeqChoice::resolve(seq, cfg, None)?.single()?;
    let n = step("n", cfg.or("n", n, 1)?)?;
    let m = cfg.or("m", m, 100)?;
    let r = step("r", cfg.or("r", r, 1)?)?;
    let x = cfg.or("x", x, 1.0)?;
    let d = sbp_decompose(&a, n, m, r, x).map_err(core)?;
    let direct = sine_partial_sum(&a, n, m, x);
    let err = (d.total - direct).norm();
    let exact = err <= 1e-12 * (1.0 + direct.norm());
    let l2 = lemma2_bound(&a, n, m, r, x).ok();
    let dominated = l2.map_or(true, |b| direct.norm() <= b.value);

    let mut dir = out_dir(cfg, out)?;
    dir.csv(
        "sbp.csv",
        &[
            "n", "m", "r", "x", "main_re", "main_im", "upper_re", "upper_im", "lower_re", "lower_im",
            "total_re", "total_im", "direct_re", "direct_im", "abs_error", "kernel_bound", "bound",
            "displayed_bound",
        ],
        &[vec![
            n.to_string(),
            m.to_string(),
            r.to_string(),
            num(x),
            num(d.main_term.re),
            num(d.main_term.im),
            num(d.upper_boundary.re),
            num(d.upper_boundary.im),
            num(d.lower_boundary.re),
            num(d.lower_boundary.im),
            num(d.total.re),
            num(d.total.im),
            num(direct.re),
            num(direct.im),
            num(err),
            opt_num(l2.map(|b| b.kernel_bound)),
            opt_num(l2.map(|b| b.value)),
            opt_num(l2.map(|b| b.displayed_value)),
        ]],
    )?;
    println!(
        "sbp: {} abs_error={} |sum|={} bound={}",
        if exact && dominated { "Holds" } else { "Violated" },
        num(err),
        num(direct.norm()),
        opt_num(l2.map(|b| b.value))
    );
    Ok(if exact && dominated { Outcome::Pass } else { Outcome::Fail })
}

pub fn kernel_bound(
    cfg: &Config,
    x: Option<f64>,
    r: Option<u64>,
    k_max: Option<u64>,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let x = cfg.or("x", x, 1.0)?;
    let r = step("r", cfg.or("r", r, 1)?)?;
    let k_max = cfg.or("k-max", k_max, 100)?;
    let point = KernelPoint::locate(x, r).map_err(core)?;
    let bound = point.kernel_bound();
    let mut rows = Vec::new();
    let mut ok = true;
    for k in 0..=k_max {
        for sign in [1i64, -1] {
            let v = dirichlet_tilde(k, sign * r as i64, x).map_err(core)?;
            let holds = v.abs() <= bound;
            ok &= holds;
            rows.push(vec![k.to_string(), (sign * r as i64).to_string(), num(v), num(bound), holds.to_string()]);
        }
    }
    let mut dir = out_dir(cfg, out)?;
    dir.csv("kernel_bound.csv", &["k", "step", "kernel", "bound", "holds"], &rows)?;
    println!(
        "kernel-bound: {} l={} half={:?} bound={}",
        if ok { "Holds" } else { "Violated" },
        point.l,
        point.half,
        num(bound)
    );
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

pub struct ConvergeTarget {
    pub grid: Option<String>,
    pub point: Option<String>,
    pub nearest: Option<String>,
    pub rational: Option<String>,
}

pub fn converge(
    cfg: &Config,
    seq: &SeqArgs,
    p: Option<f64>,
    target: ConvergeTarget,
    thresholds: Option<String>,
    cap: Option<u64>,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let fallback = cfg.pick("p", p)?;
    let choice = SeqChoice::resolve(seq, cfg, fallback)?;
    let c = choice.double()?;
    let grid_kv = parse_kv("grid", &cfg.or("grid", target.grid, String::new())?)?;
    let get = |k: &str, d: &str| grid_kv.get(k).cloned().unwrap_or_else(|| d.to_string());
    for k in grid_kv.keys() {
        if !["r", "ppb", "eps"].contains(&k.as_str()) {
            return Err(usage(format!("`grid`: unknown field `{k}`")));
        }
    }
    let parse_u = |k: &str, d: &str| get(k, d).parse::<u64>().map_err(|e| usage(format!("`grid` {k}: {e}")));
    let grid_r = parse_u("r", "3")?;
    let ppb = parse_u("ppb", "2")?;
    let eps = get("eps", "1e-6").parse::<f64>().map_err(|e| usage(format!("`grid` eps: {e}")))?;
    let grid = Grid::new(grid_r, ppb, eps).map_err(core)?;
    let thresholds: Vec<u64> = parse_list("thresholds", &cfg.or("thresholds", thresholds, "4,8,16,32,64".into())?)?;
    let cap = cfg.or("cap", cap, 2048)?;

    let point = cfg.pick::<String>("point", target.point)?;
    let nearest = cfg.pick::<String>("nearest", target.nearest)?;
    let rational = cfg.pick::<String>("rational", target.rational)?;
    let (profile, scope): (Option<RemainderProfile<f64>>, String) = if let Some(t) = rational {
        let (l1, l2) = parse_pair::<u64>("rational", &t)?;
        match rational_point_regular_convergence(&c, grid_r, l1, l2, &thresholds, cap).map_err(core)? {
            RationalPointOutcome::TriviallySatisfied => (None, format!("rational l1={l1} l2={l2}")),
            RationalPointOutcome::Evaluated(p) => (Some(p), format!("rational l1={l1} l2={l2}")),
        }
    } else if let Some(t) = point {
        let (x, y) = parse_pair::<f64>("point", &t)?;
        (Some(point_remainder_sup(&c, x, y, &thresholds, cap).map_err(core)?), format!("point x={} y={}", num(x), num(y)))
    } else if let Some(t) = nearest {
        let (x0, y0) = parse_pair::<f64>("nearest", &t)?;
        let (x, y) = grid.nearest(x0, y0);
        (Some(point_remainder_sup(&c, x, y, &thresholds, cap).map_err(core)?), format!("point x={} y={}", num(x), num(y)))
    } else {
        (Some(regular_remainder_sup(&c, &grid, &thresholds, cap).map_err(core)?), format!("grid points={}", grid.points().len()))
    };

    let Some(profile) = profile else {
        println!("converge: Converging (trivially satisfied for r <= 2) {scope}");
        return Ok(Outcome::Pass);
    };
    let mut dir = out_dir(cfg, out)?;
    let rows: Vec<Vec<String>> = profile
        .entries
        .iter()
        .map(|e| {
            vec![
                e.threshold.to_string(),
                e.m.to_string(),
                e.n.to_string(),
                e.big_m.to_string(),
                e.big_n.to_string(),
                num(e.sup),
                num(e.x),
                num(e.y),
            ]
        })
        .collect();
    dir.csv("remainder.csv", &["threshold", "m", "n", "M", "N", "sup", "x", "y"], &rows)?;
    let point_rows: Vec<Vec<String>> = profile
        .per_point
        .iter()
        .flat_map(|pt| {
            thresholds
                .iter()
                .zip(&pt.sups)
                .map(move |(t, s)| vec![num(pt.x), num(pt.y), t.to_string(), num(*s)])
        })
        .collect();
    dir.csv("remainder_points.csv", &["x", "y", "threshold", "sup"], &point_rows)?;
    let pts: Vec<(f64, f64)> = profile.entries.iter().map(|e| (e.threshold as f64, e.sup)).collect();
    dir.svg(
        "remainder.svg",
        &Plot::new(&format!("rectangle sup for {}", choice.name), "threshold on m+n", "sup").log_x().log_y().with("sup", pts),
    )?;
    let last = profile.entries.last().expect("thresholds nonempty");
    println!(
        "converge: {} {scope} cap={cap} sup_last={} at x={} y={}",
        profile.verdict.name(),
        num(last.sup),
        num(last.x),
        num(last.y)
    );
    Ok(match profile.verdict {
        ConvergenceVerdict::Converging => Outcome::Pass,
        ConvergenceVerdict::NotConverging => Outcome::Fail,
        ConvergenceVerdict::Inconclusive => Outcome::Inconclusive,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn decay(
    cfg: &Config,
    seq: &SeqArgs,
    check: Option<String>,
    thresholds: Option<String>,
    horizon: Option<u64>,
    m: Option<u64>,
    n: Option<u64>,
    p: Option<f64>,
    r: Option<u64>,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let choice = SeqChoice::resolve(seq, cfg, None)?;
    let c = choice.double()?;
    let check = cfg.or("check", check, "zak".to_string())?;
    let mut dir = out_dir(cfg, out)?;
    match check.as_str() {
        "zak" | "loglog" => {
            let ts: Vec<u64> = parse_list(
                "thresholds",
                &cfg.or("thresholds", thresholds, "4,16,64,256,1024,4096,16384,65536,262144".into())?,
            )?;
            let sampling = FrontierSampling {
                horizon: cfg.or("horizon", horizon, 1 << 20)?,
                ..FrontierSampling::default()
            };
            let rep: DecayReport = if check == "zak" {
                check_zak_sneider_with(&c, &ts, &sampling)
            } else {
                check_loglog_decay_with(&c, &ts, &sampling)
            }
            .map_err(core)?;
            let rows: Vec<Vec<String>> =
                rep.samples.iter().map(|s| vec![s.m.to_string(), s.n.to_string(), num(s.value)]).collect();
            dir.csv("decay.csv", &["m", "n", "value"], &rows)?;
            let tails: Vec<Vec<String>> = rep.max_tail.iter().map(|(t, v)| vec![t.to_string(), num(*v)]).collect();
            dir.csv("decay_tail.csv", &["threshold", "max_tail"], &tails)?;
            let pts = rep.max_tail.iter().map(|&(t, v)| (t as f64, v)).collect();
            dir.svg(
                "decay.svg",
                &Plot::new(&format!("{check} tail for {}", choice.name), "threshold on m+n", "max tail").log_x().log_y().with("max_tail", pts),
            )?;
            println!(
                "decay({check}): {} max_tail_last={} trend={}",
                rep.verdict.name(),
                num(rep.max_tail.last().expect("nonempty").1),
                opt_num(rep.trend_fit)
            );
            Ok(match rep.verdict {
                DecayVerdict::Decaying => Outcome::Pass,
                DecayVerdict::NotDecaying => Outcome::Fail,
                DecayVerdict::Inconclusive => Outcome::Inconclusive,
            })
        }
        "row-tail" | "col-tail" => {
            let m = cfg.or("m", m, 2)?;
            let n = cfg.or("n", n, 2)?;
            let h = cfg.or("horizon", horizon, 256)?;
            let t = if check == "row-tail" {
                check_row_tail_sup(&c, m, n, h)
            } else {
                check_col_tail_sup(&c, m, n, h)
            }
            .map_err(core)?;
            let bounded = t.status == TailStatus::Bounded;
            dir.csv(
                "tail.csv",
                &["check", "m", "n", "horizon", "value", "argmax", "residual", "status"],
                &[vec![
                    check.clone(),
                    m.to_string(),
                    n.to_string(),
                    h.to_string(),
                    num(t.value),
                    t.argmax.to_string(),
                    opt_num(t.residual),
                    if bounded { "bounded" } else { "inconclusive" }.into(),
                ]],
            )?;
            println!(
                "decay({check}): {} value={} residual={}",
                if bounded { "Bounded" } else { "Inconclusive" },
                num(t.value),
                opt_num(t.residual)
            );
            Ok(if bounded { Outcome::Pass } else { Outcome::Inconclusive })
        }
        "lemma4" | "lemma5" | "lemma5-col" => {
            let m = cfg.or("m", m, 2)?;
            let n = cfg.or("n", n, 2)?;
            let h = cfg.or("horizon", horizon, 256)?;
            let p = cfg.or("p", p, 1.0)?;
            let r = step("r", cfg.or("r", r, 1)?)?;
            let v = match check.as_str() {
                "lemma4" => check_lemma4_tail(&c, p, r, m, n, h),
                "lemma5" => check_lemma5_tail(&c, p, r, m, n, h),
                _ => check_lemma5_col_tail(&c, p, r, m, n, h),
            }
            .map_err(core)?;
            dir.csv(
                "tail.csv",
                &["check", "p", "r", "m", "n", "horizon", "value"],
                &[vec![check.clone(), num(p), r.to_string(), m.to_string(), n.to_string(), h.to_string(), num(v)]],
            )?;
            println!("decay({check}): value={}", num(v));
            Ok(Outcome::Pass)
        }
        other => Err(usage(format!(
            "`check`: expected zak, loglog, row-tail, col-tail, lemma4, lemma5 or lemma5-col, got `{other}`"
        ))),
    }
}

pub fn log_integral(
    cfg: &Config,
    n: Option<String>,
    big_n: Option<String>,
    p: Option<String>,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let ns: Vec<u64> = parse_list("n", &cfg.or("n", n, "1,10,100,1000".into())?)?;
    let bigs: Vec<u64> = parse_list("big-n", &cfg.or("big-n", big_n, "1,10,100,1000".into())?)?;
    let ps: Vec<f64> = parse_list("p", &cfg.or("p", p, "1,1.5,2,3,10".into())?)?;
    let mut rows = Vec::new();
    let mut ok = true;
    for &p in &ps {
        for &n in &ns {
            for &bn in &bigs {
                let li = log_integral_bound(n, bn, p).map_err(core)?;
                ok &= li.holds;
                rows.push(vec![n.to_string(), bn.to_string(), num(p), num(li.value), num(li.bound), li.holds.to_string()]);
            }
        }
    }
    let mut dir = out_dir(cfg, out)?;
    dir.csv("log_integral.csv", &["n", "N", "p", "value", "bound", "holds"], &rows)?;
    println!("log-integral: {} cases={}", if ok { "Holds" } else { "Violated" }, rows.len());
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

pub fn certify(cfg: &Config, p: Option<f64>, n_max: Option<u64>, out: &OutArgs) -> Result<Outcome, UsageError> {
    let p = cfg.or("p", p, 2.0)?;
    let n_max = cfg.or("n-max", n_max, 100_000)?;
    if n_max > 10_000_000 {
        return Err(usage("`n-max` must not exceed 10^7"));
    }
    let cert = divergence_certificate(n_max, p).map_err(core)?;
    let rows: Vec<Vec<String>> = cert
        .partial_sums
        .iter()
        .zip(&cert.lower_bounds)
        .map(|(&(big_n, s), &(_, l))| vec![big_n.to_string(), num(s), num(l), (s >= l).to_string()])
        .collect();
    let mut dir = out_dir(cfg, out)?;
    dir.csv("certificate.csv", &["N", "S_N", "L_N", "holds"], &rows)?;
    let stride = (cert.len() / 400).max(1);
    let pick = |v: &[(u64, f64)]| v.iter().step_by(stride).map(|&(n, s)| ((n + 1) as f64, s)).collect();
    dir.svg(
        "certificate.svg",
        &Plot::new("partial sums against the divergent lower bound", "N + 1", "value")
            .log_x()
            .with("S_N", pick(&cert.partial_sums))
            .with("L_N", pick(&cert.lower_bounds)),
    )?;
    println!(
        "counterexample certify: {} n_max={n_max} L_last={} first_failure={}",
        if cert.verified { "Verified" } else { "Failed" },
        num(cert.last_lower_bound()),
        cert.first_failure.map(|n| n.to_string()).unwrap_or_else(|| "none".into())
    );
    Ok(if cert.verified { Outcome::Pass } else { Outcome::Fail })
}

pub fn ratio(
    cfg: &Config,
    p: Option<f64>,
    m: Option<u64>,
    n_list: Option<String>,
    lambda: Option<u64>,
    out: &OutArgs,
) -> Result<Outcome, UsageError> {
    let p = cfg.or("p", p, 2.0)?;
    let m = cfg.or("m", m, 4)?;
    let lambda = cfg.or("lambda", lambda, 2)?;
    let ns: Vec<u64> = match cfg.pick::<String>("n-list", n_list)? {
        Some(t) => parse_list("n-list", &t)?,
        None => powers_of_two(16, 4096),
    };
    let spec = Bound::new(BoundFamily::MaxWindow, lambda, 64).map_err(core)?;
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for &n in &ns {
        let v = dgm1_violation_ratio(m, n, p, &spec).map_err(core)?;
        rows.push(vec![m.to_string(), n.to_string(), num(v)]);
        pts.push((n as f64, v));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(n, v)| (n.ln(), v.ln())).collect();
    let fit = linear_fit(&logs);
    let mut dir = out_dir(cfg, out)?;
    dir.csv("ratio.csv", &["m", "n", "ratio"], &rows)?;
    dir.svg("ratio.svg", &Plot::new("l1 column ratio", "n", "ratio").log_x().log_y().with("ratio", pts))?;
    let grows = fit.is_some_and(|(s, _, c)| s > 0.05 && c >= 0.9);
    println!(
        "counterexample ratio: {} slope={} correlation={}",
        if grows { "Violated" } else { "Consistent" },
        opt_num(fit.map(|f| f.0)),
        opt_num(fit.map(|f| f.2))
    );
    Ok(if grows { Outcome::Fail } else { Outcome::Pass })
}
