use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;
mod seqs;

use config::{usage, Config, UsageError};
use seqs::SeqArgs;

/// Experiment runner for general-monotone double sequences and double sine series.
///
/// Exit status: 0 consistent / converging / verified, 1 violated / not converging,
/// 2 inconclusive, 3 usage error.
#[derive(Parser, Debug)]
#[command(name = "dgm", version)]
struct Cli {
    /// Flat `key = value` file; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (overrides DGM_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutArgs {
    /// Directory receiving CSV tables and SVG plots
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(long = "no-plot")]
    pub no_plot: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BlockArgs {
    /// Explicit blocks `m:n,m:n,...`
    #[arg(long)]
    pub blocks: Option<String>,
    /// Row block starts (crossed with --n-list)
    #[arg(long = "m-list")]
    pub m_list: Option<String>,
    /// Column block starts (crossed with --m-list)
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Block evidence for membership in a class of the hierarchy
    Membership {
        #[command(flatten)]
        seq: SeqArgs,
        /// Norm exponent
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        r: Option<u64>,
        /// mean-value | max-window | sup-window
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        lambda: Option<u64>,
        /// Truncation cap of the sup-type bounds
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        blocks: BlockArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Block-wise inclusion checks between exponents or steps
    Embedding {
        #[command(flatten)]
        seq: SeqArgs,
        /// lp (compare --p1 <= --p2) or divisor (compare --r against --r2)
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long)]
        r2: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        #[command(flatten)]
        blocks: BlockArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Summation by parts of a sine partial sum, with the half-band estimate
    Sbp {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Half-band bound on the step-r Dirichlet-type kernels
    KernelBound {
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        r: Option<u64>,
        #[arg(long = "k-max")]
        k_max: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rectangle remainders of the double sine series over a grid
    Converge {
        #[command(flatten)]
        seq: SeqArgs,
        /// Parameter of the proposition rule when --seq-p is absent
        #[arg(long)]
        p: Option<f64>,
        /// Grid `r=3,ppb=2,eps=1e-6`
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        thresholds: Option<String>,
        #[arg(long)]
        cap: Option<u64>,
        /// Profile a single point `x,y`
        #[arg(long)]
        point: Option<String>,
        /// Profile the grid point nearest to `x,y`
        #[arg(long)]
        nearest: Option<String>,
        /// Profile `(2 l1 pi/r, 2 l2 pi/r)` given as `l1,l2`
        #[arg(long)]
        rational: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Decay and tail quantities
    Decay {
        #[command(flatten)]
        seq: SeqArgs,
        /// zak | loglog | row-tail | col-tail | lemma4 | lemma5 | lemma5-col
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        thresholds: Option<String>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        r: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form log integral against its bound ln p
    LogIntegral {
        /// Comma-separated list
        #[arg(long)]
        n: Option<String>,
        /// Comma-separated list
        #[arg(long = "big-n")]
        big_n: Option<String>,
        /// Comma-separated list
        #[arg(long)]
        p: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The explicit counterexample sequence
    Counterexample {
        #[command(subcommand)]
        action: CounterCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CounterCmd {
    /// Divergence certificate at (2pi/3, 2pi/3)
    Certify {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "n-max")]
        n_max: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Growth of the l^1 column ratio against the max-window bound
    Ratio {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long = "n-list")]
        n_list: Option<String>,
        #[arg(long)]
        lambda: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Result class of a run, mapped onto the exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

fn init_threads(cfg: &Config, flag: Option<usize>) -> Result<(), UsageError> {
    let from_env = match std::env::var("DGM_THREADS") {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|e| usage(format!("DGM_THREADS: {e}")))?,
        ),
        _ => None,
    };
    let n = cfg.pick("threads", flag)?.or(from_env);
    if let Some(n) = n {
        if n == 0 {
            return Err(usage("`threads` must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, UsageError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    init_threads(&cfg, cli.threads)?;
    use commands::*;
    match cli.cmd {
        Cmd::Membership { seq, p, r, family, lambda, cap, blocks, out } => {
            membership(&cfg, &seq, p, r, family, lambda, cap, &blocks, &out)
        }
        Cmd::Embedding { seq, kind, r, r2, p, p1, p2, blocks, out } => {
            embedding(&cfg, &seq, kind, r, r2, p, p1, p2, &blocks, &out)
        }
        Cmd::Sbp { seq, n, m, r, x, out } => sbp(&cfg, &seq, n, m, r, x, &out),
        Cmd::KernelBound { x, r, k_max, out } => kernel_bound(&cfg, x, r, k_max, &out),
        Cmd::Converge { seq, p, grid, thresholds, cap, point, nearest, rational, out } => converge(
            &cfg,
            &seq,
            p,
            ConvergeTarget { grid, point, nearest, rational },
            thresholds,
            cap,
            &out,
        ),
        Cmd::Decay { seq, check, thresholds, horizon, m, n, p, r, out } => {
            decay(&cfg, &seq, check, thresholds, horizon, m, n, p, r, &out)
        }
        Cmd::LogIntegral { n, big_n, p, out } => log_integral(&cfg, n, big_n, p, &out),
        Cmd::Counterexample { action } => match action {
            CounterCmd::Certify { p, n_max, out } => certify(&cfg, p, n_max, &out),
            CounterCmd::Ratio { p, m, n_list, lambda, out } => ratio(&cfg, p, m, n_list, lambda, &out),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
