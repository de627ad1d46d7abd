//! Named builtin sequences.

use std::path::Path;

use clap::Args;
use dgm_core::sequence::{DecayEnvelope, DoubleSequenceRule, SequenceRule};
use dgm_core::{Complex64, DoubleSequence, Prop, Sequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{usage, Config, UsageError};

#[derive(Args, Debug, Clone, Default)]
pub struct SeqArgs {
    /// geometric | power | separable | proposition | table-file | random
    #[arg(long)]
    pub seq: Option<String>,
    /// Ratio of the geometric and separable rules
    #[arg(long)]
    pub q: Option<f64>,
    /// Exponent of the power and separable rules
    #[arg(long)]
    pub s: Option<f64>,
    /// Parameter p > 1 of the proposition rule
    #[arg(long = "seq-p")]
    pub seq_p: Option<f64>,
    /// CSV of `j,k,re,im` (or `k,re,im` for single sequences)
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Support size of the random rule
    #[arg(long)]
    pub len: Option<u64>,
}

pub struct SeqChoice {
    pub name: String,
    pub q: f64,
    pub s: f64,
    pub seq_p: f64,
    pub table: Option<String>,
    pub seed: u64,
    pub len: u64,
}

impl SeqChoice {
    /// `fallback_p` stands in for `--seq-p` where `--p` has no other meaning.
    pub fn resolve(args: &SeqArgs, cfg: &Config, fallback_p: Option<f64>) -> Result<Self, UsageError> {
        let name = cfg.or("seq", args.seq.clone(), "geometric".to_string())?;
        let q = cfg.or("q", args.q, 0.5)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(usage(format!("`q` must lie in (0, 1), got {q}")));
        }
        let s = cfg.or("s", args.s, 2.0)?;
        if !(s > 0.0) {
            return Err(usage(format!("`s` must be positive, got {s}")));
        }
        let seq_p = cfg.pick("seq-p", args.seq_p)?.or(fallback_p).unwrap_or(2.0);
        if name == "proposition" && !(seq_p > 1.0) {
            return Err(usage(format!("`seq-p` must exceed 1 for the proposition rule, got {seq_p}")));
        }
        let len = cfg.or("len", args.len, 64)?;
        if len == 0 || len > 4096 {
            return Err(usage(format!("`len` must lie in [1, 4096], got {len}")));
        }
        Ok(Self {
            name,
            q,
            s,
            seq_p,
            table: cfg.pick("table", args.table.clone())?,
            seed: cfg.or("seed", args.seed, 1)?,
            len,
        })
    }

    pub fn double(&self) -> Result<DoubleSequence, UsageError> {
        let (q, s) = (self.q, self.s);
        Ok(match self.name.as_str() {
            "geometric" => DoubleSequenceRule::real(format!("geometric(q={q})"), move |j, k| {
                q.powf((j + k) as f64)
            })
            .with_decay(DecayEnvelope::Geometric {
                scale: 1.0,
                row_ratio: q,
                col_ratio: q,
            }),
            "power" => DoubleSequenceRule::real(format!("power(s={s})"), move |j, k| {
                ((j as f64) * (k as f64)).powf(-s)
            })
            .with_decay(DecayEnvelope::Polynomial {
                scale: 1.0,
                row_exponent: s,
                col_exponent: s,
            }),
            "separable" => DoubleSequenceRule::real(format!("separable(s={s},q={q})"), move |j, k| {
                (j as f64).powf(-s) * q.powf(k as f64)
            }),
            "proposition" => Prop::new(self.seq_p).map_err(|e| usage(e.to_string()))?.double_rule(),
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let vals = (0..self.len * self.len)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                DoubleSequenceRule::from_table(format!("random(seed={})", self.seed), self.len, self.len, vals)
            }
            "table-file" => self.double_table()?,
            other => return Err(usage(format!("`seq`: unknown sequence `{other}`"))),
        })
    }

    pub fn single(&self) -> Result<Sequence, UsageError> {
        let (q, s) = (self.q, self.s);
        Ok(match self.name.as_str() {
            "geometric" => SequenceRule::real(format!("geometric(q={q})"), move |k| q.powf(k as f64)),
            "power" => SequenceRule::real(format!("power(s={s})"), move |k| (k.max(1) as f64).powf(-s)),
            "proposition" => Prop::new(self.seq_p).map_err(|e| usage(e.to_string()))?.single_rule(),
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let vals = (0..self.len)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                SequenceRule::from_values(format!("random(seed={})", self.seed), vals)
            }
            "table-file" => self.single_table()?,
            other => {
                return Err(usage(format!("`seq`: `{other}` is not available as a single sequence")))
            }
        })
    }

    fn rows(&self, width: usize) -> Result<Vec<Vec<f64>>, UsageError> {
        let path = self
            .table
            .as_deref()
            .ok_or_else(|| usage("`table`: required for the table-file sequence"))?;
        read_numeric_rows(Path::new(path), width)
    }

    fn double_table(&self) -> Result<DoubleSequence, UsageError> {
        let rows = self.rows(4)?;
        let (mut nr, mut nc) = (0u64, 0u64);
        let mut cells = Vec::with_capacity(rows.len());
        for r in &rows {
            let (j, k) = (index(r[0])?, index(r[1])?);
            nr = nr.max(j);
            nc = nc.max(k);
            cells.push((j, k, Complex64::new(r[2], r[3])));
        }
        if nr * nc > 1 << 24 {
            return Err(usage("`table`: support too large"));
        }
        let mut vals = vec![Complex64::new(0.0, 0.0); (nr * nc) as usize];
        for (j, k, v) in cells {
            vals[((j - 1) * nc + (k - 1)) as usize] = v;
        }
        Ok(DoubleSequenceRule::from_table("table-file", nr, nc, vals))
    }

    fn single_table(&self) -> Result<Sequence, UsageError> {
        let rows = self.rows(3)?;
        let mut n = 0u64;
        for r in &rows {
            n = n.max(index(r[0])?);
        }
        let mut vals = vec![Complex64::new(0.0, 0.0); n as usize];
        for r in &rows {
            vals[index(r[0])? as usize - 1] = Complex64::new(r[1], r[2]);
        }
        Ok(SequenceRule::from_values("table-file", vals))
    }
}

fn index(v: f64) -> Result<u64, UsageError> {
    if v >= 1.0 && v.fract() == 0.0 && v <= (1u64 << 24) as f64 {
        Ok(v as u64)
    } else {
        Err(usage(format!("`table`: index {v} is not a positive integer")))
    }
}

/// Numeric CSV rows of exactly `width` fields; a non-numeric first row is a header.
fn read_numeric_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>, UsageError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| usage(format!("`table`: {e}")))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| usage(format!("`table`: {e}")))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == width => out.push(v),
            Ok(v) => {
                return Err(usage(format!("`table`: row {} has {} fields, expected {width}", i + 1, v.len())))
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(usage(format!("`table`: row {}: {e}", i + 1))),
        }
    }
    Ok(out)
}
