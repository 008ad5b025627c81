//! Discrepancy benchmark: walk colorings against the best of 64 random
//! sign vectors, over a grid of instance families and sizes.
//!
//! CSV columns, one row per `(family, n)` cell:
//!
//! ```text
//! algorithm,mode,family,n,m,trials,mean_linf,median_linf,max_linf,mean_l2,
//! mean_restarts,baseline_mean_linf,baseline_median_linf,baseline_max_linf
//! ```
//!
//! `*_linf` and `*_l2` are norms of `Vχ − t`; the baseline columns use, per
//! trial, the smallest `ℓ∞` residual among 64 uniform colorings.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use vbal_core::rng::{self, fill_rademacher};
use vbal_core::{sample_coloring, walk_params, Error, Mat, VectorSystem, WalkMode};

use crate::generate::{gen_beck_fiala, gen_komlos, trial_seed};
use crate::CliError;

pub const BASELINE_DRAWS: usize = 64;
const BASELINE_TAG: u64 = 0x4241_5345;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Columns with `min(3, m)` entries `1/√t`.
    BeckFiala,
    /// Uniform unit columns.
    Komlos,
    /// All-zero columns.
    Zero,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::BeckFiala => "beck-fiala",
            Family::Komlos => "komlos",
            Family::Zero => "zero",
        }
    }

    pub fn instance(self, n: usize, m: usize, seed: u64) -> Result<VectorSystem, Error> {
        match self {
            Family::BeckFiala => gen_beck_fiala(n, m, m.min(3), seed),
            Family::Komlos => gen_komlos(n, m, 1.0, seed),
            Family::Zero => VectorSystem::new(Mat::zeros(m, n), vec![0.0; n]),
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "beck-fiala" => Ok(Family::BeckFiala),
            "komlos" => Ok(Family::Komlos),
            "zero" => Ok(Family::Zero),
            _ => Err(format!("unknown family {s:?} (expected beck-fiala, komlos or zero)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub families: Vec<Family>,
    pub ns: Vec<usize>,
    pub trials: usize,
    #[serde(serialize_with = "crate::report::mode_name")]
    pub mode: WalkMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: &'static str,
    pub mode: &'static str,
    pub family: &'static str,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_linf: f64,
    pub median_linf: f64,
    pub max_linf: f64,
    pub mean_l2: f64,
    pub mean_restarts: f64,
    pub baseline_mean_linf: f64,
    pub baseline_median_linf: f64,
    pub baseline_max_linf: f64,
}

struct Trial {
    linf: f64,
    l2: f64,
    restarts: usize,
    baseline_linf: f64,
}

fn linf(v: &vbal_core::Vect) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn baseline(sys: &VectorSystem, seed: u64) -> f64 {
    let mut rng = rng::stream(seed, BASELINE_TAG, 0);
    let mut chi = vec![0.0; sys.len()];
    (0..BASELINE_DRAWS)
        .map(|_| {
            fill_rademacher(&mut rng, &mut chi);
            linf(&sys.residual(&chi))
        })
        .fold(f64::INFINITY, f64::min)
}

fn run_trial(family: Family, n: usize, mode: WalkMode, seed: u64) -> Result<Trial, Error> {
    let sys = family.instance(n, n, seed)?;
    let trace = sample_coloring(&sys, &walk_params(n, mode).with_seed(seed))?;
    Ok(Trial {
        linf: linf(&trace.residual),
        l2: trace.residual.norm(),
        restarts: trace.restarts,
        baseline_linf: baseline(&sys, seed),
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    if s.len() % 2 == 1 {
        s[k]
    } else {
        0.5 * (s[k - 1] + s[k])
    }
}

/// Runs every cell with `trials` parallel trials, instance dimension `m = n`.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, Error> {
    if cfg.trials == 0 {
        return Err(Error::Precondition("bench needs at least one trial".into()));
    }
    let mut rows = Vec::new();
    for &family in &cfg.families {
        for &n in &cfg.ns {
            let trials: Vec<Trial> = (0..cfg.trials)
                .into_par_iter()
                .map(|k| run_trial(family, n, cfg.mode, trial_seed(cfg.seed, k as u64)))
                .collect::<Result<_, _>>()?;
            let pick = |f: fn(&Trial) -> f64| trials.iter().map(f).collect::<Vec<f64>>();
            let (walk, base) = (pick(|t| t.linf), pick(|t| t.baseline_linf));
            rows.push(BenchRow {
                algorithm: "walk",
                mode: crate::report::mode_str(cfg.mode),
                family: family.name(),
                n,
                m: n,
                trials: cfg.trials,
                mean_linf: mean(&walk),
                median_linf: median(&walk),
                max_linf: walk.iter().copied().fold(0.0, f64::max),
                mean_l2: mean(&pick(|t| t.l2)),
                mean_restarts: mean(&pick(|t| t.restarts as f64)),
                baseline_mean_linf: mean(&base),
                baseline_median_linf: median(&base),
                baseline_max_linf: base.iter().copied().fold(0.0, f64::max),
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Format(e.to_string()))
}
