//! Empirical subgaussianity checks for a sample of vectors.
//!
//! A random vector `Y` is `s`-subgaussian when every marginal satisfies
//! `Pr[|⟨Y, θ⟩| ≥ t] ≤ 2·exp(−(t/s)²/2)`. [`estimate_subgaussian`] inverts
//! that bound on empirical tails over random directions,
//! [`laplace_certificate`] tests `E[cosh⟨w, Y⟩] ≤ β·exp(‖σw‖²/2)`, and
//! [`coverage_test`] measures how often samples land in a scaled body.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // method resolution only; std shadows it when linked
use num_traits::Float as _;

use crate::body::{self, ConvexBody, GAUGE_TOL};
use crate::rng::{self, tag};
use crate::{Error, Result};

pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgaussConfig {
    pub directions: usize,
    /// Points in the geometric threshold grid over `[0.1σ, 5σ]`.
    pub thresholds: usize,
    /// Exceedances a `(θ, t)` cell needs before it counts.
    pub min_exceedances: usize,
    /// Also run the cosh test with `σ = ŝ`.
    pub laplace: bool,
    pub seed: u64,
}

impl Default for SubgaussConfig {
    fn default() -> Self {
        SubgaussConfig {
            directions: 256,
            thresholds: 32,
            min_exceedances: 20,
            laplace: true,
            seed: 0,
        }
    }
}

impl SubgaussConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgaussReport {
    pub s_hat: f64,
    pub directions: usize,
    pub samples: usize,
    /// The cell attaining `s_hat`; empty when no cell qualified.
    pub worst_direction: Vec<f64>,
    pub worst_threshold: f64,
    pub laplace_beta: Option<f64>,
    pub seed: u64,
}

fn check_samples(samples: &[Vec<f64>]) -> Result<usize> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "subgaussian checks need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let d = samples[0].len();
    if d == 0 || samples.iter().any(|s| s.len() != d) {
        return Err(Error::Contract("samples must be nonempty vectors of equal length".into()));
    }
    Ok(d)
}

/// `count` uniform unit vectors in `ℝ^d`.
pub fn random_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, tag::DIRECTIONS, 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = vec![0.0; d];
        rng::fill_gaussian(&mut rng, &mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(v.iter().map(|x| x / norm).collect());
        }
    }
    out
}

fn project(samples: &[Vec<f64>], theta: &[f64]) -> Vec<f64> {
    samples
        .iter()
        .map(|x| x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>().abs())
        .collect()
}

/// `t / √(2 ln(2/p̂))` for the tail `p̂ = Pr[|⟨X, θ⟩| ≥ t]`, or `None` when
/// fewer than `min_exceedances` samples reach `t`.
pub fn tail_candidate(samples: &[Vec<f64>], theta: &[f64], t: f64, min_exceedances: usize) -> Option<f64> {
    let hits = project(samples, theta).iter().filter(|&&p| p >= t).count();
    candidate(t, hits, samples.len(), min_exceedances)
}

fn candidate(t: f64, hits: usize, n: usize, min_exceedances: usize) -> Option<f64> {
    if hits < min_exceedances.max(1) {
        return None;
    }
    let p = hits as f64 / n as f64;
    Some(t / (2.0 * (2.0 / p).ln()).sqrt())
}

/// Largest `t/√(2 ln(2/p̂))` over random directions and a geometric grid of
/// thresholds scaled to each direction's root mean square.
pub fn estimate_subgaussian(samples: &[Vec<f64>], cfg: &SubgaussConfig) -> Result<SubgaussReport> {
    let d = check_samples(samples)?;
    if cfg.directions == 0 || cfg.thresholds < 2 {
        return Err(Error::Precondition("need at least one direction and two thresholds".into()));
    }
    let n = samples.len();
    let ratio = (50.0f64).powf(1.0 / (cfg.thresholds - 1) as f64);
    let log_ratio = ratio.ln();
    let mut best: Option<(f64, usize, f64)> = None;
    let directions = random_directions(d, cfg.directions, cfg.seed);
    let mut counts = vec![0usize; cfg.thresholds];

    for (k, theta) in directions.iter().enumerate() {
        let proj = project(samples, theta);
        let sigma = (proj.iter().map(|p| p * p).sum::<f64>() / n as f64).sqrt();
        if !(sigma > 0.0) {
            continue;
        }
        let grid: Vec<f64> = (0..cfg.thresholds).map(|j| 0.1 * sigma * ratio.powi(j as i32)).collect();
        counts.iter_mut().for_each(|c| *c = 0);
        // Bucket every projection by the largest grid point it reaches.
        for &p in &proj {
            if p < grid[0] {
                continue;
            }
            let mut j = (((p / grid[0]).ln() / log_ratio).floor() as usize).min(cfg.thresholds - 1);
            while j > 0 && p < grid[j] {
                j -= 1;
            }
            while j + 1 < cfg.thresholds && p >= grid[j + 1] {
                j += 1;
            }
            counts[j] += 1;
        }
        let mut hits = 0;
        for j in (0..cfg.thresholds).rev() {
            hits += counts[j];
            if let Some(s) = candidate(grid[j], hits, n, cfg.min_exceedances) {
                if best.is_none_or(|(b, _, _)| s > b) {
                    best = Some((s, k, grid[j]));
                }
            }
        }
    }

    let (s_hat, worst_direction, worst_threshold) = match best {
        Some((s, k, t)) => (s, directions[k].clone(), t),
        None => (0.0, Vec::new(), 0.0),
    };
    let laplace_beta = if cfg.laplace && s_hat > 0.0 {
        Some(laplace_certificate(samples, cfg.directions, s_hat, cfg.seed)?.beta)
    } else {
        None
    };
    Ok(SubgaussReport {
        s_hat,
        directions: cfg.directions,
        samples: n,
        worst_direction,
        worst_threshold,
        laplace_beta,
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceCertificate {
    /// `max_w Ê[cosh⟨w, X⟩] / exp(‖σw‖²/2)`.
    pub beta: f64,
    /// `σ·√(log₂ max(β, 1) + 1)`.
    pub implied_s: f64,
    /// Some magnitude was reduced to keep `cosh` finite.
    pub clipped: bool,
}

pub const LAPLACE_MAGNITUDES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const COSH_ARG_LIMIT: f64 = 700.0;

/// Cosh test over `directions` random directions and `‖w‖ ∈ {1/4, …, 4}/σ`.
pub fn laplace_certificate(samples: &[Vec<f64>], directions: usize, sigma: f64, seed: u64) -> Result<LaplaceCertificate> {
    let d = check_samples(samples)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Precondition(format!("σ guess must be positive, got {sigma}")));
    }
    if directions == 0 {
        return Err(Error::Precondition("need at least one direction".into()));
    }
    let n = samples.len() as f64;
    let mut beta = f64::NEG_INFINITY;
    let mut clipped = false;
    for theta in random_directions(d, directions, seed) {
        let proj: Vec<f64> = project(samples, &theta);
        let max_proj = proj.iter().copied().fold(0.0, f64::max);
        for &mag in &LAPLACE_MAGNITUDES {
            let mut w = mag / sigma;
            if w * max_proj > COSH_ARG_LIMIT {
                w = COSH_ARG_LIMIT / max_proj;
                clipped = true;
            }
            let mean = proj.iter().map(|p| (w * p).cosh()).sum::<f64>() / n;
            let ratio = mean / (0.5 * (sigma * w).powi(2)).exp();
            beta = beta.max(ratio);
        }
    }
    if clipped {
        log::warn!("cosh test clipped magnitudes to keep arguments below {COSH_ARG_LIMIT}");
    }
    Ok(LaplaceCertificate {
        beta,
        implied_s: sigma * (beta.max(1.0).log2() + 1.0).sqrt(),
        clipped,
    })
}

const SYMMETRY_PROBES: usize = 1000;

fn check_symmetric(body: &ConvexBody, seed: u64) -> Result<()> {
    let bad = body::symmetry_violations(body, SYMMETRY_PROBES, seed);
    if bad > 0 {
        return Err(Error::Precondition(format!(
            "body failed {bad} of {SYMMETRY_PROBES} symmetry probes"
        )));
    }
    Ok(())
}

/// Fraction of samples inside `scale·K` for a symmetric body `K`.
pub fn coverage_test(samples: &[Vec<f64>], body: &ConvexBody, scale: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Precondition("coverage test needs samples".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::Precondition(format!("scale must be positive, got {scale}")));
    }
    check_symmetric(body, 0)?;
    let mut y = vec![0.0; body.dim()];
    let mut inside = 0;
    for x in samples {
        if x.len() != y.len() {
            return Err(Error::Contract("sample dimension differs from the body".into()));
        }
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi / scale;
        }
        if body.contains(&y) {
            inside += 1;
        }
    }
    Ok(inside as f64 / samples.len() as f64)
}

/// Smallest scale `c` with `coverage_test(samples, K, c) ≥ 1/2`: the upper
/// median of the gauge norms of the samples, nudged up by the gauge
/// tolerance so that the median sample itself is covered.
pub fn coverage_crossing_scale(samples: &[Vec<f64>], body: &ConvexBody) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Precondition("coverage test needs samples".into()));
    }
    check_symmetric(body, 0)?;
    let mut gauges = samples
        .iter()
        .map(|x| body::gauge_norm(body, x, GAUGE_TOL).map(|g| g.value))
        .collect::<Result<Vec<f64>>>()?;
    gauges.sort_by(f64::total_cmp);
    Ok(gauges[gauges.len().div_ceil(2) - 1] * (1.0 + GAUGE_TOL))
}
