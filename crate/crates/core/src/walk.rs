//! The subgaussian coloring walk.
//!
//! Starting from the certificate `χ(0) = λ`, every step adds `γ·U r` where
//! `r` is a uniform sign vector and `UUᵀ = Σ` is a vector-Komlós matrix with
//! unit diagonal on the active coordinates and zero elsewhere. A coordinate
//! freezes once `|χ_i| ≥ 1 − δ`; zero rows of `U` keep it fixed from then on.
//! When every coordinate is frozen after `T` steps the signs of `χ(T)` are
//! returned, otherwise the walk restarts on a fresh random stream.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // method resolution only; std shadows it when linked
use num_traits::Float as _;

use crate::komlos::solve_komlos;
use crate::linalg::Mat;
use crate::rng::{self, tag};
use crate::zonotope::VectorSystem;
use crate::{Error, Result, Vect};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    /// Step size, freeze threshold and step budget from the analysis.
    Paper,
    /// `δ = 0.1`, `γ = min(δ/(2√n), 0.05)`, `T = ⌈8/γ²⌉`.
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub gamma: f64,
    pub delta: f64,
    pub steps: u64,
    pub mode: WalkMode,
    pub max_restarts: usize,
    pub seed: u64,
}

pub const DEFAULT_MAX_RESTARTS: usize = 64;

/// Parameters for `n` vectors.
///
/// Paper mode: `γ = 2·log₂(2n)/n^{5/2}`, `δ = 2·√(2·ln 2·log₂(2n))/n`,
/// `T = ⌈2/γ²⌉·⌈log₂(2n)⌉`. For small `n` these are degenerate (`δ ≥ 1`
/// freezes everything at once); practical mode is meant for that range.
pub fn walk_params(n: usize, mode: WalkMode) -> WalkParams {
    let nf = n.max(1) as f64;
    let (gamma, delta, steps) = match mode {
        WalkMode::Paper => {
            let log = (2.0 * nf).log2();
            let gamma = 2.0 * log / nf.powf(2.5);
            let delta = 2.0 * (2.0 * core::f64::consts::LN_2 * log).sqrt() / nf;
            let steps = (2.0 / (gamma * gamma)).ceil() * log.ceil();
            (gamma, delta, steps as u64)
        }
        WalkMode::Practical => {
            let delta = 0.1;
            let gamma = (delta / (2.0 * nf.sqrt())).min(0.05);
            (gamma, delta, (8.0 / (gamma * gamma)).ceil() as u64)
        }
    };
    WalkParams {
        gamma,
        delta,
        steps,
        mode,
        max_restarts: DEFAULT_MAX_RESTARTS,
        seed: 0,
    }
}

impl WalkParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_restarts(mut self, max_restarts: usize) -> Self {
        self.max_restarts = max_restarts;
        self
    }

    /// Checks the practical-mode requirement `γ√n < δ < 1`, under which a
    /// frozen coordinate cannot be pushed past `±1`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.gamma > 0.0) || self.steps == 0 {
            return Err(Error::Precondition("walk needs a positive step size and budget".into()));
        }
        if self.mode == WalkMode::Practical {
            let reach = self.gamma * (n.max(1) as f64).sqrt();
            if !(reach < self.delta && self.delta < 1.0) {
                return Err(Error::Precondition(format!(
                    "practical walk needs γ√n < δ < 1, got γ√n = {reach}, δ = {}",
                    self.delta
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace {
    pub chi: Vec<f64>,
    /// Steps executed in the successful attempt; the walk stops early once
    /// every coordinate is frozen, since the remaining steps cannot move it.
    pub steps_taken: u64,
    pub restarts: usize,
    /// How often `Σ` was rebuilt (it depends only on the active set).
    pub sigma_recomputes: usize,
    /// `Vχ − t`.
    pub residual: Vect,
}

/// One executed step, as seen by an observer.
#[derive(Debug)]
pub struct StepView<'a> {
    pub attempt: usize,
    pub step: u64,
    pub before: &'a [f64],
    pub after: &'a [f64],
    pub active: &'a [usize],
}

/// Samples a coloring of `sys`; requires `‖v_i‖ ≤ 1`.
pub fn sample_coloring(sys: &VectorSystem, params: &WalkParams) -> Result<WalkTrace> {
    sample_coloring_observed(sys, params, |_| {})
}

/// As [`sample_coloring`], calling `observe` after every executed step.
pub fn sample_coloring_observed(
    sys: &VectorSystem,
    params: &WalkParams,
    mut observe: impl FnMut(&StepView<'_>),
) -> Result<WalkTrace> {
    let n = sys.len();
    params.validate(n)?;
    let max_norm = sys.max_norm();
    if max_norm > 1.0 + 1e-10 {
        return Err(Error::Precondition(format!("walk needs ‖v_i‖ ≤ 1, got {max_norm}")));
    }
    let threshold = 1.0 - params.delta;
    let step_cap = params.gamma * (n.max(1) as f64).sqrt() * (1.0 + 1e-12);
    let mut sigma_recomputes = 0;
    let mut signs = vec![0.0; n];

    for attempt in 0..=params.max_restarts {
        let mut rng = rng::stream(params.seed, tag::WALK, attempt as u64);
        let mut chi: Vec<f64> = sys.lambda().iter().copied().collect();
        let mut next = chi.clone();
        let mut active: Vec<usize> = (0..n).filter(|&i| chi[i].abs() < threshold).collect();
        let mut cached: Option<(Vec<usize>, Mat)> = None;
        let mut steps_taken = 0;

        for step in 1..=params.steps {
            if active.is_empty() {
                break;
            }
            let u = match &cached {
                Some((set, u)) if *set == active => u,
                _ => {
                    let mut alpha = vec![0.0; n];
                    for &i in &active {
                        alpha[i] = 1.0;
                    }
                    let sol = solve_komlos(sys.vectors(), &alpha)?;
                    sigma_recomputes += 1;
                    &cached.insert((active.clone(), sol.u)).1
                }
            };
            rng::fill_rademacher(&mut rng, &mut signs);
            let increment = u * Vect::from_column_slice(&signs) * params.gamma;

            for i in 0..n {
                let d = increment[i];
                if chi[i].abs() >= threshold {
                    if d != 0.0 {
                        return Err(Error::Invariant(format!(
                            "frozen coordinate {i} received increment {d:e}"
                        )));
                    }
                    next[i] = chi[i];
                    continue;
                }
                if d.abs() > step_cap {
                    return Err(Error::Invariant(format!(
                        "step {d:e} on coordinate {i} exceeds γ√n = {step_cap:e}"
                    )));
                }
                next[i] = chi[i] + d;
                if next[i].abs() > 1.0 + 1e-9 {
                    return Err(Error::Invariant(format!(
                        "coordinate {i} left [-1, 1]: {}",
                        next[i]
                    )));
                }
            }
            observe(&StepView {
                attempt,
                step,
                before: &chi,
                after: &next,
                active: &active,
            });
            core::mem::swap(&mut chi, &mut next);
            active.retain(|&i| chi[i].abs() < threshold);
            steps_taken = step;
        }

        if chi.iter().all(|c| c.abs() >= threshold) {
            let chi: Vec<f64> = chi.iter().map(|&c| if c >= 0.0 { 1.0 } else { -1.0 }).collect();
            let residual = sys.residual(&chi);
            return Ok(WalkTrace {
                chi,
                steps_taken,
                restarts: attempt,
                sigma_recomputes,
                residual,
            });
        }
        log::debug!("walk attempt {attempt} ended with {} active coordinates", active.len());
    }
    Err(Error::RestartBudget(params.max_restarts))
}
