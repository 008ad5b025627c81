//! Full colorings for arbitrary convex bodies of Gaussian measure `≥ 1/2`.
//!
//! [`color_asymmetric`] recenters, then hands the symmetrized slice through
//! the recentered point to a symmetric-body strategy (by default the
//! subgaussian walk). [`color_body_centric`] avoids random colorings
//! altogether: it alternates recentering with a step to the closest facet of
//! the current face until it reaches a vertex. Both accept a vertex only if
//! the body's oracle contains it, so every returned coloring is certified.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
#[allow(unused_imports)] // method resolution only; std shadows it when linked
use num_traits::Float as _;

use crate::body::{self, ConvexBody, MeasureEstimate, DEFAULT_PAOURIS_BETA};
use crate::error::FailureCounts;
use crate::recenter::{recenter, recenter_from, RecenterParams, RecenterResult};
use crate::rng::{self, tag};
use crate::special::normal_quantile;
use crate::walk::{sample_coloring, walk_params, WalkMode};
use crate::zonotope::{FaceState, VectorSystem};
use crate::{Error, Result, Vect};

/// Tolerance for the vertex and bookkeeping checks on accepted points.
pub const VERTEX_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_RESTARTS: usize = 64;
const SYMMETRY_PROBES: usize = 1000;

/// A coloring algorithm for symmetric bodies.
pub trait SymmetricColoring {
    /// Largest side length `2‖v_i‖` the strategy accepts for `n` vectors.
    fn side_length_bound(&self, n: usize) -> f64;

    /// A candidate coloring of `sys`. The caller checks membership, so the
    /// strategy only needs to land in `body` with constant probability.
    fn color(&self, sys: &VectorSystem, body: &ConvexBody, seed: u64) -> Result<Vec<f64>>;
}

/// The subgaussian walk as a symmetric strategy: sample one coloring and
/// return it. Accepts side lengths up to `min(2c/√(ln n), 2)`; the cap keeps
/// `‖v_i‖ ≤ 1` for the walk when `ln n < c²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkStrategy {
    pub c: f64,
    pub mode: WalkMode,
}

impl Default for WalkStrategy {
    fn default() -> Self {
        WalkStrategy { c: 1.0, mode: WalkMode::Practical }
    }
}

impl SymmetricColoring for WalkStrategy {
    fn side_length_bound(&self, n: usize) -> f64 {
        let ln = (n.max(1) as f64).ln();
        if ln <= 0.0 {
            2.0
        } else {
            (2.0 * self.c / ln.sqrt()).min(2.0)
        }
    }

    fn color(&self, sys: &VectorSystem, _body: &ConvexBody, seed: u64) -> Result<Vec<f64>> {
        let params = walk_params(sys.len(), self.mode).with_seed(seed);
        Ok(sample_coloring(sys, &params)?.chi)
    }
}

/// Side lengths `2‖v_i‖` of the parallelepiped.
fn max_side_length(sys: &VectorSystem) -> f64 {
    2.0 * sys.max_norm()
}

fn warn_on_small_measure(body: &ConvexBody, samples: usize, seed: u64) -> Result<Option<MeasureEstimate>> {
    if samples == 0 {
        return Ok(None);
    }
    let est = body::gaussian_measure(body, samples, seed)?;
    if est.p_hat < 0.5 - 3.0 * est.ci_halfwidth {
        log::warn!(
            "body measure estimate {:.4} ± {:.4} is below 1/2; expect restarts",
            est.p_hat,
            est.ci_halfwidth
        );
    }
    Ok(Some(est))
}

/// Checks that `point` is `Vχ − t` for a sign vector `χ` and lies in `body`.
fn certify_vertex(sys: &VectorSystem, body: &ConvexBody, chi: &[f64], point: &Vect) -> bool {
    if chi.iter().any(|&c| c != 1.0 && c != -1.0) {
        return false;
    }
    let residual = sys.residual(chi);
    let scale = 1.0 + sys.shift().norm() + sys.max_norm() * sys.len() as f64;
    (residual - point).norm() <= VERTEX_TOL * scale && body.contains(point.as_slice())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymPipelineConfig {
    /// Scale between the face and the symmetric problem, `4(1 + π√(8 ln 2))`.
    pub alpha: f64,
    /// Recentering accuracy, `1/(32√(2π))`.
    pub delta_rc: f64,
    pub epsilon_rc: f64,
    pub max_outer_restarts: usize,
    pub seed: u64,
    pub paouris_beta: f64,
    /// Samples for the advisory measure estimate; 0 skips it.
    pub measure_samples: usize,
}

impl AsymPipelineConfig {
    pub fn new(seed: u64) -> Self {
        AsymPipelineConfig {
            alpha: 4.0 * (1.0 + PI * (8.0 * LN_2).sqrt()),
            delta_rc: 1.0 / (32.0 * (2.0 * PI).sqrt()),
            epsilon_rc: 0.25,
            max_outer_restarts: DEFAULT_MAX_RESTARTS,
            seed,
            paouris_beta: DEFAULT_PAOURIS_BETA,
            measure_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AsymOutcome {
    pub chi: Vec<f64>,
    /// `Vχ − t`, inside the body.
    pub vertex: Vect,
    /// The accepted recentering run.
    pub recenter: RecenterResult,
    /// Outer attempts used, including the accepted one.
    pub attempts: usize,
    pub failures: FailureCounts,
    pub measure: Option<MeasureEstimate>,
}

/// Colors `sys` against an arbitrary body by recentering and calling `strategy`
/// on the symmetrized slice through the recentered point.
pub fn color_asymmetric(
    body: &ConvexBody,
    sys: &VectorSystem,
    strategy: &dyn SymmetricColoring,
    cfg: &AsymPipelineConfig,
) -> Result<AsymOutcome> {
    if body.dim() != sys.dim() {
        return Err(Error::Contract(format!(
            "body of dimension {} for vectors in dimension {}",
            body.dim(),
            sys.dim()
        )));
    }
    let bound = strategy.side_length_bound(sys.len()) / cfg.alpha;
    let side = max_side_length(sys);
    if side > bound {
        return Err(Error::Precondition(format!(
            "side length {side} exceeds the strategy bound {bound}"
        )));
    }
    let measure = warn_on_small_measure(body, cfg.measure_samples, rng::sub_seed(cfg.seed, tag::MEASURE, 0))?;

    let mut failures = FailureCounts::default();
    for attempt in 0..cfg.max_outer_restarts {
        let seed = rng::sub_seed(cfg.seed, tag::ASYM, attempt as u64);
        let params = RecenterParams::new(cfg.delta_rc, cfg.epsilon_rc, seed).with_beta(cfg.paouris_beta);
        let rc = match recenter(body, sys, &params) {
            Ok(rc) if rc.is_ok() => rc,
            Ok(rc) => {
                log::debug!("attempt {attempt}: recentering failed with {:?}", rc.status);
                failures.recenter_fail += 1;
                continue;
            }
            Err(Error::RejectionExhausted { .. }) => {
                failures.rejection_exhausted += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let face = &rc.face;
        let chi = if face.is_vertex() {
            face.coefficients().to_vec()
        } else {
            let local = face.local_system(sys, cfg.alpha)?;
            let slice = body::restrict(body, face.basis(), face.q().as_slice())?;
            let sym = body::symmetrize(&slice).scaled(cfg.alpha)?;
            let probe_seed = rng::sub_seed(seed, tag::PROBE, 0);
            let asym = body::symmetry_violations(&sym, SYMMETRY_PROBES, probe_seed);
            if asym != 0 {
                return Err(Error::Invariant(format!(
                    "symmetrized slice failed {asym} of {SYMMETRY_PROBES} symmetry probes"
                )));
            }
            let z = match strategy.color(&local, &sym, rng::sub_seed(seed, tag::WALK, 0)) {
                Ok(z) => z,
                Err(e) if e.is_budget_exhaustion() => {
                    failures.strategy_exhausted += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let pairs: Vec<(usize, f64)> = face.active().iter().copied().zip(z).collect();
            crate::zonotope::lift(&face.coloring(), &pairs)?
        };
        let vertex = sys.residual(&chi);
        if !certify_vertex(sys, body, &chi, &vertex) || !lands_on_vertex(face, &vertex) {
            failures.rejected_vertex += 1;
            continue;
        }
        return Ok(AsymOutcome {
            chi,
            vertex,
            recenter: rc,
            attempts: attempt + 1,
            failures,
            measure,
        });
    }
    Err(Error::PipelineExhausted { attempts: cfg.max_outer_restarts, failures })
}

/// Whether `point` is a vertex of `P` on the face: all active dual
/// coordinates of `point − q` land on `±1`.
fn lands_on_vertex(face: &FaceState, point: &Vect) -> bool {
    let d = face.dual_coordinates(&(point - face.q()));
    face.active()
        .iter()
        .enumerate()
        .all(|(j, &i)| ((face.coefficients()[i] + d[j]).abs() - 1.0).abs() <= VERTEX_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyCentricConfig {
    /// Rescaling after the first recentering, `1 + π√(8 ln 2) + 4π√(ln 2)`.
    pub beta: f64,
    /// Half the admissible side length, `min(v₀, 1/(10√(ln 2n)))`.
    pub alpha_n: f64,
    /// Recentering accuracy, `min(η₀, 1/(32√(2π)), 1/(14 c₀ n))`.
    pub eta_n: f64,
    /// `1/Φ⁻¹(0.6)`.
    pub c0: f64,
    pub v0: f64,
    pub eta0: f64,
    /// Recentering failure probability, `1/(2(n+1))`.
    pub epsilon_rc: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub paouris_beta: f64,
    /// Samples for the advisory measure estimate; 0 skips it.
    pub measure_samples: usize,
}

pub const DEFAULT_V0: f64 = 0.1;

impl BodyCentricConfig {
    /// Parameters for `n` vectors with `v₀ = 0.1` and `η₀ = 1/(10c₀)`.
    pub fn new(n: usize, seed: u64) -> Self {
        let c0 = 1.0 / normal_quantile(0.6);
        Self::with_constants(n, seed, DEFAULT_V0, 1.0 / (10.0 * c0))
    }

    pub fn with_constants(n: usize, seed: u64, v0: f64, eta0: f64) -> Self {
        let nf = n.max(1) as f64;
        let c0 = 1.0 / normal_quantile(0.6);
        BodyCentricConfig {
            beta: 1.0 + PI * (8.0 * LN_2).sqrt() + 4.0 * PI * LN_2.sqrt(),
            alpha_n: v0.min(1.0 / (10.0 * (2.0 * nf).ln().sqrt())),
            eta_n: eta0.min(1.0 / (32.0 * (2.0 * PI).sqrt())).min(1.0 / (14.0 * c0 * nf)),
            c0,
            v0,
            eta0,
            epsilon_rc: 1.0 / (2.0 * (nf + 1.0)),
            max_restarts: DEFAULT_MAX_RESTARTS,
            seed,
            paouris_beta: DEFAULT_PAOURIS_BETA,
            measure_samples: 10_000,
        }
    }
}

/// One stage of the body-centric descent.
#[derive(Debug, Clone, PartialEq)]
pub enum DescentStep {
    /// A recentering run; `scaled` is false for the first stage on `K`, `P`.
    Recenter {
        scaled: bool,
        dim_before: usize,
        dim_after: usize,
        iterations: usize,
        barycenter_norm: f64,
    },
    /// A move to the closest facet point, fixing `index` to `sign`.
    NearestFacet { index: usize, sign: f64, distance: f64, dim_after: usize },
}

#[derive(Debug, Clone)]
pub struct BodyCentricOutcome {
    pub chi: Vec<f64>,
    /// `Vχ − t = q + q̄/β`, inside the body.
    pub vertex: Vect,
    /// Stages of the accepted attempt.
    pub trace: Vec<DescentStep>,
    /// Face dimensions lost in the accepted attempt, over all stages.
    pub descents: usize,
    pub attempts: usize,
    pub failures: FailureCounts,
    pub measure: Option<MeasureEstimate>,
}

enum Attempt {
    Done(Vec<f64>, Vect, Vec<DescentStep>, usize),
    Retry,
}

/// Deterministic (given the seed) coloring by recentering and nearest-facet
/// descent.
pub fn color_body_centric(body: &ConvexBody, sys: &VectorSystem, cfg: &BodyCentricConfig) -> Result<BodyCentricOutcome> {
    if body.dim() != sys.dim() {
        return Err(Error::Contract(format!(
            "body of dimension {} for vectors in dimension {}",
            body.dim(),
            sys.dim()
        )));
    }
    let side = max_side_length(sys);
    if side > 2.0 * cfg.alpha_n * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "side length {side} exceeds 2α_n = {}",
            2.0 * cfg.alpha_n
        )));
    }
    let measure = warn_on_small_measure(body, cfg.measure_samples, rng::sub_seed(cfg.seed, tag::MEASURE, 1))?;

    let mut failures = FailureCounts::default();
    for attempt in 0..cfg.max_restarts {
        let seed = rng::sub_seed(cfg.seed, tag::BODY_CENTRIC, attempt as u64);
        match body_centric_attempt(body, sys, cfg, seed, &mut failures) {
            Ok(Attempt::Done(chi, vertex, trace, descents)) => {
                return Ok(BodyCentricOutcome {
                    chi,
                    vertex,
                    trace,
                    descents,
                    attempts: attempt + 1,
                    failures,
                    measure,
                })
            }
            Ok(Attempt::Retry) => {}
            Err(Error::RejectionExhausted { .. }) => failures.rejection_exhausted += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::PipelineExhausted { attempts: cfg.max_restarts, failures })
}

fn body_centric_attempt(
    body: &ConvexBody,
    sys: &VectorSystem,
    cfg: &BodyCentricConfig,
    seed: u64,
    failures: &mut FailureCounts,
) -> Result<Attempt> {
    let params = |salt: u64| {
        RecenterParams::new(cfg.eta_n, cfg.epsilon_rc, rng::sub_seed(seed, tag::RECENTER, salt))
            .with_beta(cfg.paouris_beta)
    };
    let mut trace = Vec::new();
    let start_dim = FaceState::at_origin(sys)?.dim();
    let first = recenter(body, sys, &params(0))?;
    trace.push(DescentStep::Recenter {
        scaled: false,
        dim_before: start_dim,
        dim_after: first.face.dim(),
        iterations: first.iterations,
        barycenter_norm: first.barycenter_norm,
    });
    if !first.is_ok() {
        failures.recenter_fail += 1;
        return Ok(Attempt::Retry);
    }
    let mut descents = first.descents;
    let q = first.q.clone();

    // β((K − q) ∩ W) against β(F_P(q) − q): the same face coefficients on the
    // vectors βv_i, whose parallelepiped is β(P − q).
    let scaled_sys = sys.scaled(cfg.beta).with_lambda(first.face.coefficients().to_vec())?;
    let scaled_body = body.clone().shifted(q.iter().copied().collect())?.scaled(cfg.beta)?;
    let mut face = FaceState::new(&scaled_sys, &first.face.coloring())?;

    for round in 1u64.. {
        let dim_before = face.dim();
        let rc = recenter_from(&scaled_body, &scaled_sys, face, &params(round))?;
        trace.push(DescentStep::Recenter {
            scaled: true,
            dim_before,
            dim_after: rc.face.dim(),
            iterations: rc.iterations,
            barycenter_norm: rc.barycenter_norm,
        });
        if !rc.is_ok() {
            failures.recenter_fail += 1;
            return Ok(Attempt::Retry);
        }
        descents += rc.descents;
        face = rc.face;
        if face.dim() == 0 {
            break;
        }
        let bp = face.min_norm_boundary_point()?;
        let next = face.descend(&scaled_sys, &bp.point)?;
        descents += face.dim() - next.dim();
        trace.push(DescentStep::NearestFacet {
            index: bp.index,
            sign: bp.sign,
            distance: bp.point.norm(),
            dim_after: next.dim(),
        });
        face = next;
        if face.dim() == 0 {
            break;
        }
    }

    let chi = face.signs().expect("loop ends on a vertex");
    let point = &q + face.q() / cfg.beta;
    if !certify_vertex(sys, body, &chi, &point) {
        failures.rejected_vertex += 1;
        return Ok(Attempt::Retry);
    }
    let vertex = sys.residual(&chi);
    Ok(Attempt::Done(chi, vertex, trace, descents))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn asymmetric_constants() {
        let cfg = AsymPipelineConfig::new(0);
        assert!((cfg.alpha - 33.591_541_415_980_87).abs() < 1e-9, "{}", cfg.alpha);
        assert!((cfg.delta_rc - 0.012_466_946_262_544_77).abs() < 1e-12, "{}", cfg.delta_rc);
        assert_eq!(cfg.epsilon_rc, 0.25);
    }

    #[test]
    fn body_centric_constants() {
        let cfg = BodyCentricConfig::new(3, 0);
        assert!((cfg.c0 - 3.947_153_875_542_746).abs() < 1e-9, "{}", cfg.c0);
        assert!((cfg.eta0 - 0.025_334_710_313_579_98).abs() < 1e-12);
        assert!((cfg.beta - 18.860_075_154_496_54).abs() < 1e-12, "{}", cfg.beta);
        assert!((cfg.alpha_n - 1.0 / (10.0 * 6f64.ln().sqrt())).abs() < 1e-15);
        assert!((cfg.eta_n - 1.0 / (14.0 * cfg.c0 * 3.0)).abs() < 1e-15);
        assert_eq!(cfg.epsilon_rc, 0.125);
        let big = BodyCentricConfig::new(1, 0);
        assert_eq!(big.alpha_n, 0.1);
    }

    #[test]
    fn walk_strategy_bound() {
        let s = WalkStrategy::default();
        assert_eq!(s.side_length_bound(1), 2.0);
        assert_eq!(s.side_length_bound(2), 2.0);
        assert!((s.side_length_bound(100) - 2.0 / 100f64.ln().sqrt()).abs() < 1e-15);
    }

    fn short_system(n: usize, m: usize, len: f64, seed: u64) -> VectorSystem {
        let mut r = rng::stream(seed, 99, 0);
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut v = vec![0.0; m];
                rng::fill_gaussian(&mut r, &mut v);
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| x * len / norm).collect()
            })
            .collect();
        VectorSystem::from_columns(m, &cols, vec![0.0; n]).unwrap()
    }

    #[test]
    fn asymmetric_big_ball_accepts_first_attempt() {
        let sys = short_system(4, 4, 0.02, 1);
        let ball = ConvexBody::ball(vec![0.0; 4], 10.0).unwrap();
        let mut cfg = AsymPipelineConfig::new(3);
        cfg.paouris_beta = 0.05;
        let out = color_asymmetric(&ball, &sys, &WalkStrategy::default(), &cfg).unwrap();
        assert_eq!(out.attempts, 1);
        assert_eq!(out.vertex, sys.residual(&out.chi));
    }

    #[test]
    fn asymmetric_zero_vectors() {
        let sys = VectorSystem::new(crate::Mat::zeros(2, 3), vec![0.3, -0.2, 1.0]).unwrap();
        let cube = ConvexBody::cube(2, 1.0).unwrap();
        let out = color_asymmetric(&cube, &sys, &WalkStrategy::default(), &AsymPipelineConfig::new(0)).unwrap();
        assert!(out.chi.iter().all(|c| c.abs() == 1.0));
        assert!(out.vertex.norm() == 0.0);
    }

    #[test]
    fn asymmetric_rejects_long_vectors() {
        let sys = short_system(4, 4, 0.5, 1);
        let r = color_asymmetric(&ConvexBody::whole(4), &sys, &WalkStrategy::default(), &AsymPipelineConfig::new(0));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn body_centric_whole_space_walks_to_a_vertex() {
        let cfg = BodyCentricConfig { paouris_beta: 0.05, ..BodyCentricConfig::new(3, 4) };
        let sys = short_system(3, 3, cfg.alpha_n, 2);
        let out = color_body_centric(&ConvexBody::whole(3), &sys, &cfg).unwrap();
        assert_eq!(out.attempts, 1);
        assert!(out.descents <= 6);
        assert!(matches!(out.trace[0], DescentStep::Recenter { scaled: false, dim_after: 3, .. }));
    }

    #[test]
    fn body_centric_single_vector_interval() {
        let cfg = BodyCentricConfig { paouris_beta: 0.05, ..BodyCentricConfig::new(1, 5) };
        let sys = VectorSystem::from_columns(1, &[vec![0.05]], vec![0.0]).unwrap();
        let k = ConvexBody::box_around(vec![0.2], 0.8).unwrap();
        let a = color_body_centric(&k, &sys, &cfg).unwrap();
        let b = color_body_centric(&k, &sys, &cfg).unwrap();
        assert_eq!(a.chi, b.chi);
        assert!(k.contains(a.vertex.as_slice()));
    }

    #[test]
    fn body_centric_rejects_long_vectors() {
        let cfg = BodyCentricConfig::new(3, 0);
        let sys = short_system(3, 3, 0.2, 2);
        assert!(matches!(
            color_body_centric(&ConvexBody::whole(3), &sys, &cfg),
            Err(Error::Precondition(_))
        ));
    }
}
