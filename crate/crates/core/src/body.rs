//! Convex bodies given by membership oracles.
//!
//! [`ConvexBody`] is an immutable expression tree over a few primitive sets.
//! Evaluation is lazy: every constructor is cheap, and membership walks the
//! tree on each query. Nested slices, shifts and scalings are folded into a
//! single affine map by [`restrict`], so repeated descents do not stack up
//! matrix products.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // method resolution only; std shadows it when linked
use num_traits::Float as _;
use rand::Rng;

use crate::linalg::{is_orthonormal, Mat};
use crate::rng::{self, tag};
use crate::{Error, Result};

/// A user-supplied convex set. Implementations must be pure.
pub trait MembershipOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
}

#[derive(Clone)]
pub enum ConvexBody {
    /// All of `ℝ^dim`.
    Whole { dim: usize },
    /// `{x : ⟨normal, x⟩ ≤ offset}`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    /// `center + [−scale, scale]^d`.
    Cube { scale: f64, center: Vec<f64> },
    Intersection(Vec<ConvexBody>),
    /// `K − shift`: holds `x` iff `K` holds `x + shift`.
    Shifted { body: Arc<ConvexBody>, shift: Vec<f64> },
    /// `factor·K`.
    Scaled { body: Arc<ConvexBody>, factor: f64 },
    /// `K ∩ −K`.
    Symmetrized(Arc<ConvexBody>),
    /// `{y : shift + basis·y ∈ K}`.
    Slice {
        body: Arc<ConvexBody>,
        basis: Mat,
        shift: Vec<f64>,
    },
    Oracle(Arc<dyn MembershipOracle>),
}

impl fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Whole { dim } => write!(f, "Whole({dim})"),
            Self::Halfspace { normal, offset } => write!(f, "Halfspace({normal:?} ≤ {offset})"),
            Self::Ball { center, radius } => write!(f, "Ball({center:?}, {radius})"),
            Self::Cube { scale, center } => write!(f, "Cube({scale}, {center:?})"),
            Self::Intersection(parts) => f.debug_tuple("Intersection").field(parts).finish(),
            Self::Shifted { body, shift } => write!(f, "Shifted({body:?}, {shift:?})"),
            Self::Scaled { body, factor } => write!(f, "Scaled({body:?}, {factor})"),
            Self::Symmetrized(body) => write!(f, "Symmetrized({body:?})"),
            Self::Slice { body, basis, .. } => {
                write!(f, "Slice({body:?}, {}×{})", basis.nrows(), basis.ncols())
            }
            Self::Oracle(o) => write!(f, "Oracle(dim {})", o.dim()),
        }
    }
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Contract(format!("{what} has non-finite entries")))
    }
}

impl ConvexBody {
    pub fn whole(dim: usize) -> Self {
        Self::Whole { dim }
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        check_finite("halfspace normal", &normal)?;
        if !offset.is_finite() {
            return Err(Error::Contract("halfspace offset must be finite".into()));
        }
        Ok(Self::Halfspace { normal, offset })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_finite("ball center", &center)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Contract(format!("ball radius must be finite and ≥ 0, got {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    /// `[−scale, scale]^dim`.
    pub fn cube(dim: usize, scale: f64) -> Result<Self> {
        Self::box_around(vec![0.0; dim], scale)
    }

    pub fn box_around(center: Vec<f64>, scale: f64) -> Result<Self> {
        check_finite("cube center", &center)?;
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::Contract(format!("cube scale must be finite and ≥ 0, got {scale}")));
        }
        Ok(Self::Cube { scale, center })
    }

    pub fn intersection(parts: Vec<ConvexBody>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::Contract("intersection of no bodies".into()));
        };
        let d = first.dim();
        if let Some(bad) = parts.iter().find(|p| p.dim() != d) {
            return Err(Error::Contract(format!(
                "intersection mixes dimensions {d} and {}",
                bad.dim()
            )));
        }
        Ok(Self::Intersection(parts))
    }

    /// `self − shift`.
    pub fn shifted(self, shift: Vec<f64>) -> Result<Self> {
        check_finite("shift", &shift)?;
        if shift.len() != self.dim() {
            return Err(Error::Contract(format!(
                "shift of length {} for body of dimension {}",
                shift.len(),
                self.dim()
            )));
        }
        Ok(Self::Shifted { body: Arc::new(self), shift })
    }

    /// `factor·self`, `factor > 0`.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Contract(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self::Scaled { body: Arc::new(self), factor })
    }

    pub fn oracle(o: Arc<dyn MembershipOracle>) -> Self {
        Self::Oracle(o)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Whole { dim } => *dim,
            Self::Halfspace { normal, .. } => normal.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Cube { center, .. } => center.len(),
            Self::Intersection(parts) => parts.first().map_or(0, |p| p.dim()),
            Self::Shifted { shift, .. } => shift.len(),
            Self::Scaled { body, .. } | Self::Symmetrized(body) => body.dim(),
            Self::Slice { basis, .. } => basis.ncols(),
            Self::Oracle(o) => o.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Whole { .. } => true,
            Self::Halfspace { normal, offset } => dot(normal, x) <= *offset,
            Self::Ball { center, radius } => {
                let r2: f64 = center.iter().zip(x).map(|(c, y)| (y - c) * (y - c)).sum();
                r2 <= radius * radius
            }
            Self::Cube { scale, center } => {
                center.iter().zip(x).all(|(c, y)| (y - c).abs() <= *scale)
            }
            Self::Intersection(parts) => parts.iter().all(|p| p.contains(x)),
            Self::Shifted { body, shift } => {
                let y: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a + b).collect();
                body.contains(&y)
            }
            Self::Scaled { body, factor } => {
                let y: Vec<f64> = x.iter().map(|a| a / factor).collect();
                body.contains(&y)
            }
            Self::Symmetrized(body) => {
                if !body.contains(x) {
                    return false;
                }
                let y: Vec<f64> = x.iter().map(|a| -a).collect();
                body.contains(&y)
            }
            Self::Slice { body, basis, shift } => {
                let mut y = shift.clone();
                for (j, &c) in x.iter().enumerate() {
                    if c != 0.0 {
                        for (i, yi) in y.iter_mut().enumerate() {
                            *yi += basis[(i, j)] * c;
                        }
                    }
                }
                body.contains(&y)
            }
            Self::Oracle(o) => o.contains(x),
        }
    }
}

impl MembershipOracle for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }

    fn contains(&self, x: &[f64]) -> bool {
        ConvexBody::contains(self, x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `{y : K(p + B y)}` for an orthonormal `basis` `B`.
pub fn restrict(body: &ConvexBody, basis: &Mat, shift: &[f64]) -> Result<ConvexBody> {
    let m = body.dim();
    if basis.nrows() != m || shift.len() != m {
        return Err(Error::Contract(format!(
            "restriction of a {m}-dimensional body with a {}×{} basis and shift of length {}",
            basis.nrows(),
            basis.ncols(),
            shift.len()
        )));
    }
    check_finite("slice shift", shift)?;
    if !is_orthonormal(basis, 1e-10) {
        return Err(Error::Precondition("slice basis is not orthonormal".into()));
    }
    Ok(affine_slice(body, basis.clone(), shift.to_vec()))
}

// Folds slice/shift/scale wrappers into one affine map `y ↦ shift + basis·y`.
fn affine_slice(body: &ConvexBody, basis: Mat, shift: Vec<f64>) -> ConvexBody {
    match body {
        ConvexBody::Slice { body: inner, basis: b0, shift: p0 } => {
            let shift: Vec<f64> = (b0 * nalgebra::DVector::from_vec(shift))
                .iter()
                .zip(p0)
                .map(|(a, b)| a + b)
                .collect();
            affine_slice(inner, b0 * basis, shift)
        }
        ConvexBody::Shifted { body: inner, shift: p0 } => {
            let shift = shift.iter().zip(p0).map(|(a, b)| a + b).collect();
            affine_slice(inner, basis, shift)
        }
        ConvexBody::Scaled { body: inner, factor } => {
            let shift = shift.iter().map(|a| a / factor).collect();
            affine_slice(inner, basis / *factor, shift)
        }
        ConvexBody::Whole { .. } => ConvexBody::Whole { dim: basis.ncols() },
        _ => ConvexBody::Slice { body: Arc::new(body.clone()), basis, shift },
    }
}

/// `K ∩ −K`.
pub fn symmetrize(body: &ConvexBody) -> ConvexBody {
    match body {
        ConvexBody::Symmetrized(_) | ConvexBody::Whole { .. } => body.clone(),
        _ => ConvexBody::Symmetrized(Arc::new(body.clone())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureEstimate {
    pub p_hat: f64,
    pub samples: usize,
    /// 95% normal-approximation half-width `1.96·√(p̂(1−p̂)/samples)`.
    pub ci_halfwidth: f64,
    pub seed: u64,
}

impl MeasureEstimate {
    fn from_counts(hits: usize, samples: usize, seed: u64) -> Self {
        let p_hat = hits as f64 / samples as f64;
        MeasureEstimate {
            p_hat,
            samples,
            ci_halfwidth: 1.96 * (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
            seed,
        }
    }
}

pub const MIN_MEASURE_SAMPLES: usize = 100;

/// Monte-Carlo estimate of the standard Gaussian measure of `body`.
pub fn gaussian_measure(body: &ConvexBody, samples: usize, seed: u64) -> Result<MeasureEstimate> {
    if samples < MIN_MEASURE_SAMPLES {
        return Err(Error::Precondition(format!(
            "measure estimate needs at least {MIN_MEASURE_SAMPLES} samples, got {samples}"
        )));
    }
    let mut rng = rng::stream(seed, tag::MEASURE, 0);
    let mut x = vec![0.0; body.dim()];
    let mut hits = 0;
    for _ in 0..samples {
        rng::fill_gaussian(&mut rng, &mut x);
        if body.contains(&x) {
            hits += 1;
        }
    }
    Ok(MeasureEstimate::from_counts(hits, samples, seed))
}

/// Accuracy target for [`barycenter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycenterRequest {
    pub delta: f64,
    pub epsilon: f64,
    /// Constant in the sample count `N = ⌈(β/δ)²·ln²(e/ε)·d⌉`.
    pub paouris_beta: f64,
}

pub const DEFAULT_PAOURIS_BETA: f64 = 3.0;

impl BarycenterRequest {
    pub fn new(delta: f64, epsilon: f64) -> Self {
        BarycenterRequest { delta, epsilon, paouris_beta: DEFAULT_PAOURIS_BETA }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.paouris_beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Precondition(format!("δ must be positive, got {}", self.delta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Precondition(format!("ε must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.paouris_beta > 0.0 && self.paouris_beta.is_finite()) {
            return Err(Error::Precondition("sample-count constant must be positive".into()));
        }
        Ok(())
    }

    /// Number of averaged points `N` in dimension `d`.
    pub fn sample_count(&self, d: usize) -> usize {
        let l = (core::f64::consts::E / self.epsilon).ln();
        let r = self.paouris_beta / self.delta;
        (r * r * l * l * d as f64).ceil() as usize
    }

    /// Rejection attempts per point, `⌈log₂(2N/ε)⌉`.
    pub fn attempts(&self, n: usize) -> usize {
        (2.0 * n as f64 / self.epsilon).log2().ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterEstimate {
    pub b_hat: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub samples_used: usize,
    /// Gaussian draws that fell outside the body.
    pub rejection_failures: usize,
}

/// Estimates the barycenter of the Gaussian measure restricted to `body` by
/// averaging `N` rejection samples. Needs `γ(K) ≥ 1/2`; a point that misses
/// `K` on all of its attempts is reported as an error.
pub fn barycenter(body: &ConvexBody, req: &BarycenterRequest, seed: u64) -> Result<BarycenterEstimate> {
    req.validate()?;
    let d = body.dim();
    let n = req.sample_count(d);
    let attempts = req.attempts(n);
    let mut rng = rng::stream(seed, tag::BARYCENTER, 0);
    let mut x = vec![0.0; d];
    let mut sum = vec![0.0; d];
    let mut rejected = 0;
    for index in 0..n {
        let mut accepted = false;
        for _ in 0..attempts {
            rng::fill_gaussian(&mut rng, &mut x);
            if body.contains(&x) {
                accepted = true;
                break;
            }
            rejected += 1;
        }
        if !accepted {
            return Err(Error::RejectionExhausted { index, attempts });
        }
        for (s, v) in sum.iter_mut().zip(&x) {
            *s += v;
        }
    }
    let scale = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    Ok(BarycenterEstimate {
        b_hat: sum.iter().map(|s| s * scale).collect(),
        delta: req.delta,
        epsilon: req.epsilon,
        samples_used: n,
        rejection_failures: rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gauge {
    pub value: f64,
    /// The ray `{s·x : s ≥ 0}` never leaves the body; `value` is then 0.
    pub unbounded: bool,
}

pub const GAUGE_TOL: f64 = 1e-8;
const GAUGE_CAP_EXP: i32 = 64;

/// Whether `0` and the probes `±tol·e_i` all lie in `body`.
pub fn origin_is_interior(body: &ConvexBody, tol: f64) -> bool {
    let d = body.dim();
    let mut x = vec![0.0; d];
    if !body.contains(&x) {
        return false;
    }
    for i in 0..d {
        for s in [tol, -tol] {
            x[i] = s;
            if !body.contains(&x) {
                return false;
            }
        }
        x[i] = 0.0;
    }
    true
}

/// `‖x‖_K = inf{s ≥ 0 : x ∈ sK}` to relative accuracy `tol`.
pub fn gauge_norm(body: &ConvexBody, x: &[f64], tol: f64) -> Result<Gauge> {
    if x.len() != body.dim() {
        return Err(Error::Contract(format!(
            "point of length {} for body of dimension {}",
            x.len(),
            body.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition("gauge tolerance must be positive".into()));
    }
    if !origin_is_interior(body, tol) {
        return Err(Error::OriginNotInterior);
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(Gauge { value: 0.0, unbounded: false });
    }
    let mut y = vec![0.0; x.len()];
    let mut inside = |s: f64| {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi / s;
        }
        body.contains(&y)
    };
    let cap = 2f64.powi(GAUGE_CAP_EXP);
    let (mut lo, mut hi) = if inside(1.0) {
        let mut hi = 1.0;
        loop {
            let s = hi * 0.5;
            if s < 1.0 / cap {
                return Ok(Gauge { value: 0.0, unbounded: true });
            }
            if !inside(s) {
                break (s, hi);
            }
            hi = s;
        }
    } else {
        let mut lo = 1.0;
        loop {
            let s = lo * 2.0;
            if s > cap {
                return Err(Error::Numerical("gauge ray never re-enters the body".into()));
            }
            if inside(s) {
                break (lo, s);
            }
            lo = s;
        }
    };
    // The bracket satisfies `0 < lo < hi ≤ 2·lo`, so this is a relative stop.
    while hi - lo > tol * lo {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Gauge { value: 0.5 * (lo + hi), unbounded: false })
}

/// First `count` standard Gaussian draws that land in `body`, giving up after
/// `max_draws` draws in total.
pub fn gaussian_points_in<R: Rng + ?Sized>(
    body: &ConvexBody,
    count: usize,
    max_draws: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut x = vec![0.0; body.dim()];
    for _ in 0..max_draws {
        if out.len() == count {
            break;
        }
        rng::fill_gaussian(rng, &mut x);
        if body.contains(&x) {
            out.push(x.clone());
        }
    }
    out
}

/// Midpoint test for user-supplied oracles: draws `pairs` pairs of Gaussian
/// points inside `body` and counts midpoints that fall outside.
pub fn convexity_violations(body: &ConvexBody, pairs: usize, seed: u64) -> usize {
    let mut rng = rng::stream(seed, tag::PROBE, 0);
    let points = gaussian_points_in(body, 2 * pairs, 200 * pairs.max(1), &mut rng);
    points
        .chunks_exact(2)
        .filter(|p| {
            let mid: Vec<f64> = p[0].iter().zip(&p[1]).map(|(a, b)| 0.5 * (a + b)).collect();
            !body.contains(&mid)
        })
        .count()
}

/// Gaussian probes `x` on which `K(x) ≠ K(−x)`.
pub fn symmetry_violations(body: &ConvexBody, probes: usize, seed: u64) -> usize {
    let mut rng = rng::stream(seed, tag::PROBE, 1);
    let mut x = vec![0.0; body.dim()];
    let mut bad = 0;
    for _ in 0..probes {
        rng::fill_gaussian(&mut rng, &mut x);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if body.contains(&x) != body.contains(&neg) {
            bad += 1;
        }
    }
    bad
}
