//! Recentering: moving the origin of `P` towards the Gaussian barycenter of
//! the body.
//!
//! Each round estimates the barycenter `b′` of the slice `(K − q) ∩ W`, stops
//! once `‖b′‖ ≤ δ/2`, and otherwise moves `q` to `q + b′`, or to the point
//! where the ray towards `b′` leaves the current face, after which the face
//! (and `W`) shrinks.

use alloc::vec::Vec;
#[allow(unused_imports)] // method resolution only; std shadows it when linked
use num_traits::Float as _;

use crate::body::{self, BarycenterRequest, ConvexBody, MeasureEstimate, DEFAULT_PAOURIS_BETA};
use crate::rng::{self, tag};
use crate::zonotope::{FaceState, VectorSystem};
use crate::{Error, Result, Vect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecenterParams {
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Sample-count constant handed to every barycenter estimate.
    pub paouris_beta: f64,
    /// Samples for the before/after measure estimates; 0 skips them.
    pub measure_samples: usize,
}

impl RecenterParams {
    pub fn new(delta: f64, epsilon: f64, seed: u64) -> Self {
        RecenterParams {
            delta,
            epsilon,
            seed,
            paouris_beta: DEFAULT_PAOURIS_BETA,
            measure_samples: 0,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.paouris_beta = beta;
        self
    }

    pub fn with_measure_samples(mut self, samples: usize) -> Self {
        self.measure_samples = samples;
        self
    }

    /// Iteration cap `⌈24/δ²⌉ + n`.
    pub fn max_iterations(&self, n: usize) -> usize {
        (24.0 / (self.delta * self.delta)).ceil() as usize + n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailReason {
    /// The current point is not in `K`.
    OriginOutside,
    /// The barycenter estimate fell outside the slice.
    BarycenterOutside,
    LoopExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecenterStatus {
    Ok,
    Fail(FailReason),
}

#[derive(Debug, Clone)]
pub struct RecenterResult {
    /// The final point of `P`, in the coordinates of `P`.
    pub q: Vect,
    /// Minimal face of `P` at `q`.
    pub face: FaceState,
    /// Barycenter estimates made.
    pub iterations: usize,
    /// Measure of `K ∩ W` at the starting face.
    pub measure_before: Option<MeasureEstimate>,
    /// Measure of `(K − q) ∩ W` at the final face.
    pub measure_after: Option<MeasureEstimate>,
    /// `‖b′‖` of the last estimate, 0 if none was needed.
    pub barycenter_norm: f64,
    pub status: RecenterStatus,
    /// Face dimension lost on the way.
    pub descents: usize,
}

impl RecenterResult {
    pub fn is_ok(&self) -> bool {
        self.status == RecenterStatus::Ok
    }
}

/// Recenters `body` against the parallelepiped of `sys`, starting from the
/// minimal face through the origin.
pub fn recenter(body: &ConvexBody, sys: &VectorSystem, params: &RecenterParams) -> Result<RecenterResult> {
    let face = FaceState::at_origin(sys)?;
    recenter_from(body, sys, face, params)
}

/// As [`recenter`], starting from an arbitrary face of `sys`'s parallelepiped.
///
/// A rejection-exhausted barycenter estimate is returned as an error; the
/// other failure branches come back as [`RecenterStatus::Fail`].
pub fn recenter_from(
    body: &ConvexBody,
    sys: &VectorSystem,
    face: FaceState,
    params: &RecenterParams,
) -> Result<RecenterResult> {
    if body.dim() != sys.dim() {
        return Err(Error::Contract(alloc::format!(
            "body of dimension {} for vectors in dimension {}",
            body.dim(),
            sys.dim()
        )));
    }
    BarycenterRequest::new(params.delta, params.epsilon)
        .with_beta(params.paouris_beta)
        .validate()?;

    let cap = params.max_iterations(sys.len());
    let request = BarycenterRequest::new(params.delta / 6.0, params.epsilon / cap as f64)
        .with_beta(params.paouris_beta);
    let measure = |face: &FaceState, salt: u64| -> Result<Option<MeasureEstimate>> {
        if params.measure_samples == 0 {
            return Ok(None);
        }
        let slice = body::restrict(body, face.basis(), face.q().as_slice())?;
        let seed = rng::sub_seed(params.seed, tag::MEASURE, salt);
        body::gaussian_measure(&slice, params.measure_samples, seed).map(Some)
    };

    let measure_before = measure(&face, 0)?;
    let mut result = RecenterResult {
        q: face.q().clone(),
        face,
        iterations: 0,
        measure_before,
        measure_after: None,
        barycenter_norm: 0.0,
        status: RecenterStatus::Fail(FailReason::LoopExhausted),
        descents: 0,
    };
    let finish = |mut result: RecenterResult, status| -> Result<RecenterResult> {
        result.status = status;
        result.q = result.face.q().clone();
        if status == RecenterStatus::Ok {
            result.measure_after = measure(&result.face, 1)?;
        }
        Ok(result)
    };

    if !body.contains(result.face.q().as_slice()) {
        return finish(result, RecenterStatus::Fail(FailReason::OriginOutside));
    }
    for i in 0..cap {
        if result.face.dim() == 0 {
            // The slice is the single point q.
            result.barycenter_norm = 0.0;
            return finish(result, RecenterStatus::Ok);
        }
        let face = &result.face;
        let slice = body::restrict(body, face.basis(), face.q().as_slice())?;
        let seed = rng::sub_seed(params.seed, tag::RECENTER, i as u64);
        let est = body::barycenter(&slice, &request, seed)?;
        result.iterations += 1;
        let b = Vect::from_vec(est.b_hat);
        result.barycenter_norm = b.norm();
        if !slice.contains(b.as_slice()) {
            return finish(result, RecenterStatus::Fail(FailReason::BarycenterOutside));
        }
        if result.barycenter_norm <= params.delta / 2.0 {
            return finish(result, RecenterStatus::Ok);
        }
        let step = face.to_ambient(&b);
        let exit = face.ray_exit(&step)?;
        let s = if exit.hit { step * exit.lambda } else { step };
        let next = face.descend(sys, &s)?;
        result.descents += face.dim() - next.dim();
        log::trace!(
            "recenter round {i}: ‖b′‖ = {:.3e}, dim {} -> {}",
            result.barycenter_norm,
            face.dim(),
            next.dim()
        );
        result.face = next;
        if !body.contains(result.face.q().as_slice()) {
            return finish(result, RecenterStatus::Fail(FailReason::OriginOutside));
        }
    }
    finish(result, RecenterStatus::Fail(FailReason::LoopExhausted))
}

/// Dual coordinates of `q` relative to the face: every fixed coefficient is
/// `±1` and every active one lies in `(−1, 1)`.
pub fn face_is_consistent(face: &FaceState) -> bool {
    let c = face.coefficients();
    let active: Vec<usize> = face.active().to_vec();
    c.iter()
        .enumerate()
        .all(|(i, v)| if active.contains(&i) { v.abs() < 1.0 } else { v.abs() == 1.0 })
}
