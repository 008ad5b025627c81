//! Vector systems and the geometry of the parallelepiped `P = Σ[−v_i, v_i] − t`.
//!
//! A point of `P` is tracked through its coefficient vector `c ∈ [−1, 1]^n`
//! (the point is `Σ c_i v_i − t`). Coordinates strictly inside `(−1, 1)` are
//! *active*; their vectors span the subspace `W` of the minimal face, and the
//! dual basis of the active vectors gives closed forms for facet distances
//! and ray exits.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{self, Mat, Vect, RANK_TOL};
use crate::{Error, Result};

/// Coordinates within this distance of `±1` count as fixed.
pub const FRACTIONAL_TOL: f64 = 1e-9;
/// Dual coordinates within this distance of `±1` count as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-8;
const LAMBDA_SLACK: f64 = 1e-12;

/// Vectors `v_1, …, v_n ∈ ℝ^m` (matrix columns) with a certificate
/// `λ ∈ [−1, 1]^n` for the shift `t = Vλ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSystem {
    vectors: Mat,
    lambda: Vect,
    shift: Vect,
    norm_bound: Option<f64>,
}

impl VectorSystem {
    pub fn new(vectors: Mat, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != vectors.ncols() {
            return Err(Error::Contract(format!(
                "{} certificate coefficients for {} vectors",
                lambda.len(),
                vectors.ncols()
            )));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition("vector entries must be finite".into()));
        }
        if let Some((i, l)) = lambda
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.abs() <= 1.0 + LAMBDA_SLACK))
        {
            return Err(Error::Precondition(format!(
                "certificate coefficient {i} = {l} lies outside [-1, 1]"
            )));
        }
        let lambda = Vect::from_iterator(lambda.len(), lambda.into_iter().map(|l| l.clamp(-1.0, 1.0)));
        let shift = &vectors * &lambda;
        Ok(Self {
            vectors,
            lambda,
            shift,
            norm_bound: None,
        })
    }

    /// Builds the system from `n` columns of length `m`.
    pub fn from_columns(m: usize, columns: &[Vec<f64>], lambda: Vec<f64>) -> Result<Self> {
        if let Some(i) = columns.iter().position(|c| c.len() != m) {
            return Err(Error::Contract(format!("vector {i} does not have {m} entries")));
        }
        let vectors = Mat::from_fn(m, columns.len(), |r, c| columns[c][r]);
        Self::new(vectors, lambda)
    }

    /// Declares (and checks) an upper bound on every column norm.
    pub fn with_norm_bound(mut self, bound: f64) -> Result<Self> {
        let max = self.max_norm();
        if max > bound * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "column norm {max} exceeds the declared bound {bound}"
            )));
        }
        self.norm_bound = Some(bound);
        Ok(self)
    }

    /// Ambient dimension `m`.
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Number of vectors `n`.
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vect {
        self.vectors.column(i).into_owned()
    }

    pub fn lambda(&self) -> &Vect {
        &self.lambda
    }

    pub fn shift(&self) -> &Vect {
        &self.shift
    }

    pub fn norm_bound(&self) -> Option<f64> {
        self.norm_bound
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.vectors.column(i).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ c_i v_i`.
    pub fn combination(&self, coeffs: &[f64]) -> Vect {
        &self.vectors * Vect::from_column_slice(coeffs)
    }

    /// `Σ χ_i v_i − t`.
    pub fn residual(&self, signs: &[f64]) -> Vect {
        self.combination(signs) - &self.shift
    }

    /// The system `(c·v_i)` with the same certificate, so `t` scales by `c` too.
    pub fn scaled(&self, factor: f64) -> Self {
        let vectors = &self.vectors * factor;
        let shift = &vectors * &self.lambda;
        Self {
            vectors,
            lambda: self.lambda.clone(),
            shift,
            norm_bound: self.norm_bound.map(|b| b * factor.abs()),
        }
    }

    pub fn with_lambda(&self, lambda: Vec<f64>) -> Result<Self> {
        let mut sys = Self::new(self.vectors.clone(), lambda)?;
        sys.norm_bound = self.norm_bound;
        Ok(sys)
    }
}

/// A point `x ∈ [−1, 1]^n` together with its fractional coordinates
/// `A_x = {i : |x_i| < 1 − tol}`. Coordinates within `tol` of `±1` are
/// snapped to `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalColoring {
    x: Vec<f64>,
    active: Vec<usize>,
    tol: f64,
}

impl FractionalColoring {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        Self::with_tol(x, FRACTIONAL_TOL)
    }

    pub fn with_tol(mut x: Vec<f64>, tol: f64) -> Result<Self> {
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0 + tol)) {
            return Err(Error::Contract(format!("coordinate {i} = {v} lies outside [-1, 1]")));
        }
        for v in x.iter_mut() {
            if v.abs() >= 1.0 - tol {
                *v = v.signum();
            }
        }
        let active = (0..x.len()).filter(|&i| x[i].abs() < 1.0).collect();
        Ok(Self { x, active, tol })
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    /// Sorted indices of the fractional coordinates.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// True when every coordinate is `±1`.
    pub fn is_full(&self) -> bool {
        self.active.is_empty()
    }

    fn set(&mut self, i: usize, value: f64) {
        self.x[i] = if value.abs() >= 1.0 - self.tol {
            value.signum()
        } else {
            value
        };
        self.refresh();
    }

    fn refresh(&mut self) {
        for v in self.x.iter_mut() {
            if v.abs() >= 1.0 - self.tol {
                *v = v.signum();
            }
        }
        let x = &self.x;
        self.active = (0..x.len()).filter(|&i| x[i].abs() < 1.0).collect();
    }
}

/// Extends values on the fractional coordinates of `x` to a full vector,
/// copying the fixed coordinates of `x`. The indices of `z` must be exactly
/// `A_x`.
pub fn lift(x: &FractionalColoring, z: &[(usize, f64)]) -> Result<Vec<f64>> {
    let mut idx: Vec<usize> = z.iter().map(|&(i, _)| i).collect();
    idx.sort_unstable();
    if idx != x.active {
        return Err(Error::Contract(format!(
            "lift expects values on {:?}, got {:?}",
            x.active, idx
        )));
    }
    if let Some(&(i, v)) = z.iter().find(|(_, v)| !(v.abs() <= 1.0 + x.tol)) {
        return Err(Error::Contract(format!("lifted value {v} at {i} outside [-1, 1]")));
    }
    let mut out = x.x.clone();
    for &(i, v) in z {
        out[i] = v;
    }
    Ok(out)
}

/// Finds `x ∈ [−1, 1]^n` with `Vx = t` whose fractional vectors are linearly
/// independent, starting from the certificate `λ`.
///
/// While the fractional columns are dependent, a unit kernel vector `z` of
/// that submatrix (oriented so its largest entry is positive) is followed in
/// whichever direction reaches a bound first, `+z` on ties, and the
/// coordinate that hits `±1` is fixed.
pub fn reduce_to_independent(sys: &VectorSystem) -> FractionalColoring {
    reduce_observed(sys, |_| {})
}

fn reduce_observed(sys: &VectorSystem, mut observe: impl FnMut(&FractionalColoring)) -> FractionalColoring {
    let mut x = FractionalColoring::new(sys.lambda.iter().copied().collect())
        .expect("certificate lies in [-1, 1]");
    observe(&x);
    loop {
        let active = x.active.clone();
        if active.is_empty() {
            break;
        }
        let sub = linalg::select_columns(&sys.vectors, &active);
        let (sigma, mut z) = linalg::smallest_singular(&sub);
        if sigma > RANK_TOL {
            break;
        }
        let lead = z
            .iter()
            .enumerate()
            .fold(0, |best, (j, v)| if v.abs() > z[best].abs() { j } else { best });
        if z[lead] < 0.0 {
            z.neg_mut();
        }
        // Step length until the first coordinate reaches ±1 moving along dir·z.
        let reach = |dir: f64| -> (f64, usize, f64) {
            let mut best = (f64::INFINITY, usize::MAX, 0.0);
            for (j, &i) in active.iter().enumerate() {
                let rate = dir * z[j];
                if rate == 0.0 {
                    continue;
                }
                let target = rate.signum();
                let mu = (target - x.x[i]) / rate;
                if mu < best.0 {
                    best = (mu, j, target);
                }
            }
            best
        };
        let forward = reach(1.0);
        let backward = reach(-1.0);
        let (dir, (mu, hit, target)) = if backward.0 < forward.0 {
            (-1.0, backward)
        } else {
            (1.0, forward)
        };
        for (j, &i) in active.iter().enumerate() {
            x.x[i] += dir * mu * z[j];
        }
        x.set(active[hit], target);
        observe(&x);
    }
    x
}

/// Dual basis of independent columns: the columns of `V(VᵀV)⁻¹`, which lie in
/// the span of `V` and satisfy `⟨v_i*, v_j⟩ = δ_ij`.
pub fn dual_basis(v_sub: &Mat) -> Result<Mat> {
    if v_sub.ncols() == 0 {
        return Ok(Mat::zeros(v_sub.nrows(), 0));
    }
    let (sigma, _) = linalg::smallest_singular(v_sub);
    if !(sigma > RANK_TOL) {
        return Err(Error::Singular {
            sigma_min: sigma,
            tol: RANK_TOL,
        });
    }
    let gram = v_sub.transpose() * v_sub;
    let inv = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("Gram matrix of independent columns is not positive definite".into()))?
        .inverse();
    Ok(v_sub * inv)
}

/// Closest point of the relative boundary of the current face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    /// The point in ambient coordinates, relative to `q`.
    pub point: Vect,
    /// Vector whose dual coordinate reaches the bound.
    pub index: usize,
    /// The bound reached, `±1`.
    pub sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayExit {
    pub lambda: f64,
    pub hit: bool,
}

/// A point `q = Σ c_i v_i − t` of `P` together with its minimal face: the
/// active set, an orthonormal basis of `W = span(v_i : i active)` and the
/// dual basis of the active vectors. Geometric queries take points relative
/// to `q`, i.e. they live in the face `F_P(q) − q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceState {
    q: Vect,
    coeffs: Vec<f64>,
    active: Vec<usize>,
    basis: Mat,
    duals: Mat,
}

impl FaceState {
    /// The face through `Vx − t`; the fractional vectors of `x` must be independent.
    pub fn new(sys: &VectorSystem, x: &FractionalColoring) -> Result<Self> {
        if x.len() != sys.len() {
            return Err(Error::Contract("coloring length differs from the vector count".into()));
        }
        let q = sys.residual(&x.x);
        Self::build(sys, q, x.x.clone())
    }

    /// The minimal face of `P` containing the origin.
    pub fn at_origin(sys: &VectorSystem) -> Result<Self> {
        Self::new(sys, &reduce_to_independent(sys))
    }

    fn build(sys: &VectorSystem, q: Vect, coeffs: Vec<f64>) -> Result<Self> {
        let active: Vec<usize> = (0..coeffs.len()).filter(|&i| coeffs[i].abs() < 1.0).collect();
        let sub = linalg::select_columns(&sys.vectors, &active);
        let duals = dual_basis(&sub)?;
        let basis = linalg::orthonormal_basis(&sub);
        if basis.ncols() != active.len() {
            return Err(Error::Numerical(format!(
                "basis of {} independent vectors has rank {}",
                active.len(),
                basis.ncols()
            )));
        }
        Ok(Self {
            q,
            coeffs,
            active,
            basis,
            duals,
        })
    }

    pub fn q(&self) -> &Vect {
        &self.q
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Orthonormal basis of `W`, one column per dimension.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Dual vectors `v_i*` of the active vectors, in active order.
    pub fn duals(&self) -> &Mat {
        &self.duals
    }

    /// `dim W`.
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn fixed_signs(&self) -> Vec<(usize, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() >= 1.0)
            .map(|(i, &c)| (i, c))
            .collect()
    }

    pub fn is_vertex(&self) -> bool {
        self.active.is_empty()
    }

    /// The coloring of a vertex face.
    pub fn signs(&self) -> Option<Vec<f64>> {
        self.is_vertex().then(|| self.coeffs.clone())
    }

    pub fn coloring(&self) -> FractionalColoring {
        FractionalColoring::with_tol(self.coeffs.clone(), BOUNDARY_TOL).expect("coefficients stay in [-1, 1]")
    }

    /// `B y` for W-coordinates `y`.
    pub fn to_ambient(&self, y: &Vect) -> Vect {
        &self.basis * y
    }

    /// `Bᵀ s`, the W-coordinates of `s`.
    pub fn to_local(&self, s: &Vect) -> Vect {
        self.basis.transpose() * s
    }

    /// `(⟨v_i*, s⟩)_{i active}`.
    pub fn dual_coordinates(&self, s: &Vect) -> Vect {
        self.duals.transpose() * s
    }

    fn check_in_subspace(&self, s: &Vect) -> Result<()> {
        let residual = (s - &self.basis * (self.basis.transpose() * s)).norm();
        if residual > BOUNDARY_TOL * s.norm().max(1.0) {
            return Err(Error::Contract(format!(
                "direction leaves the face subspace (residual {residual:e})"
            )));
        }
        Ok(())
    }

    /// Whether `q + s` lies in `P`, for `s ∈ W`.
    pub fn contains(&self, s: &Vect, tol: f64) -> bool {
        if self.check_in_subspace(s).is_err() {
            return false;
        }
        let d = self.dual_coordinates(s);
        self.active
            .iter()
            .enumerate()
            .all(|(j, &i)| (self.coeffs[i] + d[j]).abs() <= 1.0 + tol)
    }

    /// A point of minimum Euclidean norm on the relative boundary of
    /// `F_P(q) − q`.
    ///
    /// `q + s ∈ P` exactly when `c_i + ⟨v_i*, s⟩ ∈ [−1, 1]` for every active
    /// `i`, so facet `(i, r)` is the hyperplane `⟨v_i*, s⟩ = r − c_i` and its
    /// closest point is `((r − c_i)/‖v_i*‖²)·v_i*`.
    pub fn min_norm_boundary_point(&self) -> Result<BoundaryPoint> {
        if self.active.is_empty() {
            return Err(Error::DegenerateFace);
        }
        let mut best: Option<(f64, usize, f64)> = None;
        for (j, &i) in self.active.iter().enumerate() {
            let dual_norm = self.duals.column(j).norm();
            for r in [1.0, -1.0] {
                let dist = (r - self.coeffs[i]).abs() / dual_norm;
                if best.is_none_or(|(d, _, _)| dist < d) {
                    best = Some((dist, j, r));
                }
            }
        }
        let (_, j, sign) = best.expect("active set is nonempty");
        let i = self.active[j];
        let dual = self.duals.column(j);
        let point = dual * ((sign - self.coeffs[i]) / dual.norm_squared());

        let d = self.dual_coordinates(&point);
        let on_facet = (self.coeffs[i] + d[j] - sign).abs() <= BOUNDARY_TOL;
        let inside = self
            .active
            .iter()
            .enumerate()
            .all(|(jj, &ii)| (self.coeffs[ii] + d[jj]).abs() <= 1.0 + BOUNDARY_TOL);
        if !(on_facet && inside) {
            return Err(Error::Invariant(format!(
                "closest facet point for vector {i} failed the boundary check"
            )));
        }
        Ok(BoundaryPoint {
            point,
            index: i,
            sign,
        })
    }

    /// How far the ray `μ·b`, `μ ∈ (0, 1]`, stays inside `F_P(q) − q`.
    /// `hit` is set when the ray reaches the boundary at or before `μ = 1`.
    pub fn ray_exit(&self, b: &Vect) -> Result<RayExit> {
        if b.iter().all(|&x| x == 0.0) {
            return Ok(RayExit {
                lambda: 1.0,
                hit: false,
            });
        }
        self.check_in_subspace(b)?;
        let d = self.dual_coordinates(b);
        let mut lambda = f64::INFINITY;
        for (j, &i) in self.active.iter().enumerate() {
            let rate = d[j];
            if rate != 0.0 {
                lambda = lambda.min((rate.signum() - self.coeffs[i]) / rate);
            }
        }
        if lambda > 1.0 {
            return Ok(RayExit {
                lambda: 1.0,
                hit: false,
            });
        }
        let lambda = lambda.max(0.0);
        let exit = b * lambda;
        let de = self.dual_coordinates(&exit);
        let max_coord = self
            .active
            .iter()
            .enumerate()
            .map(|(j, &i)| (self.coeffs[i] + de[j]).abs())
            .fold(0.0, f64::max);
        if (max_coord - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::Invariant(format!(
                "ray exit point has extreme dual coordinate {max_coord}"
            )));
        }
        Ok(RayExit { lambda, hit: true })
    }

    /// Moves the origin to `q + s` and restricts to the minimal face there.
    /// Active coordinates whose new value is within `1e−8` of `±1` become fixed.
    pub fn descend(&self, sys: &VectorSystem, s: &Vect) -> Result<FaceState> {
        self.check_in_subspace(s)?;
        let d = self.dual_coordinates(s);
        let mut coeffs = self.coeffs.clone();
        for (j, &i) in self.active.iter().enumerate() {
            let c = self.coeffs[i] + d[j];
            if !(c.abs() <= 1.0 + BOUNDARY_TOL) {
                return Err(Error::Contract(format!(
                    "step leaves the parallelepiped: coefficient {i} would be {c}"
                )));
            }
            coeffs[i] = if c.abs() >= 1.0 - BOUNDARY_TOL { c.signum() } else { c };
        }
        Self::build(sys, &self.q + s, coeffs)
    }

    /// The face as a square system in W-coordinates: vectors `Bᵀ(scale·v_i)`
    /// for the active `i`, certificate `c_A`. Its parallelepiped is
    /// `scale·(F_P(q) − q)` expressed in the basis of `W`.
    pub fn local_system(&self, sys: &VectorSystem, scale: f64) -> Result<VectorSystem> {
        let sub = linalg::select_columns(&sys.vectors, &self.active) * scale;
        let local = self.basis.transpose() * sub;
        VectorSystem::new(local, self.active.iter().map(|&i| self.coeffs[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn system(m: usize, cols: &[&[f64]], lambda: &[f64]) -> VectorSystem {
        let cols: Vec<Vec<f64>> = cols.iter().map(|c| c.to_vec()).collect();
        VectorSystem::from_columns(m, &cols, lambda.to_vec()).unwrap()
    }

    fn v(x: &[f64]) -> Vect {
        Vect::from_column_slice(x)
    }

    #[test]
    fn lift_substitutes_fractional_coordinates() {
        let x = FractionalColoring::new(vec![1.0, 0.5, -1.0]).unwrap();
        assert_eq!(lift(&x, &[(1, 0.25)]).unwrap(), vec![1.0, 0.25, -1.0]);
        let x = FractionalColoring::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(lift(&x, &[]).unwrap(), vec![1.0, -1.0]);
        let x = FractionalColoring::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(lift(&x, &[(1, -1.0), (0, 1.0)]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn lift_rejects_index_mismatch() {
        let x = FractionalColoring::new(vec![1.0, 0.5, 0.0]).unwrap();
        assert!(matches!(lift(&x, &[(1, 0.0)]), Err(Error::Contract(_))));
        assert!(matches!(lift(&x, &[(0, 0.0), (1, 0.0), (2, 0.0)]), Err(Error::Contract(_))));
    }

    #[test]
    fn fractional_coloring_snaps_near_integral_values() {
        let x = FractionalColoring::new(vec![1.0 - 1e-10, -0.999, -1.0 - 5e-10]).unwrap();
        assert_eq!(x.values(), &[1.0, -0.999, -1.0]);
        assert_eq!(x.active(), &[1]);
        assert!(FractionalColoring::new(vec![1.1]).is_err());
    }

    #[test]
    fn reduce_duplicate_vectors() {
        let sys = system(2, &[&[1.0, 0.0], &[1.0, 0.0]], &[0.5, 0.5]);
        let x = reduce_to_independent(&sys);
        assert_eq!(x.values(), &[1.0, 0.0]);
        assert!((sys.combination(x.values()) - sys.shift()).norm() < 1e-12);
    }

    #[test]
    fn reduce_keeps_independent_certificate() {
        let sys = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.3, -0.7]);
        let x = reduce_to_independent(&sys);
        assert_eq!(x.values(), &[0.3, -0.7]);
        assert_eq!(x.active(), &[0, 1]);
    }

    #[test]
    fn reduce_parallel_vectors_of_different_length() {
        let sys = system(2, &[&[1.0, 0.0], &[2.0, 0.0]], &[0.0, 0.0]);
        let x = reduce_to_independent(&sys);
        // Both kernel-walk exits are reached after the same step; ties go to +z.
        assert!((x.values()[0] - 1.0).abs() < 1e-15);
        assert!((x.values()[1] + 0.5).abs() < 1e-12);
        assert_eq!(x.active(), &[1]);
        assert!(sys.combination(x.values()).norm() < 1e-12);
    }

    #[test]
    fn reduce_never_grows_active_set_and_keeps_target() {
        let sys = system(
            2,
            &[&[1.0, 0.0], &[0.0, 1.0], &[0.6, 0.8], &[-0.3, 0.2], &[0.5, 0.5]],
            &[0.1, -0.2, 0.3, 0.0, -0.4],
        );
        let mut sizes = Vec::new();
        let x = reduce_observed(&sys, |x| {
            sizes.push(x.active().len());
            let err = (sys.combination(x.values()) - sys.shift()).norm();
            assert!(err < 1e-8 * sys.shift().norm() + 1e-10, "drift {err}");
        });
        assert!(sizes.windows(2).all(|w| w[1] < w[0]));
        assert!(x.active().len() <= 2);
        let sub = linalg::select_columns(sys.vectors(), x.active());
        assert!(linalg::smallest_singular(&sub).0 > 1e-10);
    }

    #[test]
    fn dual_basis_examples() {
        let id = Mat::identity(2, 2);
        assert!((dual_basis(&id).unwrap() - &id).norm() < 1e-15);

        let a = Mat::from_column_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let expect = Mat::from_column_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        assert!((dual_basis(&a).unwrap() - expect).norm() < 1e-14);

        let b = Mat::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let duals = dual_basis(&b).unwrap();
        let expect = Mat::from_column_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]);
        assert!((&duals - expect).norm() < 1e-14);
        assert!((duals.transpose() * b - Mat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn dual_basis_rejects_dependent_columns() {
        let a = Mat::from_column_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!(matches!(dual_basis(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn dual_of_dual_is_identity_map() {
        let a = Mat::from_column_slice(3, 3, &[1.0, 0.2, 0.0, 0.5, 1.0, -0.3, 0.1, 0.1, 2.0]);
        let back = dual_basis(&dual_basis(&a).unwrap()).unwrap();
        assert!((back - a).norm() < 1e-7);
    }

    #[test]
    fn closest_boundary_point_of_symmetric_square() {
        let sys = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        let bp = face.min_norm_boundary_point().unwrap();
        assert!((bp.point.norm() - 1.0).abs() < 1e-15);
        assert_eq!((bp.index, bp.sign), (0, 1.0));
    }

    #[test]
    fn closest_boundary_point_of_shifted_square() {
        // P = [-1, 1]^2 - (0.5, 0) = [-1.5, 0.5] x [-1, 1].
        let sys = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.5, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        let bp = face.min_norm_boundary_point().unwrap();
        assert!((bp.point - v(&[0.5, 0.0])).norm() < 1e-15);
        assert_eq!((bp.index, bp.sign), (0, 1.0));
    }

    #[test]
    fn closest_boundary_point_of_skew_parallelogram() {
        let sys = system(2, &[&[1.0, 0.0], &[1.0, 1.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        let bp = face.min_norm_boundary_point().unwrap();
        assert!((bp.point.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((bp.point.clone() - v(&[0.5, -0.5])).norm() < 1e-15 || (bp.point + v(&[0.5, -0.5])).norm() < 1e-15);
        assert_eq!(bp.index, 0);
    }

    #[test]
    fn closest_boundary_point_needs_active_coordinates() {
        let sys = system(1, &[&[1.0]], &[1.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        assert!(face.is_vertex());
        assert_eq!(face.min_norm_boundary_point(), Err(Error::DegenerateFace));
    }

    #[test]
    fn ray_exit_examples() {
        let square = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&square).unwrap();
        assert_eq!(face.ray_exit(&v(&[2.0, 0.0])).unwrap(), RayExit { lambda: 0.5, hit: true });
        assert_eq!(face.ray_exit(&v(&[0.2, 0.2])).unwrap(), RayExit { lambda: 1.0, hit: false });
        assert_eq!(face.ray_exit(&v(&[0.0, 0.0])).unwrap(), RayExit { lambda: 1.0, hit: false });

        let shifted = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.5, 0.0]);
        let face = FaceState::at_origin(&shifted).unwrap();
        let exit = face.ray_exit(&v(&[1.0, 0.0])).unwrap();
        assert!(exit.hit && (exit.lambda - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ray_exit_rejects_direction_outside_face() {
        let sys = system(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        assert!(matches!(face.ray_exit(&v(&[0.0, 0.0, 1.0])), Err(Error::Contract(_))));
    }

    #[test]
    fn descend_onto_facet_of_square() {
        let sys = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        let next = face.descend(&sys, &v(&[1.0, 0.0])).unwrap();
        assert_eq!(next.fixed_signs(), vec![(0, 1.0)]);
        assert_eq!(next.active(), &[1]);
        assert_eq!(next.dim(), 1);
        assert!((next.basis().column(0).into_owned() - v(&[0.0, 1.0])).norm() < 1e-14
            || (next.basis().column(0).into_owned() + v(&[0.0, 1.0])).norm() < 1e-14);
        assert_eq!(next.q(), &v(&[1.0, 0.0]));
    }

    #[test]
    fn descend_by_zero_is_a_no_op() {
        let sys = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.2, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        let next = face.descend(&sys, &v(&[0.0, 0.0])).unwrap();
        assert_eq!(next, face);
    }

    #[test]
    fn descend_onto_closest_facet_of_parallelogram() {
        let sys = system(2, &[&[1.0, 0.0], &[1.0, 1.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        let bp = face.min_norm_boundary_point().unwrap();
        let next = face.descend(&sys, &bp.point).unwrap();
        assert_eq!(next.fixed_signs().len(), 1);
        assert_eq!(next.dim(), 1);
        let d = face.dual_coordinates(&bp.point);
        assert!((d[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn descend_rejects_points_outside() {
        let sys = system(2, &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
        let face = FaceState::at_origin(&sys).unwrap();
        assert!(matches!(face.descend(&sys, &v(&[1.5, 0.0])), Err(Error::Contract(_))));
    }

    #[test]
    fn repeated_closest_facet_descents_reach_a_vertex_in_n_steps() {
        let sys = system(
            3,
            &[&[1.0, 0.1, 0.0], &[0.2, 1.0, 0.3], &[0.0, -0.4, 1.0]],
            &[0.3, -0.1, 0.6],
        );
        let mut face = FaceState::at_origin(&sys).unwrap();
        let mut steps = 0;
        while !face.is_vertex() {
            let dim = face.dim();
            let bp = face.min_norm_boundary_point().unwrap();
            face = face.descend(&sys, &bp.point).unwrap();
            assert!(face.dim() < dim);
            steps += 1;
        }
        assert!(steps <= 3);
        let chi = face.signs().unwrap();
        assert!((sys.residual(&chi) - face.q()).norm() < 1e-12);
    }

    #[test]
    fn system_validation() {
        assert!(VectorSystem::from_columns(1, &[vec![1.0]], vec![1.0 + 1e-13]).is_ok());
        assert!(matches!(
            VectorSystem::from_columns(1, &[vec![1.0]], vec![1.0 + 1e-11]),
            Err(Error::Precondition(_))
        ));
        assert!(VectorSystem::from_columns(2, &[vec![1.0]], vec![0.0]).is_err());
        let sys = VectorSystem::from_columns(2, &[vec![3.0, 4.0]], vec![0.5]).unwrap();
        assert_eq!(sys.shift(), &v(&[1.5, 2.0]));
        assert!(sys.clone().with_norm_bound(4.9).is_err());
        assert!(sys.with_norm_bound(5.0).is_ok());
    }
}
