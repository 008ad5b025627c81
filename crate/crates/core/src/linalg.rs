//! Dense linear-algebra helpers shared by the geometric modules.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SVD};

pub type Mat = DMatrix<f64>;
pub type Vect = DVector<f64>;

/// Singular values below this count as zero wherever rank is tested.
pub const RANK_TOL: f64 = 1e-10;

pub fn select_columns(v: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(v.nrows(), idx.len(), |r, c| v[(r, idx[c])])
}

/// Singular values (any order) and the matching right singular vectors as
/// columns of a `k × k` matrix, for an `m × k` input. Wide inputs are padded
/// with zero rows so that the full right basis, kernel included, is returned.
pub fn right_singular(a: &Mat) -> (Vec<f64>, Mat) {
    let (m, k) = a.shape();
    let padded = if m < k {
        let mut p = Mat::zeros(k, k);
        p.view_mut((0, 0), (m, k)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, 0)
        .expect("SVD iteration is unbounded and cannot fail");
    let v_t = svd.v_t.expect("right singular vectors were requested");
    (svd.singular_values.iter().copied().collect(), v_t.transpose())
}

/// Smallest singular value of `a` and a unit right singular vector for it.
/// For a matrix with no columns this is `(∞, [])`.
pub fn smallest_singular(a: &Mat) -> (f64, Vect) {
    if a.ncols() == 0 {
        return (f64::INFINITY, Vect::zeros(0));
    }
    let (sigma, v) = right_singular(a);
    let (j, s) = sigma
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty");
    (s, v.column(j).into_owned())
}

/// Orthonormal basis (as columns) of the column span of `a`, via
/// column-pivoted QR. Directions with `|R_jj| ≤ RANK_TOL` are dropped.
pub fn orthonormal_basis(a: &Mat) -> Mat {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return Mat::zeros(m, 0);
    }
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let q = qr.q();
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&j| r[(j, j)].abs() > RANK_TOL)
        .count();
    q.columns(0, rank).into_owned()
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eigen_range(a: &Mat) -> (f64, f64) {
    if a.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        })
}

pub fn is_orthonormal(basis: &Mat, tol: f64) -> bool {
    let gram = basis.transpose() * basis;
    let k = gram.nrows();
    (0..k).all(|i| (0..k).all(|j| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() <= tol))
}
