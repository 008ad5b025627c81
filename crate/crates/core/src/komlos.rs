//! A PSD matrix `X` with prescribed diagonal `α` and `VXVᵀ ⪯ I`, built with
//! plain linear algebra, plus the factorization `X = UUᵀ` used by the walk.
//!
//! The construction peels off one column per step. If the remaining columns
//! are dependent, a kernel vector `x` (scaled until some `x_k² = α_k`)
//! contributes `xxᵀ`, which is invisible to `V`. Otherwise, with
//! `B = (VᵀV)⁻¹`, the matrix `βB` (`β = min α_i/B_ii`) contributes
//! `β·V(VᵀV)⁻¹Vᵀ`, a multiple of a projection; since `B_ii ≥ 1/‖v_i‖² ≥ 1`
//! the leftover diagonal `α_i − βB_ii` is at most `max α − β`, and the rest of
//! the budget is handed to the remaining columns after rescaling by
//! `γ = max_i(α_i − βB_ii)`.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // method resolution only; std shadows it when linked
use num_traits::Float as _;

use crate::linalg::{self, Mat, RANK_TOL};
use crate::{Error, Result};

/// Diagonal entries at or below this are treated as zero.
const ALPHA_TOL: f64 = 1e-12;
/// Pivots at or below this end the pivoted Cholesky factorization.
const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KomlosSolution {
    pub x: Mat,
    /// `UUᵀ = X`.
    pub u: Mat,
    pub alpha: Vec<f64>,
    /// Largest eigenvalue of `VXVᵀ`, certified by an eigensolver.
    pub eig_max: f64,
    /// Number of column-removal steps taken by the construction.
    pub steps: usize,
}

/// Builds the vector-Komlós matrix for the columns of `v` (norms at most 1)
/// and the diagonal `alpha ∈ [0, 1]^n`.
pub fn solve_komlos(v: &Mat, alpha: &[f64]) -> Result<KomlosSolution> {
    let n = v.ncols();
    if alpha.len() != n {
        return Err(Error::Contract(format!("{} diagonal entries for {n} vectors", alpha.len())));
    }
    for i in 0..n {
        let norm = v.column(i).norm();
        if !(norm <= 1.0 + 1e-10) {
            return Err(Error::Precondition(format!("vector {i} has norm {norm} > 1")));
        }
    }
    if let Some((i, a)) = alpha
        .iter()
        .enumerate()
        .find(|(_, a)| !(**a >= -ALPHA_TOL && **a <= 1.0 + ALPHA_TOL))
    {
        return Err(Error::Precondition(format!("alpha[{i}] = {a} lies outside [0, 1]")));
    }

    let mut x = Mat::zeros(n, n);
    // Remaining columns and their (rescaled) diagonal targets.
    let mut cols: Vec<usize> = (0..n).filter(|&i| alpha[i] > ALPHA_TOL).collect();
    let mut target: Vec<f64> = cols.iter().map(|&i| alpha[i].min(1.0)).collect();
    // Every later contribution is multiplied by the product of the γ's so far.
    let mut weight = 1.0;
    let mut steps = 0;

    while !cols.is_empty() {
        steps += 1;
        // A coordinate whose budget is used up is removed without contributing.
        if let Some(j) = target.iter().position(|&a| a <= ALPHA_TOL) {
            cols.remove(j);
            target.remove(j);
            continue;
        }
        if cols.len() == 1 {
            let i = cols[0];
            x[(i, i)] += weight * target[0];
            break;
        }
        let sub = linalg::select_columns(v, &cols);
        let (sigma, kernel) = linalg::smallest_singular(&sub);
        let k = if sigma < RANK_TOL {
            // Scale the kernel vector so x_j² ≤ target_j with equality at k.
            let (k, scale) = kernel
                .iter()
                .enumerate()
                .filter(|(_, z)| **z != 0.0)
                .map(|(j, z)| (j, target[j].sqrt() / z.abs()))
                .fold((usize::MAX, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
            let z = kernel * scale;
            for (a, &ia) in cols.iter().enumerate() {
                for (b, &ib) in cols.iter().enumerate() {
                    x[(ia, ib)] += weight * z[a] * z[b];
                }
            }
            for (j, t) in target.iter_mut().enumerate() {
                *t = (*t - z[j] * z[j]).max(0.0);
            }
            k
        } else {
            let gram = sub.transpose() * &sub;
            let b = gram
                .cholesky()
                .ok_or_else(|| Error::Numerical("Gram matrix of independent columns is not positive definite".into()))?
                .inverse();
            let (k, beta) = (0..cols.len())
                .map(|j| (j, target[j] / b[(j, j)]))
                .fold((usize::MAX, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
            for (a, &ia) in cols.iter().enumerate() {
                for (c, &ic) in cols.iter().enumerate() {
                    x[(ia, ic)] += weight * beta * b[(a, c)];
                }
            }
            let leftover: Vec<f64> = (0..cols.len()).map(|j| (target[j] - beta * b[(j, j)]).max(0.0)).collect();
            let gamma = leftover.iter().copied().fold(0.0, f64::max);
            if gamma <= ALPHA_TOL {
                break;
            }
            target = leftover.iter().map(|l| l / gamma).collect();
            weight *= gamma;
            k
        };
        cols.remove(k);
        target.remove(k);
    }

    certify(v, alpha, x, steps)
}

fn certify(v: &Mat, alpha: &[f64], x: Mat, steps: usize) -> Result<KomlosSolution> {
    let asym = (&x - x.transpose()).amax();
    if asym > 1e-10 {
        return Err(Error::Numerical(format!("X is not symmetric (max deviation {asym:e})")));
    }
    let (lo, _) = linalg::sym_eigen_range(&x);
    if lo < -1e-8 {
        return Err(Error::Numerical(format!("X has eigenvalue {lo:e}")));
    }
    if let Some(i) = (0..alpha.len()).find(|&i| (x[(i, i)] - alpha[i]).abs() > 1e-8) {
        return Err(Error::Numerical(format!(
            "X[{i},{i}] = {} but alpha[{i}] = {}",
            x[(i, i)],
            alpha[i]
        )));
    }
    let (_, eig_max) = linalg::sym_eigen_range(&(v * &x * v.transpose()));
    if eig_max > 1.0 + 1e-7 {
        return Err(Error::Numerical(format!("largest eigenvalue of VXVᵀ is {eig_max}")));
    }
    let u = psd_factor(&x)?;
    Ok(KomlosSolution {
        x,
        u,
        alpha: alpha.to_vec(),
        eig_max,
        steps,
    })
}

/// `U` with `UUᵀ = X` for a symmetric PSD `X`.
///
/// Pivoted Cholesky first; if its reconstruction error is too large, a
/// symmetric eigendecomposition with eigenvalues below `1e−10` clamped to
/// zero. Rows of `U` for zero diagonal entries of `X` are exactly zero.
pub fn psd_factor(x: &Mat) -> Result<Mat> {
    let n = x.nrows();
    if x.ncols() != n {
        return Err(Error::Contract("psd_factor needs a square matrix".into()));
    }
    let tol = 1e-7 * (1.0 + x.norm());
    let mut u = pivoted_cholesky(x);
    if (&u * u.transpose() - x).norm() > tol {
        let sym = (x + x.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if lo < -1e-6 {
            return Err(Error::NotPsd(lo));
        }
        let mut scaled = eig.eigenvectors.clone();
        for (j, &e) in eig.eigenvalues.iter().enumerate() {
            let s = if e > PIVOT_TOL { e.sqrt() } else { 0.0 };
            scaled.column_mut(j).scale_mut(s);
        }
        u = scaled;
        let err = (&u * u.transpose() - x).norm();
        if err > tol {
            return Err(Error::Numerical(format!("PSD factor reconstruction error {err:e}")));
        }
    }
    for i in 0..n {
        if x[(i, i)] == 0.0 {
            u.row_mut(i).fill(0.0);
        }
    }
    Ok(u)
}

fn pivoted_cholesky(x: &Mat) -> Mat {
    let n = x.nrows();
    let mut l = Mat::zeros(n, n);
    let mut residual: Vec<f64> = (0..n).map(|i| x[(i, i)]).collect();
    let mut done = alloc::vec![false; n];
    for col in 0..n {
        let Some(p) = (0..n)
            .filter(|&i| !done[i])
            .reduce(|a, b| if residual[b] > residual[a] { b } else { a })
        else {
            break;
        };
        if residual[p] <= PIVOT_TOL {
            break;
        }
        let pivot = residual[p].sqrt();
        done[p] = true;
        l[(p, col)] = pivot;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let mut s = x[(i, p)];
            for c in 0..col {
                s -= l[(i, c)] * l[(p, c)];
            }
            let value = s / pivot;
            l[(i, col)] = value;
            residual[i] -= value * value;
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_vector_takes_alpha() {
        let v = Mat::from_element(1, 1, 0.5);
        let sol = solve_komlos(&v, &[1.0]).unwrap();
        assert_eq!(sol.x[(0, 0)], 1.0);
        assert!((sol.eig_max - 0.25).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_columns_give_identity() {
        let v = Mat::identity(3, 3);
        let sol = solve_komlos(&v, &[1.0, 1.0, 1.0]).unwrap();
        assert!((&sol.x - Mat::identity(3, 3)).norm() < 1e-12);
        assert!(sol.eig_max <= 1.0 + 1e-12);
    }

    #[test]
    fn duplicate_vectors_use_the_kernel() {
        let v = Mat::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let sol = solve_komlos(&v, &[1.0, 1.0]).unwrap();
        let expect = Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((&sol.x - expect).norm() < 1e-12);
        assert!(sol.eig_max.abs() < 1e-12);
    }

    #[test]
    fn zero_alpha_gives_zero_matrix() {
        let v = Mat::from_column_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 0.6, 0.8]);
        let sol = solve_komlos(&v, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(sol.x, Mat::zeros(3, 3));
        assert_eq!(sol.u, Mat::zeros(3, 3));
    }

    #[test]
    fn rejects_long_vectors_and_bad_alpha() {
        let v = Mat::from_element(1, 1, 1.5);
        assert!(matches!(solve_komlos(&v, &[1.0]), Err(Error::Precondition(_))));
        let v = Mat::from_element(1, 1, 1.0);
        assert!(matches!(solve_komlos(&v, &[1.5]), Err(Error::Precondition(_))));
        assert!(matches!(solve_komlos(&v, &[-0.5]), Err(Error::Precondition(_))));
    }

    #[test]
    fn steps_bounded_by_column_count() {
        let v = Mat::from_column_slice(2, 4, &[1.0, 0.0, 0.0, 1.0, 0.6, 0.8, -0.8, 0.6]);
        let sol = solve_komlos(&v, &[1.0, 0.5, 0.7, 0.2]).unwrap();
        assert!(sol.steps <= 4);
        for (i, a) in [1.0, 0.5, 0.7, 0.2].iter().enumerate() {
            assert!((sol.x[(i, i)] - a).abs() < 1e-10);
        }
    }

    #[test]
    fn factor_of_identity() {
        let u = psd_factor(&Mat::identity(3, 3)).unwrap();
        assert_eq!(u, Mat::identity(3, 3));
    }

    #[test]
    fn factor_preserves_zero_rows() {
        let x = Mat::from_diagonal(&crate::Vect::from_vec(vec![1.0, 0.0]));
        let u = psd_factor(&x).unwrap();
        assert_eq!(u, x);
    }

    #[test]
    fn factor_of_rank_one() {
        let x = Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let u = psd_factor(&x).unwrap();
        assert_eq!(u.column(0).as_slice(), &[1.0, -1.0]);
        assert_eq!(u.column(1).as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn factor_rejects_indefinite() {
        let x = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(psd_factor(&x), Err(Error::NotPsd(_))));
    }

    #[test]
    fn factor_tolerates_tiny_negative_eigenvalues() {
        let x = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 - 1e-9]);
        let u = psd_factor(&x).unwrap();
        assert!((&u * u.transpose() - x).norm() < 1e-7);
    }
}
