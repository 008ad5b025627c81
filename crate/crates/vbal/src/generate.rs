//! Random instance and body generators.

use rand::seq::index;
use vbal_core::rng::{self, sub_seed};
use vbal_core::special::{normal_cdf, normal_quantile};
use vbal_core::{Error, Mat, VectorSystem};

use crate::formats::BodyFile;

const GEN_TAG: u64 = 0x47_454e;

/// Beck–Fiala style columns: `t` distinct random rows equal to `1/√t`.
pub fn gen_beck_fiala(n: usize, m: usize, t: usize, seed: u64) -> Result<VectorSystem, Error> {
    if t == 0 || t > m {
        return Err(Error::Precondition(format!("sparsity must lie in 1..={m}, got {t}")));
    }
    let mut rng = rng::stream(seed, GEN_TAG, 0);
    let value = 1.0 / (t as f64).sqrt();
    let mut v = Mat::zeros(m, n);
    for i in 0..n {
        for row in index::sample(&mut rng, m, t) {
            v[(row, i)] = value;
        }
    }
    VectorSystem::new(v, vec![0.0; n])
}

/// Uniform directions on the sphere, scaled to `norm_bound`.
pub fn gen_komlos(n: usize, m: usize, norm_bound: f64, seed: u64) -> Result<VectorSystem, Error> {
    if m == 0 || !(norm_bound > 0.0 && norm_bound.is_finite()) {
        return Err(Error::Precondition(format!(
            "need m ≥ 1 and a positive norm bound, got m = {m}, bound {norm_bound}"
        )));
    }
    let mut rng = rng::stream(seed, GEN_TAG, 1);
    let mut v = Mat::zeros(m, n);
    let mut col = vec![0.0; m];
    for i in 0..n {
        let norm = loop {
            rng::fill_gaussian(&mut rng, &mut col);
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break norm;
            }
        };
        for (r, x) in col.iter().enumerate() {
            v[(r, i)] = x * norm_bound / norm;
        }
    }
    VectorSystem::new(v, vec![0.0; n])?.with_norm_bound(norm_bound * (1.0 + 1e-12))
}

/// Largest half-width [`gen_cube_body`] will emit.
pub const CUBE_SCALE_CAP: f64 = 1e3;

/// Half-width `a = Φ⁻¹((1 + p^{1/d})/2)` of the cube `[−a, a]^d` of Gaussian
/// measure `p`.
pub fn cube_scale(dim: usize, target: f64) -> Result<f64, Error> {
    if dim == 0 || !(target > 0.0 && target < 1.0) {
        return Err(Error::Precondition(format!(
            "need dim ≥ 1 and a target measure in (0, 1), got dim = {dim}, target {target}"
        )));
    }
    let per_axis = target.powf(1.0 / dim as f64);
    let a = normal_quantile((1.0 + per_axis) / 2.0);
    if !(a.is_finite() && a <= CUBE_SCALE_CAP) {
        return Err(Error::Precondition(format!(
            "target measure {target} needs a cube wider than the cap {CUBE_SCALE_CAP}"
        )));
    }
    Ok(a)
}

pub fn gen_cube_body(dim: usize, target: f64) -> Result<BodyFile, Error> {
    Ok(BodyFile::Cube { scale: cube_scale(dim, target)?, dim, center: None })
}

/// Gaussian measure of `[−a, a]^d`.
pub fn cube_measure(dim: usize, a: f64) -> f64 {
    (2.0 * normal_cdf(a) - 1.0).powi(dim as i32)
}

/// Sub-seed for trial `index` of a generator family.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    sub_seed(seed, GEN_TAG, index)
}
