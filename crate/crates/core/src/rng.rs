//! Seeded, counter-based random streams.
//!
//! Every consumer derives a ChaCha8 generator from `(seed, tag, index)`: the
//! seed and tag pick the key, the index picks the stream. Restart `r` of the
//! walk uses stream `r`, barycenter call `i` of a recentering run uses a
//! sub-seed derived from index `i`, and so on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

pub(crate) mod tag {
    pub const WALK: u64 = 0x5741_4c4b;
    pub const MEASURE: u64 = 0x4d45_4153;
    pub const BARYCENTER: u64 = 0x4241_5259;
    pub const RECENTER: u64 = 0x5245_4345;
    pub const PROBE: u64 = 0x5052_4f42;
    pub const DIRECTIONS: u64 = 0x4449_5245;
    pub const ASYM: u64 = 0x4153_594d;
    pub const BODY_CENTRIC: u64 = 0x424f_4459;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for stream `index` of the key derived from `(seed, tag)`.
pub fn stream(seed: u64, tag: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
    rng.set_stream(index);
    rng
}

/// A fresh seed for a nested consumer; distinct `(tag, index)` give unrelated seeds.
pub fn sub_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)).wrapping_add(splitmix64(index)))
}

pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = StandardNormal.sample(rng);
    }
}

/// Uniform `±1` entries, 64 signs per generator call.
pub fn fill_rademacher<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for chunk in out.chunks_mut(64) {
        let bits: u64 = rng.random();
        for (j, x) in chunk.iter_mut().enumerate() {
            *x = if (bits >> j) & 1 == 1 { 1.0 } else { -1.0 };
        }
    }
}
