//! Seeded, stream-splittable randomness.
//!
//! Every sampling phase owns a ChaCha stream derived from a user seed and a
//! small tag tuple, so phases can be reordered or parallelized without
//! changing any drawn value.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// splitmix64 finalizer; decorrelates nearby seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Root stream for a user seed.
pub fn root(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed))
}

/// Independent stream for (seed, tag); tags identify a phase such as
/// (layer, channel).
pub fn derive(seed: u64, tag: &[u64]) -> ChaCha8Rng {
    let mut h = mix(seed);
    for &t in tag {
        h = mix(h ^ t.wrapping_mul(0xa076_1d64_78bd_642f));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Uniform direction on the unit sphere.
pub fn unit_direction<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Uniform point in the axis-aligned cube [-half, half]^dim.
pub fn box_point<R: Rng>(rng: &mut R, dim: usize, half: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(-half..=half))
}
