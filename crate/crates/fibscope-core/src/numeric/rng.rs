//! Deterministic substreams for parallel sampling.
//!
//! Every sampling attempt draws from its own ChaCha stream derived from
//! `(seed, purpose, radius index, attempt index)`, so results do not
//! depend on thread count or scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keep streams of different pipeline stages disjoint.
#[derive(Clone, Copy, Debug)]
pub enum StreamKind {
    MilnorSample = 1,
    AsymptoticTarget = 2,
    KinfSample = 3,
    K0Probe = 4,
    LeadingRank = 5,
    Generic = 6,
}

/// A ChaCha8 generator on the substream addressed by
/// `(kind, radius_index, attempt)`.
pub fn substream(seed: u64, kind: StreamKind, radius_index: usize, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = ((kind as u64) << 56) | ((radius_index as u64 & 0xffff) << 40) | (attempt & 0xff_ffff_ffff);
    rng.set_stream(stream);
    rng
}

/// Standard normal via Box-Muller; keeps the dependency surface small
/// and the stream layout obvious.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// Uniform point on the unit sphere of R^dim.
pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point in the closed ball of the given radius in R^dim.
pub fn ball_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let dir = unit_vector(rng, dim);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|x| x * r).collect()
}
