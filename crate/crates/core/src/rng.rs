//! Deterministic random streams.
//!
//! Every stream is keyed by a master seed plus a path of indices (shard,
//! sweep cell, replicate, ...). Work is cut into fixed-size shards whose
//! results are merged in shard order, so output never depends on how many
//! threads ran the shards.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per Monte-Carlo shard.
pub const SHARD: usize = 1 << 16;

/// Environment variable that caps the worker count.
pub const THREADS_ENV: &str = "SNRMM_THREADS";

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and an index path.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    for &p in path {
        h = mix(h.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(mix(p)));
    }
    h
}

pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}

/// Worker count requested through [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            )),
        },
    }
}

/// Running mean and variance with an order-fixed merge (Chan et al.).
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * (other.count as f64 / n as f64);
        self.m2 += other.m2 + d * d * (self.count as f64 * other.count as f64 / n as f64);
        self.count = n;
    }

    /// Sample variance (n − 1 denominator).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}
