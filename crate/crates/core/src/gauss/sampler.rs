use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Draws per substream. Fixed so that results do not depend on the thread count.
pub const CHUNK: usize = 1 << 14;

/// Generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a tag into a seed (splitmix64 finalizer) so that independent
/// experiments sharing a user seed draw from unrelated streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fill_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out {
        *v = rng.sample(StandardNormal);
    }
}

/// Splits `count` draws into fixed chunks, runs `body(rng, len)` on each chunk
/// in parallel with its own substream, and folds the results in chunk order.
pub fn par_chunked<A, B, M>(count: usize, seed: u64, body: B, mut merge: M) -> Option<A>
where
    A: Send,
    B: Fn(&mut ChaCha8Rng, usize) -> A + Sync,
    M: FnMut(A, A) -> A,
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(count - c * CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            body(&mut rng, len)
        })
        .collect();
    parts.into_iter().reduce(&mut merge)
}

/// Source of ρ-correlated standard Gaussian pairs, Y = ρX + sqrt(1−ρ²)Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedSampler {
    pub dimension: usize,
    pub rho: f64,
    pub seed: u64,
}

impl CorrelatedSampler {
    pub fn new(dimension: usize, rho: f64, seed: u64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return invalid(format!("correlation {rho} outside [-1, 1]"));
        }
        Ok(Self { dimension, rho, seed })
    }

    /// Sampler for noise time t, i.e. ρ = e^{−t}.
    pub fn for_time(dimension: usize, t: f64, seed: u64) -> Result<Self> {
        if !(t >= 0.0) {
            return invalid(format!("noise time {t} must be non-negative"));
        }
        Self::new(dimension, (-t).exp(), seed)
    }

    /// Copy of this sampler on an unrelated stream family.
    pub fn substream(&self, id: u64) -> Self {
        Self { seed: derive_seed(self.seed, id), ..*self }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, x: &mut [f64], y: &mut [f64]) {
        let s = (1.0 - self.rho * self.rho).max(0.0).sqrt();
        fill_normal(rng, x);
        fill_normal(rng, y);
        for (yi, &xi) in y.iter_mut().zip(x.iter()) {
            *yi = self.rho * xi + s * *yi;
        }
    }

    /// Deterministic parallel fold over `count` pairs.
    pub fn fold<A, I, F, M>(&self, count: usize, init: I, step: F, merge: M) -> Option<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &[f64], &[f64]) + Sync,
        M: FnMut(A, A) -> A,
    {
        let n = self.dimension;
        par_chunked(
            count,
            self.seed,
            |rng, len| {
                let mut acc = init();
                let mut x = vec![0.0; n];
                let mut y = vec![0.0; n];
                for _ in 0..len {
                    self.draw(rng, &mut x, &mut y);
                    step(&mut acc, &x, &y);
                }
                acc
            },
            merge,
        )
    }

    pub fn sample_pairs(&self, count: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        if count == 0 {
            return invalid("sample count must be at least 1");
        }
        Ok(self
            .fold(
                count,
                Vec::new,
                |acc: &mut Vec<(Vec<f64>, Vec<f64>)>, x, y| acc.push((x.to_vec(), y.to_vec())),
                |mut a, mut b| {
                    a.append(&mut b);
                    a
                },
            )
            .unwrap_or_default())
    }
}

/// Deterministic parallel fold over `count` independent standard Gaussian points in R^n.
pub fn fold_points<A, I, F, M>(n: usize, count: usize, seed: u64, init: I, step: F, merge: M) -> Option<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[f64]) + Sync,
    M: FnMut(A, A) -> A,
{
    par_chunked(
        count,
        seed,
        |rng, len| {
            let mut acc = init();
            let mut x = vec![0.0; n];
            for _ in 0..len {
                fill_normal(rng, &mut x);
                step(&mut acc, &x);
            }
            acc
        },
        merge,
    )
}

/// `count` standard Gaussian points in R^n, point-major.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<f64> {
    fold_points(
        n,
        count,
        seed,
        Vec::new,
        |acc: &mut Vec<f64>, x| acc.extend_from_slice(x),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
    .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_one_is_identity() {
        let s = CorrelatedSampler::new(3, 1.0, 5).unwrap();
        for (x, y) in s.sample_pairs(1000).unwrap() {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn rejects_bad_rho() {
        assert!(CorrelatedSampler::new(1, 1.5, 0).is_err());
        assert!(CorrelatedSampler::new(1, f64::NAN, 0).is_err());
    }

    #[test]
    fn empirical_correlation() {
        let n = 1_000_000;
        for rho in [0.0, 0.5, -0.3] {
            let s = CorrelatedSampler::new(2, rho, 11).unwrap();
            let sums = s
                .fold(n, || [0.0f64; 2], |a, x, y| {
                    a[0] += x[0] * y[0];
                    a[1] += x[1] * y[1];
                }, |a, b| [a[0] + b[0], a[1] + b[1]])
                .unwrap();
            for v in sums {
                assert!((v / n as f64 - rho).abs() <= 5.0 / (n as f64).sqrt());
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = CorrelatedSampler::new(2, 0.3, 99).unwrap().sample_pairs(40_000).unwrap();
        let b = CorrelatedSampler::new(2, 0.3, 99).unwrap().sample_pairs(40_000).unwrap();
        assert_eq!(a, b);
        let c = CorrelatedSampler::new(2, 0.3, 100).unwrap().sample_pairs(10).unwrap();
        assert_ne!(a[..10], c[..]);
    }

    #[test]
    fn seeds_mix() {
        assert_ne!(derive_seed(1, 2), derive_seed(2, 1));
        assert_ne!(derive_seed(0, 0), 0);
    }
}
