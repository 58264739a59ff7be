use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::par_chunked;
use crate::ptf::{MeasureVector, PartitionFn, StabEstimate};

use super::{JointDist, ProductTable};

/// A labeling of A^{n_coords}.
pub trait DiscreteStrategy: Send + Sync {
    fn n_coords(&self) -> usize;
    fn k(&self) -> usize;
    fn label(&self, symbols: &[usize]) -> usize;
}

/// A fixed label table over A^n.
#[derive(Debug, Clone)]
pub struct TableStrategy {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub labels: Vec<usize>,
}

impl TableStrategy {
    pub fn new(n: usize, m: usize, k: usize, labels: Vec<usize>) -> Result<Self> {
        check_dim(m.pow(n as u32), labels.len())?;
        if labels.iter().any(|&l| l >= k) {
            return invalid("label out of range");
        }
        Ok(Self { n, m, k, labels })
    }

    pub fn to_table(&self) -> Result<ProductTable> {
        ProductTable::from_labels(self.n, self.m, self.k, &self.labels)
    }
}

impl DiscreteStrategy for TableStrategy {
    fn n_coords(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn label(&self, symbols: &[usize]) -> usize {
        self.labels[symbols.iter().rev().fold(0, |acc, &s| acc * self.m + s)]
    }
}

/// g on R^{n₀} applied to normalized block sums
/// (X₁(x_{b,1}) + … + X₁(x_{b,ℓ}))/√ℓ, one block per Gaussian coordinate.
/// No coordinates are treated as high-influence.
#[derive(Clone)]
pub struct BlockStrategy {
    pub g: Arc<PartitionFn>,
    pub basis_values: Vec<f64>,
    pub ell: usize,
}

impl std::fmt::Debug for BlockStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockStrategy").field("g", &self.g).field("basis_values", &self.basis_values).field("ell", &self.ell).finish()
    }
}

pub fn block_strategy(g: PartitionFn, basis_values: Vec<f64>, ell: usize) -> Result<BlockStrategy> {
    if ell == 0 {
        return invalid("block length must be at least 1");
    }
    if basis_values.is_empty() || basis_values.iter().any(|v| !v.is_finite()) {
        return invalid("basis values must be finite and non-empty");
    }
    Ok(BlockStrategy { g: Arc::new(g), basis_values, ell })
}

impl DiscreteStrategy for BlockStrategy {
    fn n_coords(&self) -> usize {
        self.g.n * self.ell
    }
    fn k(&self) -> usize {
        self.g.k
    }
    fn label(&self, symbols: &[usize]) -> usize {
        let scale = 1.0 / (self.ell as f64).sqrt();
        let z: Vec<f64> = symbols.chunks(self.ell).map(|b| b.iter().map(|&s| self.basis_values[s]).sum::<f64>() * scale).collect();
        self.g.evaluator().label(&z)
    }
}

/// Marginals and agreement of two strategies on i.i.d. coordinate pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteCorr {
    pub marginals_f: MeasureVector,
    pub marginals_g: MeasureVector,
    pub agreement: StabEstimate,
    /// counts[i·k + j] of (f, g) = (i, j).
    pub joint: Vec<u64>,
    pub samples: usize,
}

impl DiscreteCorr {
    pub fn cell(&self, j: usize) -> f64 {
        let k = self.marginals_f.mu.len();
        self.joint[j * k + j] as f64 / self.samples as f64
    }
}

/// Inverse-CDF sampler over the cells of P.
pub(crate) struct PairSampler {
    cdf: Vec<f64>,
    b: usize,
}

impl PairSampler {
    pub(crate) fn new(p: &JointDist) -> Self {
        let mut acc = 0.0;
        let cdf = p
            .rows()
            .iter()
            .flatten()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect();
        Self { cdf, b: p.size_b() }
    }

    pub(crate) fn draw(&self, rng: &mut impl Rng) -> (usize, usize) {
        let u = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let mut i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        // skip zero-mass cells landed on through rounding
        while i > 0 && self.cdf[i] == self.cdf[i - 1] {
            i -= 1;
        }
        (i / self.b, i % self.b)
    }
}

pub fn estimate_discrete_corr(
    f: &dyn DiscreteStrategy,
    g: &dyn DiscreteStrategy,
    p: &JointDist,
    n_coords: usize,
    samples: usize,
    seed: u64,
) -> Result<DiscreteCorr> {
    check_dim(n_coords, f.n_coords())?;
    check_dim(n_coords, g.n_coords())?;
    if f.k() != g.k() {
        return invalid(format!("label counts differ: {} vs {}", f.k(), g.k()));
    }
    if samples == 0 {
        return invalid("need at least one sample");
    }
    let k = f.k();
    let sampler = PairSampler::new(p);
    let joint = par_chunked(
        samples,
        seed,
        |rng, len| {
            let mut xs = vec![0usize; n_coords];
            let mut ys = vec![0usize; n_coords];
            let mut c = vec![0u64; k * k];
            for _ in 0..len {
                for (x, y) in xs.iter_mut().zip(ys.iter_mut()) {
                    (*x, *y) = sampler.draw(rng);
                }
                c[f.label(&xs) * k + g.label(&ys)] += 1;
            }
            c
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
            a
        },
    )
    .ok_or_else(|| Error::Numeric("no samples drawn".into()))?;
    let mf: Vec<u64> = (0..k).map(|i| (0..k).map(|j| joint[i * k + j]).sum()).collect();
    let mg: Vec<u64> = (0..k).map(|j| (0..k).map(|i| joint[i * k + j]).sum()).collect();
    let agree: u64 = (0..k).map(|j| joint[j * k + j]).sum();
    Ok(DiscreteCorr {
        marginals_f: MeasureVector::from_counts(&mf, samples),
        marginals_g: MeasureVector::from_counts(&mg, samples),
        // t is not meaningful for discrete sources
        agreement: StabEstimate::from_count(agree, samples, 0.0, seed),
        joint,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::correlation_basis;

    #[test]
    fn diagonal_identity() {
        let p = JointDist::diagonal(3).unwrap();
        let f = TableStrategy::new(1, 3, 3, vec![0, 1, 2]).unwrap();
        let r = estimate_discrete_corr(&f, &f, &p, 1, 10_000, 1).unwrap();
        assert_eq!(r.agreement.value, 1.0);
    }

    #[test]
    fn independent_agreement() {
        let p = JointDist::independent(&[0.3, 0.7], &[0.6, 0.4]).unwrap();
        let f = TableStrategy::new(1, 2, 2, vec![0, 1]).unwrap();
        let r = estimate_discrete_corr(&f, &f, &p, 1, 200_000, 2).unwrap();
        let want = 0.3 * 0.6 + 0.7 * 0.4;
        assert!((r.agreement.value - want).abs() <= 3.0 * r.agreement.std_error);
    }

    #[test]
    fn single_block_is_sign_lattice() {
        let p = JointDist::binary_symmetric(0.0).unwrap();
        let c = correlation_basis(&p).unwrap();
        let s = block_strategy(PartitionFn::threshold(1, 0.5), c.x_fn(1), 1).unwrap();
        assert_eq!(s.n_coords(), 1);
        let lab: Vec<usize> = (0..2).map(|a| s.label(&[a])).collect();
        // X₁ = ±1, threshold at 0.5 separates the two symbols
        assert_ne!(lab[0], lab[1]);
        let constant = block_strategy(PartitionFn::callback(1, 2, |_| 1), c.x_fn(1), 8).unwrap();
        assert!((0..256).all(|i| constant.label(&crate::product::digits(i, 2, 8)) == 1));
    }
}
