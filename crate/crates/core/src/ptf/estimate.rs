use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauss::{fold_points, CorrelatedSampler};

use super::partition::{is_collision, PartitionFn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub t: f64,
    pub seed: u64,
}

impl StabEstimate {
    pub fn from_count(hits: u64, samples: usize, t: f64, seed: u64) -> Self {
        let value = hits as f64 / samples as f64;
        Self { value, std_error: binomial_se(value, samples), samples, t, seed }
    }
}

pub fn binomial_se(p: f64, samples: usize) -> f64 {
    (p * (1.0 - p) / samples as f64).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureVector {
    pub mu: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl MeasureVector {
    pub fn exact(mu: Vec<f64>) -> Self {
        let std_error = vec![0.0; mu.len()];
        Self { mu, std_error }
    }

    pub fn from_counts(counts: &[u64], samples: usize) -> Self {
        let mu: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
        let std_error = mu.iter().map(|&p| binomial_se(p, samples)).collect();
        Self { mu, std_error }
    }

    pub fn uniform(k: usize) -> Self {
        Self::exact(vec![1.0 / k as f64; k])
    }

    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.mu.iter().zip(other).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.mu.iter().map(|m| m * m).sum()
    }
}

/// Joint label frequencies Pr[f(X) = i, g(Y) = j] over correlated pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLabels {
    pub k: usize,
    pub counts: Vec<u64>,
    pub samples: usize,
    pub t: f64,
    pub seed: u64,
}

impl JointLabels {
    pub fn probability(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.k + j] as f64 / self.samples as f64
    }

    pub fn agreement(&self) -> StabEstimate {
        let hits = (0..self.k).map(|j| self.counts[j * self.k + j]).sum();
        StabEstimate::from_count(hits, self.samples, self.t, self.seed)
    }

    /// Pr[f(X) = j and g(Y) = j].
    pub fn cell(&self, j: usize) -> StabEstimate {
        StabEstimate::from_count(self.counts[j * self.k + j], self.samples, self.t, self.seed)
    }
}

fn check_samples(samples: usize, min: usize) -> Result<()> {
    if samples < min {
        return invalid(format!("need at least {min} samples, got {samples}"));
    }
    Ok(())
}

pub fn estimate_measures(f: &PartitionFn, samples: usize, seed: u64) -> Result<MeasureVector> {
    check_samples(samples, 100)?;
    let k = f.k;
    let counts = fold_points(
        f.n,
        samples,
        seed,
        || (f.evaluator(), vec![0u64; k]),
        |(ev, c), x| c[ev.label(x)] += 1,
        |mut a, b| {
            a.1.iter_mut().zip(b.1).for_each(|(u, v)| *u += v);
            a
        },
    )
    .map(|a| a.1)
    .unwrap_or_default();
    Ok(MeasureVector::from_counts(&counts, samples))
}

pub fn estimate_joint_labels(f: &PartitionFn, g: &PartitionFn, t: f64, samples: usize, seed: u64) -> Result<JointLabels> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: g.n });
    }
    if f.k != g.k {
        return invalid(format!("label counts differ: {} vs {}", f.k, g.k));
    }
    check_samples(samples, 1)?;
    let k = f.k;
    let sampler = CorrelatedSampler::for_time(f.n, t, seed)?;
    let counts = sampler
        .fold(
            samples,
            || (f.evaluator(), g.evaluator(), vec![0u64; k * k]),
            |(ef, eg, c), x, y| c[ef.label(x) * k + eg.label(y)] += 1,
            |mut a, b| {
                a.2.iter_mut().zip(b.2).for_each(|(u, v)| *u += v);
                a
            },
        )
        .map(|a| a.2)
        .unwrap_or_default();
    Ok(JointLabels { k, counts, samples, t, seed })
}

/// Stab_t(f) = Pr[f(X) = f(Y)] for e^{−t}-correlated X, Y.
pub fn estimate_stability(f: &PartitionFn, t: f64, samples: usize, seed: u64) -> Result<StabEstimate> {
    Ok(estimate_joint_labels(f, f, t, samples, seed)?.agreement())
}

/// Pr[f(X) = g(Y)] under the same coupling.
pub fn estimate_cross_stability(f: &PartitionFn, g: &PartitionFn, t: f64, samples: usize, seed: u64) -> Result<StabEstimate> {
    Ok(estimate_joint_labels(f, g, t, samples, seed)?.agreement())
}

/// Pr[#{j : p_j(x) > 0} ≠ 1].
pub fn collision_probability(f: &PartitionFn, samples: usize, seed: u64) -> Result<StabEstimate> {
    if f.as_ptf().is_none() {
        return Err(Error::WrongKind("collision probability is defined for PTF partitions".into()));
    }
    check_samples(samples, 1)?;
    let hits = fold_points(
        f.n,
        samples,
        seed,
        || (f.evaluator(), 0u64),
        |(ev, c), x| {
            if ev.ptf_values(x).is_some_and(is_collision) {
                *c += 1;
            }
        },
        |mut a, b| {
            a.1 += b.1;
            a
        },
    )
    .map(|a| a.1)
    .unwrap_or(0);
    Ok(StabEstimate::from_count(hits, samples, 0.0, seed))
}

/// Pr[f(x) ≠ g(x)] for a single Gaussian point.
pub fn estimate_disagreement(f: &PartitionFn, g: &PartitionFn, samples: usize, seed: u64) -> Result<StabEstimate> {
    if f.n != g.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: g.n });
    }
    check_samples(samples, 1)?;
    let hits = fold_points(
        f.n,
        samples,
        seed,
        || (f.evaluator(), g.evaluator(), 0u64),
        |(ef, eg, c), x| {
            if ef.label(x) != eg.label(x) {
                *c += 1;
            }
        },
        |mut a, b| {
            a.2 += b.2;
            a
        },
    )
    .map(|a| a.2)
    .unwrap_or(0);
    Ok(StabEstimate::from_count(hits, samples, 0.0, seed))
}
