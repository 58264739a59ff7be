use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauss::{derive_seed, fold_points};
use crate::hermite::{expand, spectral_weights, HermiteExpansion, SpectralWeights};
use crate::ptf::{
    collision_probability, estimate_cross_stability, estimate_disagreement, estimate_measures, estimate_stability,
    MeasureVector, MultiPtf, PartitionFn, StabEstimate,
};
use crate::tensor::PolyGauss;

use super::{find_matching_threshold_cached, smooth_partition, threshold_round, FieldSample, ThresholdSearch};

pub const DEFAULT_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingReport {
    pub t: f64,
    pub stab_f: StabEstimate,
    pub stab_g: StabEstimate,
    /// ⟨g, P_t f⟩ measured as Pr[g(X) = f(Y)].
    pub cross: StabEstimate,
    pub search: ThresholdSearch,
    pub measures_f: MeasureVector,
    pub measures_g: MeasureVector,
    /// ℓ¹ distance between the measured label distributions of f and g.
    pub measure_slack: f64,
    #[serde(skip)]
    pub rounded: Option<PartitionFn>,
}

impl RoundingReport {
    /// Combined standard error of stab_g − stab_f.
    pub fn se(&self) -> f64 {
        self.stab_f.std_error.hypot(self.stab_g.std_error)
    }

    /// stab_g ≥ stab_f − (slack + 6·SE).
    pub fn contract_holds(&self) -> bool {
        self.stab_g.value >= self.stab_f.value - (self.measure_slack + 6.0 * self.se())
    }

    /// ⟨g, P_t f⟩ ≤ √(Stab(g)·Stab(f)) + 6·SE.
    pub fn cauchy_schwarz_holds(&self) -> bool {
        let se = self.cross.std_error.max(self.se());
        self.cross.value <= (self.stab_f.value * self.stab_g.value).sqrt() + 6.0 * se
    }

    pub fn summary(&self) -> PipelineReport {
        PipelineReport {
            z: self.search.z.z.clone(),
            measures: self.measures_g.mu.clone(),
            stab_before: self.stab_f.value,
            stab_after: self.stab_g.value,
            disagreement: None,
            collision: None,
        }
    }
}

/// Flat JSON summary of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub z: Vec<f64>,
    pub measures: Vec<f64>,
    pub stab_before: f64,
    pub stab_after: f64,
    pub disagreement: Option<f64>,
    pub collision: Option<f64>,
}

/// Smooths f, rounds P_t f at a threshold matching f's measures, and
/// measures both stabilities with common random numbers.
pub fn stability_of_rounding(f: &PartitionFn, t: f64, tol: f64, samples: usize, seed: u64) -> Result<RoundingReport> {
    if !(t > 0.0) {
        return invalid(format!("t must be positive, got {t}"));
    }
    let field = smooth_partition(f, t)?;
    let match_seed = derive_seed(seed, 1);
    let cache = FieldSample::new(&field, samples, match_seed)?;
    let k = f.k;
    let counts = fold_points(
        f.n,
        samples,
        match_seed,
        || (f.evaluator(), vec![0u64; k]),
        |(ev, c), x| c[ev.label(x)] += 1,
        |mut a, b| {
            a.1.iter_mut().zip(b.1).for_each(|(u, v)| *u += v);
            a
        },
    )
    .map(|a| a.1)
    .unwrap_or_default();
    let target = MeasureVector::from_counts(&counts, samples);
    let search = find_matching_threshold_cached(&cache, &target.mu, tol, DEFAULT_MAX_ITER)?;
    if !search.converged {
        return Err(Error::NoConvergence(format!(
            "threshold search stopped at ℓ¹ error {:.4} after {} iterations",
            search.error, search.iterations
        )));
    }
    let g = threshold_round(&field, &search.z)?;
    let stab_seed = derive_seed(seed, 2);
    let stab_f = estimate_stability(f, t, samples, stab_seed)?;
    let stab_g = estimate_stability(&g, t, samples, stab_seed)?;
    let cross = estimate_cross_stability(&g, f, t, samples, stab_seed)?;
    let measure_seed = derive_seed(seed, 3);
    let measures_f = estimate_measures(f, samples, measure_seed)?;
    let measures_g = estimate_measures(&g, samples, measure_seed)?;
    let measure_slack = measures_f.l1_distance(&measures_g.mu);
    Ok(RoundingReport {
        t,
        stab_f,
        stab_g,
        cross,
        search,
        measures_f,
        measures_g,
        measure_slack,
        rounded: Some(g),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport {
    pub ptf: MultiPtf,
    pub degree: usize,
    pub weights: SpectralWeights,
    /// W^{>d}[h].
    pub tail: f64,
    /// k²·W^{>d}[h].
    pub bound: f64,
    pub disagreement: StabEstimate,
    pub collision: StabEstimate,
}

impl TruncationReport {
    pub fn within_bound(&self) -> bool {
        self.disagreement.value <= self.bound + 3.0 * self.disagreement.std_error
            && self.collision.value <= self.bound + 3.0 * self.collision.std_error
    }
}

/// Expansion of the centered one-hot embedding h − (1/k)·1.
pub fn centered_expansion(h: &PartitionFn, d: usize, quad_order: usize) -> Result<HermiteExpansion> {
    let k = h.k;
    expand(
        |x| {
            let mut v = vec![-1.0 / k as f64; k];
            v[h.evaluator().label(x)] += 1.0;
            v
        },
        h.n,
        d,
        quad_order,
    )
}

/// Degree-d truncation of the centered embedding, read as a PTF, with
/// measured disagreement and collision rates.
pub fn ptf_from_truncation(
    h: &PartitionFn,
    d: usize,
    n_small: usize,
    quad_order: usize,
    samples: usize,
    seed: u64,
) -> Result<TruncationReport> {
    if h.n != n_small {
        return Err(Error::DimensionMismatch { expected: n_small, got: h.n });
    }
    let k = h.k;
    let e = centered_expansion(h, d, quad_order)?;
    // ‖h⁰(x)‖² = (k − 1)/k at every x
    let weights = spectral_weights(&e, (k as f64 - 1.0) / k as f64)?;
    let tail = weights.above(d).residual;
    let polys = (0..k).map(|j| PolyGauss::from_hermite(&e, j)).collect::<Result<Vec<_>>>()?;
    let ptf = MultiPtf::new(polys)?;
    let g = PartitionFn::ptf(ptf.clone());
    let disagreement = estimate_disagreement(&g, h, samples, derive_seed(seed, 1))?;
    let collision = collision_probability(&g, samples, derive_seed(seed, 2))?;
    Ok(TruncationReport { ptf, degree: d, weights, tail, bound: (k * k) as f64 * tail, disagreement, collision })
}
