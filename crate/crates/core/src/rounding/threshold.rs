use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::{fold_points, sample_points};
use crate::ptf::{argmax_shifted, MeasureVector, PartitionFn};

use super::FieldFn;

/// Simplex tolerance for F(x).
pub const SIMPLEX_TOL: f64 = 1e-9;
const PROBE_POINTS: usize = 256;
const PROBE_SEED: u64 = 0x5eed_0f_7a11;

/// Rounding thresholds, normalized so the last entry is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdVector {
    pub z: Vec<f64>,
}

impl ThresholdVector {
    pub fn new(mut z: Vec<f64>) -> Self {
        if let Some(&last) = z.last() {
            z.iter_mut().for_each(|v| *v -= last);
        }
        Self { z }
    }

    pub fn zeros(k: usize) -> Self {
        Self { z: vec![0.0; k] }
    }

    pub fn k(&self) -> usize {
        self.z.len()
    }
}

fn check_simplex(v: &[f64]) -> Result<()> {
    let sum: f64 = v.iter().sum();
    if v.iter().any(|&u| !u.is_finite() || u < -SIMPLEX_TOL) || (sum - 1.0).abs() > SIMPLEX_TOL {
        return invalid(format!("field value {v:?} is not in the simplex"));
    }
    Ok(())
}

/// Checks F(x) ∈ Δk on a fixed set of Gaussian probe points.
pub fn check_field(f: &FieldFn) -> Result<()> {
    let pts = sample_points(f.n(), PROBE_POINTS, PROBE_SEED);
    let mut out = vec![0.0; f.k()];
    for x in pts.chunks(f.n().max(1)) {
        f.eval_into(x, &mut out);
        check_simplex(&out)?;
    }
    Ok(())
}

/// x ↦ argmax_j (F_j(x) − z_j), ties to the smallest index.
pub fn threshold_round(f: &FieldFn, z: &ThresholdVector) -> Result<PartitionFn> {
    if z.z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("threshold {:?}", z.z)));
    }
    check_dim(f.k(), z.k())?;
    check_field(f)?;
    PartitionFn::rounded(f.clone(), ThresholdVector::new(z.z.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub z: ThresholdVector,
    /// Rounded measures on the search sample.
    pub measures: Vec<f64>,
    /// ℓ¹ distance from the target.
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// F evaluated once on a fixed sample, so every iterate sees the same points.
pub struct FieldSample {
    k: usize,
    values: Vec<f64>,
}

impl FieldSample {
    pub fn new(f: &FieldFn, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return invalid("need at least one sample");
        }
        let (n, k) = (f.n(), f.k());
        let values = fold_points(
            n,
            samples,
            seed,
            Vec::new,
            |acc: &mut Vec<f64>, x| {
                let start = acc.len();
                acc.resize(start + k, 0.0);
                f.eval_into(x, &mut acc[start..]);
            },
            |mut a, mut b| {
                a.append(&mut b);
                a
            },
        )
        .unwrap_or_default();
        for v in values.chunks(k) {
            check_simplex(v)?;
        }
        Ok(Self { k, values })
    }

    pub fn measures(&self, z: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.k];
        let rows = self.values.len() / self.k;
        for v in self.values.chunks(self.k) {
            m[argmax_shifted(v, z)] += 1.0;
        }
        m.iter_mut().for_each(|u| *u /= rows as f64);
        m
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum()
}

/// Damped fixed-point search z_i ← z_i + η(m_i(z) − target_i). A step that
/// does not reduce the ℓ¹ error is rejected and η halved; accepted steps
/// grow η. If that stalls, per-label bisection sweeps take over. Returns the
/// last iterate with `converged = false` if `tol` was not reached.
pub fn find_matching_threshold(
    f: &FieldFn,
    target: &MeasureVector,
    tol: f64,
    max_iter: usize,
    samples: usize,
    seed: u64,
) -> Result<ThresholdSearch> {
    let cache = FieldSample::new(f, samples, seed)?;
    find_matching_threshold_cached(&cache, &target.mu, tol, max_iter)
}

pub fn find_matching_threshold_cached(cache: &FieldSample, target: &[f64], tol: f64, max_iter: usize) -> Result<ThresholdSearch> {
    check_dim(cache.k, target.len())?;
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if target.iter().any(|&v| v < 0.0) || (target.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return invalid("target measures must form a probability vector");
    }
    let mut z = vec![0.0; cache.k];
    let mut m = cache.measures(&z);
    let mut err = l1(&m, target);
    let mut eta = 1.0;
    let mut it = 0;
    while err > tol && it < max_iter && eta > 1e-12 {
        it += 1;
        let cand: Vec<f64> = z.iter().zip(&m).zip(target).map(|((zi, mi), ti)| zi + eta * (mi - ti)).collect();
        let mc = cache.measures(&cand);
        let ec = l1(&mc, target);
        if ec < err {
            (z, m, err) = (cand, mc, ec);
            eta = (eta * 1.5).min(4.0);
        } else {
            eta *= 0.5;
        }
    }
    if err > tol {
        // m_i is non-increasing in z_i, so exact per-label bisection sweeps
        // cannot stall the way damped steps do when a label's mass jumps
        let sweeps = max_iter.div_ceil(cache.k).max(1);
        for _ in 0..sweeps {
            if err <= tol {
                break;
            }
            it += 1;
            for i in 0..cache.k {
                bisect_label(cache, &mut z, i, target[i], tol / (2.0 * cache.k as f64));
            }
            let mc = cache.measures(&z);
            let ec = l1(&mc, target);
            if ec >= err - 1e-12 {
                (m, err) = (mc, ec);
                break;
            }
            (m, err) = (mc, ec);
        }
    }
    Ok(ThresholdSearch { z: ThresholdVector::new(z), measures: m, error: err, iterations: it, converged: err <= tol })
}

/// Moves z_i, others fixed, until label i's measure is within `tol` of `want`.
/// Since F ∈ [0, 1]^k, z_i = min z − 1 hands label i everything and
/// z_i = max z + 1 hands it nothing.
fn bisect_label(cache: &FieldSample, z: &mut [f64], i: usize, want: f64, tol: f64) {
    let lo_all = z.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let hi_all = z.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let (mut lo, mut hi) = (lo_all, hi_all);
    let mut best = (f64::INFINITY, z[i]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        z[i] = mid;
        let mi = cache.measures(z)[i];
        let gap = (mi - want).abs();
        if gap < best.0 {
            best = (gap, mid);
        }
        if gap <= tol {
            break;
        }
        // larger z_i means less mass for label i
        if mi > want {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    z[i] = best.1;
}
