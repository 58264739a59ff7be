use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauss::HermiteIndex;
use crate::ptf::MultiPtf;
use crate::tensor::PolyGauss;

/// Coefficient grid {−B, −B+h, …, B}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverGrid {
    pub coeff_bound: f64,
    pub step: f64,
}

impl Default for CoverGrid {
    fn default() -> Self {
        Self { coeff_bound: 1.0, step: 0.25 }
    }
}

impl CoverGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.coeff_bound >= 0.0) {
            return invalid("grid needs a positive step and a non-negative bound");
        }
        let half = (self.coeff_bound / self.step + 1e-9).floor() as i64;
        Ok((-half..=half).map(|i| i as f64 * self.step).collect())
    }
}

/// Non-constant Hermite indices of degree 1..=d over n₀ variables.
pub fn basis_indices(n0: usize, d: usize) -> Vec<HermiteIndex> {
    HermiteIndex::all_up_to(n0, d).into_iter().filter(|s| s.degree() > 0).collect()
}

/// c + Σ θ_S H_S over `basis`.
pub fn poly_from_coeffs(n0: usize, basis: &[HermiteIndex], constant: f64, coeffs: &[f64]) -> Result<PolyGauss> {
    let mut p = PolyGauss::constant(n0, constant);
    for (s, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            p = p.add(&PolyGauss::hermite_term(&s.entries, c))?;
        }
    }
    Ok(p)
}

/// Unit-variance directions on the grid, deduplicated after normalization.
fn directions(count: usize, grid: &[f64], limit: usize) -> Result<Vec<Vec<f64>>> {
    let total = (grid.len() as f64).powi(count as i32);
    if total > limit as f64 * 64.0 + 1e6 {
        return Err(Error::Budget(format!("{total} raw coefficient vectors")));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut idx = vec![0usize; count];
    loop {
        let v: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let u: Vec<f64> = v.iter().map(|x| x / norm).collect();
            // key on rounded coordinates so equal directions collapse
            let key: Vec<i64> = u.iter().map(|x| (x * 1e9).round() as i64).collect();
            if seen.insert(key) {
                out.push(u);
            }
        }
        let mut pos = 0;
        loop {
            if pos == count {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// k constant-label partitions: p_j = 1, every other polynomial −1.
pub fn constant_partitions(k: usize, n0: usize) -> Vec<MultiPtf> {
    (0..k)
        .map(|j| (0..k).map(|i| PolyGauss::constant(n0, if i == j { 1.0 } else { -1.0 })).collect::<Vec<_>>().into())
        .collect()
}

/// Every PTF whose polynomials have unit variance, a direction on the grid
/// and a constant term (the mean) on the grid. For k = 2 the pair is
/// (p, −p). d = 0 gives the k constant partitions.
pub fn enumerate_cover(k: usize, n0: usize, d: usize, grid: CoverGrid, max_candidates: usize) -> Result<Vec<MultiPtf>> {
    if k < 2 || n0 == 0 {
        return invalid("cover needs k ≥ 2 and n₀ ≥ 1");
    }
    if d == 0 {
        return Ok(constant_partitions(k, n0));
    }
    let values = grid.values()?;
    let basis = basis_indices(n0, d);
    let dirs = directions(basis.len(), &values, max_candidates)?;
    let per_poly = dirs.len() * values.len();
    let polys_needed = if k == 2 { 1 } else { k };
    let total = (per_poly as f64).powi(polys_needed as i32);
    if total > max_candidates as f64 {
        return Err(Error::Budget(format!("cover has {total} candidates, limit {max_candidates}")));
    }
    let mut singles = Vec::with_capacity(per_poly);
    for dir in &dirs {
        for &c in &values {
            singles.push(poly_from_coeffs(n0, &basis, c, dir)?);
        }
    }
    if k == 2 {
        return Ok(singles.into_iter().map(MultiPtf::binary).collect());
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; k];
    loop {
        out.push(MultiPtf::new(idx.iter().map(|&i| singles[i].clone()).collect())?);
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < singles.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cover() {
        let c = enumerate_cover(2, 1, 1, CoverGrid { coeff_bound: 1.0, step: 1.0 }, 1000).unwrap();
        assert_eq!(c.len(), 6);
        for p in &c {
            assert!((p.polys()[0].variance() - 1.0).abs() < 1e-9);
        }
        assert_eq!(enumerate_cover(3, 2, 0, CoverGrid::default(), 10).unwrap().len(), 3);
    }

    #[test]
    fn dedupes_scalings() {
        // (1,1) and (2,2) are the same direction
        let c = enumerate_cover(2, 2, 1, CoverGrid { coeff_bound: 2.0, step: 1.0 }, 10_000).unwrap();
        let dirs = c.len() / 5;
        assert_eq!(dirs * 5, c.len());
        // 25 − 1 vectors; multiples of (±1,±1), (±1,0), (0,±1) collapse
        assert_eq!(dirs, 16);
    }

    #[test]
    fn guard_trips() {
        assert!(matches!(enumerate_cover(3, 2, 2, CoverGrid::default(), 1000), Err(Error::Budget(_))));
    }
}
