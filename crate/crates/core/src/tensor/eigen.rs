use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gauss::fill_normal;

use super::multiset::runs;
use super::poly::PolyGauss;
use super::symmetric::SymmetricTensor;

pub const POWER_TOL: f64 = 1e-9;
pub const POWER_MAX_ITER: usize = 10_000;

/// Top singular value of one flattening of one chaos component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatteningValue {
    pub order: usize,
    /// Slots on the row side; the complement indexes columns.
    pub rows: Vec<usize>,
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub lambda_max: f64,
    pub per_partition: Vec<FlatteningValue>,
    pub variance: f64,
    pub ratio: f64,
    pub converged: bool,
}

/// Sparse matrix in coordinate form with compacted row/column ids.
struct Coo {
    rows: usize,
    cols: usize,
    entries: Vec<(u32, u32, f64)>,
}

fn distinct_orderings(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let rs = runs(sorted);
    let mut counts: Vec<usize> = rs.iter().map(|r| r.1).collect();
    let mut cur = Vec::with_capacity(sorted.len());
    fn rec(rs: &[(usize, usize)], counts: &mut [usize], cur: &mut Vec<usize>, total: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == total {
            out.push(cur.clone());
            return;
        }
        for j in 0..rs.len() {
            if counts[j] > 0 {
                counts[j] -= 1;
                cur.push(rs[j].0);
                rec(rs, counts, cur, total, out);
                cur.pop();
                counts[j] += 1;
            }
        }
    }
    rec(&rs, &mut counts, &mut cur, sorted.len(), &mut out);
    out
}

fn flatten(t: &SymmetricTensor, s: usize) -> Coo {
    let n = t.dim() as u64;
    let encode = |idx: &[usize]| idx.iter().fold(0u64, |acc, &i| acc * n + i as u64);
    let mut row_ids: HashMap<u64, u32> = HashMap::new();
    let mut col_ids: HashMap<u64, u32> = HashMap::new();
    let mut entries = Vec::new();
    for (ms, v) in t.entries() {
        if v == 0.0 {
            continue;
        }
        for ord in distinct_orderings(&ms) {
            let rk = encode(&ord[..s]);
            let ck = encode(&ord[s..]);
            let next_r = row_ids.len() as u32;
            let r = *row_ids.entry(rk).or_insert(next_r);
            let next_c = col_ids.len() as u32;
            let c = *col_ids.entry(ck).or_insert(next_c);
            entries.push((r, c, v));
        }
    }
    Coo { rows: row_ids.len(), cols: col_ids.len(), entries }
}

/// Top singular value by alternating power iteration from a fixed seeded start.
fn top_singular(m: &Coo) -> (f64, usize, bool) {
    if m.entries.is_empty() {
        return (0.0, 0, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut v = vec![0.0; m.cols];
    fill_normal(&mut rng, &mut v);
    normalize(&mut v);
    let mut u = vec![0.0; m.rows];
    let mut sigma = 0.0;
    for it in 1..=POWER_MAX_ITER {
        u.iter_mut().for_each(|x| *x = 0.0);
        for &(r, c, a) in &m.entries {
            u[r as usize] += a * v[c as usize];
        }
        if normalize(&mut u) == 0.0 {
            return (0.0, it, true);
        }
        v.iter_mut().for_each(|x| *x = 0.0);
        for &(r, c, a) in &m.entries {
            v[c as usize] += a * u[r as usize];
        }
        let next = normalize(&mut v);
        if (next - sigma).abs() <= POWER_TOL * 1e-3 * next.max(f64::MIN_POSITIVE) {
            return (next, it, true);
        }
        sigma = next;
    }
    (sigma, POWER_MAX_ITER, false)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Largest flattening singular value of a single symmetric tensor over all
/// bipartitions of its slots, together with the per-bipartition values.
pub fn tensor_flattenings(t: &SymmetricTensor) -> Vec<FlatteningValue> {
    let q = t.order();
    let mut by_size: HashMap<usize, (f64, usize, bool)> = HashMap::new();
    let mut out = Vec::new();
    // subsets containing slot 0, excluding the full set: one per complementary pair
    for mask in 0u32..(1 << q) {
        if mask & 1 == 0 || mask == (1 << q) - 1 {
            continue;
        }
        let rows: Vec<usize> = (0..q).filter(|&i| mask >> i & 1 == 1).collect();
        let s = rows.len().min(q - rows.len());
        // by symmetry, the flattening depends only on the size of the row set
        let (sigma, iterations, converged) = *by_size.entry(s).or_insert_with(|| top_singular(&flatten(t, s)));
        out.push(FlatteningValue { order: q, rows, sigma, iterations, converged });
    }
    out
}

/// λ_max(p)/sqrt(Var p) over all components of order ≥ 2.
pub fn eigenregularity(p: &PolyGauss) -> Result<EigenReport> {
    let mut per_partition = Vec::new();
    for (&q, t) in p.chaos() {
        if q >= 2 {
            per_partition.extend(tensor_flattenings(t));
        }
    }
    if per_partition.is_empty() {
        return invalid("eigenregularity needs a chaos component of order at least 2");
    }
    let lambda_max = per_partition.iter().map(|f| f.sigma).fold(0.0, f64::max);
    let variance = p.variance();
    let ratio = if variance > 0.0 { lambda_max / variance.sqrt() } else { 0.0 };
    let converged = per_partition.iter().all(|f| f.converged);
    Ok(EigenReport { lambda_max, per_partition, variance, ratio, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn rank_one() {
        let p = PolyGauss::from_components(2, 0.0, [SymmetricTensor::rank_one(&[1.0, 0.0], 2)]).unwrap();
        let rep = eigenregularity(&p).unwrap();
        assert!((rep.lambda_max - 1.0).abs() < 1e-12);
        assert!((rep.ratio - 1.0).abs() < 1e-12);
        assert!(eigenregularity(&PolyGauss::linear(&[1.0], 0.0)).is_err());
    }

    #[test]
    fn matches_dense_svd() {
        let mut t = SymmetricTensor::zeros(3, 4);
        for (i, v) in t.values_mut().iter_mut().enumerate() {
            *v = ((i * 7 + 3) as f64).sin();
        }
        let d = t.to_dense().unwrap();
        let m = DMatrix::from_row_slice(4, 16, &d.data);
        let top = m.singular_values().max();
        let vals = tensor_flattenings(&t);
        assert_eq!(vals.len(), 3);
        for f in vals {
            assert!((f.sigma - top).abs() < 1e-9, "{} vs {}", f.sigma, top);
        }
    }

    #[test]
    fn orderings() {
        assert_eq!(distinct_orderings(&[0, 0, 1]).len(), 3);
        assert_eq!(distinct_orderings(&[0, 1, 2]).len(), 6);
    }
}
