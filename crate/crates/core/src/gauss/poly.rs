use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// Orthonormal (probabilists', unit-variance) Hermite polynomial H_q(x).
pub fn hermite_eval(q: usize, x: f64) -> f64 {
    if q == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for j in 1..q {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[q] = H_q(x)` for `q = 0..out.len()`.
pub fn hermite_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for j in 1..out.len().saturating_sub(1) {
        out[j + 1] = (x * out[j] - (j as f64).sqrt() * out[j - 1]) / ((j + 1) as f64).sqrt();
    }
}

/// A multi-index S over n coordinates; H_S(x) = prod_i H_{S_i}(x_i).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HermiteIndex {
    pub entries: Vec<usize>,
}

impl HermiteIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self { entries }
    }

    pub fn zero(n: usize) -> Self {
        Self { entries: vec![0; n] }
    }

    pub fn unit(n: usize, i: usize, q: usize) -> Self {
        let mut entries = vec![0; n];
        entries[i] = q;
        Self { entries }
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// All indices over `n` coordinates with total degree at most `max_degree`,
    /// ordered by degree and then lexicographically.
    pub fn all_up_to(n: usize, max_degree: usize) -> Vec<HermiteIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut cur = vec![0; n];
            compositions(n, d, 0, &mut cur, &mut out);
        }
        out
    }
}

fn compositions(n: usize, left: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<HermiteIndex>) {
    if n == 0 {
        if left == 0 {
            out.push(HermiteIndex::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = left;
        out.push(HermiteIndex::new(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        compositions(n, left - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

pub fn hermite_multi_eval(s: &HermiteIndex, x: &[f64]) -> Result<f64> {
    check_dim(s.dim(), x.len())?;
    Ok(s.entries.iter().zip(x).map(|(&q, &xi)| hermite_eval(q, xi)).product())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(hermite_eval(0, 3.7), 1.0);
        assert_eq!(hermite_eval(1, 2.0), 2.0);
        assert!((hermite_eval(2, 2.0) - 3.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn explicit_cubic() {
        for &x in &[-2.3, -0.7, 0.0, 0.4, 1.9, 3.3] {
            let explicit = (x * x * x - 3.0 * x) / 6f64.sqrt();
            assert!((hermite_eval(3, x) - explicit).abs() < 1e-12);
        }
    }

    #[test]
    fn all_matches_single() {
        let mut buf = [0.0; 9];
        hermite_all(1.3, &mut buf);
        for (q, v) in buf.iter().enumerate() {
            assert!((v - hermite_eval(q, 1.3)).abs() < 1e-13);
        }
    }

    #[test]
    fn multi() {
        let s = HermiteIndex::new(vec![1, 1]);
        assert_eq!(hermite_multi_eval(&s, &[2.0, 3.0]).unwrap(), 6.0);
        let s = HermiteIndex::new(vec![2, 0]);
        assert!((hermite_multi_eval(&s, &[2.0, 5.0]).unwrap() - 2.1213203435596424).abs() < 1e-12);
        assert!(hermite_multi_eval(&s, &[1.0]).is_err());
    }

    #[test]
    fn index_enumeration_counts() {
        // number of monomials of degree <= d in n variables is C(n+d, d)
        assert_eq!(HermiteIndex::all_up_to(2, 6).len(), 28);
        assert_eq!(HermiteIndex::all_up_to(3, 4).len(), 35);
        assert!(HermiteIndex::all_up_to(3, 4).iter().all(|s| s.degree() <= 4));
    }
}
