//! Exact Walsh–Fourier analysis of k-ary functions on {−1,1}^n.
//!
//! Point x is stored at the index whose bit i is set iff x_i = −1.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauss::norm_ppf;
use crate::ptf::PartitionFn;

pub const MAX_CUBE_DIM: usize = 20;
/// Largest n for the O(4^n) brute-force oracles.
pub const MAX_BRUTE_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "CubeDoc", try_from = "CubeDoc")]
pub struct CubeFn {
    pub n: usize,
    pub k: usize,
    pub labels: Vec<u16>,
}

#[derive(Serialize, Deserialize)]
struct CubeDoc {
    n: usize,
    k: usize,
    labels: String,
}

fn bits_per_label(k: usize) -> usize {
    (usize::BITS - (k.max(2) - 1).leading_zeros()) as usize
}

impl From<CubeFn> for CubeDoc {
    fn from(c: CubeFn) -> Self {
        let b = bits_per_label(c.k);
        let mut bytes = vec![0u8; (c.labels.len() * b).div_ceil(8)];
        for (i, &l) in c.labels.iter().enumerate() {
            for j in 0..b {
                if l >> j & 1 == 1 {
                    let pos = i * b + j;
                    bytes[pos / 8] |= 1 << (pos % 8);
                }
            }
        }
        CubeDoc { n: c.n, k: c.k, labels: B64.encode(bytes) }
    }
}

impl TryFrom<CubeDoc> for CubeFn {
    type Error = Error;
    fn try_from(doc: CubeDoc) -> Result<Self> {
        let bytes = B64.decode(doc.labels).map_err(|e| Error::InvalidParameter(format!("bad base64: {e}")))?;
        if doc.n > MAX_CUBE_DIM {
            return invalid(format!("n = {} exceeds {MAX_CUBE_DIM}", doc.n));
        }
        let b = bits_per_label(doc.k);
        let len = 1usize << doc.n;
        if bytes.len() != (len * b).div_ceil(8) {
            return invalid("packed label length does not match 2^n");
        }
        let labels = (0..len)
            .map(|i| (0..b).fold(0u16, |acc, j| {
                let pos = i * b + j;
                acc | (u16::from(bytes[pos / 8] >> (pos % 8) & 1) << j)
            }))
            .collect();
        CubeFn::new(doc.n, doc.k, labels)
    }
}

impl CubeFn {
    pub fn new(n: usize, k: usize, labels: Vec<u16>) -> Result<Self> {
        if n > MAX_CUBE_DIM {
            return invalid(format!("n = {n} exceeds {MAX_CUBE_DIM}"));
        }
        if labels.len() != 1 << n {
            return invalid(format!("table has {} entries, expected 2^{n}", labels.len()));
        }
        if k == 0 || labels.iter().any(|&l| l as usize >= k) {
            return invalid("labels must lie in [0, k)");
        }
        Ok(Self { n, k, labels })
    }

    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(&[f64]) -> usize) -> Result<Self> {
        if n > MAX_CUBE_DIM {
            return invalid(format!("n = {n} exceeds {MAX_CUBE_DIM}"));
        }
        let mut x = vec![0.0; n];
        let labels = (0..1usize << n)
            .map(|idx| {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = if idx >> i & 1 == 1 { -1.0 } else { 1.0 };
                }
                f(&x) as u16
            })
            .collect();
        Self::new(n, k, labels)
    }

    pub fn label(&self, x: &[f64]) -> usize {
        let idx = x.iter().enumerate().fold(0usize, |acc, (i, &v)| acc | (usize::from(v < 0.0) << i));
        self.labels[idx] as usize
    }

    pub fn measures(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.k];
        let w = 1.0 / self.labels.len() as f64;
        for &l in &self.labels {
            m[l as usize] += w;
        }
        m
    }
}

/// Walsh coefficients f̂(S) ∈ R^k, indexed by subset bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshSpectrum {
    pub n: usize,
    pub k: usize,
    pub coeffs: Vec<f64>,
}

impl WalshSpectrum {
    pub fn coeff(&self, s: usize) -> &[f64] {
        &self.coeffs[s * self.k..(s + 1) * self.k]
    }

    pub fn weight(&self, s: usize) -> f64 {
        self.coeff(s).iter().map(|v| v * v).sum()
    }

    pub fn total(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum()
    }
}

pub fn walsh_transform(f: &CubeFn) -> Result<WalshSpectrum> {
    if f.n > MAX_CUBE_DIM {
        return invalid(format!("n = {} exceeds {MAX_CUBE_DIM}", f.n));
    }
    let len = 1usize << f.n;
    let k = f.k;
    let mut coeffs = vec![0.0; len * k];
    for j in 0..k {
        let mut a: Vec<f64> = f.labels.iter().map(|&l| if l as usize == j { 1.0 } else { 0.0 }).collect();
        let mut h = 1;
        while h < len {
            for block in (0..len).step_by(2 * h) {
                for i in block..block + h {
                    let (u, v) = (a[i], a[i + h]);
                    a[i] = u + v;
                    a[i + h] = u - v;
                }
            }
            h *= 2;
        }
        for (s, v) in a.into_iter().enumerate() {
            coeffs[s * k + j] = v / len as f64;
        }
    }
    Ok(WalshSpectrum { n: f.n, k, coeffs })
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() <= 1.0 {
        Ok(())
    } else {
        invalid(format!("rho {rho} outside [-1, 1]"))
    }
}

/// Σ_S ρ^{|S|}‖f̂(S)‖² = Pr[f(x) = f(y)] for ρ-correlated uniform x, y.
pub fn cube_stability(f: &CubeFn, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let w = walsh_transform(f)?;
    Ok((0..1usize << f.n).map(|s| rho.powi(s.count_ones() as i32) * w.weight(s)).sum())
}

/// Agreement probability by summing over all 4^n correlated pairs.
pub fn cube_stability_bruteforce(f: &CubeFn, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if f.n > MAX_BRUTE_DIM {
        return Err(Error::Budget(format!("brute force over 4^{}", f.n)));
    }
    let len = 1usize << f.n;
    let (same, diff) = ((1.0 + rho) / 2.0, (1.0 - rho) / 2.0);
    let mut total = 0.0;
    for x in 0..len {
        for y in 0..len {
            if f.labels[x] == f.labels[y] {
                let d = (x ^ y).count_ones() as i32;
                total += same.powi(f.n as i32 - d) * diff.powi(d);
            }
        }
    }
    Ok(total / len as f64)
}

/// Inf_i = Σ_{S ∋ i} ‖f̂(S)‖².
pub fn cube_influences(f: &CubeFn) -> Result<Vec<f64>> {
    let w = walsh_transform(f)?;
    let mut inf = vec![0.0; f.n];
    for s in 0..1usize << f.n {
        let ws = w.weight(s);
        for (i, v) in inf.iter_mut().enumerate() {
            if s >> i & 1 == 1 {
                *v += ws;
            }
        }
    }
    Ok(inf)
}

/// E_z Var(f_{z,−i}) by direct enumeration of coordinate flips.
pub fn cube_influences_bruteforce(f: &CubeFn) -> Vec<f64> {
    let len = 1usize << f.n;
    (0..f.n)
        .map(|i| {
            let flips = (0..len).filter(|&x| f.labels[x] != f.labels[x ^ (1 << i)]).count();
            // each differing pair contributes ‖e_a − e_b‖²/4 = 1/2
            flips as f64 * 0.5 / len as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VotingRule {
    Dictator,
    Majority,
    Parity,
    Plurality,
    SlabEmbedding,
}

impl std::str::FromStr for VotingRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dictator" => Self::Dictator,
            "majority" => Self::Majority,
            "parity" => Self::Parity,
            "plurality" => Self::Plurality,
            "slab-embedding" | "slab_embedding" => Self::SlabEmbedding,
            _ => return invalid(format!("unknown voting rule '{s}'")),
        })
    }
}

/// Applies a Gaussian partition on R^{n₀} to normalized sign sums of n₀
/// contiguous coordinate blocks.
pub fn embed_gaussian(g: &PartitionFn, n: usize) -> Result<CubeFn> {
    let n0 = g.n;
    if n0 == 0 || n % n0 != 0 {
        return invalid(format!("n = {n} is not a multiple of the block count {n0}"));
    }
    let size = n / n0;
    let scale = 1.0 / (size as f64).sqrt();
    let mut ev = g.evaluator();
    let mut z = vec![0.0; n0];
    CubeFn::from_fn(n, g.k, |x| {
        for (b, zb) in z.iter_mut().enumerate() {
            *zb = x[b * size..(b + 1) * size].iter().sum::<f64>() * scale;
        }
        ev.label(&z)
    })
}

/// Named voting rule as a table. Dictator, majority and parity are two-label
/// rules; plurality reads consecutive groups of ⌈log₂k⌉ bits as votes (values
/// ≥ k abstain) and picks the most frequent, ties to the smallest label;
/// slab-embedding applies k equal-measure Gaussian slabs to the normalized sum.
pub fn make_voting_rule(kind: VotingRule, n: usize, k: usize) -> Result<CubeFn> {
    if n == 0 || n > MAX_CUBE_DIM {
        return invalid(format!("n = {n} must lie in 1..={MAX_CUBE_DIM}"));
    }
    if k < 2 {
        return invalid("voting rules need k ≥ 2");
    }
    let two = |name: &str| if k == 2 { Ok(()) } else { invalid(format!("{name} is a two-label rule")) };
    match kind {
        VotingRule::Dictator => {
            two("dictator")?;
            CubeFn::from_fn(n, 2, |x| usize::from(x[0] < 0.0))
        }
        VotingRule::Majority => {
            two("majority")?;
            if n % 2 == 0 {
                return invalid("majority needs odd n");
            }
            CubeFn::from_fn(n, 2, |x| usize::from(x.iter().sum::<f64>() < 0.0))
        }
        VotingRule::Parity => {
            two("parity")?;
            CubeFn::from_fn(n, 2, |x| x.iter().filter(|&&v| v < 0.0).count() % 2)
        }
        VotingRule::Plurality => {
            let b = bits_per_label(k);
            if n % b != 0 {
                return invalid(format!("plurality over {k} labels needs n divisible by {b}"));
            }
            CubeFn::from_fn(n, k, |x| {
                let mut votes = vec![0usize; k];
                for group in x.chunks(b) {
                    let v = group.iter().enumerate().fold(0usize, |acc, (j, &xi)| acc | (usize::from(xi < 0.0) << j));
                    if v < k {
                        votes[v] += 1;
                    }
                }
                let top = *votes.iter().max().unwrap_or(&0);
                votes.iter().position(|&c| c == top).unwrap_or(0)
            })
        }
        VotingRule::SlabEmbedding => {
            let bps = (1..k).map(|j| norm_ppf(j as f64 / k as f64)).collect();
            embed_gaussian(&PartitionFn::slabs(1, 0, bps)?, n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictator() {
        let d = make_voting_rule(VotingRule::Dictator, 4, 2).unwrap();
        assert_eq!(d.labels[0b0000], 0);
        assert_eq!(d.labels[0b0001], 1);
        assert_eq!(d.labels[0b1110], 0);
        let w = walsh_transform(&d).unwrap();
        for s in 0..16 {
            if s > 1 {
                assert_eq!(w.weight(s), 0.0);
            }
        }
        assert!((cube_stability(&d, 0.5).unwrap() - 0.75).abs() < 1e-15);
        let inf = cube_influences(&d).unwrap();
        assert!((inf[0] - 0.5).abs() < 1e-15 && inf[1] == 0.0);
    }

    #[test]
    fn majority_three() {
        let m = make_voting_rule(VotingRule::Majority, 3, 2).unwrap();
        let table: Vec<u16> = (0..8).map(|i: u32| u16::from(i.count_ones() >= 2)).collect();
        assert_eq!(m.labels, table);
        let w = walsh_transform(&m).unwrap();
        // ±1-valued majority has singleton coefficients 1/2; one-hot halves them
        for i in 0..3 {
            assert!((w.coeff(1 << i)[0] - 0.25).abs() < 1e-15);
        }
        let s = cube_stability(&m, 0.5).unwrap();
        assert!((s - cube_stability_bruteforce(&m, 0.5).unwrap()).abs() < 1e-12);
        assert!((cube_stability(&m, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(make_voting_rule(VotingRule::Majority, 4, 2).is_err());
    }

    #[test]
    fn influence_identity() {
        let p = make_voting_rule(VotingRule::Plurality, 4, 3).unwrap();
        let w = walsh_transform(&p).unwrap();
        let lhs: f64 = cube_influences(&p).unwrap().iter().sum();
        let rhs: f64 = (0..16usize).map(|s| s.count_ones() as f64 * w.weight(s)).sum();
        assert!((lhs - rhs).abs() < 1e-12);
        let brute = cube_influences_bruteforce(&p);
        for (a, b) in cube_influences(&p).unwrap().iter().zip(brute) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn packing_round_trip() {
        for k in [2, 3, 5] {
            let f = CubeFn::from_fn(5, k, |x| ((x[0] + 2.0 * x[3] + 3.0 * x[4] + 6.0) as usize) % k).unwrap();
            let s = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<CubeFn>(&s).unwrap(), f);
        }
    }
}
