use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::fold_points;

use super::multiset::factorial;
use super::poly::{CompiledFamily, PolyGauss};
use super::symmetric::SymmetricTensor;

/// Eigenvalues below this are treated as rounding noise and clipped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// Target covariances for one chaos level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramLevel {
    pub level: usize,
    pub gram: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSpec {
    pub levels: Vec<GramLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedFamily {
    pub polys: Vec<PolyGauss>,
    /// (level, index within level) for each polynomial.
    pub labels: Vec<(usize, usize)>,
    pub n0: usize,
    pub kappa: usize,
}

impl MatchedFamily {
    pub fn level(&self, level: usize) -> Vec<&PolyGauss> {
        self.polys.iter().zip(&self.labels).filter(|(_, l)| l.0 == level).map(|(p, _)| p).collect()
    }
}

/// Block count ⌈1/δ²⌉.
pub fn block_count(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta {delta} must lie in (0, 1]"));
    }
    // guard against 1/0.05² evaluating to 400.00000000000006
    let raw = 1.0 / (delta * delta);
    let rounded = raw.round();
    Ok(if (raw - rounded).abs() <= 1e-9 * raw { rounded as usize } else { raw.ceil() as usize })
}

/// G = VᵀV via the symmetric eigendecomposition; returns V (m×m, row l = basis slot).
pub fn gram_factor(gram: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = gram.len();
    for row in gram {
        check_dim(m, row.len())?;
    }
    let g = DMatrix::from_fn(m, m, |i, j| 0.5 * (gram[i][j] + gram[j][i]));
    if (0..m).any(|i| (0..m).any(|j| (gram[i][j] - gram[j][i]).abs() > 1e-12)) {
        return invalid("Gram matrix is not symmetric");
    }
    let eig = g.symmetric_eigen();
    let mut v = DMatrix::zeros(m, m);
    for (l, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -PSD_TOL {
            return Err(Error::InvalidParameter(format!("Gram matrix has eigenvalue {lam:.3e} < 0")));
        }
        let s = lam.max(0.0).sqrt();
        for j in 0..m {
            v[(l, j)] = s * eig.eigenvectors[(j, l)];
        }
    }
    Ok(v)
}

/// Builds polynomials r_j whose covariances reproduce each level's Gram matrix,
/// using multilinear monomials on disjoint coordinate tuples averaged over
/// κ = ⌈1/δ²⌉ disjoint blocks.
pub fn matched_family(spec: &GramSpec, delta: f64) -> Result<MatchedFamily> {
    matched_family_rotated(spec, delta, None)
}

/// As [`matched_family`], but with each level's factor replaced by Q·V for the
/// given orthogonal matrices Q (one per level). Covariances are unchanged while
/// the polynomials differ.
pub fn matched_family_rotated(spec: &GramSpec, delta: f64, rotations: Option<&[DMatrix<f64>]>) -> Result<MatchedFamily> {
    let kappa = block_count(delta)?;
    if spec.levels.iter().any(|l| l.level == 0) {
        return invalid("chaos levels start at 1");
    }
    let width: usize = spec.levels.iter().map(|l| l.level * l.gram.len()).sum();
    let n0 = kappa * width;
    let mut factors = Vec::new();
    for (li, lev) in spec.levels.iter().enumerate() {
        let mut v = gram_factor(&lev.gram)?;
        if let Some(rot) = rotations {
            let q = rot.get(li).ok_or_else(|| Error::InvalidParameter("missing rotation".into()))?;
            check_dim(v.nrows(), q.nrows())?;
            v = q * v;
        }
        factors.push(v);
    }
    let norm = 1.0 / (kappa as f64).sqrt();
    let mut polys = Vec::new();
    let mut labels = Vec::new();
    let mut level_offset = 0;
    for (lev, v) in spec.levels.iter().zip(&factors) {
        let i = lev.level;
        let m = lev.gram.len();
        let mono = 1.0 / factorial(i).sqrt();
        for j in 0..m {
            let mut t = SymmetricTensor::zeros(i, n0);
            let mut idx = vec![0usize; i];
            for b in 0..kappa {
                for l in 0..m {
                    let start = b * width + level_offset + l * i;
                    for (s, slot) in idx.iter_mut().enumerate() {
                        *slot = start + s;
                    }
                    t.set(&idx, v[(l, j)] * mono * norm);
                }
            }
            polys.push(PolyGauss::from_components(n0, 0.0, [t])?);
            labels.push((i, j));
        }
        level_offset += i * m;
    }
    Ok(MatchedFamily { polys, labels, n0, kappa })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of E[∏ p_i].
pub fn product_expectation_mc(family: &[PolyGauss], samples: usize, seed: u64) -> Result<McEstimate> {
    Ok(product_expectation_mc_pair(family, family, samples, seed)?.0)
}

/// E[∏ a_i] and E[∏ b_i] on common draws, plus the estimate of their difference.
pub fn product_expectation_mc_pair(
    a: &[PolyGauss],
    b: &[PolyGauss],
    samples: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate, McEstimate)> {
    if a.is_empty() || b.is_empty() {
        return invalid("product expectation needs a nonempty family");
    }
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let all: Vec<PolyGauss> = a.iter().chain(b).cloned().collect();
    let compiled = CompiledFamily::new(&all);
    let na = a.len();
    let sums = fold_points(
        compiled.dim(),
        samples,
        seed,
        || ([0.0f64; 6], compiled.scratch(), vec![0.0; all.len()]),
        |acc, x| {
            let (s, scratch, vals) = acc;
            compiled.eval_into(x, scratch, vals);
            let pa: f64 = vals[..na].iter().product();
            let pb: f64 = vals[na..].iter().product();
            let d = pa - pb;
            s[0] += pa;
            s[1] += pa * pa;
            s[2] += pb;
            s[3] += pb * pb;
            s[4] += d;
            s[5] += d * d;
        },
        |mut x, y| {
            for (u, v) in x.0.iter_mut().zip(y.0) {
                *u += v;
            }
            x
        },
    )
    .map(|acc| acc.0)
    .unwrap_or_default();
    let nf = samples as f64;
    let est = |s: f64, s2: f64| {
        let mean = s / nf;
        let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
        McEstimate { mean, std_error: (var / nf).sqrt(), samples }
    };
    Ok((est(sums[0], sums[1]), est(sums[2], sums[3]), est(sums[4], sums[5])))
}
