use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Joint distribution of a symbol pair (X, Y) over finite alphabets A × B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointDoc", into = "JointDoc")]
pub struct JointDist {
    a: usize,
    b: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JointDoc {
    #[serde(rename = "A")]
    a: usize,
    #[serde(rename = "B")]
    b: usize,
    rows: Vec<Vec<f64>>,
}

impl From<JointDist> for JointDoc {
    fn from(p: JointDist) -> Self {
        JointDoc { a: p.a, b: p.b, rows: p.rows }
    }
}

impl TryFrom<JointDoc> for JointDist {
    type Error = crate::Error;
    fn try_from(d: JointDoc) -> Result<Self> {
        let p = JointDist::new(d.rows)?;
        if p.a != d.a || p.b != d.b {
            return invalid(format!("declared alphabet sizes {}×{} do not match rows {}×{}", d.a, d.b, p.a, p.b));
        }
        Ok(p)
    }
}

pub const TOTAL_TOL: f64 = 1e-12;

impl JointDist {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let a = rows.len();
        let b = rows.first().map_or(0, Vec::len);
        if a == 0 || b == 0 || rows.iter().any(|r| r.len() != b) {
            return invalid("joint distribution must be a non-empty rectangular table");
        }
        if rows.iter().flatten().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return invalid("probabilities must be finite and non-negative");
        }
        let total: f64 = rows.iter().flatten().sum();
        if (total - 1.0).abs() > TOTAL_TOL {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        let p = Self { a, b, rows };
        if p.marginal_a().iter().chain(&p.marginal_b()).any(|&m| m <= 0.0) {
            return invalid("every symbol needs positive marginal probability");
        }
        Ok(p)
    }

    /// Renormalizes a non-negative table before validating it.
    pub fn normalized(mut rows: Vec<Vec<f64>>) -> Result<Self> {
        let total: f64 = rows.iter().flatten().sum();
        if !(total > 0.0) {
            return invalid("table has no mass");
        }
        rows.iter_mut().flatten().for_each(|p| *p /= total);
        Self::new(rows)
    }

    /// P(0,0) = P(1,1) = (1+ρ)/4, P(0,1) = P(1,0) = (1−ρ)/4.
    pub fn binary_symmetric(rho: f64) -> Result<Self> {
        if !(rho.abs() <= 1.0) {
            return invalid(format!("rho {rho} outside [-1, 1]"));
        }
        let (s, d) = ((1.0 + rho) / 4.0, (1.0 - rho) / 4.0);
        Self::new(vec![vec![s, d], vec![d, s]])
    }

    pub fn independent(pa: &[f64], pb: &[f64]) -> Result<Self> {
        Self::normalized(pa.iter().map(|x| pb.iter().map(|y| x * y).collect()).collect())
    }

    /// Uniform mass on the diagonal of an m × m alphabet.
    pub fn diagonal(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| (0..m).map(|j| if i == j { 1.0 / m as f64 } else { 0.0 }).collect()).collect())
    }

    /// Random table with entries bounded away from 0.
    pub fn random(a: usize, b: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::normalized((0..a).map(|_| (0..b).map(|_| rng.random::<f64>() + 0.05).collect()).collect())
    }

    pub fn size_a(&self) -> usize {
        self.a
    }

    pub fn size_b(&self) -> usize {
        self.b
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.b).map(|j| self.rows.iter().map(|r| r[j]).sum()).collect()
    }

    /// Merges symbols through `fa: A → A'` and `fb: B → B'`.
    pub fn coarsen(&self, fa: &[usize], fb: &[usize]) -> Result<Self> {
        if fa.len() != self.a || fb.len() != self.b {
            return invalid("relabeling maps must cover both alphabets");
        }
        let na = fa.iter().max().map_or(0, |m| m + 1);
        let nb = fb.iter().max().map_or(0, |m| m + 1);
        let mut rows = vec![vec![0.0; nb]; na];
        for (x, r) in self.rows.iter().enumerate() {
            for (y, &p) in r.iter().enumerate() {
                rows[fa[x]][fb[y]] += p;
            }
        }
        Self::new(rows)
    }
}

/// Orthonormal bases X_j of L²(P_A) and Y_j of L²(P_B) with
/// E[X_i Y_j] = δ_ij ρ_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBasis {
    /// x[a][j] = X_j(a).
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// Length max(|A|, |B|); entries past the shared rank are 0.
    pub rho: Vec<f64>,
}

impl CorrelationBasis {
    /// Maximal correlation ρ_1.
    pub fn maximal_correlation(&self) -> f64 {
        self.rho.get(1).copied().unwrap_or(0.0)
    }

    pub fn x_fn(&self, j: usize) -> Vec<f64> {
        self.x.iter().map(|r| r[j]).collect()
    }

    pub fn y_fn(&self, j: usize) -> Vec<f64> {
        self.y.iter().map(|r| r[j]).collect()
    }
}

const RANK_TOL: f64 = 1e-13;

/// Extends orthonormal columns to a full orthonormal basis of R^m with
/// standard basis vectors (modified Gram–Schmidt, applied twice).
fn complete(mut cols: Vec<DVector<f64>>, m: usize) -> Vec<DVector<f64>> {
    for e in 0..m {
        if cols.len() == m {
            break;
        }
        let mut v = DVector::from_fn(m, |i, _| if i == e { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    cols
}

fn sign_fix(v: &mut DVector<f64>) -> bool {
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) if x < 0.0 => {
            v.neg_mut();
            true
        }
        _ => false,
    }
}

/// Thin SVD by one-sided Jacobi rotations: (σ, u, v) triples, unsorted.
/// Used instead of the bidiagonal QR SVD, which loses accuracy on the
/// rank-deficient deflated matrices produced here.
fn jacobi_svd(a: &DMatrix<f64>) -> Vec<(f64, DVector<f64>, DVector<f64>)> {
    let transposed = a.nrows() < a.ncols();
    let mut w = if transposed { a.transpose() } else { a.clone() };
    let n = w.ncols();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = c * x - s * y;
                        m[(r, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..n)
        .map(|j| {
            let col = w.column(j).into_owned();
            let sigma = col.norm();
            let u = if sigma > 0.0 { col / sigma } else { col };
            let vj = v.column(j).into_owned();
            if transposed { (sigma, vj, u) } else { (sigma, u, vj) }
        })
        .collect()
}

/// SVD of M(a,b) = P(a,b)/√(P_A(a)P_B(b)) with the trivial pair (√P_A, √P_B)
/// deflated first, so X_0 ≡ 1 even when ρ_1 = 1.
pub fn correlation_basis(p: &JointDist) -> Result<CorrelationBasis> {
    let (ma, mb) = (p.size_a(), p.size_b());
    let pa = p.marginal_a();
    let pb = p.marginal_b();
    let sa = DVector::from_iterator(ma, pa.iter().map(|v| v.sqrt()));
    let sb = DVector::from_iterator(mb, pb.iter().map(|v| v.sqrt()));
    let m = DMatrix::from_fn(ma, mb, |i, j| p.p(i, j) / (sa[i] * sb[j]));
    let deflated = &m - &sa * sb.transpose();
    let mut triples: Vec<(f64, DVector<f64>, DVector<f64>)> =
        jacobi_svd(&deflated).into_iter().filter(|t| t.0 > RANK_TOL).collect();
    triples.sort_by(|a, b| b.0.total_cmp(&a.0));
    // re-orthonormalize in order of decreasing σ to wash out rounding in U = AV/σ
    let mut done_u = vec![sa.clone()];
    let mut done_v = vec![sb.clone()];
    for (s, uu, vv) in triples.iter_mut() {
        for (c, w) in [(uu, &mut done_u), (vv, &mut done_v)] {
            for _ in 0..2 {
                for d in w.iter() {
                    let x = d.dot(c);
                    *c -= d * x;
                }
            }
            let nrm = c.norm();
            *c /= nrm;
            w.push(c.clone());
        }
        *s = s.min(1.0);
    }
    let mut rho = vec![1.0];
    let mut ucols = vec![sa.clone()];
    let mut vcols = vec![sb.clone()];
    for (s, mut uu, mut vv) in triples {
        if sign_fix(&mut uu) {
            vv.neg_mut();
        }
        rho.push(s);
        ucols.push(uu);
        vcols.push(vv);
    }
    let mut ucols = complete(ucols, ma);
    let mut vcols = complete(vcols, mb);
    let shared = rho.len();
    for c in ucols.iter_mut().skip(shared) {
        sign_fix(c);
    }
    for c in vcols.iter_mut().skip(shared) {
        sign_fix(c);
    }
    rho.resize(ma.max(mb), 0.0);
    let x = (0..ma).map(|a| ucols.iter().map(|c| c[a] / sa[a]).collect()).collect();
    let y = (0..mb).map(|b| vcols.iter().map(|c| c[b] / sb[b]).collect()).collect();
    Ok(CorrelationBasis { x, y, rho })
}
