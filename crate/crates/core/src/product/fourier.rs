use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

use super::{CorrelationBasis, JointDist};

/// Largest table size m^n handled by exact enumeration.
pub const MAX_TABLE: usize = 1 << 20;

/// A function A^n → R^k stored densely; point index Σ x_i·m^i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductTable {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub values: Vec<f64>,
}

fn table_len(m: usize, n: usize) -> Result<usize> {
    m.checked_pow(n as u32)
        .filter(|&l| l <= MAX_TABLE)
        .ok_or_else(|| Error::Budget(format!("{m}^{n} points exceed {MAX_TABLE}")))
}

impl ProductTable {
    pub fn new(n: usize, m: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(table_len(m, n)? * k, values.len())?;
        Ok(Self { n, m, k, values })
    }

    /// One-hot embedding of a label table.
    pub fn from_labels(n: usize, m: usize, k: usize, labels: &[usize]) -> Result<Self> {
        check_dim(table_len(m, n)?, labels.len())?;
        if labels.iter().any(|&l| l >= k) {
            return invalid("label out of range");
        }
        let mut values = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            values[i * k + l] = 1.0;
        }
        Ok(Self { n, m, k, values })
    }

    pub fn from_fn(n: usize, m: usize, k: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let len = table_len(m, n)?;
        let labels: Vec<usize> = (0..len).map(|i| f(&digits(i, m, n))).collect();
        Self::from_labels(n, m, k, &labels)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.k..(idx + 1) * self.k]
    }

    /// Label of a one-hot table at `idx` (argmax).
    pub fn label(&self, idx: usize) -> usize {
        let v = self.value(idx);
        (0..self.k).fold(0, |best, j| if v[j] > v[best] { j } else { best })
    }
}

pub fn digits(mut idx: usize, m: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = idx % m;
            idx /= m;
            d
        })
        .collect()
}

/// Applies the m'×m matrix `mat` (row-major, out × in) along every axis of
/// a tensor stored with axis i at stride m^i and k trailing values.
fn mode_products(data: &[f64], n: usize, m_in: usize, m_out: usize, k: usize, mat: &[f64]) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut dims = vec![m_in; n];
    for axis in 0..n {
        let inner: usize = dims[..axis].iter().product();
        let outer: usize = dims[axis + 1..].iter().product();
        let mut next = vec![0.0; inner * m_out * outer * k];
        for o in 0..outer {
            for r in 0..m_out {
                for c in 0..m_in {
                    let w = mat[r * m_in + c];
                    if w == 0.0 {
                        continue;
                    }
                    for i in 0..inner {
                        let src = ((o * m_in + c) * inner + i) * k;
                        let dst = ((o * m_out + r) * inner + i) * k;
                        for j in 0..k {
                            next[dst + j] += w * cur[src + j];
                        }
                    }
                }
            }
        }
        cur = next;
        dims[axis] = m_out;
    }
    cur
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

/// Coefficients f̂(σ), σ ∈ Z_m^n indexed like table points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductFourier {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub coeffs: Vec<f64>,
}

impl ProductFourier {
    pub fn coeff(&self, sigma: usize) -> &[f64] {
        &self.coeffs[sigma * self.k..(sigma + 1) * self.k]
    }

    pub fn weight(&self, sigma: usize) -> f64 {
        self.coeff(sigma).iter().map(|v| v * v).sum()
    }

    /// Number of nonzero entries of σ.
    pub fn degree(&self, sigma: usize) -> usize {
        digits(sigma, self.m, self.n).iter().filter(|&&d| d != 0).count()
    }

    pub fn total(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// f̂(σ) = E_{x∼P^n}[f(x)·∏X_{σ_i}(x_i)] by exact weighted enumeration.
pub fn tensor_fourier(f: &ProductTable, basis: &CorrelationBasis, side: Side, p: &JointDist) -> Result<ProductFourier> {
    let (fns, marg) = match side {
        Side::A => (&basis.x, p.marginal_a()),
        Side::B => (&basis.y, p.marginal_b()),
    };
    let m = marg.len();
    check_dim(m, f.m)?;
    check_dim(m, fns.len())?;
    // mat[j][a] = P(a)·X_j(a)
    let mat: Vec<f64> = (0..m).flat_map(|j| (0..m).map(move |a| (j, a))).map(|(j, a)| marg[a] * fns[a][j]).collect();
    let coeffs = mode_products(&f.values, f.n, m, m, f.k, &mat);
    Ok(ProductFourier { n: f.n, k: f.k, m, coeffs })
}

/// E_{P^n}‖f‖².
pub fn table_norm_sq(f: &ProductTable, marg: &[f64]) -> Result<f64> {
    check_dim(f.m, marg.len())?;
    Ok((0..f.len())
        .map(|i| {
            let w: f64 = digits(i, f.m, f.n).iter().map(|&d| marg[d]).product();
            w * f.value(i).iter().map(|v| v * v).sum::<f64>()
        })
        .sum())
}

/// Inf_i = Σ_{σ_i ≠ 0} ‖f̂(σ)‖².
pub fn influence(f: &ProductFourier, i: usize) -> Result<f64> {
    if i >= f.n {
        return invalid(format!("coordinate {i} out of range for n = {}", f.n));
    }
    let stride = f.m.pow(i as u32);
    Ok((0..f.len()).filter(|s| (s / stride) % f.m != 0).map(|s| f.weight(s)).sum())
}

/// Scales f̂(σ) by (1 − δ)^{deg σ}.
pub fn smooth(f: &ProductFourier, delta: f64) -> Result<ProductFourier> {
    if !(0.0..=1.0).contains(&delta) {
        return invalid(format!("delta {delta} outside [0, 1]"));
    }
    let mut out = f.clone();
    for s in 0..f.len() {
        let c = (1.0 - delta).powi(f.degree(s) as i32);
        out.coeffs[s * f.k..(s + 1) * f.k].iter_mut().for_each(|v| *v *= c);
    }
    Ok(out)
}

/// Σ_σ ⟨f̂(σ), ĝ(σ)⟩·∏ρ_{σ_i}, with f̂ over A^n and ĝ over B^n.
pub fn correlation(f: &ProductFourier, g: &ProductFourier, rho: &[f64]) -> Result<f64> {
    check_dim(f.n, g.n)?;
    check_dim(f.k, g.k)?;
    let shared = f.m.min(g.m);
    if rho.len() < shared {
        return invalid("rho vector shorter than the shared alphabet");
    }
    let mut total = 0.0;
    for s in 0..shared.pow(f.n as u32) {
        let d = digits(s, shared, f.n);
        let weight: f64 = d.iter().map(|&j| rho[j]).product();
        if weight == 0.0 {
            continue;
        }
        let (fi, gi) = (index(&d, f.m), index(&d, g.m));
        total += weight * f.coeff(fi).iter().zip(g.coeff(gi)).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}

fn index(d: &[usize], m: usize) -> usize {
    d.iter().rev().fold(0, |acc, &x| acc * m + x)
}

/// E[⟨f(X), g(Y)⟩] for (X, Y) ∼ P^n by enumerating every point pair.
pub fn correlation_bruteforce(f: &ProductTable, g: &ProductTable, p: &JointDist) -> Result<f64> {
    check_dim(p.size_a(), f.m)?;
    check_dim(p.size_b(), g.m)?;
    check_dim(f.n, g.n)?;
    check_dim(f.k, g.k)?;
    let (la, lb) = (f.len(), g.len());
    if la.saturating_mul(lb) > MAX_TABLE * 16 {
        return Err(Error::Budget(format!("{la}×{lb} point pairs")));
    }
    let mut total = 0.0;
    for x in 0..la {
        let dx = digits(x, f.m, f.n);
        for y in 0..lb {
            let dy = digits(y, g.m, g.n);
            let w: f64 = dx.iter().zip(&dy).map(|(&a, &b)| p.p(a, b)).product();
            if w != 0.0 {
                total += w * f.value(x).iter().zip(g.value(y)).map(|(u, v)| u * v).sum::<f64>();
            }
        }
    }
    Ok(total)
}

/// δ-noise on every coordinate: keep the symbol w.p. 1 − δ, else resample
/// it from the marginal.
pub fn noise_table(f: &ProductTable, delta: f64, marg: &[f64]) -> Result<ProductTable> {
    if !(0.0..=1.0).contains(&delta) {
        return invalid(format!("delta {delta} outside [0, 1]"));
    }
    check_dim(f.m, marg.len())?;
    let m = f.m;
    let mat: Vec<f64> = (0..m)
        .flat_map(|r| (0..m).map(move |c| (r, c)))
        .map(|(r, c)| if r == c { 1.0 - delta } else { 0.0 } + delta * marg[c])
        .collect();
    let values = mode_products(&f.values, f.n, m, m, f.k, &mat);
    ProductTable::new(f.n, m, f.k, values)
}
