use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::hermite_all;
use crate::hermite::HermiteExpansion;

use super::ito::{ito_eval, ito_product};
use super::multiset::{factorial, multiplicity, runs};
use super::symmetric::SymmetricTensor;

/// Polynomial on Gaussian space in chaos form, p = c + Σ_{q≥1} I_q(f_q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyDoc", try_from = "PolyDoc")]
pub struct PolyGauss {
    dim: usize,
    constant: f64,
    chaos: BTreeMap<usize, SymmetricTensor>,
}

#[derive(Serialize, Deserialize)]
struct PolyDoc {
    dim: usize,
    constant: f64,
    chaos: Vec<SymmetricTensor>,
}

impl From<PolyGauss> for PolyDoc {
    fn from(p: PolyGauss) -> Self {
        PolyDoc { dim: p.dim, constant: p.constant, chaos: p.chaos.into_values().collect() }
    }
}

impl TryFrom<PolyDoc> for PolyGauss {
    type Error = Error;
    fn try_from(doc: PolyDoc) -> Result<Self> {
        let mut p = PolyGauss::constant(doc.dim, doc.constant);
        for t in doc.chaos {
            p.add_component(&t)?;
        }
        Ok(p)
    }
}

impl PolyGauss {
    pub fn constant(dim: usize, c: f64) -> Self {
        Self { dim, constant: c, chaos: BTreeMap::new() }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, 0.0)
    }

    /// c + Σ a_i x_i.
    pub fn linear(a: &[f64], c: f64) -> Self {
        let mut p = Self::constant(a.len(), c);
        if a.iter().any(|&v| v != 0.0) {
            p.chaos.insert(1, SymmetricTensor::vector(a));
        }
        p
    }

    /// coeff · H_S(x) for a multi-index S over `dim` coordinates.
    pub fn hermite_term(s: &[usize], coeff: f64) -> Self {
        let dim = s.len();
        let q: usize = s.iter().sum();
        if q == 0 {
            return Self::constant(dim, coeff);
        }
        let mut ms = Vec::with_capacity(q);
        for (i, &m) in s.iter().enumerate() {
            ms.extend(std::iter::repeat_n(i, m));
        }
        let mut t = SymmetricTensor::zeros(q, dim);
        t.set(&ms, coeff / multiplicity(&ms).sqrt());
        let mut p = Self::zero(dim);
        p.chaos.insert(q, t);
        p
    }

    /// Coordinate `j` of a Hermite expansion as a polynomial.
    pub fn from_hermite(e: &HermiteExpansion, j: usize) -> Result<Self> {
        if j >= e.k {
            return invalid(format!("component {j} out of range for k = {}", e.k));
        }
        let mut p = Self::zero(e.n);
        for (s, c) in &e.coeffs {
            if c[j] != 0.0 {
                p = p.add(&Self::hermite_term(&s.entries, c[j]))?;
            }
        }
        Ok(p)
    }

    pub fn from_components(dim: usize, constant: f64, parts: impl IntoIterator<Item = SymmetricTensor>) -> Result<Self> {
        let mut p = Self::constant(dim, constant);
        for t in parts {
            p.add_component(&t)?;
        }
        Ok(p)
    }

    /// Adds I_q(t); order-0 tensors add to the constant.
    pub fn add_component(&mut self, t: &SymmetricTensor) -> Result<()> {
        let q = t.order();
        if q == 0 {
            self.constant += t.values()[0];
            return Ok(());
        }
        check_dim(self.dim, t.dim())?;
        match self.chaos.get_mut(&q) {
            Some(cur) => cur.add_scaled(t, 1.0)?,
            None => {
                self.chaos.insert(q, t.clone());
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn chaos(&self) -> &BTreeMap<usize, SymmetricTensor> {
        &self.chaos
    }

    pub fn component(&self, q: usize) -> Option<&SymmetricTensor> {
        self.chaos.get(&q)
    }

    pub fn degree(&self) -> usize {
        self.chaos.iter().rev().find(|(_, t)| !t.is_zero()).map(|(&q, _)| q).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.constant
    }

    /// Var(p) = Σ_{q≥1} ‖f_q‖².
    pub fn variance(&self) -> f64 {
        self.chaos.values().map(|t| t.frobenius_sq()).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.constant * self.constant + self.variance()
    }

    /// E[p·q] by the isometry.
    pub fn inner(&self, other: &PolyGauss) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let mut s = self.constant * other.constant;
        for (q, t) in &self.chaos {
            if let Some(u) = other.chaos.get(q) {
                s += t.inner(u)?;
            }
        }
        Ok(s)
    }

    pub fn covariance(&self, other: &PolyGauss) -> Result<f64> {
        Ok(self.inner(other)? - self.constant * other.constant)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            constant: self.constant * c,
            chaos: self.chaos.iter().map(|(&q, t)| (q, t.scaled(c))).collect(),
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { constant: self.constant + c, ..self.clone() }
    }

    pub fn add(&self, other: &PolyGauss) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        out.constant += other.constant;
        for t in other.chaos.values() {
            out.add_component(t)?;
        }
        Ok(out)
    }

    /// Exact product through the Itô multiplication formula.
    pub fn mul(&self, other: &PolyGauss) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Self::constant(self.dim, self.constant * other.constant);
        for t in self.chaos.values() {
            out.add_component(&t.scaled(other.constant))?;
        }
        for u in other.chaos.values() {
            out.add_component(&u.scaled(self.constant))?;
        }
        for t in self.chaos.values() {
            for u in other.chaos.values() {
                for (_, part) in ito_product(t, u)? {
                    out.add_component(&part)?;
                }
            }
        }
        Ok(out)
    }

    /// Evaluation via the Itô integrals of each component.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let mut s = self.constant;
        for t in self.chaos.values() {
            s += ito_eval(t, x)?;
        }
        Ok(s)
    }

    /// Expansion in ordinary monomials: exponent vector → coefficient.
    pub fn to_monomials(&self) -> BTreeMap<Vec<u32>, f64> {
        let mut out: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        if self.constant != 0.0 {
            out.insert(vec![0; self.dim], self.constant);
        }
        for t in self.chaos.values() {
            for (ms, v) in t.entries() {
                if v == 0.0 {
                    continue;
                }
                let coeff = v * multiplicity(&ms).sqrt();
                // ∏_i H_{m_i}(x_i) with H_m = He_m/sqrt(m!)
                let mut terms: Vec<(Vec<u32>, f64)> = vec![(vec![0; self.dim], coeff)];
                for (i, m) in runs(&ms) {
                    let he = probabilists_hermite(m);
                    let norm = factorial(m).sqrt();
                    let mut next = Vec::new();
                    for (exps, c) in &terms {
                        for (pow, hc) in he.iter().enumerate() {
                            if *hc == 0.0 {
                                continue;
                            }
                            let mut e = exps.clone();
                            e[i] += pow as u32;
                            next.push((e, c * hc / norm));
                        }
                    }
                    terms = next;
                }
                for (e, c) in terms {
                    *out.entry(e).or_insert(0.0) += c;
                }
            }
        }
        out
    }

    pub fn compile(&self) -> CompiledFamily {
        CompiledFamily::new(std::slice::from_ref(self))
    }
}

/// Coefficients of He_m(x) = Σ_j (−1)^j m!/(j!(m−2j)!2^j) x^{m−2j}, by power.
fn probabilists_hermite(m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m + 1];
    for j in 0..=m / 2 {
        let v = factorial(m) / (factorial(j) * factorial(m - 2 * j) * 2f64.powi(j as i32));
        c[m - 2 * j] = if j % 2 == 0 { v } else { -v };
    }
    c
}

pub fn eval_monomials(monos: &BTreeMap<Vec<u32>, f64>, x: &[f64]) -> f64 {
    monos.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>()).sum()
}

/// Several polynomials compiled over a shared table of per-coordinate Hermite
/// values. Each distinct monomial is evaluated once per point and scattered
/// into every polynomial that uses it.
#[derive(Debug, Clone)]
pub struct CompiledFamily {
    dim: usize,
    slots: Vec<(usize, usize, usize)>,
    table_len: usize,
    constants: Vec<f64>,
    // monomial m has table factors factors[offsets[m]..offsets[m+1]]
    // and contributions uses[starts[m]..starts[m+1]] as (poly, coeff)
    offsets: Vec<u32>,
    factors: Vec<u32>,
    starts: Vec<u32>,
    uses: Vec<(u32, f64)>,
}

impl CompiledFamily {
    pub fn new(polys: &[PolyGauss]) -> Self {
        let dim = polys.iter().map(|p| p.dim).max().unwrap_or(0);
        let mut max_deg = vec![None::<usize>; dim];
        let mut terms: Vec<(Vec<(usize, usize)>, u32, f64)> = Vec::new();
        for (pi, p) in polys.iter().enumerate() {
            for t in p.chaos.values() {
                for (ms, v) in t.nonzeros() {
                    let r = runs(&ms);
                    for &(i, m) in &r {
                        max_deg[i] = Some(max_deg[i].map_or(m, |d: usize| d.max(m)));
                    }
                    terms.push((r, pi as u32, v * multiplicity(&ms).sqrt()));
                }
            }
        }
        let mut slots = Vec::new();
        let mut offset_of = vec![0usize; dim];
        let mut table_len = 0;
        for (i, d) in max_deg.iter().enumerate() {
            if let Some(d) = d {
                slots.push((i, *d, table_len));
                offset_of[i] = table_len;
                table_len += d + 1;
            }
        }
        let mut grouped: BTreeMap<Vec<u32>, Vec<(u32, f64)>> = BTreeMap::new();
        for (r, pi, c) in terms {
            let key = r.iter().map(|&(i, m)| (offset_of[i] + m) as u32).collect();
            grouped.entry(key).or_default().push((pi, c));
        }
        let mut cf = Self {
            dim,
            slots,
            table_len,
            constants: polys.iter().map(|p| p.constant).collect(),
            offsets: vec![0],
            factors: Vec::new(),
            starts: vec![0],
            uses: Vec::new(),
        };
        for (key, u) in grouped {
            cf.factors.extend(key);
            cf.offsets.push(cf.factors.len() as u32);
            cf.uses.extend(u);
            cf.starts.push(cf.uses.len() as u32);
        }
        cf
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    pub fn scratch(&self) -> Vec<f64> {
        vec![0.0; self.table_len]
    }

    /// Evaluates every polynomial at `x` into `out`. `x` may be longer than
    /// the family's dimension; extra coordinates are ignored.
    pub fn eval_into(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        for &(i, d, off) in &self.slots {
            hermite_all(x[i], &mut scratch[off..off + d + 1]);
        }
        out.copy_from_slice(&self.constants);
        for m in 0..self.starts.len() - 1 {
            let mut v = 1.0;
            for &f in &self.factors[self.offsets[m] as usize..self.offsets[m + 1] as usize] {
                v *= scratch[f as usize];
            }
            for &(p, c) in &self.uses[self.starts[m] as usize..self.starts[m + 1] as usize] {
                out[p as usize] += c * v;
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut scratch = self.scratch();
        let mut out = vec![0.0; self.constants.len()];
        self.eval_into(x, &mut scratch, &mut out);
        out
    }
}
