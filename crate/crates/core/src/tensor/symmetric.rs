use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

use super::multiset::{
    for_each_multiset, merge_sorted, multiplicity, multiset_count, rank, rank_unsorted, splits, unrank,
};

/// Cap on dense (ordered) tensor size.
pub const MAX_DENSE_ENTRIES: usize = 1 << 26;

/// Symmetric order-q tensor over R^n, one value per multiset of indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TensorDoc", try_from = "TensorDoc")]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TensorDoc {
    order: usize,
    dim: usize,
    entries: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    multiset: Vec<usize>,
    value: f64,
}

impl From<SymmetricTensor> for TensorDoc {
    fn from(t: SymmetricTensor) -> Self {
        let entries = t
            .entries()
            .filter(|(_, v)| *v != 0.0)
            .map(|(multiset, value)| TensorEntry { multiset, value })
            .collect();
        TensorDoc { order: t.order, dim: t.dim, entries }
    }
}

impl TryFrom<TensorDoc> for SymmetricTensor {
    type Error = Error;
    fn try_from(doc: TensorDoc) -> Result<Self> {
        let mut t = SymmetricTensor::zeros(doc.order, doc.dim);
        for e in doc.entries {
            check_dim(doc.order, e.multiset.len())?;
            if e.multiset.iter().any(|&i| i >= doc.dim) {
                return invalid(format!("multiset {:?} out of range for dim {}", e.multiset, doc.dim));
            }
            t.set(&e.multiset, e.value);
        }
        Ok(t)
    }
}

impl SymmetricTensor {
    pub fn zeros(order: usize, dim: usize) -> Self {
        Self { order, dim, values: vec![0.0; multiset_count(dim, order)] }
    }

    pub fn scalar(v: f64) -> Self {
        Self { order: 0, dim: 0, values: vec![v] }
    }

    /// Order-0 tensor carrying an explicit dimension.
    pub fn scalar_in(dim: usize, v: f64) -> Self {
        Self { order: 0, dim, values: vec![v] }
    }

    pub fn vector(v: &[f64]) -> Self {
        Self { order: 1, dim: v.len(), values: v.to_vec() }
    }

    /// u^{⊗q}.
    pub fn rank_one(u: &[f64], q: usize) -> Self {
        let mut t = Self::zeros(q, u.len());
        let mut buf = Vec::new();
        for r in 0..t.values.len() {
            unrank(r, q, &mut buf);
            t.values[r] = buf.iter().map(|&i| u[i]).product();
        }
        t
    }

    /// Symmetrization of e_{i_1} ⊗ … ⊗ e_{i_q}.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut t = Self::zeros(idx.len(), dim);
        let mut s = idx.to_vec();
        s.sort_unstable();
        t.values[rank(&s)] = 1.0 / multiplicity(&s);
        t
    }

    pub fn from_values(order: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(multiset_count(dim, order), values.len())?;
        Ok(Self { order, dim, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Entry at any ordering of an index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[rank_unsorted(idx)]
    }

    pub fn get_sorted(&self, sorted: &[usize]) -> f64 {
        self.values[rank(sorted)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        self.values[rank_unsorted(idx)] = v;
    }

    /// (sorted multiset, value) pairs in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let q = self.order;
        self.values.iter().enumerate().map(move |(r, &v)| {
            let mut buf = Vec::with_capacity(q);
            unrank(r, q, &mut buf);
            (buf, v)
        })
    }

    /// As [`entries`](Self::entries), skipping zero values.
    pub fn nonzeros(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let q = self.order;
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(r, &v)| {
            let mut buf = Vec::with_capacity(q);
            unrank(r, q, &mut buf);
            (buf, v)
        })
    }

    /// Σ over multisets of (q!/∏ m_i!)·a·b — the ordered-entry inner product.
    pub fn inner(&self, other: &SymmetricTensor) -> Result<f64> {
        self.same_shape(other)?;
        let mut s = 0.0;
        for_each_multiset(self.dim, self.order, |r, ms| {
            let (a, b) = (self.values[r], other.values[r]);
            if a != 0.0 && b != 0.0 {
                s += multiplicity(ms) * a * b;
            }
        });
        Ok(s)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.inner(self).unwrap_or(0.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn add_scaled(&mut self, other: &SymmetricTensor, c: f64) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    fn same_shape(&self, other: &SymmetricTensor) -> Result<()> {
        if self.order != other.order {
            return invalid(format!("tensor orders differ: {} vs {}", self.order, other.order));
        }
        if self.order > 0 {
            check_dim(self.dim, other.dim)?;
        }
        Ok(())
    }

    /// Same tensor viewed in a larger ambient dimension (new coordinates are zero).
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim && self.order > 0 {
            return invalid("cannot embed into a smaller dimension");
        }
        if self.order == 0 {
            return Ok(Self::scalar_in(dim, self.values[0]));
        }
        let mut out = Self::zeros(self.order, dim);
        // colex rank of a multiset does not depend on n, so storage is a prefix
        out.values[..self.values.len()].copy_from_slice(&self.values);
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        let total = dense_len(self.dim, self.order)?;
        let mut data = vec![0.0; total];
        let mut idx = vec![0usize; self.order];
        for slot in data.iter_mut() {
            *slot = self.get(&idx);
            advance(&mut idx, self.dim);
        }
        Ok(DenseTensor { order: self.order, dim: self.dim, data, symmetrized: true })
    }
}

fn dense_len(dim: usize, order: usize) -> Result<usize> {
    let total = (dim as u128).pow(order as u32);
    if total > MAX_DENSE_ENTRIES as u128 {
        return Err(Error::Budget(format!("dense tensor with {dim}^{order} entries")));
    }
    Ok(total as usize)
}

fn advance(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

/// Ordered (not necessarily symmetric) tensor, row-major in its indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    pub order: usize,
    pub dim: usize,
    pub data: Vec<f64>,
    /// False for raw contraction products, whose entries depend on index order.
    pub symmetrized: bool,
}

impl DenseTensor {
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut off = 0;
        for &i in idx {
            off = off * self.dim + i;
        }
        self.data[off]
    }
}

/// Average over all index permutations.
pub fn symmetrize(t: &DenseTensor) -> SymmetricTensor {
    let mut out = SymmetricTensor::zeros(t.order, t.dim);
    let mut idx = vec![0usize; t.order];
    for &v in &t.data {
        out.values[rank_unsorted(&idx)] += v;
        advance(&mut idx, t.dim);
    }
    let mut buf = Vec::new();
    for r in 0..out.values.len() {
        unrank(r, t.order, &mut buf);
        out.values[r] /= multiplicity(&buf);
    }
    out
}

fn check_contraction(f: &SymmetricTensor, g: &SymmetricTensor, r: usize) -> Result<()> {
    if r > f.order.min(g.order) {
        return invalid(format!("contraction depth {r} exceeds orders {} and {}", f.order, g.order));
    }
    if f.order > 0 && g.order > 0 {
        check_dim(f.dim, g.dim)?;
    }
    Ok(())
}

/// f ⊗_r g: (t, t') ↦ Σ_z f(t, z) g(t', z), as an ordered tensor of order p+q−2r.
pub fn contract(f: &SymmetricTensor, g: &SymmetricTensor, r: usize) -> Result<DenseTensor> {
    check_contraction(f, g, r)?;
    let n = f.dim.max(g.dim);
    let (p, q) = (f.order, g.order);
    let rows_f = dense_len(n, p - r)?;
    let rows_g = dense_len(n, q - r)?;
    let inner = dense_len(n, r)?;
    dense_len(n, p + q - 2 * r)?;
    let fd = f.embed(n)?.to_dense()?;
    let gd = g.embed(n)?.to_dense()?;
    let fm = DMatrix::from_row_slice(rows_f, inner, &fd.data);
    let gm = DMatrix::from_row_slice(rows_g, inner, &gd.data);
    let prod = fm * gm.transpose();
    let mut data = Vec::with_capacity(rows_f * rows_g);
    for i in 0..rows_f {
        for j in 0..rows_g {
            data.push(prod[(i, j)]);
        }
    }
    Ok(DenseTensor { order: p + q - 2 * r, dim: n, data, symmetrized: false })
}

/// sym(f ⊗_r g) computed directly in multiset storage, without materializing
/// the ordered product.
pub fn contract_symmetrized(f: &SymmetricTensor, g: &SymmetricTensor, r: usize) -> Result<SymmetricTensor> {
    check_contraction(f, g, r)?;
    let n = f.dim.max(g.dim);
    let (p, q) = (f.order, g.order);
    let m = p + q - 2 * r;
    let fe = f.embed(n)?;
    let ge = g.embed(n)?;
    let mut zs: Vec<(Vec<usize>, f64)> = Vec::new();
    for_each_multiset(n, r, |_, z| zs.push((z.to_vec(), multiplicity(z))));
    let mut out = SymmetricTensor::zeros(m, n);
    let mut fa = Vec::new();
    let mut gb = Vec::new();
    let mut buf = Vec::new();
    for idx in 0..out.values.len() {
        unrank(idx, m, &mut buf);
        let mut v = 0.0;
        for (a, b, w) in splits(&buf, p - r) {
            let mut s = 0.0;
            for (z, mult) in &zs {
                merge_sorted(&a, z, &mut fa);
                let x = fe.values[rank(&fa)];
                if x == 0.0 {
                    continue;
                }
                merge_sorted(&b, z, &mut gb);
                s += mult * x * ge.values[rank(&gb)];
            }
            v += w * s;
        }
        out.values[idx] = v;
    }
    Ok(out)
}
