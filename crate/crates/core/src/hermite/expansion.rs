use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::{gauss_hermite_rule, hermite_all, HermiteIndex, TensorGrid, MAX_QUADRATURE_DIM};

/// Coefficients below this magnitude are dropped.
pub const DROP_TOL: f64 = 1e-14;

/// Threshold above which the Parseval tail and the explicit high-degree sum are
/// reported as disagreeing.
pub const TAIL_FLAG_TOL: f64 = 1e-6;

/// Truncated Hermite expansion of a map R^n → R^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ExpansionDoc", try_from = "ExpansionDoc")]
pub struct HermiteExpansion {
    pub n: usize,
    pub k: usize,
    pub max_degree: usize,
    pub coeffs: BTreeMap<HermiteIndex, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ExpansionDoc {
    n: usize,
    k: usize,
    max_degree: usize,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    index: Vec<usize>,
    coeff: Vec<f64>,
}

impl From<HermiteExpansion> for ExpansionDoc {
    fn from(e: HermiteExpansion) -> Self {
        ExpansionDoc {
            n: e.n,
            k: e.k,
            max_degree: e.max_degree,
            entries: e.coeffs.into_iter().map(|(s, c)| EntryDoc { index: s.entries, coeff: c }).collect(),
        }
    }
}

impl TryFrom<ExpansionDoc> for HermiteExpansion {
    type Error = Error;
    fn try_from(doc: ExpansionDoc) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for e in doc.entries {
            check_dim(doc.n, e.index.len())?;
            check_dim(doc.k, e.coeff.len())?;
            let s = HermiteIndex::new(e.index);
            if s.degree() > doc.max_degree {
                return invalid(format!("index {:?} exceeds max_degree {}", s.entries, doc.max_degree));
            }
            coeffs.insert(s, e.coeff);
        }
        Ok(HermiteExpansion { n: doc.n, k: doc.k, max_degree: doc.max_degree, coeffs })
    }
}

/// Mass of an expansion by degree, plus the Parseval residual above `max_degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralWeights {
    pub by_degree: Vec<f64>,
    pub tail: f64,
}

/// The two readings of W^{>d}: total mass minus low-degree mass, and the
/// explicit sum of stored coefficients above d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub residual: f64,
    pub explicit: f64,
    pub disagree: bool,
}

impl SpectralWeights {
    pub fn total(&self) -> f64 {
        self.by_degree.iter().sum::<f64>() + self.tail
    }

    pub fn above(&self, d: usize) -> TailReport {
        let explicit: f64 = self.by_degree.iter().skip(d + 1).sum();
        let residual = explicit + self.tail;
        TailReport { residual, explicit, disagree: (residual - explicit).abs() > TAIL_FLAG_TOL }
    }
}

impl HermiteExpansion {
    pub fn zero(n: usize, k: usize, max_degree: usize) -> Self {
        Self { n, k, max_degree, coeffs: BTreeMap::new() }
    }

    pub fn coeff(&self, s: &HermiteIndex) -> Option<&[f64]> {
        self.coeffs.get(s).map(Vec::as_slice)
    }

    /// Σ_S ‖f̂(S)‖².
    pub fn mass(&self) -> f64 {
        self.coeffs.values().flat_map(|c| c.iter()).map(|v| v * v).sum()
    }

    pub fn inner(&self, other: &HermiteExpansion) -> f64 {
        self.coeffs
            .iter()
            .filter_map(|(s, a)| other.coeffs.get(s).map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()))
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let table = axis_table(x, self.max_degree);
        let mut out = vec![0.0; self.k];
        for (s, c) in &self.coeffs {
            let h = basis_value(&table, self.max_degree, s);
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * h;
            }
        }
        Ok(out)
    }

    /// Keeps only indices of degree ≤ d.
    pub fn truncate(&self, d: usize) -> HermiteExpansion {
        let coeffs = self.coeffs.iter().filter(|(s, _)| s.degree() <= d).map(|(s, c)| (s.clone(), c.clone())).collect();
        HermiteExpansion { n: self.n, k: self.k, max_degree: d.min(self.max_degree), coeffs }
    }

    /// Single output coordinate as a scalar expansion.
    pub fn component(&self, j: usize) -> HermiteExpansion {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(_, c)| c[j].abs() >= DROP_TOL)
            .map(|(s, c)| (s.clone(), vec![c[j]]))
            .collect();
        HermiteExpansion { n: self.n, k: 1, max_degree: self.max_degree, coeffs }
    }
}

fn axis_table(x: &[f64], max_degree: usize) -> Vec<f64> {
    let stride = max_degree + 1;
    let mut table = vec![0.0; x.len() * stride];
    for (i, &xi) in x.iter().enumerate() {
        hermite_all(xi, &mut table[i * stride..(i + 1) * stride]);
    }
    table
}

fn basis_value(table: &[f64], max_degree: usize, s: &HermiteIndex) -> f64 {
    let stride = max_degree + 1;
    s.entries.iter().enumerate().map(|(i, &q)| table[i * stride + q]).product()
}

const GRID_CHUNK: usize = 2048;

/// Expansion of `f` up to `max_degree` together with the quadrature estimate of E‖f‖².
pub fn expand_with_mass<F>(f: F, n: usize, max_degree: usize, quad_order: usize) -> Result<(HermiteExpansion, f64)>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if n > MAX_QUADRATURE_DIM {
        return Err(Error::QuadratureDimension(n));
    }
    let rule = gauss_hermite_rule(quad_order)?;
    let grid = TensorGrid::new(&rule, n)?;
    let k = f(grid.point(0)).len();
    if k == 0 {
        return invalid("function must have at least one output");
    }
    let indices = HermiteIndex::all_up_to(n, max_degree);
    let width = indices.len() * k;
    let chunks = grid.len().div_ceil(GRID_CHUNK);
    let partials: Vec<Result<(Vec<f64>, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            let mut mass = 0.0;
            for p in c * GRID_CHUNK..((c + 1) * GRID_CHUNK).min(grid.len()) {
                let x = grid.point(p);
                let w = grid.weights[p];
                let v = f(x);
                if v.len() != k {
                    return Err(Error::DimensionMismatch { expected: k, got: v.len() });
                }
                if v.iter().any(|z| !z.is_finite()) {
                    return Err(Error::NonFinite(format!("f({x:?}) = {v:?}")));
                }
                mass += w * v.iter().map(|z| z * z).sum::<f64>();
                let table = axis_table(x, max_degree);
                for (si, s) in indices.iter().enumerate() {
                    let h = w * basis_value(&table, max_degree, s);
                    for (a, z) in acc[si * k..(si + 1) * k].iter_mut().zip(&v) {
                        *a += h * z;
                    }
                }
            }
            Ok((acc, mass))
        })
        .collect();
    let mut total = vec![0.0; width];
    let mut mass = 0.0;
    for part in partials {
        let (acc, m) = part?;
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
        mass += m;
    }
    let mut coeffs = BTreeMap::new();
    for (si, s) in indices.into_iter().enumerate() {
        let c = &total[si * k..(si + 1) * k];
        if c.iter().any(|v| v.abs() >= DROP_TOL) {
            coeffs.insert(s, c.iter().map(|&v| if v.abs() < DROP_TOL { 0.0 } else { v }).collect());
        }
    }
    Ok((HermiteExpansion { n, k, max_degree, coeffs }, mass))
}

/// Hermite coefficients of `f` on R^n (n ≤ 3) by tensor-product Gauss–Hermite quadrature.
pub fn expand<F>(f: F, n: usize, max_degree: usize, quad_order: usize) -> Result<HermiteExpansion>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    expand_with_mass(f, n, max_degree, quad_order).map(|(e, _)| e)
}

pub fn spectral_weights(e: &HermiteExpansion, total_mass: f64) -> Result<SpectralWeights> {
    let mut by_degree = vec![0.0; e.max_degree + 1];
    for (s, c) in &e.coeffs {
        by_degree[s.degree()] += c.iter().map(|v| v * v).sum::<f64>();
    }
    let tail = total_mass - by_degree.iter().sum::<f64>();
    if tail < -1e-8 {
        return Err(Error::Numeric(format!(
            "coefficient mass exceeds total mass by {:.3e}; quadrature is unreliable",
            -tail
        )));
    }
    Ok(SpectralWeights { by_degree, tail: tail.max(0.0) })
}
