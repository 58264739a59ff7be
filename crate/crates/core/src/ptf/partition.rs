use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cube::CubeFn;
use crate::error::{check_dim, invalid, Error, Result};
use crate::rounding::{FieldFn, ThresholdVector};
use crate::tensor::{CompiledFamily, PolyGauss};

/// Multivariate PTF: label j iff p_j(x) > 0 and p_i(x) ≤ 0 for all i ≠ j;
/// label 0 otherwise (including on the collision set).
#[derive(Clone, Serialize, Deserialize)]
#[serde(from = "Vec<PolyGauss>", into = "Vec<PolyGauss>")]
pub struct MultiPtf {
    polys: Vec<PolyGauss>,
    compiled: CompiledFamily,
}

impl fmt::Debug for MultiPtf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiPtf").field("polys", &self.polys).finish()
    }
}

impl PartialEq for MultiPtf {
    fn eq(&self, other: &Self) -> bool {
        self.polys == other.polys
    }
}

impl From<Vec<PolyGauss>> for MultiPtf {
    fn from(polys: Vec<PolyGauss>) -> Self {
        let compiled = CompiledFamily::new(&polys);
        Self { polys, compiled }
    }
}

impl From<MultiPtf> for Vec<PolyGauss> {
    fn from(p: MultiPtf) -> Self {
        p.polys
    }
}

impl MultiPtf {
    pub fn new(polys: Vec<PolyGauss>) -> Result<Self> {
        if polys.len() < 2 {
            return invalid("a PTF partition needs at least two polynomials");
        }
        let n = polys[0].dim();
        for p in &polys {
            check_dim(n, p.dim())?;
        }
        Ok(polys.into())
    }

    /// Two-label PTF (p, −p): label 0 where p > 0, label 1 where p < 0.
    pub fn binary(p: PolyGauss) -> Self {
        let neg = p.scaled(-1.0);
        vec![p, neg].into()
    }

    pub fn polys(&self) -> &[PolyGauss] {
        &self.polys
    }

    pub fn k(&self) -> usize {
        self.polys.len()
    }

    pub fn n(&self) -> usize {
        self.polys[0].dim()
    }

    pub fn degree(&self) -> usize {
        self.polys.iter().map(PolyGauss::degree).max().unwrap_or(0)
    }

    pub(crate) fn compiled(&self) -> &CompiledFamily {
        &self.compiled
    }
}

/// Label rule for PTF values.
pub fn ptf_label(values: &[f64]) -> usize {
    let mut winner = None;
    for (j, &v) in values.iter().enumerate() {
        if v > 0.0 {
            if winner.is_some() {
                return 0;
            }
            winner = Some(j);
        }
    }
    winner.unwrap_or(0)
}

/// Number of strictly positive values ≠ 1.
pub fn is_collision(values: &[f64]) -> bool {
    values.iter().filter(|&&v| v > 0.0).count() != 1
}

pub type LabelCallback = Arc<dyn Fn(&[f64]) -> usize + Send + Sync>;

#[derive(Clone)]
pub enum PartitionKind {
    /// Label 0 iff ⟨x − a, b⟩ ≤ 0.
    Halfspace { a: Vec<f64>, b: Vec<f64> },
    /// Intervals of coordinate `axis` cut at strictly increasing breakpoints;
    /// interval j (x ≤ breakpoints[0] is interval 0) gets `labels[j]`.
    Slabs { axis: usize, breakpoints: Vec<f64>, labels: Vec<usize> },
    Ptf(MultiPtf),
    /// Cube table applied to the sign pattern of x (bit i set iff x_i < 0).
    Tabulated(CubeFn),
    /// argmax_j (F_j(x) − z_j), ties to the smallest index.
    Rounded { field: FieldFn, z: ThresholdVector },
    Callback(LabelCallback),
}

impl fmt::Debug for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Halfspace { a, b } => f.debug_struct("Halfspace").field("a", a).field("b", b).finish(),
            Self::Slabs { axis, breakpoints, labels } => f
                .debug_struct("Slabs")
                .field("axis", axis)
                .field("breakpoints", breakpoints)
                .field("labels", labels)
                .finish(),
            Self::Ptf(p) => p.fmt(f),
            Self::Tabulated(c) => c.fmt(f),
            Self::Rounded { field, z } => f.debug_struct("Rounded").field("field", field).field("z", z).finish(),
            Self::Callback(_) => f.write_str("Callback"),
        }
    }
}

/// A k-ary partition of R^n.
#[derive(Debug, Clone)]
pub struct PartitionFn {
    pub kind: PartitionKind,
    pub k: usize,
    pub n: usize,
}

impl PartitionFn {
    pub fn halfspace(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_dim(a.len(), b.len())?;
        if b.iter().all(|&v| v == 0.0) {
            return invalid("halfspace normal must be nonzero");
        }
        let n = a.len();
        Ok(Self { kind: PartitionKind::Halfspace { a, b }, k: 2, n })
    }

    /// {x_1 ≤ c} vs its complement, embedded in R^n.
    pub fn threshold(n: usize, c: f64) -> Self {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        a[0] = c;
        b[0] = 1.0;
        Self { kind: PartitionKind::Halfspace { a, b }, k: 2, n }
    }

    pub fn median_halfspace(n: usize) -> Self {
        Self::threshold(n, 0.0)
    }

    pub fn slabs(n: usize, axis: usize, breakpoints: Vec<f64>) -> Result<Self> {
        let labels = (0..=breakpoints.len()).collect();
        Self::slabs_labeled(n, axis, breakpoints, labels)
    }

    pub fn slabs_labeled(n: usize, axis: usize, breakpoints: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if axis >= n {
            return invalid(format!("axis {axis} out of range for n = {n}"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| b.is_nan()) {
            return invalid("slab breakpoints must be strictly increasing");
        }
        check_dim(breakpoints.len() + 1, labels.len())?;
        let k = labels.iter().max().map_or(1, |m| m + 1).max(2);
        Ok(Self { kind: PartitionKind::Slabs { axis, breakpoints, labels }, k, n })
    }

    /// k slabs of equal Gaussian measure along the first axis.
    pub fn equal_slabs(n: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return invalid("need at least two slabs");
        }
        let bps = (1..k).map(|j| crate::gauss::norm_ppf(j as f64 / k as f64)).collect();
        Self::slabs(n, 0, bps)
    }

    pub fn ptf(p: MultiPtf) -> Self {
        let (k, n) = (p.k(), p.n());
        Self { kind: PartitionKind::Ptf(p), k, n }
    }

    pub fn tabulated(c: CubeFn) -> Self {
        let (k, n) = (c.k, c.n);
        Self { kind: PartitionKind::Tabulated(c), k, n }
    }

    pub fn rounded(field: FieldFn, z: ThresholdVector) -> Result<Self> {
        check_dim(field.k(), z.z.len())?;
        let (k, n) = (field.k(), field.n());
        Ok(Self { kind: PartitionKind::Rounded { field, z }, k, n })
    }

    pub fn callback(n: usize, k: usize, f: impl Fn(&[f64]) -> usize + Send + Sync + 'static) -> Self {
        Self { kind: PartitionKind::Callback(Arc::new(f)), k, n }
    }

    /// Label 0 on {x ∈ R^n : angle(x_1, x_2) in sector j} — k equal angular sectors.
    pub fn sectors(n: usize, k: usize, phase: f64) -> Result<Self> {
        if n < 2 || k < 2 {
            return invalid("sector partitions need n ≥ 2 and k ≥ 2");
        }
        let width = std::f64::consts::TAU / k as f64;
        Ok(Self::callback(n, k, move |x| {
            let a = (x[1].atan2(x[0]) - phase).rem_euclid(std::f64::consts::TAU);
            ((a / width) as usize).min(k - 1)
        }))
    }

    pub fn as_ptf(&self) -> Option<&MultiPtf> {
        match &self.kind {
            PartitionKind::Ptf(p) => Some(p),
            _ => None,
        }
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        let (scratch, values) = match &self.kind {
            PartitionKind::Ptf(p) => (p.compiled().scratch(), vec![0.0; p.k()]),
            PartitionKind::Rounded { field, .. } => (Vec::new(), vec![0.0; field.k()]),
            _ => (Vec::new(), Vec::new()),
        };
        Evaluator { f: self, scratch, values }
    }

    pub fn eval(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.n, x.len())?;
        Ok(self.evaluator().label(x))
    }
}

/// Reusable evaluation buffers for one partition.
pub struct Evaluator<'a> {
    f: &'a PartitionFn,
    scratch: Vec<f64>,
    values: Vec<f64>,
}

impl Evaluator<'_> {
    /// Label of `x`; the caller guarantees `x.len() == n`.
    pub fn label(&mut self, x: &[f64]) -> usize {
        match &self.f.kind {
            PartitionKind::Halfspace { a, b } => {
                let s: f64 = x.iter().zip(a).zip(b).map(|((xi, ai), bi)| (xi - ai) * bi).sum();
                usize::from(s > 0.0)
            }
            PartitionKind::Slabs { axis, breakpoints, labels } => {
                let v = x[*axis];
                labels[breakpoints.partition_point(|&b| b < v)]
            }
            PartitionKind::Ptf(p) => {
                p.compiled().eval_into(x, &mut self.scratch, &mut self.values);
                ptf_label(&self.values)
            }
            PartitionKind::Tabulated(c) => {
                let idx = x.iter().enumerate().fold(0usize, |acc, (i, &v)| acc | (usize::from(v < 0.0) << i));
                c.labels[idx] as usize
            }
            PartitionKind::Rounded { field, z } => {
                field.eval_into(x, &mut self.values);
                argmax_shifted(&self.values, &z.z)
            }
            PartitionKind::Callback(cb) => cb(x),
        }
    }

    /// PTF values at `x` (for collision checks); `None` for other kinds.
    pub fn ptf_values(&mut self, x: &[f64]) -> Option<&[f64]> {
        match &self.f.kind {
            PartitionKind::Ptf(p) => {
                p.compiled().eval_into(x, &mut self.scratch, &mut self.values);
                Some(&self.values)
            }
            _ => None,
        }
    }
}

/// argmax_j (values_j − z_j) with ties to the smallest index.
pub fn argmax_shifted(values: &[f64], z: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (j, (v, zj)) in values.iter().zip(z).enumerate() {
        let s = v - zj;
        if s > best_v {
            best_v = s;
            best = j;
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
enum KindDoc {
    Halfspace { a: Vec<f64>, b: Vec<f64> },
    Slabs { axis: usize, breakpoints: Vec<f64>, labels: Vec<usize> },
    Ptf { polys: Vec<PolyGauss> },
    Tabulated(CubeFn),
    Rounded { field: FieldFn, z: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
struct PartitionDoc {
    #[serde(flatten)]
    kind: KindDoc,
    k: usize,
    n: usize,
}

impl Serialize for PartitionFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let kind = match &self.kind {
            PartitionKind::Halfspace { a, b } => KindDoc::Halfspace { a: a.clone(), b: b.clone() },
            PartitionKind::Slabs { axis, breakpoints, labels } => {
                KindDoc::Slabs { axis: *axis, breakpoints: breakpoints.clone(), labels: labels.clone() }
            }
            PartitionKind::Ptf(p) => KindDoc::Ptf { polys: p.polys().to_vec() },
            PartitionKind::Tabulated(c) => KindDoc::Tabulated(c.clone()),
            PartitionKind::Rounded { field, z } => {
                if !field.is_serializable() {
                    return Err(serde::ser::Error::custom("rounded partition over a callback field"));
                }
                KindDoc::Rounded { field: field.clone(), z: z.z.clone() }
            }
            PartitionKind::Callback(_) => return Err(serde::ser::Error::custom("callback partitions are not serializable")),
        };
        PartitionDoc { kind, k: self.k, n: self.n }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartitionFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PartitionDoc::deserialize(d)?;
        let built = match doc.kind {
            KindDoc::Halfspace { a, b } => PartitionFn::halfspace(a, b),
            KindDoc::Slabs { axis, breakpoints, labels } => PartitionFn::slabs_labeled(doc.n, axis, breakpoints, labels),
            KindDoc::Ptf { polys } => MultiPtf::new(polys).map(PartitionFn::ptf),
            KindDoc::Tabulated(c) => Ok(PartitionFn::tabulated(c)),
            KindDoc::Rounded { field, z } => PartitionFn::rounded(field, ThresholdVector::new(z)),
        }
        .map_err(serde::de::Error::custom)?;
        if built.n != doc.n || built.k != doc.k {
            return Err(serde::de::Error::custom(Error::InvalidParameter(format!(
                "declared shape (k={}, n={}) does not match payload (k={}, n={})",
                doc.k, doc.n, built.k, built.n
            ))));
        }
        Ok(built)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfspace_labels() {
        let h = PartitionFn::halfspace(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(h.eval(&[-1.0, 5.0]).unwrap(), 0);
        assert_eq!(h.eval(&[0.0, 5.0]).unwrap(), 0);
        assert_eq!(h.eval(&[0.1, 5.0]).unwrap(), 1);
        assert!(h.eval(&[0.1]).is_err());
    }

    #[test]
    fn ptf_fallback() {
        let c = |v| PolyGauss::constant(1, v);
        let p = PartitionFn::ptf(MultiPtf::new(vec![c(1.0), c(-1.0)]).unwrap());
        assert_eq!(p.eval(&[0.3]).unwrap(), 0);
        let p = PartitionFn::ptf(MultiPtf::new(vec![c(1.0), c(1.0)]).unwrap());
        assert_eq!(p.eval(&[0.3]).unwrap(), 0);
        let p = PartitionFn::ptf(MultiPtf::new(vec![c(-1.0), c(1.0)]).unwrap());
        assert_eq!(p.eval(&[0.3]).unwrap(), 1);
        let p = PartitionFn::ptf(MultiPtf::new(vec![c(-1.0), c(-1.0)]).unwrap());
        assert_eq!(p.eval(&[0.3]).unwrap(), 0);
    }

    #[test]
    fn slabs_and_sectors() {
        let s = PartitionFn::slabs(2, 1, vec![-1.0, 1.0]).unwrap();
        assert_eq!(s.k, 3);
        assert_eq!(s.eval(&[9.0, -1.0]).unwrap(), 0);
        assert_eq!(s.eval(&[9.0, 0.0]).unwrap(), 1);
        assert_eq!(s.eval(&[9.0, 1.5]).unwrap(), 2);
        assert!(PartitionFn::slabs(1, 0, vec![1.0, 1.0]).is_err());
        let sec = PartitionFn::sectors(2, 3, 0.0).unwrap();
        assert_eq!(sec.eval(&[1.0, 0.1]).unwrap(), 0);
        assert_eq!(sec.eval(&[-1.0, 0.1]).unwrap(), 1);
        assert_eq!(sec.eval(&[0.5, -1.0]).unwrap(), 2);
    }

    #[test]
    fn json_round_trip() {
        let parts = vec![
            PartitionFn::median_halfspace(2),
            PartitionFn::slabs_labeled(1, 0, vec![-0.5, 0.5], vec![1, 0, 1]).unwrap(),
            PartitionFn::ptf(MultiPtf::binary(PolyGauss::linear(&[1.0, -2.0], 0.5))),
        ];
        for p in parts {
            let s = serde_json::to_string(&p).unwrap();
            let back: PartitionFn = serde_json::from_str(&s).unwrap();
            assert_eq!(serde_json::to_string(&back).unwrap(), s);
            assert_eq!((back.k, back.n), (p.k, p.n));
        }
        assert!(serde_json::to_string(&PartitionFn::callback(1, 2, |_| 0)).is_err());
    }
}
