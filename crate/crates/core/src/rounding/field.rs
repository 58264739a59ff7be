use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::norm_cdf;
use crate::hermite::ou_pointwise;
use crate::ptf::{PartitionFn, PartitionKind};

pub type FieldCallback = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A map R^n → Δk, typically P_t applied to a partition's one-hot embedding.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldFn {
    /// P_t of the halfspace {⟨x − a, b⟩ ≤ 0} vs complement, ρ = e^{−t}.
    Halfspace { a: Vec<f64>, b: Vec<f64>, rho: f64 },
    /// P_t of a labeled slab partition.
    Slabs { n: usize, k: usize, axis: usize, breakpoints: Vec<f64>, labels: Vec<usize>, rho: f64 },
    Grid(GridField),
    #[serde(skip)]
    Callback { n: usize, k: usize, f: FieldCallback },
}

impl fmt::Debug for FieldFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Halfspace { a, b, rho } => f.debug_struct("Halfspace").field("a", a).field("b", b).field("rho", rho).finish(),
            Self::Slabs { axis, breakpoints, labels, rho, .. } => f
                .debug_struct("Slabs")
                .field("axis", axis)
                .field("breakpoints", breakpoints)
                .field("labels", labels)
                .field("rho", rho)
                .finish(),
            Self::Grid(g) => f.debug_struct("Grid").field("n", &g.n).field("k", &g.k).field("points", &g.points).finish(),
            Self::Callback { n, k, .. } => f.debug_struct("Callback").field("n", n).field("k", k).finish(),
        }
    }
}

/// Φ(num/den), with den = 0 meaning the unsmoothed step.
fn smooth_step(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        norm_cdf(num / den)
    } else if num >= 0.0 {
        1.0
    } else {
        0.0
    }
}

impl FieldFn {
    pub fn callback(n: usize, k: usize, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self::Callback { n, k, f: Arc::new(f) }
    }

    pub fn k(&self) -> usize {
        match self {
            Self::Halfspace { .. } => 2,
            Self::Slabs { k, .. } | Self::Callback { k, .. } => *k,
            Self::Grid(g) => g.k,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Halfspace { a, .. } => a.len(),
            Self::Slabs { n, .. } | Self::Callback { n, .. } => *n,
            Self::Grid(g) => g.n,
        }
    }

    pub fn is_serializable(&self) -> bool {
        !matches!(self, Self::Callback { .. })
    }

    /// Writes F(x) into `out` (length k); `x.len() == n` is the caller's job.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Halfspace { a, b, rho } => {
                let sigma = (1.0 - rho * rho).max(0.0).sqrt();
                let ab: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
                let xb: f64 = x.iter().zip(b).map(|(u, v)| u * v).sum();
                let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
                out[0] = smooth_step(ab - rho * xb, sigma * bn);
                out[1] = 1.0 - out[0];
            }
            Self::Slabs { axis, breakpoints, labels, rho, .. } => {
                let sigma = (1.0 - rho * rho).max(0.0).sqrt();
                let m = rho * x[*axis];
                out.fill(0.0);
                let mut prev = 0.0;
                for (j, &l) in labels.iter().enumerate() {
                    let cdf = breakpoints.get(j).map_or(1.0, |&b| smooth_step(b - m, sigma));
                    out[l] += cdf - prev;
                    prev = cdf;
                }
            }
            Self::Grid(g) => g.eval_into(x, out),
            Self::Callback { f, .. } => f(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n(), x.len())?;
        let mut out = vec![0.0; self.k()];
        self.eval_into(x, &mut out);
        Ok(out)
    }
}

/// Values on a regular grid over [lo, hi]^n, multilinearly interpolated and
/// clamped outside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub n: usize,
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Point-major, first axis slowest, k values per point.
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(n: usize, k: usize, lo: f64, hi: f64, points: usize, values: Vec<f64>) -> Result<Self> {
        if points < 2 || !(lo < hi) || n == 0 {
            return invalid("grid needs n ≥ 1, at least two points per axis and lo < hi");
        }
        check_dim(points.pow(n as u32) * k, values.len())?;
        Ok(Self { n, k, lo, hi, points, values })
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        let mut base = 0usize;
        let mut frac = [0.0f64; 8];
        let mut strides = [0usize; 8];
        let mut stride = self.k;
        for i in (0..self.n).rev() {
            let u = ((x[i] - self.lo) / step).clamp(0.0, (self.points - 1) as f64);
            let c = (u.floor() as usize).min(self.points - 2);
            frac[i] = u - c as f64;
            strides[i] = stride;
            base += c * stride;
            stride *= self.points;
        }
        out.fill(0.0);
        for corner in 0..1usize << self.n {
            let mut w = 1.0;
            let mut off = base;
            for i in 0..self.n {
                if corner >> i & 1 == 1 {
                    w *= frac[i];
                    off += strides[i];
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            if w != 0.0 {
                for (o, v) in out.iter_mut().zip(&self.values[off..off + self.k]) {
                    *o += w * v;
                }
            }
        }
    }
}

/// Discretization used when P_t has no closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridResolution {
    /// Cells per axis, including the two unbounded tail cells.
    pub cells: usize,
    /// Label-fraction sub-samples per cell and axis.
    pub subsamples: usize,
    pub eval_points: usize,
    pub half_width: f64,
}

impl GridResolution {
    pub fn default_for(n: usize) -> Self {
        let (cells, subsamples, eval_points) = match n {
            1 => (4002, 8, 4001),
            2 => (242, 4, 241),
            _ => (50, 3, 49),
        };
        Self { cells, subsamples, eval_points, half_width: 6.0 }
    }
}

/// F = P_t f as a map into Δk. Halfspaces and slabs are exact; other
/// partitions with n ≤ 3 are convolved cell-by-cell against the Gaussian
/// kernel on a grid.
pub fn smooth_partition(f: &PartitionFn, t: f64) -> Result<FieldFn> {
    smooth_partition_with(f, t, GridResolution::default_for(f.n))
}

pub fn smooth_partition_with(f: &PartitionFn, t: f64, res: GridResolution) -> Result<FieldFn> {
    if !(t > 0.0) {
        return invalid(format!("smoothing time must be positive, got {t}"));
    }
    let rho = (-t).exp();
    match &f.kind {
        PartitionKind::Halfspace { a, b } => Ok(FieldFn::Halfspace { a: a.clone(), b: b.clone(), rho }),
        PartitionKind::Slabs { axis, breakpoints, labels } => Ok(FieldFn::Slabs {
            n: f.n,
            k: f.k,
            axis: *axis,
            breakpoints: breakpoints.clone(),
            labels: labels.clone(),
            rho,
        }),
        _ if f.n <= 3 => convolve_cells(f, rho, res).map(FieldFn::Grid),
        _ => Err(Error::QuadratureDimension(f.n)),
    }
}

/// Quadrature reference for P_t f at one point (used to validate grids).
pub fn smooth_pointwise(f: &PartitionFn, t: f64, x: &[f64], quad_order: usize) -> Result<Vec<f64>> {
    check_dim(f.n, x.len())?;
    let k = f.k;
    ou_pointwise(
        |y| {
            let mut v = vec![0.0; k];
            v[f.evaluator().label(y)] = 1.0;
            v
        },
        t,
        x,
        quad_order,
    )
}

struct Axis {
    edges: Vec<f64>,
    samples: Vec<Vec<f64>>,
}

fn axis(res: &GridResolution) -> Result<Axis> {
    let g = res.cells;
    if g < 3 || res.subsamples == 0 || res.eval_points < 2 {
        return invalid("grid resolution too coarse");
    }
    let l = res.half_width;
    let h = 2.0 * l / (g - 2) as f64;
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend((1..g).map(|c| -l + (c - 1) as f64 * h));
    edges.push(f64::INFINITY);
    let s = res.subsamples;
    let samples = (0..g)
        .map(|c| {
            (0..s)
                .map(|j| {
                    let off = (j as f64 + 0.5) / s as f64 * h;
                    if c == 0 {
                        -l - off
                    } else if c == g - 1 {
                        l + off
                    } else {
                        edges[c] + off
                    }
                })
                .collect()
        })
        .collect();
    Ok(Axis { edges, samples })
}

fn cell_fractions(f: &PartitionFn, ax: &Axis) -> Vec<f64> {
    let n = f.n;
    let k = f.k;
    let g = ax.samples.len();
    let s = ax.samples[0].len();
    let cells = g.pow(n as u32);
    let inner = s.pow(n as u32);
    let w = 1.0 / inner as f64;
    (0..cells)
        .into_par_iter()
        .map_init(
            || (f.evaluator(), vec![0.0; n]),
            |(ev, x), cell| {
                let mut frac = vec![0.0; k];
                for sub in 0..inner {
                    let (mut c, mut j) = (cell, sub);
                    for i in (0..n).rev() {
                        x[i] = ax.samples[c % g][j % s];
                        c /= g;
                        j /= s;
                    }
                    frac[ev.label(x)] += w;
                }
                frac
            },
        )
        .flatten_iter()
        .collect()
}

fn convolve_cells(f: &PartitionFn, rho: f64, res: GridResolution) -> Result<GridField> {
    let ax = axis(&res)?;
    let (n, k, g, e) = (f.n, f.k, res.cells, res.eval_points);
    let fractions = cell_fractions(f, &ax);
    let sigma = (1.0 - rho * rho).sqrt();
    let l = res.half_width;
    let xs: Vec<f64> = (0..e).map(|i| -l + 2.0 * l * i as f64 / (e - 1) as f64).collect();
    let cdf = |edge: f64, x: f64| {
        if edge == f64::NEG_INFINITY {
            0.0
        } else if edge == f64::INFINITY {
            1.0
        } else {
            smooth_step(edge - rho * x, sigma)
        }
    };
    let w = DMatrix::from_fn(e, g, |r, c| cdf(ax.edges[c + 1], xs[r]) - cdf(ax.edges[c], xs[r]));

    let total = e.pow(n as u32);
    let mut values = vec![0.0; total * k];
    for label in 0..k {
        // tensor over axes, row-major; contract the leading axis and rotate it to the back
        let mut data: Vec<f64> = fractions.iter().skip(label).step_by(k).copied().collect();
        for _ in 0..n {
            let rest = data.len() / g;
            // column-major (rest × g) view of row-major (g × rest) data is its transpose
            let t = DMatrix::from_column_slice(rest, g, &data);
            let prod = t * w.transpose();
            // row-major (rest × e) == column-major of the transpose
            data = prod.transpose().as_slice().to_vec();
        }
        for (i, v) in data.into_iter().enumerate() {
            values[i * k + label] = v;
        }
    }
    GridField::new(n, k, -l, l, e, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_sum_to_one() {
        let f = smooth_partition(&PartitionFn::equal_slabs(2, 3).unwrap(), 0.5).unwrap();
        let v = f.eval(&[0.3, -2.0]).unwrap();
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let h = smooth_partition(&PartitionFn::median_halfspace(1), 0.5).unwrap();
        let v = h.eval(&[0.0]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn slab_closed_form_matches_quadrature() {
        let s = PartitionFn::slabs_labeled(1, 0, vec![-0.5, 0.7], vec![1, 0, 1]).unwrap();
        let f = smooth_partition(&s, 0.4).unwrap();
        let rho = (-0.4f64).exp();
        let sigma = (1.0 - rho * rho).sqrt();
        for x in [-1.3, 0.0, 0.9] {
            let a = f.eval(&[x]).unwrap();
            // midpoint rule over the kernel
            let m = 200_000;
            let mut b = 0.0;
            for i in 0..m {
                let z = -9.0 + 18.0 * (i as f64 + 0.5) / m as f64;
                let y = rho * x + sigma * z;
                if y > -0.5 && y <= 0.7 {
                    b += crate::gauss::norm_pdf(z) * 18.0 / m as f64;
                }
            }
            assert!((a[0] - b).abs() < 1e-4, "{a:?} {b}");
            // Gauss–Hermite on an indicator converges slowly
            let q = smooth_pointwise(&s, 0.4, &[x], 200).unwrap();
            assert!((a[0] - q[0]).abs() < 5e-2);
        }
    }

    #[test]
    fn grid_reproduces_halfspace() {
        let hs = PartitionFn::halfspace(vec![0.2, 0.0], vec![1.0, -0.5]).unwrap();
        let cb = PartitionFn::callback(2, 2, {
            let hs = hs.clone();
            move |x| hs.evaluator().label(x)
        });
        let exact = smooth_partition(&hs, 0.3).unwrap();
        let grid = smooth_partition(&cb, 0.3).unwrap();
        for x in [[0.0, 0.0], [1.1, -0.4], [-2.0, 1.5], [0.33, 0.77]] {
            let a = exact.eval(&x).unwrap();
            let b = grid.eval(&x).unwrap();
            assert!((a[0] - b[0]).abs() < 5e-3, "{x:?}: {a:?} vs {b:?}");
            assert!((b[0] + b[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_one_dimensional() {
        let s = PartitionFn::slabs_labeled(1, 0, vec![-0.5, 0.7], vec![1, 0, 1]).unwrap();
        let cb = PartitionFn::callback(1, 2, {
            let s = s.clone();
            move |x| s.evaluator().label(x)
        });
        let exact = smooth_partition(&s, 0.2).unwrap();
        let grid = smooth_partition(&cb, 0.2).unwrap();
        for x in [-1.0, -0.5, 0.1, 0.7, 2.5] {
            let a = exact.eval(&[x]).unwrap();
            let b = grid.eval(&[x]).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-4, "{x}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn grid_serializes() {
        let g = GridField::new(1, 2, -1.0, 1.0, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let f = FieldFn::Grid(g);
        let s = serde_json::to_string(&f).unwrap();
        let back: FieldFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back.eval(&[0.0]).unwrap(), vec![0.5, 0.5]);
    }
}
