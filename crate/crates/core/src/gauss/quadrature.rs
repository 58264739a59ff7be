use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest dimension accepted by tensor-product quadrature.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// Default number of nodes per axis.
pub const DEFAULT_QUAD_ORDER: usize = 40;

/// Gauss–Hermite rule for the standard Gaussian measure (weights sum to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
/// orthonormal Hermite recurrence, x H_j = sqrt(j+1) H_{j+1} + sqrt(j) H_{j-1};
/// the weights are the squared first components of the normalized eigenvectors.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for i in 1..order {
        let b = (i as f64).sqrt();
        jacobi[(i - 1, i)] = b;
        jacobi[(i, i - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // The rule is symmetric in exact arithmetic; enforce it so odd moments vanish.
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order {
        let j = order - 1 - i;
        nodes[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        weights[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) || weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::Numeric(format!("Gauss-Hermite rule of order {order} degenerated")));
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(QuadratureRule { order, nodes, weights })
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Tensor-product grid of a one-dimensional rule, stored point-major.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TensorGrid {
    pub fn new(rule: &QuadratureRule, dim: usize) -> Result<Self> {
        if dim > MAX_QUADRATURE_DIM {
            return Err(Error::QuadratureDimension(dim));
        }
        let m = rule.order;
        let total = m.pow(dim as u32);
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut w = 1.0;
            for &i in &idx {
                points.push(rule.nodes[i]);
                w *= rule.weights[i];
            }
            weights.push(w);
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < m {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(Self { dim, points, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}
