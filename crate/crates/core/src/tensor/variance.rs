use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};

use super::poly::PolyGauss;

/// Tolerance for the mean-zero and unit-variance preconditions.
pub const PRECONDITION_TOL: f64 = 1e-9;

/// Bounds on Var(p·q) next to its exact value.
///
/// `upper` requires E[q] = 0 and `lower_schedule` requires unit variances;
/// each is `None` when its precondition fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceBounds {
    pub upper: Option<f64>,
    pub lower_top: f64,
    pub lower_schedule: Option<f64>,
    pub product_variance: f64,
}

impl VarianceBounds {
    pub fn holds(&self) -> bool {
        let v = self.product_variance;
        let slack = 1e-12 * v.max(1.0);
        self.lower_top <= v + slack
            && self.upper.is_none_or(|u| v <= u + slack)
            && self.lower_schedule.is_none_or(|l| l <= v + slack)
    }
}

fn top(p: &PolyGauss) -> f64 {
    match p.degree() {
        0 => p.constant_term().powi(2),
        d => p.component(d).map(|t| t.frobenius_sq()).unwrap_or(0.0),
    }
}

/// ln of the schedule lower bound ((L/2)·L^{−2^{2d}})², L = 4·T·9^{d+1}·(d+1)².
pub fn log_schedule_bound(second_moment: f64, d: usize) -> f64 {
    let df = d as f64;
    let ln_l = (4.0 * second_moment).ln() + (df + 1.0) * 9f64.ln() + 2.0 * (df + 1.0).ln();
    2.0 * (ln_l - 2f64.ln() - 4f64.powi(d as i32) * ln_l)
}

pub fn variance_bounds(p: &PolyGauss, q: &PolyGauss) -> Result<VarianceBounds> {
    check_dim(p.dim(), q.dim())?;
    let (d1, d2) = (p.degree(), q.degree());
    if d1 == 0 && d2 == 0 {
        return invalid("variance bounds need at least one non-constant polynomial");
    }
    let product_variance = p.mul(q)?.variance();
    let (m2p, m2q) = (p.second_moment(), q.second_moment());
    let d = d1.max(d2);
    let upper = (q.mean().abs() <= PRECONDITION_TOL).then(|| 9f64.powi(d as i32) * m2p * m2q);
    let unit = (p.variance() - 1.0).abs() <= PRECONDITION_TOL && (q.variance() - 1.0).abs() <= PRECONDITION_TOL;
    let lower_schedule = unit.then(|| log_schedule_bound(m2p.max(m2q), d).exp());
    Ok(VarianceBounds { upper, lower_top: top(p) * top(q), lower_schedule, product_variance })
}
