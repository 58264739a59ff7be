use crate::error::{check_dim, invalid, Error, Result};
use crate::gauss::{gauss_hermite_rule, TensorGrid, MAX_QUADRATURE_DIM};

use super::HermiteExpansion;

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        invalid(format!("noise time {t} must be non-negative"))
    }
}

/// P_t on coefficients: f̂(S) ↦ e^{−t|S|} f̂(S). `t = ∞` keeps only the mean.
pub fn apply_ou(e: &HermiteExpansion, t: f64) -> Result<HermiteExpansion> {
    check_time(t)?;
    let mut out = e.clone();
    for (s, c) in out.coeffs.iter_mut() {
        let deg = s.degree();
        let factor = if deg == 0 { 1.0 } else { (-t * deg as f64).exp() };
        for v in c.iter_mut() {
            *v *= factor;
        }
    }
    Ok(out)
}

/// (P_t f)(x) = E[f(e^{−t}x + sqrt(1 − e^{−2t}) Z)] by Gauss–Hermite quadrature in Z.
pub fn ou_pointwise<F>(f: F, t: f64, x: &[f64], quad_order: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    check_time(t)?;
    let n = x.len();
    if n > MAX_QUADRATURE_DIM {
        return Err(Error::QuadratureDimension(n));
    }
    let rho = (-t).exp();
    if rho == 1.0 {
        return Ok(f(x));
    }
    let sigma = (1.0 - rho * rho).sqrt();
    let grid = TensorGrid::new(&gauss_hermite_rule(quad_order)?, n)?;
    let mut y = vec![0.0; n];
    let mut out: Vec<f64> = Vec::new();
    for p in 0..grid.len() {
        for ((yi, &xi), &zi) in y.iter_mut().zip(x).zip(grid.point(p)) {
            *yi = rho * xi + sigma * zi;
        }
        let v = f(&y);
        if out.is_empty() {
            out = vec![0.0; v.len()];
        }
        check_dim(out.len(), v.len())?;
        if v.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!("f({y:?}) = {v:?}")));
        }
        let w = grid.weights[p];
        for (o, z) in out.iter_mut().zip(v) {
            *o += w * z;
        }
    }
    Ok(out)
}

/// Diagnostic bound C·E‖∇f‖₁/√d on W^{≥d}[f], with C = 1.
pub fn gradient_tail_bound(grad_l1: f64, d: usize) -> f64 {
    gradient_tail_bound_with(grad_l1, d, 1.0)
}

pub fn gradient_tail_bound_with(grad_l1: f64, d: usize, c: f64) -> f64 {
    c * grad_l1 / (d.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{hermite_eval, HermiteIndex};
    use crate::hermite::expand;

    #[test]
    fn ou_on_coefficients() {
        let e = expand(|x| vec![x[0] * x[0] * x[0], x[1]], 2, 3, 8).unwrap();
        let same = apply_ou(&e, 0.0).unwrap();
        assert_eq!(same, e);
        let inf = apply_ou(&e, f64::INFINITY).unwrap();
        for (s, c) in &inf.coeffs {
            if s.degree() > 0 {
                assert!(c.iter().all(|&v| v == 0.0));
            }
        }
        let h = apply_ou(&e, 2f64.ln()).unwrap();
        let s3 = HermiteIndex::unit(2, 0, 3);
        assert!((h.coeff(&s3).unwrap()[0] - e.coeff(&s3).unwrap()[0] / 8.0).abs() < 1e-14);
        assert!(apply_ou(&e, -1.0).is_err());
    }

    #[test]
    fn pointwise() {
        let x = [0.7, -1.1];
        assert_eq!(ou_pointwise(|y| vec![y[0] + y[1]], 0.0, &x, 20).unwrap(), vec![x[0] + x[1]]);
        let v = ou_pointwise(|y| vec![y[0]], 0.8, &x, 20).unwrap();
        assert!((v[0] - (-0.8f64).exp() * 0.7).abs() < 1e-12);
        let half = ou_pointwise(|y| vec![if y[0] <= 0.0 { 1.0 } else { 0.0 }], 0.5, &[0.0], 40).unwrap();
        assert!((half[0] - 0.5).abs() < 1e-12);
        let h3 = ou_pointwise(|y| vec![hermite_eval(3, y[0])], 0.3, &[1.4], 40).unwrap();
        assert!((h3[0] - (-0.9f64).exp() * hermite_eval(3, 1.4)).abs() < 1e-10);
    }

    #[test]
    fn gradient_bound() {
        assert_eq!(gradient_tail_bound(0.0, 3), 0.0);
        assert!((gradient_tail_bound(1.0, 4) - 0.5).abs() < 1e-15);
    }
}
