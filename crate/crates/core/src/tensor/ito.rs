use std::collections::BTreeMap;

use crate::error::{check_dim, Result};
use crate::gauss::hermite_all;

use super::multiset::{binom, factorial, multiplicity, runs};
use super::symmetric::{contract_symmetrized, SymmetricTensor};

/// Multiple Wiener–Itô integral I_q(h)(x) of a symmetric tensor:
/// Σ_S h(S)·sqrt(q!/∏ m_i!)·∏ H_{m_i}(x_i) over multisets S.
pub fn ito_eval(h: &SymmetricTensor, x: &[f64]) -> Result<f64> {
    let q = h.order();
    if q == 0 {
        return Ok(h.values()[0]);
    }
    check_dim(h.dim(), x.len())?;
    let stride = q + 1;
    let mut table = vec![0.0; x.len() * stride];
    for (i, &xi) in x.iter().enumerate() {
        hermite_all(xi, &mut table[i * stride..(i + 1) * stride]);
    }
    let mut total = 0.0;
    for (ms, v) in h.entries() {
        if v == 0.0 {
            continue;
        }
        let basis: f64 = runs(&ms).iter().map(|&(i, m)| table[i * stride + m]).product();
        total += v * multiplicity(&ms).sqrt() * basis;
    }
    Ok(total)
}

/// Chaos decomposition of I_p(f)·I_q(g):
/// Σ_r r!·C(p,r)·C(q,r)·sqrt((p+q−2r)!/(p!q!))·sym(f ⊗_r g) at order p+q−2r.
pub fn ito_product(f: &SymmetricTensor, g: &SymmetricTensor) -> Result<BTreeMap<usize, SymmetricTensor>> {
    let (p, q) = (f.order(), g.order());
    if p > 0 && q > 0 {
        check_dim(f.dim(), g.dim())?;
    }
    let mut out = BTreeMap::new();
    for r in 0..=p.min(q) {
        let m = p + q - 2 * r;
        let c = factorial(r) * binom(p, r) as f64 * binom(q, r) as f64 * (factorial(m) / (factorial(p) * factorial(q))).sqrt();
        let t = contract_symmetrized(f, g, r)?.scaled(c);
        let t = if m == 0 { SymmetricTensor::scalar_in(f.dim().max(g.dim()), t.values()[0]) } else { t };
        out.insert(m, t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::hermite_eval;

    #[test]
    fn low_order_integrals() {
        let e1 = SymmetricTensor::vector(&[1.0, 0.0]);
        assert_eq!(ito_eval(&e1, &[0.3, 2.0]).unwrap(), 0.3);
        let h = SymmetricTensor::rank_one(&[1.0, 0.0], 2);
        assert!((ito_eval(&h, &[1.7, 0.2]).unwrap() - hermite_eval(2, 1.7)).abs() < 1e-14);
        let s = SymmetricTensor::basis(2, &[0, 1]);
        let x = [1.3, -0.4];
        assert!((ito_eval(&s, &x).unwrap() - x[0] * x[1] / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rank_one_rule() {
        let u = [0.6, -0.8, 0.0];
        let x = [0.9, 1.4, -2.0];
        let proj: f64 = u.iter().zip(&x).map(|(a, b)| a * b).sum();
        for q in 1..=4 {
            let h = SymmetricTensor::rank_one(&u, q);
            assert!((ito_eval(&h, &x).unwrap() - hermite_eval(q, proj)).abs() < 1e-12);
        }
    }

    #[test]
    fn square_of_linear() {
        let e1 = SymmetricTensor::vector(&[1.0]);
        let prod = ito_product(&e1, &e1).unwrap();
        assert!((prod[&0].values()[0] - 1.0).abs() < 1e-15);
        assert!((prod[&2].values()[0] - 2f64.sqrt()).abs() < 1e-15);
        let e1 = SymmetricTensor::vector(&[1.0, 0.0]);
        let e2 = SymmetricTensor::vector(&[0.0, 1.0]);
        let prod = ito_product(&e1, &e2).unwrap();
        assert_eq!(prod[&0].values()[0], 0.0);
        assert!((prod[&2].get(&[0, 1]) - 2f64.sqrt() * 0.5).abs() < 1e-15);
    }
}
