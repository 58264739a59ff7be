use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::multiset::{for_each_multiset, multiset_count};
use super::poly::PolyGauss;
use super::symmetric::SymmetricTensor;

/// Cap on lifted tensor storage.
pub const MAX_LIFT_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilinearLift {
    pub r: PolyGauss,
    pub w: PolyGauss,
    pub var_gap: f64,
}

/// Substitutes x_i ↦ (x_{i,1} + … + x_{i,T})/sqrt(T) (coordinate (i, s) becomes
/// i·T + s) and drops repeated-index entries to get a multilinear w.
pub fn multilinear_lift(p: &PolyGauss, t: usize) -> Result<MultilinearLift> {
    if t == 0 {
        return invalid("block size T must be at least 1");
    }
    let n = p.dim();
    let big = n * t;
    let mut r = PolyGauss::constant(big, p.constant_term());
    let mut w = PolyGauss::constant(big, p.constant_term());
    let mut var_gap = 0.0;
    for (&q, f) in p.chaos() {
        if multiset_count(big, q) > MAX_LIFT_ENTRIES {
            return invalid(format!("lifted order-{q} tensor over {big} coordinates is too large"));
        }
        let scale = (t as f64).powf(-(q as f64) / 2.0);
        let mut rt = SymmetricTensor::zeros(q, big);
        let mut wt = SymmetricTensor::zeros(q, big);
        let mut base = Vec::with_capacity(q);
        for_each_multiset(big, q, |idx, ms| {
            base.clear();
            base.extend(ms.iter().map(|&j| j / t));
            let v = f.get_sorted(&base) * scale;
            rt.values_mut()[idx] = v;
            if ms.windows(2).all(|w| w[0] != w[1]) {
                wt.values_mut()[idx] = v;
            }
        });
        let mut diff = rt.clone();
        diff.add_scaled(&wt, -1.0)?;
        var_gap += diff.frobenius_sq();
        r.add_component(&rt)?;
        w.add_component(&wt)?;
    }
    Ok(MultilinearLift { r, w, var_gap })
}
