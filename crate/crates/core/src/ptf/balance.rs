use crate::error::{invalid, Result};

use super::partition::MultiPtf;

/// Mean bound log^{d/2}(k·d/δ) of a (d, δ)-balanced PTF.
pub fn balance_bound(k: usize, d: usize, delta: f64) -> f64 {
    ((k * d) as f64 / delta).ln().max(0.0).powf(d as f64 / 2.0)
}

/// Rescales every polynomial to unit variance and clamps each mean into
/// [−B, B], B = log^{d/2}(k·d/δ), by a constant shift.
pub fn balance(f: &MultiPtf, delta: f64) -> Result<MultiPtf> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta {delta} must lie in (0, 1)"));
    }
    let d = f.degree();
    let bound = balance_bound(f.k(), d.max(1), delta);
    let mut out = Vec::with_capacity(f.k());
    for (j, p) in f.polys().iter().enumerate() {
        let var = p.variance();
        if !(var > 0.0) {
            return invalid(format!("polynomial {j} has zero variance"));
        }
        let q = p.scaled(1.0 / var.sqrt());
        let m = q.mean();
        let mut q = q;
        if m.abs() > bound {
            q.set_constant(m.signum() * bound);
        }
        out.push(q);
    }
    MultiPtf::new(out)
}
