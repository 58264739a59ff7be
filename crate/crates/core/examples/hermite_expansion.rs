//! Hermite expansion of a partition, its spectral weights, and the OU semigroup
//! acting on coefficients.

use noisestab::hermite::{apply_ou, expand_with_mass, spectral_weights};
use noisestab::ptf::PartitionFn;

fn main() -> noisestab::Result<()> {
    let f = PartitionFn::sectors(2, 3, 0.3)?;
    let k = f.k;
    let one_hot = |x: &[f64]| {
        let mut v = vec![0.0; k];
        v[f.evaluator().label(x)] = 1.0;
        v
    };
    let (e, mass) = expand_with_mass(one_hot, 2, 8, 60)?;
    let w = spectral_weights(&e, 1.0)?;
    println!("quadrature mass {mass:.6} (exact 1)");
    for (d, m) in w.by_degree.iter().enumerate() {
        println!("W^{d} = {m:.5}");
    }
    println!("W^(>8) = {:.5}", w.above(8).residual);

    // Stab_t = Σ_S e^{−t|S|} ‖f̂(S)‖²
    let t = 2f64.ln();
    let smoothed = apply_ou(&e, t)?;
    println!("Stab_t from the truncated spectrum ≈ {:.4}", e.inner(&smoothed));
    Ok(())
}
