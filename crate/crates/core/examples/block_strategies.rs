//! Gaussian strategies simulated on a binary symmetric source through block
//! sums of the top correlation functions.

use std::f64::consts::PI;

use noisestab::product::{block_strategy, correlation_basis, estimate_discrete_corr, JointDist};
use noisestab::ptf::PartitionFn;

fn main() -> noisestab::Result<()> {
    let rho = 0.5;
    let p = JointDist::binary_symmetric(rho)?;
    let basis = correlation_basis(&p)?;
    let g = PartitionFn::median_halfspace(1);
    println!("Gaussian agreement {:.4}", 0.5 + rho.asin() / PI);
    for ell in [1, 3, 15, 63, 64, 255] {
        let f = block_strategy(g.clone(), basis.x_fn(1), ell)?;
        let h = block_strategy(g.clone(), basis.y_fn(1), ell)?;
        let r = estimate_discrete_corr(&f, &h, &p, ell, 400_000, ell as u64)?;
        println!(
            "ell {ell:>3}: agreement {:.4} ± {:.4}, Pr[f = 0] = {:.4}",
            r.agreement.value, r.agreement.std_error, r.marginals_f.mu[0]
        );
    }
    Ok(())
}
