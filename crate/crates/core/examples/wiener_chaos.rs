//! Chaos polynomials: exact products, variance bounds, eigenregularity and the
//! multilinear lift.

use noisestab::tensor::{eigenregularity, multilinear_lift, variance_bounds, PolyGauss, SymmetricTensor};

fn main() -> noisestab::Result<()> {
    let h1 = PolyGauss::hermite_term(&[1], 1.0);
    let sq = h1.mul(&h1)?;
    println!("H1·H1: constant {}, order-2 entry {:.6}", sq.constant_term(), sq.component(2).unwrap().values()[0]);

    // p = x1 x2 + H2(x3), q = x1 + x3
    let mut t = SymmetricTensor::zeros(2, 3);
    t.set(&[0, 1], 0.5f64.sqrt());
    t.set(&[2, 2], 1.0);
    let p = PolyGauss::from_components(3, 0.0, [t])?;
    let q = PolyGauss::linear(&[1.0, 0.0, 1.0], 0.0).scaled(0.5f64.sqrt());
    let b = variance_bounds(&p, &q)?;
    println!("Var(p) = {}, Var(q) = {}", p.variance(), q.variance());
    println!(
        "Var(pq) = {:.4}; lower {:.4}, upper {:?}, schedule {:?}",
        b.product_variance, b.lower_top, b.upper, b.lower_schedule
    );

    let e = eigenregularity(&p)?;
    println!("eigenregularity λ_max/σ = {:.4}", e.ratio);

    for block in [1, 4, 16] {
        let lift = multilinear_lift(&p, block)?;
        println!("T = {block:>2}: Var(r − w) = {:.4}, eigenregularity of w = {:.4}", lift.var_gap, eigenregularity(&lift.w)?.ratio);
    }
    Ok(())
}
