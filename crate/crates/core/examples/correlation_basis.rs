//! Maximal-correlation basis of a joint distribution and the product-space
//! correlation formula.

use noisestab::product::{correlation, correlation_basis, correlation_bruteforce, tensor_fourier, JointDist, ProductTable, Side};

fn main() -> noisestab::Result<()> {
    let p = JointDist::new(vec![vec![0.30, 0.05, 0.05], vec![0.05, 0.20, 0.05], vec![0.02, 0.08, 0.20]])?;
    let basis = correlation_basis(&p)?;
    println!("singular values {:?}", basis.rho);
    println!("maximal correlation {:.6}", basis.maximal_correlation());
    println!("x_1 = {:?}", basis.x_fn(1));
    println!("y_1 = {:?}", basis.y_fn(1));

    // plurality-of-two-coordinates style tables on A² and B²
    let f = ProductTable::from_fn(2, 3, 3, |x| if x[0] == x[1] { x[0] } else { x[0].min(x[1]) })?;
    let g = ProductTable::from_fn(2, 3, 3, |y| y[0])?;
    let fh = tensor_fourier(&f, &basis, Side::A, &p)?;
    let gh = tensor_fourier(&g, &basis, Side::B, &p)?;
    println!(
        "Pr[f = g] via the spectral formula {:.10}, by enumeration {:.10}",
        correlation(&fh, &gh, &basis.rho)?,
        correlation_bruteforce(&f, &g, &p)?
    );
    Ok(())
}
