//! Polynomials with prescribed covariances built from disjoint blocks, and the
//! product moments of two families sharing those covariances.

use nalgebra::DMatrix;
use noisestab::tensor::{eigenregularity, matched_family, matched_family_rotated, product_expectation_mc_pair, GramLevel, GramSpec};

fn main() -> noisestab::Result<()> {
    let gram = vec![vec![1.0, 0.4, 0.1], vec![0.4, 1.0, -0.2], vec![0.1, -0.2, 1.0]];
    let spec = GramSpec { levels: vec![GramLevel { level: 2, gram }] };
    for delta in [0.5, 0.2, 0.1] {
        let fam = matched_family(&spec, delta)?;
        let worst = fam.polys.iter().map(|p| eigenregularity(p).map(|e| e.ratio)).collect::<Result<Vec<_>, _>>()?;
        println!("δ = {delta}: κ = {}, n0 = {}, eigenregularity {:?}", fam.kappa, fam.n0, worst);
    }

    let delta = 0.1;
    let a = matched_family(&spec, delta)?;
    let (c, s) = (0.6f64, 0.8f64);
    let rot = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let b = matched_family_rotated(&spec, delta, Some(&[rot]))?;
    let (ea, eb, d) = product_expectation_mc_pair(&a.polys, &b.polys, 1_000_000, 1)?;
    println!("E[r1 r2 r3]: {:.4} vs {:.4}, difference {:.4} ± {:.4}", ea.mean, eb.mean, d.mean, d.std_error);
    Ok(())
}
