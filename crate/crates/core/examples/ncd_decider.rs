//! Non-interactive correlation distillation: can two parties sharing samples
//! of a joint distribution hit given marginals and agreement?

use noisestab::product::JointDist;
use noisestab::search::{ncd_brute_oracle, ncd_decide, NcdConfig};

fn main() -> noisestab::Result<()> {
    let u = [0.5, 0.5];
    let cfg = NcdConfig::new(2);
    let p = JointDist::binary_symmetric(0.5)?;
    for kappa in [0.7, 0.75, 0.8] {
        let r = ncd_decide(&p, &u, &u, kappa, 0.02, 2, &cfg)?;
        println!("κ = {kappa}: {:?}, best agreement {:?}", r.verdict, r.achieved);
    }
    println!("exhaustive oracle, n = 2: {:?}", ncd_brute_oracle(&p, &u, &u, 2, 2, 0.02)?);

    // skewed source with an unbalanced target
    let q = JointDist::new(vec![vec![0.5, 0.1], vec![0.05, 0.35]])?;
    let mu = [0.6, 0.4];
    let nu = [0.55, 0.45];
    let r = ncd_decide(&q, &mu, &nu, 0.85, 0.02, 2, &cfg)?;
    println!("skewed source: {:?}, achieved {:?}, witness {:?}", r.verdict, r.achieved, r.witness);
    Ok(())
}
