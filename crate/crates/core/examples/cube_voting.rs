//! Exact stability and influences of voting rules on the discrete cube.

use noisestab::cube::{cube_influences, cube_stability, embed_gaussian, make_voting_rule, VotingRule};
use noisestab::ptf::PartitionFn;

fn main() -> noisestab::Result<()> {
    let rho = 0.5;
    for (rule, n, k) in [
        (VotingRule::Dictator, 9, 2),
        (VotingRule::Majority, 3, 2),
        (VotingRule::Majority, 9, 2),
        (VotingRule::Parity, 5, 2),
        (VotingRule::Plurality, 8, 3),
    ] {
        let f = make_voting_rule(rule, n, k)?;
        let inf = cube_influences(&f)?;
        println!(
            "{rule:?} n={n} k={k}: Stab_ρ = {:.5}, total influence = {:.4}",
            cube_stability(&f, rho)?,
            inf.iter().sum::<f64>()
        );
    }
    // majority tends to the halfspace value 1/2 + asin(ρ)/π
    for n in [3, 7, 11, 15] {
        let f = embed_gaussian(&PartitionFn::median_halfspace(1), n)?;
        println!("embedded halfspace, n = {n:>2}: {:.5}", cube_stability(&f, rho)?);
    }
    println!("limit {:.5}", 0.5 + rho.asin() / std::f64::consts::PI);
    Ok(())
}
