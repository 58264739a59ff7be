//! Smooth a partition with P_t, round it back with a measure-matching
//! threshold vector, and approximate it by a low-degree PTF.

use noisestab::ptf::PartitionFn;
use noisestab::rounding::{ptf_from_truncation, stability_of_rounding};

fn main() -> noisestab::Result<()> {
    let t = 0.5;
    let f = PartitionFn::sectors(2, 3, 0.0)?;
    let r = stability_of_rounding(&f, t, 0.01, 400_000, 3)?;
    println!("thresholds z = {:?}", r.search.z.z);
    println!("measures before {:?}", r.measures_f.mu);
    println!("measures after  {:?}", r.measures_g.mu);
    println!(
        "Stab before {:.4}, after {:.4} (SE {:.4}); contract holds: {}",
        r.stab_f.value,
        r.stab_g.value,
        r.se(),
        r.contract_holds()
    );

    for d in 1..=4 {
        let tr = ptf_from_truncation(&f, d, 2, 40, 200_000, 5)?;
        println!(
            "degree {d}: W^(>d) = {:.4}, Pr[g ≠ f] = {:.4}, Pr[collision] = {:.4}, bound k²·W = {:.3}",
            tr.tail, tr.disagreement.value, tr.collision.value, tr.bound
        );
    }
    Ok(())
}
