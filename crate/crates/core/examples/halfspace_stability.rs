//! Noise stability of halfspaces, slabs and sectors against Sheppard's formula.

use noisestab::gauss::orthant_probability;
use noisestab::ptf::{estimate_joint_labels, PartitionFn};

fn main() -> noisestab::Result<()> {
    let samples = 1_000_000;
    for rho in [0.2, 0.5, 0.9] {
        let t = -f64::ln(rho);
        let h = PartitionFn::median_halfspace(2);
        let joint = estimate_joint_labels(&h, &h, t, samples, 7)?;
        let stab = joint.agreement();
        println!(
            "rho {rho:.1}: Stab = {:.5} ± {:.5}   exact {:.5}   Pr[both in cell 0] = {:.5} (exact {:.5})",
            stab.value,
            stab.std_error,
            2.0 * orthant_probability(rho),
            joint.cell(0).value,
            orthant_probability(rho)
        );
    }

    // three labels: 120° sectors against three parallel slabs of equal mass
    let t = 2f64.ln();
    for (name, f) in [("sectors", PartitionFn::sectors(2, 3, 0.0)?), ("slabs", PartitionFn::equal_slabs(2, 3)?)] {
        let s = estimate_joint_labels(&f, &f, t, samples, 11)?.agreement();
        println!("k = 3 {name:>8}: Stab = {:.4} ± {:.4}", s.value, s.std_error);
    }
    Ok(())
}
