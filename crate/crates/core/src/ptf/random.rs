//! Random partitions for property sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::gauss::sample_points;
use crate::tensor::{CompiledFamily, PolyGauss, SymmetricTensor};

use super::partition::{MultiPtf, PartitionFn};

/// Polynomial with independent Gaussian chaos coefficients on orders 1..=degree and zero mean.
pub fn random_poly<R: Rng>(n: usize, degree: usize, rng: &mut R) -> PolyGauss {
    let mut p = PolyGauss::zero(n);
    for q in 1..=degree {
        let mut t = SymmetricTensor::zeros(q, n);
        for v in t.values_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
        }
        p.add_component(&t).expect("matching dimension");
    }
    p
}

/// Sample quantile of p under γ_n.
pub fn poly_quantile(p: &PolyGauss, level: f64, samples: usize, seed: u64) -> f64 {
    let fam = CompiledFamily::new(std::slice::from_ref(p));
    let pts = sample_points(p.dim(), samples, seed);
    let mut scratch = fam.scratch();
    let mut out = [0.0];
    let mut vals: Vec<f64> = pts
        .chunks(p.dim())
        .map(|x| {
            fam.eval_into(x, &mut scratch, &mut out);
            out[0]
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    let idx = ((level * samples as f64) as usize).min(samples - 1);
    vals[idx]
}

/// Random two-label PTF partition {p > 0} vs {p < 0} whose sets have measure ≈ 1/2.
pub fn random_balanced_binary<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Result<PartitionFn> {
    let p = random_poly(n, degree, rng);
    let med = poly_quantile(&p, 0.5, 100_000, rng.random());
    Ok(PartitionFn::ptf(MultiPtf::binary(p.shifted(-med))))
}
