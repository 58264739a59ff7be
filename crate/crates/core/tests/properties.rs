use proptest::prelude::*;

use noisestab::cube::{cube_stability, cube_stability_bruteforce, walsh_transform, CubeFn};
use noisestab::hermite::{apply_ou, expand};
use noisestab::product::{correlation_basis, JointDist};
use noisestab::ptf::{argmax_shifted, ptf_label};
use noisestab::rounding::ThresholdVector;
use noisestab::tensor::{PolyGauss, SymmetricTensor};

fn joint(a: usize, b: usize) -> impl Strategy<Value = JointDist> {
    prop::collection::vec(0.01f64..1.0, a * b).prop_map(move |v| {
        let rows = v.chunks(b).map(|r| r.to_vec()).collect();
        JointDist::normalized(rows).unwrap()
    })
}

fn sized_joint() -> impl Strategy<Value = JointDist> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(a, b)| joint(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_orthonormal_and_diagonalizes(p in sized_joint()) {
        let c = correlation_basis(&p).unwrap();
        let pa = p.marginal_a();
        let (na, nb) = (p.size_a(), p.size_b());
        for i in 0..na {
            for j in 0..na {
                let e: f64 = (0..na).map(|a| pa[a] * c.x[a][i] * c.x[a][j]).sum();
                prop_assert!((e - f64::from(i == j)).abs() < 1e-10);
            }
        }
        for i in 0..na {
            for j in 0..nb {
                let e: f64 = (0..na).map(|a| (0..nb).map(|b| p.p(a, b) * c.x[a][i] * c.y[b][j]).sum::<f64>()).sum();
                let want = if i == j { c.rho[i] } else { 0.0 };
                prop_assert!((e - want).abs() < 1e-10);
            }
        }
        prop_assert!(c.maximal_correlation() <= 1.0 + 1e-12);
    }

    #[test]
    fn coarsening_cannot_raise_maximal_correlation(p in joint(4, 3), fa in prop::collection::vec(0usize..2, 4)) {
        // make sure both coarse symbols occur
        let mut fa = fa;
        fa[0] = 0;
        fa[3] = 1;
        let q = p.coarsen(&fa, &[0, 1, 2]).unwrap();
        let fine = correlation_basis(&p).unwrap().maximal_correlation();
        let coarse = correlation_basis(&q).unwrap().maximal_correlation();
        prop_assert!(coarse <= fine + 1e-10);
    }

    #[test]
    fn rounding_is_scale_and_shift_invariant(
        values in prop::collection::vec(-5.0f64..5.0, 3),
        z in prop::collection::vec(-1.0f64..1.0, 3),
        scale in 0.1f64..10.0,
        shift in -3.0f64..3.0,
    ) {
        let base = argmax_shifted(&values, &z);
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let zs: Vec<f64> = z.iter().map(|v| v * scale).collect();
        prop_assert_eq!(argmax_shifted(&scaled, &zs), base);
        let zt: Vec<f64> = z.iter().map(|v| v + shift).collect();
        prop_assert_eq!(argmax_shifted(&values, &zt), base);
        let (a, b) = (ThresholdVector::new(zt).z, ThresholdVector::new(z).z);
        prop_assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn ptf_label_ignores_positive_scaling(values in prop::collection::vec(-2.0f64..2.0, 4), scale in 0.01f64..100.0) {
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        prop_assert_eq!(ptf_label(&scaled), ptf_label(&values));
    }

    #[test]
    fn cube_spectrum_matches_enumeration(n in 1usize..=5, k in 2usize..=3, seed in any::<u64>(), rho in -0.9f64..0.9) {
        let labels: Vec<u16> = (0..1u64 << n).map(|i| ((seed.rotate_left(i as u32 * 7) ^ i) % k as u64) as u16).collect();
        let f = CubeFn::new(n, k, labels).unwrap();
        prop_assert!((walsh_transform(&f).unwrap().total() - 1.0).abs() < 1e-12);
        let a = cube_stability(&f, rho).unwrap();
        let b = cube_stability_bruteforce(&f, rho).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let back: CubeFn = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn ou_is_a_semigroup(s in 0.0f64..2.0, t in 0.0f64..2.0, a in -1.0f64..1.0) {
        let e = expand(|x| vec![(a * x[0]).tanh(), x[0] * x[0]], 1, 6, 30).unwrap();
        let two = apply_ou(&apply_ou(&e, s).unwrap(), t).unwrap();
        let one = apply_ou(&e, s + t).unwrap();
        for (c1, c2) in one.coeffs.values().zip(two.coeffs.values()) {
            for (u, v) in c1.iter().zip(c2) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chaos_product_commutes_and_evaluates(
        u in prop::collection::vec(-1.0f64..1.0, 2),
        v in prop::collection::vec(-1.0f64..1.0, 2),
        c in -1.0f64..1.0,
        x in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let p = PolyGauss::from_components(2, c, [SymmetricTensor::rank_one(&u, 2)]).unwrap();
        let q = PolyGauss::linear(&v, 0.5);
        let pq = p.mul(&q).unwrap();
        let qp = q.mul(&p).unwrap();
        let direct = p.eval(&x).unwrap() * q.eval(&x).unwrap();
        prop_assert!((pq.eval(&x).unwrap() - direct).abs() < 1e-10 * direct.abs().max(1.0));
        prop_assert!((pq.add(&qp.scaled(-1.0)).unwrap().second_moment()).sqrt() < 1e-12);
    }
}
