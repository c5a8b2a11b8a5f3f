//! Cross-module invariants on seeded samples.

use proptest::prelude::*;
use realop_core::linalg::{self, Mat};
use realop_core::mideal::{
    build_nu_mu_tau, certify_left_m_projection, projection_complexification_consistency,
    verify_multiplier_witness, CertifyOptions, Projection,
};
use realop_core::opspace::{
    check_ruan_axioms, complex_elem, complex_quotient_norms, complexification_norm, complexify_map,
    complexify_space, direct_sum_elem, direct_sum_spaces, level_norm, sampled_level_ratio,
    QuotientOptions,
};
use realop_core::quantization::{realize_min, BanachSpace};
use realop_core::systems::{build_paulsen_system, generated_subtriple, is_tro};
use realop_core::{rng, CBMap, MatElem, OpSpace};

fn spaces() -> Vec<OpSpace> {
    let upper = OpSpace::new(
        2,
        2,
        vec![
            Mat::unit(2, 2, 0, 0),
            Mat::unit(2, 2, 0, 1),
            Mat::unit(2, 2, 1, 1),
        ],
    )
    .unwrap();
    vec![
        OpSpace::scalars(),
        OpSpace::full(2, 2),
        OpSpace::full(2, 3),
        upper,
        realize_min(&BanachSpace::ell_one(3)),
    ]
}

#[test]
fn conjugation_is_an_isometry_and_real_parts_embed() {
    for (i, x) in spaces().iter().enumerate() {
        let xc = complexify_space(x).unwrap();
        for s in 0..60 {
            let mut r = rng::stream(17, &[i as u64, s]);
            let n = 1 + (s as usize) % 3;
            let a = x.random_elem(n, &mut r);
            let b = x.random_elem(n, &mut r);
            let z = complex_elem(&a, &b).unwrap();
            let lhs = level_norm(&xc, &z).unwrap();
            let rhs = level_norm(&xc, &xc.conjugate(&z).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10);
            let zero = MatElem::zeros(n, x.dim());
            let re = complexification_norm(x, &a, &zero).unwrap();
            assert!((re - level_norm(x, &a).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn ruan_axioms_on_three_spaces() {
    let candidates = [
        OpSpace::full(2, 2),
        complexify_space(&OpSpace::full(2, 2)).unwrap(),
        realize_min(&BanachSpace::ell_inf(2)),
    ];
    for s in &candidates {
        let rep = check_ruan_axioms(s, 3, 100, 5, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn maps_into_min_spaces_have_cb_norm_at_most_norm() {
    // ‖u‖ for u: M_2 → Min E is max_f ‖f ∘ u‖, a nuclear norm on M_2.
    for (i, e) in [BanachSpace::ell_one(2), BanachSpace::ell_inf(3)]
        .iter()
        .enumerate()
    {
        let target = realize_min(e);
        for s in 0..5u64 {
            let mut r = rng::stream(23, &[i as u64, s]);
            let u = rng::gaussian_mat(&mut r, e.dim(), 4);
            let map = CBMap::new(OpSpace::full(2, 2), target.clone(), u.clone()).unwrap();
            let norm = e
                .representatives()
                .iter()
                .map(|f| {
                    let g = u.transpose().matvec(f);
                    linalg::nuclear_norm(&Mat::from_vec(2, 2, g).unwrap())
                })
                .fold(0.0, f64::max);
            for n in 1..=3 {
                let ratio = sampled_level_ratio(&map, n, 40, s).unwrap();
                assert!(ratio <= norm + 1e-9, "{ratio} > {norm}");
            }
        }
    }
}

#[test]
fn complexified_complete_contractions_stay_contractive() {
    let m2 = OpSpace::full(2, 2);
    for s in 0..5u64 {
        let mut r = rng::stream(31, &[s]);
        let a = rng::gaussian_mat(&mut r, 2, 2);
        let b = rng::gaussian_mat(&mut r, 2, 2);
        let a = a.scale(1.0 / linalg::op_norm(&a).unwrap());
        let b = b.scale(1.0 / linalg::op_norm(&b).unwrap());
        let u = CBMap::from_ambient_fn(&m2, |x| a.matmul(x).matmul(&b)).unwrap();
        let uc = complexify_map(&u).unwrap();
        for n in 1..=2 {
            assert!(sampled_level_ratio(&u, n, 50, s).unwrap() <= 1.0 + 1e-9);
            assert!(sampled_level_ratio(&uc, n, 50, s).unwrap() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn quotients_commute_with_complexification() {
    let m2 = OpSpace::full(2, 2);
    for s in 0..12u64 {
        let mut r = rng::stream(41, &[s]);
        let k = 1 + (s as usize) % 2;
        let sub: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(&mut r, 4)).collect();
        let x = m2.random_elem(1, &mut r);
        let y = m2.random_elem(1, &mut r);
        let c = complex_quotient_norms(&m2, &sub, &x, &y, &QuotientOptions::default()).unwrap();
        assert!(c.gap <= 1e-6, "{c:?}");
    }
}

#[test]
fn direct_sums_take_the_larger_norm() {
    let a = OpSpace::full(2, 2);
    let b = realize_min(&BanachSpace::ell_one(2));
    let sum = direct_sum_spaces(&[a.clone(), b.clone()]).unwrap();
    for s in 0..50u64 {
        let mut r = rng::stream(43, &[s]);
        let x = a.random_elem(2, &mut r);
        let y = b.random_elem(2, &mut r);
        let z = direct_sum_elem(&[x.clone(), y.clone()]).unwrap();
        let want = level_norm(&a, &x).unwrap().max(level_norm(&b, &y).unwrap());
        assert!((level_norm(&sum, &z).unwrap() - want).abs() <= 1e-12);
    }
}

#[test]
fn orthogonal_left_projections_are_never_refuted() {
    let m2 = OpSpace::full(2, 2);
    for s in 0..3u64 {
        let mut r = rng::stream(47, &[s]);
        let v = rng::gaussian_vec(&mut r, 2);
        let nv = v.iter().map(|x| x * x).sum::<f64>();
        let e = Mat::from_vec(
            2,
            2,
            vec![v[0] * v[0], v[0] * v[1], v[1] * v[0], v[1] * v[1]],
        )
        .unwrap()
        .scale(1.0 / nv);
        let u = CBMap::from_ambient_fn(&m2, |x| e.matmul(x)).unwrap();
        assert!(verify_multiplier_witness(&m2, &u, &e).unwrap().holds);
        let p = Projection::new(u).unwrap();
        let opts = CertifyOptions {
            max_level: 2,
            samples: 40,
            restarts: 2,
            seed: s,
            tol: 1e-9,
        };
        let c = certify_left_m_projection(&p, &opts).unwrap();
        assert!(c.is_certified(), "{c:?}");

        // ‖P(x) + y - P(y)‖ ≤ ‖[x; y]‖ since μ_P is contractive
        let maps = build_nu_mu_tau(&p);
        let c2 = maps.mu.domain().clone();
        for t in 0..30u64 {
            let mut r = rng::stream(53, &[s, t]);
            let xy = c2.random_elem(1 + (t as usize) % 2, &mut r);
            let lhs = level_norm(&m2, &maps.mu.apply(&xy).unwrap()).unwrap();
            assert!(lhs <= level_norm(&c2, &xy).unwrap() + 1e-12);
        }
    }
}

fn random_idempotent(seed: u64, d: usize) -> Mat {
    let mut r = rng::stream(seed, &[]);
    let s = rng::gaussian_mat(&mut r, d, d);
    let (inv, _) = linalg::lstsq(&s, &Mat::identity(d), 1e-14);
    let diag: Vec<f64> = (0..d)
        .map(|_| if rng::coin(&mut r) { 1.0 } else { 0.0 })
        .collect();
    s.matmul(&Mat::diag(&diag)).matmul(&inv)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn column_norm_dominates_both_parts(seed in any::<u64>(), n in 1..3usize) {
        let m2 = OpSpace::full(2, 2);
        let pm = random_idempotent(seed, 4);
        prop_assume!(pm.matmul(&pm).max_abs_diff(&pm) <= 1e-10);
        let p = Projection::new(CBMap::new(m2.clone(), m2.clone(), pm).unwrap()).unwrap();
        let maps = build_nu_mu_tau(&p);
        let mut r = rng::stream(seed, &[1]);
        let x = m2.random_elem(n, &mut r);
        let px = p.map().apply(&x).unwrap();
        let col = level_norm(maps.nu.codomain(), &maps.nu.apply(&x).unwrap()).unwrap();
        let a = level_norm(&m2, &px).unwrap();
        let b = level_norm(&m2, &x.sub(&px)).unwrap();
        prop_assert!(col + 1e-10 >= a.max(b));
    }

    #[test]
    fn complexification_identity_holds_for_any_linear_map(seed in any::<u64>()) {
        let m2 = OpSpace::full(2, 2);
        let mut r = rng::stream(seed, &[]);
        let u = CBMap::new(m2.clone(), m2, rng::gaussian_mat(&mut r, 4, 4)).unwrap();
        prop_assert!(projection_complexification_consistency(&u, 6, seed).unwrap() <= 1e-12);
    }

    #[test]
    fn paulsen_dimension_law(seed in any::<u64>(), d in 1..4usize) {
        let mut r = rng::stream(seed, &[]);
        let basis: Vec<Mat> = (0..d).map(|_| rng::gaussian_mat(&mut r, 2, 3)).collect();
        let x = OpSpace::new(2, 3, basis).unwrap();
        let s = build_paulsen_system(&x).unwrap();
        prop_assert_eq!(s.space.dim(), 2 * d + 2);
        prop_assert_eq!(s.transpose_residual, 0.0);
    }

    #[test]
    fn subtriple_closure_is_idempotent(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let x = OpSpace::new(2, 2, vec![rng::gaussian_mat(&mut r, 2, 2)]).unwrap();
        let t = generated_subtriple(&x, 16).unwrap();
        prop_assert!(is_tro(&t, 1e-9).is_tro);
        let again = generated_subtriple(&t, 16).unwrap();
        prop_assert_eq!(again.dim(), t.dim());
    }

    #[test]
    fn contraction_and_positivity_agree(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let x = rng::gaussian_mat(&mut r, 3, 2);
        let x = x.scale(rng::uniform(&mut r, 0.5, 1.5) / linalg::op_norm(&x).unwrap());
        let (c, p) = linalg::contraction_iff_positive(&x, 1e-9).unwrap();
        prop_assert_eq!(c, p);
    }
}
