use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locgauss::criteria::{
    decide_general, decide_local_1, decide_local_2, g_func, DecideOptions, MinimalFunctionPair,
};
use locgauss::gmaps::{apply, build_prop1_map, cp_check, h1_summary, GaussianCPMap};
use locgauss::matkernel::{
    det2, direct_sum, herm_eigvals, max_abs, psd_check, random_sp2, symplectic_check, HermMat4,
    Mat2, Mat4,
};
use locgauss::oracle::{sample_cp_map, sample_invariants};
use locgauss::states::{
    apply_local_symplectic, from_xi, reduce_to_normal_form, CovarianceMatrix, InvariantVector,
};

const BAND: f64 = 1e-6;

fn invariants_from(seed: u64, min_abs_xi4: f64) -> InvariantVector {
    sample_invariants(&mut ChaCha8Rng::seed_from_u64(seed), min_abs_xi4)
}

fn state() -> impl Strategy<Value = InvariantVector> {
    any::<u64>().prop_map(|s| invariants_from(s, 0.0))
}

fn correlated_state() -> impl Strategy<Value = InvariantVector> {
    any::<u64>().prop_map(|s| invariants_from(s, 0.05))
}

fn hermitian() -> impl Strategy<Value = HermMat4> {
    (
        prop::array::uniform16(-3.0..3.0f64),
        prop::array::uniform16(-3.0..3.0f64),
    )
        .prop_map(|(a, b)| {
            let re = Mat4::from_row_slice(&a);
            let im = Mat4::from_row_slice(&b);
            HermMat4::new(re + re.transpose(), im - im.transpose()).unwrap()
        })
}

fn local_symplectic(seed: u64) -> (Mat2, Mat2) {
    (random_sp2(seed, 1.0), random_sp2(seed.wrapping_add(1), 1.0))
}

fn invariants_of(gamma: &CovarianceMatrix) -> InvariantVector {
    gamma.invariants().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sampled_symplectic_blocks(seed in any::<u64>(), z in 0.01..2.0f64) {
        let s = random_sp2(seed, z);
        prop_assert!((det2(&s) - 1.0).abs() <= 1e-10);
        prop_assert!(symplectic_check(&s, 1e-10));
    }

    #[test]
    fn eigenvalues_sorted_with_trace(h in hermitian()) {
        let ev = herm_eigvals(&h);
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = ev.iter().sum();
        let trace = h.re().trace();
        prop_assert!((sum - trace).abs() <= 1e-10 * (1.0 + trace.abs() + max_abs(h.re())));
    }

    #[test]
    fn psd_monotone_in_tolerance(h in hermitian(), t1 in 0.0..1.0f64, dt in 0.0..1.0f64) {
        prop_assert!(!psd_check(&h, t1) || psd_check(&h, t1 + dt));
    }

    #[test]
    fn orbit_invariance(v in state(), seed in any::<u64>()) {
        let (s1, s2) = local_symplectic(seed);
        let gamma = apply_local_symplectic(&from_xi(&v).unwrap(), &s1, &s2).unwrap();
        prop_assert!(invariants_of(&gamma).max_abs_diff(&v) <= 1e-8);
    }

    #[test]
    fn normal_form_round_trip(v in state()) {
        let nf = from_xi(&v).unwrap();
        let back = from_xi(&invariants_of(&nf)).unwrap();
        prop_assert!(max_abs(&(back.matrix() - nf.matrix())) <= 1e-12);
    }

    #[test]
    fn reduction_contract(v in state(), seed in any::<u64>()) {
        let (s1, s2) = local_symplectic(seed);
        let gamma = apply_local_symplectic(&from_xi(&v).unwrap(), &s1, &s2).unwrap();
        let red = reduce_to_normal_form(&gamma).unwrap();
        prop_assert!(symplectic_check(&red.s1, 1e-8) && symplectic_check(&red.s2, 1e-8));
        let rebuilt = apply_local_symplectic(&gamma, &red.s1, &red.s2).unwrap();
        prop_assert!(max_abs(&(rebuilt.matrix() - red.gamma_nf.matrix())) <= 1e-8);
        prop_assert!(invariants_of(&red.gamma_nf).max_abs_diff(&v) <= 1e-8);
        let w = invariants_of(&gamma);
        prop_assert!(w.xi1 >= 1.0 - 1e-10 && w.xi2 >= 1.0 - 1e-10 && w.xi3 >= w.xi4.abs() - 1e-10);
    }

    #[test]
    fn channels_preserve_validity(v in state(), seed in any::<u64>()) {
        let map = sample_cp_map(seed);
        prop_assert!(cp_check(&map, 1e-9));
        prop_assert!(apply(&map, &from_xi(&v).unwrap()).is_ok());
    }

    #[test]
    fn mode1_determinant_ignores_rotation(
        s in correlated_state(),
        t in correlated_state(),
        theta in -6.0..6.0f64,
    ) {
        let target = InvariantVector { xi2: s.xi2, ..t };
        let d0 = det2(&build_prop1_map(&s, &target, 0.0).unwrap().m1);
        let d = det2(&build_prop1_map(&s, &target, theta).unwrap().m1);
        prop_assert!((d - d0).abs() <= 1e-12 * d0.abs().max(1.0));
    }

    #[test]
    fn determinant_matches_f1(s in correlated_state(), t in correlated_state()) {
        let target = InvariantVector { xi2: s.xi2, ..t };
        let det = h1_summary(&s, &target, 0.0).unwrap().det;
        let f1 = MinimalFunctionPair::new(s, target).f1(target.xi3, target.xi4).unwrap();
        prop_assert!((det - f1).abs() <= 1e-10 * det.abs().max(f1.abs()).max(1.0));
    }

    #[test]
    fn reflexive(v in correlated_state()) {
        let opts = DecideOptions::default();
        prop_assert!(decide_general(&v, &v, &opts).unwrap().possible);
        prop_assert!(decide_local_1(&v, &v, &opts).unwrap().possible);
        prop_assert!(decide_local_2(&v, &v, &opts).unwrap().possible);
    }

    #[test]
    fn added_noise_is_reachable(v in correlated_state(), d1 in 0.0..2.0f64, d2 in 0.0..2.0f64) {
        let target = InvariantVector { xi1: v.xi1 + d1, xi2: v.xi2 + d2, ..v };
        let opts = DecideOptions::default();
        prop_assert!(decide_general(&v, &target, &opts).unwrap().possible);
        let one_sided = InvariantVector { xi2: v.xi2, ..target };
        prop_assert!(decide_local_1(&v, &one_sided, &opts).unwrap().possible);
    }

    #[test]
    fn mode2_decision_is_relabelled_mode1(s in correlated_state(), t in correlated_state()) {
        let Ok(target) = from_xi(&InvariantVector { xi1: s.xi1, ..t }) else { return Ok(()) };
        let source = from_xi(&s).unwrap();
        let opts = DecideOptions::default();
        let direct = decide_local_2(&s, &invariants_of(&target), &opts).unwrap();
        let swapped = decide_local_1(
            &invariants_of(&source.swap_modes()),
            &invariants_of(&target.swap_modes()),
            &opts,
        )
        .unwrap();
        if direct.margin.abs() > BAND {
            prop_assert_eq!(direct.possible, swapped.possible);
        }
    }

    #[test]
    fn f1_negative_on_first_window(s in correlated_state(), t in correlated_state(), r in -3.0..3.0f64) {
        let pair = MinimalFunctionPair::new(s, t);
        prop_assume!((s.xi1 - t.xi1).abs() > 1e-3);
        // |xy| = w1 parametrised by x = √w1·e^r
        let w1 = pair.w1();
        let x = w1.sqrt() * r.exp();
        for y in [w1 / x, -w1 / x] {
            prop_assert!(pair.f1(x, y).unwrap() < 0.0);
        }
    }

    #[test]
    fn f2_nonpositive_on_second_window(s in correlated_state(), t in correlated_state(), r in -3.0..3.0f64) {
        let pair = MinimalFunctionPair::new(s, t);
        let w2 = pair.w2();
        let x = w2.sqrt() * r.exp();
        for y in [w2 / x, -w2 / x] {
            let f2 = g_func(t.xi2, s.xi2, t.xi3 / x, t.xi4 / y);
            prop_assert!(f2 <= 1e-12 * (1.0 + t.xi2 * s.xi2));
        }
    }

    #[test]
    fn one_sided_steps_compose(v in correlated_state(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut channel = |first: bool| {
            let m = Mat2::from_fn(|_, _| rng.gen_range(-1.5..1.5));
            let g = Mat2::identity() * ((1.0 - det2(&m)).abs() + 0.05);
            let (mm, gg) = if first {
                (direct_sum(&m, &Mat2::identity()), direct_sum(&g, &Mat2::zeros()))
            } else {
                (direct_sum(&Mat2::identity(), &m), direct_sum(&Mat2::zeros(), &g))
            };
            GaussianCPMap::new(mm, gg).unwrap()
        };
        let (c1, c2) = (channel(true), channel(false));
        let mid = invariants_of(&apply(&c1, &from_xi(&v).unwrap()).unwrap());
        let end = invariants_of(&apply(&c2, &from_xi(&mid).unwrap()).unwrap());
        prop_assume!(mid.xi4.abs() > 0.05 && end.xi3 > 1e-6);
        let opts = DecideOptions::default();
        let first = decide_local_1(&v, &mid, &opts).unwrap();
        let second = decide_local_2(&mid, &end, &opts).unwrap();
        prop_assume!(first.possible && second.possible);
        prop_assert!(decide_general(&v, &end, &opts).unwrap().possible);
    }
}
