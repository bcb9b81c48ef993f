mod common;

use common::*;
use dilation_core::continuous::{left_dilation_apply, right_dilation_apply, KVector};
use dilation_core::product::{ExponentialSystem, FiberVector, ProductSystem};
use dilation_core::semigroup::{
    continuity_modulus, continuity_probe, default_schedule, theta_forward, theta_matrix_element, u_matrix_element,
    u_matrix_element_factored, FiniteRankOperator, FrameFamily, FrameSpec, ProbeInputs,
};
use dilation_core::step::StepFunction;
use dilation_core::C64;
use proptest::prelude::*;

fn model() -> ExponentialSystem {
    ExponentialSystem::new(1, grid()).unwrap()
}

fn unit(k: &KVector) -> KVector {
    k.normalized().unwrap()
}

/// `e(c·1_(0,t])` with `0.2 ≤ |c| ≤ 0.4`.
fn coherent() -> impl Strategy<Value = C64> {
    (0.2f64..0.4, 0.0f64..std::f64::consts::TAU).prop_map(|(r, p)| C64::from_polar(r, p))
}

fn constant(t: i64, c: C64) -> FiberVector {
    model().exponential(StepFunction::constant(ticks(0), ticks(t), &[c]).unwrap()).unwrap()
}

/// `normalize(v + w/2)`
fn nearby(v: &KVector, w: &KVector) -> KVector {
    unit(&v.add(&unit(w).scale(C64::new(0.5, 0.0))))
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn u_frame_route_converges_on_factored_cases(
        t in 3 * Q / 2..=2 * Q,
        c in coherent(),
        (kp, noise_k, l, noise_l) in (kvector(1, 2), kvector(1, 2), kvector(1, 2), kvector(1, 2)),
    ) {
        let m = model();
        let t_ = ticks(t);
        let x = constant(t, c);
        let (kp, l) = (unit(&kp), unit(&l));
        let k0 = nearby(&kp, &noise_k);
        let l2 = nearby(&l, &noise_l);
        let k = left_dilation_apply(&m, t_, &k0, &x).unwrap();
        let lp = right_dilation_apply(&m, t_, &x, &l2).unwrap();
        let exact = k0.inner(&kp).unwrap() * m.fiber_inner(&x, &x).unwrap() * l.inner(&l2).unwrap();
        let factored = u_matrix_element_factored(&m, t_, &k, &l, &kp, &x, &l2).unwrap();
        prop_assert!((factored - exact).norm() <= 1e-9);
        let mut last = f64::INFINITY;
        for (i, spec) in default_schedule().iter().enumerate() {
            let frame = FrameFamily::build(&m, t_, spec).unwrap();
            let err = (u_matrix_element(&m, t_, &k, &l, &kp, &lp, &frame).unwrap() - exact).norm();
            if i == 0 {
                prop_assert!(err <= 1e-3, "default frame error {err}");
            }
            prop_assert!(err <= last + 1e-9, "step {i}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn theta_frame_route_matches_forward_identity(
        t in 3 * Q / 2..=2 * Q,
        c in coherent(),
        (k2, k3, ket, bra) in (kvector(1, 2), kvector(1, 2), kvector(1, 2), kvector(1, 2)),
        coef in complex(1.0),
    ) {
        let m = model();
        let t_ = ticks(t);
        let y = constant(t, c);
        let (k2, k3, ket, bra) = (unit(&k2), unit(&k3), unit(&ket), unit(&bra));
        let a = FiniteRankOperator::rank_one(coef, ket.clone(), bra.clone());
        let mp = left_dilation_apply(&m, t_, &k2, &y).unwrap();
        let mm = left_dilation_apply(&m, t_, &k3, &y).unwrap();
        let exact = coef * k3.inner(&ket).unwrap() * bra.inner(&k2).unwrap() * m.fiber_inner(&y, &y).unwrap();
        let forward = mm.inner(&theta_forward(&m, t_, &a, &k2, &y).unwrap()).unwrap();
        prop_assert!((forward - exact).norm() <= 1e-9);
        let frame = FrameFamily::build(&m, t_, &FrameSpec::default()).unwrap();
        let value = theta_matrix_element(&m, t_, &a, &mm, &mp, &frame).unwrap();
        prop_assert!((value - exact).norm() <= 1e-3, "{value} vs {exact}");
        let swapped = theta_matrix_element(&m, t_, &a.adjoint(), &mp, &mm, &frame).unwrap();
        prop_assert!((swapped - value.conj()).norm() <= 1e-9);
    }

    #[test]
    fn theta_composition_routes_agree(
        (s, t, x, y) in (time(), time()).prop_flat_map(|(s, t)| (Just(s), Just(t), fiber_vector(t, 1, 2), fiber_vector(s, 1, 2))),
        (k, ket, bra, probe) in (kvector(1, 2), kvector(1, 1), kvector(1, 1), kvector(1, 2)),
    ) {
        let m = model();
        let (s, t) = (ticks(s), ticks(t));
        let a = FiniteRankOperator::rank_one(C64::new(0.0, 1.0), unit(&ket), unit(&bra));
        let ak = a.apply(&k).unwrap();
        let lhs = left_dilation_apply(&m, s, &theta_forward(&m, t, &a, &k, &x).unwrap(), &y).unwrap();
        let rhs = left_dilation_apply(&m, s + t, &ak, &m.u_concat(&x, &y).unwrap()).unwrap();
        let (lv, rv) = (probe.inner(&lhs).unwrap(), probe.inner(&rhs).unwrap());
        let scale = scale_of(&[probe.norm().unwrap(), k.norm().unwrap(), m.norm(&x).unwrap(), m.norm(&y).unwrap()]);
        prop_assert!((lv - rv).norm() <= 1e-7 * scale, "{lv} vs {rv}");
    }
}

fn halving_grids(start: i64, span: i64, coarse: i64, halvings: u32) -> Vec<Vec<dilation_core::GridRational>> {
    (0..=halvings)
        .map(|h| {
            let step = coarse >> h;
            (0..=span / step).map(|i| ticks(start + i * step)).collect()
        })
        .collect()
}

/// Ten fixed scenarios; strict decrease of the modulus is an empirical
/// property, so the draw is pinned.
#[test]
fn continuity_modulus_shrinks_with_spacing() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let m = model();
    let mut runner = TestRunner::deterministic();
    for case in 0..10 {
        let mut draw = || unit(&full_kvector(1, 2).new_tree(&mut runner).unwrap().current());
        let (k, kp, l, l2) = (draw(), draw(), draw(), draw());
        let h = step_on(0, 3 * Q, 1, 6, 0.8).new_tree(&mut runner).unwrap().current();
        let start = (Q / 2..Q).new_tree(&mut runner).unwrap().current();
        let inputs = ProbeInputs::Factored { k, l, k_prime: kp, l_second: l2, h };
        // spacing 1/10 down to 1/160
        let grids = halving_grids(start, Q, Q / 10, 4);
        let finest = continuity_probe(&m, &inputs, grids.last().unwrap()).unwrap();
        let mut moduli = Vec::new();
        for g in &grids {
            let values: Vec<C64> = finest.iter().filter(|r| g.contains(&r.t)).map(|r| r.value).collect();
            moduli.push(values.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max));
        }
        assert!(moduli.windows(2).all(|w| w[1] < w[0]), "case {case}: {moduli:?}");
        assert_eq!(continuity_modulus(&finest), moduli[4]);
    }
}

#[test]
fn general_probe_on_vacuum_is_flat() {
    let m = model();
    let v = KVector::vacuum(grid(), 1);
    let inputs = ProbeInputs::General {
        k: v.clone(),
        l: v.clone(),
        k_prime: v.clone(),
        l_prime: v,
        frame: FrameSpec::default(),
    };
    let grid: Vec<_> = (1..=8).map(|i| ticks(i * Q / 4)).collect();
    let rows = continuity_probe(&m, &inputs, &grid).unwrap();
    assert!(continuity_modulus(&rows) <= 1e-6);
    assert!(rows.iter().all(|r| (r.value - C64::new(1.0, 0.0)).norm() <= 1e-6 && r.frame_size == 5));
}
