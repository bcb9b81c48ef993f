mod common;

use common::*;
use dilation_core::continuous::{section_inner, ElementarySection};
use dilation_core::numeric::hermitian_eigenvalues;
use dilation_core::product::ExponentialSystem;
use dilation_core::step::StepFunction;
use dilation_core::{Grid, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn fine() -> Grid {
    Grid::new(10_000).unwrap()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Midpoint rule with `n` nodes on `(lo, hi]`.
fn midpoint(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> C64) -> C64 {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<C64>() * h
}

/// `T_β(σ)` read straight off the section definition.
fn profile(s: &ElementarySection, beta: f64, sigma: f64) -> Vec<C64> {
    let d = s.depth().to_f64();
    if sigma > beta {
        vec![C64::new(0.0, 0.0); s.multiplicity()]
    } else if sigma <= beta - d {
        s.abs_profile().value_at_f64(sigma)
    } else {
        s.rel_profile().value_at_f64(sigma - beta)
    }
}

/// `∫⟨T¹_β, T²_β⟩ dσ` by summing exact piece overlaps at real `β`.
fn phi_oracle(s1: &ElementarySection, s2: &ElementarySection, beta: f64) -> C64 {
    let mut cuts = vec![beta, beta - s1.depth().to_f64(), beta - s2.depth().to_f64()];
    for s in [s1, s2] {
        cuts.extend(s.abs_profile().breakpoints().iter().map(|b| b.to_f64()));
        cuts.extend(s.rel_profile().breakpoints().iter().map(|b| b.to_f64() + beta));
    }
    cuts.retain(|c| *c <= beta);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            dot(&profile(s1, beta, mid), &profile(s2, beta, mid)) * (w[1] - w[0])
        })
        .sum()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn l2_inner_matches_quadrature(
        f in step_on_grid(fine(), -3000, 7000, 2, 6, 2.0),
        g in step_on_grid(fine(), -3000, 7000, 2, 6, 2.0),
    ) {
        // one sample per grid cell
        let exact = f.l2_inner(&g).unwrap();
        let approx = midpoint(f.lo().to_f64(), f.hi().to_f64(), 10_000, |s| dot(&f.value_at_f64(s), &g.value_at_f64(s)));
        prop_assert!((exact - approx).norm() <= 1e-6, "{exact} vs {approx}");
    }

    #[test]
    fn section_inner_matches_beta_quadrature(s1 in section(1), s2 in section(1)) {
        let exact = section_inner(&s1, &s2).unwrap();
        let lo = s1.interval().0.max(s2.interval().0).to_f64();
        let hi = s1.interval().1.min(s2.interval().1).to_f64();
        let approx = if lo < hi {
            midpoint(lo, hi, 10_000, |b| phi_oracle(&s1, &s2, b).exp()) * s1.kappa().conj() * s2.kappa()
        } else {
            C64::new(0.0, 0.0)
        };
        prop_assert!((exact - approx).norm() <= 1e-5 * exact.norm().max(1.0), "{exact} vs {approx}");
    }

    #[test]
    fn exponential_inner_matches_fock_series(f in generator(2 * Q, 2), g in generator(2 * Q, 2)) {
        let exact = ExponentialSystem::exp_inner(&f, &g).unwrap();
        let z = f.l2_inner(&g).unwrap();
        let mut term = C64::new(1.0, 0.0);
        let mut series = term;
        for n in 1..=30 {
            term = term * z / n as f64;
            series += term;
        }
        prop_assert!((exact - series).norm() <= 1e-9);
    }

    #[test]
    fn exponential_gram_is_psd(gens in prop::collection::vec(generator(Q + 7, 1), 2..8)) {
        let n = gens.len();
        let mut g = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                g[(j, k)] = ExponentialSystem::exp_inner(&gens[j], &gens[k]).unwrap();
            }
        }
        let ev = hermitian_eigenvalues(&g);
        prop_assert!(ev[0] >= -1e-9 * ev[n - 1]);
    }
}

#[test]
fn gram_of_section_family_is_psd() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    for _ in 0..10 {
        let secs: Vec<ElementarySection> =
            (0..6).map(|_| section(1).new_tree(&mut runner).unwrap().current()).collect();
        let mut g = DMatrix::<C64>::zeros(6, 6);
        for j in 0..6 {
            for k in 0..6 {
                g[(j, k)] = section_inner(&secs[j], &secs[k]).unwrap();
            }
        }
        assert!((&g - g.adjoint()).norm() <= 1e-12 * g.norm());
        let ev = hermitian_eigenvalues(&g);
        assert!(ev[0] >= -1e-10 * ev[5], "{ev:?}");
    }
}

#[test]
fn constant_step_function_closed_forms() {
    let f = StepFunction::constant(ticks(0), ticks(Q), &[C64::new(1.0, 0.0)]).unwrap();
    let v = ExponentialSystem::exp_inner(&f, &f).unwrap();
    assert!((v.re - std::f64::consts::E).abs() < 1e-15);
}
