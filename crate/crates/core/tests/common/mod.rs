#![allow(dead_code)]

use dilation_core::continuous::{ElementarySection, KVector};
use dilation_core::product::{ExponentialSystem, FiberVector};
use dilation_core::step::StepFunction;
use dilation_core::{Grid, GridRational, C64};
use proptest::prelude::*;

pub const Q: i64 = 10080;

pub fn grid() -> Grid {
    Grid::default()
}

pub fn ticks(t: i64) -> GridRational {
    grid().ticks(t)
}

pub fn complex(max: f64) -> impl Strategy<Value = C64> {
    (-max..max, -max..max).prop_map(|(a, b)| C64::new(a, b))
}

/// A step function on `(lo, hi]` (ticks) with at most `max_pieces` pieces.
pub fn step_on(lo: i64, hi: i64, dim: usize, max_pieces: usize, max_abs: f64) -> BoxedStrategy<StepFunction> {
    step_on_grid(grid(), lo, hi, dim, max_pieces, max_abs)
}

pub fn step_on_grid(
    grid: Grid,
    lo: i64,
    hi: i64,
    dim: usize,
    max_pieces: usize,
    max_abs: f64,
) -> BoxedStrategy<StepFunction> {
    assert!(hi > lo);
    let span = hi - lo;
    let cut_count = max_pieces.saturating_sub(1).min((span - 1) as usize);
    (
        prop::collection::vec(1..span, 0..=cut_count),
        prop::collection::vec(prop::collection::vec(complex(max_abs), dim), max_pieces),
    )
        .prop_map(move |(mut cuts, values)| {
            cuts.sort_unstable();
            cuts.dedup();
            let interior: Vec<GridRational> = cuts.iter().map(|c| grid.ticks(lo + c)).collect();
            let values = values[..interior.len() + 1].to_vec();
            StepFunction::new(grid.ticks(lo), grid.ticks(hi), &interior, &values).unwrap()
        })
        .boxed()
}

/// A generator on `(0, t]` with `‖f‖ ≤ 2`.
pub fn generator(t: i64, dim: usize) -> BoxedStrategy<StepFunction> {
    step_on(0, t, dim, 6, 2.0)
        .prop_map(|f| {
            let n = f.norm();
            if n > 2.0 {
                f.scale(C64::new(2.0 / n, 0.0))
            } else {
                f
            }
        })
        .boxed()
}

pub fn fiber_vector(t: i64, dim: usize, max_terms: usize) -> BoxedStrategy<FiberVector> {
    prop::collection::vec((complex(1.0), generator(t, dim)), 1..=max_terms)
        .prop_map(move |terms| ExponentialSystem::new(dim, grid()).unwrap().combination(ticks(t), terms).unwrap())
        .boxed()
}

/// A section with arbitrary profiles; values kept small so `exp Φ` stays tame.
pub fn section(dim: usize) -> BoxedStrategy<ElementarySection> {
    (0..Q, 1..=Q, 0..=2 * Q, complex(1.0))
        .prop_flat_map(move |(a, w, depth, kappa)| {
            let (lo, hi) = (a, (a + w).min(Q));
            let rel = if depth == 0 {
                Just(StepFunction::empty(ticks(0), dim)).boxed()
            } else {
                step_on(-depth, 0, dim, 4, 0.6)
            };
            (Just((lo, hi, depth, kappa)), step_on(-2 * Q, Q, dim, 4, 0.6), rel)
        })
        .prop_map(|((lo, hi, depth, kappa), abs, rel)| {
            ElementarySection::new((ticks(lo), ticks(hi)), kappa, abs, ticks(depth), rel).unwrap()
        })
        .boxed()
}

pub fn kvector(dim: usize, max_sections: usize) -> BoxedStrategy<KVector> {
    prop::collection::vec(section(dim), 1..=max_sections).prop_map(KVector::new).boxed()
}

/// Times spanning `1/Q … 5`, with integers and tiny values over-represented.
pub fn time() -> BoxedStrategy<i64> {
    prop_oneof![
        1 => Just(1i64),
        1 => (1i64..=5).prop_map(|n| n * Q),
        1 => 1i64..=30,
        4 => 1i64..=5 * Q,
    ]
    .boxed()
}

pub fn scale_of(norms: &[f64]) -> f64 {
    norms.iter().product::<f64>().max(1.0)
}

/// A section on all of `(0, 1]`.
pub fn full_section(dim: usize) -> BoxedStrategy<ElementarySection> {
    (0..=2 * Q, complex(1.0))
        .prop_flat_map(move |(depth, kappa)| {
            let rel = if depth == 0 {
                Just(StepFunction::empty(ticks(0), dim)).boxed()
            } else {
                step_on(-depth, 0, dim, 4, 0.6)
            };
            (Just((depth, kappa)), step_on(-2 * Q, Q, dim, 4, 0.6), rel)
        })
        .prop_map(|((depth, kappa), abs, rel)| {
            ElementarySection::new((ticks(0), ticks(Q)), kappa, abs, ticks(depth), rel).unwrap()
        })
        .boxed()
}

/// A sum of full-interval sections.
pub fn full_kvector(dim: usize, max_sections: usize) -> BoxedStrategy<KVector> {
    prop::collection::vec(full_section(dim), 1..=max_sections).prop_map(KVector::new).boxed()
}

/// Proptest settings shared by the suites: no regression files in the tree.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}
