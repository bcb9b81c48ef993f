//! Seeded random scenarios.
//!
//! Generator: xoshiro256++ seeded through SplitMix64 (`seed_from_u64`). A case
//! gets its own stream from `case_seed(seed, suite, case)`, so cases can run in
//! any order. Draw formulas:
//!
//! - `uniform()` = `(next_u64 >> 11) · 2⁻⁵³`, in `[0, 1)`
//! - `int(lo, hi)` = `lo + next_u64 mod (hi − lo + 1)`
//! - `real(a, b)` = `a + (b − a) · uniform()`

use dilation_core::continuous::{ElementarySection, KVector};
use dilation_core::product::{ExponentialSystem, FiberVector, ProductSystem};
use dilation_core::step::StepFunction;
use dilation_core::{Grid, GridRational, C64};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::config::Bounds;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the suite name.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// `splitmix(seed ⊕ splitmix(fnv1a(suite)) ⊕ splitmix(case))`
pub fn case_seed(seed: u64, suite: &str, case: u64) -> u64 {
    splitmix(seed ^ splitmix(name_hash(suite)) ^ splitmix(case.wrapping_mul(GOLDEN)))
}

pub struct Sampler {
    rng: Xoshiro256PlusPlus,
    grid: Grid,
}

impl Sampler {
    pub fn new(seed: u64, grid: Grid) -> Self {
        Sampler { rng: Xoshiro256PlusPlus::seed_from_u64(seed), grid }
    }

    pub fn for_case(seed: u64, suite: &str, case: u64, grid: Grid) -> Self {
        Self::new(case_seed(seed, suite, case), grid)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(hi >= lo);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.int(0, n as i64 - 1) as usize
    }

    pub fn real(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    /// Real and imaginary parts uniform in `[−m, m]`.
    pub fn complex(&mut self, m: f64) -> C64 {
        C64::new(self.real(-m, m), self.real(-m, m))
    }

    /// `r·e^{iφ}` with `r ∈ [lo, hi]`.
    pub fn polar(&mut self, lo: f64, hi: f64) -> C64 {
        let r = self.real(lo, hi);
        C64::from_polar(r, self.real(0.0, std::f64::consts::TAU))
    }

    /// Grid point uniform in `[lo, hi]`.
    pub fn time(&mut self, lo: GridRational, hi: GridRational) -> GridRational {
        let ticks = self.int(lo.ticks(), hi.ticks());
        self.grid.ticks(ticks)
    }

    /// Up to `max_cuts` distinct sorted ticks strictly inside `(lo, hi)`.
    fn cuts(&mut self, lo: i64, hi: i64, max_cuts: usize) -> Vec<i64> {
        let room = (hi - lo - 1).max(0) as usize;
        let count = self.int(0, max_cuts.min(room) as i64) as usize;
        let mut cuts: Vec<i64> = (0..count).map(|_| self.int(lo + 1, hi - 1)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        cuts
    }

    /// A step function on `(lo, hi]` with at most `max_breakpoints` interior
    /// breakpoints and components in `[−max_value, max_value]`.
    pub fn step_function(
        &mut self,
        lo: GridRational,
        hi: GridRational,
        dim: usize,
        max_breakpoints: usize,
        max_value: f64,
    ) -> StepFunction {
        if lo == hi {
            return StepFunction::empty(lo, dim);
        }
        let interior: Vec<GridRational> =
            self.cuts(lo.ticks(), hi.ticks(), max_breakpoints).into_iter().map(|c| self.grid.ticks(c)).collect();
        let values: Vec<Vec<C64>> =
            (0..=interior.len()).map(|_| (0..dim).map(|_| self.complex(max_value)).collect()).collect();
        StepFunction::new(lo, hi, &interior, &values).expect("sorted interior breakpoints")
    }

    /// A generator on `(0, t]`, rescaled into `‖f‖ ≤ norm_bound`.
    pub fn generator(&mut self, t: GridRational, dim: usize, b: &Bounds) -> StepFunction {
        let f = self.step_function(self.grid.zero(), t, dim, b.max_breakpoints, b.max_value);
        let n = f.norm();
        if n > b.norm_bound {
            // keep strictly inside the bound after rounding
            f.scale(C64::new(b.norm_bound / n * (1.0 - 1e-12), 0.0))
        } else {
            f
        }
    }

    /// `Σ c_i e(f_i)` with `1 ≤ i ≤ max_terms`, `|Re c|, |Im c| ≤ 1`.
    pub fn fiber_vector(&mut self, model: &ExponentialSystem, t: GridRational, b: &Bounds) -> FiberVector {
        let n = self.int(1, b.max_terms.max(1) as i64);
        let terms = (0..n)
            .map(|_| {
                let c = self.complex(1.0);
                (c, self.generator(t, model.multiplicity(), b))
            })
            .collect();
        model.combination(t, terms).expect("generators within bounds")
    }

    /// A section on `(lo, hi]` with `F_abs` on `(−2, 1]`, depth up to
    /// `max_depth`, profile values bounded by `section_value`.
    pub fn section(&mut self, lo: GridRational, hi: GridRational, dim: usize, b: &Bounds) -> ElementarySection {
        let g = self.grid;
        let kappa = self.complex(1.0);
        let abs = self.step_function(g.integer(-2), g.one(), dim, 4, b.section_value);
        let depth = self.time(g.zero(), b.max_depth);
        let rel = self.step_function(-depth, g.zero(), dim, 4, b.section_value);
        ElementarySection::new((lo, hi), kappa, abs, depth, rel).expect("valid section")
    }

    /// Sections on consecutive cells of a random partition of `(0, 1]`.
    pub fn partition_kvector(&mut self, dim: usize, b: &Bounds) -> KVector {
        let g = self.grid;
        let mut ends: Vec<i64> = self.cuts(0, g.one().ticks(), b.max_sections.saturating_sub(1));
        ends.push(g.one().ticks());
        let mut lo = 0;
        let mut sections = Vec::with_capacity(ends.len());
        for hi in ends {
            sections.push(self.section(g.ticks(lo), g.ticks(hi), dim, b));
            lo = hi;
        }
        KVector::new(sections)
    }

    /// `1 ≤ n ≤ max_sections` sections, each on all of `(0, 1]`.
    pub fn full_kvector(&mut self, dim: usize, b: &Bounds) -> KVector {
        let n = self.int(1, b.max_sections.clamp(1, 2) as i64);
        let g = self.grid;
        KVector::new((0..n).map(|_| self.section(g.zero(), g.one(), dim, b)).collect())
    }
}

/// One draw of everything a dilation check consumes.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomScenario {
    pub s: GridRational,
    pub t: GridRational,
    pub x: FiberVector,
    pub y: FiberVector,
    pub k: KVector,
    pub l: KVector,
}

pub fn generate_random_scenario(seed: u64, bounds: &Bounds, model: &ExponentialSystem) -> RandomScenario {
    let mut rng = Sampler::new(seed, model.grid());
    let t = rng.time(bounds.t_range.0, bounds.t_range.1);
    let s = rng.time(bounds.s_range.0, bounds.s_range.1);
    let x = rng.fiber_vector(model, t, bounds);
    let y = rng.fiber_vector(model, s, bounds);
    let k = rng.partition_kvector(model.multiplicity(), bounds);
    let l = rng.partition_kvector(model.multiplicity(), bounds);
    RandomScenario { s, t, x, y, k, l }
}
