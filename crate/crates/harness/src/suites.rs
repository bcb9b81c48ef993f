//! The property suites. Each case draws from its own seeded stream and emits
//! one or more records; cases run in parallel and are reported in index order.

use std::time::Instant;

use dilation_core::continuous::{left_dilation_apply, partitions_unit_interval, right_dilation_apply, KVector};
use dilation_core::discrete::{InductiveLimit, Orientation};
use dilation_core::product::{
    coherence_first, coherence_second, DiscreteSystem, ExponentialSystem, FiberVector, Opposite, ProductSystem,
    TensorSum, TensorVector,
};
use dilation_core::semigroup::{
    continuity_probe, eta_apply, theta_forward, theta_matrix_element, u_matrix_element, u_matrix_element_factored,
    FiniteRankOperator, FrameFamily, ProbeInputs,
};
use dilation_core::step::StepFunction;
use dilation_core::{GridRational, Result, C64};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ModelKind, ResolvedParams, RunPlan};
use crate::scenario::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    UnitLaws,
    CoherenceIdentities,
    DiscreteA1,
    Isometry,
    Associativity,
    RightDilationLaw,
    FrameConvergence,
    Continuity,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::UnitLaws,
        Suite::CoherenceIdentities,
        Suite::DiscreteA1,
        Suite::Isometry,
        Suite::Associativity,
        Suite::RightDilationLaw,
        Suite::FrameConvergence,
        Suite::Continuity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::UnitLaws => "unit-laws",
            Suite::CoherenceIdentities => "coherence-identities",
            Suite::DiscreteA1 => "discrete-A1",
            Suite::Isometry => "isometry",
            Suite::Associativity => "associativity-3.2",
            Suite::RightDilationLaw => "right-dilation-law",
            Suite::FrameConvergence => "frame-convergence",
            Suite::Continuity => "continuity-4.1",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Default `(cases, tolerance)`.
    pub fn defaults(self) -> (usize, f64) {
        match self {
            Suite::UnitLaws => (200, 1e-9),
            Suite::CoherenceIdentities => (50, 1e-12),
            Suite::DiscreteA1 => (200, 1e-12),
            Suite::Isometry => (200, 1e-9),
            Suite::Associativity => (100, 1e-8),
            Suite::RightDilationLaw => (100, 1e-8),
            Suite::FrameConvergence => (25, 1e-3),
            Suite::Continuity => (10, 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Exact,
    Frame,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::Frame => "frame",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseRecord {
    pub case_id: String,
    pub digest: String,
    pub t: Option<GridRational>,
    pub lhs: C64,
    pub rhs: C64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub route: Option<Route>,
    pub frame_size: Option<usize>,
    pub partition: Option<bool>,
    pub error: Option<String>,
    /// Pass requires `abs_error < tolerance` rather than `≤`.
    pub strict: bool,
    pub pass: bool,
    pub wall_time: f64,
}

impl CaseRecord {
    fn finish(&mut self) {
        let within = if self.strict { self.abs_error < self.tolerance } else { self.abs_error <= self.tolerance };
        self.pass = self.error.is_none() && within && self.partition != Some(false);
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub records: Vec<CaseRecord>,
    pub wall_time: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }
}

/// Everything a case needs besides its index.
#[derive(Clone, Debug)]
pub struct Context<'a> {
    pub plan: &'a RunPlan,
    pub suite: Suite,
    pub params: &'a ResolvedParams,
}

impl Context<'_> {
    fn sampler(&self, case: usize) -> Sampler {
        Sampler::for_case(self.plan.seed, self.suite.name(), case as u64, self.plan.grid)
    }

    fn exponential(&self) -> ExponentialSystem {
        ExponentialSystem::new(self.plan.dim, self.plan.grid).expect("validated multiplicity")
    }
}

/// Collects one case's records, stamping each with the shared input digest and
/// the time since the previous record.
struct Recorder {
    digest: String,
    clock: Instant,
    out: Vec<CaseRecord>,
}

impl Recorder {
    fn new(inputs: &Value) -> Self {
        Recorder { digest: digest(inputs), clock: Instant::now(), out: Vec::new() }
    }

    fn push(
        &mut self,
        case_id: String,
        t: Option<GridRational>,
        lhs: C64,
        rhs: C64,
        tolerance: f64,
    ) -> &mut CaseRecord {
        self.push_error(case_id, t, lhs, rhs, (lhs - rhs).norm(), tolerance)
    }

    fn push_error(
        &mut self,
        case_id: String,
        t: Option<GridRational>,
        lhs: C64,
        rhs: C64,
        abs_error: f64,
        tolerance: f64,
    ) -> &mut CaseRecord {
        let now = Instant::now();
        let wall_time = (now - self.clock).as_secs_f64();
        self.clock = now;
        self.out.push(CaseRecord {
            case_id,
            digest: self.digest.clone(),
            t,
            lhs,
            rhs,
            abs_error,
            tolerance,
            route: None,
            frame_size: None,
            partition: None,
            error: None,
            strict: false,
            pass: false,
            wall_time,
        });
        self.out.last_mut().expect("just pushed")
    }

    fn finish(mut self) -> Vec<CaseRecord> {
        for r in &mut self.out {
            r.finish();
        }
        self.out
    }
}

/// First 16 hex digits of SHA-256 over the compact JSON of the inputs.
pub fn digest(inputs: &Value) -> String {
    let bytes = serde_json::to_vec(inputs).expect("json values serialize");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

fn error_record(case_id: String, digest: String, tolerance: f64, err: String) -> CaseRecord {
    CaseRecord {
        case_id,
        digest,
        t: None,
        lhs: C64::new(f64::NAN, f64::NAN),
        rhs: C64::new(f64::NAN, f64::NAN),
        abs_error: f64::NAN,
        tolerance,
        route: None,
        frame_size: None,
        partition: None,
        error: Some(err),
        strict: false,
        pass: false,
        wall_time: 0.0,
    }
}

pub fn run_suite(ctx: &Context<'_>) -> SuiteOutcome {
    let start = Instant::now();
    let case = |i: usize| -> Vec<CaseRecord> {
        let out = match ctx.suite {
            Suite::UnitLaws => unit_laws(ctx, i),
            Suite::CoherenceIdentities => coherence(ctx, i),
            Suite::DiscreteA1 => discrete_a1(ctx, i),
            Suite::Isometry => isometry(ctx, i),
            Suite::Associativity => associativity(ctx, i),
            Suite::RightDilationLaw => right_dilation_law(ctx, i),
            Suite::FrameConvergence => frame_convergence(ctx, i),
            Suite::Continuity => continuity(ctx, i),
        };
        out.unwrap_or_else(|e| {
            vec![error_record(format!("case-{i}"), String::new(), ctx.params.tolerance, e.to_string())]
        })
    };
    let records: Vec<CaseRecord> =
        (0..ctx.params.cases).into_par_iter().map(case).collect::<Vec<_>>().into_iter().flatten().collect();
    SuiteOutcome { suite: ctx.suite, records, wall_time: start.elapsed().as_secs_f64() }
}

// ---------------------------------------------------------------------------
// input rendering

fn c_json(c: C64) -> Value {
    json!([c.re, c.im])
}

fn fiber_json(x: &FiberVector) -> Value {
    json!({
        "t": x.fiber(),
        "terms": x.terms().iter().map(|(c, f)| json!({"c": c_json(*c), "f": f.to_record()})).collect::<Vec<_>>(),
    })
}

fn k_json(k: &KVector) -> Value {
    serde_json::to_value(k.to_records()).expect("records serialize")
}

fn tensor_json(v: &TensorVector) -> Value {
    json!({"level": v.level(), "data": v.data().iter().map(|z| c_json(*z)).collect::<Vec<_>>()})
}

/// `max(1, Π norms)`
fn scale_of(norms: &[f64]) -> f64 {
    norms.iter().product::<f64>().max(1.0)
}

/// Output intervals of `v_t(k ⊗ e(f))` partition `(0, 1]` for every generator
/// `f` of `x`.
fn left_partition(m: &ExponentialSystem, t: GridRational, k: &KVector, x: &FiberVector) -> Result<bool> {
    for (_, f) in x.terms() {
        let out = left_dilation_apply(m, t, k, &m.exponential(f.clone())?)?;
        if !partitions_unit_interval(&out.intervals()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn right_partition(m: &ExponentialSystem, t: GridRational, x: &FiberVector, l: &KVector) -> Result<bool> {
    left_partition(m, t, l, &x.reversed())
}

// ---------------------------------------------------------------------------
// unit-laws

/// `Σ_{n ≤ 30} zⁿ/n!`
pub fn fock_series(z: C64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut acc = term;
    for n in 1..=30 {
        term = term * z / n as f64;
        acc += term;
    }
    acc
}

fn unit_laws(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let b = &ctx.params.bounds;
    let m = ctx.exponential();
    let mut rng = ctx.sampler(i);
    let t = rng.time(b.t_range.0, b.t_range.1);
    let s = rng.time(b.s_range.0, b.s_range.1);
    let f = rng.generator(t, m.multiplicity(), b);
    let g = rng.generator(t, m.multiplicity(), b);
    let mut rec = Recorder::new(&json!({"t": t, "s": s, "f": f.to_record(), "g": g.to_record()}));
    let lhs = ExponentialSystem::exp_inner(&f, &g)?;
    let rhs = fock_series(f.l2_inner(&g)?);
    rec.push(format!("fock-{i}"), Some(t), lhs, rhs, ctx.params.tolerance);

    // ξ_s ⊗ ξ_t = ξ_{s+t}, ⟨e(f), ξ_t⟩ = 1
    let joined = m.u_concat(&m.vacuum_unit(s)?, &m.vacuum_unit(t)?)?;
    let lhs = m.fiber_inner(&m.vacuum_unit(s + t)?, &joined)?;
    rec.push(format!("vacuum-{i}"), Some(s + t), lhs, C64::new(1.0, 0.0), ctx.params.tolerance);
    let lhs = m.fiber_inner(&m.exponential(f)?, &m.vacuum_unit(t)?)?;
    rec.push(format!("vacuum-overlap-{i}"), Some(t), lhs, C64::new(1.0, 0.0), ctx.params.tolerance);
    Ok(rec.finish())
}

// ---------------------------------------------------------------------------
// coherence-identities

#[allow(clippy::too_many_arguments)]
fn coherence_pair<M: ProductSystem>(
    rec: &mut Recorder,
    m: &M,
    label: &str,
    i: usize,
    r: GridRational,
    s: GridRational,
    first: (&M::Vector, &M::Vector),
    second: (&M::Vector, &M::Vector),
    tol: f64,
) -> Result<()> {
    let norm_of = |sum: &TensorSum<M::Vector>| -> Result<C64> {
        Ok(match m.collapse(sum)? {
            Some(v) => C64::new(m.norm(&v)?, 0.0),
            None => C64::new(0.0, 0.0),
        })
    };
    let (lhs, rhs) = coherence_first(m, r, first.0, first.1)?;
    let err = m.tensor_distance(&lhs, &rhs)?;
    let (a, b) = (norm_of(&lhs)?, norm_of(&rhs)?);
    rec.push_error(format!("{label}-first-{i}"), Some(r), a, b, err, tol);
    let (lhs, rhs) = coherence_second(m, s, second.0, second.1)?;
    let err = m.tensor_distance(&lhs, &rhs)?;
    let (a, b) = (norm_of(&lhs)?, norm_of(&rhs)?);
    rec.push_error(format!("{label}-second-{i}"), Some(s), a, b, err, tol);
    Ok(())
}

fn coherence(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let b = &ctx.params.bounds;
    let g = ctx.plan.grid;
    let tol = ctx.params.tolerance;
    let mut rng = ctx.sampler(i);
    match ctx.plan.kind {
        ModelKind::Discrete => {
            let m = DiscreteSystem::new(ctx.plan.dim, g)?;
            // r + s + t ≤ 6
            let r = rng.int(1, 4);
            let s = rng.int(1, 5 - r);
            let t = rng.int(1, 6 - r - s);
            let mut tensor = |n: i64| -> Result<TensorVector> {
                let data = (0..m.dim().pow(n as u32)).map(|_| rng.complex(1.0)).collect();
                m.tensor(n as u32, data)
            };
            let (a1, b1, a2, b2) = (tensor(r + s)?, tensor(t)?, tensor(r)?, tensor(s + t)?);
            let mut rec = Recorder::new(&json!({
                "r": r, "s": s, "t": t,
                "first": [tensor_json(&a1), tensor_json(&b1)],
                "second": [tensor_json(&a2), tensor_json(&b2)],
            }));
            let (r, s) = (g.integer(r), g.integer(s));
            coherence_pair(&mut rec, &m, "primal", i, r, s, (&a1, &b1), (&a2, &b2), tol)?;
            coherence_pair(&mut rec, &Opposite(m), "opposite", i, r, s, (&a1, &b1), (&a2, &b2), tol)?;
            Ok(rec.finish())
        }
        _ => {
            let m = ctx.exponential();
            let r = rng.time(b.t_range.0, b.t_range.1);
            let s = rng.time(b.s_range.0, b.s_range.1);
            let t = rng.time(b.t_range.0, b.t_range.1);
            let a1 = rng.fiber_vector(&m, r + s, b);
            let b1 = rng.fiber_vector(&m, t, b);
            let a2 = rng.fiber_vector(&m, r, b);
            let b2 = rng.fiber_vector(&m, s + t, b);
            let mut rec = Recorder::new(&json!({
                "r": r, "s": s, "t": t,
                "first": [fiber_json(&a1), fiber_json(&b1)],
                "second": [fiber_json(&a2), fiber_json(&b2)],
            }));
            coherence_pair(&mut rec, &m, "primal", i, r, s, (&a1, &b1), (&a2, &b2), tol)?;
            // in the opposite system `a2 ∈ E_r`, `b2 ∈ E_{s+t}` still; the split is taken there
            coherence_pair(&mut rec, &Opposite(m), "opposite", i, r, s, (&a1, &b1), (&a2, &b2), tol)?;
            Ok(rec.finish())
        }
    }
}

// ---------------------------------------------------------------------------
// discrete-A1

fn discrete_a1(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let g = ctx.plan.grid;
    let tol = ctx.params.tolerance;
    let mut rng = ctx.sampler(i);
    let dim = match ctx.plan.kind {
        ModelKind::Discrete => ctx.plan.dim,
        _ => rng.int(1, 4) as usize,
    };
    let m = DiscreteSystem::new(dim, g)?;
    // levels: class ≤ 2, x and y ≤ 2, total ≤ 6
    let (lv, lx, ly) = (rng.int(0, 2) as u32, rng.int(1, 2) as u32, rng.int(1, 2) as u32);
    let mut tensor = |n: u32| -> Result<TensorVector> {
        let data = (0..dim.pow(n)).map(|_| rng.complex(1.0)).collect();
        m.tensor(n, data)
    };
    let v_data = if lv > 0 { Some(tensor(lv)?) } else { None };
    let (x, y, y2) = (tensor(lx)?, tensor(ly)?, tensor(ly)?);
    let c = rng.complex(1.0);
    let w_c = rng.complex(1.0);
    let mut rec = Recorder::new(&json!({
        "dim": dim, "class_level": lv, "c": c_json(c), "w": c_json(w_c),
        "class": v_data.as_ref().map(tensor_json),
        "x": tensor_json(&x), "y": tensor_json(&y), "y2": tensor_json(&y2),
    }));
    for side in [Orientation::Left, Orientation::Right] {
        let label = match side {
            Orientation::Left => "left",
            Orientation::Right => "right",
        };
        let lim = InductiveLimit::new(m.clone(), side);
        let v = match &v_data {
            Some(d) => lim.embed(d.clone())?,
            None => lim.scalar(c),
        };
        let lhs = lim.dilate(&lim.dilate(&v, &x, side)?, &y, side)?;
        let joined = match side {
            Orientation::Left => m.u_concat(&x, &y)?,
            Orientation::Right => m.u_concat(&y, &x)?,
        };
        let rhs = lim.dilate(&v, &joined, side)?;
        let err = lim.distance(&lhs, &rhs)?;
        let (nl, nr) = (lim.ind_inner(&lhs, &lhs)?.re.sqrt(), lim.ind_inner(&rhs, &rhs)?.re.sqrt());
        let level = Some(g.integer((lv + lx + ly) as i64));
        rec.push_error(format!("{label}-law-{i}"), level, C64::new(nl, 0.0), C64::new(nr, 0.0), err, tol * nl.max(1.0));

        // isometry against a scalar class at level 0
        let w = lim.scalar(w_c);
        let a = lim.ind_inner(&lim.dilate(&v, &y, side)?, &lim.dilate(&w, &y2, side)?)?;
        let b = lim.ind_inner(&v, &w)? * m.fiber_inner(&y, &y2)?;
        rec.push(format!("{label}-isometry-{i}"), Some(g.integer(ly as i64)), a, b, tol * b.norm().max(1.0));
    }
    Ok(rec.finish())
}

// ---------------------------------------------------------------------------
// isometry

/// `t` for case `i`: every tenth case an integer, every tenth (offset one) the
/// smallest grid step, otherwise uniform in the range.
fn isometry_time(rng: &mut Sampler, i: usize, range: (GridRational, GridRational)) -> GridRational {
    let g = rng.grid();
    let (lo, hi) = range;
    match i % 10 {
        0 => {
            let (a, b) = ((lo.ticks() + g.denominator() - 1) / g.denominator(), hi.floor());
            if a.max(1) <= b {
                g.integer(rng.int(a.max(1), b))
            } else {
                rng.time(lo, hi)
            }
        }
        1 => lo,
        _ => rng.time(lo, hi),
    }
}

fn isometry(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let b = &ctx.params.bounds;
    let tol = ctx.params.tolerance;
    let m = ctx.exponential();
    let d = m.multiplicity();
    let mut rng = ctx.sampler(i);
    let t = isometry_time(&mut rng, i, b.t_range);
    let (x, xp) = (rng.fiber_vector(&m, t, b), rng.fiber_vector(&m, t, b));
    let (k, kp) = (rng.partition_kvector(d, b), rng.partition_kvector(d, b));
    let mut rec = Recorder::new(&json!({
        "t": t, "x": fiber_json(&x), "x_prime": fiber_json(&xp), "k": k_json(&k), "k_prime": k_json(&kp),
    }));
    let scale = scale_of(&[k.norm()?, kp.norm()?, m.norm(&x)?, m.norm(&xp)?]);
    let rhs = k.inner(&kp)? * m.fiber_inner(&x, &xp)?;

    let lhs = left_dilation_apply(&m, t, &k, &x)?.inner(&left_dilation_apply(&m, t, &kp, &xp)?)?;
    let part = left_partition(&m, t, &k, &x)? && left_partition(&m, t, &kp, &xp)?;
    rec.push(format!("left-{i}"), Some(t), lhs, rhs, tol * scale).partition = Some(part);

    let lhs = right_dilation_apply(&m, t, &x, &k)?.inner(&right_dilation_apply(&m, t, &xp, &kp)?)?;
    let rhs = m.fiber_inner(&x, &xp)? * k.inner(&kp)?;
    let part = right_partition(&m, t, &x, &k)? && right_partition(&m, t, &xp, &kp)?;
    rec.push(format!("right-{i}"), Some(t), lhs, rhs, tol * scale).partition = Some(part);
    Ok(rec.finish())
}

// ---------------------------------------------------------------------------
// associativity

/// A positive `m − a` with `m` an integer, `a` a grid value.
fn to_integer(rng: &mut Sampler, a: GridRational, max_extra: i64) -> GridRational {
    let g = rng.grid();
    let base = a.floor() + 1;
    g.integer(base + rng.int(0, max_extra)) - a
}

/// `(s, t)` for case `i`, cycling through: `t ∈ ℕ` (r = 1), `s + t ∈ ℕ`,
/// `α + s ∈ ℕ`, `α + s + t ∈ ℕ` for a section endpoint `α`, then unconstrained.
fn associativity_times(rng: &mut Sampler, i: usize, k: &KVector, ctx: &Context<'_>) -> (GridRational, GridRational) {
    let b = &ctx.params.bounds;
    let g = rng.grid();
    let ends: Vec<GridRational> = k.intervals().iter().map(|iv| iv.1).collect();
    let alpha = ends[rng.index(ends.len())];
    match i % 5 {
        0 => (rng.time(b.s_range.0, b.s_range.1), g.integer(rng.int(1, 4))),
        1 => {
            let s = rng.time(b.s_range.0, b.s_range.1);
            (s, to_integer(rng, s, 2))
        }
        2 => (to_integer(rng, alpha, 3), rng.time(b.t_range.0, b.t_range.1)),
        3 => {
            let s = rng.time(b.s_range.0, b.s_range.1);
            (s, to_integer(rng, alpha + s, 2))
        }
        _ => (rng.time(b.s_range.0, b.s_range.1), rng.time(b.t_range.0, b.t_range.1)),
    }
}

fn associativity(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let b = &ctx.params.bounds;
    let m = ctx.exponential();
    let mut rng = ctx.sampler(i);
    let k = rng.partition_kvector(m.multiplicity(), b);
    let (s, t) = associativity_times(&mut rng, i, &k, ctx);
    let (x, y) = (rng.fiber_vector(&m, s, b), rng.fiber_vector(&m, t, b));
    let mut rec = Recorder::new(&json!({"s": s, "t": t, "k": k_json(&k), "x": fiber_json(&x), "y": fiber_json(&y)}));

    // v_t(v_s(k ⊗ x) ⊗ y) against v_{s+t}(k ⊗ u_{s,t}(x ⊗ y))
    let inner = left_dilation_apply(&m, s, &k, &x)?;
    let lhs = left_dilation_apply(&m, t, &inner, &y)?;
    let xy = m.u_concat(&x, &y)?;
    let rhs = left_dilation_apply(&m, s + t, &k, &xy)?;
    let err = lhs.distance(&rhs)?;
    let scale = scale_of(&[k.norm()?, m.norm(&x)?, m.norm(&y)?]);
    let mut part = left_partition(&m, s, &k, &x)? && left_partition(&m, s + t, &k, &xy)?;
    for (_, f) in x.terms() {
        part &= left_partition(&m, t, &left_dilation_apply(&m, s, &k, &m.exponential(f.clone())?)?, &y)?;
    }
    let (nl, nr) = (C64::new(lhs.norm()?, 0.0), C64::new(rhs.norm()?, 0.0));
    rec.push_error(format!("case-{i}"), Some(s + t), nl, nr, err, ctx.params.tolerance * scale).partition = Some(part);
    Ok(rec.finish())
}

// ---------------------------------------------------------------------------
// right-dilation-law

fn right_dilation_law(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let b = &ctx.params.bounds;
    let tol = ctx.params.tolerance;
    let m = ctx.exponential();
    let d = m.multiplicity();
    let mut rng = ctx.sampler(i);
    let t = rng.time(b.t_range.0, b.t_range.1);
    let s = rng.time(b.s_range.0, b.s_range.1);
    let (x, y) = (rng.fiber_vector(&m, t, b), rng.fiber_vector(&m, s, b));
    let l = rng.partition_kvector(d, b);
    // separate draws for the representation checks
    let (x2, y2) = (rng.fiber_vector(&m, t, b), rng.fiber_vector(&m, s, b));
    let l2 = rng.partition_kvector(d, b);
    let (xa, xb) = (rng.fiber_vector(&m, t, b), rng.fiber_vector(&m, t, b));
    let (la, lb) = (rng.partition_kvector(d, b), rng.partition_kvector(d, b));
    let mut rec = Recorder::new(&json!({
        "s": s, "t": t,
        "law": {"x": fiber_json(&x), "y": fiber_json(&y), "l": k_json(&l)},
        "eta_mult": {"x": fiber_json(&x2), "y": fiber_json(&y2), "l": k_json(&l2)},
        "eta_isometry": {"x": fiber_json(&xa), "y": fiber_json(&xb), "l": k_json(&la), "l_prime": k_json(&lb)},
    }));

    // w_t(x ⊗ w_s(y ⊗ l)) against w_{s+t}(u_{t,s}(x ⊗ y) ⊗ l)
    let inner = right_dilation_apply(&m, s, &y, &l)?;
    let lhs = right_dilation_apply(&m, t, &x, &inner)?;
    let xy = m.u_concat(&x, &y)?;
    let rhs = right_dilation_apply(&m, s + t, &xy, &l)?;
    let scale = scale_of(&[l.norm()?, m.norm(&x)?, m.norm(&y)?]);
    let mut part = right_partition(&m, s, &y, &l)? && right_partition(&m, s + t, &xy, &l)?;
    for (_, f) in y.terms() {
        part &= right_partition(&m, t, &x, &right_dilation_apply(&m, s, &m.exponential(f.clone())?, &l)?)?;
    }
    let (nl, nr) = (C64::new(lhs.norm()?, 0.0), C64::new(rhs.norm()?, 0.0));
    rec.push_error(format!("law-{i}"), Some(s + t), nl, nr, lhs.distance(&rhs)?, tol * scale).partition = Some(part);

    // η_t(x)η_s(y) = η_{s+t}(u_{t,s}(x ⊗ y))
    let lhs = eta_apply(&m, t, &x2, &eta_apply(&m, s, &y2, &l2)?)?;
    let xy2 = m.u_concat(&x2, &y2)?;
    let rhs = eta_apply(&m, s + t, &xy2, &l2)?;
    let scale = scale_of(&[l2.norm()?, m.norm(&x2)?, m.norm(&y2)?]);
    let part = right_partition(&m, s, &y2, &l2)? && right_partition(&m, s + t, &xy2, &l2)?;
    let (nl, nr) = (C64::new(lhs.norm()?, 0.0), C64::new(rhs.norm()?, 0.0));
    rec.push_error(format!("eta-mult-{i}"), Some(s + t), nl, nr, lhs.distance(&rhs)?, tol * scale).partition =
        Some(part);

    // ⟨η_t(x)l, η_t(y)l′⟩ = ⟨x, y⟩⟨l, l′⟩
    let lhs = eta_apply(&m, t, &xa, &la)?.inner(&eta_apply(&m, t, &xb, &lb)?)?;
    let rhs = m.fiber_inner(&xa, &xb)? * la.inner(&lb)?;
    let scale = scale_of(&[la.norm()?, lb.norm()?, m.norm(&xa)?, m.norm(&xb)?]);
    let part = right_partition(&m, t, &xa, &la)? && right_partition(&m, t, &xb, &lb)?;
    rec.push(format!("eta-isometry-{i}"), Some(t), lhs, rhs, tol * scale).partition = Some(part);
    Ok(rec.finish())
}

// ---------------------------------------------------------------------------
// frame-convergence

fn unit(k: &KVector) -> Result<KVector> {
    k.normalized()
}

/// `normalize(v + w/‖w‖/2)`
fn nearby(v: &KVector, w: &KVector) -> Result<KVector> {
    unit(&v.add(&unit(w)?.scale(C64::new(0.5, 0.0))))
}

fn frame_convergence(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let b = &ctx.params.bounds;
    let tol = ctx.params.tolerance;
    let m = ctx.exponential();
    let d = m.multiplicity();
    let g = ctx.plan.grid;
    let mut rng = ctx.sampler(i);
    let t = rng.time(b.t_range.0, b.t_range.1);
    let constant = |c: C64| -> Result<FiberVector> { m.exponential(StepFunction::constant(g.zero(), t, &vec![c; d])?) };

    // u_t: k = v_t(k0 ⊗ x), l′ = w_t(x ⊗ l″)
    let c = rng.polar(0.2, 0.4);
    let x = constant(c)?;
    let kp = unit(&rng.partition_kvector(d, b))?;
    let l = unit(&rng.partition_kvector(d, b))?;
    let k0 = nearby(&kp, &rng.partition_kvector(d, b))?;
    let l2 = nearby(&l, &rng.partition_kvector(d, b))?;
    // ϑ_t inputs
    let cy = rng.polar(0.2, 0.4);
    let y = constant(cy)?;
    let [k2, k3, ket, bra] = [(); 4].map(|_| rng.partition_kvector(d, b));
    let (k2, k3, ket, bra) = (unit(&k2)?, unit(&k3)?, unit(&ket)?, unit(&bra)?);
    let coef = rng.complex(1.0);
    // semigroup inputs
    let s2 = rng.time(b.s_range.0, b.s_range.1);
    let t2 = rng.time(b.s_range.0, b.s_range.1);
    let xs = rng.fiber_vector(&m, t2, b);
    let ys = rng.fiber_vector(&m, s2, b);
    let ks = rng.partition_kvector(d, b);
    let probe = rng.partition_kvector(d, b);

    let mut rec = Recorder::new(&json!({
        "t": t,
        "u": {"c": c_json(c), "k0": k_json(&k0), "k_prime": k_json(&kp), "l": k_json(&l), "l_second": k_json(&l2)},
        "theta": {"c": c_json(cy), "k2": k_json(&k2), "k3": k_json(&k3), "ket": k_json(&ket), "bra": k_json(&bra), "coef": c_json(coef)},
        "semigroup": {"s": s2, "t": t2, "x": fiber_json(&xs), "y": fiber_json(&ys), "k": k_json(&ks), "probe": k_json(&probe)},
    }));

    let k = left_dilation_apply(&m, t, &k0, &x)?;
    let lp = right_dilation_apply(&m, t, &x, &l2)?;
    let exact = k0.inner(&kp)? * m.fiber_inner(&x, &x)? * l.inner(&l2)?;
    let factored = u_matrix_element_factored(&m, t, &k, &l, &kp, &x, &l2)?;
    rec.push(format!("u-exact-{i}"), Some(t), factored, exact, 1e-9).route = Some(Route::Exact);
    let mut last: Option<f64> = None;
    for (step, spec) in ctx.params.frame_schedule.iter().enumerate() {
        let id = format!("u-frame{step}-{i}");
        let frame = match FrameFamily::build(&m, t, spec) {
            Ok(f) => f,
            Err(e) => {
                let r = rec.push_error(id, Some(t), exact, exact, f64::NAN, tol);
                r.error = Some(e.to_string());
                r.route = Some(Route::Frame);
                last = Some(f64::NAN);
                continue;
            }
        };
        let value = u_matrix_element(&m, t, &k, &l, &kp, &lp, &frame)?;
        let err = (value - exact).norm();
        let bound = last.map_or(tol, |p| p + 1e-9);
        let r = rec.push_error(id, Some(t), value, exact, err, bound);
        r.route = Some(Route::Frame);
        r.frame_size = Some(frame.len());
        last = Some(err);
    }

    // ϑ_t(a) with a = coef·|ket⟩⟨bra|, m′ = v_t(k2 ⊗ y), m = v_t(k3 ⊗ y)
    let a = FiniteRankOperator::rank_one(coef, ket.clone(), bra.clone());
    let mp = left_dilation_apply(&m, t, &k2, &y)?;
    let mm = left_dilation_apply(&m, t, &k3, &y)?;
    let exact = coef * k3.inner(&ket)? * bra.inner(&k2)? * m.fiber_inner(&y, &y)?;
    let forward = mm.inner(&theta_forward(&m, t, &a, &k2, &y)?)?;
    rec.push(format!("theta-forward-{i}"), Some(t), forward, exact, 1e-9).route = Some(Route::Exact);
    let frame = FrameFamily::build(&m, t, &ctx.params.frame_schedule[0])?;
    let value = theta_matrix_element(&m, t, &a, &mm, &mp, &frame)?;
    let r = rec.push(format!("theta-frame-{i}"), Some(t), value, exact, tol);
    r.route = Some(Route::Frame);
    r.frame_size = Some(frame.len());
    let swapped = theta_matrix_element(&m, t, &a.adjoint(), &mp, &mm, &frame)?;
    let r = rec.push(format!("theta-hermitian-{i}"), Some(t), swapped, value.conj(), 1e-9);
    r.route = Some(Route::Frame);
    r.frame_size = Some(frame.len());

    // v_s(ϑ_t-forward ⊗ y) against v_{s+t}(a k ⊗ u_{t,s}(x ⊗ y))
    let a = FiniteRankOperator::rank_one(C64::new(0.0, 1.0), ket, bra);
    let lhs = left_dilation_apply(&m, s2, &theta_forward(&m, t2, &a, &ks, &xs)?, &ys)?;
    let rhs = left_dilation_apply(&m, s2 + t2, &a.apply(&ks)?, &m.u_concat(&xs, &ys)?)?;
    let (lv, rv) = (probe.inner(&lhs)?, probe.inner(&rhs)?);
    let scale = scale_of(&[probe.norm()?, ks.norm()?, m.norm(&xs)?, m.norm(&ys)?]);
    rec.push(format!("theta-semigroup-{i}"), Some(s2 + t2), lv, rv, 1e-7 * scale).route = Some(Route::Exact);
    Ok(rec.finish())
}

// ---------------------------------------------------------------------------
// continuity

/// Grids of spacing `coarse / 2^h` on `[start, start + span]`, `h = 0..=halvings`.
pub fn halving_grids(
    start: GridRational,
    span: GridRational,
    coarse: GridRational,
    halvings: u32,
) -> Vec<Vec<GridRational>> {
    let g = start.grid();
    (0..=halvings)
        .map(|h| {
            let step = coarse.ticks() >> h;
            (0..=span.ticks() / step).map(|j| g.ticks(start.ticks() + j * step)).collect()
        })
        .collect()
}

fn continuity(ctx: &Context<'_>, i: usize) -> Result<Vec<CaseRecord>> {
    let p = ctx.params;
    let b = &p.bounds;
    let m = ctx.exponential();
    let d = m.multiplicity();
    let g = ctx.plan.grid;
    let mut rng = ctx.sampler(i);
    let [k, kp, l, l2] = [(); 4].map(|_| rng.full_kvector(d, b));
    let (k, kp, l, l2) = (unit(&k)?, unit(&kp)?, unit(&l)?, unit(&l2)?);
    let half = g.ratio(1, 2).unwrap_or(g.ticks(1));
    let start = rng.time(half, g.one() - g.ticks(1));
    let h = rng.step_function(g.zero(), start + p.span, d, b.max_breakpoints, 0.8);
    let (inputs, route) = if p.frame_route {
        let frame = p.frame_schedule[0].clone();
        (
            ProbeInputs::General { k: k.clone(), l: l.clone(), k_prime: kp.clone(), l_prime: l2.clone(), frame },
            Route::Frame,
        )
    } else {
        let inputs = ProbeInputs::Factored {
            k: k.clone(),
            l: l.clone(),
            k_prime: kp.clone(),
            l_second: l2.clone(),
            h: h.clone(),
        };
        (inputs, Route::Exact)
    };
    let mut rec = Recorder::new(&json!({
        "start": start, "span": p.span, "spacing": p.spacing, "halvings": p.halvings, "route": route.as_str(),
        "k": k_json(&k), "l": k_json(&l), "k_prime": k_json(&kp), "l_second": k_json(&l2), "h": h.to_record(),
    }));
    let grids = halving_grids(start, p.span, p.spacing, p.halvings);
    let finest = continuity_probe(&m, &inputs, grids.last().expect("at least one grid"))?;
    let frame_size = finest.iter().map(|r| r.frame_size).max().unwrap_or(0);
    let moduli: Vec<f64> = grids
        .iter()
        .map(|grid| {
            let values: Vec<C64> =
                finest.iter().filter(|r| grid.binary_search(&r.t).is_ok()).map(|r| r.value).collect();
            values.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
        })
        .collect();
    for h in 1..moduli.len() {
        let spacing = g.ticks(p.spacing.ticks() >> h);
        let (now, before) = (moduli[h], moduli[h - 1]);
        let r = rec.push_error(
            format!("case-{i}-spacing-{h}"),
            Some(spacing),
            C64::new(now, 0.0),
            C64::new(before, 0.0),
            now,
            before,
        );
        r.route = Some(route);
        r.strict = true;
        if route == Route::Frame {
            r.frame_size = Some(frame_size);
        }
    }
    Ok(rec.finish())
}
