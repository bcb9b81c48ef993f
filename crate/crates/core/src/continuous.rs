//! The left dilation of the exponential system on
//! `K = E ⊗ ∫₀¹ E_α dα`, and the right dilation built from it.
//!
//! # Representation
//!
//! All of `E ⊗ E_β` lives on one axis. A vector `e(T)` with `T` supported on
//! `(−∞, β]` splits at `σ = 0`: the part on `(−∞, 0]` is the inductive-limit
//! factor `E` (vacuum padding to the left is the identity there), the part on
//! `(0, β]` is the fiber `E_β`.
//!
//! An [`ElementarySection`] over `(a, b]` has value `κ·e(T_β)` at each `β`,
//! where `T_β` is an absolute profile `F_abs(σ)` for `σ ≤ β − d` followed by
//! an endpoint-relative profile `F_rel(σ − β)` on `(β − d, β]`.
//!
//! `v_t` sends `f_α ⊗ e(h)` to position `β = α + t − n`, `n = {α + t}`, by
//! appending `h`, cutting off `n` unit fibers and absorbing them into `E`. On
//! the single axis that is a left shift by `n`, so both profiles stay step
//! functions and the section class is closed under every `v_t`.

use serde::{Deserialize, Serialize};

use crate::error::{DilationError, Result};
use crate::grid::{Grid, GridRational, RationalString};
use crate::numeric::{exp_linear_integral_f64, C64};
use crate::product::{ExponentialSystem, FiberVector, ProductSystem};
use crate::step::{window_inner, StepFunction, StepFunctionRecord};

/// `t = n + r` with `r ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftIndex {
    pub t: GridRational,
    pub n: i64,
    pub r: GridRational,
}

impl ShiftIndex {
    pub fn new(t: GridRational) -> Result<Self> {
        if !t.is_positive() {
            return Err(DilationError::NonPositive(t.to_string()));
        }
        let (n, r) = t.half_open_split();
        Ok(ShiftIndex { t, n, r })
    }

    /// The point `1 − r` where `{α + t}` jumps from `n` to `n + 1`.
    pub fn wrap_point(&self) -> GridRational {
        self.r.grid().one() - self.r
    }
}

/// `({α + t}, α + t − {α + t})` for `α ∈ (0, 1]`.
pub fn shift_index(alpha: GridRational, t: GridRational) -> Result<(i64, GridRational)> {
    let g = alpha.grid();
    if !alpha.is_positive() || alpha > g.one() {
        return Err(DilationError::AlphaOutOfRange(alpha.to_string()));
    }
    if !t.is_positive() {
        return Err(DilationError::NonPositive(t.to_string()));
    }
    Ok((alpha + t).half_open_split())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementarySection {
    lo: GridRational,
    hi: GridRational,
    kappa: C64,
    abs: StepFunction,
    depth: GridRational,
    rel: StepFunction,
}

impl ElementarySection {
    pub fn new(
        interval: (GridRational, GridRational),
        kappa: C64,
        abs: StepFunction,
        depth: GridRational,
        rel: StepFunction,
    ) -> Result<Self> {
        let (lo, hi) = interval;
        let g = lo.grid();
        if lo < g.zero() || hi > g.one() || lo >= hi {
            return Err(DilationError::BadInterval(lo.to_string(), hi.to_string()));
        }
        if depth < g.zero() {
            return Err(DilationError::NonPositive(depth.to_string()));
        }
        if abs.multiplicity() != rel.multiplicity() {
            return Err(DilationError::MultiplicityMismatch(abs.multiplicity(), rel.multiplicity()));
        }
        if rel.lo() != -depth || !rel.hi().is_zero() {
            return Err(DilationError::DomainMismatch(
                rel.lo().to_string(),
                rel.hi().to_string(),
                (-depth).to_string(),
                "0".into(),
            ));
        }
        Ok(ElementarySection { lo, hi, kappa, abs: abs.trim_zeros(), depth, rel })
    }

    /// `κ = 1`, all profiles zero, on `(0, 1]`.
    pub fn vacuum(grid: Grid, dim: usize) -> Self {
        ElementarySection {
            lo: grid.zero(),
            hi: grid.one(),
            kappa: C64::new(1.0, 0.0),
            abs: StepFunction::empty(grid.zero(), dim),
            depth: grid.zero(),
            rel: StepFunction::empty(grid.zero(), dim),
        }
    }

    pub fn interval(&self) -> (GridRational, GridRational) {
        (self.lo, self.hi)
    }

    pub fn kappa(&self) -> C64 {
        self.kappa
    }

    pub fn abs_profile(&self) -> &StepFunction {
        &self.abs
    }

    pub fn depth(&self) -> GridRational {
        self.depth
    }

    pub fn rel_profile(&self) -> &StepFunction {
        &self.rel
    }

    pub fn multiplicity(&self) -> usize {
        self.abs.multiplicity()
    }

    pub fn is_vacuum_like(&self) -> bool {
        self.abs.is_zero() && self.rel.is_zero()
    }

    pub fn with_kappa(&self, kappa: C64) -> Self {
        ElementarySection { kappa, ..self.clone() }
    }

    fn same_data(&self, other: &Self) -> bool {
        self.depth == other.depth && self.abs == other.abs && self.rel == other.rel
    }

    /// The full profile `T_β` on `(lo, β]`, zero-extended to the left.
    pub fn profile_at(&self, beta: GridRational, lo: GridRational) -> StepFunction {
        let cut = beta - self.depth;
        let head = self.abs.restrict(lo.min(cut), cut);
        head.append(&self.rel)
    }

    /// `Φ(β) = ∫_{−∞}^{β} ⟨T¹_β(σ), T²_β(σ)⟩ dσ` at a grid point, in ticks.
    fn phi(&self, other: &Self, beta: i64) -> C64 {
        let (d1, d2) = (self.depth.ticks(), other.depth.ticks());
        let far = i64::MIN / 4;
        let mut acc = window_inner(&self.abs, 0, &other.abs, 0, far, beta - d1.max(d2));
        if d2 > d1 {
            acc += window_inner(&self.abs, 0, &other.rel, beta, beta - d2, beta - d1);
        } else if d1 > d2 {
            acc += window_inner(&self.rel, beta, &other.abs, 0, beta - d1, beta - d2);
        }
        acc + window_inner(&self.rel, beta, &other.rel, beta, beta - d1.min(d2), beta)
    }

    /// Points `β` where `Φ` may change slope: absolute breakpoints minus
    /// relative breakpoints, plus the overlap ends.
    fn kinks(&self, other: &Self, lo: i64, hi: i64) -> Vec<i64> {
        let abs: Vec<i64> = self.abs.breakpoints().iter().chain(other.abs.breakpoints()).map(|b| b.ticks()).collect();
        let rel: Vec<i64> = self.rel.breakpoints().iter().chain(other.rel.breakpoints()).map(|b| b.ticks()).collect();
        let mut out = vec![lo, hi];
        for p in &abs {
            for q in &rel {
                let k = p - q;
                if k > lo && k < hi {
                    out.push(k);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// `∫ conj(κ₁)κ₂ exp Φ(β) dβ` over the overlap of the two intervals.
///
/// `Φ` is piecewise linear in `β` between [`kinks`](ElementarySection::kinks),
/// so each cell integrates in closed form.
pub fn section_inner(s1: &ElementarySection, s2: &ElementarySection) -> Result<C64> {
    if s1.multiplicity() != s2.multiplicity() {
        return Err(DilationError::MultiplicityMismatch(s1.multiplicity(), s2.multiplicity()));
    }
    let lo = s1.lo.max(s2.lo);
    let hi = s1.hi.min(s2.hi);
    if lo >= hi {
        return Ok(C64::new(0.0, 0.0));
    }
    let q = lo.denominator() as f64;
    let kinks = s1.kinks(s2, lo.ticks(), hi.ticks());
    let phis: Vec<C64> = kinks.iter().map(|&b| s1.phi(s2, b)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..kinks.len() - 1 {
        let width = (kinks[i + 1] - kinks[i]) as f64 / q;
        let slope = (phis[i + 1] - phis[i]) / width;
        acc += exp_linear_integral_f64(slope, phis[i], 0.0, width);
    }
    Ok(s1.kappa.conj() * s2.kappa * acc)
}

/// A finite formal sum of elementary sections.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KVector {
    sections: Vec<ElementarySection>,
}

impl KVector {
    pub fn new(sections: Vec<ElementarySection>) -> Self {
        KVector { sections }
    }

    pub fn zero() -> Self {
        KVector::default()
    }

    pub fn vacuum(grid: Grid, dim: usize) -> Self {
        KVector { sections: vec![ElementarySection::vacuum(grid, dim)] }
    }

    pub fn sections(&self) -> &[ElementarySection] {
        &self.sections
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn add(&self, other: &KVector) -> KVector {
        let mut sections = self.sections.clone();
        sections.extend_from_slice(&other.sections);
        KVector { sections }
    }

    pub fn scale(&self, c: C64) -> KVector {
        KVector { sections: self.sections.iter().map(|s| s.with_kappa(s.kappa * c)).collect() }
    }

    pub fn sub(&self, other: &KVector) -> KVector {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn inner(&self, other: &KVector) -> Result<C64> {
        kvector_inner(self, other)
    }

    pub fn norm(&self) -> Result<f64> {
        kvector_norm(self)
    }

    /// `self / ‖self‖`; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Result<KVector> {
        let n = self.norm()?;
        Ok(if n > 0.0 { self.scale(C64::new(1.0 / n, 0.0)) } else { self.clone() })
    }

    /// `‖self − other‖`, with identical sections cancelled exactly first.
    pub fn distance(&self, other: &KVector) -> Result<f64> {
        canonicalize_kvector(&self.sub(other)).norm()
    }

    pub fn intervals(&self) -> Vec<(GridRational, GridRational)> {
        self.sections.iter().map(|s| s.interval()).collect()
    }
}

pub fn kvector_inner(x: &KVector, y: &KVector) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for a in &x.sections {
        for b in &y.sections {
            acc += section_inner(a, b)?;
        }
    }
    Ok(acc)
}

/// Square root of the self inner product, clamped at zero for rounding noise.
pub fn kvector_norm(x: &KVector) -> Result<f64> {
    Ok(kvector_inner(x, x)?.re.max(0.0).sqrt())
}

fn split_interval(
    lo: GridRational,
    hi: GridRational,
    shift: &ShiftIndex,
) -> [Option<(GridRational, GridRational, i64)>; 2] {
    let g = lo.grid();
    let wrap = shift.wrap_point();
    let lower = {
        let end = hi.min(wrap);
        (lo < end).then(|| (lo + shift.r, end + shift.r, shift.n))
    };
    let upper = {
        let start = lo.max(wrap);
        (start < hi).then(|| (start + shift.r - g.one(), hi + shift.r - g.one(), shift.n + 1))
    };
    [lower, upper]
}

/// `v_t(k ⊗ x)`.
///
/// Each section splits at `α = 1 − r`; on each side `n` is constant. The
/// image section sits on the shifted interval with `F_abs(· + n)`, depth
/// `d + t`, and `F_rel` extended by the generator `h` on `(−t, 0]`.
pub fn left_dilation_apply(
    model: &ExponentialSystem,
    t: GridRational,
    k: &KVector,
    x: &FiberVector,
) -> Result<KVector> {
    let shift = ShiftIndex::new(t)?;
    model.check_fiber(x, t)?;
    let g = t.grid();
    let mut out = Vec::with_capacity(k.sections.len() * 2 * x.terms().len());
    for s in &k.sections {
        if s.multiplicity() != model.multiplicity() {
            return Err(DilationError::MultiplicityMismatch(model.multiplicity(), s.multiplicity()));
        }
        for (c, h) in x.terms() {
            model.check_generator(h)?;
            let rel = s.rel.shift(-t).append(&h.shift(-t));
            for (lo, hi, n) in split_interval(s.lo, s.hi, &shift).into_iter().flatten() {
                out.push(ElementarySection {
                    lo,
                    hi,
                    kappa: s.kappa * c,
                    abs: s.abs.shift(-g.integer(n)).trim_zeros(),
                    depth: s.depth + t,
                    rel: rel.clone(),
                });
            }
        }
    }
    Ok(KVector { sections: out })
}

/// `w_t(x ⊗ l) = v_t(l ⊗ R_t x)` with `R_t` the generator reversal.
///
/// Reversal identifies the opposite exponential system with the exponential
/// system itself, so the left dilation of the opposite system, flipped, is a
/// right dilation. This shortcut is specific to the exponential model.
pub fn right_dilation_apply(
    model: &ExponentialSystem,
    t: GridRational,
    x: &FiberVector,
    l: &KVector,
) -> Result<KVector> {
    left_dilation_apply(model, t, l, &x.reversed())
}

/// Strips constant deep-end pieces of `F_rel` into `F_abs` where `F_abs`
/// already carries that constant, then merges identical and adjacent sections.
/// Leaves every inner product unchanged.
pub fn canonicalize_kvector(x: &KVector) -> KVector {
    let mut sections: Vec<ElementarySection> =
        x.sections.iter().filter(|s| s.kappa != C64::new(0.0, 0.0)).map(strip_depth).collect();
    loop {
        let before = sections.len();
        sections = combine_like(sections);
        sections = merge_adjacent(sections);
        if sections.len() == before {
            break;
        }
    }
    sections.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    KVector { sections }
}

fn strip_depth(s: &ElementarySection) -> ElementarySection {
    let mut s = s.clone();
    while s.depth.is_positive() {
        let deepest = s.rel.piece_value(0).to_vec();
        let piece_end = s.rel.breakpoints()[1];
        let available = piece_end - s.rel.lo();
        let band_lo = s.lo - s.depth;
        let needed_to = s.hi - s.depth;
        let run_end = constant_run_end(&s.abs, band_lo, &deepest);
        let strip = match run_end {
            None => available,
            Some(e) if e > needed_to => (e - needed_to).min(available),
            Some(_) => break,
        };
        s.depth = s.depth - strip;
        s.rel = s.rel.restrict(-s.depth, s.rel.hi());
        if s.depth.is_zero() {
            s.rel = StepFunction::empty(s.rel.hi(), s.rel.multiplicity());
        }
    }
    s
}

/// Largest `e` with `f ≡ value` on `(x, e]` (zero outside the domain);
/// `None` if the run never ends.
fn constant_run_end(f: &StepFunction, x: GridRational, value: &[C64]) -> Option<GridRational> {
    let is_zero = value.iter().all(|z| *z == C64::new(0.0, 0.0));
    let mut pos = x;
    if f.is_empty_domain() || pos >= f.hi() {
        return if is_zero { None } else { Some(x) };
    }
    if pos < f.lo() {
        if !is_zero {
            return Some(x);
        }
        pos = f.lo();
    }
    for p in f.pieces() {
        if p.hi <= pos {
            continue;
        }
        if p.value != value {
            return Some(pos);
        }
        pos = p.hi;
    }
    if is_zero {
        None
    } else {
        Some(pos)
    }
}

fn combine_like(sections: Vec<ElementarySection>) -> Vec<ElementarySection> {
    let mut out: Vec<ElementarySection> = Vec::with_capacity(sections.len());
    for s in sections {
        if let Some(t) = out.iter_mut().find(|t| t.lo == s.lo && t.hi == s.hi && t.same_data(&s)) {
            t.kappa += s.kappa;
        } else {
            out.push(s);
        }
    }
    out.retain(|s| s.kappa != C64::new(0.0, 0.0));
    out
}

fn merge_adjacent(mut sections: Vec<ElementarySection>) -> Vec<ElementarySection> {
    sections.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut merged = true;
    while merged {
        merged = false;
        'outer: for i in 0..sections.len() {
            for j in 0..sections.len() {
                if i != j
                    && sections[i].hi == sections[j].lo
                    && sections[i].kappa == sections[j].kappa
                    && sections[i].same_data(&sections[j])
                {
                    sections[i].hi = sections[j].hi;
                    sections.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
    }
    sections
}

/// Whether the intervals tile `(0, 1]` without overlap.
pub fn partitions_unit_interval(intervals: &[(GridRational, GridRational)]) -> bool {
    let Some(first) = intervals.first() else {
        return false;
    };
    let g = first.0.grid();
    let mut sorted = intervals.to_vec();
    sorted.sort();
    let mut pos = g.zero();
    for (lo, hi) in sorted {
        if lo != pos || hi <= lo {
            return false;
        }
        pos = hi;
    }
    pos == g.one()
}

/// Sum of interval lengths, exact.
pub fn total_measure(intervals: &[(GridRational, GridRational)], grid: Grid) -> GridRational {
    intervals.iter().fold(grid.zero(), |acc, (lo, hi)| acc + (*hi - *lo))
}

// ---------------------------------------------------------------------------
// serialization

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionRecord {
    pub interval: [RationalString; 2],
    pub kappa: [f64; 2],
    #[serde(rename = "F_abs")]
    pub f_abs: StepFunctionRecord,
    pub depth: RationalString,
    #[serde(rename = "F_rel")]
    pub f_rel: StepFunctionRecord,
}

impl SectionRecord {
    pub fn resolve(&self, grid: Grid, dim: usize) -> Result<ElementarySection> {
        ElementarySection::new(
            (self.interval[0].resolve(grid)?, self.interval[1].resolve(grid)?),
            C64::new(self.kappa[0], self.kappa[1]),
            self.f_abs.resolve(grid, dim)?,
            self.depth.resolve(grid)?,
            self.f_rel.resolve(grid, dim)?,
        )
    }
}

impl ElementarySection {
    pub fn to_record(&self) -> SectionRecord {
        SectionRecord {
            interval: [self.lo.into(), self.hi.into()],
            kappa: [self.kappa.re, self.kappa.im],
            f_abs: self.abs.to_record(),
            depth: self.depth.into(),
            f_rel: self.rel.to_record(),
        }
    }
}

impl KVector {
    pub fn to_records(&self) -> Vec<SectionRecord> {
        self.sections.iter().map(|s| s.to_record()).collect()
    }

    pub fn from_records(records: &[SectionRecord], grid: Grid, dim: usize) -> Result<Self> {
        Ok(KVector { sections: records.iter().map(|r| r.resolve(grid, dim)).collect::<Result<_>>()? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Grid {
        Grid::default()
    }
    fn r(s: &str) -> GridRational {
        g().parse(s).unwrap()
    }
    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn shift_index_examples() {
        assert_eq!(shift_index(r("1/4"), r("1/2")).unwrap(), (0, r("3/4")));
        assert_eq!(shift_index(r("7/10"), r("23/10")).unwrap(), (2, r("1")));
        assert_eq!(shift_index(r("9/10"), r("23/10")).unwrap(), (3, r("1/5")));
        assert!(matches!(shift_index(r("0"), r("1")), Err(DilationError::AlphaOutOfRange(_))));
        assert!(shift_index(r("11/10"), r("1")).is_err());
    }

    #[test]
    fn shift_is_a_bijection_of_grid_points() {
        let grid = Grid::new(60).unwrap();
        for t_ticks in [1, 7, 30, 59, 60, 61, 137, 180] {
            let t = grid.ticks(t_ticks);
            let mut hit = [false; 61];
            for a in 1..=60 {
                let (_, beta) = shift_index(grid.ticks(a), t).unwrap();
                assert!(!hit[beta.ticks() as usize]);
                hit[beta.ticks() as usize] = true;
            }
            assert!(hit[1..].iter().all(|h| *h));
        }
    }

    #[test]
    fn vacuum_section_norm() {
        let v = ElementarySection::vacuum(g(), 1);
        assert!((section_inner(&v, &v).unwrap() - one()).norm() < 1e-15);
    }

    #[test]
    fn relative_one_section_norm_is_e() {
        let rel = StepFunction::constant(r("-1"), r("0"), &[one()]).unwrap();
        let s = ElementarySection::new((r("0"), r("1")), one(), StepFunction::empty(r("0"), 1), r("1"), rel).unwrap();
        let v = section_inner(&s, &s).unwrap();
        assert!((v.re - std::f64::consts::E).abs() < 1e-13, "{v}");
    }

    #[test]
    fn disjoint_sections_are_orthogonal() {
        let a = ElementarySection::vacuum(g(), 1);
        let mut b = a.clone();
        b.lo = r("1/2");
        let mut c = a.clone();
        c.hi = r("1/2");
        assert_eq!(section_inner(&b, &c).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn half_step_splits_in_two() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let k = KVector::vacuum(g(), 1);
        let x = m.vacuum_unit(r("1/2")).unwrap();
        let out = left_dilation_apply(&m, r("1/2"), &k, &x).unwrap();
        assert_eq!(out.intervals(), vec![(r("1/2"), r("1")), (r("0"), r("1/2"))]);
        assert!(partitions_unit_interval(&out.intervals()));
    }

    #[test]
    fn vacuum_is_invariant() {
        let m = ExponentialSystem::new(2, g()).unwrap();
        let k = KVector::vacuum(g(), 2);
        for t in ["1/10080", "1/2", "1", "7/3", "5"] {
            let t = r(t);
            let out = left_dilation_apply(&m, t, &k, &m.vacuum_unit(t).unwrap()).unwrap();
            assert_eq!(canonicalize_kvector(&out), k);
            assert!(out.distance(&k).unwrap() <= 1e-10);
            let out = right_dilation_apply(&m, t, &m.vacuum_unit(t).unwrap(), &k).unwrap();
            assert_eq!(canonicalize_kvector(&out), k);
        }
    }

    #[test]
    fn canonicalize_strips_zero_depth() {
        let s = ElementarySection::new(
            (r("0"), r("1/2")),
            one(),
            StepFunction::zero(r("-3"), r("1"), 1).unwrap(),
            r("2"),
            StepFunction::zero(r("-2"), r("0"), 1).unwrap(),
        )
        .unwrap();
        let c = canonicalize_kvector(&KVector::new(vec![s]));
        assert_eq!(c.sections()[0].depth(), r("0"));
        assert_eq!(canonicalize_kvector(&c), c);
    }

    #[test]
    fn canonicalize_keeps_nonconstant_band() {
        // F_abs differs from the deep F_rel value on part of the band
        let abs = StepFunction::new(r("-2"), r("1"), &[r("-1")], &[vec![one()], vec![C64::new(2.0, 0.0)]]).unwrap();
        let rel = StepFunction::constant(r("-1"), r("0"), &[one()]).unwrap();
        let s = ElementarySection::new((r("0"), r("1")), one(), abs, r("1"), rel).unwrap();
        let k = KVector::new(vec![s.clone()]);
        let c = canonicalize_kvector(&k);
        assert_eq!(c.sections()[0].depth(), r("1"));
        let n0 = k.norm().unwrap();
        assert!((c.norm().unwrap() - n0).abs() < 1e-12 * n0);
    }

    #[test]
    fn cancellation() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let f = StepFunction::constant(r("0"), r("3/2"), &[C64::new(0.3, 0.1)]).unwrap();
        let k = left_dilation_apply(&m, r("3/2"), &KVector::vacuum(g(), 1), &m.exponential(f).unwrap()).unwrap();
        let diff = k.add(&k.scale(C64::new(-1.0, 0.0)));
        assert!(canonicalize_kvector(&diff).norm().unwrap() <= 1e-12);
        assert_eq!(KVector::zero().norm().unwrap(), 0.0);
    }

    #[test]
    fn bad_inputs_rejected() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let k = KVector::vacuum(g(), 1);
        let x = m.vacuum_unit(r("1")).unwrap();
        assert!(matches!(left_dilation_apply(&m, r("1/2"), &k, &x), Err(DilationError::FiberMismatch { .. })));
        assert!(ElementarySection::new(
            (r("1/2"), r("1/2")),
            one(),
            StepFunction::empty(r("0"), 1),
            r("0"),
            StepFunction::empty(r("0"), 1)
        )
        .is_err());
        let m2 = ExponentialSystem::new(2, g()).unwrap();
        assert!(left_dilation_apply(&m2, r("1"), &k, &m2.vacuum_unit(r("1")).unwrap()).is_err());
    }

    #[test]
    fn record_round_trip() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let f = StepFunction::new(r("0"), r("2"), &[r("1/3")], &[vec![one()], vec![C64::new(0.0, -0.5)]]).unwrap();
        let k = left_dilation_apply(&m, r("2"), &KVector::vacuum(g(), 1), &m.exponential(f).unwrap()).unwrap();
        let json = serde_json::to_string(&k.to_records()).unwrap();
        let back: Vec<SectionRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(KVector::from_records(&back, g(), 1).unwrap(), k);
    }
}
