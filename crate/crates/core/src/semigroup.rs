//! The unitary semigroup `u_t = (v_t ⊗ id)(id ⊗ w_t*)` on `K ⊗ L`, the
//! endomorphisms `ϑ_t(a) = v_t(a ⊗ id)v_t*`, the representation `η_t`, and
//! continuity probes of `t ↦ u_t`.
//!
//! Adjoints of `v_t` and `w_t` are never applied. Every matrix element is
//! rearranged into forward applications glued by a resolution of the identity
//! on `E_t`, approximated by a finite frame of exponential vectors and the
//! pseudo-inverse of its Gram matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::continuous::{kvector_inner, left_dilation_apply, right_dilation_apply, KVector};
use crate::error::{DilationError, Result};
use crate::grid::GridRational;
use crate::numeric::{hermitian_pseudo_inverse, PseudoInverse, C64};
use crate::product::{ExponentialSystem, FiberVector, ProductSystem};
use crate::step::StepFunction;

pub const DEFAULT_CLIP: f64 = 1e-10;
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;
/// Frames larger than this are refused before the Gram matrix is built.
pub const MAX_FRAME_SIZE: usize = 4096;

/// Generators constant on `2^level` near-equal cells of `(0, t]`, each cell
/// taking `0` or `scale·λ·e_c` with `λ` a Gaussian integer of 1-norm at most
/// `rings`. `max_active` caps the number of nonzero cells per generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameComponent {
    #[serde(default)]
    pub level: u32,
    #[serde(default = "default_rings")]
    pub rings: u32,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_active: Option<u32>,
}

fn default_rings() -> u32 {
    1
}

fn default_scale() -> f64 {
    0.5
}

impl Default for FrameComponent {
    fn default() -> Self {
        FrameComponent { level: 0, rings: 1, scale: 0.5, max_active: None }
    }
}

impl FrameComponent {
    /// Level `level`, ring 1, scale 1/2, one nonzero cell.
    pub fn sparse(level: u32) -> Self {
        FrameComponent { level, rings: 1, scale: 0.5, max_active: Some(1) }
    }

    fn covers(&self, other: &FrameComponent) -> bool {
        let active = |c: &FrameComponent| c.max_active.unwrap_or(u32::MAX);
        self.level == other.level
            && self.scale == other.scale
            && self.rings >= other.rings
            && active(self) >= active(other)
    }
}

/// A union of components, deduplicated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub components: Vec<FrameComponent>,
    #[serde(default = "default_clip")]
    pub clip: f64,
    #[serde(default = "default_condition_limit")]
    pub condition_limit: f64,
}

fn default_clip() -> f64 {
    DEFAULT_CLIP
}

fn default_condition_limit() -> f64 {
    DEFAULT_CONDITION_LIMIT
}

impl Default for FrameSpec {
    /// One cell, values `{0, ±1/2, ±i/2}`.
    fn default() -> Self {
        FrameSpec::from_components(vec![FrameComponent::default()])
    }
}

impl FrameSpec {
    pub fn from_components(components: Vec<FrameComponent>) -> Self {
        FrameSpec { components, clip: DEFAULT_CLIP, condition_limit: DEFAULT_CONDITION_LIMIT }
    }

    /// One cell, lattice points up to the given ring, scale 1/2.
    pub fn rings(rings: u32) -> Self {
        FrameSpec::from_components(vec![FrameComponent { rings, ..FrameComponent::default() }])
    }

    /// Whether every generator of `self` is also a generator of `other`.
    pub fn nested_in(&self, other: &FrameSpec) -> bool {
        self.components.iter().all(|c| other.components.iter().any(|o| o.covers(c)))
    }
}

/// The default frame, then one-cell perturbations on halves, then on quarters.
pub fn default_schedule() -> Vec<FrameSpec> {
    let mut components = vec![FrameComponent::default()];
    let mut out = vec![FrameSpec::from_components(components.clone())];
    for level in 1..=2 {
        components.push(FrameComponent::sparse(level));
        out.push(FrameSpec::from_components(components.clone()));
    }
    out
}

/// Gaussian integers of 1-norm exactly `rho`, in a fixed order.
fn ring_points(rho: u32) -> Vec<C64> {
    let rho = rho as i64;
    let mut out = Vec::new();
    for a in -rho..=rho {
        let b = rho - a.abs();
        out.push(C64::new(a as f64, b as f64));
        if b != 0 {
            out.push(C64::new(a as f64, -(b as f64)));
        }
    }
    out
}

/// Nonzero cell values.
fn cell_values(c: &FrameComponent, dim: usize) -> Vec<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::new();
    for rho in 1..=c.rings {
        for lambda in ring_points(rho) {
            for axis in 0..dim {
                let mut v = vec![zero; dim];
                v[axis] = lambda * c.scale;
                out.push(v);
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn component_generators(c: &FrameComponent, t: GridRational, dim: usize) -> Result<Vec<StepFunction>> {
    let g = t.grid();
    let cells = 1i64 << c.level.min(20);
    let mut bounds: Vec<i64> = (0..=cells).map(|i| (i as i128 * t.ticks() as i128 / cells as i128) as i64).collect();
    bounds.dedup();
    let ncell = bounds.len() - 1;
    let values = cell_values(c, dim);
    let max_active = c.max_active.map_or(ncell, |m| (m as usize).min(ncell));
    let count: f64 = (0..=max_active).map(|k| binomial(ncell, k) * (values.len() as f64).powi(k as i32)).sum();
    if count > MAX_FRAME_SIZE as f64 {
        return Err(DilationError::Dimension(format!("frame component would have {count} generators")));
    }
    let breaks: Vec<GridRational> = bounds.iter().map(|&b| g.ticks(b)).collect();
    let mut out = Vec::with_capacity(count as usize);
    // digit 0 is the zero value, digit i ≥ 1 is values[i − 1]
    let mut digits = vec![0usize; ncell];
    let zero = vec![C64::new(0.0, 0.0); dim];
    loop {
        if digits.iter().filter(|&&d| d != 0).count() <= max_active {
            let flat: Vec<C64> =
                digits.iter().flat_map(|&i| if i == 0 { zero.clone() } else { values[i - 1].clone() }).collect();
            out.push(StepFunction::from_raw(dim, breaks.clone(), flat));
        }
        let mut pos = 0;
        loop {
            if pos == ncell {
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] <= values.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// A finite family `e(h_j)` in `E_t` with Gram matrix and clipped
/// pseudo-inverse; `Σ_jk |e(h_j)⟩ G⁺_jk ⟨e(h_k)|` is the orthogonal projection
/// onto its span.
#[derive(Clone, Debug)]
pub struct FrameFamily {
    t: GridRational,
    generators: Vec<StepFunction>,
    vectors: Vec<FiberVector>,
    gram: DMatrix<C64>,
    pinv: PseudoInverse,
}

impl FrameFamily {
    pub fn build(model: &ExponentialSystem, t: GridRational, spec: &FrameSpec) -> Result<Self> {
        if !t.is_positive() {
            return Err(DilationError::NonPositive(t.to_string()));
        }
        let mut generators: Vec<StepFunction> = Vec::new();
        for c in &spec.components {
            for h in component_generators(c, t, model.multiplicity())? {
                if !generators.contains(&h) {
                    generators.push(h);
                }
            }
            if generators.len() > MAX_FRAME_SIZE {
                return Err(DilationError::Dimension(format!("frame has {} generators", generators.len())));
            }
        }
        Self::from_generators(model, t, generators, spec.clip, spec.condition_limit)
    }

    pub fn from_generators(
        model: &ExponentialSystem,
        t: GridRational,
        generators: Vec<StepFunction>,
        clip: f64,
        condition_limit: f64,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(DilationError::EmptyFrame);
        }
        let vectors = generators.iter().map(|h| model.exponential(h.clone())).collect::<Result<Vec<_>>>()?;
        for v in &vectors {
            model.check_fiber(v, t)?;
        }
        let n = generators.len();
        let mut gram = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v = ExponentialSystem::exp_inner(&generators[j], &generators[k])?;
                gram[(j, k)] = v;
                gram[(k, j)] = v.conj();
            }
        }
        let pinv = hermitian_pseudo_inverse(&gram, clip);
        if pinv.retained == 0 {
            return Err(DilationError::EmptyFrame);
        }
        if pinv.condition > condition_limit {
            let min_eig = pinv.eigenvalues.iter().copied().filter(|l| *l > clip).fold(f64::INFINITY, f64::min);
            return Err(DilationError::IllConditionedFrame {
                condition: pinv.condition,
                limit: condition_limit,
                size: n,
                min_eig,
            });
        }
        Ok(FrameFamily { t, generators, vectors, gram, pinv })
    }

    pub fn t(&self) -> GridRational {
        self.t
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[StepFunction] {
        &self.generators
    }

    pub fn vectors(&self) -> &[FiberVector] {
        &self.vectors
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    pub fn pinv(&self) -> &DMatrix<C64> {
        &self.pinv.matrix
    }

    pub fn condition(&self) -> f64 {
        self.pinv.condition
    }

    pub fn clip(&self) -> f64 {
        self.pinv.clip
    }

    pub fn check_parameter(&self, t: GridRational) -> Result<()> {
        if self.t != t {
            return Err(DilationError::FrameMismatch { frame: self.t.to_string(), requested: t.to_string() });
        }
        Ok(())
    }

    /// `Σ_jk a_j G⁺_jk b_k`, rows outer.
    pub fn contract(&self, a: &[C64], b: &[C64]) -> C64 {
        let p = &self.pinv.matrix;
        let mut acc = C64::new(0.0, 0.0);
        for (j, aj) in a.iter().enumerate() {
            let mut row = C64::new(0.0, 0.0);
            for (k, bk) in b.iter().enumerate() {
                row += p[(j, k)] * bk;
            }
            acc += aj * row;
        }
        acc
    }

    /// `‖(1 − P)x‖²` for the projection `P` onto the span of the frame.
    pub fn residual_sq(&self, model: &ExponentialSystem, x: &FiberVector) -> Result<f64> {
        let b: Vec<C64> = self.vectors.iter().map(|e| model.fiber_inner(e, x)).collect::<Result<_>>()?;
        let a: Vec<C64> = b.iter().map(|z| z.conj()).collect();
        Ok((model.fiber_inner(x, x)? - self.contract(&a, &b)).re)
    }
}

/// `Σ c·|ket⟩⟨bra|` on `K`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteRankOperator {
    terms: Vec<(C64, KVector, KVector)>,
}

impl FiniteRankOperator {
    pub fn new(terms: Vec<(C64, KVector, KVector)>) -> Self {
        FiniteRankOperator { terms }
    }

    pub fn zero() -> Self {
        FiniteRankOperator::default()
    }

    pub fn rank_one(c: C64, ket: KVector, bra: KVector) -> Self {
        FiniteRankOperator { terms: vec![(c, ket, bra)] }
    }

    pub fn terms(&self) -> &[(C64, KVector, KVector)] {
        &self.terms
    }

    pub fn adjoint(&self) -> Self {
        FiniteRankOperator { terms: self.terms.iter().map(|(c, k, b)| (c.conj(), b.clone(), k.clone())).collect() }
    }

    pub fn apply(&self, k: &KVector) -> Result<KVector> {
        let mut out = KVector::zero();
        for (c, ket, bra) in &self.terms {
            out = out.add(&ket.scale(c * kvector_inner(bra, k)?));
        }
        Ok(out)
    }
}

/// `η_t(x)l = w_t(x ⊗ l)`.
pub fn eta_apply(model: &ExponentialSystem, t: GridRational, x: &FiberVector, l: &KVector) -> Result<KVector> {
    right_dilation_apply(model, t, x, l)
}

/// `⟨k ⊗ l, u_t(k′ ⊗ l′)⟩ ≈ Σ_jk ⟨k, v_t(k′ ⊗ e_j)⟩ G⁺_jk ⟨w_t(e_k ⊗ l), l′⟩`.
#[allow(clippy::too_many_arguments)]
pub fn u_matrix_element(
    model: &ExponentialSystem,
    t: GridRational,
    k: &KVector,
    l: &KVector,
    k_prime: &KVector,
    l_prime: &KVector,
    frame: &FrameFamily,
) -> Result<C64> {
    frame.check_parameter(t)?;
    let mut a = Vec::with_capacity(frame.len());
    let mut b = Vec::with_capacity(frame.len());
    for e in frame.vectors() {
        a.push(kvector_inner(k, &left_dilation_apply(model, t, k_prime, e)?)?);
        b.push(kvector_inner(&right_dilation_apply(model, t, e, l)?, l_prime)?);
    }
    Ok(frame.contract(&a, &b))
}

/// Exact value for `l′ = w_t(x ⊗ l″)`: `u_t(k′ ⊗ w_t(x ⊗ l″)) = v_t(k′ ⊗ x) ⊗ l″`.
pub fn u_matrix_element_factored(
    model: &ExponentialSystem,
    t: GridRational,
    k: &KVector,
    l: &KVector,
    k_prime: &KVector,
    x: &FiberVector,
    l_second: &KVector,
) -> Result<C64> {
    Ok(kvector_inner(k, &left_dilation_apply(model, t, k_prime, x)?)? * kvector_inner(l, l_second)?)
}

/// `⟨m, ϑ_t(a)m′⟩ ≈ Σ c Σ_jk ⟨m, v_t(ket ⊗ e_j)⟩ G⁺_jk ⟨v_t(bra ⊗ e_k), m′⟩`.
pub fn theta_matrix_element(
    model: &ExponentialSystem,
    t: GridRational,
    a: &FiniteRankOperator,
    m: &KVector,
    m_prime: &KVector,
    frame: &FrameFamily,
) -> Result<C64> {
    frame.check_parameter(t)?;
    let mut acc = C64::new(0.0, 0.0);
    for (c, ket, bra) in a.terms() {
        let mut left = Vec::with_capacity(frame.len());
        let mut right = Vec::with_capacity(frame.len());
        for e in frame.vectors() {
            left.push(kvector_inner(m, &left_dilation_apply(model, t, ket, e)?)?);
            right.push(kvector_inner(&left_dilation_apply(model, t, bra, e)?, m_prime)?);
        }
        acc += c * frame.contract(&left, &right);
    }
    Ok(acc)
}

/// `ϑ_t(a)v_t(k ⊗ x) = v_t(ak ⊗ x)`.
pub fn theta_forward(
    model: &ExponentialSystem,
    t: GridRational,
    a: &FiniteRankOperator,
    k: &KVector,
    x: &FiberVector,
) -> Result<KVector> {
    left_dilation_apply(model, t, &a.apply(k)?, x)
}

/// Inputs of a continuity probe.
#[derive(Clone, Debug)]
pub enum ProbeInputs {
    /// `ψ = k ⊗ l`, `φ = k′ ⊗ w_t(e(h|_(0,t]) ⊗ l″)`; evaluated exactly.
    Factored { k: KVector, l: KVector, k_prime: KVector, l_second: KVector, h: StepFunction },
    /// `ψ = k ⊗ l`, `φ = k′ ⊗ l′`; evaluated through a frame at each `t`.
    General { k: KVector, l: KVector, k_prime: KVector, l_prime: KVector, frame: FrameSpec },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    pub t: GridRational,
    pub value: C64,
    /// `|value − previous value|`; zero on the first row.
    pub delta: f64,
    pub frame_size: usize,
}

/// Matrix elements of `u_t` along a strictly increasing grid of `t`.
pub fn continuity_probe(
    model: &ExponentialSystem,
    inputs: &ProbeInputs,
    t_grid: &[GridRational],
) -> Result<Vec<ProbeRow>> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DilationError::ProbeGrid);
    }
    let mut rows: Vec<ProbeRow> = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (value, frame_size) = match inputs {
            ProbeInputs::Factored { k, l, k_prime, l_second, h } => {
                let x = model.exponential(h.restrict(t.grid().zero(), t))?;
                (u_matrix_element_factored(model, t, k, l, k_prime, &x, l_second)?, 0)
            }
            ProbeInputs::General { k, l, k_prime, l_prime, frame } => {
                let f = FrameFamily::build(model, t, frame)?;
                (u_matrix_element(model, t, k, l, k_prime, l_prime, &f)?, f.len())
            }
        };
        let delta = rows.last().map_or(0.0, |p| (value - p.value).norm());
        rows.push(ProbeRow { t, value, delta, frame_size });
    }
    Ok(rows)
}

/// `max |Δ|` over a probe table.
pub fn continuity_modulus(rows: &[ProbeRow]) -> f64 {
    rows.iter().map(|r| r.delta).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn g() -> Grid {
        Grid::default()
    }
    fn r(s: &str) -> GridRational {
        g().parse(s).unwrap()
    }
    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn default_frame_has_five_generators() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let f = FrameFamily::build(&m, r("3/2"), &FrameSpec::default()).unwrap();
        assert_eq!(f.len(), 5);
        let f2 = FrameFamily::build(&m, r("3/2"), &FrameSpec::rings(2)).unwrap();
        assert_eq!(f2.len(), 13);
        assert!(FrameSpec::rings(1).nested_in(&FrameSpec::rings(2)));
        assert!(!FrameSpec::rings(2).nested_in(&FrameSpec::rings(1)));
    }

    #[test]
    fn default_schedule_is_nested_and_conditioned() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let schedule = default_schedule();
        let sizes: Vec<usize> = schedule.iter().map(|s| FrameFamily::build(&m, r("3/2"), s).unwrap().len()).collect();
        assert_eq!(sizes, vec![5, 13, 29]);
        for w in schedule.windows(2) {
            assert!(w[0].nested_in(&w[1]));
        }
    }

    #[test]
    fn pinv_identity() {
        for (dim, spec, t) in
            [(1, FrameSpec::rings(1), "1"), (2, FrameSpec::rings(1), "1"), (1, default_schedule()[2].clone(), "2")]
        {
            let m = ExponentialSystem::new(dim, g()).unwrap();
            let f = FrameFamily::build(&m, r(t), &spec).unwrap();
            let p = f.pinv();
            let back = p * f.gram() * p;
            assert!((back - p).norm() <= 1e-8 * p.norm());
        }
    }

    #[test]
    fn ill_conditioned_frame_rejected() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let err = FrameFamily::build(&m, r("5"), &FrameSpec::rings(4)).unwrap_err();
        assert!(matches!(err, DilationError::IllConditionedFrame { .. }));
    }

    #[test]
    fn union_of_components_dedups() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let spec = FrameSpec::from_components(vec![
            FrameComponent::default(),
            FrameComponent { level: 1, ..FrameComponent::default() },
        ]);
        let f = FrameFamily::build(&m, r("2"), &spec).unwrap();
        // 25 two-cell generators contain the 5 constant ones
        assert_eq!(f.len(), 25);
    }

    #[test]
    fn frame_mismatch() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let f = FrameFamily::build(&m, r("1"), &FrameSpec::default()).unwrap();
        let k = KVector::vacuum(g(), 1);
        assert!(matches!(u_matrix_element(&m, r("2"), &k, &k, &k, &k, &f), Err(DilationError::FrameMismatch { .. })));
    }

    #[test]
    fn vacuum_matrix_element_is_one() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let t = r("7/10");
        let f = FrameFamily::build(&m, t, &FrameSpec::default()).unwrap();
        let k = KVector::vacuum(g(), 1);
        let v = u_matrix_element(&m, t, &k, &k, &k, &k, &f).unwrap();
        assert!((v - 1.0).norm() <= 1e-6, "{v}");
    }

    #[test]
    fn zero_operator() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let t = r("1");
        let f = FrameFamily::build(&m, t, &FrameSpec::default()).unwrap();
        let k = KVector::vacuum(g(), 1);
        assert_eq!(theta_matrix_element(&m, t, &FiniteRankOperator::zero(), &k, &k, &f).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn probe_constant_vacuum() {
        let m = ExponentialSystem::new(1, g()).unwrap();
        let k = KVector::vacuum(g(), 1);
        let h = StepFunction::zero(r("0"), r("3"), 1).unwrap();
        let inputs = ProbeInputs::Factored { k: k.clone(), l: k.clone(), k_prime: k.clone(), l_second: k.clone(), h };
        let grid: Vec<_> = (1..=20).map(|i| g().ratio(i, 10).unwrap()).collect();
        let rows = continuity_probe(&m, &inputs, &grid).unwrap();
        assert!(continuity_modulus(&rows) <= 1e-6);
        assert!(continuity_probe(&m, &inputs, &[r("1"), r("1")]).is_err());
    }

    #[test]
    fn finite_rank_adjoint() {
        let k = KVector::vacuum(g(), 1);
        let a = FiniteRankOperator::rank_one(c(0.0, 2.0), k.clone(), k.scale(c(0.5, 0.0)));
        let b = a.adjoint();
        assert_eq!(b.terms()[0].0, c(0.0, -2.0));
        let v = a.apply(&k).unwrap().inner(&k).unwrap();
        assert!((v - c(0.0, -1.0)).norm() < 1e-15);
    }
}
