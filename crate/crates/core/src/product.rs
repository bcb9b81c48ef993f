//! Computable product systems: fibers `E_t` with the associative product
//! `u_{s,t}: E_s ⊗ E_t → E_{s+t}`.
//!
//! Three models implement [`ProductSystem`]:
//!
//! * [`ExponentialSystem`]: `E_t = Γ(L²((0,t], ℂ^d))`, spanned by exponential
//!   vectors `e(f)` with `⟨e(f), e(g)⟩ = exp ∫⟨f, g⟩`. The product is
//!   `e(f) ⊗ e(g) ↦ e(f ⊙ g)` where `⊙` is concatenation.
//! * [`DiscreteSystem`]: `E_n = (ℂ^δ)^{⊗n}` for integer `n ≥ 1`, dense tensors.
//! * [`Opposite`]: same fibers, `u^op_{s,t}(x ⊗ y) = u_{t,s}(y ⊗ x)`.

use std::fmt;

use crate::error::{DilationError, Result};
use crate::grid::{Grid, GridRational};
use crate::numeric::{dot_conj, C64};
use crate::step::StepFunction;

/// Per-generator bound on `‖f‖`, keeping `exp(‖f‖²)` inside double range.
pub const GENERATOR_NORM_BOUND: f64 = 8.0;

/// An element of `E_s ⊗ E_t` written as `Σ x_i ⊗ y_i`.
pub type TensorSum<V> = Vec<(V, V)>;

/// Both sides of a rebracketing identity.
pub type Rebracketing<V> = (TensorSum<V>, TensorSum<V>);

pub trait ProductSystem: Clone + fmt::Debug + Send + Sync {
    type Vector: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn grid(&self) -> Grid;

    fn name(&self) -> String;

    /// The index `t` of the fiber `E_t` holding `v`.
    fn fiber(&self, v: &Self::Vector) -> GridRational;

    fn fiber_inner(&self, x: &Self::Vector, y: &Self::Vector) -> Result<C64>;

    /// `u_{s,t}(x ⊗ y)`.
    fn u_concat(&self, x: &Self::Vector, y: &Self::Vector) -> Result<Self::Vector>;

    /// `u*_{s,t} z` for `z ∈ E_{s+t}`.
    fn u_split_at(&self, z: &Self::Vector, s: GridRational) -> Result<TensorSum<Self::Vector>>;

    /// The unit `ξ_t`, with `ξ_s ⊗ ξ_t = ξ_{s+t}`.
    fn vacuum_unit(&self, t: GridRational) -> Result<Self::Vector>;

    fn add(&self, x: &Self::Vector, y: &Self::Vector) -> Result<Self::Vector>;

    fn scale(&self, x: &Self::Vector, c: C64) -> Self::Vector;

    /// Largest coefficient of `x − y` after exact term merging.
    fn term_distance(&self, x: &Self::Vector, y: &Self::Vector) -> Result<f64>;

    fn norm(&self, x: &Self::Vector) -> Result<f64> {
        Ok(self.fiber_inner(x, x)?.re.max(0.0).sqrt())
    }

    fn check_fiber(&self, v: &Self::Vector, t: GridRational) -> Result<()> {
        let got = self.fiber(v);
        if got != t {
            return Err(DilationError::FiberMismatch { expected: t.to_string(), got: got.to_string() });
        }
        Ok(())
    }

    /// Applies `u` to every pair, giving one vector of the joined fiber.
    fn collapse(&self, sum: &TensorSum<Self::Vector>) -> Result<Option<Self::Vector>> {
        let mut acc: Option<Self::Vector> = None;
        for (x, y) in sum {
            let z = self.u_concat(x, y)?;
            acc = Some(match acc {
                None => z,
                Some(a) => self.add(&a, &z)?,
            });
        }
        Ok(acc)
    }

    /// Term-wise distance between two elements of `E_s ⊗ E_t`, compared through
    /// the unitary `u_{s,t}`.
    fn tensor_distance(&self, a: &TensorSum<Self::Vector>, b: &TensorSum<Self::Vector>) -> Result<f64> {
        match (self.collapse(a)?, self.collapse(b)?) {
            (Some(x), Some(y)) => self.term_distance(&x, &y),
            (None, None) => Ok(0.0),
            (Some(x), None) | (None, Some(x)) => self.term_distance(&x, &self.scale(&x, C64::new(0.0, 0.0))),
        }
    }
}

// ---------------------------------------------------------------------------
// exponential system

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialSystem {
    dim: usize,
    grid: Grid,
}

/// `Σ c_i e(f_i)` in `E_t`, all generators on `(0, t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberVector {
    t: GridRational,
    terms: Vec<(C64, StepFunction)>,
}

impl FiberVector {
    pub fn fiber(&self) -> GridRational {
        self.t
    }

    pub fn terms(&self) -> &[(C64, StepFunction)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn push_merged(&mut self, c: C64, f: StepFunction) {
        if let Some(slot) = self.terms.iter_mut().find(|(_, g)| *g == f) {
            slot.0 += c;
        } else {
            self.terms.push((c, f));
        }
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|(c, _)| *c != C64::new(0.0, 0.0));
        self
    }

    /// Generator-wise reversal `e(f) ↦ e(f reversed)`.
    pub fn reversed(&self) -> Self {
        FiberVector { t: self.t, terms: self.terms.iter().map(|(c, f)| (*c, f.reverse())).collect() }
    }
}

impl ExponentialSystem {
    pub fn new(dim: usize, grid: Grid) -> Result<Self> {
        if dim == 0 {
            return Err(DilationError::Dimension("multiplicity must be ≥ 1".into()));
        }
        Ok(ExponentialSystem { dim, grid })
    }

    pub fn multiplicity(&self) -> usize {
        self.dim
    }

    /// `e(f)` for a generator on `(0, t]`.
    pub fn exponential(&self, f: StepFunction) -> Result<FiberVector> {
        self.check_generator(&f)?;
        Ok(FiberVector { t: f.hi(), terms: vec![(C64::new(1.0, 0.0), f)] })
    }

    /// `Σ c_i e(f_i)`; all generators must share a domain `(0, t]`.
    pub fn combination(&self, t: GridRational, terms: Vec<(C64, StepFunction)>) -> Result<FiberVector> {
        if !t.is_positive() {
            return Err(DilationError::NonPositive(t.to_string()));
        }
        let mut v = FiberVector { t, terms: Vec::with_capacity(terms.len()) };
        for (c, f) in terms {
            self.check_generator(&f)?;
            if f.hi() != t {
                return Err(DilationError::FiberMismatch { expected: t.to_string(), got: f.hi().to_string() });
            }
            v.push_merged(c, f);
        }
        Ok(v.prune())
    }

    pub fn zero_vector(&self, t: GridRational) -> FiberVector {
        FiberVector { t, terms: Vec::new() }
    }

    pub fn check_generator(&self, f: &StepFunction) -> Result<()> {
        if f.multiplicity() != self.dim {
            return Err(DilationError::MultiplicityMismatch(self.dim, f.multiplicity()));
        }
        if !f.lo().is_zero() {
            return Err(DilationError::DomainNotAtZero(f.lo().to_string()));
        }
        if !f.hi().is_positive() {
            return Err(DilationError::NonPositive(f.hi().to_string()));
        }
        let norm = f.norm();
        if norm > GENERATOR_NORM_BOUND {
            return Err(DilationError::NormBound { norm, bound: GENERATOR_NORM_BOUND });
        }
        Ok(())
    }

    /// `⟨e(f), e(g)⟩ = exp ∫⟨f, g⟩`.
    pub fn exp_inner(f: &StepFunction, g: &StepFunction) -> Result<C64> {
        Ok(f.l2_inner(g)?.exp())
    }
}

impl ProductSystem for ExponentialSystem {
    type Vector = FiberVector;

    fn grid(&self) -> Grid {
        self.grid
    }

    fn name(&self) -> String {
        format!("exponential(d={})", self.dim)
    }

    fn fiber(&self, v: &FiberVector) -> GridRational {
        v.t
    }

    fn fiber_inner(&self, x: &FiberVector, y: &FiberVector) -> Result<C64> {
        self.check_fiber(y, x.t)?;
        let mut acc = C64::new(0.0, 0.0);
        for (c, f) in &x.terms {
            for (d, g) in &y.terms {
                acc += c.conj() * d * Self::exp_inner(f, g)?;
            }
        }
        Ok(acc)
    }

    fn u_concat(&self, x: &FiberVector, y: &FiberVector) -> Result<FiberVector> {
        let mut out = FiberVector { t: x.t + y.t, terms: Vec::new() };
        for (c, f) in &x.terms {
            for (d, g) in &y.terms {
                let h = f.concat(g)?;
                self.check_generator(&h)?;
                out.push_merged(c * d, h);
            }
        }
        Ok(out.prune())
    }

    fn u_split_at(&self, z: &FiberVector, s: GridRational) -> Result<TensorSum<FiberVector>> {
        if !s.is_positive() || s >= z.t {
            return Err(DilationError::SplitOutOfRange { point: s.to_string(), lo: "0".into(), hi: z.t.to_string() });
        }
        let t = z.t - s;
        z.terms
            .iter()
            .map(|(c, f)| {
                let (a, b) = f.split(s)?;
                Ok((
                    FiberVector { t: s, terms: vec![(*c, a)] },
                    FiberVector { t, terms: vec![(C64::new(1.0, 0.0), b)] },
                ))
            })
            .collect()
    }

    fn vacuum_unit(&self, t: GridRational) -> Result<FiberVector> {
        if !t.is_positive() {
            return Err(DilationError::NonPositive(t.to_string()));
        }
        Ok(FiberVector { t, terms: vec![(C64::new(1.0, 0.0), StepFunction::zero(self.grid.zero(), t, self.dim)?)] })
    }

    fn add(&self, x: &FiberVector, y: &FiberVector) -> Result<FiberVector> {
        self.check_fiber(y, x.t)?;
        let mut out = x.clone();
        for (c, f) in &y.terms {
            out.push_merged(*c, f.clone());
        }
        Ok(out.prune())
    }

    fn scale(&self, x: &FiberVector, c: C64) -> FiberVector {
        FiberVector { t: x.t, terms: x.terms.iter().map(|(d, f)| (c * d, f.clone())).collect() }.prune()
    }

    fn term_distance(&self, x: &FiberVector, y: &FiberVector) -> Result<f64> {
        let diff = self.add(x, &self.scale(y, C64::new(-1.0, 0.0)))?;
        Ok(diff.terms.iter().map(|(c, _)| c.norm()).fold(0.0, f64::max))
    }
}

// ---------------------------------------------------------------------------
// discrete system

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSystem {
    dim: usize,
    grid: Grid,
    unit: Vec<C64>,
}

/// A dense tensor in `(ℂ^δ)^{⊗n}`, first factor most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorVector {
    level: u32,
    data: Vec<C64>,
}

impl TensorVector {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

impl DiscreteSystem {
    /// `ξ₁` defaults to the first standard basis vector.
    pub fn new(dim: usize, grid: Grid) -> Result<Self> {
        let mut unit = vec![C64::new(0.0, 0.0); dim.max(1)];
        unit[0] = C64::new(1.0, 0.0);
        Self::with_unit(dim, grid, unit)
    }

    /// Uses `unit / ‖unit‖` as `ξ₁`.
    pub fn with_unit(dim: usize, grid: Grid, unit: Vec<C64>) -> Result<Self> {
        if dim == 0 || unit.len() != dim {
            return Err(DilationError::Dimension(format!("unit vector of length {} for δ = {dim}", unit.len())));
        }
        let norm = dot_conj(&unit, &unit).re.sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(DilationError::Dimension("unit vector must be nonzero".into()));
        }
        let unit = unit.into_iter().map(|z| z / norm).collect();
        Ok(DiscreteSystem { dim, grid, unit })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tensor(&self, level: u32, data: Vec<C64>) -> Result<TensorVector> {
        if level == 0 {
            return Err(DilationError::NonIntegerFiber("0".into()));
        }
        let expected = self.dim.pow(level);
        if data.len() != expected {
            return Err(DilationError::Dimension(format!(
                "level {level} needs {expected} entries, got {}",
                data.len()
            )));
        }
        Ok(TensorVector { level, data })
    }

    fn level_of(&self, t: GridRational) -> Result<u32> {
        match t.as_integer() {
            Some(n) if n >= 1 => Ok(n as u32),
            _ => Err(DilationError::NonIntegerFiber(t.to_string())),
        }
    }
}

impl ProductSystem for DiscreteSystem {
    type Vector = TensorVector;

    fn grid(&self) -> Grid {
        self.grid
    }

    fn name(&self) -> String {
        format!("discrete(δ={})", self.dim)
    }

    fn fiber(&self, v: &TensorVector) -> GridRational {
        self.grid.integer(v.level as i64)
    }

    fn fiber_inner(&self, x: &TensorVector, y: &TensorVector) -> Result<C64> {
        self.check_fiber(y, self.fiber(x))?;
        Ok(dot_conj(&x.data, &y.data))
    }

    fn u_concat(&self, x: &TensorVector, y: &TensorVector) -> Result<TensorVector> {
        let mut data = Vec::with_capacity(x.data.len() * y.data.len());
        for a in &x.data {
            data.extend(y.data.iter().map(|b| a * b));
        }
        Ok(TensorVector { level: x.level + y.level, data })
    }

    fn u_split_at(&self, z: &TensorVector, s: GridRational) -> Result<TensorSum<TensorVector>> {
        let s_level = self.level_of(s)?;
        if s_level >= z.level {
            return Err(DilationError::SplitOutOfRange {
                point: s.to_string(),
                lo: "0".into(),
                hi: z.level.to_string(),
            });
        }
        let t_level = z.level - s_level;
        let rows = self.dim.pow(s_level);
        let cols = self.dim.pow(t_level);
        let mut out = Vec::new();
        for i in 0..rows {
            let row = &z.data[i * cols..(i + 1) * cols];
            if row.iter().all(|c| *c == C64::new(0.0, 0.0)) {
                continue;
            }
            let mut basis = vec![C64::new(0.0, 0.0); rows];
            basis[i] = C64::new(1.0, 0.0);
            out.push((
                TensorVector { level: s_level, data: basis },
                TensorVector { level: t_level, data: row.to_vec() },
            ));
        }
        Ok(out)
    }

    fn vacuum_unit(&self, t: GridRational) -> Result<TensorVector> {
        let n = self.level_of(t)?;
        let one = TensorVector { level: 1, data: self.unit.clone() };
        let mut acc = one.clone();
        for _ in 1..n {
            acc = self.u_concat(&acc, &one)?;
        }
        Ok(acc)
    }

    fn add(&self, x: &TensorVector, y: &TensorVector) -> Result<TensorVector> {
        self.check_fiber(y, self.fiber(x))?;
        Ok(TensorVector { level: x.level, data: x.data.iter().zip(&y.data).map(|(a, b)| a + b).collect() })
    }

    fn scale(&self, x: &TensorVector, c: C64) -> TensorVector {
        TensorVector { level: x.level, data: x.data.iter().map(|a| a * c).collect() }
    }

    fn term_distance(&self, x: &TensorVector, y: &TensorVector) -> Result<f64> {
        self.check_fiber(y, self.fiber(x))?;
        Ok(x.data.iter().zip(&y.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

// ---------------------------------------------------------------------------
// opposite adapter

/// The opposite system: same fibers and inner products, reversed product.
#[derive(Clone, Debug, PartialEq)]
pub struct Opposite<M>(pub M);

impl<M: ProductSystem> ProductSystem for Opposite<M> {
    type Vector = M::Vector;

    fn grid(&self) -> Grid {
        self.0.grid()
    }

    fn name(&self) -> String {
        format!("opposite({})", self.0.name())
    }

    fn fiber(&self, v: &M::Vector) -> GridRational {
        self.0.fiber(v)
    }

    fn fiber_inner(&self, x: &M::Vector, y: &M::Vector) -> Result<C64> {
        self.0.fiber_inner(x, y)
    }

    fn u_concat(&self, x: &M::Vector, y: &M::Vector) -> Result<M::Vector> {
        self.0.u_concat(y, x)
    }

    fn u_split_at(&self, z: &M::Vector, s: GridRational) -> Result<TensorSum<M::Vector>> {
        let t = self.0.fiber(z) - s;
        Ok(self.0.u_split_at(z, t)?.into_iter().map(|(a, b)| (b, a)).collect())
    }

    fn vacuum_unit(&self, t: GridRational) -> Result<M::Vector> {
        self.0.vacuum_unit(t)
    }

    fn add(&self, x: &M::Vector, y: &M::Vector) -> Result<M::Vector> {
        self.0.add(x, y)
    }

    fn scale(&self, x: &M::Vector, c: C64) -> M::Vector {
        self.0.scale(x, c)
    }

    fn term_distance(&self, x: &M::Vector, y: &M::Vector) -> Result<f64> {
        self.0.term_distance(x, y)
    }
}

/// Both sides of the two rebracketing identities used in the associativity
/// proof, applied to `a ⊗ b`.
///
/// `first`: `u*_{r,s+t} u_{r+s,t}` vs `(id_r ⊗ u_{s,t})(u*_{r,s} ⊗ id_t)` on
/// `a ∈ E_{r+s}`, `b ∈ E_t`.
pub fn coherence_first<M: ProductSystem>(
    m: &M,
    r: GridRational,
    a: &M::Vector,
    b: &M::Vector,
) -> Result<Rebracketing<M::Vector>> {
    let lhs = m.u_split_at(&m.u_concat(a, b)?, r)?;
    let mut rhs = Vec::new();
    for (a1, a2) in m.u_split_at(a, r)? {
        rhs.push((a1, m.u_concat(&a2, b)?));
    }
    Ok((lhs, rhs))
}

/// `second`: `(u_{r,s} ⊗ id_t)(id_r ⊗ u*_{s,t})` vs `u*_{r+s,t} u_{r,s+t}` on
/// `a ∈ E_r`, `b ∈ E_{s+t}`, splitting `b` at `s`.
pub fn coherence_second<M: ProductSystem>(
    m: &M,
    s: GridRational,
    a: &M::Vector,
    b: &M::Vector,
) -> Result<Rebracketing<M::Vector>> {
    let mut lhs = Vec::new();
    for (b1, b2) in m.u_split_at(b, s)? {
        lhs.push((m.u_concat(a, &b1)?, b2));
    }
    let r_plus_s = m.fiber(a) + s;
    let rhs = m.u_split_at(&m.u_concat(a, b)?, r_plus_s)?;
    Ok((lhs, rhs))
}
