//! Piecewise-constant `ℂ^d`-valued functions on half-open grid intervals.
//!
//! A [`StepFunction`] on `(lo, hi]` stores breakpoints `lo = t₀ < … < t_k = hi`
//! and a value `v_i ∈ ℂ^d` on each `(t_{i−1}, t_i]`. Values are kept in
//! canonical form: adjacent equal pieces are merged. The zero-length function
//! (`lo == hi`, no pieces) is allowed and acts as the unit for concatenation.
//!
//! Outside its domain a step function is read as zero wherever an operation
//! asks for zero extension (`restrict`, `window_inner`).

use serde::{Deserialize, Serialize};

use crate::error::{DilationError, Result};
use crate::grid::{Grid, GridRational, RationalString};
use crate::numeric::{dot_conj, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    dim: usize,
    breaks: Vec<GridRational>,
    values: Vec<C64>,
}

/// One constant piece `value` on `(lo, hi]`.
#[derive(Clone, Copy, Debug)]
pub struct Piece<'a> {
    pub lo: GridRational,
    pub hi: GridRational,
    pub value: &'a [C64],
}

impl StepFunction {
    /// Builds from interior breakpoints and one value per piece.
    pub fn new(lo: GridRational, hi: GridRational, interior: &[GridRational], values: &[Vec<C64>]) -> Result<Self> {
        if hi < lo {
            return Err(DilationError::InvalidStepFunction(format!("hi {hi} < lo {lo}")));
        }
        if lo == hi {
            if !interior.is_empty() || !values.is_empty() {
                return Err(DilationError::InvalidStepFunction("empty domain carries pieces".into()));
            }
            return Err(DilationError::InvalidStepFunction(
                "empty domain needs an explicit multiplicity; use StepFunction::empty".into(),
            ));
        }
        if values.len() != interior.len() + 1 {
            return Err(DilationError::InvalidStepFunction(format!(
                "{} interior breakpoints need {} values, got {}",
                interior.len(),
                interior.len() + 1,
                values.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(DilationError::InvalidStepFunction("multiplicity must be ≥ 1".into()));
        }
        let mut breaks = Vec::with_capacity(interior.len() + 2);
        breaks.push(lo);
        breaks.extend_from_slice(interior);
        breaks.push(hi);
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DilationError::InvalidStepFunction("breakpoints must be strictly increasing".into()));
        }
        let mut flat = Vec::with_capacity(values.len() * dim);
        for v in values {
            if v.len() != dim {
                return Err(DilationError::MultiplicityMismatch(dim, v.len()));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(DilationError::InvalidStepFunction("non-finite value".into()));
            }
            flat.extend_from_slice(v);
        }
        Ok(Self::from_raw(dim, breaks, flat))
    }

    pub fn constant(lo: GridRational, hi: GridRational, value: &[C64]) -> Result<Self> {
        Self::new(lo, hi, &[], &[value.to_vec()])
    }

    pub fn zero(lo: GridRational, hi: GridRational, dim: usize) -> Result<Self> {
        Self::constant(lo, hi, &vec![C64::new(0.0, 0.0); dim])
    }

    /// The function on the empty interval `(at, at]`.
    pub fn empty(at: GridRational, dim: usize) -> Self {
        StepFunction { dim, breaks: vec![at], values: Vec::new() }
    }

    /// Canonicalizing constructor for already-validated raw parts.
    pub(crate) fn from_raw(dim: usize, breaks: Vec<GridRational>, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), (breaks.len() - 1) * dim);
        let mut out_b = Vec::with_capacity(breaks.len());
        let mut out_v: Vec<C64> = Vec::with_capacity(values.len());
        out_b.push(breaks[0]);
        for i in 0..breaks.len() - 1 {
            if breaks[i + 1] == breaks[i] {
                continue;
            }
            let v = &values[i * dim..(i + 1) * dim];
            let n = out_v.len();
            if n >= dim && &out_v[n - dim..] == v {
                *out_b.last_mut().unwrap() = breaks[i + 1];
            } else {
                out_v.extend_from_slice(v);
                out_b.push(breaks[i + 1]);
            }
        }
        StepFunction { dim, breaks: out_b, values: out_v }
    }

    pub fn multiplicity(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> GridRational {
        self.breaks[0]
    }

    pub fn hi(&self) -> GridRational {
        *self.breaks.last().unwrap()
    }

    pub fn length(&self) -> GridRational {
        self.hi() - self.lo()
    }

    pub fn is_empty_domain(&self) -> bool {
        self.breaks.len() == 1
    }

    pub fn piece_count(&self) -> usize {
        self.breaks.len() - 1
    }

    /// All breakpoints including both domain ends.
    pub fn breakpoints(&self) -> &[GridRational] {
        &self.breaks
    }

    pub fn piece_value(&self, i: usize) -> &[C64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece<'_>> + '_ {
        (0..self.piece_count()).map(move |i| Piece {
            lo: self.breaks[i],
            hi: self.breaks[i + 1],
            value: self.piece_value(i),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Value at `σ`, zero outside `(lo, hi]`.
    pub fn value_at(&self, sigma: GridRational) -> Vec<C64> {
        self.piece_index_containing(sigma)
            .map(|i| self.piece_value(i).to_vec())
            .unwrap_or_else(|| vec![C64::new(0.0, 0.0); self.dim])
    }

    /// Value at a real point, zero outside the domain. Used by quadrature checks.
    pub fn value_at_f64(&self, sigma: f64) -> Vec<C64> {
        let zero = vec![C64::new(0.0, 0.0); self.dim];
        if self.is_empty_domain() || sigma <= self.lo().to_f64() || sigma > self.hi().to_f64() {
            return zero;
        }
        let i = self.breaks[1..].partition_point(|b| b.to_f64() < sigma);
        self.piece_value(i.min(self.piece_count() - 1)).to_vec()
    }

    fn piece_index_containing(&self, sigma: GridRational) -> Option<usize> {
        if self.is_empty_domain() || sigma <= self.lo() || sigma > self.hi() {
            return None;
        }
        Some(self.breaks[1..].partition_point(|b| *b < sigma))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(DilationError::MultiplicityMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// `f` on `(0, s]` followed by `g(· − s)` on `(s, s + t]`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        for f in [self, other] {
            if !f.lo().is_zero() {
                return Err(DilationError::DomainNotAtZero(f.lo().to_string()));
            }
        }
        Ok(self.append(other))
    }

    /// Places `other` directly after `self`, whatever the domains.
    pub(crate) fn append(&self, other: &Self) -> Self {
        let offset = self.hi() - other.lo();
        let mut breaks = self.breaks.clone();
        breaks.extend(other.breaks[1..].iter().map(|b| *b + offset));
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::from_raw(self.dim, breaks, values)
    }

    /// Inverse of [`concat`](Self::concat): `f` on `(0, s + t]` into the parts on
    /// `(0, s]` and `(0, t]`.
    pub fn split(&self, s: GridRational) -> Result<(Self, Self)> {
        if !self.lo().is_zero() {
            return Err(DilationError::DomainNotAtZero(self.lo().to_string()));
        }
        if s <= self.lo() || s >= self.hi() {
            return Err(DilationError::SplitOutOfRange {
                point: s.to_string(),
                lo: self.lo().to_string(),
                hi: self.hi().to_string(),
            });
        }
        let left = self.restrict(self.lo(), s);
        let right = self.restrict(s, self.hi()).shift(-s);
        Ok((left, right))
    }

    /// The function on `(a, b]`, zero-extended where `(a, b]` leaves the domain.
    pub fn restrict(&self, a: GridRational, b: GridRational) -> Self {
        assert!(a <= b, "restrict: a > b");
        if a == b {
            return Self::empty(a, self.dim);
        }
        let zero = vec![C64::new(0.0, 0.0); self.dim];
        let mut breaks = vec![a];
        let mut values = Vec::new();
        let mut push = |end: GridRational, v: &[C64], breaks: &mut Vec<GridRational>| {
            values.extend_from_slice(v);
            breaks.push(end);
        };
        if self.is_empty_domain() || b <= self.lo() || a >= self.hi() {
            push(b, &zero, &mut breaks);
            return Self::from_raw(self.dim, breaks, values);
        }
        if a < self.lo() {
            push(self.lo(), &zero, &mut breaks);
        }
        for p in self.pieces() {
            let lo = p.lo.max(a);
            let hi = p.hi.min(b);
            if lo < hi {
                push(hi, p.value, &mut breaks);
            }
        }
        if b > self.hi() {
            push(b, &zero, &mut breaks);
        }
        Self::from_raw(self.dim, breaks, values)
    }

    /// `σ ↦ f(σ − by)` on `(lo + by, hi + by]`.
    pub fn shift(&self, by: GridRational) -> Self {
        StepFunction {
            dim: self.dim,
            breaks: self.breaks.iter().map(|b| *b + by).collect(),
            values: self.values.clone(),
        }
    }

    /// `σ ↦ f(lo + hi − σ)` on the same domain.
    pub fn reverse(&self) -> Self {
        let (lo, hi) = (self.lo(), self.hi());
        let breaks = self.breaks.iter().rev().map(|b| lo + hi - *b).collect();
        let mut values = Vec::with_capacity(self.values.len());
        for i in (0..self.piece_count()).rev() {
            values.extend_from_slice(self.piece_value(i));
        }
        StepFunction { dim: self.dim, breaks, values }
    }

    /// Drops zero pieces at both ends. An all-zero function becomes the empty
    /// function at 0, so equal zero-extended functions compare equal.
    pub fn trim_zeros(&self) -> Self {
        let is_zero = |i: usize| self.piece_value(i).iter().all(|z| z.re == 0.0 && z.im == 0.0);
        let n = self.piece_count();
        let first = (0..n).find(|&i| !is_zero(i));
        let Some(first) = first else {
            return Self::empty(self.lo().grid().zero(), self.dim);
        };
        let last = (0..n).rev().find(|&i| !is_zero(i)).unwrap();
        StepFunction {
            dim: self.dim,
            breaks: self.breaks[first..=last + 1].to_vec(),
            values: self.values[first * self.dim..(last + 1) * self.dim].to_vec(),
        }
    }

    /// `∫⟨f(σ), g(σ)⟩ dσ`, conjugate-linear in `self`. Domains must agree.
    pub fn l2_inner(&self, other: &Self) -> Result<C64> {
        self.check_dim(other)?;
        if self.lo() != other.lo() || self.hi() != other.hi() {
            return Err(DilationError::DomainMismatch(
                self.lo().to_string(),
                self.hi().to_string(),
                other.lo().to_string(),
                other.hi().to_string(),
            ));
        }
        if self.is_empty_domain() {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok(window_inner(self, 0, other, 0, self.lo().ticks(), self.hi().ticks()))
    }

    pub fn norm_sq(&self) -> f64 {
        self.pieces().map(|p| (p.hi - p.lo).to_f64() * p.value.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        let values = self.values.iter().map(|z| z * c).collect();
        Self::from_raw(self.dim, self.breaks.clone(), values)
    }

    pub fn to_record(&self) -> StepFunctionRecord {
        StepFunctionRecord {
            lo: self.lo().into(),
            hi: self.hi().into(),
            breakpoints: self.breaks[1..self.breaks.len().saturating_sub(1).max(1)]
                .iter()
                .map(|b| (*b).into())
                .collect(),
            values: (0..self.piece_count())
                .map(|i| self.piece_value(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

/// `∫_{lo}^{hi} ⟨f(σ − f_shift), g(σ − g_shift)⟩ dσ` with zero extension, all
/// positions in ticks of the shared grid.
pub(crate) fn window_inner(f: &StepFunction, f_shift: i64, g: &StepFunction, g_shift: i64, lo: i64, hi: i64) -> C64 {
    let zero = C64::new(0.0, 0.0);
    if f.is_empty_domain() || g.is_empty_domain() {
        return zero;
    }
    let q = f.lo().denominator() as f64;
    let fb = |i: usize| f.breaks[i].ticks() + f_shift;
    let gb = |i: usize| g.breaks[i].ticks() + g_shift;
    let a = lo.max(fb(0)).max(gb(0));
    let b = hi.min(fb(f.breaks.len() - 1)).min(gb(g.breaks.len() - 1));
    if a >= b {
        return zero;
    }
    // first piece whose right end exceeds a
    let mut i = f.breaks[1..].partition_point(|t| t.ticks() + f_shift <= a);
    let mut j = g.breaks[1..].partition_point(|t| t.ticks() + g_shift <= a);
    let mut x = a;
    let mut acc = zero;
    while x < b {
        let fe = fb(i + 1);
        let ge = gb(j + 1);
        let end = fe.min(ge).min(b);
        acc += dot_conj(f.piece_value(i), g.piece_value(j)) * (end - x) as f64;
        x = end;
        if fe == end {
            i += 1;
        }
        if ge == end {
            j += 1;
        }
    }
    acc / q
}

/// Serialized step function: interior breakpoints, one `[re, im]` list per piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunctionRecord {
    pub lo: RationalString,
    pub hi: RationalString,
    #[serde(default)]
    pub breakpoints: Vec<RationalString>,
    pub values: Vec<Vec<[f64; 2]>>,
}

impl StepFunctionRecord {
    /// `dim` is only consulted for empty domains, which carry no values.
    pub fn resolve(&self, grid: Grid, dim: usize) -> Result<StepFunction> {
        let lo = self.lo.resolve(grid)?;
        let hi = self.hi.resolve(grid)?;
        if lo == hi && self.values.is_empty() && self.breakpoints.is_empty() {
            return Ok(StepFunction::empty(lo, dim));
        }
        let interior = self.breakpoints.iter().map(|b| b.resolve(grid)).collect::<Result<Vec<_>>>()?;
        let values: Vec<Vec<C64>> =
            self.values.iter().map(|v| v.iter().map(|[re, im]| C64::new(*re, *im)).collect()).collect();
        let f = StepFunction::new(lo, hi, &interior, &values)?;
        if f.multiplicity() != dim {
            return Err(DilationError::MultiplicityMismatch(dim, f.multiplicity()));
        }
        Ok(f)
    }
}
