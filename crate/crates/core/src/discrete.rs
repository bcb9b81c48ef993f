//! Dilations of the discrete subsystem `(E_n)_{n ∈ ℕ}` on the inductive limit
//! `E = lim ind E_n` along the unit `ξ_n = ξ₁^{⊗n}`.
//!
//! For the left orientation the embeddings are `x_n ↦ ξ_m ⊗ x_n`, and
//! `(m, x) ⊗ y_n ↦ (m + n, x ⊗ y)` is the left dilation. The right orientation
//! pads with `x_n ⊗ ξ_m` and absorbs new factors on the left.
//!
//! Representatives are never reduced to a normal form; equality of classes is
//! decided through inner products at a common level.

use serde::{Deserialize, Serialize};

use crate::error::{DilationError, Result};
use crate::numeric::C64;
use crate::product::ProductSystem;

pub const DEFAULT_LEVEL_CAP: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
}

/// Level 0 of the inductive system is `ℂ`.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelRep<V> {
    Scalar(C64),
    Fiber(V),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndLimVector<V> {
    level: u32,
    rep: LevelRep<V>,
    orientation: Orientation,
}

impl<V> IndLimVector<V> {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn rep(&self) -> &LevelRep<V> {
        &self.rep
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }
}

/// The inductive limit of a product system's integer fibers.
#[derive(Clone, Debug)]
pub struct InductiveLimit<M> {
    model: M,
    orientation: Orientation,
    level_cap: u32,
}

impl<M: ProductSystem> InductiveLimit<M> {
    pub fn new(model: M, orientation: Orientation) -> Self {
        InductiveLimit { model, orientation, level_cap: DEFAULT_LEVEL_CAP }
    }

    pub fn with_level_cap(mut self, cap: u32) -> Self {
        self.level_cap = cap;
        self
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn scalar(&self, c: C64) -> IndLimVector<M::Vector> {
        IndLimVector { level: 0, rep: LevelRep::Scalar(c), orientation: self.orientation }
    }

    /// The class of `x ∈ E_n`.
    pub fn embed(&self, x: M::Vector) -> Result<IndLimVector<M::Vector>> {
        let level = self.level_of(&x)?;
        self.check_cap(level)?;
        Ok(IndLimVector { level, rep: LevelRep::Fiber(x), orientation: self.orientation })
    }

    fn level_of(&self, x: &M::Vector) -> Result<u32> {
        let t = self.model.fiber(x);
        match t.as_integer() {
            Some(n) if n >= 1 => Ok(n as u32),
            _ => Err(DilationError::NonIntegerFiber(t.to_string())),
        }
    }

    fn check_cap(&self, level: u32) -> Result<()> {
        if level > self.level_cap {
            return Err(DilationError::LevelCap { level, cap: self.level_cap });
        }
        Ok(())
    }

    fn check_orientation(&self, v: &IndLimVector<M::Vector>) -> Result<()> {
        if v.orientation != self.orientation {
            return Err(DilationError::OrientationMismatch);
        }
        Ok(())
    }

    fn unit(&self, m: u32) -> Result<M::Vector> {
        self.model.vacuum_unit(self.model.grid().integer(m as i64))
    }

    /// Moves a representative `m` levels up along the isometric embeddings.
    pub fn lift(&self, v: &IndLimVector<M::Vector>, m: u32) -> Result<IndLimVector<M::Vector>> {
        self.check_orientation(v)?;
        if m == 0 {
            return Ok(v.clone());
        }
        let level = v.level + m;
        self.check_cap(level)?;
        let xi = self.unit(m)?;
        let rep = match &v.rep {
            LevelRep::Scalar(c) => self.model.scale(&xi, *c),
            LevelRep::Fiber(x) => match self.orientation {
                Orientation::Left => self.model.u_concat(&xi, x)?,
                Orientation::Right => self.model.u_concat(x, &xi)?,
            },
        };
        Ok(IndLimVector { level, rep: LevelRep::Fiber(rep), orientation: self.orientation })
    }

    /// Lifts both to the larger level and takes the fiber inner product there.
    pub fn ind_inner(&self, v: &IndLimVector<M::Vector>, w: &IndLimVector<M::Vector>) -> Result<C64> {
        self.check_orientation(v)?;
        self.check_orientation(w)?;
        let level = v.level.max(w.level);
        let v = self.lift(v, level - v.level)?;
        let w = self.lift(w, level - w.level)?;
        match (&v.rep, &w.rep) {
            (LevelRep::Scalar(a), LevelRep::Scalar(b)) => Ok(a.conj() * b),
            (LevelRep::Fiber(x), LevelRep::Fiber(y)) => self.model.fiber_inner(x, y),
            _ => unreachable!("operands lifted to a common level"),
        }
    }

    pub fn add(&self, v: &IndLimVector<M::Vector>, w: &IndLimVector<M::Vector>) -> Result<IndLimVector<M::Vector>> {
        self.check_orientation(v)?;
        self.check_orientation(w)?;
        let level = v.level.max(w.level);
        let v = self.lift(v, level - v.level)?;
        let w = self.lift(w, level - w.level)?;
        let rep = match (v.rep, w.rep) {
            (LevelRep::Scalar(a), LevelRep::Scalar(b)) => LevelRep::Scalar(a + b),
            (LevelRep::Fiber(x), LevelRep::Fiber(y)) => LevelRep::Fiber(self.model.add(&x, &y)?),
            _ => unreachable!("operands lifted to a common level"),
        };
        Ok(IndLimVector { level, rep, orientation: self.orientation })
    }

    pub fn scale(&self, v: &IndLimVector<M::Vector>, c: C64) -> IndLimVector<M::Vector> {
        let rep = match &v.rep {
            LevelRep::Scalar(a) => LevelRep::Scalar(a * c),
            LevelRep::Fiber(x) => LevelRep::Fiber(self.model.scale(x, c)),
        };
        IndLimVector { level: v.level, rep, orientation: v.orientation }
    }

    /// The dilation `E ⊗ E_n → E` (left) or `E_n ⊗ E → E` (right), applied to
    /// the class `v` and `y ∈ E_n`. `side` must match the orientation.
    pub fn dilate(
        &self,
        v: &IndLimVector<M::Vector>,
        y: &M::Vector,
        side: Orientation,
    ) -> Result<IndLimVector<M::Vector>> {
        self.check_orientation(v)?;
        if side != self.orientation {
            return Err(DilationError::OrientationMismatch);
        }
        let n = self.level_of(y)?;
        let level = v.level + n;
        self.check_cap(level)?;
        let rep = match &v.rep {
            LevelRep::Scalar(c) => self.model.scale(y, *c),
            LevelRep::Fiber(x) => match side {
                Orientation::Left => self.model.u_concat(x, y)?,
                Orientation::Right => self.model.u_concat(y, x)?,
            },
        };
        Ok(IndLimVector { level, rep: LevelRep::Fiber(rep), orientation: self.orientation })
    }

    /// `‖v − w‖` through inner products at a common level.
    pub fn distance(&self, v: &IndLimVector<M::Vector>, w: &IndLimVector<M::Vector>) -> Result<f64> {
        let d = self.add(v, &self.scale(w, C64::new(-1.0, 0.0)))?;
        Ok(self.ind_inner(&d, &d)?.re.max(0.0).sqrt())
    }
}
