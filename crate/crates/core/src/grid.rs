//! Exact time coordinates on the rational grid `(1/Q)·ℤ`.
//!
//! Every breakpoint and time parameter in the crate is an integer number of
//! ticks over a shared denominator `Q`. Arithmetic stays in `i64`, so interval
//! splitting and the shift modulo `ℤ` never drift.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DilationError, Result};

/// Default grid denominator; divisible by every integer up to 10 and by 2^5.
pub const DEFAULT_DENOMINATOR: i64 = 10080;

/// The session grid `1/Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    q: i64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { q: DEFAULT_DENOMINATOR }
    }
}

impl Grid {
    pub fn new(q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(DilationError::InvalidGrid(q));
        }
        Ok(Grid { q })
    }

    pub fn denominator(&self) -> i64 {
        self.q
    }

    pub fn ticks(&self, ticks: i64) -> GridRational {
        GridRational { ticks, q: self.q }
    }

    pub fn zero(&self) -> GridRational {
        self.ticks(0)
    }

    pub fn one(&self) -> GridRational {
        self.ticks(self.q)
    }

    pub fn integer(&self, n: i64) -> GridRational {
        self.ticks(n * self.q)
    }

    /// `p/q` as a grid value; fails unless `q` divides `p·Q`.
    pub fn ratio(&self, p: i64, q: i64) -> Result<GridRational> {
        if q == 0 {
            return Err(DilationError::OffGrid(format!("{p}/{q}")));
        }
        let num = p as i128 * self.q as i128;
        if num % q as i128 != 0 {
            return Err(DilationError::OffGrid(format!("{p}/{q}")));
        }
        Ok(self.ticks((num / q as i128) as i64))
    }

    /// Parses `"p/q"` or `"p"`.
    pub fn parse(&self, s: &str) -> Result<GridRational> {
        let s = s.trim();
        let bad = || DilationError::Parse(format!("not a rational: {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p = p.trim().parse::<i64>().map_err(|_| bad())?;
                let q = q.trim().parse::<i64>().map_err(|_| bad())?;
                self.ratio(p, q)
            }
            None => Ok(self.integer(s.parse::<i64>().map_err(|_| bad())?)),
        }
    }
}

/// An exact multiple of `1/Q`.
///
/// Values from different grids never meet in practice; mixing them is a
/// programming error and panics in the arithmetic operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridRational {
    ticks: i64,
    q: i64,
}

impl GridRational {
    pub fn ticks(&self) -> i64 {
        self.ticks
    }

    pub fn grid(&self) -> Grid {
        Grid { q: self.q }
    }

    pub fn denominator(&self) -> i64 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.ticks as f64 / self.q as f64
    }

    pub fn is_zero(&self) -> bool {
        self.ticks == 0
    }

    pub fn is_positive(&self) -> bool {
        self.ticks > 0
    }

    pub fn is_integer(&self) -> bool {
        self.ticks % self.q == 0
    }

    /// Integer part when the value is an integer.
    pub fn as_integer(&self) -> Option<i64> {
        self.is_integer().then(|| self.ticks / self.q)
    }

    /// Largest integer `≤ self`.
    pub fn floor(&self) -> i64 {
        Integer::div_floor(&self.ticks, &self.q)
    }

    /// The unique `n` with `self − n ∈ (0, 1]`, together with `self − n`.
    pub fn half_open_split(&self) -> (i64, GridRational) {
        let n = Integer::div_floor(&(self.ticks - 1), &self.q);
        (n, GridRational { ticks: self.ticks - n * self.q, q: self.q })
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Reduced `"p/q"` rendering (`"p"` for integers).
    pub fn to_ratio_string(&self) -> String {
        let g = self.ticks.gcd(&self.q);
        let (p, q) = (self.ticks / g, self.q / g);
        if q == 1 {
            format!("{p}")
        } else {
            format!("{p}/{q}")
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.q, other.q, "grid denominators differ");
    }
}

impl PartialOrd for GridRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GridRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.q == other.q {
            self.ticks.cmp(&other.ticks)
        } else {
            (self.ticks as i128 * other.q as i128).cmp(&(other.ticks as i128 * self.q as i128))
        }
    }
}

impl Add for GridRational {
    type Output = GridRational;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        GridRational { ticks: self.ticks + rhs.ticks, q: self.q }
    }
}

impl Sub for GridRational {
    type Output = GridRational;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        GridRational { ticks: self.ticks - rhs.ticks, q: self.q }
    }
}

impl Neg for GridRational {
    type Output = GridRational;
    fn neg(self) -> Self {
        GridRational { ticks: -self.ticks, q: self.q }
    }
}

impl fmt::Display for GridRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ratio_string())
    }
}

/// Serialized form: a `"p/q"` string. Deserialization needs the session grid,
/// so it goes through [`RationalString`] and [`Grid::parse`].
impl Serialize for GridRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_ratio_string())
    }
}

/// A rational string as it appears in config files, not yet placed on a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalString(pub String);

impl RationalString {
    pub fn resolve(&self, grid: Grid) -> Result<GridRational> {
        grid.parse(&self.0)
    }
}

impl From<GridRational> for RationalString {
    fn from(g: GridRational) -> Self {
        RationalString(g.to_ratio_string())
    }
}

impl FromStr for RationalString {
    type Err = DilationError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(RationalString(s.to_string()))
    }
}

impl Serialize for RationalString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RationalString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Str(s) => RationalString(s),
            Raw::Int(i) => RationalString(i.to_string()),
        })
    }
}
