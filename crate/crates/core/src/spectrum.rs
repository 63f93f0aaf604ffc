//! Exact half-integer quantum numbers and bounded eigenvalue ladders.
//!
//! Every eigenvalue in the protocol (`q`, `p`, `Q`, `P` and the bounds `a`,
//! `b`) is a multiple of one half, so values are carried as doubled integers
//! and never pass through floating point for indexing.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A quantum number stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    /// Build from the doubled representation, so `from_doubled(3)` is 3/2.
    pub const fn from_doubled(doubled: i64) -> Self {
        HalfInt(doubled)
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt(2 * value)
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// True when `self - other` is a whole number.
    pub const fn same_parity(self, other: HalfInt) -> bool {
        (self.0 - other.0) % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = if self.is_integer() {
            (self.0 / 2).to_string()
        } else {
            format!("{}/2", self.0)
        };
        f.pad(&text)
    }
}

/// A unit-step run of eigenvalues `low, low+1, …, low+len-1`.
///
/// Every tensor factor of a [`PureState`](crate::qstate::PureState) is labelled
/// by a ladder. Symmetric ladders come from [`Spectrum`]; the only asymmetric
/// ones are the measurement hosts built by the teleport engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    low: HalfInt,
    len: usize,
}

impl Ladder {
    pub fn new(low: HalfInt, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidSpectrum("ladder must have at least one value".into()));
        }
        Ok(Ladder { low, len })
    }

    pub fn low(&self) -> HalfInt {
        self.low
    }

    pub fn high(&self) -> HalfInt {
        self.low + HalfInt::from_int(self.len as i64 - 1)
    }

    pub fn dimension(&self) -> usize {
        self.len
    }

    pub fn value_at(&self, index: usize) -> HalfInt {
        debug_assert!(index < self.len);
        self.low + HalfInt::from_int(index as i64)
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = HalfInt> + '_ {
        (0..self.len).map(move |i| self.value_at(i))
    }

    pub fn index_of(&self, v: HalfInt) -> Option<usize> {
        let offset = v.doubled() - self.low.doubled();
        if offset < 0 || offset % 2 != 0 {
            return None;
        }
        let index = (offset / 2) as usize;
        (index < self.len).then_some(index)
    }

    pub fn contains(&self, v: HalfInt) -> bool {
        self.index_of(v).is_some()
    }

    /// Every value of `other` is also a value of `self`.
    pub fn covers(&self, other: &Ladder) -> bool {
        self.contains(other.low) && self.contains(other.high())
    }

    /// The half-width if the ladder is symmetric about zero.
    pub fn symmetric_half_width(&self) -> Option<HalfInt> {
        let high = self.high();
        (high == -self.low).then_some(high)
    }
}

impl From<Spectrum> for Ladder {
    fn from(s: Spectrum) -> Ladder {
        s.ladder()
    }
}

/// The symmetric ladder `{-x, …, x}` with `2x + 1` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr", into = "SpectrumRepr")]
pub struct Spectrum {
    half_width: HalfInt,
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    q2x: i64,
}

impl TryFrom<SpectrumRepr> for Spectrum {
    type Error = Error;
    fn try_from(r: SpectrumRepr) -> Result<Spectrum> {
        Spectrum::from_doubled(r.q2x)
    }
}

impl From<Spectrum> for SpectrumRepr {
    fn from(s: Spectrum) -> SpectrumRepr {
        SpectrumRepr {
            q2x: s.half_width.doubled(),
        }
    }
}

impl Spectrum {
    pub fn new(half_width: HalfInt) -> Result<Self> {
        if half_width.is_negative() {
            return Err(Error::InvalidSpectrum(format!(
                "half-width must be nonnegative, got {half_width}"
            )));
        }
        Ok(Spectrum { half_width })
    }

    /// `Spectrum::from_doubled(1)` is the qubit ladder `{-1/2, 1/2}`.
    pub fn from_doubled(doubled: i64) -> Result<Self> {
        Spectrum::new(HalfInt::from_doubled(doubled))
    }

    pub fn half_width(&self) -> HalfInt {
        self.half_width
    }

    pub fn dimension(&self) -> usize {
        self.half_width.doubled() as usize + 1
    }

    pub fn ladder(&self) -> Ladder {
        Ladder {
            low: -self.half_width,
            len: self.dimension(),
        }
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = HalfInt> {
        let low = -self.half_width;
        (0..self.dimension()).map(move |i| low + HalfInt::from_int(i as i64))
    }

    pub fn index_of(&self, v: HalfInt) -> Option<usize> {
        self.ladder().index_of(v)
    }

    pub fn contains(&self, v: HalfInt) -> bool {
        self.index_of(v).is_some()
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "±{}", self.half_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(doubled: i64) -> HalfInt {
        HalfInt::from_doubled(doubled)
    }

    #[test]
    fn index_of_examples() {
        assert_eq!(Spectrum::from_doubled(2).unwrap().index_of(h(-2)), Some(0));
        assert_eq!(Spectrum::from_doubled(1).unwrap().index_of(h(1)), Some(1));
        assert_eq!(Spectrum::from_doubled(1).unwrap().index_of(h(0)), None);
        assert_eq!(Spectrum::from_doubled(2).unwrap().index_of(h(4)), None);
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(Spectrum::from_doubled(1).unwrap().dimension(), 2);
        assert_eq!(Spectrum::from_doubled(0).unwrap().dimension(), 1);
        assert_eq!(Spectrum::from_doubled(7).unwrap().dimension(), 8);
    }

    #[test]
    fn negative_half_width_rejected() {
        assert!(Spectrum::from_doubled(-1).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(h(3).to_string(), "3/2");
        assert_eq!(h(-4).to_string(), "-2");
        assert_eq!(Spectrum::from_doubled(1).unwrap().to_string(), "±1/2");
    }

    #[test]
    fn serde_uses_doubled_integers() {
        let s = Spectrum::from_doubled(3).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"q2x":3}"#);
        assert_eq!(serde_json::to_string(&h(-5)).unwrap(), "-5");
        let back: Spectrum = serde_json::from_str(r#"{"q2x":3}"#).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Spectrum>(r#"{"q2x":-2}"#).is_err());
    }

    #[test]
    fn asymmetric_ladder() {
        let l = Ladder::new(h(-1), 3).unwrap();
        assert_eq!(l.values().collect::<Vec<_>>(), vec![h(-1), h(1), h(3)]);
        assert_eq!(l.symmetric_half_width(), None);
        assert!(l.covers(&Spectrum::from_doubled(1).unwrap().ladder()));
        assert!(!l.covers(&Spectrum::from_doubled(3).unwrap().ladder()));
        assert!(Ladder::new(h(0), 0).is_err());
    }

    #[test]
    fn dimension_matches_value_count() {
        for d in 0..=40 {
            let s = Spectrum::from_doubled(d).unwrap();
            assert_eq!(s.values().len(), s.dimension());
            assert_eq!(s.ladder().symmetric_half_width(), Some(s.half_width()));
        }
    }

    proptest! {
        #[test]
        fn index_round_trips(d in 0i64..=40) {
            let s = Spectrum::from_doubled(d).unwrap();
            for (i, v) in s.values().enumerate() {
                prop_assert_eq!(s.index_of(v), Some(i));
                prop_assert_eq!(s.ladder().value_at(i), v);
            }
        }

        #[test]
        fn arithmetic_is_exact(x in -1000i64..1000, y in -1000i64..1000) {
            prop_assert_eq!((h(x) + h(y)).doubled(), x + y);
            prop_assert_eq!((h(x) - h(y)).doubled(), x - y);
            prop_assert_eq!(h(x) < h(y), h(x).value() < h(y).value());
        }
    }
}
