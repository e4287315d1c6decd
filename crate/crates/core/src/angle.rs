// Copyright 2026 The boqc Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! Measurement angles.
//!
//! Pattern angles live on a dyadic grid of π: `p·π/q` with `q` a power of two. Sign flips and
//! π shifts keep them on the grid, so adaptive corrections never accumulate rounding error.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest denominator accepted in pattern files (angles given to 10 bits).
pub const MAX_DENOMINATOR: u32 = 512;

/// The exact angle `num·π/den`, reduced, with `num` in `[0, 2·den)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(i64, u32)", into = "(i64, u32)")]
pub struct PiFraction {
    num: i64,
    den: u32,
}

impl PiFraction {
    pub const ZERO: PiFraction = PiFraction { num: 0, den: 1 };
    pub const PI: PiFraction = PiFraction { num: 1, den: 1 };

    pub fn new(num: i64, den: u32) -> Result<Self> {
        if den == 0 || !den.is_power_of_two() {
            return Err(Error::BadDenominator(den));
        }
        Ok(Self::reduced(num, den))
    }

    /// `k·π/512`, the blinding grid.
    pub fn grid(k: i64) -> Self {
        Self::reduced(k, MAX_DENOMINATOR)
    }

    fn reduced(num: i64, den: u32) -> Self {
        let modulus = 2 * den as i64;
        let mut num = num.rem_euclid(modulus);
        let mut den = den;
        while den > 1 && num % 2 == 0 {
            num /= 2;
            den /= 2;
        }
        PiFraction { num, den }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn radians(&self) -> f64 {
        self.num as f64 * PI / self.den as f64
    }

    pub fn add_pi(self, bit: bool) -> Self {
        if bit {
            self + Self::PI
        } else {
            self
        }
    }

    pub fn flip_sign(self, bit: bool) -> Self {
        if bit {
            -self
        } else {
            self
        }
    }

    /// Position on the `π/512` grid, when representable there.
    pub fn grid_index(&self) -> Option<u32> {
        if self.den <= MAX_DENOMINATOR {
            Some((self.num * (MAX_DENOMINATOR / self.den) as i64) as u32)
        } else {
            None
        }
    }
}

impl TryFrom<(i64, u32)> for PiFraction {
    type Error = Error;
    fn try_from((num, den): (i64, u32)) -> Result<Self> {
        Self::new(num, den)
    }
}

impl From<PiFraction> for (i64, u32) {
    fn from(p: PiFraction) -> Self {
        (p.num, p.den)
    }
}

impl Add for PiFraction {
    type Output = PiFraction;
    fn add(self, rhs: Self) -> Self {
        let den = self.den.max(rhs.den);
        let a = self.num * (den / self.den) as i64;
        let b = rhs.num * (den / rhs.den) as i64;
        Self::reduced(a + b, den)
    }
}

impl Neg for PiFraction {
    type Output = PiFraction;
    fn neg(self) -> Self {
        Self::reduced(-self.num, self.den)
    }
}

impl fmt::Display for PiFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "0"),
            (n, 1) => write!(f, "{n}π"),
            (n, d) => write!(f, "{n}π/{d}"),
        }
    }
}

/// A measurement angle: exact on the dyadic grid, or an arbitrary real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementAngle {
    Exact(PiFraction),
    Real(f64),
}

impl MeasurementAngle {
    pub fn radians(&self) -> f64 {
        match self {
            MeasurementAngle::Exact(p) => p.radians(),
            MeasurementAngle::Real(r) => *r,
        }
    }

    pub fn exact(&self) -> Option<PiFraction> {
        match self {
            MeasurementAngle::Exact(p) => Some(*p),
            MeasurementAngle::Real(_) => None,
        }
    }

    /// `(-1)^sx · φ + sz·π`.
    pub fn corrected(&self, sx: bool, sz: bool) -> Self {
        match self {
            MeasurementAngle::Exact(p) => MeasurementAngle::Exact(p.flip_sign(sx).add_pi(sz)),
            MeasurementAngle::Real(r) => {
                let v = if sx { -r } else { *r };
                MeasurementAngle::Real(if sz { v + PI } else { v })
            }
        }
    }

    pub fn plus(&self, other: &MeasurementAngle) -> Self {
        match (self, other) {
            (MeasurementAngle::Exact(a), MeasurementAngle::Exact(b)) => MeasurementAngle::Exact(*a + *b),
            _ => MeasurementAngle::Real(self.radians() + other.radians()),
        }
    }
}

impl From<PiFraction> for MeasurementAngle {
    fn from(p: PiFraction) -> Self {
        MeasurementAngle::Exact(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduces_and_wraps() {
        let a = PiFraction::new(1030, 512).unwrap();
        assert_eq!((a.num(), a.den()), (3, 256));
        assert_eq!(PiFraction::new(4, 2).unwrap(), PiFraction::ZERO);
        assert_eq!(-PiFraction::new(1, 4).unwrap(), PiFraction::new(7, 4).unwrap());
        assert!(PiFraction::new(1, 3).is_err());
    }

    #[test]
    fn serde_pair_roundtrip() {
        let a = MeasurementAngle::Exact(PiFraction::new(213, 512).unwrap());
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[213,512]");
        let b: MeasurementAngle = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn exact_value_matches(num in -5000i64..5000, k in 0u32..10) {
            let den = 1u32 << k;
            let a = PiFraction::new(num, den).unwrap();
            let direct = (num as f64 * PI / den as f64).rem_euclid(2.0 * PI);
            let diff = (a.radians() - direct).rem_euclid(2.0 * PI);
            prop_assert!(diff < 1e-9 || (2.0 * PI - diff) < 1e-9);
        }

        #[test]
        fn corrections_stay_on_grid(k in 0i64..1024, sx: bool, sz: bool) {
            let a = MeasurementAngle::Exact(PiFraction::grid(k));
            let c = a.corrected(sx, sz);
            let e = c.exact().unwrap();
            prop_assert!(e.grid_index().is_some());
            let mut want = if sx { -a.radians() } else { a.radians() };
            if sz { want += PI; }
            let diff = (c.radians() - want).rem_euclid(2.0 * PI);
            prop_assert!(diff < 1e-12 || (2.0 * PI - diff) < 1e-12);
        }
    }
}
