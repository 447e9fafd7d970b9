//! Triangular membership functions.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FisError;

/// A triangular fuzzy set `(a, b, c)`: zero outside `[a, c]`, one at the apex `b`.
///
/// Shoulders are allowed (`a == b` or `b == c`); the closed apex-side
/// boundary then has membership one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct TriangularMf {
    a: f64,
    b: f64,
    c: f64,
}

impl TriangularMf {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, FisError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || a > b || b > c {
            return Err(FisError::InvalidMf {
                name: String::new(),
                params: [a, b, c],
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn left(&self) -> f64 {
        self.a
    }

    pub fn apex(&self) -> f64 {
        self.b
    }

    pub fn right(&self) -> f64 {
        self.c
    }

    pub fn params(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    /// Degree of membership of `x`, always in `[0, 1]`.
    pub fn membership(&self, x: f64) -> f64 {
        if x == self.b {
            1.0
        } else if x < self.a || x > self.c {
            0.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.c - x) / (self.c - self.b)
        }
    }

    /// Largest slope magnitude over the non-degenerate edges, zero for a spike.
    pub fn max_slope(&self) -> f64 {
        let rise = self.b - self.a;
        let fall = self.c - self.b;
        [rise, fall]
            .into_iter()
            .filter(|w| *w > 0.0)
            .map(|w| 1.0 / w)
            .fold(0.0, f64::max)
    }
}

impl TryFrom<[f64; 3]> for TriangularMf {
    type Error = FisError;

    fn try_from([a, b, c]: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(a, b, c)
    }
}

impl From<TriangularMf> for [f64; 3] {
    fn from(mf: TriangularMf) -> Self {
        mf.params()
    }
}

impl fmt::Display for TriangularMf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.c)
    }
}
