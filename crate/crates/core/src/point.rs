use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("non-finite coordinate {value} at index {index}")]
pub struct NonFiniteCoordinate {
    pub index: usize,
    pub value: f64,
}

fn check_finite(v: [f64; 4]) -> Result<[f64; 4], NonFiniteCoordinate> {
    match v.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(NonFiniteCoordinate {
            index,
            value: v[index],
        }),
        None => Ok(v),
    }
}

/// A point `(x, y, z, t)` with finite coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Point4([f64; 4]);

impl Point4 {
    pub const ORIGIN: Self = Self([0.0; 4]);

    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Result<Self, NonFiniteCoordinate> {
        Self::from_array([x, y, z, t])
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self, NonFiniteCoordinate> {
        check_finite(v).map(Self)
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn t(&self) -> f64 {
        self.0[3]
    }

    pub fn coords(&self) -> [f64; 4] {
        self.0
    }

    /// Displacement `other - self`.
    pub fn displacement_to(&self, other: &Point4) -> Result<Displacement4, NonFiniteCoordinate> {
        Displacement4::from_array(std::array::from_fn(|k| other.0[k] - self.0[k]))
    }

    pub fn midpoint(&self, other: &Point4) -> Result<Point4, NonFiniteCoordinate> {
        Point4::from_array(std::array::from_fn(|k| 0.5 * (self.0[k] + other.0[k])))
    }

    /// `self + s (other - self)`.
    pub fn lerp(&self, other: &Point4, s: f64) -> Result<Point4, NonFiniteCoordinate> {
        Point4::from_array(std::array::from_fn(|k| {
            self.0[k] + s * (other.0[k] - self.0[k])
        }))
    }
}

impl TryFrom<[f64; 4]> for Point4 {
    type Error = NonFiniteCoordinate;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Self::from_array(v)
    }
}

impl From<Point4> for [f64; 4] {
    fn from(p: Point4) -> Self {
        p.0
    }
}

impl fmt::Display for Point4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z, t] = self.0;
        write!(f, "({x}, {y}, {z}, {t})")
    }
}

/// A displacement `(dx, dy, dz, dt)` with finite components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Displacement4([f64; 4]);

impl Displacement4 {
    pub fn new(dx: f64, dy: f64, dz: f64, dt: f64) -> Result<Self, NonFiniteCoordinate> {
        Self::from_array([dx, dy, dz, dt])
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self, NonFiniteCoordinate> {
        check_finite(v).map(Self)
    }

    pub fn dx(&self) -> f64 {
        self.0[0]
    }

    pub fn dy(&self) -> f64 {
        self.0[1]
    }

    pub fn dz(&self) -> f64 {
        self.0[2]
    }

    pub fn dt(&self) -> f64 {
        self.0[3]
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Result<Self, NonFiniteCoordinate> {
        Self::from_array(self.0.map(|c| c * s))
    }
}

impl TryFrom<[f64; 4]> for Displacement4 {
    type Error = NonFiniteCoordinate;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Self::from_array(v)
    }
}

impl From<Displacement4> for [f64; 4] {
    fn from(d: Displacement4) -> Self {
        d.0
    }
}
