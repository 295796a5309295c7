//! Alpha numbers `a + b i + c μ + d iμ` with `i² = -1`, `μ² = μ`.
//!
//! The algebra is commutative and associative. Because `μ` is idempotent it
//! splits into two copies of the complex numbers: substituting `μ → 1` gives
//! the projection `p1 = (a + c) + (b + d) i` and substituting `μ → 0` gives
//! `p2 = a + b i`. Multiplication, inversion and square roots are all
//! checked against (or computed through) that decomposition.
//!
//! `μ` and `1 - μ` are zero divisors (`μ · (1 - μ) = 0`), so inversion is
//! partial.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Projection magnitude at or below which an element is treated as singular.
pub const DEFAULT_SINGULARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("non-finite component in {op}")]
    Overflow { op: &'static str },
    #[error(
        "zero divisor: projection magnitudes |p1| = {p1_norm:e}, |p2| = {p2_norm:e} (tolerance {tol:e})"
    )]
    ZeroDivisor {
        p1_norm: f64,
        p2_norm: f64,
        tol: f64,
    },
}

/// An element of the Alpha algebra over the basis `(1, i, μ, iμ)`.
///
/// Components are always finite; every constructor and arithmetic operation
/// rejects NaN and infinities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawAlpha")]
pub struct AlphaNumber {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Deserialize)]
struct RawAlpha {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<RawAlpha> for AlphaNumber {
    type Error = AlgebraError;

    fn try_from(raw: RawAlpha) -> Result<Self, Self::Error> {
        AlphaNumber::new(raw.a, raw.b, raw.c, raw.d)
    }
}

impl AlphaNumber {
    pub const ZERO: Self = Self::from_parts(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::from_parts(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::from_parts(0.0, 1.0, 0.0, 0.0);
    pub const MU: Self = Self::from_parts(0.0, 0.0, 1.0, 0.0);
    pub const I_MU: Self = Self::from_parts(0.0, 0.0, 0.0, 1.0);

    const fn from_parts(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, AlgebraError> {
        Self::checked("new", a, b, c, d)
    }

    fn checked(op: &'static str, a: f64, b: f64, c: f64, d: f64) -> Result<Self, AlgebraError> {
        if a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() {
            Ok(Self { a, b, c, d })
        } else {
            Err(AlgebraError::Overflow { op })
        }
    }

    /// A purely real Alpha number.
    pub fn real(a: f64) -> Result<Self, AlgebraError> {
        Self::new(a, 0.0, 0.0, 0.0)
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self, AlgebraError> {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, AlgebraError> {
        Self::checked(
            "add",
            self.a + rhs.a,
            self.b + rhs.b,
            self.c + rhs.c,
            self.d + rhs.d,
        )
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, AlgebraError> {
        Self::checked(
            "sub",
            self.a - rhs.a,
            self.b - rhs.b,
            self.c - rhs.c,
            self.d - rhs.d,
        )
    }

    /// Product under `i² = -1`, `μ² = μ`, `(iμ)² = -μ`.
    pub fn checked_mul(self, rhs: Self) -> Result<Self, AlgebraError> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (e, f, g, h) = (rhs.a, rhs.b, rhs.c, rhs.d);
        Self::checked(
            "mul",
            a * e - b * f,
            a * f + b * e,
            a * g + c * e + c * g - b * h - d * f - d * h,
            a * h + b * g + c * f + c * h + d * e + d * g,
        )
    }

    pub fn checked_scale(self, s: f64) -> Result<Self, AlgebraError> {
        Self::checked("scale", self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn neg(self) -> Self {
        Self::from_parts(-self.a, -self.b, -self.c, -self.d)
    }

    /// Idempotent decomposition into the `μ → 1` and `μ → 0` projections.
    pub fn split(self) -> ComplexPair {
        ComplexPair {
            p1: Complex64::new(self.a + self.c, self.b + self.d),
            p2: Complex64::new(self.a, self.b),
        }
    }

    pub fn invert(self) -> Result<Self, AlgebraError> {
        self.invert_with_tol(DEFAULT_SINGULARITY_TOL)
    }

    /// Inverse computed projection-wise. Fails when either projection has
    /// magnitude `<= tol`.
    pub fn invert_with_tol(self, tol: f64) -> Result<Self, AlgebraError> {
        let pair = self.split();
        let (n1, n2) = (pair.p1.norm(), pair.p2.norm());
        if !(n1 > tol && n2 > tol) {
            return Err(AlgebraError::ZeroDivisor {
                p1_norm: n1,
                p2_norm: n2,
                tol,
            });
        }
        ComplexPair {
            p1: pair.p1.inv(),
            p2: pair.p2.inv(),
        }
        .try_reconstruct("invert")
    }

    /// Principal square root, taken on each projection separately.
    pub fn sqrt(self) -> Self {
        let pair = self.split();
        // |sqrt(p)| = sqrt(|p|), so the result is always finite.
        ComplexPair {
            p1: pair.p1.sqrt(),
            p2: pair.p2.sqrt(),
        }
        .reconstruct()
    }

    /// Value with every basis element replaced by 1.
    pub fn collapse(self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Neg for AlphaNumber {
    type Output = Self;

    fn neg(self) -> Self {
        AlphaNumber::neg(self)
    }
}

impl fmt::Display for AlphaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a)?;
        for (v, unit) in [(self.b, "i"), (self.c, "mu"), (self.d, "i*mu")] {
            if v < 0.0 {
                write!(f, " - {}*{unit}", -v)?;
            } else {
                write!(f, " + {v}*{unit}")?;
            }
        }
        Ok(())
    }
}

/// The two complex projections of an Alpha number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPair {
    /// Projection at `μ → 1`.
    pub p1: Complex64,
    /// Projection at `μ → 0`.
    pub p2: Complex64,
}

impl ComplexPair {
    pub fn new(p1: Complex64, p2: Complex64) -> Self {
        Self { p1, p2 }
    }

    /// Inverse of [`AlphaNumber::split`].
    ///
    /// # Panics
    ///
    /// Panics if the pair has non-finite parts or the component differences
    /// overflow; use [`ComplexPair::try_reconstruct`] for untrusted input.
    pub fn reconstruct(self) -> AlphaNumber {
        self.try_reconstruct("reconstruct")
            .expect("complex pair must have finite parts")
    }

    pub fn try_reconstruct(self, op: &'static str) -> Result<AlphaNumber, AlgebraError> {
        AlphaNumber::checked(
            op,
            self.p2.re,
            self.p2.im,
            self.p1.re - self.p2.re,
            self.p1.im - self.p2.im,
        )
    }

    pub fn mul(self, rhs: Self) -> Self {
        Self {
            p1: self.p1 * rhs.p1,
            p2: self.p2 * rhs.p2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn an(a: f64, b: f64, c: f64, d: f64) -> AlphaNumber {
        AlphaNumber::new(a, b, c, d).unwrap()
    }

    #[test]
    fn add_examples() {
        let x = an(1.0, 2.0, 3.0, 4.0);
        assert_eq!(x.checked_add(AlphaNumber::ZERO).unwrap(), x);
        assert_eq!(
            an(1.0, 0.0, 1.0, 0.0)
                .checked_add(an(-1.0, 0.0, -1.0, 0.0))
                .unwrap(),
            AlphaNumber::ZERO
        );
        assert_eq!(
            x.checked_add(an(5.0, 6.0, 7.0, 8.0)).unwrap(),
            an(6.0, 8.0, 10.0, 12.0)
        );
    }

    #[test]
    fn add_overflow_is_an_error() {
        let big = an(f64::MAX, 0.0, 0.0, 0.0);
        assert!(matches!(
            big.checked_add(big),
            Err(AlgebraError::Overflow { op: "add" })
        ));
        assert!(AlphaNumber::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(AlphaNumber::new(0.0, 0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn basis_products() {
        use AlphaNumber as A;
        assert_eq!(A::I.checked_mul(A::I).unwrap(), an(-1.0, 0.0, 0.0, 0.0));
        assert_eq!(A::MU.checked_mul(A::MU).unwrap(), A::MU);
        assert_eq!(
            A::I_MU.checked_mul(A::I_MU).unwrap(),
            an(0.0, 0.0, -1.0, 0.0)
        );
        assert_eq!(A::I.checked_mul(A::MU).unwrap(), A::I_MU);
        assert_eq!(A::MU.checked_mul(A::I_MU).unwrap(), A::I_MU);
        assert_eq!(A::I.checked_mul(A::I_MU).unwrap(), an(0.0, 0.0, -1.0, 0.0));
    }

    #[test]
    fn basis_products_agree_with_projections() {
        let basis = [
            AlphaNumber::ONE,
            AlphaNumber::I,
            AlphaNumber::MU,
            AlphaNumber::I_MU,
        ];
        for x in basis {
            for y in basis {
                let via_pair = x.split().mul(y.split()).reconstruct();
                assert_eq!(x.checked_mul(y).unwrap(), via_pair, "{x} * {y}");
            }
        }
    }

    #[test]
    fn one_plus_mu_times_one_minus_half_mu() {
        let p = an(1.0, 0.0, 1.0, 0.0)
            .checked_mul(an(1.0, 0.0, -0.5, 0.0))
            .unwrap();
        assert_eq!(p, AlphaNumber::ONE);
        let oracle = an(1.0, 0.0, 1.0, 0.0)
            .split()
            .mul(an(1.0, 0.0, -0.5, 0.0).split())
            .reconstruct();
        assert_eq!(oracle, AlphaNumber::ONE);
    }

    #[test]
    fn mu_and_one_minus_mu_annihilate() {
        let one_minus_mu = an(1.0, 0.0, -1.0, 0.0);
        assert_eq!(
            AlphaNumber::MU.checked_mul(one_minus_mu).unwrap(),
            AlphaNumber::ZERO
        );
    }

    #[test]
    fn split_examples() {
        let s = AlphaNumber::MU.split();
        assert_eq!(s.p1, Complex64::new(1.0, 0.0));
        assert_eq!(s.p2, Complex64::new(0.0, 0.0));
        let s = AlphaNumber::ONE.split();
        assert_eq!(
            (s.p1, s.p2),
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        );
        let s = an(1.0, 2.0, 3.0, 4.0).split();
        assert_eq!(s.p1, Complex64::new(4.0, 6.0));
        assert_eq!(s.p2, Complex64::new(1.0, 2.0));
    }

    #[test]
    fn reconstruct_examples() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(
            ComplexPair::new(c(1.0, 0.0), c(0.0, 0.0)).reconstruct(),
            AlphaNumber::MU
        );
        assert_eq!(
            ComplexPair::new(c(1.0, 0.0), c(1.0, 0.0)).reconstruct(),
            AlphaNumber::ONE
        );
        assert_eq!(
            ComplexPair::new(c(4.0, 6.0), c(1.0, 2.0)).reconstruct(),
            an(1.0, 2.0, 3.0, 4.0)
        );
        assert!(ComplexPair::new(c(f64::NAN, 0.0), c(0.0, 0.0))
            .try_reconstruct("test")
            .is_err());
    }

    #[test]
    fn invert_examples() {
        assert!(matches!(
            AlphaNumber::MU.invert(),
            Err(AlgebraError::ZeroDivisor { .. })
        ));
        assert!(an(1.0, 0.0, -1.0, 0.0).invert().is_err());
        assert!(AlphaNumber::ZERO.invert().is_err());

        let inv = an(1.0, 1.0, 0.0, 0.0).invert().unwrap();
        assert!(inv.approx_eq(&an(0.5, -0.5, 0.0, 0.0), 1e-15));

        let x = an(1.0, 0.0, 1.0, 0.0);
        let inv = x.invert().unwrap();
        assert!(inv.approx_eq(&an(1.0, 0.0, -0.5, 0.0), 1e-15));
        assert!(x
            .checked_mul(inv)
            .unwrap()
            .approx_eq(&AlphaNumber::ONE, 1e-15));
    }

    #[test]
    fn invert_tolerance_is_per_call() {
        let x = an(1e-6, 0.0, 1.0, 0.0);
        assert!(x.invert().is_ok());
        assert!(x.invert_with_tol(1e-5).is_err());
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(an(25.0, 0.0, 0.0, 0.0).sqrt(), an(5.0, 0.0, 0.0, 0.0));
        assert_eq!(AlphaNumber::MU.sqrt(), AlphaNumber::MU);
        assert_eq!(an(-1.0, 0.0, 0.0, 0.0).sqrt(), AlphaNumber::I);
        let r = an(0.0, 0.0, 6.0, 0.0).sqrt();
        assert!(r.approx_eq(&an(0.0, 0.0, 6f64.sqrt(), 0.0), 1e-15));
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(an(1.0, 2.0, 3.0, 4.0).collapse(), 10.0);
        assert_eq!(AlphaNumber::ZERO.collapse(), 0.0);
        assert_eq!(an(1.0, 0.0, -1.0, 0.0).collapse(), 0.0);
    }

    #[test]
    fn display_and_json() {
        let x = an(1.0, -2.5, 3.0, -0.1);
        assert_eq!(x.to_string(), "1 - 2.5*i + 3*mu - 0.1*i*mu");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"a":1.0,"b":-2.5,"c":3.0,"d":-0.1}"#);
        let back: AlphaNumber = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }
}
