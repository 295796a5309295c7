//! Alpha-valued line elements over a 4×4 metric tensor.
//!
//! Coordinates `(x, y, z, t)` are paired with the basis elements
//! `(1, i, μ, iμ)`. The line element is
//!
//! ```text
//! ds² = Σ_{r,c} g_rc(p) · d_r · d_c · e_r · e_c
//! ```
//!
//! where `e_k` is the basis element attached to coordinate `k`. The grouped
//! form collects the sixteen terms by basis element after `i² = -1` and
//! `μ² = μ` have been applied; both forms are exposed so they can be checked
//! against each other.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlphaNumber};
use crate::dsl::{EvalError, MetricDefinition, ScalarField};
use crate::point::{Displacement4, Point4};

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Components zeroed by the Riemannian reduction (fourth row and column),
/// 1-based.
pub const RIEMANNIAN_ZERO_SET: [(usize, usize); 7] =
    [(1, 4), (2, 4), (3, 4), (4, 1), (4, 2), (4, 3), (4, 4)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("g[{row}][{col}] at {point}: {source}")]
    Eval {
        row: usize,
        col: usize,
        point: Point4,
        source: EvalError,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("classification needs at least one sample point")]
    NoSamples,
}

/// Basis element attached to the coordinate with 0-based index `k`.
pub fn basis(k: usize) -> AlphaNumber {
    [
        AlphaNumber::ONE,
        AlphaNumber::I,
        AlphaNumber::MU,
        AlphaNumber::I_MU,
    ][k]
}

/// A 4×4 grid of scalar fields `g_rc(x, y, z, t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTensor {
    fields: [[ScalarField; 4]; 4],
}

impl From<MetricDefinition> for MetricTensor {
    fn from(def: MetricDefinition) -> Self {
        Self::new(def.into_components())
    }
}

impl MetricTensor {
    pub fn new(fields: [[ScalarField; 4]; 4]) -> Self {
        Self { fields }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Tensor with constant components.
    pub fn constant(values: [[f64; 4]; 4]) -> Self {
        Self::new(values.map(|row| row.map(ScalarField::constant)))
    }

    /// `g11 = g22 = g33 = 1`, everything else zero.
    pub fn euclidean() -> Self {
        let mut v = [[0.0; 4]; 4];
        for (k, row) in v.iter_mut().enumerate().take(3) {
            row[k] = 1.0;
        }
        Self::constant(v)
    }

    /// Component `g[row][col]`, 1-based. Panics outside `1..=4`.
    pub fn component(&self, row: usize, col: usize) -> &ScalarField {
        &self.fields[row - 1][col - 1]
    }

    pub fn set_component(&mut self, row: usize, col: usize, field: ScalarField) {
        self.fields[row - 1][col - 1] = field;
    }

    pub fn fields(&self) -> &[[ScalarField; 4]; 4] {
        &self.fields
    }

    /// Evaluates all sixteen components at `p` (0-based result indices).
    pub fn eval_at(&self, p: &Point4) -> Result<[[f64; 4]; 4], MetricError> {
        let mut out = [[0.0; 4]; 4];
        for (r, row) in self.fields.iter().enumerate() {
            for (c, field) in row.iter().enumerate() {
                out[r][c] = field.eval(p).map_err(|source| MetricError::Eval {
                    row: r + 1,
                    col: c + 1,
                    point: *p,
                    source,
                })?;
            }
        }
        Ok(out)
    }

    /// Evaluates only the upper-left 3×3 block.
    fn eval_spatial(&self, p: &Point4) -> Result<[[f64; 3]; 3], MetricError> {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.fields[r][c]
                    .eval(p)
                    .map_err(|source| MetricError::Eval {
                        row: r + 1,
                        col: c + 1,
                        point: *p,
                        source,
                    })?;
            }
        }
        Ok(out)
    }

    /// Tensor with `g[r][c]` and `g[c][r]` exchanged.
    pub fn transposed(&self) -> Self {
        Self::new(std::array::from_fn(|r| {
            std::array::from_fn(|c| self.fields[c][r].clone())
        }))
    }
}

fn real_product(g: f64, a: f64, b: f64) -> Result<f64, AlgebraError> {
    let v = g * a * b;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(AlgebraError::Overflow { op: "line element" })
    }
}

/// Sums the sixteen terms `g_rc d_r d_c e_r e_c`, with each basis factor
/// computed by Alpha multiplication.
pub fn eval_ds2_expanded(
    g: &MetricTensor,
    p: &Point4,
    d: &Displacement4,
) -> Result<AlphaNumber, MetricError> {
    let vals = g.eval_at(p)?;
    let dv = d.components();
    let mut sum = AlphaNumber::ZERO;
    for r in 0..4 {
        for c in 0..4 {
            let factor = basis(r).checked_mul(basis(c))?;
            let coeff = real_product(vals[r][c], dv[r], dv[c])?;
            sum = sum.checked_add(factor.checked_scale(coeff)?)?;
        }
    }
    Ok(sum)
}

/// The grouped line element: coefficients of `1, i, μ, iμ` collected
/// directly.
pub fn eval_ds2_grouped(
    g: &MetricTensor,
    p: &Point4,
    d: &Displacement4,
) -> Result<AlphaNumber, MetricError> {
    let v = g.eval_at(p)?;
    let g = |r: usize, c: usize| v[r - 1][c - 1];
    let [dx, dy, dz, dt] = d.components();

    let real = g(1, 1) * dx * dx - g(2, 2) * dy * dy;
    let i = (g(1, 2) + g(2, 1)) * dx * dy;
    let mu = g(1, 3) * dx * dz - g(2, 4) * dy * dt + g(3, 1) * dz * dx + g(3, 3) * dz * dz
        - g(4, 2) * dt * dy
        - g(4, 4) * dt * dt;
    let i_mu = g(1, 4) * dt * dx
        + g(2, 3) * dy * dz
        + g(3, 2) * dz * dy
        + g(3, 4) * dz * dt
        + g(4, 1) * dt * dx
        + g(4, 3) * dt * dz;
    Ok(AlphaNumber::new(real, i, mu, i_mu)
        .map_err(|_| AlgebraError::Overflow { op: "line element" })?)
}

/// Real quadratic form over the spatial block `r, c ∈ 1..3`.
pub fn riemannian_ds2(g: &MetricTensor, p: &Point4, d: &Displacement4) -> Result<f64, MetricError> {
    let v = g.eval_spatial(p)?;
    let g = |r: usize, c: usize| v[r - 1][c - 1];
    let [dx, dy, dz, _] = d.components();
    let s = g(1, 1) * dx * dx
        + (g(1, 2) + g(2, 1)) * dx * dy
        + (g(1, 3) + g(3, 1)) * dx * dz
        + g(2, 2) * dy * dy
        + (g(2, 3) + g(3, 2)) * dy * dz
        + g(3, 3) * dz * dz;
    if s.is_finite() {
        Ok(s)
    } else {
        Err(AlgebraError::Overflow {
            op: "riemannian line element",
        }
        .into())
    }
}

/// `dx² + dy² + dz²`; `dt` does not contribute.
pub fn euclidean_ds2(d: &Displacement4) -> f64 {
    let [dx, dy, dz, _] = d.components();
    dx * dx + dy * dy + dz * dz
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "GENERAL_ALPHA")]
    GeneralAlpha,
    #[serde(rename = "RIEMANNIAN_PATTERN")]
    RiemannianPattern,
    #[serde(rename = "EUCLIDEAN_PATTERN")]
    EuclideanPattern,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::GeneralAlpha => "GENERAL_ALPHA",
            MetricKind::RiemannianPattern => "RIEMANNIAN_PATTERN",
            MetricKind::EuclideanPattern => "EUCLIDEAN_PATTERN",
        }
    }

    /// True for the two classes that admit a real Riemannian length.
    pub fn is_riemannian(self) -> bool {
        !matches!(self, MetricKind::GeneralAlpha)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`classify`].
///
/// `offending` lists, 1-based and in row-major order, the components that
/// broke the Riemannian zero pattern (for `GeneralAlpha`) or the unit
/// diagonal pattern (for `RiemannianPattern`). It is empty for
/// `EuclideanPattern`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricClass {
    pub kind: MetricKind,
    pub tol: f64,
    pub offending: Vec<(usize, usize)>,
}

/// The 81 points of the 3⁴ grid over `[-1, 1]⁴`.
pub fn default_samples() -> Vec<Point4> {
    let axis = [-1.0, 0.0, 1.0];
    let mut out = Vec::with_capacity(81);
    for x in axis {
        for y in axis {
            for z in axis {
                for t in axis {
                    out.push(Point4::new(x, y, z, t).expect("finite grid"));
                }
            }
        }
    }
    out
}

pub fn classify(
    g: &MetricTensor,
    samples: &[Point4],
    tol: f64,
) -> Result<MetricClass, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::NoSamples);
    }
    let mut bad_zero = [[false; 4]; 4];
    let mut bad_unit = [[false; 4]; 4];
    for p in samples {
        let v = g.eval_at(p)?;
        for &(r, c) in &RIEMANNIAN_ZERO_SET {
            if v[r - 1][c - 1].abs() > tol {
                bad_zero[r - 1][c - 1] = true;
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { 1.0 } else { 0.0 };
                if (v[r][c] - target).abs() > tol {
                    bad_unit[r][c] = true;
                }
            }
        }
    }
    let collect = |mask: &[[bool; 4]; 4]| -> Vec<(usize, usize)> {
        (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|&(r, c)| mask[r][c])
            .map(|(r, c)| (r + 1, c + 1))
            .collect()
    };
    let zero_violations = collect(&bad_zero);
    let (kind, offending) = if !zero_violations.is_empty() {
        (MetricKind::GeneralAlpha, zero_violations)
    } else {
        let unit_violations = collect(&bad_unit);
        if unit_violations.is_empty() {
            (MetricKind::EuclideanPattern, unit_violations)
        } else {
            (MetricKind::RiemannianPattern, unit_violations)
        }
    };
    Ok(MetricClass {
        kind,
        tol,
        offending,
    })
}

/// Zeroes the fourth row and column and negates `g22`, absorbing the
/// `i² = -1` sign on the `dy²` term.
pub fn reduce_to_riemannian(g: &MetricTensor) -> MetricTensor {
    let mut out = g.clone();
    for &(r, c) in &RIEMANNIAN_ZERO_SET {
        out.set_component(r, c, ScalarField::zero());
    }
    out.set_component(2, 2, g.component(2, 2).negated());
    out
}

/// JSON shape of a single line-element evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ds2Report {
    pub real: f64,
    pub i: f64,
    pub mu: f64,
    pub imu: f64,
    pub class: MetricKind,
}

impl Ds2Report {
    pub fn new(value: AlphaNumber, class: MetricKind) -> Self {
        Self {
            real: value.a(),
            i: value.b(),
            mu: value.c(),
            imu: value.d(),
            class,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_field;

    fn d4(a: f64, b: f64, c: f64, d: f64) -> Displacement4 {
        Displacement4::new(a, b, c, d).unwrap()
    }

    fn an(a: f64, b: f64, c: f64, d: f64) -> AlphaNumber {
        AlphaNumber::new(a, b, c, d).unwrap()
    }

    fn single(r: usize, c: usize, v: f64) -> MetricTensor {
        let mut vals = [[0.0; 4]; 4];
        vals[r - 1][c - 1] = v;
        MetricTensor::constant(vals)
    }

    #[test]
    fn zero_grid_gives_zero() {
        let g = MetricTensor::zero();
        let p = Point4::new(1.0, 2.0, 3.0, 4.0).unwrap();
        let d = d4(0.3, -2.0, 5.0, 1.0);
        assert_eq!(eval_ds2_expanded(&g, &p, &d).unwrap(), AlphaNumber::ZERO);
        assert_eq!(eval_ds2_grouped(&g, &p, &d).unwrap(), AlphaNumber::ZERO);
        assert_eq!(riemannian_ds2(&g, &p, &d).unwrap(), 0.0);
    }

    #[test]
    fn dy_squared_carries_i_squared() {
        let g = MetricTensor::euclidean();
        let d = d4(3.0, 4.0, 0.0, 0.0);
        let want = an(-7.0, 0.0, 0.0, 0.0);
        assert_eq!(eval_ds2_expanded(&g, &Point4::ORIGIN, &d).unwrap(), want);
        assert_eq!(eval_ds2_grouped(&g, &Point4::ORIGIN, &d).unwrap(), want);
    }

    #[test]
    fn all_ones_grid() {
        let g = MetricTensor::constant([[1.0; 4]; 4]);
        let d = d4(1.0, 1.0, 1.0, 1.0);
        let want = an(0.0, 2.0, 0.0, 6.0);
        assert_eq!(eval_ds2_expanded(&g, &Point4::ORIGIN, &d).unwrap(), want);
        assert_eq!(eval_ds2_grouped(&g, &Point4::ORIGIN, &d).unwrap(), want);
    }

    /// Signs of the sixteen basis factors once `i² = -1`, `μ² = μ` have been
    /// applied, written out term by term.
    #[test]
    fn basis_factors_match_simplified_table() {
        use AlphaNumber as A;
        let (one, i, mu, imu) = (A::ONE, A::I, A::MU, A::I_MU);
        let table = [
            [one, i, mu, imu],
            [i, one.neg(), imu, mu.neg()],
            [mu, imu, mu, imu],
            [imu, mu.neg(), imu, mu.neg()],
        ];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(
                    basis(r).checked_mul(basis(c)).unwrap(),
                    table[r][c],
                    "({r},{c})"
                );
            }
        }
    }

    #[test]
    fn grouped_examples() {
        let mut g = single(1, 2, 1.0);
        g.set_component(2, 1, ScalarField::constant(1.0));
        let d = d4(1.0, 1.0, 0.0, 0.0);
        assert_eq!(
            eval_ds2_grouped(&g, &Point4::ORIGIN, &d).unwrap(),
            an(0.0, 2.0, 0.0, 0.0)
        );

        let g = single(1, 3, 1.0);
        let d = d4(2.0, 0.0, 3.0, 0.0);
        assert_eq!(
            eval_ds2_grouped(&g, &Point4::ORIGIN, &d).unwrap(),
            an(0.0, 0.0, 6.0, 0.0)
        );
        assert_eq!(
            eval_ds2_expanded(&g, &Point4::ORIGIN, &d).unwrap(),
            an(0.0, 0.0, 6.0, 0.0)
        );
    }

    #[test]
    fn each_single_component_agrees() {
        let p = Point4::ORIGIN;
        let d = d4(1.5, -2.0, 0.25, 3.0);
        for r in 1..=4 {
            for c in 1..=4 {
                let g = single(r, c, 1.0);
                let e = eval_ds2_expanded(&g, &p, &d).unwrap();
                let gr = eval_ds2_grouped(&g, &p, &d).unwrap();
                assert!(e.approx_eq(&gr, 1e-12), "g{r}{c}: {e} vs {gr}");
            }
        }
    }

    #[test]
    fn riemannian_examples() {
        let g = MetricTensor::euclidean();
        let p = Point4::ORIGIN;
        assert_eq!(
            riemannian_ds2(&g, &p, &d4(3.0, 4.0, 0.0, 9.0)).unwrap(),
            25.0
        );
        let mut g = single(1, 2, 1.0);
        g.set_component(2, 1, ScalarField::constant(1.0));
        assert_eq!(
            riemannian_ds2(&g, &p, &d4(1.0, 1.0, 0.0, 0.0)).unwrap(),
            2.0
        );
        assert_eq!(
            riemannian_ds2(&MetricTensor::zero(), &p, &d4(1.0, 2.0, 3.0, 4.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn riemannian_ignores_fourth_row_even_if_unevaluable() {
        let mut g = MetricTensor::euclidean();
        g.set_component(4, 4, parse_field("1/x").unwrap());
        let d = d4(1.0, 0.0, 0.0, 0.0);
        assert_eq!(riemannian_ds2(&g, &Point4::ORIGIN, &d).unwrap(), 1.0);
        let err = eval_ds2_expanded(&g, &Point4::ORIGIN, &d).unwrap_err();
        assert!(matches!(err, MetricError::Eval { row: 4, col: 4, .. }));
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_ds2(&d4(3.0, 4.0, 0.0, 0.0)), 25.0);
        assert_eq!(euclidean_ds2(&d4(0.0, 0.0, 0.0, 7.0)), 0.0);
        assert_eq!(euclidean_ds2(&d4(1.0, 1.0, 1.0, 0.0)), 3.0);
    }

    #[test]
    fn classify_examples() {
        let s = default_samples();
        assert_eq!(s.len(), 81);
        let c = classify(&MetricTensor::euclidean(), &s, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(c.kind, MetricKind::EuclideanPattern);
        assert!(c.offending.is_empty());

        let mut g = MetricTensor::euclidean();
        g.set_component(2, 2, ScalarField::constant(2.0));
        g.set_component(3, 3, ScalarField::zero());
        let c = classify(&g, &s, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(c.kind, MetricKind::RiemannianPattern);
        assert_eq!(c.offending, vec![(2, 2), (3, 3)]);

        let mut g = MetricTensor::euclidean();
        g.set_component(4, 4, ScalarField::constant(1.0));
        let c = classify(&g, &s, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(c.kind, MetricKind::GeneralAlpha);
        assert_eq!(c.offending, vec![(4, 4)]);
    }

    #[test]
    fn classify_uses_every_sample() {
        // Vanishes at the origin only.
        let mut g = MetricTensor::euclidean();
        g.set_component(1, 4, parse_field("x*x").unwrap());
        let origin_only = [Point4::ORIGIN];
        assert_eq!(
            classify(&g, &origin_only, 1e-9).unwrap().kind,
            MetricKind::EuclideanPattern
        );
        assert_eq!(
            classify(&g, &default_samples(), 1e-9).unwrap().kind,
            MetricKind::GeneralAlpha
        );
        assert!(matches!(
            classify(&g, &[], 1e-9),
            Err(MetricError::NoSamples)
        ));
    }

    #[test]
    fn classify_tolerance() {
        let mut g = MetricTensor::euclidean();
        g.set_component(1, 1, ScalarField::constant(1.0 + 1e-10));
        assert_eq!(
            classify(&g, &default_samples(), 1e-9).unwrap().kind,
            MetricKind::EuclideanPattern
        );
        assert_eq!(
            classify(&g, &default_samples(), 1e-11).unwrap().kind,
            MetricKind::RiemannianPattern
        );
    }

    #[test]
    fn reduce_examples() {
        let g = MetricTensor::euclidean();
        let red = reduce_to_riemannian(&g);
        assert_eq!(red.component(2, 2).eval(&Point4::ORIGIN).unwrap(), -1.0);
        let d = d4(1.0, 1.0, 1.0, 0.0);
        let p = Point4::ORIGIN;
        assert_eq!(riemannian_ds2(&g, &p, &d).unwrap(), 3.0);
        assert_eq!(eval_ds2_expanded(&red, &p, &d).unwrap().collapse(), 3.0);

        let zero = reduce_to_riemannian(&MetricTensor::zero());
        let vals = zero.eval_at(&p).unwrap();
        assert!(vals.iter().flatten().all(|&v| v == 0.0));

        let red = reduce_to_riemannian(&single(4, 4, 5.0));
        assert_eq!(red.component(4, 4).eval(&p).unwrap(), 0.0);
    }

    #[test]
    fn ds2_report_json() {
        let r = Ds2Report::new(an(-7.0, 0.0, 0.5, 0.0), MetricKind::EuclideanPattern);
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"real":-7.0,"i":0.0,"mu":0.5,"imu":0.0,"class":"EUCLIDEAN_PATTERN"}"#
        );
    }
}
