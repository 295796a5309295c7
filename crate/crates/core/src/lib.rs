//! Alpha-group hypercomplex arithmetic and its tensorial line element.
//!
//! * [`algebra`]: the four-component Alpha numbers `a + b i + c μ + d iμ`.
//! * [`dsl`]: scalar-field expressions and metric definition files.
//! * [`metric`]: line-element evaluation, classification and reduction.
//! * [`geodesic`]: curve lengths and polyline geodesics.
//! * [`cli`]: the `alphag` command-line front end.

pub mod algebra;
pub mod cli;
pub mod dsl;
pub mod geodesic;
pub mod metric;
pub mod point;
pub mod selftest;

pub use algebra::{AlgebraError, AlphaNumber, ComplexPair};
pub use dsl::{parse_field, parse_metric_file, MetricDefinition, ScalarField};
pub use geodesic::{
    curve_length, find_geodesic, GeodesicResult, LengthMode, Polyline4, SolverOptions,
};
pub use metric::{
    classify, euclidean_ds2, eval_ds2_expanded, eval_ds2_grouped, reduce_to_riemannian,
    riemannian_ds2, MetricClass, MetricKind, MetricTensor,
};
pub use point::{Displacement4, Point4};
