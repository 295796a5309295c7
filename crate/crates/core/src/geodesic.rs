//! Curve lengths and point-to-point geodesics on polylines.
//!
//! Lengths use the midpoint rule: each segment contributes
//! `sqrt(ds²(midpoint, Δ))` where `Δ` is the finite endpoint difference.
//! Geodesics are found by gradient descent on the real length of a polyline
//! whose endpoints stay fixed, with central-difference gradients and a
//! backtracking step size.

use std::io::{Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, AlphaNumber};
use crate::metric::{
    classify, default_samples, eval_ds2_grouped, riemannian_ds2, MetricError, MetricTensor,
    DEFAULT_CLASSIFY_TOL,
};
use crate::point::{Displacement4, NonFiniteCoordinate, Point4};

/// Consecutive points closer than this (max-norm) count as coincident.
pub const MIN_SEGMENT_SEPARATION: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("negative squared length {ds2:e} on segment {segment}")]
    NegativeSquaredLength { segment: usize, ds2: f64 },
    #[error("metric is not Riemannian; offending components: {}", fmt_components(.offending))]
    NotRiemannian { offending: Vec<(usize, usize)> },
    #[error("a polyline needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("consecutive points at index {0} coincide")]
    CoincidentPoints(usize),
    #[error("segment count must be at least 1")]
    NoSegments,
    #[error(transparent)]
    NonFinite(#[from] NonFiniteCoordinate),
    #[error("path csv: {0}")]
    Csv(String),
}

impl From<AlgebraError> for GeodesicError {
    fn from(e: AlgebraError) -> Self {
        GeodesicError::Metric(e.into())
    }
}

pub(crate) fn fmt_components(list: &[(usize, usize)]) -> String {
    list.iter()
        .map(|(r, c)| format!("g{r}{c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// An ordered list of at least two points.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polyline4 {
    points: Vec<Point4>,
}

impl Polyline4 {
    /// Validates length and that consecutive points are distinct, unless
    /// every point is the same (a zero-length request).
    pub fn new(points: Vec<Point4>) -> Result<Self, GeodesicError> {
        if points.len() < 2 {
            return Err(GeodesicError::TooFewPoints(points.len()));
        }
        let first = points[0];
        if points.iter().all(|p| *p == first) {
            return Ok(Self { points });
        }
        for (k, w) in points.windows(2).enumerate() {
            if separation(&w[0], &w[1]) <= MIN_SEGMENT_SEPARATION {
                return Err(GeodesicError::CoincidentPoints(k));
            }
        }
        Ok(Self { points })
    }

    /// `segments + 1` equally spaced points on the coordinate chord.
    pub fn straight(start: Point4, end: Point4, segments: usize) -> Result<Self, GeodesicError> {
        if segments == 0 {
            return Err(GeodesicError::NoSegments);
        }
        let mut points = Vec::with_capacity(segments + 1);
        points.push(start);
        for k in 1..segments {
            points.push(start.lerp(&end, k as f64 / segments as f64)?);
        }
        points.push(end);
        Self::new(points)
    }

    pub fn points(&self) -> &[Point4] {
        &self.points
    }

    pub fn start(&self) -> Point4 {
        self.points[0]
    }

    pub fn end(&self) -> Point4 {
        self.points[self.points.len() - 1]
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    /// Midpoint and displacement of every segment.
    fn segment_geometry(&self) -> Result<Vec<(Point4, Displacement4)>, GeodesicError> {
        self.points
            .windows(2)
            .map(|w| Ok((w[0].midpoint(&w[1])?, w[0].displacement_to(&w[1])?)))
            .collect()
    }
}

fn separation(a: &Point4, b: &Point4) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthMode {
    Riemannian,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveLength {
    Real(f64),
    Alpha(AlphaNumber),
}

/// Squared lengths in `[-tol, 0)` are treated as zero.
pub const DEFAULT_DS2_TOL: f64 = 1e-12;

pub fn curve_length(
    g: &MetricTensor,
    path: &Polyline4,
    mode: LengthMode,
) -> Result<CurveLength, GeodesicError> {
    match mode {
        LengthMode::Riemannian => {
            riemannian_length(g, path, DEFAULT_DS2_TOL).map(CurveLength::Real)
        }
        LengthMode::Alpha => alpha_length(g, path).map(CurveLength::Alpha),
    }
}

fn segment_length(
    g: &MetricTensor,
    a: &[f64; 4],
    b: &[f64; 4],
    index: usize,
    ds2_tol: f64,
) -> Result<f64, GeodesicError> {
    let mid = Point4::from_array(std::array::from_fn(|k| 0.5 * (a[k] + b[k])))?;
    let delta = Displacement4::from_array(std::array::from_fn(|k| b[k] - a[k]))?;
    let ds2 = riemannian_ds2(g, &mid, &delta)?;
    if ds2 < -ds2_tol {
        return Err(GeodesicError::NegativeSquaredLength {
            segment: index,
            ds2,
        });
    }
    Ok(ds2.max(0.0).sqrt())
}

/// Sum of `sqrt(riemannian ds²)` over segments.
pub fn riemannian_length(
    g: &MetricTensor,
    path: &Polyline4,
    ds2_tol: f64,
) -> Result<f64, GeodesicError> {
    let coords: Vec<[f64; 4]> = path.points.iter().map(Point4::coords).collect();
    total_length(g, &coords, ds2_tol)
}

fn total_length(g: &MetricTensor, coords: &[[f64; 4]], ds2_tol: f64) -> Result<f64, GeodesicError> {
    coords
        .windows(2)
        .enumerate()
        .map(|(k, w)| segment_length(g, &w[0], &w[1], k, ds2_tol))
        .sum()
}

/// Sum over segments of the Alpha square root of the grouped line element.
pub fn alpha_length(g: &MetricTensor, path: &Polyline4) -> Result<AlphaNumber, GeodesicError> {
    let mut total = AlphaNumber::ZERO;
    for (mid, delta) in path.segment_geometry()? {
        let ds2 = eval_ds2_grouped(g, &mid, &delta)?;
        total = total.checked_add(ds2.sqrt())?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Central-difference step.
    pub fd_step: f64,
    pub learning_rate: f64,
    /// Step-size multiplier applied after a rejected step.
    pub backtrack: f64,
    /// Converged once an accepted step lowers the length by less than this
    /// fraction.
    pub rel_tol: f64,
    pub ds2_tol: f64,
    pub classify_tol: f64,
    /// Points used to classify the metric; `None` uses the default grid.
    pub samples: Option<Vec<Point4>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            fd_step: 1e-5,
            learning_rate: 0.1,
            backtrack: 0.5,
            rel_tol: 1e-10,
            ds2_tol: DEFAULT_DS2_TOL,
            classify_tol: DEFAULT_CLASSIFY_TOL,
            samples: None,
        }
    }
}

/// Smallest step size tried before a line search gives up.
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicResult {
    pub real_length: f64,
    /// Alpha-valued length of the same path; reported, never optimised.
    pub length: AlphaNumber,
    pub iterations: usize,
    pub converged: bool,
    pub path: Polyline4,
}

/// Minimises the Riemannian length of a polyline from `start` to `end`.
///
/// A run that hits `max_iterations` still returns `Ok` with
/// `converged == false`.
pub fn find_geodesic(
    g: &MetricTensor,
    start: Point4,
    end: Point4,
    segments: usize,
    opts: &SolverOptions,
) -> Result<GeodesicResult, GeodesicError> {
    if segments == 0 {
        return Err(GeodesicError::NoSegments);
    }
    let samples = opts.samples.clone().unwrap_or_else(default_samples);
    let class = classify(g, &samples, opts.classify_tol)?;
    if !class.kind.is_riemannian() {
        return Err(GeodesicError::NotRiemannian {
            offending: class.offending,
        });
    }

    if start == end {
        let path = Polyline4::new(vec![start; segments + 1])?;
        return Ok(GeodesicResult {
            real_length: 0.0,
            length: AlphaNumber::ZERO,
            iterations: 0,
            converged: true,
            path,
        });
    }

    let initial = Polyline4::straight(start, end, segments)?;
    let mut coords: Vec<[f64; 4]> = initial.points.iter().map(Point4::coords).collect();
    let mut length = total_length(g, &coords, opts.ds2_tol)?;
    let mut step = opts.learning_rate;
    let mut iterations = 0;
    let mut converged = segments < 2;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let grad = gradient(g, &coords, opts)?;
        if grad.iter().flatten().all(|&v| v == 0.0) {
            converged = true;
            break;
        }

        // Backtracking line search from twice the last accepted step.
        step = (2.0 * step).min(opts.learning_rate);
        let accepted = loop {
            let trial: Vec<[f64; 4]> = coords
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    if k == 0 || k == coords.len() - 1 {
                        *p
                    } else {
                        std::array::from_fn(|j| p[j] - step * grad[k][j])
                    }
                })
                .collect();
            // A trial that leaves the metric's domain is treated as too long.
            if let Ok(trial_len) = total_length(g, &trial, opts.ds2_tol) {
                if trial_len < length {
                    break Some((trial, trial_len));
                }
            }
            step *= opts.backtrack;
            if step < MIN_STEP {
                break None;
            }
        };

        match accepted {
            Some((trial, trial_len)) => {
                let decrease = (length - trial_len) / length;
                coords = trial;
                length = trial_len;
                if decrease < opts.rel_tol {
                    converged = true;
                }
            }
            None => converged = true,
        }
    }

    let points = coords
        .into_iter()
        .map(Point4::from_array)
        .collect::<Result<Vec<_>, _>>()?;
    let path = Polyline4 { points };
    let alpha = alpha_length(g, &path)?;
    Ok(GeodesicResult {
        real_length: length,
        length: alpha,
        iterations,
        converged,
        path,
    })
}

/// Central-difference gradient of the total length with respect to every
/// interior point. Only the two segments adjacent to a point depend on it.
fn gradient(
    g: &MetricTensor,
    coords: &[[f64; 4]],
    opts: &SolverOptions,
) -> Result<Vec<[f64; 4]>, GeodesicError> {
    let h = opts.fd_step;
    let n = coords.len();
    let mut grad = vec![[0.0; 4]; n];
    for k in 1..n - 1 {
        let (prev, next) = (coords[k - 1], coords[k + 1]);
        let local = |p: &[f64; 4]| -> Result<f64, GeodesicError> {
            Ok(segment_length(g, &prev, p, k - 1, opts.ds2_tol)?
                + segment_length(g, p, &next, k, opts.ds2_tol)?)
        };
        for j in 0..4 {
            let mut plus = coords[k];
            let mut minus = coords[k];
            plus[j] += h;
            minus[j] -= h;
            grad[k][j] = (local(&plus)? - local(&minus)?) / (2.0 * h);
        }
    }
    Ok(grad)
}

/// Writes one `x,y,z,t` row per point after a header row.
pub fn write_path_csv<W: Write>(path: &Polyline4, out: W) -> Result<(), GeodesicError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| GeodesicError::Csv(e.to_string());
    w.write_record(["x", "y", "z", "t"]).map_err(err)?;
    for p in &path.points {
        w.write_record(p.coords().map(|v| v.to_string()))
            .map_err(err)?;
    }
    w.flush().map_err(|e| GeodesicError::Csv(e.to_string()))
}

/// Reads a path written by [`write_path_csv`]. The header row is optional
/// and rows may omit trailing coordinates, which default to 0.
pub fn read_path_csv<R: Read>(input: R) -> Result<Polyline4, GeodesicError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut points = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| GeodesicError::Csv(e.to_string()))?;
        if k == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            let header: Vec<&str> = rec.iter().collect();
            if header.len() <= 4
                && header
                    .iter()
                    .zip(["x", "y", "z", "t"])
                    .all(|(h, w)| *h == w)
            {
                continue;
            }
        }
        if rec.is_empty() || rec.len() > 4 {
            return Err(GeodesicError::Csv(format!(
                "row {}: expected 1 to 4 columns, got {}",
                k + 1,
                rec.len()
            )));
        }
        let mut v = [0.0; 4];
        for (j, field) in rec.iter().enumerate() {
            v[j] = field.parse().map_err(|_| {
                GeodesicError::Csv(format!("row {}: `{field}` is not a number", k + 1))
            })?;
        }
        points.push(Point4::from_array(v)?);
    }
    Polyline4::new(points)
}
