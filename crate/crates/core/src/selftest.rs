//! Randomised invariant checks shipped with the binary (`alphag selftest`).
//!
//! The multiplication under test is injectable so the failure path can be
//! exercised with a deliberately broken table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraError, AlphaNumber};
use crate::dsl::{parse_field, ScalarField};
use crate::metric::{
    eval_ds2_expanded, eval_ds2_grouped, reduce_to_riemannian, riemannian_ds2, MetricTensor,
};
use crate::point::{Displacement4, Point4};

pub const DEFAULT_SEED: u64 = 0x00A1_FA64;
pub const DEFAULT_CASES: usize = 1000;

/// Absolute tolerance for ring identities and line-element comparisons.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Relative tolerance for the projection homomorphism.
pub const HOMOMORPHISM_REL_TOL: f64 = 1e-12;

pub type MulFn = fn(AlphaNumber, AlphaNumber) -> Result<AlphaNumber, AlgebraError>;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }
}

pub fn run(seed: u64) -> SelftestReport {
    run_with(seed, DEFAULT_CASES, AlphaNumber::checked_mul)
}

pub fn run_with(seed: u64, cases: usize, mul: MulFn) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check("ring-axioms", cases, || ring_axioms(&mut rng, cases, mul)),
        check("projection-homomorphism", cases, || {
            homomorphism(&mut rng, cases, mul)
        }),
        check("expanded-equals-grouped", cases, || {
            expanded_vs_grouped(&mut rng, cases)
        }),
        check("riemannian-reduction", cases, || reduction(&mut rng, cases)),
    ];
    SelftestReport { seed, checks }
}

fn check(name: &'static str, cases: usize, f: impl FnOnce() -> Result<(), String>) -> CheckOutcome {
    CheckOutcome {
        name,
        cases,
        counterexample: f().err(),
    }
}

/// Integer-valued components in `[-1000, 1000]`: every product and sum the
/// axioms need is exact in `f64`, so any discrepancy is a table error.
pub fn random_integer_alpha(rng: &mut impl Rng) -> AlphaNumber {
    let mut c = || rng.random_range(-1000i32..=1000) as f64;
    AlphaNumber::new(c(), c(), c(), c()).expect("finite")
}

pub fn random_alpha(rng: &mut impl Rng, bound: f64) -> AlphaNumber {
    let mut c = || rng.random_range(-bound..=bound);
    AlphaNumber::new(c(), c(), c(), c()).expect("finite")
}

fn fmt_alpha(x: &AlphaNumber) -> String {
    format!("({:?}, {:?}, {:?}, {:?})", x.a(), x.b(), x.c(), x.d())
}

fn ring_axioms(rng: &mut impl Rng, cases: usize, mul: MulFn) -> Result<(), String> {
    let err = |e: AlgebraError| e.to_string();
    for _ in 0..cases {
        let (x, y, z) = (
            random_integer_alpha(rng),
            random_integer_alpha(rng),
            random_integer_alpha(rng),
        );
        let add = |p: AlphaNumber, q| p.checked_add(q);
        let identities = [
            (
                "add associativity",
                add(add(x, y).map_err(err)?, z),
                add(x, add(y, z).map_err(err)?),
            ),
            ("add commutativity", add(x, y), add(y, x)),
            (
                "mul associativity",
                mul(mul(x, y).map_err(err)?, z),
                mul(x, mul(y, z).map_err(err)?),
            ),
            ("mul commutativity", mul(x, y), mul(y, x)),
            (
                "distributivity",
                mul(x, add(y, z).map_err(err)?),
                add(mul(x, y).map_err(err)?, mul(x, z).map_err(err)?),
            ),
            ("additive identity", add(x, AlphaNumber::ZERO), Ok(x)),
            ("multiplicative identity", mul(x, AlphaNumber::ONE), Ok(x)),
            (
                "zero annihilates",
                mul(x, AlphaNumber::ZERO),
                Ok(AlphaNumber::ZERO),
            ),
        ];
        for (law, lhs, rhs) in identities {
            let (lhs, rhs) = (lhs.map_err(err)?, rhs.map_err(err)?);
            if !lhs.approx_eq(&rhs, IDENTITY_TOL) {
                return Err(format!(
                    "{law} fails for x = {}, y = {}, z = {}: {} != {}",
                    fmt_alpha(&x),
                    fmt_alpha(&y),
                    fmt_alpha(&z),
                    fmt_alpha(&lhs),
                    fmt_alpha(&rhs)
                ));
            }
        }
    }
    Ok(())
}

/// Magnitude scale of the bilinear product `x · y`.
pub fn product_scale(x: &AlphaNumber, y: &AlphaNumber) -> f64 {
    let l1 = |v: &AlphaNumber| v.to_array().iter().map(|c| c.abs()).sum::<f64>();
    l1(x) * l1(y)
}

/// Largest projection discrepancy of `split(x·y)` against
/// `split(x)·split(y)`, relative to [`product_scale`].
pub fn homomorphism_error(x: AlphaNumber, y: AlphaNumber, xy: AlphaNumber) -> f64 {
    let lhs = xy.split();
    let rhs = x.split().mul(y.split());
    let abs = (lhs.p1 - rhs.p1).norm().max((lhs.p2 - rhs.p2).norm());
    let scale = product_scale(&x, &y);
    if scale == 0.0 {
        abs
    } else {
        abs / scale
    }
}

fn homomorphism(rng: &mut impl Rng, cases: usize, mul: MulFn) -> Result<(), String> {
    for k in 0..cases {
        // Start with the basis products, then random reals.
        let (x, y) = if k < 16 {
            (crate::metric::basis(k / 4), crate::metric::basis(k % 4))
        } else {
            (random_alpha(rng, 1e3), random_alpha(rng, 1e3))
        };
        let xy = mul(x, y).map_err(|e| e.to_string())?;
        let rel = homomorphism_error(x, y, xy);
        if rel > HOMOMORPHISM_REL_TOL {
            return Err(format!(
                "split(x*y) != split(x)*split(y) for x = {}, y = {} (relative error {rel:e})",
                fmt_alpha(&x),
                fmt_alpha(&y)
            ));
        }
    }
    Ok(())
}

/// A random polynomial of degree at most 2 in `x, y, z, t` with
/// coefficients in `[-1, 1]`, rendered as source text.
pub fn random_polynomial_source(rng: &mut impl Rng) -> String {
    const VARS: [&str; 4] = ["x", "y", "z", "t"];
    fn coeff(rng: &mut impl Rng) -> f64 {
        rng.random_range(-1.0..=1.0)
    }
    let mut terms = vec![format!("{:?}", coeff(rng))];
    for _ in 0..rng.random_range(0..=2usize) {
        let v = VARS[rng.random_range(0..4usize)];
        terms.push(format!("{:?} * {v}", coeff(rng)));
    }
    for _ in 0..rng.random_range(0..=2usize) {
        let v = VARS[rng.random_range(0..4usize)];
        let w = VARS[rng.random_range(0..4usize)];
        if rng.random_bool(0.5) {
            terms.push(format!("{:?} * {v} * {w}", coeff(rng)));
        } else {
            terms.push(format!("{:?} * {v}^2", coeff(rng)));
        }
    }
    terms.join(" + ")
}

pub fn random_polynomial_tensor(rng: &mut impl Rng) -> MetricTensor {
    let mut fields: [[ScalarField; 4]; 4] = Default::default();
    for row in fields.iter_mut() {
        for f in row.iter_mut() {
            *f = parse_field(&random_polynomial_source(rng)).expect("generated source parses");
        }
    }
    MetricTensor::new(fields)
}

pub fn random_point(rng: &mut impl Rng, bound: f64) -> Point4 {
    Point4::from_array(std::array::from_fn(|_| rng.random_range(-bound..=bound))).expect("finite")
}

pub fn random_displacement(rng: &mut impl Rng, bound: f64) -> Displacement4 {
    Displacement4::from_array(std::array::from_fn(|_| rng.random_range(-bound..=bound)))
        .expect("finite")
}

fn describe_tensor(g: &MetricTensor) -> String {
    let mut parts = Vec::new();
    for r in 1..=4 {
        for c in 1..=4 {
            parts.push(format!("g[{r}][{c}] = {}", g.component(r, c)));
        }
    }
    parts.join("; ")
}

fn expanded_vs_grouped(rng: &mut impl Rng, cases: usize) -> Result<(), String> {
    for _ in 0..cases {
        let g = random_polynomial_tensor(rng);
        let p = random_point(rng, 10.0);
        let d = random_displacement(rng, 10.0);
        let e = eval_ds2_expanded(&g, &p, &d).map_err(|e| e.to_string())?;
        let gr = eval_ds2_grouped(&g, &p, &d).map_err(|e| e.to_string())?;
        if !e.approx_eq(&gr, IDENTITY_TOL) {
            return Err(format!(
                "expanded {e} != grouped {gr} at p = {p}, d = {:?}; {}",
                d.components(),
                describe_tensor(&g)
            ));
        }
    }
    Ok(())
}

fn reduction(rng: &mut impl Rng, cases: usize) -> Result<(), String> {
    for _ in 0..cases {
        let g = random_polynomial_tensor(rng);
        let p = random_point(rng, 10.0);
        let d = random_displacement(rng, 10.0);
        let reduced = reduce_to_riemannian(&g);
        let alpha = eval_ds2_expanded(&reduced, &p, &d).map_err(|e| e.to_string())?;
        let real = riemannian_ds2(&g, &p, &d).map_err(|e| e.to_string())?;
        if (alpha.collapse() - real).abs() > IDENTITY_TOL {
            return Err(format!(
                "collapse {} != riemannian {real} at p = {p}, d = {:?}; {}",
                alpha.collapse(),
                d.components(),
                describe_tensor(&g)
            ));
        }
    }
    Ok(())
}
