//! The partial-metric abstraction and its axiom audits.
//!
//! A partial metric `p` relaxes an ordinary metric by allowing a positive
//! self-distance `p(x, x)`. The four axioms checked here are
//!
//! * pm1: `x = y` iff `p(x, x) = p(x, y) = p(y, y)`
//! * pm2: `0 <= p(x, x) <= p(x, y)`
//! * pm3: `p(x, y) = p(y, x)`
//! * pm4: `p(x, y) + p(z, z) <= p(x, z) + p(z, y)`

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::FiniteTable;

/// A carrier element. Interval carriers store the real value itself; finite
/// tables store the row index as an integral float.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub f64);

impl Point {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn index(i: usize) -> Self {
        Point(i as f64)
    }

    /// The table index this point encodes, if it is a nonnegative integer.
    pub fn as_index(self) -> Option<usize> {
        let v = self.0;
        (v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64).then_some(v as usize)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierKind {
    NonnegativeReals,
    PuncturedUnitInterval,
    FiniteTable,
}

/// Anything that evaluates a partial metric over a declared carrier.
///
/// `eval_unchecked` may assume both points passed `check_point`.
pub trait PartialMetric {
    fn label(&self) -> String;

    fn check_point(&self, x: Point) -> Result<()>;

    fn eval_unchecked(&self, x: Point, y: Point) -> f64;

    /// Draws a carrier point. Used by the randomized audits.
    fn sample(&self, rng: &mut dyn RngCore) -> Point;

    /// True when the carrier is finite, so that orbits close and diameters
    /// can be computed exactly.
    fn is_finite(&self) -> bool {
        false
    }

    /// How far apart two carrier points are as carrier elements (not under
    /// `p`). Used by the pm1 audit to decide point equality within tolerance.
    fn point_gap(&self, x: Point, y: Point) -> f64 {
        (x.0 - y.0).abs()
    }

    fn eval(&self, x: Point, y: Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    fn contains(&self, x: Point) -> bool {
        self.check_point(x).is_ok()
    }
}

impl<S: PartialMetric + ?Sized> PartialMetric for &S {
    fn label(&self) -> String {
        (**self).label()
    }
    fn check_point(&self, x: Point) -> Result<()> {
        (**self).check_point(x)
    }
    fn eval_unchecked(&self, x: Point, y: Point) -> f64 {
        (**self).eval_unchecked(x, y)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        (**self).sample(rng)
    }
    fn is_finite(&self) -> bool {
        (**self).is_finite()
    }
    fn point_gap(&self, x: Point, y: Point) -> f64 {
        (**self).point_gap(x, y)
    }
}

/// The built-in spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum PartialMetricSpace {
    /// `[0, inf)` under `max`.
    MaxReals,
    /// `(0, 1]` under `max`. Incomplete: `1/n` has no proper limit here.
    PuncturedInterval,
    /// A validated user-supplied table.
    Finite(FiniteTable),
}

pub(crate) const MAX_SAMPLE_RANGE: (f64, f64) = (1e-6, 1e3);
pub(crate) const PUNCTURED_SAMPLE_RANGE: (f64, f64) = (1e-9, 1.0);

pub(crate) fn log_uniform(rng: &mut dyn RngCore, lo: f64, hi: f64) -> f64 {
    let t: f64 = rng.gen_range(lo.ln()..=hi.ln());
    t.exp().clamp(lo, hi)
}

impl PartialMetricSpace {
    pub fn carrier_kind(&self) -> CarrierKind {
        match self {
            Self::MaxReals => CarrierKind::NonnegativeReals,
            Self::PuncturedInterval => CarrierKind::PuncturedUnitInterval,
            Self::Finite(_) => CarrierKind::FiniteTable,
        }
    }

    pub fn as_table(&self) -> Option<&FiniteTable> {
        match self {
            Self::Finite(t) => Some(t),
            _ => None,
        }
    }
}

impl PartialMetric for PartialMetricSpace {
    fn label(&self) -> String {
        match self {
            Self::MaxReals => "max on [0, inf)".into(),
            Self::PuncturedInterval => "max on (0, 1]".into(),
            Self::Finite(t) => format!("finite table (n = {})", t.len()),
        }
    }

    fn check_point(&self, x: Point) -> Result<()> {
        let v = x.0;
        let domain = |bound: &str| Error::Domain {
            carrier: self.label(),
            value: v,
            bound: bound.to_string(),
        };
        match self {
            Self::MaxReals if !(v.is_finite() && v >= 0.0) => Err(domain("0 <= x < inf")),
            Self::PuncturedInterval if !(v > 0.0 && v <= 1.0) => Err(domain("0 < x <= 1")),
            Self::Finite(t) => match x.as_index() {
                Some(i) if i < t.len() => Ok(()),
                _ => Err(domain(&format!("integer index 0 <= i < {}", t.len()))),
            },
            _ => Ok(()),
        }
    }

    fn eval_unchecked(&self, x: Point, y: Point) -> f64 {
        match self {
            Self::MaxReals | Self::PuncturedInterval => x.0.max(y.0),
            Self::Finite(t) => t.get(x.0 as usize, y.0 as usize),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        match self {
            Self::MaxReals => Point(log_uniform(rng, MAX_SAMPLE_RANGE.0, MAX_SAMPLE_RANGE.1)),
            Self::PuncturedInterval => {
                Point(log_uniform(rng, PUNCTURED_SAMPLE_RANGE.0, PUNCTURED_SAMPLE_RANGE.1))
            }
            Self::Finite(t) => Point::index(rng.gen_range(0..t.len())),
        }
    }

    fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    fn point_gap(&self, x: Point, y: Point) -> f64 {
        match self {
            Self::Finite(_) => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            _ => (x.0 - y.0).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Pm1,
    Pm2,
    Pm3,
    Pm4,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Pm1 => "pm1",
            Axiom::Pm2 => "pm2",
            Axiom::Pm3 => "pm3",
            Axiom::Pm4 => "pm4",
        };
        f.write_str(s)
    }
}

/// One failed axiom instance. `residual` is the amount by which the
/// inequality (or equality) misses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<Point>,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.witness.iter().map(|p| p.to_string()).collect();
        write!(f, "{} at ({}) residual {}", self.axiom, w.join(", "), self.residual)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomAuditReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

impl AxiomAuditReport {
    fn from_violations(trials: usize, violations: Vec<Violation>) -> Self {
        let passed = violations.is_empty();
        Self {
            trials,
            violations,
            passed,
        }
    }
}

pub fn eval_p<S: PartialMetric + ?Sized>(space: &S, x: Point, y: Point) -> Result<f64> {
    space.eval(x, y)
}

/// Checks pm1-pm3 on a single pair. Appends to `out`.
pub(crate) fn check_pair<S: PartialMetric + ?Sized>(
    space: &S,
    a: Point,
    b: Point,
    tol: f64,
    out: &mut Vec<Violation>,
) {
    let paa = space.eval_unchecked(a, a);
    let pbb = space.eval_unchecked(b, b);
    let pab = space.eval_unchecked(a, b);
    let pba = space.eval_unchecked(b, a);

    // pm1, both directions
    let spread = (paa - pab).abs().max((pbb - pab).abs());
    let gap = space.point_gap(a, b);
    let triple_equal = spread <= tol;
    let same = gap <= tol;
    if triple_equal && !same {
        out.push(Violation {
            axiom: Axiom::Pm1,
            witness: vec![a, b],
            residual: gap,
        });
    } else if same && !triple_equal {
        out.push(Violation {
            axiom: Axiom::Pm1,
            witness: vec![a, b],
            residual: spread,
        });
    }

    // pm2
    for (s, first, second, cross) in [(paa, a, b, pab), (pbb, b, a, pba)] {
        if -s > tol {
            out.push(Violation {
                axiom: Axiom::Pm2,
                witness: vec![first, first],
                residual: -s,
            });
        }
        if s - cross > tol {
            out.push(Violation {
                axiom: Axiom::Pm2,
                witness: vec![first, second],
                residual: s - cross,
            });
        }
        if a == b {
            break;
        }
    }

    // pm3
    if (pab - pba).abs() > tol {
        out.push(Violation {
            axiom: Axiom::Pm3,
            witness: vec![a, b],
            residual: (pab - pba).abs(),
        });
    }
}

pub(crate) fn pm4_residual<S: PartialMetric + ?Sized>(space: &S, x: Point, y: Point, z: Point) -> f64 {
    let lhs = space.eval_unchecked(x, y) + space.eval_unchecked(z, z);
    let rhs = space.eval_unchecked(x, z) + space.eval_unchecked(z, y);
    lhs - rhs
}

/// Evaluates every axiom at the triple `(x, y, z)`.
///
/// pm1-pm3 are checked on each distinct pair drawn from the triple; pm4 on the
/// triple in the given order.
pub fn check_axioms_at<S: PartialMetric + ?Sized>(
    space: &S,
    x: Point,
    y: Point,
    z: Point,
    tol: f64,
) -> Result<AxiomAuditReport> {
    for p in [x, y, z] {
        space.check_point(p)?;
    }
    Ok(AxiomAuditReport::from_violations(1, violations_at(space, x, y, z, tol)))
}

fn violations_at<S: PartialMetric + ?Sized>(
    space: &S,
    x: Point,
    y: Point,
    z: Point,
    tol: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: Vec<(Point, Point)> = Vec::with_capacity(3);
    for (a, b) in [(x, y), (x, z), (y, z)] {
        if seen.iter().any(|&(c, d)| (c == a && d == b) || (c == b && d == a)) {
            continue;
        }
        seen.push((a, b));
        check_pair(space, a, b, tol, &mut out);
    }
    let r = pm4_residual(space, x, y, z);
    if r > tol {
        out.push(Violation {
            axiom: Axiom::Pm4,
            witness: vec![x, y, z],
            residual: r,
        });
    }
    out
}

/// Randomized axiom audit over `trials` sampled triples, reproducible under
/// `seed`. A small fraction of triples repeat a point so that the converse
/// half of pm1 is exercised.
pub fn audit_axioms<S: PartialMetric + ?Sized>(
    space: &S,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<AxiomAuditReport> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..trials {
        let x = space.sample(&mut rng);
        let mut y = space.sample(&mut rng);
        let mut z = space.sample(&mut rng);
        match rng.gen_range(0..16u8) {
            0 => y = x,
            1 => z = y,
            _ => {}
        }
        violations.extend(violations_at(space, x, y, z, tol));
    }
    Ok(AxiomAuditReport::from_violations(trials, violations))
}

/// Membership in the basic open ball `{y : p(c, y) < radius + p(c, c)}`.
///
/// Evaluated as `p(c, y) - p(c, c) < radius` so that the center stays inside
/// even when `radius` is below the float resolution of `p(c, c)`.
pub fn ball_contains<S: PartialMetric + ?Sized>(
    space: &S,
    center: Point,
    radius: f64,
    y: Point,
) -> Result<bool> {
    if !(radius > 0.0) {
        return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
    }
    let pcy = space.eval(center, y)?;
    let pcc = space.eval(center, center)?;
    Ok(pcy - pcc < radius)
}
