//! A fixed-point-free self-map of the incomplete space `((0, 1], max)` that
//! nevertheless satisfies the orbital contraction condition (b).
//!
//! The carrier is split into shells `P_n = {x : p(x, u) <= b^n}` around the
//! missing point `u = 0`. A point of level `n(x) = max{n : x ∈ P_n}` is sent
//! two levels deeper, onto the first term of the canonical sequence
//! `x_i = 1/i` that has entered `P_{n(x)+2}` for good. Every image is strictly
//! closer to `u` than its preimage, so nothing is fixed, yet the map is
//! contractive enough along orbits to satisfy `p(fx, fy) <= r δ(O(x, y, f))`.
//!
//! Levels are computed in floating point with the same routine on both sides:
//! the shell threshold `b^n` and the sequence term `x_{k(n)}` are built from
//! the same float, so a term that sits exactly on a shell boundary is inside
//! the shell (`p(x, u) <= b^n` with equality).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::contraction::{check_condition_b, SelfMap};
use crate::error::{Error, Result};
use crate::solver::verify_fixed_point;
use crate::space::{PartialMetric, PartialMetricSpace, Point};
use crate::spaces::{make_punctured_interval, CompletionView};

pub const DEFAULT_B: f64 = 0.2;
pub const DEFAULT_R: f64 = 0.5;
pub const DEFAULT_AUDIT_DEPTH: usize = 64;
/// Fixed-point tolerance for the audit. Sampled points reach down to 1e-9,
/// where the pm1 residual `x - f(x)` is still above 8e-10.
pub const DEFAULT_WITNESS_EPS: f64 = 1e-12;

/// Largest sequence index reachable by the linear scan used for a general `b`.
const SCAN_INDEX_BUDGET: u64 = 1 << 53;

#[derive(Debug, Clone)]
struct Level {
    threshold: f64,
    index: BigUint,
    point: f64,
}

#[derive(Debug, Clone)]
pub struct WitnessMap {
    view: CompletionView,
    b: f64,
    r: f64,
    /// `Some(q)` when `b = 1/q` exactly; then `k(n) = q^n` in closed form.
    reciprocal: Option<u32>,
    /// `k(n)` and friends for `n = 0..levels.len()`, filled at construction.
    levels: Vec<Level>,
}

impl WitnessMap {
    /// `b = 1/5`, `r = 1/2`.
    pub fn new() -> Self {
        Self::with_constants(DEFAULT_B, DEFAULT_R).expect("default constants are valid")
    }

    /// Requires `0 < b < 1`, `0 <= r < 1` and `2b/(1-b) <= r`, the last being
    /// what turns the shell bound into condition (b).
    pub fn with_constants(b: f64, r: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Argument(format!("b must lie in (0, 1), got {b}")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Argument(format!("r must lie in [0, 1), got {r}")));
        }
        let need = 2.0 * b / (1.0 - b);
        if need > r * (1.0 + 1e-12) {
            return Err(Error::Argument(format!(
                "r = {r} is below 2b/(1-b) = {need}; the witness would not satisfy condition (b)"
            )));
        }
        let q = (1.0 / b).round();
        let reciprocal = (q >= 2.0 && q <= u32::MAX as f64 && 1.0 / q == b).then_some(q as u32);
        let mut map = Self {
            view: make_punctured_interval(),
            b,
            r,
            reciprocal,
            levels: Vec::new(),
        };
        map.warm_up();
        Ok(map)
    }

    fn warm_up(&mut self) {
        let mut n = 0i64;
        while let Ok(level) = self.compute_level(n) {
            self.levels.push(level);
            n += 1;
        }
    }

    fn compute_level(&self, n: i64) -> Result<Level> {
        if n <= 0 {
            return Ok(Level {
                threshold: self.threshold(n),
                index: BigUint::one(),
                point: 1.0,
            });
        }
        match self.reciprocal {
            Some(q) => {
                let index = BigUint::from(q).pow(n as u32);
                let point = 1.0 / index.to_f64().unwrap_or(f64::INFINITY);
                if !(point >= f64::MIN_POSITIVE) {
                    return Err(self.budget_error(n));
                }
                Ok(Level {
                    threshold: point,
                    index,
                    point,
                })
            }
            None => {
                let threshold = self.threshold(n);
                let guess = (1.0 / threshold).ceil();
                if !(guess < SCAN_INDEX_BUDGET as f64) {
                    return Err(self.budget_error(n));
                }
                let mut k = (guess as u64).max(1);
                while k > 1 && 1.0 / ((k - 1) as f64) <= threshold {
                    k -= 1;
                }
                while 1.0 / (k as f64) > threshold {
                    k += 1;
                }
                Ok(Level {
                    threshold,
                    index: BigUint::from(k),
                    point: 1.0 / k as f64,
                })
            }
        }
    }

    fn budget_error(&self, n: i64) -> Error {
        let budget = match self.reciprocal {
            Some(_) => "sequence terms must stay above the smallest normal float".to_string(),
            None => format!("sequence index must stay below {SCAN_INDEX_BUDGET}"),
        };
        Error::Resource(format!("k({n}) exceeds the index budget: {budget}"))
    }

    /// `b^n` as used for shell membership.
    fn threshold(&self, n: i64) -> f64 {
        if n >= 0 {
            if let Some(level) = self.levels.get(n as usize) {
                return level.threshold;
            }
        }
        match self.reciprocal {
            Some(q) => {
                let qn = BigUint::from(q).pow(n.unsigned_abs() as u32).to_f64().unwrap_or(f64::INFINITY);
                if n >= 0 {
                    1.0 / qn
                } else {
                    qn
                }
            }
            None => self.b.powi(n as i32),
        }
    }

    pub fn view(&self) -> &CompletionView {
        &self.view
    }

    pub fn base(&self) -> &PartialMetricSpace {
        self.view.base()
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `p(x, u)`.
    pub fn distance_to_u(&self, x: Point) -> Result<f64> {
        self.view.eval(x, self.view.u())
    }

    /// `x ∈ P_n`.
    pub fn in_shell(&self, x: Point, n: i64) -> Result<bool> {
        Ok(self.distance_to_u(x)? <= self.threshold(n))
    }

    /// `n(x)`: the largest `n` with `p(x, u) <= b^n`.
    pub fn partition_index(&self, x: Point) -> Result<i64> {
        self.base().check_point(x)?;
        let d = self.distance_to_u(x)?;
        if !(d > 0.0) {
            return Err(Error::Domain {
                carrier: self.view.label(),
                value: x.0,
                bound: "p(x, u) > 0".into(),
            });
        }
        // log estimate, then exact correction against the thresholds
        let mut n = (d.ln() / self.b.ln()).floor() as i64;
        while d <= self.threshold(n + 1) {
            n += 1;
        }
        while d > self.threshold(n) {
            n -= 1;
        }
        Ok(n)
    }

    /// `k(n)`: the smallest index from which `x_i = 1/i` stays in `P_n`.
    pub fn stabilization_index(&self, n: i64) -> Result<BigUint> {
        if n <= 0 {
            return Ok(BigUint::one());
        }
        self.levels
            .get(n as usize)
            .map(|l| l.index.clone())
            .ok_or_else(|| self.budget_error(n))
    }

    /// `x_{k(n)}`.
    pub fn level_point(&self, n: i64) -> Result<Point> {
        if n <= 0 {
            return Ok(Point(1.0));
        }
        self.levels
            .get(n as usize)
            .map(|l| Point(l.point))
            .ok_or_else(|| self.budget_error(n))
    }

    /// `f(x) = x_{k(2)}` if `n(x) <= 0`, else `x_{k(n(x)+2)}`.
    pub fn apply_witness(&self, x: Point) -> Result<Point> {
        let n = self.partition_index(x)?;
        self.level_point(if n <= 0 { 2 } else { n + 2 })
    }
}

impl Default for WitnessMap {
    fn default() -> Self {
        Self::new()
    }
}

impl SelfMap for WitnessMap {
    fn label(&self) -> String {
        format!("incompleteness witness (b = {}, r = {})", self.b, self.r)
    }
    fn apply(&self, x: Point) -> Result<Point> {
        self.apply_witness(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessChecks {
    pub no_fixed_point: bool,
    pub contraction_to_u: bool,
    pub bound_iii: bool,
    pub condition_b: bool,
    pub finiteness: bool,
    pub image_confinement: bool,
}

impl WitnessChecks {
    pub fn all(&self) -> bool {
        self.no_fixed_point
            && self.contraction_to_u
            && self.bound_iii
            && self.condition_b
            && self.finiteness
            && self.image_confinement
    }
}

/// Smallest slack seen per check; nonnegative means the check held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessMargins {
    /// pm1 residual minus `eps`.
    pub no_fixed_point: f64,
    /// `b p(x,u) - p(fx,u)`
    pub contraction_to_u: f64,
    /// `b/(1-b) p(x,fx) - p(fx,u)`
    pub bound_iii: f64,
    /// `r δ - p(fx,fy)`
    pub condition_b: f64,
    /// `p(x,y) + p(x,fx) + p(y,fy) + δ(f(X)) - δ`
    pub finiteness: f64,
    /// `b - p(fx,u)`
    pub image_confinement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessAudit {
    pub samples: usize,
    pub seed: u64,
    pub b: f64,
    pub r: f64,
    pub depth: usize,
    pub eps: f64,
    pub checks: WitnessChecks,
    pub worst_margins: WitnessMargins,
    /// Diameter of the sampled image set.
    pub image_diameter_sample: f64,
    /// Closed form: the image lies in the sequence and is dominated by
    /// `x_{k(2)}`, so `δ(f(X)) = p(x_{k(2)}, x_{k(2)})`.
    pub image_diameter_exact: f64,
    pub passed: bool,
}

/// Samples `samples` points and as many pairs (log-uniform toward `u`) and
/// checks every inequality the construction relies on.
pub fn audit_witness(witness: &WitnessMap, samples: usize, seed: u64, eps: f64, depth: usize) -> Result<WitnessAudit> {
    if samples == 0 {
        return Err(Error::Argument("samples must be at least 1".into()));
    }
    let base = witness.base();
    let u = witness.view.u();
    let p = |a: Point, b: Point| witness.view.eval_unchecked(a, b);
    let (b, r) = (witness.b, witness.r);
    let ratio = b / (1.0 - b);

    let mut rng = StdRng::seed_from_u64(seed);
    let xs: Vec<Point> = (0..samples).map(|_| base.sample(&mut rng)).collect();
    let pairs: Vec<(Point, Point)> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| if i % 16 == 0 { (x, x) } else { (x, base.sample(&mut rng)) })
        .collect();

    let mut m = WitnessMargins {
        no_fixed_point: f64::INFINITY,
        contraction_to_u: f64::INFINITY,
        bound_iii: f64::INFINITY,
        condition_b: f64::INFINITY,
        finiteness: f64::INFINITY,
        image_confinement: f64::INFINITY,
    };
    let mut distinct_images = true;

    let mut images: Vec<Point> = Vec::new();
    let image_of = |x: Point, images: &mut Vec<Point>| -> Result<Point> {
        let fx = witness.apply_witness(x)?;
        if !images.contains(&fx) {
            images.push(fx);
        }
        Ok(fx)
    };

    for &x in &xs {
        let fx = image_of(x, &mut images)?;
        let check = verify_fixed_point(base, witness, x, eps)?;
        distinct_images &= fx != x && !check.holds;
        m.no_fixed_point = m.no_fixed_point.min(check.residual - eps);
        m.contraction_to_u = m.contraction_to_u.min(b * p(x, u) - p(fx, u));
        m.bound_iii = m.bound_iii.min(ratio * p(x, fx) - p(fx, u));
        m.image_confinement = m.image_confinement.min(b - p(fx, u));
    }
    for &(_, y) in &pairs {
        image_of(y, &mut images)?;
    }

    let image_diameter_sample = images
        .iter()
        .flat_map(|&a| images.iter().map(move |&c| (a, c)))
        .map(|(a, c)| p(a, c))
        .fold(0.0, f64::max);
    let k2 = witness.level_point(2)?;
    let image_diameter_exact = p(k2, k2);

    let verdict = check_condition_b(base, witness, r, &pairs, depth)?;
    m.condition_b = verdict.worst_margin;
    for (rec, &(x, y)) in verdict.records.iter().zip(&pairs) {
        let fx = witness.apply_witness(x)?;
        let fy = witness.apply_witness(y)?;
        let delta = rec.delta_depth.expect("orbital condition records carry a diameter");
        let bound = p(x, y) + p(x, fx) + p(y, fy) + image_diameter_sample;
        m.finiteness = m.finiteness.min(bound - delta);
    }

    let checks = WitnessChecks {
        no_fixed_point: distinct_images && m.no_fixed_point >= 0.0,
        contraction_to_u: m.contraction_to_u >= 0.0,
        bound_iii: m.bound_iii >= 0.0,
        condition_b: verdict.satisfied(),
        finiteness: m.finiteness >= 0.0,
        image_confinement: m.image_confinement >= 0.0,
    };
    Ok(WitnessAudit {
        samples,
        seed,
        b,
        r,
        depth,
        eps,
        checks,
        worst_margins: m,
        image_diameter_sample,
        image_diameter_exact,
        passed: checks.all(),
    })
}
