//! Self-maps, orbits and orbit diameters, gauge functions, and the
//! contraction conditions built on them.
//!
//! The orbital conditions bound `p(fx, fy)` by a gauge of the diameter of
//! `O(x, y, f) = {f^n x} ∪ {f^n y}` (with `n = 0` included). That diameter is a
//! supremum over an infinite set, so it is computed on a truncated orbit.
//! Truncation can only underestimate it, and gauges are nondecreasing, so a
//! bound that holds at finite depth also holds for the true diameter. A bound
//! that fails at finite depth proves nothing unless the orbit has closed on a
//! finite carrier.

use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{PartialMetric, Point};

/// Default ceiling above which an orbit diameter is reported as divergent.
pub const DEFAULT_DIAMETER_CAP: f64 = 1e12;

/// Relative slack when comparing `p(fx, fy)` against a bound, absorbing the
/// rounding of the gauge evaluation. Zero bounds get no slack.
pub const BOUND_REL_TOL: f64 = 1e-12;

/// Iterates must stay below this before a gauge recursion counts as decayed.
pub const DECAY_TARGET: f64 = 1e-9;
pub const DEFAULT_DECAY_BUDGET: usize = 100_000;
pub const DEFAULT_RIGHT_LIMIT_STEPS: usize = 8;

pub trait SelfMap {
    fn label(&self) -> String;
    fn apply(&self, x: Point) -> Result<Point>;
}

impl<M: SelfMap + ?Sized> SelfMap for &M {
    fn label(&self) -> String {
        (**self).label()
    }
    fn apply(&self, x: Point) -> Result<Point> {
        (**self).apply(x)
    }
}

/// A self-map given by a closure on carrier values.
#[derive(Clone)]
pub struct FnMap {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnMap {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `t -> r t`.
    pub fn scale(r: f64) -> Self {
        Self::new(format!("t -> {r}*t"), move |t| r * t)
    }

    pub fn identity() -> Self {
        Self::new("t -> t", |t| t)
    }
}

impl fmt::Debug for FnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMap").field("label", &self.label).finish()
    }
}

impl SelfMap for FnMap {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn apply(&self, x: Point) -> Result<Point> {
        Ok(Point((self.f)(x.0)))
    }
}

/// A self-map of a finite carrier, `i -> images[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableMap {
    images: Vec<usize>,
}

impl TableMap {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if let Some((i, &j)) = images.iter().enumerate().find(|(_, &j)| j >= n) {
            return Err(Error::Argument(format!("image of {i} is {j}, outside 0..{n}")));
        }
        Ok(Self { images })
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }
}

impl SelfMap for TableMap {
    fn label(&self) -> String {
        format!("table map {:?}", self.images)
    }
    fn apply(&self, x: Point) -> Result<Point> {
        match x.as_index() {
            Some(i) if i < self.images.len() => Ok(Point::index(self.images[i])),
            _ => Err(Error::Domain {
                carrier: self.label(),
                value: x.0,
                bound: format!("integer index 0 <= i < {}", self.images.len()),
            }),
        }
    }
}

/// Applies `f` to `samples` sampled points and checks the images stay in the
/// carrier.
pub fn spot_check_map<S, M>(space: &S, f: &M, samples: usize, seed: u64) -> Result<()>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = space.sample(&mut rng);
        space.check_point(f.apply(x)?)?;
    }
    Ok(())
}

/// Truncated orbit(s) of one or two seeds and the running diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub seeds: Vec<Point>,
    pub depth: usize,
    /// `f^0 x, ..., f^depth x`, followed by the same for the second seed.
    pub points: Vec<Point>,
    /// Entry `d` is the diameter of the orbit points up to power `d`.
    pub diameter_at_depth: Vec<f64>,
    pub divergence_flag: bool,
    /// Every orbit revisited a point within `depth`, so the orbit set is
    /// fully enumerated and the diameter is exact.
    pub closed: bool,
}

impl OrbitRecord {
    pub fn diameter(&self) -> f64 {
        *self.diameter_at_depth.last().expect("depth 0 yields one entry")
    }

    /// The orbit of seed `k` (0 or 1).
    pub fn orbit(&self, k: usize) -> &[Point] {
        let len = self.depth + 1;
        &self.points[k * len..(k + 1) * len]
    }
}

fn apply_checked<S, M>(space: &S, f: &M, x: Point, index: usize) -> Result<Point>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    f.apply(x)
        .and_then(|y| space.check_point(y).map(|_| y))
        .map_err(|e| Error::IterateEscaped {
            index,
            source: Box::new(e),
        })
}

/// Diameter of `O(x, f)` or `O(x, y, f)` truncated at `depth` applications.
///
/// `divergence_flag` is raised when the diameter exceeds `cap`, or when, at
/// depth 8 or more, the growth over the last quarter of the run is at least
/// the growth over the quarter before it (the diameter is not settling).
pub fn orbit_diameter<S, M>(
    space: &S,
    f: &M,
    x: Point,
    y: Option<Point>,
    depth: usize,
    cap: f64,
) -> Result<OrbitRecord>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    let seeds: Vec<Point> = std::iter::once(x).chain(y).collect();
    for &s in &seeds {
        space.check_point(s)?;
    }

    let mut orbits: Vec<Vec<Point>> = seeds.iter().map(|&s| vec![s]).collect();
    let mut closed_at: Vec<Option<(usize, usize)>> = vec![None; seeds.len()];
    // distinct points contributing to the diameter
    let mut members: Vec<Point> = Vec::with_capacity(seeds.len() * (depth + 1));
    let mut diam = 0.0f64;
    let mut diameter_at_depth = Vec::with_capacity(depth + 1);

    let admit = |p: Point, members: &mut Vec<Point>, diam: &mut f64| {
        if members.contains(&p) {
            return;
        }
        *diam = diam.max(space.eval_unchecked(p, p));
        for &q in members.iter() {
            *diam = diam.max(space.eval_unchecked(p, q));
        }
        members.push(p);
    };

    for &s in &seeds {
        admit(s, &mut members, &mut diam);
    }
    diameter_at_depth.push(diam);

    for d in 1..=depth {
        for k in 0..seeds.len() {
            let prev = *orbits[k].last().expect("orbits start at their seed");
            let next = if let Some((start, period)) = closed_at[k] {
                // periodic from `start` on; replay
                orbits[k][start + (d - start) % period]
            } else {
                let next = apply_checked(space, f, prev, d)?;
                if let Some(pos) = orbits[k].iter().position(|&q| q == next) {
                    closed_at[k] = Some((pos, d - pos));
                } else {
                    admit(next, &mut members, &mut diam);
                }
                next
            };
            orbits[k].push(next);
        }
        diameter_at_depth.push(diam);
    }

    let closed = closed_at.iter().all(Option::is_some);
    let divergence_flag = diam > cap || !settling(&diameter_at_depth);
    Ok(OrbitRecord {
        seeds,
        depth,
        points: orbits.into_iter().flatten().collect(),
        diameter_at_depth,
        divergence_flag,
        closed,
    })
}

fn settling(diams: &[f64]) -> bool {
    let depth = diams.len() - 1;
    if depth < 8 {
        return true;
    }
    let q = depth / 4;
    let last = diams[depth] - diams[depth - q];
    let before = diams[depth - q] - diams[depth - 2 * q];
    !(last > 0.0 && last >= before)
}

/// A candidate gauge `psi : [0, inf) -> [0, inf)`.
#[derive(Clone)]
pub struct PsiSpec {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl PsiSpec {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `t -> r t`.
    pub fn linear(r: f64) -> Self {
        Self::new(format!("{r}*t"), move |t| r * t)
    }

    /// `t -> t / (1 + t)`.
    pub fn rational() -> Self {
        Self::new("t/(1+t)", |t| t / (1.0 + t))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl fmt::Debug for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiSpec").field("label", &self.label).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiCheck {
    ZeroAtOrigin,
    Monotone,
    BelowDiagonal,
    RightContinuity,
    Decay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiFailure {
    pub check: PsiCheck,
    /// The grid point (or recursion start) where the check failed.
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRun {
    pub start: f64,
    pub budget: usize,
    /// Steps taken until the iterate fell below the target, or the budget.
    pub iterations: usize,
    pub final_value: f64,
    pub reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiAudit {
    pub label: String,
    pub zero_at_origin: bool,
    pub monotone: bool,
    pub below_diagonal: bool,
    /// Right-continuity can only be falsified at sampling resolution, never
    /// confirmed.
    pub right_continuity_not_falsified: bool,
    pub decay: DecayRun,
    pub failures: Vec<PsiFailure>,
    pub passed: bool,
}

/// Log-spaced grid from 1e-6 to 100, 57 points.
pub fn default_psi_grid() -> Vec<f64> {
    (0..=56).map(|k| 10f64.powf(-6.0 + k as f64 / 7.0)).collect()
}

/// Runs `s_{n+1} = psi(s_n)` from `start` until it drops below
/// [`DECAY_TARGET`] or `budget` steps elapse.
pub fn psi_decay(psi: &PsiSpec, start: f64, budget: usize) -> DecayRun {
    let mut s = start;
    let mut iterations = 0;
    while !(s < DECAY_TARGET) && iterations < budget {
        s = psi.eval(s);
        iterations += 1;
    }
    DecayRun {
        start,
        budget,
        iterations,
        final_value: s,
        reached: s < DECAY_TARGET,
    }
}

/// Audits a gauge on a sorted positive grid: `psi(0) = 0`, monotone across the
/// grid, `psi(t) < t`, a right-continuity falsification attempt along
/// `h_k = 10^-k`, and decay of the recursion started at the largest grid point
/// within `decay_budget` steps.
pub fn audit_psi(psi: &PsiSpec, grid: &[f64], right_limit_steps: usize, decay_budget: usize) -> Result<PsiAudit> {
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Argument("psi grid must be nonempty, positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("psi grid must be strictly ascending".into()));
    }
    let mut failures = Vec::new();

    let at_zero = psi.eval(0.0);
    if at_zero != 0.0 {
        failures.push(PsiFailure {
            check: PsiCheck::ZeroAtOrigin,
            t: 0.0,
            value: at_zero,
        });
    }

    let values: Vec<f64> = grid.iter().map(|&t| psi.eval(t)).collect();
    for (k, w) in values.windows(2).enumerate() {
        if !(w[1] >= w[0]) {
            failures.push(PsiFailure {
                check: PsiCheck::Monotone,
                t: grid[k + 1],
                value: w[1],
            });
        }
    }
    for (&t, &v) in grid.iter().zip(&values) {
        if !(v < t) || v < 0.0 {
            failures.push(PsiFailure {
                check: PsiCheck::BelowDiagonal,
                t,
                value: v,
            });
        }
    }
    if right_limit_steps > 0 {
        for (&t, &v) in grid.iter().zip(&values) {
            let h = 10f64.powi(-(right_limit_steps as i32));
            let gap = (psi.eval(t + h) - v).abs();
            if !(gap <= 1e-6 * (1.0 + v.abs())) {
                failures.push(PsiFailure {
                    check: PsiCheck::RightContinuity,
                    t,
                    value: gap,
                });
            }
        }
    }

    let start = *grid.last().unwrap();
    let decay = psi_decay(psi, start, decay_budget);
    if !decay.reached {
        failures.push(PsiFailure {
            check: PsiCheck::Decay,
            t: start,
            value: decay.final_value,
        });
    }

    let has = |c: PsiCheck| failures.iter().any(|f| f.check == c);
    Ok(PsiAudit {
        label: psi.label.clone(),
        zero_at_origin: !has(PsiCheck::ZeroAtOrigin),
        monotone: !has(PsiCheck::Monotone),
        below_diagonal: !has(PsiCheck::BelowDiagonal),
        right_continuity_not_falsified: !has(PsiCheck::RightContinuity),
        decay,
        passed: failures.is_empty(),
        failures,
    })
}

/// A gauge cleared for use in condition checks.
#[derive(Debug, Clone)]
pub struct AuditedPsi {
    psi: PsiSpec,
    audit: Option<PsiAudit>,
}

impl AuditedPsi {
    /// Audits `psi` on the default grid and budget. A failed audit is a
    /// contract error: condition checks are unsound for gauges outside the
    /// family.
    pub fn new(psi: PsiSpec) -> Result<Self> {
        Self::with_grid(psi, &default_psi_grid(), DEFAULT_RIGHT_LIMIT_STEPS, DEFAULT_DECAY_BUDGET)
    }

    pub fn with_grid(psi: PsiSpec, grid: &[f64], right_limit_steps: usize, decay_budget: usize) -> Result<Self> {
        let audit = audit_psi(&psi, grid, right_limit_steps, decay_budget)?;
        if !audit.passed {
            let first = &audit.failures[0];
            return Err(Error::Contract(format!(
                "gauge `{}` failed its audit ({:?} at t = {}, value {}); it cannot drive a condition check",
                psi.label, first.check, first.t, first.value
            )));
        }
        Ok(Self { psi, audit: Some(audit) })
    }

    /// `t -> r t` for `0 <= r < 1`, a member of the family in closed form.
    pub fn linear(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Argument(format!("contraction ratio must lie in [0, 1), got {r}")));
        }
        Ok(Self {
            psi: PsiSpec::linear(r),
            audit: None,
        })
    }

    pub fn psi(&self) -> &PsiSpec {
        &self.psi
    }

    /// The audit that cleared this gauge; `None` for closed-form members.
    pub fn audit(&self) -> Option<&PsiAudit> {
        self.audit.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Satisfied,
    Inconclusive,
    ViolatedExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub x: f64,
    pub y: f64,
    pub p_fxfy: f64,
    /// Truncated orbit diameter; absent for the orbit-free conditions.
    pub delta_depth: Option<f64>,
    pub bound: f64,
    pub margin: f64,
    pub verdict: VerdictKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    /// Which bound was checked, e.g. `0.5*t` or `kannan(alpha=0.3)`.
    pub gauge: String,
    pub kind: VerdictKind,
    pub checked_pairs: usize,
    pub worst_margin: f64,
    pub depth: usize,
    /// The condition was stated for a metric and is evaluated with `p`.
    pub p_adapted: bool,
    pub records: Vec<PairRecord>,
}

impl ConditionVerdict {
    fn aggregate(gauge: String, depth: usize, p_adapted: bool, records: Vec<PairRecord>) -> Self {
        let worst_margin = records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let kind = if records.iter().any(|r| r.verdict == VerdictKind::ViolatedExact) {
            VerdictKind::ViolatedExact
        } else if records.iter().any(|r| r.verdict == VerdictKind::Inconclusive) {
            VerdictKind::Inconclusive
        } else {
            VerdictKind::Satisfied
        };
        Self {
            gauge,
            kind,
            checked_pairs: records.len(),
            worst_margin,
            depth,
            p_adapted,
            records,
        }
    }

    pub fn satisfied(&self) -> bool {
        self.kind == VerdictKind::Satisfied
    }
}

fn within(lhs: f64, bound: f64) -> bool {
    lhs <= bound + BOUND_REL_TOL * bound.abs()
}

/// Checks `p(fx, fy) <= psi(delta(O(x, y, f)))` on each pair with the
/// diameter truncated at `depth`.
///
/// A pair is `Satisfied` when the bound holds at the truncated diameter, which
/// is sound for the true diameter. A failing pair is `ViolatedExact` only on a
/// finite carrier whose orbits closed within `depth`; otherwise it is
/// `Inconclusive`, as is any pair whose orbit looks divergent.
pub fn check_condition_a<S, M>(
    space: &S,
    f: &M,
    psi: &AuditedPsi,
    pairs: &[(Point, Point)],
    depth: usize,
) -> Result<ConditionVerdict>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    if pairs.is_empty() {
        return Err(Error::Argument("at least one pair is required".into()));
    }
    let mut records = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let orbit = orbit_diameter(space, f, x, Some(y), depth, DEFAULT_DIAMETER_CAP)?;
        let fx = orbit.orbit(0).get(1).copied().map_or_else(|| apply_checked(space, f, x, 1), Ok)?;
        let fy = orbit.orbit(1).get(1).copied().map_or_else(|| apply_checked(space, f, y, 1), Ok)?;
        let lhs = space.eval_unchecked(fx, fy);
        let delta = orbit.diameter();
        let bound = psi.psi.eval(delta);
        let verdict = if orbit.divergence_flag {
            VerdictKind::Inconclusive
        } else if within(lhs, bound) {
            VerdictKind::Satisfied
        } else if space.is_finite() && orbit.closed {
            VerdictKind::ViolatedExact
        } else {
            VerdictKind::Inconclusive
        };
        records.push(PairRecord {
            x: x.0,
            y: y.0,
            p_fxfy: lhs,
            delta_depth: Some(delta),
            bound,
            margin: bound - lhs,
            verdict,
        });
    }
    Ok(ConditionVerdict::aggregate(psi.psi.label.clone(), depth, false, records))
}

/// `p(fx, fy) <= r delta(O(x, y, f))`: condition (a) with the gauge `r t`.
pub fn check_condition_b<S, M>(
    space: &S,
    f: &M,
    r: f64,
    pairs: &[(Point, Point)],
    depth: usize,
) -> Result<ConditionVerdict>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    check_condition_a(space, f, &AuditedPsi::linear(r)?, pairs, depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KcVariant {
    /// `p(fx, fy) <= alpha [p(x, fx) + p(y, fy)]`
    Kannan,
    /// `p(fx, fy) <= alpha [p(x, fy) + p(y, fx)]`
    Chatterjea,
}

/// Kannan or Chatterjea bound evaluated with the partial metric. No orbit is
/// involved, so each pair verdict is exact.
pub fn check_kannan_chatterjea<S, M>(
    space: &S,
    f: &M,
    alpha: f64,
    which: KcVariant,
    pairs: &[(Point, Point)],
) -> Result<ConditionVerdict>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Argument(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    if pairs.is_empty() {
        return Err(Error::Argument("at least one pair is required".into()));
    }
    let mut records = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        space.check_point(x)?;
        space.check_point(y)?;
        let fx = apply_checked(space, f, x, 1)?;
        let fy = apply_checked(space, f, y, 1)?;
        let p = |a, b| space.eval_unchecked(a, b);
        let lhs = p(fx, fy);
        let bound = match which {
            KcVariant::Kannan => alpha * (p(x, fx) + p(y, fy)),
            KcVariant::Chatterjea => alpha * (p(x, fy) + p(y, fx)),
        };
        records.push(PairRecord {
            x: x.0,
            y: y.0,
            p_fxfy: lhs,
            delta_depth: None,
            bound,
            margin: bound - lhs,
            verdict: if within(lhs, bound) {
                VerdictKind::Satisfied
            } else {
                VerdictKind::ViolatedExact
            },
        });
    }
    let gauge = match which {
        KcVariant::Kannan => format!("kannan(alpha={alpha})"),
        KcVariant::Chatterjea => format!("chatterjea(alpha={alpha})"),
    };
    Ok(ConditionVerdict::aggregate(gauge, 0, true, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::PartialMetricSpace;
    use crate::spaces::make_finite_space;

    const MAX: PartialMetricSpace = PartialMetricSpace::MaxReals;

    #[test]
    fn diameter_examples() {
        let half = FnMap::scale(0.5);
        let r = orbit_diameter(&MAX, &half, Point(1.0), Some(Point(2.0)), 8, DEFAULT_DIAMETER_CAP).unwrap();
        assert_eq!(r.diameter(), 2.0);
        assert!(!r.divergence_flag);
        assert_eq!(r.orbit(0)[0], Point(1.0));
        assert_eq!(r.orbit(1)[8], Point(2.0 / 256.0));

        let r = orbit_diameter(&MAX, &half, Point(3.0), None, 0, DEFAULT_DIAMETER_CAP).unwrap();
        assert_eq!(r.diameter_at_depth, vec![3.0]);

        let double = FnMap::scale(2.0);
        let r = orbit_diameter(&MAX, &double, Point(1.0), None, 40, 1e6).unwrap();
        assert!(r.divergence_flag);
    }

    #[test]
    fn slow_linear_growth_is_flagged() {
        let shift = FnMap::new("t -> t + 1", |t| t + 1.0);
        let r = orbit_diameter(&MAX, &shift, Point(0.0), None, 32, DEFAULT_DIAMETER_CAP).unwrap();
        assert!(r.divergence_flag);
    }

    #[test]
    fn closure_on_finite_orbits() {
        let space = make_finite_space(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        let f = TableMap::new(vec![1, 2, 1]).unwrap();
        let r = orbit_diameter(&space, &f, Point::index(0), None, 6, DEFAULT_DIAMETER_CAP).unwrap();
        assert!(r.closed);
        assert_eq!(
            r.orbit(0).iter().map(|p| p.0 as usize).collect::<Vec<_>>(),
            vec![0, 1, 2, 1, 2, 1, 2]
        );
        assert_eq!(r.diameter(), 2.0);
    }

    #[test]
    fn escaping_iterate_is_reported() {
        let neg = FnMap::new("t -> t - 1", |t| t - 1.0);
        let err = orbit_diameter(&MAX, &neg, Point(1.5), None, 4, DEFAULT_DIAMETER_CAP).unwrap_err();
        assert!(matches!(err, Error::IterateEscaped { index: 2, .. }), "{err}");
    }

    #[test]
    fn condition_a_boundary() {
        let half = FnMap::scale(0.5);
        let psi = AuditedPsi::new(PsiSpec::linear(0.5)).unwrap();
        let v = check_condition_a(&MAX, &half, &psi, &[(Point(1.0), Point(2.0))], 8).unwrap();
        assert_eq!(v.kind, VerdictKind::Satisfied);
        assert_eq!(v.worst_margin, 0.0);
        assert_eq!(v.records[0].p_fxfy, 1.0);
        assert_eq!(v.records[0].bound, 1.0);
    }

    #[test]
    fn identity_fails_inconclusively_on_continuum() {
        let id = FnMap::identity();
        let psi = AuditedPsi::new(PsiSpec::linear(0.5)).unwrap();
        for depth in [0, 1, 8, 64] {
            let v = check_condition_a(&MAX, &id, &psi, &[(Point(1.0), Point(2.0))], depth).unwrap();
            assert_eq!(v.kind, VerdictKind::Inconclusive);
        }
        let two = make_finite_space(vec![vec![1.0, 2.0], vec![2.0, 2.0 + 1.0]]);
        // that table violates pm4 at (0,0,1); use a valid restriction of max
        assert!(two.is_err());
        let restr = make_finite_space(vec![vec![1.0, 2.0], vec![2.0, 2.0]]).unwrap();
        let idt = TableMap::new(vec![0, 1]).unwrap();
        let v = check_condition_a(&restr, &idt, &psi, &[(Point::index(0), Point::index(1))], 4).unwrap();
        assert_eq!(v.kind, VerdictKind::ViolatedExact);
    }

    #[test]
    fn zero_self_distance_fixed_point() {
        let half = FnMap::scale(0.5);
        let psi = AuditedPsi::new(PsiSpec::linear(0.5)).unwrap();
        let v = check_condition_a(&MAX, &half, &psi, &[(Point(0.0), Point(0.0))], 8).unwrap();
        assert!(v.satisfied());
        assert_eq!(v.worst_margin, 0.0);
    }

    #[test]
    fn condition_b_examples() {
        let half = FnMap::scale(0.5);
        let v = check_condition_b(&MAX, &half, 0.5, &[(Point(1.0), Point(2.0))], 8).unwrap();
        assert!(v.satisfied());
        let v = check_condition_b(&MAX, &half, 0.5, &[(Point(0.0), Point(0.0))], 8).unwrap();
        assert!(v.satisfied());
        assert_eq!(v.worst_margin, 0.0);
        assert!(check_condition_b(&MAX, &half, 1.0, &[(Point(0.0), Point(0.0))], 8).is_err());
        assert!(check_condition_b(&MAX, &half, -0.1, &[(Point(0.0), Point(0.0))], 8).is_err());
    }

    #[test]
    fn kannan_examples() {
        let third = FnMap::scale(1.0 / 3.0);
        let pairs: Vec<_> = [(0.5, 2.0), (1e-6, 1e3), (7.0, 7.0)]
            .iter()
            .map(|&(a, b)| (Point(a), Point(b)))
            .collect();
        let v = check_kannan_chatterjea(&MAX, &third, 1.0 / 3.0, KcVariant::Kannan, &pairs).unwrap();
        assert!(v.satisfied());
        assert!(v.p_adapted);

        let id = FnMap::identity();
        let v = check_kannan_chatterjea(&MAX, &id, 0.49, KcVariant::Kannan, &[(Point(1.0), Point(2.0))]).unwrap();
        assert_eq!(v.kind, VerdictKind::ViolatedExact);

        let v = check_kannan_chatterjea(&MAX, &id, 0.25, KcVariant::Chatterjea, &[(Point(0.0), Point(0.0))]).unwrap();
        assert!(v.satisfied());
        assert_eq!(v.worst_margin, 0.0);

        assert!(check_kannan_chatterjea(&MAX, &id, 0.5, KcVariant::Kannan, &pairs).is_err());
        assert!(check_kannan_chatterjea(&MAX, &id, 0.0, KcVariant::Chatterjea, &pairs).is_err());
    }

    #[test]
    fn psi_audits() {
        let grid = default_psi_grid();
        let a = audit_psi(&PsiSpec::linear(0.5), &grid, 8, DEFAULT_DECAY_BUDGET).unwrap();
        assert!(a.passed, "{:?}", a.failures);
        assert!(a.zero_at_origin && a.monotone && a.below_diagonal && a.right_continuity_not_falsified);

        let id = audit_psi(&PsiSpec::new("t", |t| t), &grid, 8, DEFAULT_DECAY_BUDGET).unwrap();
        assert!(!id.below_diagonal);
        let below: Vec<_> = id.failures.iter().filter(|f| f.check == PsiCheck::BelowDiagonal).collect();
        assert_eq!(below.len(), grid.len());

        let sqrt = audit_psi(&PsiSpec::new("sqrt(t)", f64::sqrt), &grid, 8, DEFAULT_DECAY_BUDGET).unwrap();
        assert!(!sqrt.passed);
        for f in sqrt.failures.iter().filter(|f| f.check == PsiCheck::BelowDiagonal) {
            assert!(f.t <= 1.0, "sqrt(t) < t for t > 1, flagged {}", f.t);
        }
        assert!(sqrt.failures.iter().any(|f| f.check == PsiCheck::BelowDiagonal && f.t < 1.0));
    }

    #[test]
    fn psi_audit_catches_left_continuous_jump() {
        // jumps up just after t = 1: left-continuous, not right-continuous
        let step = PsiSpec::new("step", |t: f64| if t <= 1.0 { 0.25 * t } else { 0.9 * t });
        let a = audit_psi(&step, &[0.5, 1.0, 2.0], 8, 1000).unwrap();
        assert!(!a.right_continuity_not_falsified);
        assert!(a.failures.iter().any(|f| f.check == PsiCheck::RightContinuity && f.t == 1.0));
    }

    #[test]
    fn psi_audit_catches_nonmonotone_and_origin() {
        let wobble = PsiSpec::new("wobble", |t: f64| 0.5 * t * (1.0 + 0.5 * (10.0 * t).sin()).min(1.0));
        let a = audit_psi(&wobble, &default_psi_grid(), 8, 1000).unwrap();
        assert!(!a.monotone);
        let lifted = PsiSpec::new("t/2 + 1e-3 at 0", |t: f64| if t == 0.0 { 1e-3 } else { 0.5 * t });
        let a = audit_psi(&lifted, &[1.0], 8, 1000).unwrap();
        assert!(!a.zero_at_origin);
    }

    #[test]
    fn unaudited_gauge_is_a_contract_error() {
        assert!(matches!(AuditedPsi::new(PsiSpec::new("t", |t| t)), Err(Error::Contract(_))));
        assert!(audit_psi(&PsiSpec::linear(0.5), &[2.0, 1.0], 8, 10).is_err());
        assert!(audit_psi(&PsiSpec::linear(0.5), &[], 8, 10).is_err());
    }

    #[test]
    fn table_map_rejects_out_of_range() {
        assert!(TableMap::new(vec![0, 2]).is_err());
        let f = TableMap::new(vec![1, 0]).unwrap();
        assert!(f.apply(Point(0.5)).is_err());
        assert_eq!(f.apply(Point::index(0)).unwrap(), Point::index(1));
    }
}
