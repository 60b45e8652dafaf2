//! Convergence analysis of finitely realized sequences.
//!
//! No finite prefix proves a limit. Every verdict here is therefore stated at
//! a resolution `(N, W, eps)`: the horizon, the tail window examined, and the
//! tolerance. `NotCertified` means "not established at this resolution", not
//! "divergent".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{PartialMetric, Point};

pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_WINDOW: usize = 64;
pub const DEFAULT_EPS: f64 = 1e-9;

/// The points `x_1, ..., x_N` of a sequence in a given space.
#[derive(Debug, Clone)]
pub struct SequenceTrace<'a, S: PartialMetric + ?Sized> {
    space: &'a S,
    points: Vec<Point>,
}

impl<'a, S: PartialMetric + ?Sized> SequenceTrace<'a, S> {
    /// Realizes `generator(1), ..., generator(horizon)`.
    pub fn new(space: &'a S, horizon: usize, generator: impl Fn(usize) -> Point) -> Result<Self> {
        Self::from_points(space, (1..=horizon).map(generator).collect())
    }

    pub fn from_points(space: &'a S, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("trace horizon must be at least 1".into()));
        }
        for (i, &p) in points.iter().enumerate() {
            space.check_point(p).map_err(|e| Error::IterateEscaped {
                index: i + 1,
                source: Box::new(e),
            })?;
        }
        Ok(Self { space, points })
    }

    pub fn space(&self) -> &'a S {
        self.space
    }

    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    /// `x_n`, 1-based.
    pub fn point(&self, n: usize) -> Point {
        self.points[n - 1]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn tail(&self, window: usize) -> Result<std::ops::RangeInclusive<usize>> {
        let n = self.horizon();
        if window == 0 || window > n {
            return Err(Error::Argument(format!(
                "tail window {window} must satisfy 1 <= W <= N = {n}"
            )));
        }
        Ok(n - window + 1..=n)
    }

    fn p(&self, a: Point, b: Point) -> f64 {
        self.space.eval_unchecked(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedAtResolution,
    NotCertified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceKind {
    Tau,
    Proper,
    Cauchy,
    PairwiseIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub horizon: usize,
    pub window: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: ConvergenceKind,
    pub verdict: Verdict,
    /// The anchor `x` for anchored analyses.
    pub anchor: Option<f64>,
    /// The limit value: `p(x, x)` for anchored kinds, the estimate `a` for
    /// Cauchy detection.
    pub estimated_limit_value: Option<f64>,
    pub max_tail_residual: f64,
    pub resolution: Resolution,
    /// Index of the first tail element; `residuals[k]` belongs to
    /// `tail_start + k`.
    pub tail_start: usize,
    pub residuals: Vec<f64>,
}

impl ConvergenceReport {
    fn new(
        kind: ConvergenceKind,
        anchor: Option<Point>,
        limit: Option<f64>,
        resolution: Resolution,
        tail_start: usize,
        residuals: Vec<f64>,
    ) -> Self {
        // NaN residuals poison the maximum instead of being skipped.
        let max = residuals
            .iter()
            .fold(0.0f64, |m, &r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
        let verdict = if max < resolution.eps {
            Verdict::CertifiedAtResolution
        } else {
            Verdict::NotCertified
        };
        Self {
            kind,
            verdict,
            anchor: anchor.map(Point::value),
            estimated_limit_value: limit,
            max_tail_residual: max,
            resolution,
            tail_start,
            residuals,
        }
    }

    pub fn certified(&self) -> bool {
        self.verdict == Verdict::CertifiedAtResolution
    }
}

fn resolution<S: PartialMetric + ?Sized>(trace: &SequenceTrace<'_, S>, window: usize, eps: f64) -> Result<Resolution> {
    if !(eps >= 0.0) {
        return Err(Error::Argument(format!("tolerance must be nonnegative, got {eps}")));
    }
    Ok(Resolution {
        horizon: trace.horizon(),
        window,
        eps,
    })
}

/// tau(p)-convergence to `x`: `|p(x, x_n) - p(x, x)| < eps` on the tail.
pub fn analyze_tau_convergence<S: PartialMetric + ?Sized>(
    trace: &SequenceTrace<'_, S>,
    x: Point,
    window: usize,
    eps: f64,
) -> Result<ConvergenceReport> {
    trace.space.check_point(x)?;
    let tail = trace.tail(window)?;
    let res = resolution(trace, window, eps)?;
    let pxx = trace.p(x, x);
    let residuals = tail.clone().map(|n| (trace.p(x, trace.point(n)) - pxx).abs()).collect();
    Ok(ConvergenceReport::new(ConvergenceKind::Tau, Some(x), Some(pxx), res, *tail.start(), residuals))
}

/// Proper convergence to `x`: tau-convergence plus `p(x_n, x_n) -> p(x, x)`.
/// Each residual is the larger of the two families at that index.
pub fn analyze_proper_convergence<S: PartialMetric + ?Sized>(
    trace: &SequenceTrace<'_, S>,
    x: Point,
    window: usize,
    eps: f64,
) -> Result<ConvergenceReport> {
    trace.space.check_point(x)?;
    let tail = trace.tail(window)?;
    let res = resolution(trace, window, eps)?;
    let pxx = trace.p(x, x);
    let residuals = tail
        .clone()
        .map(|n| {
            let xn = trace.point(n);
            let cross = (trace.p(x, xn) - pxx).abs();
            let own = (trace.p(xn, xn) - pxx).abs();
            cross.max(own)
        })
        .collect();
    Ok(ConvergenceReport::new(ConvergenceKind::Proper, Some(x), Some(pxx), res, *tail.start(), residuals))
}

/// p-Cauchy detection with `a` estimated as `p(x_{N-1}, x_N)`. Residual `k`
/// is the worst `|p(x_n, x_m) - a|` over the tail row `n = tail_start + k`.
pub fn detect_cauchy<S: PartialMetric + ?Sized>(
    trace: &SequenceTrace<'_, S>,
    window: usize,
    eps: f64,
) -> Result<ConvergenceReport> {
    let tail = trace.tail(window)?;
    let res = resolution(trace, window, eps)?;
    let n = trace.horizon();
    let a = if n >= 2 {
        trace.p(trace.point(n - 1), trace.point(n))
    } else {
        trace.p(trace.point(1), trace.point(1))
    };
    let residuals = tail
        .clone()
        .map(|i| {
            tail.clone()
                .map(|j| (trace.p(trace.point(i), trace.point(j)) - a).abs())
                .fold(0.0f64, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(r) })
        })
        .collect();
    Ok(ConvergenceReport::new(ConvergenceKind::Cauchy, None, Some(a), res, *tail.start(), residuals))
}

/// `lim p(x_m, x_n) = p(x, x)` for a properly convergent sequence. Proper
/// convergence to `x` is re-established first; if it does not certify the
/// call fails with a contract error.
pub fn check_pairwise_limit_identity<S: PartialMetric + ?Sized>(
    trace: &SequenceTrace<'_, S>,
    x: Point,
    window: usize,
    eps: f64,
) -> Result<ConvergenceReport> {
    let proper = analyze_proper_convergence(trace, x, window, eps)?;
    if !proper.certified() {
        return Err(Error::Contract(format!(
            "proper convergence to {x} is not certified at (N={}, W={window}, eps={eps}) \
             (worst residual {}); certify it before checking the pairwise limit identity",
            trace.horizon(),
            proper.max_tail_residual
        )));
    }
    let tail = trace.tail(window)?;
    let res = resolution(trace, window, eps)?;
    let pxx = trace.p(x, x);
    let residuals = tail
        .clone()
        .map(|i| {
            tail.clone()
                .map(|j| (trace.p(trace.point(i), trace.point(j)) - pxx).abs())
                .fold(0.0f64, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(r) })
        })
        .collect();
    Ok(ConvergenceReport::new(
        ConvergenceKind::PairwiseIdentity,
        Some(x),
        Some(pxx),
        res,
        *tail.start(),
        residuals,
    ))
}

/// Every grid point that certifies as a tau(p)-limit. Two or more entries
/// exhibit the non-uniqueness of tau(p)-limits.
pub fn enumerate_tau_limits<S: PartialMetric + ?Sized>(
    trace: &SequenceTrace<'_, S>,
    grid: &[Point],
    window: usize,
    eps: f64,
) -> Result<Vec<(Point, ConvergenceReport)>> {
    if grid.is_empty() {
        return Err(Error::Argument("candidate grid must be nonempty".into()));
    }
    let mut out = Vec::new();
    for &x in grid {
        let report = analyze_tau_convergence(trace, x, window, eps)?;
        if report.certified() {
            out.push((x, report));
        }
    }
    Ok(out)
}

/// CSV export: `n, x_n, p(x,x_n), p(x_n,x_n)` with an anchor, or
/// `n, x_n, p(x_n,x_n)` without.
pub fn trace_csv<S: PartialMetric + ?Sized>(trace: &SequenceTrace<'_, S>, anchor: Option<Point>) -> Result<String> {
    if let Some(x) = anchor {
        trace.space.check_point(x)?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Argument(format!("csv: {e}"));
    match anchor {
        Some(_) => w.write_record(["n", "x_n", "p(x,x_n)", "p(x_n,x_n)"]),
        None => w.write_record(["n", "x_n", "p(x_n,x_n)"]),
    }
    .map_err(csv_err)?;
    for n in 1..=trace.horizon() {
        let xn = trace.point(n);
        let mut rec = vec![n.to_string(), format!("{:?}", xn.0)];
        if let Some(x) = anchor {
            rec.push(format!("{:?}", trace.p(x, xn)));
        }
        rec.push(format!("{:?}", trace.p(xn, xn)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Argument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
