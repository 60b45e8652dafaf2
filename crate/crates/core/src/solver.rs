//! Picard iteration with fixed-point certificates.
//!
//! In a partial metric, `p(x, fx)` being small does not make `fx = x`: the
//! self-distances get in the way. Equality is decided by pm1 instead, so the
//! solver's stopping rule and its certificate both use the triple residual
//! `max(|p(x,x) - p(x,fx)|, |p(fx,fx) - p(x,fx)|)`.

use serde::{Deserialize, Serialize};

use crate::contraction::{orbit_diameter, SelfMap, DEFAULT_DIAMETER_CAP};
use crate::convergence::{analyze_proper_convergence, ConvergenceReport, SequenceTrace};
use crate::error::{Error, Result};
use crate::space::{PartialMetric, Point};

/// Truncation depth for the orbit diameter estimate at the candidate.
pub const ORBIT_RESIDUAL_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub eps: f64,
    /// Horizon `N` of the iterate trace used for the proper-convergence report.
    pub trace_horizon: usize,
    /// Tail window `W` of that report.
    pub window: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            eps: 1e-9,
            trace_horizon: 100,
            window: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCertificate {
    pub x_star: f64,
    pub iterations: usize,
    pub triple_residual: f64,
    pub self_distance: f64,
    /// Diameter of `O(x*, f)` truncated at [`ORBIT_RESIDUAL_DEPTH`]; zero for
    /// an exact fixed point with zero self-distance.
    pub orbit_residual: f64,
    /// Proper convergence of `f^n x0` to `x*`, attached on success.
    pub proper: Option<ConvergenceReport>,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCheck {
    pub holds: bool,
    pub residual: f64,
}

fn triple_residual<S: PartialMetric + ?Sized>(space: &S, x: Point, fx: Point) -> f64 {
    let pxf = space.eval_unchecked(x, fx);
    let a = (space.eval_unchecked(x, x) - pxf).abs();
    let b = (space.eval_unchecked(fx, fx) - pxf).abs();
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

/// pm1 applied to `(x, fx)`: holds iff both triple gaps are below `eps`.
pub fn verify_fixed_point<S, M>(space: &S, f: &M, x: Point, eps: f64) -> Result<FixedPointCheck>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    space.check_point(x)?;
    let fx = f.apply(x)?;
    space.check_point(fx)?;
    let residual = triple_residual(space, x, fx);
    Ok(FixedPointCheck {
        holds: residual < eps,
        residual,
    })
}

/// Iterates `x_{n+1} = f(x_n)` from `x0`.
///
/// Stops at the first `x_n` whose triple residual is below `eps` and proposes
/// the freshest iterate `f(x_n)` as the candidate (falling back to `x_n` if
/// the candidate's own residual is not below `eps`). On success the trace
/// `f^1 x0, ..., f^N x0` is checked for proper convergence to the candidate.
/// When the budget runs out the certificate is returned invalid, carrying the
/// iterate with the smallest residual seen.
pub fn picard_solve<S, M>(space: &S, f: &M, x0: Point, opts: SolveOptions) -> Result<FixedPointCertificate>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    if opts.max_iter == 0 {
        return Err(Error::Argument("max_iter must be at least 1".into()));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::Argument(format!("eps must be positive, got {}", opts.eps)));
    }
    space.check_point(x0)?;

    let step = |x: Point, index: usize| -> Result<Point> {
        let y = f.apply(x).map_err(|e| Error::IterateEscaped {
            index,
            source: Box::new(e),
        })?;
        space.check_point(y).map_err(|e| Error::IterateEscaped {
            index,
            source: Box::new(e),
        })?;
        Ok(y)
    };

    let mut x = x0;
    let mut best = (f64::INFINITY, x0, 0usize);
    let mut found: Option<(Point, usize, f64)> = None;
    for n in 0..opts.max_iter {
        let fx = step(x, n + 1)?;
        let r = triple_residual(space, x, fx);
        if r < best.0 {
            best = (r, x, n);
        }
        if r < opts.eps {
            // prefer the freshest iterate when it certifies too
            let ffx = step(fx, n + 2)?;
            let r_fresh = triple_residual(space, fx, ffx);
            found = Some(if r_fresh < opts.eps { (fx, n + 1, r_fresh) } else { (x, n, r) });
            break;
        }
        x = fx;
    }

    let Some((x_star, iterations, residual)) = found else {
        let (r, xb, _) = best;
        return Ok(FixedPointCertificate {
            x_star: xb.0,
            iterations: opts.max_iter,
            triple_residual: r,
            self_distance: space.eval_unchecked(xb, xb),
            orbit_residual: orbit_residual(space, f, xb)?,
            proper: None,
            valid: false,
        });
    };

    let mut iterates = Vec::with_capacity(opts.trace_horizon);
    let mut cur = x0;
    for n in 1..=opts.trace_horizon {
        cur = step(cur, n)?;
        iterates.push(cur);
    }
    let trace = SequenceTrace::from_points(space, iterates)?;
    let proper = analyze_proper_convergence(&trace, x_star, opts.window, opts.eps)?;

    Ok(FixedPointCertificate {
        x_star: x_star.0,
        iterations,
        triple_residual: residual,
        self_distance: space.eval_unchecked(x_star, x_star),
        orbit_residual: orbit_residual(space, f, x_star)?,
        proper: Some(proper),
        valid: true,
    })
}

fn orbit_residual<S, M>(space: &S, f: &M, x: Point) -> Result<f64>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    Ok(orbit_diameter(space, f, x, None, ORBIT_RESIDUAL_DEPTH, DEFAULT_DIAMETER_CAP)?.diameter())
}

/// `sup_m p(x, f^m x)` over the truncated orbit. For a fixed point of a map
/// satisfying the orbital conditions this equals the orbit diameter.
pub fn seed_anchored_sup<S, M>(space: &S, f: &M, x: Point, depth: usize) -> Result<f64>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    let rec = orbit_diameter(space, f, x, None, depth, f64::INFINITY)?;
    Ok(rec
        .orbit(0)
        .iter()
        .map(|&q| space.eval_unchecked(x, q))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub inner_depth: usize,
    /// `d_n = delta(O(x_n, y_n, f))`, truncated, for `n = 0..=depth`.
    pub diameters: Vec<f64>,
    /// `p(x_n, y_n)` for the same `n`.
    pub cross: Vec<f64>,
}

/// Follows two seeds side by side and records how the joint orbit diameter
/// and the cross distance shrink.
pub fn dual_seed_diagnostic<S, M>(
    space: &S,
    f: &M,
    x0: Point,
    y0: Point,
    depth: usize,
    inner_depth: usize,
) -> Result<DecayTrace>
where
    S: PartialMetric + ?Sized,
    M: SelfMap + ?Sized,
{
    if depth == 0 {
        return Err(Error::Argument("diagnostic depth must be at least 1".into()));
    }
    let mut diameters = Vec::with_capacity(depth + 1);
    let mut cross = Vec::with_capacity(depth + 1);
    let (mut x, mut y) = (x0, y0);
    for n in 0..=depth {
        let rec = orbit_diameter(space, f, x, Some(y), inner_depth, f64::INFINITY)?;
        diameters.push(rec.diameter());
        cross.push(space.eval_unchecked(x, y));
        if n < depth {
            // f^1 of each seed is already in the record when inner_depth > 0
            (x, y) = if inner_depth > 0 {
                (rec.orbit(0)[1], rec.orbit(1)[1])
            } else {
                (f.apply(x)?, f.apply(y)?)
            };
        }
    }
    Ok(DecayTrace {
        inner_depth,
        diameters,
        cross,
    })
}
