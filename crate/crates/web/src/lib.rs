//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string; failures come back as `{"error": "..."}` so the page never has to
//! catch exceptions.

use partial_metric::contraction::FnMap;
use partial_metric::convergence::{analyze_proper_convergence, analyze_tau_convergence, SequenceTrace};
use partial_metric::solver::{picard_solve, SolveOptions};
use partial_metric::witness::WitnessMap;
use partial_metric::{PartialMetricSpace, Point, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("plain data serializes"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Serialize)]
struct Solve {
    iterates: Vec<f64>,
    x_star: f64,
    iterations: usize,
    triple_residual: f64,
    valid: bool,
    proper_certified: bool,
}

/// Picard iteration of `t -> r t` on `([0, inf), max)` from `x0`.
#[wasm_bindgen]
pub fn solve_scaled(r: f64, x0: f64, eps: f64, max_iter: u32) -> String {
    to_json((|| {
        if !(0.0..=10.0).contains(&r) {
            return Err(partial_metric::Error::Argument(format!("ratio {r} outside [0, 10]")));
        }
        let space = PartialMetricSpace::MaxReals;
        let f = FnMap::scale(r);
        let opts = SolveOptions {
            max_iter: max_iter as usize,
            eps,
            ..SolveOptions::default()
        };
        let cert = picard_solve(&space, &f, Point(x0), opts)?;
        let shown = cert.iterations.min(200);
        let iterates = std::iter::successors(Some(x0), |&x| Some(r * x)).take(shown + 1).collect();
        Ok(Solve {
            iterates,
            x_star: cert.x_star,
            iterations: cert.iterations,
            triple_residual: cert.triple_residual,
            valid: cert.valid,
            proper_certified: cert.proper.as_ref().is_some_and(|p| p.certified()),
        })
    })())
}

#[derive(Serialize)]
struct Candidate {
    x: f64,
    tau: bool,
    tau_residual: f64,
    proper: bool,
    proper_residual: f64,
}

/// For `x_n = 1/n` on `([0, inf), max)`, which grid points are tau-limits and
/// which are proper limits at resolution `(horizon, window, eps)`.
#[wasm_bindgen]
pub fn harmonic_limits(horizon: u32, window: u32, eps: f64, grid: &[f64]) -> String {
    to_json((|| {
        if horizon > 5_000_000 {
            return Err(partial_metric::Error::Argument("horizon capped at 5e6 in the browser".into()));
        }
        let space = PartialMetricSpace::MaxReals;
        let trace = SequenceTrace::new(&space, horizon as usize, |n| Point(1.0 / n as f64))?;
        grid.iter()
            .map(|&x| {
                let tau = analyze_tau_convergence(&trace, Point(x), window as usize, eps)?;
                let proper = analyze_proper_convergence(&trace, Point(x), window as usize, eps)?;
                Ok(Candidate {
                    x,
                    tau: tau.certified(),
                    tau_residual: tau.max_tail_residual,
                    proper: proper.certified(),
                    proper_residual: proper.max_tail_residual,
                })
            })
            .collect::<Result<Vec<_>>>()
    })())
}

#[derive(Serialize)]
struct OrbitStep {
    x: f64,
    level: i64,
}

/// The orbit of `x` under the fixed-point-free map on `((0, 1], max)`, with
/// the shell level of each point.
#[wasm_bindgen]
pub fn witness_orbit(x: f64, steps: u32) -> String {
    to_json((|| {
        let w = WitnessMap::new();
        let mut out = Vec::new();
        let mut cur = Point(x);
        for _ in 0..=steps.min(100) {
            out.push(OrbitStep {
                x: cur.0,
                level: w.partition_index(cur)?,
            });
            cur = w.apply_witness(cur)?;
        }
        Ok(out)
    })())
}
