//! Built-in spaces and validation of user-supplied finite ones.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{PartialMetric, PartialMetricSpace, Point};
use crate::table::FiniteTable;

/// `([0, inf), max)`. Complete; every point has self-distance equal to itself.
pub fn make_max_space() -> PartialMetricSpace {
    PartialMetricSpace::MaxReals
}

/// The incomplete space `((0, 1], max)` together with the point `u = 0` that
/// only exists in its completion.
pub fn make_punctured_interval() -> CompletionView {
    CompletionView {
        base: PartialMetricSpace::PuncturedInterval,
        u: Point(0.0),
    }
}

/// Validates `rows` exhaustively and wraps it as a finite space. On failure
/// the error carries every violated axiom with witnesses.
pub fn make_finite_space(rows: Vec<Vec<f64>>) -> Result<PartialMetricSpace> {
    from_table(FiniteTable::from_rows(rows)?)
}

pub fn from_table(table: FiniteTable) -> Result<PartialMetricSpace> {
    let violations = table.validate();
    if violations.is_empty() {
        Ok(PartialMetricSpace::Finite(table))
    } else {
        Err(Error::Rejected(violations))
    }
}

#[cfg(test)]
pub(crate) fn make_finite_space_unchecked(rows: Vec<Vec<f64>>) -> PartialMetricSpace {
    PartialMetricSpace::Finite(FiniteTable::from_rows(rows).unwrap())
}

/// A base space seen from inside its completion: the base carrier plus one
/// extra point `u` that is missing from the base.
///
/// Evaluation extends the base evaluator: on base pairs it agrees exactly, and
/// `p(x, u)` is the limit of `p(x, x_i)` along the canonical Cauchy sequence
/// `x_i = 1/i`, which under `max` is `x` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionView {
    base: PartialMetricSpace,
    u: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionSidecar {
    pub u: f64,
    pub self_distance: f64,
}

impl CompletionView {
    pub fn base(&self) -> &PartialMetricSpace {
        &self.base
    }

    /// The point added by the completion.
    pub fn u(&self) -> Point {
        self.u
    }

    pub fn is_extra(&self, x: Point) -> bool {
        x == self.u
    }

    /// `x_i = 1/i` for `i >= 1`; properly converges to `u` in the completion.
    pub fn canonical_point(&self, i: u64) -> Point {
        assert!(i >= 1, "canonical sequence is indexed from 1");
        Point(1.0 / i as f64)
    }

    pub fn sidecar(&self) -> CompletionSidecar {
        CompletionSidecar {
            u: self.u.0,
            self_distance: self.eval_unchecked(self.u, self.u),
        }
    }
}

impl PartialMetric for CompletionView {
    fn label(&self) -> String {
        format!("completion of {} with u = {}", self.base.label(), self.u)
    }

    fn check_point(&self, x: Point) -> Result<()> {
        if self.is_extra(x) {
            return Ok(());
        }
        self.base.check_point(x).map_err(|e| match e {
            Error::Domain { value, bound, .. } => Error::Domain {
                carrier: self.label(),
                value,
                bound: format!("{bound}, or x = u"),
            },
            other => other,
        })
    }

    fn eval_unchecked(&self, x: Point, y: Point) -> f64 {
        // max extends continuously to 0, so no special case is needed
        // beyond the base formula.
        x.0.max(y.0)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        self.base.sample(rng)
    }
}
