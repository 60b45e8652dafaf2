//! Finite partial-metric tables: storage, the plain-text file format, and
//! exhaustive axiom validation.
//!
//! File format: the first line holds `n`, followed by `n` lines of `n`
//! whitespace-separated decimal values.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::space::{check_pair, pm4_residual, Axiom, PartialMetricSpace, Point, Violation};

/// Largest table accepted for exhaustive validation.
pub const MAX_TABLE_SIZE: usize = 512;

/// At most this many witnesses are listed per axiom in a rejection.
pub const MAX_WITNESSES_PER_AXIOM: usize = 64;

/// Relative slack for pm4 on tables, absorbing decimal-to-binary rounding in
/// the two sums. pm1-pm3 involve no arithmetic and are checked exactly.
pub const TABLE_PM4_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTable {
    n: usize,
    values: Vec<f64>,
}

impl FiniteTable {
    /// Builds a table from rows without validating the axioms.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Argument("table must have at least one row".into()));
        }
        if n > MAX_TABLE_SIZE {
            return Err(Error::Argument(format!(
                "table size {n} exceeds the validation cap {MAX_TABLE_SIZE}"
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Argument(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Argument(format!("row {i} contains non-finite value {v}")));
            }
            values.extend(row);
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Parse(format!("first line must be the table size, got `{header}`")))?;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("expected {n} rows, found {i}")))?;
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {i}: `{tok}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected trailing line `{extra}`")));
        }
        Self::from_rows(rows).map_err(|e| match e {
            Error::Argument(msg) => Error::Parse(msg),
            other => other,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serializes in the file format. Values use the shortest representation
    /// that parses back to the same float.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.values.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", cells.join(" "));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    }

    /// Exhaustive check of pm1-pm3 over all pairs and pm4 over all `n^3`
    /// triples. Returns every violated axiom with up to
    /// [`MAX_WITNESSES_PER_AXIOM`] witnesses each.
    pub fn validate(&self) -> Vec<Violation> {
        // Evaluate against a bare view so the checks see raw table values.
        let view = PartialMetricSpace::Finite(self.clone());
        let mut found = Vec::new();
        let mut counts = [0usize; 4];
        let mut push = |v: Violation, found: &mut Vec<Violation>| {
            let slot = v.axiom as usize;
            counts[slot] += 1;
            if counts[slot] <= MAX_WITNESSES_PER_AXIOM {
                found.push(v);
            }
        };

        for i in 0..self.n {
            for j in i..self.n {
                let mut local = Vec::new();
                check_pair(&view, Point::index(i), Point::index(j), 0.0, &mut local);
                if self.get(i, j) < 0.0 {
                    local.push(Violation {
                        axiom: Axiom::Pm2,
                        witness: vec![Point::index(i), Point::index(j)],
                        residual: -self.get(i, j),
                    });
                }
                for v in local {
                    push(v, &mut found);
                }
            }
        }

        let tol = TABLE_PM4_TOL * self.scale();
        for x in 0..self.n {
            for y in 0..self.n {
                for z in 0..self.n {
                    let (px, py, pz) = (Point::index(x), Point::index(y), Point::index(z));
                    let r = pm4_residual(&view, px, py, pz);
                    if r > tol {
                        push(
                            Violation {
                                axiom: Axiom::Pm4,
                                witness: vec![px, py, pz],
                                residual: r,
                            },
                            &mut found,
                        );
                    }
                }
            }
        }
        found.sort_by_key(|v| v.axiom);
        found
    }
}
