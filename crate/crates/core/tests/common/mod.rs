//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's checkers: tables are built from a metric
//! plus weights, axioms are re-evaluated from the raw rows, and orbit
//! closures are enumerated with a plain set.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;

pub type Rows = Vec<Vec<f64>>;

/// Shortest-path metric on a random complete graph with weights in
/// `{1/4, 2/4, ..., 2}`. Dyadic entries keep every sum exact.
fn random_metric(n: usize, rng: &mut StdRng) -> Rows {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=8) as f64 / 4.0;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// A random partial metric on `n` points. Two families are mixed:
/// `d(i,j) + max(w_i, w_j)`, and `(d(i,j) + w_i + w_j) / 2` with `w` on two
/// adjacent levels so it stays 1-Lipschitz against `d`. Some weights are zero
/// so that maps with a zero-self-distance sink are common.
pub fn random_valid_table(n: usize, rng: &mut StdRng) -> Rows {
    loop {
        let d = random_metric(n, rng);
        let w: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0..=8) as f64 / 4.0 })
            .collect();
        let rows: Rows = if rng.gen_bool(0.5) {
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { w[i] } else { d[i][j] + w[i].max(w[j]) }).collect())
                .collect()
        } else {
            // distances are at least 1/4, so weights one level apart stay
            // 1-Lipschitz
            let base = w[0];
            let w: Vec<f64> = (0..n).map(|_| base + if rng.gen_bool(0.5) { 0.25 } else { 0.0 }).collect();
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { w[i] } else { (d[i][j] + w[i] + w[j]) / 2.0 }).collect())
                .collect()
        };
        if oracle_valid(&rows) {
            return rows;
        }
    }
}

/// Does the witness list name a real violation of `axiom` in `rows`?
pub fn oracle_confirms(rows: &Rows, axiom: &str, witness: &[usize]) -> bool {
    let p = |i: usize, j: usize| rows[i][j];
    match (axiom, witness) {
        // either ordering of the pair may carry the collapse
        ("pm1", &[a, b]) => {
            let collapses = |x, y| p(x, x) == p(x, y) && p(x, y) == p(y, y);
            a != b && (collapses(a, b) || collapses(b, a))
        }
        ("pm2", &[a, b]) => p(a, a) < 0.0 || p(a, b) < 0.0 || p(a, a) > p(a, b),
        ("pm3", &[a, b]) => p(a, b) != p(b, a),
        ("pm4", &[x, y, z]) => p(x, y) + p(z, z) > p(x, z) + p(z, y),
        _ => false,
    }
}

/// Exhaustive axiom check, exact arithmetic on the raw rows.
pub fn oracle_valid(rows: &Rows) -> bool {
    let n = rows.len();
    for a in 0..n {
        for b in 0..n {
            for ax in ["pm1", "pm2", "pm3"] {
                if oracle_confirms(rows, ax, &[a, b]) {
                    return false;
                }
            }
            for c in 0..n {
                if oracle_confirms(rows, "pm4", &[a, b, c]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Changes one entry of a valid table so that it becomes invalid.
pub fn perturb(rows: &Rows, rng: &mut StdRng) -> (Rows, (usize, usize)) {
    let n = rows.len();
    loop {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let mut out = rows.clone();
        let delta = rng.gen_range(1..=12) as f64 / 4.0;
        out[i][j] = if rng.gen_bool(0.5) { rows[i][j] + delta } else { rows[i][j] - delta };
        if !oracle_valid(&out) {
            return (out, (i, j));
        }
    }
}

pub fn random_map(n: usize, rng: &mut StdRng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// A map that sends most points toward a random sink. Such maps pass the
/// orbital condition far more often than uniform ones.
pub fn sink_biased_map(n: usize, rng: &mut StdRng) -> Vec<usize> {
    let sink = rng.gen_range(0..n);
    (0..n)
        .map(|i| {
            if i == sink || rng.gen_bool(0.7) {
                sink
            } else {
                rng.gen_range(0..n)
            }
        })
        .collect()
}

/// Every point reachable from `seeds` under `map`, the full orbit closure.
pub fn orbit_closure(map: &[usize], seeds: &[usize]) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    for &s in seeds {
        let mut x = s;
        while seen.insert(x) {
            x = map[x];
        }
    }
    seen
}

/// Exact `delta(O(x, y, f))` on a finite table.
pub fn exact_diameter(rows: &Rows, map: &[usize], x: usize, y: usize) -> f64 {
    let set: Vec<usize> = orbit_closure(map, &[x, y]).into_iter().collect();
    let mut d = 0.0f64;
    for &a in &set {
        for &b in &set {
            d = d.max(rows[a][b]);
        }
    }
    d
}

/// Fixed points by enumeration.
pub fn brute_fixed_points(map: &[usize]) -> Vec<usize> {
    (0..map.len()).filter(|&i| map[i] == i).collect()
}

/// Comparison with the same relative slack the checkers document for
/// irrational gauge constants such as 0.9.
pub fn within(lhs: f64, bound: f64) -> bool {
    lhs <= bound + 1e-12 * bound.abs()
}
