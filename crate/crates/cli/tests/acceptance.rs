//! Acceptance criteria 1-7. Each test writes one PASS/FAIL line straight to
//! stdout (bypassing the test harness capture) and then asserts.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::process::Command;

use partial_metric::contraction::{
    audit_psi, check_condition_a, default_psi_grid, psi_decay, AuditedPsi, FnMap, PsiSpec, TableMap,
    VerdictKind, DEFAULT_DECAY_BUDGET, DEFAULT_RIGHT_LIMIT_STEPS,
};
use partial_metric::convergence::{
    analyze_proper_convergence, check_pairwise_limit_identity, enumerate_tau_limits, SequenceTrace,
};
use partial_metric::solver::{picard_solve, SolveOptions};
use partial_metric::space::audit_axioms;
use partial_metric::spaces::{make_finite_space, make_max_space};
use partial_metric::witness::{audit_witness, WitnessMap, DEFAULT_WITNESS_EPS};
use partial_metric::{Error, PartialMetricSpace, Point};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;

fn report(criterion: u8, pass: bool, detail: &str) {
    let line = format!(
        "acceptance {criterion}: {} - {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn all_pairs(n: usize) -> Vec<(Point, Point)> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (Point::index(i), Point::index(j))))
        .collect()
}

#[test]
fn criterion_1_halving_demo() {
    let s = make_max_space();
    let half = FnMap::scale(0.5);
    let opts = SolveOptions {
        max_iter: 40,
        eps: 1e-9,
        trace_horizon: 100,
        window: 32,
    };
    let cert = picard_solve(&s, &half, Point(1.0), opts).unwrap();
    let trace = SequenceTrace::new(&s, 100, |n| Point(0.5f64.powi(n as i32))).unwrap();
    let at_zero = analyze_proper_convergence(&trace, Point(0.0), 32, 1e-9).unwrap();
    let pairwise = check_pairwise_limit_identity(&trace, Point(0.0), 32, 1e-9).unwrap();

    let pass = cert.valid
        && cert.x_star.abs() <= 1e-9
        && cert.iterations <= 40
        && cert.proper.as_ref().is_some_and(|r| r.certified())
        && at_zero.certified()
        && pairwise.certified();
    report(
        1,
        pass,
        &format!(
            "x* = {:e} after {} iterations; proper residual at 0 = {:e}, pairwise = {:e}",
            cert.x_star, cert.iterations, at_zero.max_tail_residual, pairwise.max_tail_residual
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_axiom_suite() {
    let max = audit_axioms(&PartialMetricSpace::MaxReals, 10_000, 7, 0.0).unwrap();
    let punct = audit_axioms(&PartialMetricSpace::PuncturedInterval, 10_000, 7, 0.0).unwrap();

    let mut rng = StdRng::seed_from_u64(2);
    let mut accepted = 0;
    let mut rejected_ok = 0;
    for k in 0..50 {
        let rows = random_valid_table(1 + k % 8, &mut rng);
        if make_finite_space(rows.clone()).is_ok() {
            accepted += 1;
        }
        let rows = if rows.len() < 2 { random_valid_table(2 + k % 7, &mut rng) } else { rows };
        let (bad, _) = perturb(&rows, &mut rng);
        if let Err(Error::Rejected(vs)) = make_finite_space(bad.clone()) {
            let confirmed = vs.iter().all(|v| {
                let w: Vec<usize> = v.witness.iter().map(|p| p.0 as usize).collect();
                oracle_confirms(&bad, &v.axiom.to_string(), &w)
            });
            if !vs.is_empty() && confirmed {
                rejected_ok += 1;
            }
        }
    }

    let pass = max.passed && punct.passed && accepted == 50 && rejected_ok == 50;
    report(
        2,
        pass,
        &format!(
            "violations max={} punctured={}; valid tables accepted {accepted}/50; perturbations rejected with confirmed witnesses {rejected_ok}/50",
            max.violations.len(),
            punct.violations.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_tau_vs_proper_limits() {
    let s = make_max_space();
    // the proper limit 0 needs 1/n < 1e-6 across the whole tail window
    let trace = SequenceTrace::new(&s, 2_000_000, |n| Point(1.0 / n as f64)).unwrap();
    let grid = [0.1, 0.25, 0.5, 1.0].map(Point);
    let tau = enumerate_tau_limits(&trace, &grid, 64, 1e-6).unwrap();
    let proper: Vec<f64> = [0.0, 0.1, 0.25, 0.5, 1.0]
        .into_iter()
        .filter(|&x| analyze_proper_convergence(&trace, Point(x), 64, 1e-6).unwrap().certified())
        .collect();

    let tau_pts: Vec<f64> = tau.iter().map(|(p, _)| p.0).collect();
    let pass = tau_pts == vec![0.1, 0.25, 0.5, 1.0] && proper == vec![0.0];
    report(3, pass, &format!("tau-limits {tau_pts:?}; proper limits {proper:?}"));
    assert!(pass);
}

#[test]
fn criterion_4_truncation_soundness() {
    let gauges = [0.5, 1.0 / 3.0, 0.9].map(|r| (r, AuditedPsi::new(PsiSpec::linear(r)).unwrap()));
    let mut rng = StdRng::seed_from_u64(4);
    let (mut instances, mut satisfied, mut disagreements) = (0, 0, 0);
    for k in 0..300 {
        let n = rng.gen_range(1..=6);
        let rows = random_valid_table(n, &mut rng);
        let map = if k % 2 == 0 { random_map(n, &mut rng) } else { sink_biased_map(n, &mut rng) };
        let (r, psi) = &gauges[rng.gen_range(0..3)];
        let space = make_finite_space(rows.clone()).unwrap();
        let f = TableMap::new(map.clone()).unwrap();
        let v = check_condition_a(&space, &f, psi, &all_pairs(n), 8).unwrap();
        instances += 1;
        for rec in &v.records {
            let exact = within(rec.p_fxfy, r * exact_diameter(&rows, &map, rec.x as usize, rec.y as usize));
            if rec.verdict == VerdictKind::Satisfied {
                satisfied += 1;
                if !exact {
                    disagreements += 1;
                }
            }
        }
    }

    let pass = instances >= 200 && disagreements == 0;
    report(
        4,
        pass,
        &format!("{instances} instances, {satisfied} satisfied pairs, {disagreements} disagreements with the exact closure"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_witness_suite() {
    let w = WitnessMap::new();
    let a = audit_witness(&w, 10_000, 7, DEFAULT_WITNESS_EPS, 64).unwrap();
    let cli = Command::new(env!("CARGO_BIN_EXE_pmfix"))
        .args(["witness", "--samples", "10000", "--seed", "7"])
        .output()
        .unwrap();

    let c = a.checks;
    let pass = c.no_fixed_point
        && c.contraction_to_u
        && a.worst_margins.contraction_to_u >= 0.0
        && c.bound_iii
        && c.condition_b
        && c.finiteness
        && a.passed
        && cli.status.code() == Some(0);
    report(
        5,
        pass,
        &format!(
            "b={} r={}; margins: to_u {:e}, bound_iii {:e}, condition_b {:e}, finiteness {:e}; cli exit {:?}",
            a.b,
            a.r,
            a.worst_margins.contraction_to_u,
            a.worst_margins.bound_iii,
            a.worst_margins.condition_b,
            a.worst_margins.finiteness,
            cli.status.code()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_uniqueness_under_condition_a() {
    let gauges = [0.5, 1.0 / 3.0, 0.9].map(|r| AuditedPsi::new(PsiSpec::linear(r)).unwrap());
    let mut rng = StdRng::seed_from_u64(6);
    let (mut tried, mut qualifying, mut agreeing) = (0, 0, 0);
    while qualifying < 100 && tried < 20_000 {
        tried += 1;
        let n = rng.gen_range(1..=6);
        let rows = random_valid_table(n, &mut rng);
        let map = if tried % 4 == 0 { random_map(n, &mut rng) } else { sink_biased_map(n, &mut rng) };
        let space = make_finite_space(rows).unwrap();
        let f = TableMap::new(map.clone()).unwrap();
        let psi = &gauges[rng.gen_range(0..3)];
        if !check_condition_a(&space, &f, psi, &all_pairs(n), 8).unwrap().satisfied() {
            continue;
        }
        qualifying += 1;

        let brute = brute_fixed_points(&map);
        let stars: Vec<Option<f64>> = (0..n)
            .map(|i| {
                let c = picard_solve(&space, &f, Point::index(i), SolveOptions::default()).unwrap();
                c.valid.then_some(c.x_star)
            })
            .collect();
        let common = stars[0];
        if brute.len() == 1 && stars.iter().all(|&s| s == common && s == Some(brute[0] as f64)) {
            agreeing += 1;
        }
    }

    let pass = qualifying >= 50 && agreeing == qualifying;
    report(
        6,
        pass,
        &format!("{qualifying} table/map pairs pass condition (a) (of {tried} drawn); {agreeing} reach the unique brute-force fixed point from every start"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_gauge_decay_and_rejection() {
    let members = [
        PsiSpec::linear(0.5),
        PsiSpec::linear(0.9),
        PsiSpec::rational(),
    ];
    let mut notes = Vec::new();
    let mut decay_ok = true;
    for psi in &members {
        let run = psi_decay(psi, 100.0, 100_000);
        decay_ok &= run.reached;
        notes.push(format!(
            "{}: {} after {} steps",
            psi.label(),
            if run.reached { "below 1e-9".to_string() } else { format!("still {:e}", run.final_value) },
            run.iterations
        ));
    }

    let grid = default_psi_grid();
    let mut rejected_ok = true;
    for psi in [PsiSpec::new("t", |t| t), PsiSpec::new("sqrt(t)", f64::sqrt)] {
        let a = audit_psi(&psi, &grid, DEFAULT_RIGHT_LIMIT_STEPS, DEFAULT_DECAY_BUDGET).unwrap();
        rejected_ok &= !a.passed && !a.failures.is_empty();
        let first = a.failures.first().map(|f| format!("{:?} at t = {:e}", f.check, f.t));
        notes.push(format!("{} rejected: {}", psi.label(), first.unwrap_or_else(|| "no".into())));
    }

    let pass = decay_ok && rejected_ok;
    report(7, pass, &notes.join("; "));
    assert!(pass);
}
