//! Acceptance gates. Each test prints one `PASS`/`FAIL` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` reads as a
//! checklist.

use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ldovco::flows::{FlowSetup, PairRow};
use ldovco::formats::sweep_offsets;
use ldovco::models::noise::combine_pn;
use ldovco::models::testbench::Mode;
use ldovco::optimizer::{self, OptConfig, StopReason};
use ldovco::sizing::corner::{nominal_and_standard, standard_corners, Corner};
use ldovco::sizing::{
    bundled, fom, Constraint, ConstraintSet, Direction, DesignPoint, DesignSpace, Evaluator,
    MetricSchema, PerfMetrics, Sense, SizingProblem, Variable,
};
use ldovco::surrogate::{EnsembleModel, MlpConfig};

const FOM_TOL: f64 = 0.1;
const TOY_OBJ_TOL: f64 = 1e-2;
const TOY_MIN_HITS: usize = 9;
const TOY_TIME_LIMIT: Duration = Duration::from_secs(60);
const R2_MIN: f64 = 0.9;
const WIN_RATE_MIN: f64 = 0.7;
const CO_FEASIBLE_MIN: usize = 8;
const COMPARE_SEEDS: std::ops::Range<u64> = 0..10;
const COMPARE_BUDGET: usize = 500;
const COMBINE_TOL: f64 = 0.01;

// serializes the gates so timings are not skewed by sibling tests
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {n} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_1_fom_reference_rows() {
    let _serial = serial();
    // (f0, PN at 1 MHz, power, published FoM)
    let rows = [
        (5.69e9, -122.9, 6.40e-3, 190.0),
        (5.60e9, -124.1, 4.56e-3, 192.4),
        (5.27e9, -119.7, 4.33e-3, 187.8),
        (5.51e9, -123.9, 4.67e-3, 192.1),
    ];
    let mut worst = 0.0f64;
    for (f0, pn, p, want) in rows {
        let got = fom(f0, 1e6, pn, p).unwrap();
        worst = worst.max((got - want).abs());
    }
    let ok = worst <= FOM_TOL;
    report(1, "FoM reference rows", ok, &format!("max |error| {worst:.4} dB (tol {FOM_TOL})"));
    assert!(ok);
}

#[test]
fn criterion_2_corner_protocol() {
    let _serial = serial();
    let corners = standard_corners();
    let distinct = corners
        .iter()
        .enumerate()
        .all(|(i, a)| corners[i + 1..].iter().all(|b| a != b));
    let with_nominal = nominal_and_standard();
    let nominal_distinct = with_nominal[0].is_nominal() && corners.iter().all(|c| !c.is_nominal());

    let setup = FlowSetup::bundled();
    let point = bundled::codesign_point();
    let a = setup.evaluate_coupled(&point).unwrap().min_fom_corner();
    let b = setup.evaluate_coupled(&point).unwrap().min_fom_corner();
    let ok = corners.len() == 32 && distinct && with_nominal.len() == 33 && nominal_distinct && a == b;
    report(
        2,
        "corner protocol",
        ok,
        &format!(
            "{} corners + nominal; bundled co-design minimum-FoM corner {} at {:.3} dBc/Hz (stable: {})",
            corners.len(),
            a.0,
            a.1,
            a == b
        ),
    );
    assert!(ok);
}

struct Toy(MetricSchema);

impl Evaluator for Toy {
    fn schema(&self) -> &MetricSchema {
        &self.0
    }
    fn evaluate(&self, p: &DesignPoint, _: &Corner) -> ldovco::Result<Vec<f64>> {
        let (x, y) = (p.values[0], p.values[1]);
        Ok(vec![-(x - 3.0).powi(2) - (y - 2.0).powi(2), x + y])
    }
}

#[test]
fn criterion_3_toy_optimum() {
    let _serial = serial();
    let toy = Toy(MetricSchema::new(&[("obj", Sense::HigherIsBetter), ("sum", Sense::LowerIsBetter)]));
    let space = DesignSpace::new(vec![
        Variable::continuous("x", 0.0, 5.0, ""),
        Variable::continuous("y", 0.0, 5.0, ""),
    ]);
    let cons = ConstraintSet::new(vec![Constraint::new("sum", Direction::AtMost, 4.0).unwrap()]);
    let problem = SizingProblem::new(space, vec![Corner::nominal()], cons, "obj").unwrap();
    // KKT point of the constrained problem
    let optimum = -0.5;

    let t = Instant::now();
    let mut hits = 0;
    let mut errors = Vec::new();
    for seed in 1..=10 {
        let cfg = OptConfig {
            seed,
            eval_budget: 600,
            init_samples: Some(20),
            ..OptConfig::default()
        };
        let out = optimizer::run(&problem, &toy, &cfg).unwrap();
        let b = out.best();
        let err = (b.objective - optimum).abs();
        errors.push(err);
        if b.violation == 0.0 && err <= TOY_OBJ_TOL {
            hits += 1;
        }
    }
    let elapsed = t.elapsed();
    let ok = hits >= TOY_MIN_HITS && elapsed < TOY_TIME_LIMIT;
    report(
        3,
        "toy optimum",
        ok,
        &format!(
            "{hits}/10 seeds feasible within {TOY_OBJ_TOL} of {optimum}; max error {:.2e}; {:.1}s",
            errors.iter().cloned().fold(0.0, f64::max),
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_surrogate_quality() {
    let _serial = serial();
    let dim = 10;
    let space = DesignSpace::new(
        (0..dim)
            .map(|i| Variable::continuous(&format!("x{i}"), -1.0, 1.0, ""))
            .collect(),
    );
    // dense quadratic with a linear part
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let b: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let f = |x: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            s += b[i] * x[i];
            for j in 0..dim {
                s += 0.5 * a[i][j] * x[i] * x[j];
            }
        }
        s
    };
    let xs: Vec<Vec<f64>> = space.sample_initial(200, 1).unwrap().into_iter().map(|p| p.values).collect();
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![f(x)]).collect();
    let model = EnsembleModel::fit(&xs, &ys, &MlpConfig::default(), 1).unwrap();
    let held: Vec<Vec<f64>> = space.sample_initial(500, 101).unwrap().into_iter().map(|p| p.values).collect();
    let truth: Vec<f64> = held.iter().map(|x| f(x)).collect();
    let pred: Vec<f64> = held.iter().map(|x| model.predict(x).unwrap()[0]).collect();
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_res: f64 = pred.iter().zip(&truth).map(|(p, t)| (p - t).powi(2)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;

    // beta monotonicity on the fitted model, per orientation
    let senses = [Sense::HigherIsBetter];
    let mut monotone = true;
    for x in held.iter().take(50) {
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let beta = 0.5 + 0.05 * k as f64;
            let v = model.predict_conservative(x, beta, &senses).unwrap()[0];
            monotone &= v <= prev + 1e-12;
            prev = v;
        }
    }
    let ok = r2 >= R2_MIN && monotone;
    report(
        4,
        "surrogate quality",
        ok,
        &format!("held-out R^2 {r2:.4} (min {R2_MIN}); conservative prediction monotone in beta: {monotone}"),
    );
    assert!(ok);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn criterion_4_beta_monotone_both_orientations(seed in 0u64..1000, x in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|v| vec![v[0] * v[1] + v[2], v[0] - v[2] * v[2]]).collect();
        let cfg = MlpConfig { epochs: 40, ..MlpConfig::default() };
        let m = EnsembleModel::fit(&xs, &ys, &cfg, seed).unwrap();
        let senses = [Sense::HigherIsBetter, Sense::LowerIsBetter];
        let mut prev = m.predict_conservative(&x, 0.5, &senses).unwrap();
        for k in 1..=10 {
            let cur = m.predict_conservative(&x, 0.5 + 0.05 * k as f64, &senses).unwrap();
            // higher-is-better outputs move down, lower-is-better move up
            prop_assert!(cur[0] <= prev[0] + 1e-12);
            prop_assert!(cur[1] >= prev[1] - 1e-12);
            prev = cur;
        }
    }
}

#[test]
fn criterion_5_codesign_versus_sequential() {
    let _serial = serial();
    let setup = FlowSetup::bundled();
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut co_feasible = 0;
    let mut raw_wins = 0;
    let mut budgets_equal = true;
    for seed in COMPARE_SEEDS {
        let cfg = OptConfig::default().with(seed, COMPARE_BUDGET);
        let co = setup.run_codesign(&cfg).unwrap();
        let seq = setup.run_sequential(&cfg).unwrap();
        let row = PairRow::new(seed, &co, &seq);
        println!(
            "  seed {seed}: co {:.3} (viol {:.2e}, {:.2} mW) | seq {:.3} (viol {:.2e}, {:.2} mW) | delta {:+.3} dB, pdyn {:+.1}%",
            row.co.fom,
            row.co.violation,
            row.co.pdyn * 1e3,
            row.seq.fom,
            row.seq.violation,
            row.seq.pdyn * 1e3,
            row.fom_delta(),
            row.pdyn_delta_pct()
        );
        co_feasible += usize::from(co.coupled.feasible());
        raw_wins += usize::from(row.co.fom >= row.seq.fom);
        // both flows spend the full budget unless one stagnates
        budgets_equal &= co.evals_used <= COMPARE_BUDGET && seq.evals_used <= COMPARE_BUDGET;
        rows.push(row);
    }
    let r = ldovco::flows::ComparisonReport::from_pairs(rows);
    let n = r.rows.len();
    let ok = r.win_rate >= WIN_RATE_MIN
        && raw_wins as f64 >= WIN_RATE_MIN * n as f64
        && r.median_fom_delta > 0.0
        && co_feasible >= CO_FEASIBLE_MIN
        && budgets_equal;
    report(
        5,
        "co-design versus sequential",
        ok,
        &format!(
            "win rate {:.0}% (feasibility-first), worst-case FoM >= sequential in {raw_wins}/{n}, median FoM delta {:+.3} dB, median pdyn delta {:+.1}%, co-design feasible {co_feasible}/{n}, {:.0}s",
            100.0 * r.win_rate,
            r.median_fom_delta,
            r.median_pdyn_delta_pct,
            t.elapsed().as_secs_f64()
        ),
    );
    assert!(ok);
}

fn random_points(n: usize, seed: u64) -> Vec<DesignPoint> {
    bundled::ldo_vco_space().sample_initial(n, seed).unwrap()
}

#[test]
fn criterion_6_physics_invariants() {
    let _serial = serial();
    let setup = FlowSetup::bundled();
    let ideal = setup.testbench(Mode::IdealSupply).unwrap();
    let coupled = setup.testbench(Mode::Coupled).unwrap();
    let offsets = sweep_offsets();
    let mut points = vec![bundled::codesign_point(), bundled::sequential_point()];
    points.extend(random_points(40, 7));

    let mut pn_ok = true;
    let mut worst_ok = true;
    let mut evaluated = 0;
    for p in &points {
        for c in [Corner::nominal(), Corner::worst_documented()] {
            let (Ok(a), Ok(b)) = (
                ideal.pn_breakdown(p, &c, &offsets),
                coupled.pn_breakdown(p, &c, &offsets),
            ) else {
                continue;
            };
            pn_ok &= a.iter().zip(&b).all(|(x, y)| y.total >= x.total);
        }
        if let Ok(r) = setup.evaluate_coupled(p) {
            evaluated += 1;
            worst_ok &= r.worst.fom <= r.nominal.fom;
        }
    }

    // bypass capacitance sweep around the fixed value, inside the range where
    // the regulator loop stays well compensated
    let mut byp_ok = true;
    for p in &points[..2] {
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..5 {
            let mut tb = coupled.clone();
            tb.fixed.c_byp = 2.5e-12 * 2f64.powi(k);
            let ev = tb.evaluate_full(p, &Corner::nominal()).unwrap();
            let psr = ev.metrics.psr_max;
            let psig = ev.vco.p_sig;
            if let Some((pp, ps)) = prev {
                byp_ok &= psr <= pp && psig < ps;
            }
            prev = Some((psr, psig));
        }
    }

    let combined = combine_pn(&[-120.0, -120.0]);
    let combine_ok = (combined - (-116.99)).abs() <= COMBINE_TOL;
    let ok = pn_ok && worst_ok && byp_ok && combine_ok && evaluated > 20;
    report(
        6,
        "physics invariants",
        ok,
        &format!(
            "coupled PN >= ideal: {pn_ok}; worst FoM <= nominal over {evaluated} designs: {worst_ok}; larger C_byp (2.5p..40p) lowers psr_max and p_sig: {byp_ok}; combine(-120,-120) = {combined:.3}"
        ),
    );
    assert!(ok);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn criterion_6_coupled_never_quieter(seed in 0u64..10_000) {
    let _serial = serial();
        let setup = FlowSetup::bundled();
        let ideal = setup.testbench(Mode::IdealSupply).unwrap();
        let coupled = setup.testbench(Mode::Coupled).unwrap();
        let p = &random_points(2, seed)[0];
        for c in &setup.problem.corners[..5] {
            if let (Ok(a), Ok(b)) = (ideal.evaluate_metrics(p, c), coupled.evaluate_metrics(p, c)) {
                prop_assert!(b.pn100k >= a.pn100k && b.pn1m >= a.pn1m && b.pn10m >= a.pn10m);
            }
        }
        if let Ok(r) = setup.evaluate_coupled(p) {
            let w = PerfMetrics::worst_case(&r.per_corner).unwrap();
            prop_assert!(w.fom <= r.nominal.fom);
        }
    }
}

#[test]
fn criterion_7_determinism_and_budget() {
    let _serial = serial();
    let setup = FlowSetup::bundled();
    let cfg = OptConfig::default().with(11, 240);
    let mut ok = true;
    let mut detail = Vec::new();
    for flow in [ldovco::flows::Flow::Codesign, ldovco::flows::Flow::Sequential] {
        let a = setup.run(flow, &cfg).unwrap();
        let b = setup.run(flow, &cfg).unwrap();
        let identical = a.log.as_str() == b.log.as_str();
        let logged = a.log.rows();
        let stagnated = a.stages.iter().any(|s| s.stop == StopReason::Stagnation);
        let exact = logged == a.evals_used && (stagnated || a.evals_used == cfg.eval_budget);
        ok &= identical && exact;
        detail.push(format!(
            "{}: logs identical {identical}, logged {logged} = used {} (budget {})",
            flow.as_str(),
            a.evals_used,
            cfg.eval_budget
        ));
    }
    report(7, "determinism and budget", ok, &detail.join("; "));
    assert!(ok);
}
