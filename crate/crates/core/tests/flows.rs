use ldovco::flows::{Flow, FlowResult, FlowSetup, LDO_BLOCK, VCO_BLOCK};
use ldovco::formats::DesignRecord;
use ldovco::models::testbench::Mode;
use ldovco::optimizer::{parse_log, OptConfig};
use ldovco::sizing::PerfMetrics;

const BUDGET: usize = 240;

fn run(flow: Flow, seed: u64) -> (FlowSetup, FlowResult) {
    let setup = FlowSetup::bundled();
    let cfg = OptConfig::default().with(seed, BUDGET);
    let r = setup.run(flow, &cfg).unwrap();
    (setup, r)
}

fn column_indices(setup: &FlowSetup, block: &str) -> Vec<usize> {
    let full = setup.problem.full_space();
    full.block_names(block)
        .iter()
        .map(|n| full.index_of(n).unwrap())
        .collect()
}

#[test]
fn sequential_stages_touch_only_their_block() {
    let (setup, r) = run(Flow::Sequential, 4);
    let (_, rows) = parse_log(r.log.as_str(), PerfMetrics::schema().len()).unwrap();
    let vco = column_indices(&setup, VCO_BLOCK);
    let ldo = column_indices(&setup, LDO_BLOCK);
    let mid = setup.problem.full_space().midpoint();

    let (s1, s2): (Vec<_>, Vec<_>) = rows.iter().partition(|l| l.stage == "seq1");
    assert!(!s1.is_empty() && !s2.is_empty());
    assert!(s2.iter().all(|l| l.stage == "seq2"));
    for l in &s1 {
        for &i in &ldo {
            assert_eq!(l.variables[i], mid.values[i], "stage 1 moved regulator variable {i}");
        }
    }
    for l in &s2 {
        for &i in &vco {
            assert_eq!(l.variables[i], r.final_point.values[i], "stage 2 moved oscillator variable {i}");
        }
    }
    assert_eq!(r.stages.len(), 2);
    assert_eq!(r.stages[0].evals + r.stages[1].evals, r.evals_used);
    let (b1, b2) = setup.stage_budgets(BUDGET);
    assert!(r.stages[0].evals <= b1 && r.stages[1].evals <= b2);
}

#[test]
fn both_flows_spend_the_same_budget() {
    let (_, co) = run(Flow::Codesign, 5);
    let (_, seq) = run(Flow::Sequential, 5);
    assert!(co.evals_used <= BUDGET && seq.evals_used <= BUDGET);
    assert_eq!(co.log.rows(), co.evals_used);
    assert_eq!(seq.log.rows(), seq.evals_used);
    assert_eq!(co.evals_used, seq.evals_used);
}

#[test]
fn final_report_matches_fresh_evaluation() {
    let (setup, r) = run(Flow::Codesign, 6);
    let again = setup.evaluate_coupled(&r.final_point).unwrap();
    assert_eq!(again, r.coupled);
    let (_, min_fom) = r.coupled.min_fom_corner();
    assert_eq!(min_fom, r.coupled.worst.fom);
    assert_eq!(r.coupled.per_corner.len(), 33);

    let rec = DesignRecord::from_flow(setup.problem.full_space(), &r);
    let text = rec.to_text(&setup.problem.constraints);
    let back = DesignRecord::from_text(&text).unwrap();
    let p = back.point_in(setup.problem.full_space()).unwrap();
    assert_eq!(setup.evaluate_coupled(&p).unwrap().worst.fom, r.coupled.worst.fom);
}

#[test]
fn ideal_supply_is_never_noisier_than_coupled() {
    let (setup, r) = run(Flow::Sequential, 7);
    let ideal = setup.testbench(Mode::IdealSupply).unwrap();
    let coupled = setup.testbench(Mode::Coupled).unwrap();
    for c in &setup.problem.corners {
        let a = ideal.evaluate_metrics(&r.final_point, c).unwrap();
        let b = coupled.evaluate_metrics(&r.final_point, c).unwrap();
        assert!(a.pn1m <= b.pn1m + 1e-9, "{}: {} > {}", c.label(), a.pn1m, b.pn1m);
        assert!(a.pn100k <= b.pn100k + 1e-9, "{}", c.label());
    }
}

#[test]
fn budget_too_small_for_a_stage_is_rejected() {
    let setup = FlowSetup::bundled();
    let err = setup.run(Flow::Sequential, &OptConfig::default().with(1, 50));
    assert!(err.is_err());
}
