//! Sequential versus simultaneous sizing of the regulator and oscillator.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::tech::TechConstants;
use crate::models::testbench::{Mode, Testbench};
use crate::optimizer::{self, OptConfig, RunLog, RunOutcome, StopReason};
use crate::sizing::corner::Corner;
use crate::sizing::metrics::{compare_designs, PerfMetrics, Score};
use crate::sizing::problem::{Evaluator, SizingProblem};
use crate::sizing::space::DesignPoint;

/// Share of the total budget spent on the oscillator stage.
pub const DEFAULT_STAGE1_SHARE: f64 = 7.0 / 18.0;
pub const VCO_BLOCK: &str = "vco";
pub const LDO_BLOCK: &str = "ldo";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Codesign,
    Sequential,
}

impl Flow {
    pub fn as_str(self) -> &'static str {
        match self {
            Flow::Codesign => "co",
            Flow::Sequential => "seq",
        }
    }
}

impl FromStr for Flow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "co" | "codesign" => Ok(Flow::Codesign),
            "seq" | "sequential" => Ok(Flow::Sequential),
            _ => Err(Error::invalid(format!("unknown flow `{s}` (expected co or seq)"))),
        }
    }
}

/// Problem, technology and stage split shared by both flows.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSetup {
    /// Full problem over every variable, checked in coupled mode.
    pub problem: SizingProblem,
    pub tech: TechConstants,
    pub stage1_share: f64,
}

/// A design evaluated in coupled mode on every corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledReport {
    pub corners: Vec<Corner>,
    pub per_corner: Vec<PerfMetrics>,
    pub nominal: PerfMetrics,
    pub worst: PerfMetrics,
    pub violation: f64,
}

impl CoupledReport {
    pub fn feasible(&self) -> bool {
        self.violation == 0.0
    }

    /// Corner label with the lowest FoM; the first such corner on ties.
    pub fn min_fom_corner(&self) -> (String, f64) {
        let mut best = (String::new(), f64::INFINITY);
        for (c, m) in self.corners.iter().zip(&self.per_corner) {
            if m.fom < best.1 {
                best = (c.label(), m.fom);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub name: String,
    pub evals: usize,
    pub stop: StopReason,
    pub objective: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub flow: Flow,
    pub seed: u64,
    pub final_point: DesignPoint,
    pub coupled: CoupledReport,
    pub evals_used: usize,
    pub stages: Vec<StageSummary>,
    /// Sequential flow only: whether the oscillator stage ended feasible.
    pub stage1_feasible: Option<bool>,
    pub log: RunLog,
}

impl FlowResult {
    pub fn objective(&self) -> f64 {
        self.coupled.worst.fom
    }

    pub fn score(&self, index: usize) -> Score {
        Score::new(self.objective(), self.coupled.violation, index)
    }
}

impl FlowSetup {
    pub fn new(problem: SizingProblem, tech: TechConstants) -> Result<Self> {
        tech.validate()?;
        let setup = FlowSetup {
            problem,
            tech,
            stage1_share: DEFAULT_STAGE1_SHARE,
        };
        // binds the metric schema and catches missing variables early
        setup.problem.bind(setup.testbench(Mode::Coupled)?.schema())?;
        Ok(setup)
    }

    pub fn bundled() -> Self {
        FlowSetup::new(crate::sizing::bundled::ldo_vco_problem(), TechConstants::default())
            .expect("bundled setup is valid")
    }

    pub fn testbench(&self, mode: Mode) -> Result<Testbench> {
        Testbench::new(self.problem.full_space(), self.tech.clone(), mode)
    }

    /// Stage budgets (oscillator, regulator) for a total budget.
    pub fn stage_budgets(&self, total: usize) -> (usize, usize) {
        let first = (total as f64 * self.stage1_share).round() as usize;
        (first, total - first)
    }

    pub fn evaluate_coupled(&self, point: &DesignPoint) -> Result<CoupledReport> {
        let tb = self.testbench(Mode::Coupled)?;
        let corners = self.problem.corners.clone();
        let per_corner = corners
            .iter()
            .map(|c| tb.evaluate_metrics(point, c))
            .collect::<Result<Vec<_>>>()?;
        let nominal = match corners.iter().position(Corner::is_nominal) {
            Some(i) => per_corner[i],
            None => tb.evaluate_metrics(point, &Corner::nominal())?,
        };
        let worst = PerfMetrics::worst_case(&per_corner)?;
        let violation = self
            .problem
            .constraints
            .violation_vec(&PerfMetrics::schema(), &worst.to_vec())?;
        Ok(CoupledReport {
            corners,
            per_corner,
            nominal,
            worst,
            violation,
        })
    }

    fn new_log(&self) -> RunLog {
        RunLog::new(&PerfMetrics::schema(), self.problem.full_space())
    }

    fn summarize(name: &str, out: &RunOutcome) -> StageSummary {
        let b = out.best();
        StageSummary {
            name: name.into(),
            evals: out.evals(),
            stop: out.stop,
            objective: b.objective,
            violation: b.violation,
        }
    }

    pub fn run_codesign(&self, cfg: &OptConfig) -> Result<FlowResult> {
        let tb = self.testbench(Mode::Coupled)?;
        let out = optimizer::run(&self.problem, &tb, cfg)?;
        let mut log = self.new_log();
        log.append("co", &out);
        let final_point = self.problem.expand(&out.best().point);
        Ok(FlowResult {
            flow: Flow::Codesign,
            seed: cfg.seed,
            coupled: self.evaluate_coupled(&final_point)?,
            final_point,
            evals_used: out.evals(),
            stages: vec![Self::summarize("co", &out)],
            stage1_feasible: None,
            log,
        })
    }

    pub fn run_sequential(&self, cfg: &OptConfig) -> Result<FlowResult> {
        let full = self.problem.full_space();
        let vco = full.block_names(VCO_BLOCK);
        let ldo = full.block_names(LDO_BLOCK);
        if vco.is_empty() || ldo.is_empty() {
            return Err(Error::invalid(
                "sequential flow needs variables in both the vco and ldo blocks",
            ));
        }
        let (b1, b2) = self.stage_budgets(cfg.eval_budget);

        // stage 1: oscillator alone on an ideal supply, its own constraints
        let mut p1 = self.problem.restrict(&vco, &full.midpoint())?;
        p1.constraints = self.problem.constraints.vco_only();
        let out1 = optimizer::run(&p1, &self.testbench(Mode::IdealSupply)?, &cfg.with(cfg.seed, b1))?;
        let stage1_point = p1.expand(&out1.best().point);

        // stage 2: regulator for the frozen oscillator, full constraints
        let p2 = self.problem.restrict(&ldo, &stage1_point)?;
        let out2 = optimizer::run(&p2, &self.testbench(Mode::Coupled)?, &cfg.with(cfg.seed, b2))?;
        let final_point = p2.expand(&out2.best().point);

        let mut log = self.new_log();
        log.append("seq1", &out1);
        log.append("seq2", &out2);
        Ok(FlowResult {
            flow: Flow::Sequential,
            seed: cfg.seed,
            coupled: self.evaluate_coupled(&final_point)?,
            final_point,
            evals_used: out1.evals() + out2.evals(),
            stages: vec![Self::summarize("seq1", &out1), Self::summarize("seq2", &out2)],
            stage1_feasible: Some(out1.best().feasible()),
            log,
        })
    }

    pub fn run(&self, flow: Flow, cfg: &OptConfig) -> Result<FlowResult> {
        match flow {
            Flow::Codesign => self.run_codesign(cfg),
            Flow::Sequential => self.run_sequential(cfg),
        }
    }

    /// Paired runs, one per seed, equal budgets.
    pub fn compare(&self, cfg: &OptConfig, seeds: &[u64]) -> Result<ComparisonReport> {
        if seeds.len() < 2 {
            return Err(Error::invalid("a comparison needs at least two seeds"));
        }
        let mut pairs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let c = cfg.with(seed, cfg.eval_budget);
            let co = self.run_codesign(&c)?;
            let seq = self.run_sequential(&c)?;
            pairs.push(PairRow::new(seed, &co, &seq));
        }
        Ok(ComparisonReport::from_pairs(pairs))
    }
}

/// Headline numbers of one flow for one seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSummary {
    pub fom: f64,
    pub violation: f64,
    pub pdyn: f64,
    pub pn1m: f64,
    pub evals: usize,
}

impl FlowSummary {
    pub fn of(r: &FlowResult) -> Self {
        FlowSummary {
            fom: r.coupled.worst.fom,
            violation: r.coupled.violation,
            pdyn: r.coupled.worst.pdyn,
            pn1m: r.coupled.worst.pn1m,
            evals: r.evals_used,
        }
    }

    fn score(&self) -> Score {
        Score::new(self.fom, self.violation, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub seed: u64,
    pub co: FlowSummary,
    pub seq: FlowSummary,
}

impl PairRow {
    pub fn new(seed: u64, co: &FlowResult, seq: &FlowResult) -> Self {
        PairRow {
            seed,
            co: FlowSummary::of(co),
            seq: FlowSummary::of(seq),
        }
    }

    /// 1 when co-design ranks ahead, 0 when behind, 0.5 on a tie.
    pub fn codesign_credit(&self) -> f64 {
        match compare_designs(&self.co.score(), &self.seq.score()) {
            Ordering::Less => 1.0,
            Ordering::Greater => 0.0,
            Ordering::Equal => 0.5,
        }
    }

    pub fn fom_delta(&self) -> f64 {
        self.co.fom - self.seq.fom
    }

    pub fn pdyn_delta_pct(&self) -> f64 {
        100.0 * (self.co.pdyn - self.seq.pdyn) / self.seq.pdyn
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<PairRow>,
    pub win_rate: f64,
    pub median_fom_delta: f64,
    pub median_pdyn_delta_pct: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub const REPORT_HEADER: &str = "seed,co_fom,co_violation,co_pdyn,co_pn1m,seq_fom,seq_violation,seq_pdyn,seq_pn1m,fom_delta,pdyn_delta_pct,codesign_credit";

impl ComparisonReport {
    pub fn from_pairs(rows: Vec<PairRow>) -> Self {
        let n = rows.len().max(1) as f64;
        let win_rate = rows.iter().map(PairRow::codesign_credit).sum::<f64>() / n;
        let fom: Vec<f64> = rows.iter().map(PairRow::fom_delta).collect();
        let pdyn: Vec<f64> = rows.iter().map(PairRow::pdyn_delta_pct).collect();
        ComparisonReport {
            median_fom_delta: median(&fom),
            median_pdyn_delta_pct: median(&pdyn),
            win_rate,
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.co.fom,
                r.co.violation,
                r.co.pdyn,
                r.co.pn1m,
                r.seq.fom,
                r.seq.violation,
                r.seq.pdyn,
                r.seq.pn1m,
                r.fom_delta(),
                r.pdyn_delta_pct(),
                r.codesign_credit()
            );
        }
        s
    }

    /// Reads the per-seed table back; aggregates are recomputed.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(REPORT_HEADER) {
            return Err(Error::parse(1, "unexpected comparison header"));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let no = i + 2;
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 12 {
                return Err(Error::parse(no, "expected 12 cells"));
            }
            let f = |k: usize| -> Result<f64> {
                c[k].parse()
                    .map_err(|_| Error::parse(no, format!("bad number `{}`", c[k])))
            };
            let side = |o: usize| -> Result<FlowSummary> {
                Ok(FlowSummary {
                    fom: f(o)?,
                    violation: f(o + 1)?,
                    pdyn: f(o + 2)?,
                    pn1m: f(o + 3)?,
                    evals: 0,
                })
            };
            rows.push(PairRow {
                seed: c[0].parse().map_err(|_| Error::parse(no, "bad seed"))?,
                co: side(1)?,
                seq: side(5)?,
            });
        }
        Ok(ComparisonReport::from_pairs(rows))
    }

    pub fn summary(&self) -> String {
        let co_feasible = self.rows.iter().filter(|r| r.co.violation == 0.0).count();
        let seq_feasible = self.rows.iter().filter(|r| r.seq.violation == 0.0).count();
        let mut s = String::new();
        let _ = writeln!(s, "seeds: {}", self.rows.len());
        let _ = writeln!(s, "codesign win rate: {:.1}%", 100.0 * self.win_rate);
        let _ = writeln!(
            s,
            "median worst-case FoM delta (co - seq): {:+.3} dB",
            self.median_fom_delta
        );
        let _ = writeln!(
            s,
            "median worst-case pdyn delta (co vs seq): {:+.1}%",
            self.median_pdyn_delta_pct
        );
        let _ = writeln!(
            s,
            "feasible runs: co {co_feasible}/{n}, seq {seq_feasible}/{n}",
            n = self.rows.len()
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(fom: f64, violation: f64, pdyn: f64) -> FlowSummary {
        FlowSummary {
            fom,
            violation,
            pdyn,
            pn1m: -120.0,
            evals: 500,
        }
    }

    #[test]
    fn self_comparison_is_a_tie() {
        let s = summary(188.0, 0.0, 5e-3);
        let rows: Vec<PairRow> = (0..4).map(|seed| PairRow { seed, co: s, seq: s }).collect();
        let r = ComparisonReport::from_pairs(rows);
        assert_eq!(r.win_rate, 0.5);
        assert_eq!(r.median_fom_delta, 0.0);
        assert_eq!(r.median_pdyn_delta_pct, 0.0);
    }

    #[test]
    fn credit_follows_feasibility_first() {
        let row = PairRow { seed: 1, co: summary(185.0, 0.0, 4e-3), seq: summary(190.0, 0.1, 5e-3) };
        assert_eq!(row.codesign_credit(), 1.0);
        assert!((row.pdyn_delta_pct() + 20.0).abs() < 1e-9);
        let row = PairRow { seed: 1, co: summary(185.0, 0.0, 4e-3), seq: summary(190.0, 0.0, 5e-3) };
        assert_eq!(row.codesign_credit(), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            PairRow { seed: 3, co: summary(188.25, 0.0, 4e-3), seq: summary(187.0, 0.01, 5e-3) },
            PairRow { seed: 4, co: summary(186.0, 0.0, 4.5e-3), seq: summary(187.5, 0.0, 5e-3) },
        ];
        let r = ComparisonReport::from_pairs(rows);
        let back = ComparisonReport::from_csv(&r.to_csv()).unwrap();
        assert_eq!(back.to_csv(), r.to_csv());
        assert_eq!(back.win_rate, 0.5);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn stage_split() {
        let s = FlowSetup::bundled();
        assert_eq!(s.stage_budgets(500), (194, 306));
        assert_eq!(s.stage_budgets(18), (7, 11));
    }
}
