//! Command implementations behind the `ldovco` binary.
//!
//! Exit codes: 0 success (and, for `run`, a feasible final design), 1 the
//! final design violates a constraint, 2 bad input (arguments, config,
//! problem or design files), 3 evaluator setup or runtime failure.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::flows::{ComparisonReport, Flow, FlowResult, FlowSetup};
use crate::formats::{
    corner_pn_csv, pn_sweep_csv, problem_from_text, problem_to_text, read_text, write_atomic,
    DesignRecord, RunConfig,
};
use crate::models::tech::TechConstants;
use crate::models::testbench::Mode;
use crate::optimizer::OptConfig;
use crate::sizing::bundled;
use crate::sizing::corner::Corner;
use crate::sizing::metrics::PerfMetrics;

pub const PROBLEM_FILE: &str = "problem.txt";
pub const CONSTANTS_FILE: &str = "constants.txt";
pub const CONFIG_FILE: &str = "run.txt";
pub const LOG_FILE: &str = "run_log.csv";
pub const DESIGN_FILE: &str = "best_design.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SWEEP_FILE: &str = "pn_sweep.csv";
pub const CORNER_PN_FILE: &str = "corner_pn.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const COMPARISON_SUMMARY_FILE: &str = "comparison_summary.txt";

#[derive(Debug)]
pub enum Failure {
    Input(Error),
    Setup(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Setup(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error: {e}"),
            Failure::Setup(e) => write!(f, "setup error: {e}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

fn input<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(Failure::Input)
}

fn in_setup<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(Failure::Setup)
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let p = dir.join(name);
    in_setup(write_atomic(&p, contents))?;
    Ok(p)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Setup(Error::Io {
        path: dir.to_path_buf(),
        source: e,
    }))
}

/// Writes the bundled problem, default constants and a default run config.
pub fn cmd_init(dir: &Path, force: bool) -> CliResult<Vec<PathBuf>> {
    let names = [PROBLEM_FILE, CONSTANTS_FILE, CONFIG_FILE];
    if !force {
        if let Some(p) = names.iter().map(|n| dir.join(n)).find(|p| p.exists()) {
            return Err(Failure::Input(Error::InvalidArgument(format!(
                "`{}` already exists (use --force to overwrite)",
                p.display()
            ))));
        }
    }
    ensure_dir(dir)?;
    let contents = [
        problem_to_text(&bundled::ldo_vco_problem()),
        TechConstants::default().to_text(),
        RunConfig::default().to_text(),
    ];
    names
        .iter()
        .zip(contents)
        .map(|(n, c)| write(dir, n, &c))
        .collect()
}

/// Builds a setup from optional problem and constants files; the bundled
/// defaults stand in for missing ones.
pub fn load_setup(problem: Option<&Path>, constants: Option<&Path>, stage1_share: f64) -> CliResult<FlowSetup> {
    let p = match problem {
        Some(path) => input(read_text(path).and_then(|t| problem_from_text(&t)))?,
        None => bundled::ldo_vco_problem(),
    };
    let tech = match constants {
        Some(path) => input(read_text(path).and_then(|t| TechConstants::from_text(&t)))?,
        None => TechConstants::default(),
    };
    let mut s = in_setup(FlowSetup::new(p, tech))?;
    s.stage1_share = stage1_share;
    Ok(s)
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    input(RunConfig::load(path))
}

/// Outcome of `run`, with the text printed to stdout.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub result: FlowResult,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn feasible(&self) -> bool {
        self.result.coupled.feasible()
    }

    pub fn exit_code(&self) -> i32 {
        if self.feasible() { 0 } else { 1 }
    }
}

fn violation_lines(s: &mut String, setup: &FlowSetup, worst: &PerfMetrics) {
    if let Ok(br) = setup
        .problem
        .constraints
        .breakdown(&PerfMetrics::schema(), &worst.to_vec())
    {
        for (name, part) in br.into_iter().filter(|b| b.1 > 0.0) {
            let _ = writeln!(s, "  violated: {name} (normalized shortfall {part:.4e})");
        }
    }
}

pub fn run_summary(setup: &FlowSetup, r: &FlowResult) -> String {
    let c = &r.coupled;
    let mut s = String::new();
    let _ = writeln!(s, "flow: {}", r.flow.as_str());
    let _ = writeln!(s, "seed: {}", r.seed);
    let _ = writeln!(s, "true evaluations: {}", r.evals_used);
    for st in &r.stages {
        let _ = writeln!(
            s,
            "stage {}: {} evaluations, stopped on {}, incumbent objective {:.3}, violation {:.4e}",
            st.name,
            st.evals,
            st.stop.as_str(),
            st.objective,
            st.violation
        );
    }
    if r.stage1_feasible == Some(false) {
        s.push_str("warning: oscillator stage ended infeasible; regulator stage started from its incumbent\n");
    }
    let (corner, fom) = c.min_fom_corner();
    let _ = writeln!(s, "coupled nominal FoM: {:.3} dBc/Hz", c.nominal.fom);
    let _ = writeln!(s, "coupled worst-case FoM: {fom:.3} dBc/Hz at {corner}");
    let _ = writeln!(s, "worst-case pdyn: {:.4} mW", c.worst.pdyn * 1e3);
    let _ = writeln!(s, "worst-case PN at 1 MHz: {:.2} dBc/Hz", c.worst.pn1m);
    let _ = writeln!(s, "violation: {:.4e}", c.violation);
    let _ = writeln!(s, "feasible: {}", if c.feasible() { "yes" } else { "no" });
    violation_lines(&mut s, setup, &c.worst);
    s
}

/// Runs one flow and writes the log, best design and summary into `out`.
pub fn cmd_run(setup: &FlowSetup, flow: Flow, cfg: &OptConfig, out: &Path) -> CliResult<RunReport> {
    let result = setup_or_input(setup.run(flow, cfg))?;
    ensure_dir(out)?;
    let summary = run_summary(setup, &result);
    let record = DesignRecord::from_flow(setup.problem.full_space(), &result);
    let artifacts = vec![
        write(out, LOG_FILE, result.log.as_str())?,
        write(out, DESIGN_FILE, &record.to_text(&setup.problem.constraints))?,
        write(out, SUMMARY_FILE, &summary)?,
    ];
    Ok(RunReport {
        result,
        summary,
        artifacts,
    })
}

// config validation errors surface from the optimizer as invalid arguments
fn setup_or_input<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        Error::InvalidArgument(_) => Failure::Input(e),
        other => Failure::Setup(other),
    })
}

pub fn parse_mode(s: &str) -> CliResult<Mode> {
    match Mode::parse(s) {
        Some(m @ (Mode::IdealSupply | Mode::Coupled)) => Ok(m),
        _ => Err(Failure::Input(Error::InvalidArgument(format!(
            "unknown mode `{s}` (expected ideal or coupled)"
        )))),
    }
}

fn metrics_row(s: &mut String, label: &str, m: &PerfMetrics) {
    let _ = writeln!(
        s,
        "{label:<22} {:>8.4} {:>8.2} {:>8.2} {:>8.2} {:>8.4} {:>8.2} {:>6.1} {:>7.4} {:>7.2} {:>8.3}",
        m.f0 / 1e9,
        m.pn100k,
        m.pn1m,
        m.pn10m,
        m.pdyn * 1e3,
        m.psr_max,
        m.pm,
        m.vdd_max,
        m.startup_margin,
        m.fom
    );
}

/// Evaluates a design file on every corner; with `sweep_out`, also writes
/// the phase-noise sweep and the per-corner phase-noise table there.
pub fn cmd_eval(setup: &FlowSetup, design: &Path, mode: Mode, sweep_out: Option<&Path>) -> CliResult<String> {
    let rec = input(read_text(design).and_then(|t| DesignRecord::from_text(&t)))?;
    let space = setup.problem.full_space();
    let point = input(rec.point_in(space))?;
    let tb = in_setup(setup.testbench(mode))?;
    let constraints = match mode {
        Mode::Coupled => setup.problem.constraints.clone(),
        _ => setup.problem.constraints.vco_only(),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6} {:>7} {:>7} {:>8}",
        "corner", "f0[GHz]", "pn100k", "pn1m", "pn10m", "pdyn[mW]", "psr_max", "pm", "vdd_max", "startup", "fom"
    );
    let mut per_corner = Vec::new();
    for c in &setup.problem.corners {
        let m = in_setup(tb.evaluate_metrics(&point, c))?;
        metrics_row(&mut s, &c.label(), &m);
        per_corner.push(m);
    }
    let worst = in_setup(PerfMetrics::worst_case(&per_corner))?;
    metrics_row(&mut s, "worst", &worst);
    let v = in_setup(constraints.violation_vec(&PerfMetrics::schema(), &worst.to_vec()))?;
    let _ = writeln!(s, "rows: {} corners", per_corner.len());
    let _ = writeln!(s, "violation: {v:.4e}");

    if let Some(dir) = sweep_out {
        ensure_dir(dir)?;
        let ideal = in_setup(setup.testbench(Mode::IdealSupply))?;
        let sweep = in_setup(pn_sweep_csv(&ideal, &tb, &point, &Corner::nominal()))?;
        let table = in_setup(corner_pn_csv(&tb, &point, &setup.problem.corners))?;
        let a = write(dir, SWEEP_FILE, &sweep)?;
        let b = write(dir, CORNER_PN_FILE, &table)?;
        let _ = writeln!(s, "wrote {} and {}", a.display(), b.display());
    }
    Ok(s)
}

/// Paired co-design and sequential runs over `seeds`.
pub fn cmd_compare(setup: &FlowSetup, cfg: &OptConfig, seeds: &[u64], out: &Path) -> CliResult<(ComparisonReport, String)> {
    let report = setup_or_input(setup.compare(cfg, seeds))?;
    ensure_dir(out)?;
    let summary = report.summary();
    write(out, COMPARISON_FILE, &report.to_csv())?;
    write(out, COMPARISON_SUMMARY_FILE, &summary)?;
    Ok((report, summary))
}
