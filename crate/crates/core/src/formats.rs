//! Text artifacts: problem definitions, run configurations, design records
//! and phase-noise sweeps.
//!
//! All files are line-oriented `key = value` with `[section]` headers and `#`
//! comments. Numbers accept the SI suffixes `f p n u m K M G`.
//!
//! Problem file sections:
//!
//! * top level: `objective = <metric>`
//! * `[variables]`: `name = kind block lower upper unit`, one row per variable
//!   in search order. `kind` is `continuous` or `integer`; `unit` is `-` when
//!   dimensionless.
//! * `[fixed]`: `name = value` for elements held constant.
//! * `[constraints]`: `metric.min = bound` or `metric.max = bound`.
//! * `[corners]`: `label = nmos pmos inductor capacitor temperature vdd_in`
//!   with MOS tags `f s t` and passive tags `min max nom`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flows::{CoupledReport, Flow, FlowResult, DEFAULT_STAGE1_SHARE};
use crate::models::testbench::{log_grid, Mode, Testbench};
use crate::optimizer::OptConfig;
use crate::sizing::corner::{Corner, MosCorner, PassiveCorner};
use crate::sizing::metrics::{Constraint, ConstraintSet, Direction, PerfMetrics};
use crate::sizing::problem::SizingProblem;
use crate::sizing::space::{DesignPoint, DesignSpace, VarKind, Variable};
use crate::textfmt::{KvEntry, KvFile};
use crate::units::{format_si, parse_si_at};

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("`{}` is not a file path", path.display())))?;
    let tmp_name = format!(".{}.tmp{}", name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(d) => d.join(tmp_name),
        None => PathBuf::from(tmp_name),
    };
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- corners

fn mos_tag(m: MosCorner) -> &'static str {
    match m {
        MosCorner::Fast => "f",
        MosCorner::Slow => "s",
        MosCorner::Nominal => "t",
    }
}

fn parse_mos(s: &str, line: usize) -> Result<MosCorner> {
    match s {
        "f" => Ok(MosCorner::Fast),
        "s" => Ok(MosCorner::Slow),
        "t" => Ok(MosCorner::Nominal),
        _ => Err(Error::parse(line, format!("unknown MOS corner `{s}`"))),
    }
}

fn passive_tag(p: PassiveCorner) -> &'static str {
    match p {
        PassiveCorner::Min => "min",
        PassiveCorner::Max => "max",
        PassiveCorner::Nominal => "nom",
    }
}

fn parse_passive(s: &str, line: usize) -> Result<PassiveCorner> {
    match s {
        "min" => Ok(PassiveCorner::Min),
        "max" => Ok(PassiveCorner::Max),
        "nom" => Ok(PassiveCorner::Nominal),
        _ => Err(Error::parse(line, format!("unknown passive corner `{s}`"))),
    }
}

fn parse_corner(e: &KvEntry) -> Result<Corner> {
    let f: Vec<&str> = e.value.split_whitespace().collect();
    if f.len() != 6 {
        return Err(Error::parse(
            e.line,
            "corner needs `nmos pmos inductor capacitor temperature vdd_in`",
        ));
    }
    let corner = Corner {
        nmos: parse_mos(f[0], e.line)?,
        pmos: parse_mos(f[1], e.line)?,
        inductor: parse_passive(f[2], e.line)?,
        capacitor: parse_passive(f[3], e.line)?,
        temperature: parse_si_at(f[4], e.line)?,
        vdd_in: parse_si_at(f[5], e.line)?,
    };
    if corner.label() != e.key {
        return Err(Error::parse(
            e.line,
            format!("corner label `{}` does not match its fields (`{}`)", e.key, corner.label()),
        ));
    }
    Ok(corner)
}

// ---------------------------------------------------------------- problem

pub fn problem_to_text(problem: &SizingProblem) -> String {
    let space = problem.full_space();
    let mut s = String::from(
        "# Sizing problem definition.\n\
         # [variables]   name = kind block lower upper unit\n\
         # [fixed]       name = value\n\
         # [constraints] metric.min = bound | metric.max = bound\n\
         # [corners]     label = nmos pmos inductor capacitor temperature vdd_in\n",
    );
    let _ = writeln!(s, "objective = {}", problem.objective);
    s.push_str("\n[variables]\n");
    for v in &space.variables {
        let unit = if v.unit.is_empty() { "-" } else { &v.unit };
        let block = if v.block.is_empty() { "-" } else { &v.block };
        let _ = writeln!(
            s,
            "{} = {} {} {} {} {}",
            v.name,
            v.kind.as_str(),
            block,
            format_si(v.lower),
            format_si(v.upper),
            unit
        );
    }
    s.push_str("\n[fixed]\n");
    for (k, v) in &space.fixed {
        let _ = writeln!(s, "{k} = {}", format_si(*v));
    }
    s.push_str("\n[constraints]\n");
    for c in &problem.constraints.items {
        let side = match c.direction {
            Direction::AtLeast => "min",
            Direction::AtMost => "max",
        };
        let _ = writeln!(s, "{}.{side} = {}", c.metric, format_si(c.bound));
    }
    s.push_str("\n[corners]\n");
    for c in &problem.corners {
        let _ = writeln!(
            s,
            "{} = {} {} {} {} {} {}",
            c.label(),
            mos_tag(c.nmos),
            mos_tag(c.pmos),
            passive_tag(c.inductor),
            passive_tag(c.capacitor),
            format_si(c.temperature),
            format_si(c.vdd_in)
        );
    }
    s
}

pub fn problem_from_text(text: &str) -> Result<SizingProblem> {
    let kv = KvFile::parse(text)?;
    for sec in kv.sections() {
        if !matches!(sec, "" | "variables" | "fixed" | "constraints" | "corners") {
            return Err(Error::invalid(format!("unknown problem section `[{sec}]`")));
        }
    }
    let mut objective = None;
    for e in kv.section("") {
        match e.key.as_str() {
            "objective" => objective = Some(e.value.clone()),
            other => return Err(Error::parse(e.line, format!("unknown key `{other}`"))),
        }
    }
    let objective = objective.ok_or_else(|| Error::invalid("problem file has no `objective`"))?;

    let mut variables = Vec::new();
    for e in kv.section("variables") {
        let f: Vec<&str> = e.value.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::parse(e.line, "variable needs `kind block lower upper unit`"));
        }
        let kind: VarKind = f[0].parse().map_err(|m: String| Error::parse(e.line, m))?;
        let (lo, hi) = (parse_si_at(f[2], e.line)?, parse_si_at(f[3], e.line)?);
        let unit = if f[4] == "-" { "" } else { f[4] };
        let mut v = match kind {
            VarKind::Continuous => Variable::continuous(&e.key, lo, hi, unit),
            VarKind::Integer => Variable::integer(&e.key, lo, hi),
        };
        v.unit = unit.into();
        if f[1] != "-" {
            v = v.in_block(f[1]);
        }
        variables.push(v);
    }
    if variables.is_empty() {
        return Err(Error::invalid("problem file has no variables"));
    }
    let mut space = DesignSpace::new(variables);
    for e in kv.section("fixed") {
        space.fixed.insert(e.key.clone(), e.number()?);
    }

    let mut items = Vec::new();
    for e in kv.section("constraints") {
        let (metric, side) = e
            .key
            .rsplit_once('.')
            .ok_or_else(|| Error::parse(e.line, "constraint key must be `metric.min` or `metric.max`"))?;
        let dir = match side {
            "min" => Direction::AtLeast,
            "max" => Direction::AtMost,
            _ => return Err(Error::parse(e.line, format!("unknown constraint side `{side}`"))),
        };
        items.push(Constraint::new(metric, dir, e.number()?)?);
    }

    let corners = kv
        .section("corners")
        .map(parse_corner)
        .collect::<Result<Vec<_>>>()?;
    SizingProblem::new(space, corners, ConstraintSet::new(items), &objective)
}

// ---------------------------------------------------------------- run config

/// Everything a batch run needs. Paths are stored as written; relative ones
/// are resolved against the config file's directory by [`RunConfig::load`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: PathBuf,
    pub constants: Option<PathBuf>,
    pub flow: Flow,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub stage1_share: f64,
    pub opt: OptConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: PathBuf::from("problem.txt"),
            constants: Some(PathBuf::from("constants.txt")),
            flow: Flow::Codesign,
            seeds: (1..=10).collect(),
            out: PathBuf::from("out"),
            stage1_share: DEFAULT_STAGE1_SHARE,
            opt: OptConfig::default(),
        }
    }
}

fn opt_count(v: Option<usize>) -> String {
    v.map_or_else(|| "auto".into(), |n| n.to_string())
}

fn parse_count(e: &KvEntry) -> Result<usize> {
    e.value
        .parse()
        .map_err(|_| Error::parse(e.line, format!("`{}` expects a count, got `{}`", e.key, e.value)))
}

fn parse_opt_count(e: &KvEntry) -> Result<Option<usize>> {
    if e.value == "auto" {
        Ok(None)
    } else {
        parse_count(e).map(Some)
    }
}

pub fn parse_seeds(text: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for tok in text.split([',', ' ']).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let a: u64 = a.parse().map_err(|_| format!("bad seed range `{tok}`"))?;
            let b: u64 = b
                .trim_start_matches('=')
                .parse()
                .map_err(|_| format!("bad seed range `{tok}`"))?;
            if b < a {
                return Err(format!("empty seed range `{tok}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(tok.parse().map_err(|_| format!("bad seed `{tok}`"))?);
        }
    }
    if out.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(out)
}

impl RunConfig {
    pub fn to_text(&self) -> String {
        let o = &self.opt;
        let m = &o.surrogate;
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut s = String::from("# Run configuration. Relative paths resolve against this file.\n");
        s.push_str("[run]\n");
        let _ = writeln!(s, "problem = {}", self.problem.display());
        match &self.constants {
            Some(p) => {
                let _ = writeln!(s, "constants = {}", p.display());
            }
            None => s.push_str("# constants = constants.txt\n"),
        }
        let _ = writeln!(s, "# co (all variables at once) or seq (oscillator, then regulator)");
        let _ = writeln!(s, "flow = {}", self.flow.as_str());
        let _ = writeln!(s, "seeds = {}", seeds.join(" "));
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "# share of the budget spent on the oscillator stage of seq");
        let _ = writeln!(s, "stage1_share = {}", self.stage1_share);
        s.push_str("\n[optimizer]\n");
        let _ = writeln!(s, "eval_budget = {}", o.eval_budget);
        let _ = writeln!(s, "# auto = 4 per variable, clamped to 20..80");
        let _ = writeln!(s, "init_samples = {}", opt_count(o.init_samples));
        let _ = writeln!(s, "lambda_parents = {}", o.lambda_parents);
        let _ = writeln!(s, "children_per_iter = {}", o.children_per_iter);
        let _ = writeln!(s, "de_f = {}", o.de_f);
        let _ = writeln!(s, "de_cr = {}", o.de_cr);
        let _ = writeln!(s, "no_improve_limit = {}", o.no_improve_limit);
        let _ = writeln!(s, "beta = {}", o.beta);
        s.push_str("\n[surrogate]\n");
        let _ = writeln!(s, "# auto = max(10, 2 per input)");
        let _ = writeln!(s, "hidden_width = {}", opt_count(m.hidden_width));
        let _ = writeln!(s, "members = {}", m.members);
        let _ = writeln!(s, "epochs = {}", m.epochs);
        let _ = writeln!(s, "learning_rate = {}", m.learning_rate);
        let _ = writeln!(s, "patience = {}", m.patience);
        let _ = writeln!(s, "val_fraction = {}", m.val_fraction);
        let _ = writeln!(s, "batch_size = {}", m.batch_size);
        let _ = writeln!(s, "refit_epochs = {}", m.refit_epochs);
        let _ = writeln!(s, "refit_work = {}", m.refit_work);
        s
    }

    /// Parses a config; keys not present keep their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let kv = KvFile::parse(text)?;
        let mut c = RunConfig::default();
        let mut constants_seen = false;
        for e in &kv.entries {
            let num = || e.number();
            match (e.section.as_str(), e.key.as_str()) {
                ("run", "problem") => c.problem = PathBuf::from(&e.value),
                ("run", "constants") => {
                    constants_seen = true;
                    c.constants = (!e.value.is_empty() && e.value != "none")
                        .then(|| PathBuf::from(&e.value));
                }
                ("run", "flow") => c.flow = e.value.parse()?,
                ("run", "seeds") => {
                    c.seeds = parse_seeds(&e.value).map_err(|m| Error::parse(e.line, m))?
                }
                ("run", "out") => c.out = PathBuf::from(&e.value),
                ("run", "stage1_share") => c.stage1_share = num()?,
                ("optimizer", "eval_budget") => c.opt.eval_budget = parse_count(e)?,
                ("optimizer", "init_samples") => c.opt.init_samples = parse_opt_count(e)?,
                ("optimizer", "lambda_parents") => c.opt.lambda_parents = parse_count(e)?,
                ("optimizer", "children_per_iter") => c.opt.children_per_iter = parse_count(e)?,
                ("optimizer", "de_f") => c.opt.de_f = num()?,
                ("optimizer", "de_cr") => c.opt.de_cr = num()?,
                ("optimizer", "no_improve_limit") => c.opt.no_improve_limit = parse_count(e)?,
                ("optimizer", "beta") => c.opt.beta = num()?,
                ("surrogate", "hidden_width") => c.opt.surrogate.hidden_width = parse_opt_count(e)?,
                ("surrogate", "members") => c.opt.surrogate.members = parse_count(e)?,
                ("surrogate", "epochs") => c.opt.surrogate.epochs = parse_count(e)?,
                ("surrogate", "learning_rate") => c.opt.surrogate.learning_rate = num()?,
                ("surrogate", "patience") => c.opt.surrogate.patience = parse_count(e)?,
                ("surrogate", "val_fraction") => c.opt.surrogate.val_fraction = num()?,
                ("surrogate", "batch_size") => c.opt.surrogate.batch_size = parse_count(e)?,
                ("surrogate", "refit_epochs") => c.opt.surrogate.refit_epochs = parse_count(e)?,
                ("surrogate", "refit_work") => c.opt.surrogate.refit_work = num()?,
                (sec, key) => {
                    return Err(Error::parse(e.line, format!("unknown key `{key}` in `[{sec}]`")))
                }
            }
        }
        if !constants_seen {
            c.constants = None;
        }
        c.validate()?;
        c.opt.seed = c.seeds[0];
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        if !(self.stage1_share > 0.0 && self.stage1_share < 1.0) {
            return Err(Error::invalid("stage1_share must lie in (0, 1)"));
        }
        self.opt.surrogate.validate()
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = RunConfig::from_text(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        c.problem = resolve(&c.problem);
        c.constants = c.constants.as_deref().map(resolve);
        c.out = resolve(&c.out);
        Ok(c)
    }
}

// ---------------------------------------------------------------- designs

/// Best-design record: every variable value, per-corner metrics in coupled
/// mode, the worst case and the constraint summary.
///
/// Layout: top-level `flow`, `seed`, `mode`; `[design]` with one entry per
/// variable in problem order; one `[metrics <corner>]` section per corner
/// plus `[metrics worst]`; `[summary]` with `fom`, `violation`, `feasible`,
/// `min_fom_corner` and one `violation.<constraint>` entry per violated
/// constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRecord {
    pub flow: Option<Flow>,
    pub seed: Option<u64>,
    pub mode: String,
    pub names: Vec<String>,
    pub point: DesignPoint,
    pub corners: Vec<(String, PerfMetrics)>,
    pub worst: Option<PerfMetrics>,
    pub violation: Option<f64>,
}

fn metrics_block(s: &mut String, label: &str, m: &PerfMetrics) {
    let _ = writeln!(s, "\n[metrics {label}]");
    for (name, v) in PerfMetrics::schema().names.iter().zip(m.to_vec()) {
        let _ = writeln!(s, "{name} = {}", format_si(v));
    }
}

impl DesignRecord {
    pub fn from_report(
        space: &DesignSpace,
        point: &DesignPoint,
        report: &CoupledReport,
        flow: Option<Flow>,
        seed: Option<u64>,
    ) -> Self {
        DesignRecord {
            flow,
            seed,
            mode: "coupled".into(),
            names: space.names().map(str::to_string).collect(),
            point: point.clone(),
            corners: report
                .corners
                .iter()
                .zip(&report.per_corner)
                .map(|(c, m)| (c.label(), *m))
                .collect(),
            worst: Some(report.worst),
            violation: Some(report.violation),
        }
    }

    pub fn from_flow(space: &DesignSpace, r: &FlowResult) -> Self {
        DesignRecord::from_report(space, &r.final_point, &r.coupled, Some(r.flow), Some(r.seed))
    }

    pub fn to_text(&self, constraints: &ConstraintSet) -> String {
        let mut s = String::from("# Design record. Values in SI units.\n");
        if let Some(f) = self.flow {
            let _ = writeln!(s, "flow = {}", f.as_str());
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        let _ = writeln!(s, "mode = {}", self.mode);
        s.push_str("\n[design]\n");
        for (n, v) in self.names.iter().zip(&self.point.values) {
            let _ = writeln!(s, "{n} = {}", format_si(*v));
        }
        for (label, m) in &self.corners {
            metrics_block(&mut s, label, m);
        }
        if let Some(w) = &self.worst {
            metrics_block(&mut s, "worst", w);
            s.push_str("\n[summary]\n");
            let _ = writeln!(s, "fom = {}", format_si(w.fom));
            let v = self.violation.unwrap_or(0.0);
            let _ = writeln!(s, "violation = {}", format_si(v));
            let _ = writeln!(s, "feasible = {}", v == 0.0);
            let min = self
                .corners
                .iter()
                .min_by(|a, b| a.1.fom.total_cmp(&b.1.fom))
                .map(|c| c.0.as_str())
                .unwrap_or("");
            let _ = writeln!(s, "min_fom_corner = {min}");
            let schema = PerfMetrics::schema();
            let values = w.to_vec();
            for c in &constraints.items {
                let Some(i) = schema.index_of(&c.metric) else { continue };
                let part = c.shortfall(values[i]);
                if part > 0.0 {
                    let side = match c.direction {
                        Direction::AtLeast => "min",
                        Direction::AtMost => "max",
                    };
                    let _ = writeln!(s, "violation.{}.{side} = {}", c.metric, format_si(part));
                }
            }
        }
        s
    }

    /// Parses a record. Only `[design]` is required; metric sections are
    /// read back when present.
    pub fn from_text(text: &str) -> Result<Self> {
        let kv = KvFile::parse(text)?;
        let mut rec = DesignRecord {
            flow: None,
            seed: None,
            mode: "coupled".into(),
            names: Vec::new(),
            point: DesignPoint::new(Vec::new()),
            corners: Vec::new(),
            worst: None,
            violation: None,
        };
        for e in kv.section("") {
            match e.key.as_str() {
                "flow" => rec.flow = Some(e.value.parse()?),
                "seed" => {
                    rec.seed = Some(e.value.parse().map_err(|_| Error::parse(e.line, "bad seed"))?)
                }
                "mode" => rec.mode = e.value.clone(),
                other => return Err(Error::parse(e.line, format!("unknown key `{other}`"))),
            }
        }
        let mut values = Vec::new();
        for e in kv.section("design") {
            if rec.names.contains(&e.key) {
                return Err(Error::parse(e.line, format!("duplicate variable `{}`", e.key)));
            }
            rec.names.push(e.key.clone());
            values.push(e.number()?);
        }
        if rec.names.is_empty() {
            return Err(Error::invalid("design file has no [design] section"));
        }
        rec.point = DesignPoint::new(values);
        let schema = PerfMetrics::schema();
        for sec in kv.sections() {
            let Some(label) = sec.strip_prefix("metrics ") else {
                continue;
            };
            let mut v = vec![f64::NAN; schema.len()];
            for e in kv.section(sec) {
                let i = schema
                    .index_of(&e.key)
                    .ok_or_else(|| Error::parse(e.line, format!("unknown metric `{}`", e.key)))?;
                v[i] = e.number()?;
            }
            let m = PerfMetrics::from_slice(&v)?;
            if label == "worst" {
                rec.worst = Some(m);
            } else {
                rec.corners.push((label.to_string(), m));
            }
        }
        if let Some(e) = kv.get("summary", "violation") {
            rec.violation = Some(e.number()?);
        }
        Ok(rec)
    }

    /// Orders the record's values to match `space`, rejecting missing,
    /// unknown and out-of-range variables.
    pub fn point_in(&self, space: &DesignSpace) -> Result<DesignPoint> {
        for n in &self.names {
            if space.index_of(n).is_none() {
                return Err(Error::invalid(format!("unknown variable `{n}` in design")));
            }
        }
        let mut values = Vec::with_capacity(space.dim());
        for v in &space.variables {
            let i = self
                .names
                .iter()
                .position(|n| *n == v.name)
                .ok_or_else(|| Error::MissingVariable(v.name.clone()))?;
            let x = self.point.values[i];
            if !(x >= v.lower && x <= v.upper) {
                return Err(Error::invalid(format!(
                    "`{}` = {} lies outside [{}, {}]",
                    v.name,
                    format_si(x),
                    format_si(v.lower),
                    format_si(v.upper)
                )));
            }
            values.push(x);
        }
        Ok(DesignPoint::new(values))
    }
}

// ---------------------------------------------------------------- sweeps

/// 10 kHz to 100 MHz, 20 points per decade.
pub fn sweep_offsets() -> Vec<f64> {
    log_grid(1e4, 4, 20)
}

pub const SWEEP_HEADER: &str = "offset_hz,ideal_pn,coupled_intrinsic,coupled_supply,coupled_pn";

/// Phase noise against offset at one corner, ideal supply versus regulator.
pub fn pn_sweep_csv(ideal: &Testbench, coupled: &Testbench, point: &DesignPoint, corner: &Corner) -> Result<String> {
    let offsets = sweep_offsets();
    let a = ideal.with_mode(Mode::IdealSupply).pn_breakdown(point, corner, &offsets)?;
    let b = coupled.with_mode(Mode::Coupled).pn_breakdown(point, corner, &offsets)?;
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for (x, y) in a.iter().zip(&b) {
        let _ = writeln!(s, "{},{},{},{},{}", x.offset, x.total, y.intrinsic, y.supply, y.total);
    }
    Ok(s)
}

pub const CORNER_PN_HEADER: &str =
    "corner,ideal_pn100k,ideal_pn1m,ideal_pn10m,coupled_pn100k,coupled_pn1m,coupled_pn10m";

/// Phase noise at the constraint offsets for every corner in both modes.
pub fn corner_pn_csv(tb: &Testbench, point: &DesignPoint, corners: &[Corner]) -> Result<String> {
    let ideal = tb.with_mode(Mode::IdealSupply);
    let coupled = tb.with_mode(Mode::Coupled);
    let mut s = String::from(CORNER_PN_HEADER);
    s.push('\n');
    for c in corners {
        let a = ideal.evaluate_metrics(point, c)?;
        let b = coupled.evaluate_metrics(point, c)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.label(),
            a.pn100k,
            a.pn1m,
            a.pn10m,
            b.pn100k,
            b.pn1m,
            b.pn10m
        );
    }
    Ok(s)
}
