//! Surrogate-assisted evolutionary loop: database, DE children, neural
//! prescreening, one true all-corner evaluation per iteration.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sizing::metrics::{compare_designs, MetricSchema, Score, Sense};
use crate::sizing::problem::{Evaluator, SizingProblem};
use crate::sizing::space::{DesignPoint, DesignSpace};
use crate::surrogate::{EnsembleModel, MlpConfig};
use crate::units::format_si;

/// Smallest objective gain that counts as progress.
pub const IMPROVE_TOL: f64 = 1e-6;
/// Regeneration rounds before a duplicate child is accepted.
const DEDUP_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct OptConfig {
    pub lambda_parents: usize,
    pub children_per_iter: usize,
    pub de_f: f64,
    pub de_cr: f64,
    /// `None` means clamp(4·dim, 20, 80).
    pub init_samples: Option<usize>,
    pub eval_budget: usize,
    pub no_improve_limit: usize,
    pub beta: f64,
    pub seed: u64,
    pub surrogate: MlpConfig,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            lambda_parents: 20,
            children_per_iter: 50,
            de_f: 0.8,
            de_cr: 0.8,
            init_samples: None,
            eval_budget: 500,
            no_improve_limit: 100,
            beta: 0.7,
            seed: 1,
            surrogate: MlpConfig::default(),
        }
    }
}

impl OptConfig {
    pub fn init_count(&self, dim: usize) -> usize {
        self.init_samples.unwrap_or_else(|| (4 * dim).clamp(20, 80))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.lambda_parents < 4 {
            return bad(format!("lambda_parents {} < 4", self.lambda_parents));
        }
        if self.children_per_iter == 0 {
            return bad("children_per_iter must be positive".into());
        }
        if !(self.de_f >= 0.0 && self.de_f.is_finite()) || !(0.0..=1.0).contains(&self.de_cr) {
            return bad("de_f must be non-negative and de_cr in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta {} outside [0, 1]", self.beta));
        }
        let init = self.init_count(dim);
        if init < 2 {
            return bad("init_samples must be at least 2".into());
        }
        if self.eval_budget <= init {
            return bad(format!(
                "eval_budget {} must exceed init_samples {init}",
                self.eval_budget
            ));
        }
        self.surrogate.validate()
    }

    /// Copy with a different seed and budget.
    pub fn with(&self, seed: u64, budget: usize) -> Self {
        OptConfig {
            seed,
            eval_budget: budget,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Initial,
    De,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Initial => "init",
            Origin::De => "de",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Search-space point.
    pub point: DesignPoint,
    /// Same point with frozen variables filled in.
    pub full_point: DesignPoint,
    /// Schema-ordered metrics per corner; empty when evaluation failed.
    pub per_corner: Vec<Vec<f64>>,
    pub worst: Vec<f64>,
    pub violation: f64,
    pub objective: f64,
    pub eval_index: usize,
    pub origin: Origin,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn score(&self) -> Score {
        Score::new(self.objective, self.violation, self.eval_index)
    }

    pub fn feasible(&self) -> bool {
        self.failure.is_none() && self.violation == 0.0
    }
}

/// Everything truly evaluated so far, in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Database {
    pub records: Vec<TrialRecord>,
    incumbent: Option<usize>,
    /// Consecutive insertions that did not improve the incumbent.
    pub stagnation: usize,
    seen: HashSet<Vec<u64>>,
}

fn point_key(p: &DesignPoint) -> Vec<u64> {
    p.values.iter().map(|v| v.to_bits()).collect()
}

impl Database {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn incumbent(&self) -> Option<&TrialRecord> {
        self.incumbent.map(|i| &self.records[i])
    }

    pub fn contains(&self, p: &DesignPoint) -> bool {
        self.seen.contains(&point_key(p))
    }

    /// Appends a record and returns whether it improved the incumbent.
    pub fn insert(&mut self, rec: TrialRecord) -> bool {
        let idx = self.records.len();
        self.seen.insert(point_key(&rec.point));
        let improved = match self.incumbent() {
            None => true,
            Some(inc) => {
                compare_designs(&rec.score(), &inc.score()) == Ordering::Less
                    && (rec.violation < inc.violation
                        || rec.objective - inc.objective >= IMPROVE_TOL)
            }
        };
        let takes_over = match self.incumbent() {
            None => true,
            Some(inc) => compare_designs(&rec.score(), &inc.score()) == Ordering::Less,
        };
        self.records.push(rec);
        if takes_over {
            self.incumbent = Some(idx);
        }
        improved
    }

    /// Record indices, best first.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.records.len()).collect();
        idx.sort_by(|&a, &b| compare_designs(&self.records[a].score(), &self.records[b].score()));
        idx
    }

    /// Successful records as surrogate training data.
    pub fn training_set(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.records
            .iter()
            .filter(|r| r.failure.is_none())
            .map(|r| (r.point.values.clone(), r.worst.clone()))
            .unzip()
    }
}

/// The problem bound to an evaluator's schema.
struct Bound<'a, E: ?Sized> {
    problem: &'a SizingProblem,
    evaluator: &'a E,
    schema: MetricSchema,
    obj: usize,
    cons: Vec<usize>,
}

impl<'a, E: Evaluator + ?Sized> Bound<'a, E> {
    fn new(problem: &'a SizingProblem, evaluator: &'a E) -> Result<Self> {
        let schema = evaluator.schema().clone();
        let (obj, cons) = problem.bind(&schema)?;
        if schema.senses[obj] != Sense::HigherIsBetter {
            return Err(Error::invalid(format!(
                "objective `{}` must be a higher-is-better metric",
                problem.objective
            )));
        }
        Ok(Bound {
            problem,
            evaluator,
            schema,
            obj,
            cons,
        })
    }

    fn score_vec(&self, worst: &[f64]) -> (f64, f64) {
        (
            worst[self.obj],
            self.problem.constraints.violation_indexed(&self.cons, worst),
        )
    }

    fn evaluate(&self, point: DesignPoint, eval_index: usize, origin: Origin) -> TrialRecord {
        let full_point = self.problem.expand(&point);
        let outcome = self
            .problem
            .evaluate_all(self.evaluator, &point)
            .and_then(|pc| {
                let w = self.schema.worst_case(&pc)?;
                Ok((pc, w))
            });
        match outcome {
            Ok((per_corner, worst)) => {
                let (objective, violation) = self.score_vec(&worst);
                TrialRecord {
                    point,
                    full_point,
                    per_corner,
                    worst,
                    violation,
                    objective,
                    eval_index,
                    origin,
                    failure: None,
                }
            }
            Err(e) => TrialRecord {
                point,
                full_point,
                per_corner: Vec::new(),
                worst: vec![f64::NAN; self.schema.len()],
                violation: f64::INFINITY,
                objective: f64::NEG_INFINITY,
                eval_index,
                origin,
                failure: Some(e.to_string()),
            },
        }
    }
}

/// Evaluates the initial Latin-hypercube sample on every corner.
pub fn init_db<E: Evaluator + ?Sized>(
    problem: &SizingProblem,
    evaluator: &E,
    cfg: &OptConfig,
) -> Result<Database> {
    let bound = Bound::new(problem, evaluator)?;
    cfg.validate(problem.space.dim())?;
    let n = cfg.init_count(problem.space.dim());
    let mut db = Database::default();
    for (i, p) in problem.space.sample_initial(n, cfg.seed)?.into_iter().enumerate() {
        db.insert(bound.evaluate(p, i, Origin::Initial));
    }
    db.stagnation = 0;
    Ok(db)
}

/// DE/current-to-best/1 with binomial crossover, before repair.
pub fn de_generate<R: Rng + ?Sized>(
    parents: &[&[f64]],
    base: usize,
    best: &[f64],
    f: f64,
    cr: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if parents.len() < 3 {
        return Err(Error::invalid(format!(
            "DE needs at least 3 parents, got {}",
            parents.len()
        )));
    }
    if base >= parents.len() {
        return Err(Error::invalid("DE base index out of range"));
    }
    let mut donors = (0..parents.len()).filter(|&k| k != base).choose_multiple(rng, 2);
    if rng.random::<bool>() {
        donors.swap(0, 1);
    }
    let (x, r1, r2) = (parents[base], parents[donors[0]], parents[donors[1]]);
    let dim = x.len();
    let j_rand = rng.random_range(0..dim);
    Ok((0..dim)
        .map(|j| {
            if j == j_rand || rng.random::<f64>() < cr {
                x[j] + f * (best[j] - x[j]) + f * (r1[j] - r2[j])
            } else {
                x[j]
            }
        })
        .collect())
}

/// Index of the child with the best conservative prediction.
pub fn select_candidate(
    children: &[DesignPoint],
    model: &EnsembleModel,
    problem: &SizingProblem,
    schema: &MetricSchema,
    beta: f64,
) -> Result<usize> {
    if children.is_empty() {
        return Err(Error::invalid("no children to choose from"));
    }
    let (obj, cons) = problem.bind(schema)?;
    let mut best: Option<Score> = None;
    for (i, c) in children.iter().enumerate() {
        let pred = model.predict_conservative(&c.values, beta, &schema.senses)?;
        let s = Score::new(pred[obj], problem.constraints.violation_indexed(&cons, &pred), i);
        if best.is_none_or(|b| compare_designs(&s, &b) == Ordering::Less) {
            best = Some(s);
        }
    }
    Ok(best.expect("non-empty").index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Budget,
    Stagnation,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Budget => "budget",
            StopReason::Stagnation => "stagnation",
        }
    }
}

pub fn check_stop(db: &Database, cfg: &OptConfig) -> Option<StopReason> {
    if db.len() >= cfg.eval_budget {
        Some(StopReason::Budget)
    } else if db.stagnation >= cfg.no_improve_limit {
        Some(StopReason::Stagnation)
    } else {
        None
    }
}

/// State carried between iterations.
pub struct Optimizer<'a, E: Evaluator + ?Sized> {
    bound: Bound<'a, E>,
    pub cfg: OptConfig,
    pub db: Database,
    pub model: Option<EnsembleModel>,
    rng: ChaCha8Rng,
}

impl<'a, E: Evaluator + ?Sized> Optimizer<'a, E> {
    pub fn new(problem: &'a SizingProblem, evaluator: &'a E, cfg: &OptConfig) -> Result<Self> {
        let bound = Bound::new(problem, evaluator)?;
        let db = init_db(problem, evaluator, cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(1);
        Ok(Optimizer {
            bound,
            cfg: cfg.clone(),
            db,
            model: None,
            rng,
        })
    }

    fn space(&self) -> &DesignSpace {
        &self.bound.problem.space
    }

    fn refresh_model(&mut self) -> Result<()> {
        let (xs, ys) = self.db.training_set();
        if xs.len() < crate::surrogate::ensemble::MIN_SAMPLES {
            self.model = None;
            return Ok(());
        }
        match &mut self.model {
            Some(m) => m.refit(&xs, &ys)?,
            None => {
                self.model = Some(EnsembleModel::fit(&xs, &ys, &self.cfg.surrogate, self.cfg.seed)?)
            }
        }
        Ok(())
    }

    fn children(&mut self) -> Result<Vec<DesignPoint>> {
        let ranked = self.db.ranked();
        let lambda = self.cfg.lambda_parents.min(ranked.len());
        let parents: Vec<&[f64]> = ranked[..lambda]
            .iter()
            .map(|&i| self.db.records[i].point.values.as_slice())
            .collect();
        let best = parents[0];
        let mut fresh = Vec::new();
        let mut dupes = Vec::new();
        let mut batch_seen = HashSet::new();
        for _ in 0..DEDUP_ROUNDS {
            for k in 0..self.cfg.children_per_iter {
                let raw = de_generate(
                    &parents,
                    k % lambda,
                    best,
                    self.cfg.de_f,
                    self.cfg.de_cr,
                    &mut self.rng,
                )?;
                let child = self.space().repair(&raw)?;
                if self.db.contains(&child) {
                    dupes.push(child);
                } else if batch_seen.insert(point_key(&child)) {
                    fresh.push(child);
                }
            }
            if !fresh.is_empty() {
                return Ok(fresh);
            }
        }
        Ok(dupes)
    }

    /// One iteration; `Some` once the loop should stop.
    pub fn step(&mut self) -> Result<Option<StopReason>> {
        if let Some(r) = check_stop(&self.db, &self.cfg) {
            return Ok(Some(r));
        }
        let children = self.children()?;
        self.refresh_model()?;
        let pick = match &self.model {
            Some(m) => select_candidate(
                &children,
                m,
                self.bound.problem,
                &self.bound.schema,
                self.cfg.beta,
            )?,
            None => 0,
        };
        let child = children.into_iter().nth(pick).expect("pick within children");
        let rec = self.bound.evaluate(child, self.db.len(), Origin::De);
        if self.db.insert(rec) {
            self.db.stagnation = 0;
        } else {
            self.db.stagnation += 1;
        }
        Ok(check_stop(&self.db, &self.cfg))
    }

    pub fn run(mut self) -> Result<RunOutcome> {
        loop {
            if let Some(reason) = self.step()? {
                return Ok(RunOutcome {
                    db: self.db,
                    stop: reason,
                    schema: self.bound.schema,
                });
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub db: Database,
    pub stop: StopReason,
    pub schema: MetricSchema,
}

impl RunOutcome {
    pub fn best(&self) -> &TrialRecord {
        self.db.incumbent().expect("a finished run has records")
    }

    pub fn evals(&self) -> usize {
        self.db.len()
    }
}

/// Full optimization run.
pub fn run<E: Evaluator + ?Sized>(
    problem: &SizingProblem,
    evaluator: &E,
    cfg: &OptConfig,
) -> Result<RunOutcome> {
    Optimizer::new(problem, evaluator, cfg)?.run()
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// CSV log, one row per true evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    metric_names: Vec<String>,
    variable_names: Vec<String>,
    text: String,
    rows: usize,
}

pub const LOG_FIXED_COLUMNS: [&str; 7] = [
    "stage",
    "eval_index",
    "origin",
    "objective",
    "violation",
    "incumbent_objective",
    "incumbent_violation",
];

impl RunLog {
    pub fn new(schema: &MetricSchema, full_space: &DesignSpace) -> Self {
        let metric_names = schema.names.clone();
        let variable_names: Vec<String> = full_space.names().map(String::from).collect();
        let mut text = LOG_FIXED_COLUMNS.join(",");
        for n in metric_names.iter().chain(&variable_names) {
            text.push(',');
            text.push_str(n);
        }
        text.push('\n');
        RunLog {
            metric_names,
            variable_names,
            text,
            rows: 0,
        }
    }

    pub fn header(&self) -> &str {
        self.text.lines().next().unwrap_or("")
    }

    /// Appends every record in the outcome, replaying the incumbent.
    pub fn append(&mut self, stage: &str, outcome: &RunOutcome) {
        let mut inc: Option<&TrialRecord> = None;
        for rec in &outcome.db.records {
            if inc.is_none_or(|b| compare_designs(&rec.score(), &b.score()) == Ordering::Less) {
                inc = Some(rec);
            }
            let b = inc.expect("set above");
            let _ = write!(
                self.text,
                "{stage},{},{},{},{},{},{}",
                self.rows,
                rec.origin.as_str(),
                fmt_num(rec.objective),
                fmt_num(rec.violation),
                fmt_num(b.objective),
                fmt_num(b.violation)
            );
            for v in rec.worst.iter().chain(&rec.full_point.values) {
                self.text.push(',');
                self.text.push_str(&fmt_num(*v));
            }
            self.text.push('\n');
            self.rows += 1;
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn metric_names(&self) -> &[String] {
        &self.metric_names
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }
}

/// Parsed run-log row.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub stage: String,
    pub eval_index: usize,
    pub origin: String,
    pub objective: f64,
    pub violation: f64,
    pub incumbent_objective: f64,
    pub incumbent_violation: f64,
    pub metrics: Vec<f64>,
    pub variables: Vec<f64>,
}

/// Reads a log written by `RunLog`; returns (header columns, rows).
pub fn parse_log(text: &str, metric_count: usize) -> Result<(Vec<String>, Vec<LogRow>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty run log"))?
        .split(',')
        .map(String::from)
        .collect();
    let fixed = LOG_FIXED_COLUMNS.len();
    if header.len() < fixed + metric_count || header[..fixed] != LOG_FIXED_COLUMNS {
        return Err(Error::parse(1, "unexpected run-log header"));
    }
    let mut rows = Vec::new();
    for (no, line) in lines.enumerate() {
        let line_no = no + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::parse(line_no, "wrong number of cells"));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("bad number `{s}`")))
        };
        let nums: Vec<f64> = cells[3..].iter().map(|c| num(c)).collect::<Result<_>>()?;
        rows.push(LogRow {
            stage: cells[0].to_string(),
            eval_index: cells[1]
                .parse()
                .map_err(|_| Error::parse(line_no, "bad eval_index"))?,
            origin: cells[2].to_string(),
            objective: nums[0],
            violation: nums[1],
            incumbent_objective: nums[2],
            incumbent_violation: nums[3],
            metrics: nums[4..4 + metric_count].to_vec(),
            variables: nums[4 + metric_count..].to_vec(),
        });
    }
    Ok((header, rows))
}

/// Human summary of a record's worst-case metrics.
pub fn describe(rec: &TrialRecord, schema: &MetricSchema) -> String {
    let mut s = String::new();
    for (n, v) in schema.names.iter().zip(&rec.worst) {
        let _ = write!(s, "{n}={} ", format_si(*v));
    }
    s.trim_end().to_string()
}
