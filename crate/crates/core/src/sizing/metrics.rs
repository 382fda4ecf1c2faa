//! Performance metrics, the FoM, constraints and the design ordering.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Which direction of a metric is better; the worst case over corners takes
/// the opposite extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    HigherIsBetter,
    LowerIsBetter,
}

/// Names and senses of a metric vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSchema {
    pub names: Vec<String>,
    pub senses: Vec<Sense>,
}

impl MetricSchema {
    pub fn new(entries: &[(&str, Sense)]) -> Self {
        MetricSchema {
            names: entries.iter().map(|(n, _)| n.to_string()).collect(),
            senses: entries.iter().map(|(_, s)| *s).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Per-metric pessimization over corners.
    pub fn worst_case(&self, per_corner: &[Vec<f64>]) -> Result<Vec<f64>> {
        let first = per_corner
            .first()
            .ok_or_else(|| Error::invalid("worst case of an empty corner list"))?;
        if per_corner.iter().any(|m| m.len() != self.len()) {
            return Err(Error::invalid("metric vector length does not match schema"));
        }
        let mut out = first.clone();
        for m in &per_corner[1..] {
            for (k, (o, &v)) in out.iter_mut().zip(m).enumerate() {
                *o = match self.senses[k] {
                    Sense::HigherIsBetter => pessimal_min(*o, v),
                    Sense::LowerIsBetter => pessimal_max(*o, v),
                };
            }
        }
        Ok(out)
    }
}

// NaN is the most pessimistic value in either direction.
fn pessimal_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

fn pessimal_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Outputs of one oscillator + regulator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfMetrics {
    /// Oscillation frequency, Hz.
    pub f0: f64,
    /// Phase noise at 100 kHz, 1 MHz and 10 MHz offsets, dBc/Hz.
    pub pn100k: f64,
    pub pn1m: f64,
    pub pn10m: f64,
    /// Total power, W.
    pub pdyn: f64,
    /// Peak supply rejection over 1 kHz..1 GHz, dB.
    pub psr_max: f64,
    /// Regulator phase margin, degrees.
    pub pm: f64,
    /// Highest oscillator supply voltage, V.
    pub vdd_max: f64,
    /// Small-signal loop gain of the cross-coupled pair at the tank.
    pub startup_margin: f64,
    /// FoM at 1 MHz offset (positive; tables print it negated).
    pub fom: f64,
}

pub const METRIC_NAMES: [&str; 10] = [
    "f0",
    "pn100k",
    "pn1m",
    "pn10m",
    "pdyn",
    "psr_max",
    "pm",
    "vdd_max",
    "startup_margin",
    "fom",
];

impl PerfMetrics {
    pub fn schema() -> MetricSchema {
        use Sense::*;
        MetricSchema::new(&[
            ("f0", HigherIsBetter),
            ("pn100k", LowerIsBetter),
            ("pn1m", LowerIsBetter),
            ("pn10m", LowerIsBetter),
            ("pdyn", LowerIsBetter),
            ("psr_max", LowerIsBetter),
            ("pm", HigherIsBetter),
            ("vdd_max", LowerIsBetter),
            ("startup_margin", HigherIsBetter),
            ("fom", HigherIsBetter),
        ])
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.f0,
            self.pn100k,
            self.pn1m,
            self.pn10m,
            self.pdyn,
            self.psr_max,
            self.pm,
            self.vdd_max,
            self.startup_margin,
            self.fom,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != METRIC_NAMES.len() {
            return Err(Error::invalid(format!(
                "expected {} metrics, got {}",
                METRIC_NAMES.len(),
                v.len()
            )));
        }
        Ok(PerfMetrics {
            f0: v[0],
            pn100k: v[1],
            pn1m: v[2],
            pn10m: v[3],
            pdyn: v[4],
            psr_max: v[5],
            pm: v[6],
            vdd_max: v[7],
            startup_margin: v[8],
            fom: v[9],
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        METRIC_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.to_vec()[i])
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }

    pub fn worst_case(per_corner: &[PerfMetrics]) -> Result<PerfMetrics> {
        let rows: Vec<Vec<f64>> = per_corner.iter().map(PerfMetrics::to_vec).collect();
        PerfMetrics::from_slice(&PerfMetrics::schema().worst_case(&rows)?)
    }
}

/// Oscillator FoM: `-10 log10[(df/f0)^2 * pdyn/1mW] - pn`.
pub fn fom(f0: f64, delta_f: f64, pn: f64, pdyn: f64) -> Result<f64> {
    if !(f0 > 0.0 && delta_f > 0.0 && pdyn > 0.0) {
        return Err(Error::invalid(format!(
            "fom needs positive f0, offset and power (got {f0}, {delta_f}, {pdyn})"
        )));
    }
    let ratio = delta_f / f0;
    Ok(-10.0 * (ratio * ratio * (pdyn / 1e-3)).log10() - pn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    AtMost,
    AtLeast,
}

impl Direction {
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "<=" => Ok(Direction::AtMost),
            ">=" => Ok(Direction::AtLeast),
            other => Err(format!("unknown constraint direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub metric: String,
    pub direction: Direction,
    pub bound: f64,
}

impl Constraint {
    pub fn new(metric: &str, direction: Direction, bound: f64) -> Result<Self> {
        if bound == 0.0 || !bound.is_finite() {
            return Err(Error::invalid(format!(
                "constraint on `{metric}` needs a finite nonzero bound"
            )));
        }
        Ok(Constraint {
            metric: metric.into(),
            direction,
            bound,
        })
    }

    /// Normalized shortfall, 0 when satisfied.
    pub fn shortfall(&self, value: f64) -> f64 {
        if value.is_nan() {
            return f64::INFINITY;
        }
        let raw = match self.direction {
            Direction::AtMost => value - self.bound,
            Direction::AtLeast => self.bound - value,
        };
        raw.max(0.0) / self.bound.abs()
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.metric, self.direction.symbol(), self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSet {
    pub items: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(items: Vec<Constraint>) -> Self {
        ConstraintSet { items }
    }

    /// Defaults for the regulated oscillator.
    pub fn ldo_vco_default() -> Self {
        use Direction::*;
        let c = |m, d, b| Constraint::new(m, d, b).expect("static bound");
        ConstraintSet::new(vec![
            c("f0", AtLeast, 5e9),
            // keeps the slowest corner near the 5.5 GHz target band
            c("f0", AtMost, 6e9),
            c("pn100k", AtMost, -94.0),
            c("pn1m", AtMost, -120.0),
            c("pn10m", AtMost, -140.0),
            c("pdyn", AtMost, 7e-3),
            c("psr_max", AtMost, -30.0),
            c("vdd_max", AtMost, 1.32),
            c("pm", AtLeast, 50.0),
            c("startup_margin", AtLeast, 2.0),
        ])
    }

    /// The subset that only concerns the oscillator core.
    pub fn vco_only(&self) -> Self {
        ConstraintSet::new(
            self.items
                .iter()
                .filter(|c| {
                    matches!(
                        c.metric.as_str(),
                        "f0" | "pn100k" | "pn1m" | "pn10m" | "pdyn" | "startup_margin"
                    )
                })
                .cloned()
                .collect(),
        )
    }

    /// Indices of the constrained metrics in `schema`.
    pub fn resolve(&self, schema: &MetricSchema) -> Result<Vec<usize>> {
        self.items
            .iter()
            .map(|c| {
                schema
                    .index_of(&c.metric)
                    .ok_or_else(|| Error::invalid(format!("unknown metric `{}`", c.metric)))
            })
            .collect()
    }

    /// Sum of normalized shortfalls over a schema-ordered metric vector.
    pub fn violation_vec(&self, schema: &MetricSchema, values: &[f64]) -> Result<f64> {
        let idx = self.resolve(schema)?;
        Ok(self.violation_indexed(&idx, values))
    }

    pub(crate) fn violation_indexed(&self, idx: &[usize], values: &[f64]) -> f64 {
        self.items
            .iter()
            .zip(idx)
            .map(|(c, &i)| c.shortfall(values[i]))
            .sum()
    }

    /// Per-constraint shortfalls, for reporting.
    pub fn breakdown(&self, schema: &MetricSchema, values: &[f64]) -> Result<Vec<(String, f64)>> {
        let idx = self.resolve(schema)?;
        Ok(self
            .items
            .iter()
            .zip(idx)
            .map(|(c, i)| (c.to_string(), c.shortfall(values[i])))
            .collect())
    }
}

pub fn violation(metrics: &PerfMetrics, constraints: &ConstraintSet) -> Result<f64> {
    constraints.violation_vec(&PerfMetrics::schema(), &metrics.to_vec())
}

/// What gets ranked: objective (higher is better), violation and insertion
/// index for deterministic ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub objective: f64,
    pub violation: f64,
    pub index: usize,
}

impl Score {
    pub fn new(objective: f64, violation: f64, index: usize) -> Self {
        Score {
            objective,
            violation,
            index,
        }
    }

    pub fn feasible(&self) -> bool {
        self.violation == 0.0
    }
}

fn objective_key(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

fn violation_key(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

/// Feasibility-first ordering. `Less` means `a` ranks ahead of `b`.
pub fn compare_designs(a: &Score, b: &Score) -> Ordering {
    let (fa, fb) = (a.feasible(), b.feasible());
    let primary = match (fa, fb) {
        (true, true) => objective_key(b.objective).total_cmp(&objective_key(a.objective)),
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => violation_key(a.violation).total_cmp(&violation_key(b.violation)),
    };
    primary.then(a.index.cmp(&b.index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fom_reference_rows() {
        assert!(close(fom(5.60e9, 1e6, -124.1, 4.56e-3).unwrap(), 192.4, 0.1));
        assert!(close(fom(5.69e9, 1e6, -122.9, 6.40e-3).unwrap(), 190.0, 0.1));
        assert_eq!(fom(1e9, 1e6, -100.0, 1e-3).unwrap(), 160.0);
    }

    #[test]
    fn fom_rejects_nonpositive() {
        assert!(fom(0.0, 1e6, -100.0, 1e-3).is_err());
        assert!(fom(1e9, -1.0, -100.0, 1e-3).is_err());
        assert!(fom(1e9, 1e6, -100.0, 0.0).is_err());
    }

    fn table_metrics(pn100k: f64, pm: f64) -> PerfMetrics {
        PerfMetrics {
            f0: 5.60e9,
            pn100k,
            pn1m: -124.1,
            pn10m: -144.7,
            pdyn: 4.56e-3,
            psr_max: -31.4,
            pm,
            vdd_max: 1.23,
            startup_margin: 3.0,
            fom: 192.4,
        }
    }

    #[test]
    fn violation_examples() {
        let cs = ConstraintSet::ldo_vco_default();
        assert_eq!(violation(&table_metrics(-95.6, 82.0), &cs).unwrap(), 0.0);
        let v = violation(&table_metrics(-93.8, 82.0), &cs).unwrap();
        assert!(close(v, 0.2 / 94.0, 1e-12), "{v}");
        assert_eq!(violation(&table_metrics(-95.6, 50.0), &cs).unwrap(), 0.0);
    }

    #[test]
    fn violation_unknown_metric() {
        let cs = ConstraintSet::new(vec![Constraint::new("gain", Direction::AtLeast, 1.0).unwrap()]);
        assert!(violation(&table_metrics(-95.6, 82.0), &cs).is_err());
        assert!(Constraint::new("pm", Direction::AtLeast, 0.0).is_err());
    }

    #[test]
    fn compare_examples() {
        let o = |a: Score, b: Score| compare_designs(&a, &b);
        assert_eq!(o(Score::new(191.0, 0.0, 0), Score::new(195.0, 0.3, 1)), Ordering::Less);
        assert_eq!(o(Score::new(192.4, 0.0, 5), Score::new(190.0, 0.0, 1)), Ordering::Less);
        assert_eq!(o(Score::new(0.0, 0.5, 0), Score::new(0.0, 0.2, 1)), Ordering::Greater);
        assert_eq!(o(Score::new(1.0, 0.0, 0), Score::new(1.0, 0.0, 1)), Ordering::Less);
    }

    #[test]
    fn worst_case_examples() {
        let a = table_metrics(-95.6, 82.0);
        let mut b = a;
        b.fom = 187.8;
        b.pn1m = -119.7;
        assert_eq!(PerfMetrics::worst_case(&[a]).unwrap(), a);
        let w = PerfMetrics::worst_case(&[a, b]).unwrap();
        assert_eq!(w.fom, 187.8);
        assert_eq!(w.pn1m, -119.7);
        assert!(PerfMetrics::worst_case(&[]).is_err());
    }

    fn metrics_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-200.0f64..200.0, 10)
    }

    proptest! {
        #[test]
        fn fom_power_doubling(f0 in 1e8f64..1e10, pn in -160.0f64..-60.0, p in 1e-5f64..1e-1) {
            let a = fom(f0, 1e6, pn, p).unwrap();
            let b = fom(f0, 1e6, pn, 2.0 * p).unwrap();
            prop_assert!(close(a - b, 10.0 * 2f64.log10(), 1e-9));
        }

        #[test]
        fn fom_offset_identity(f0 in 1e8f64..1e10, pn in -160.0f64..-60.0, p in 1e-5f64..1e-1) {
            let a = fom(f0, 1e6, pn, p).unwrap();
            let b = fom(f0, 1e7, pn - 20.0, p).unwrap();
            prop_assert!(close(a, b, 1e-9));
        }

        #[test]
        fn violation_zero_iff_satisfied_and_monotone(v in metrics_strategy(), k in 0usize..10, d in 0.0f64..50.0) {
            let cs = ConstraintSet::ldo_vco_default();
            let schema = PerfMetrics::schema();
            let total = cs.violation_vec(&schema, &v).unwrap();
            let all_ok = cs.items.iter().all(|c| c.shortfall(v[schema.index_of(&c.metric).unwrap()]) == 0.0);
            prop_assert_eq!(total == 0.0, all_ok);
            // worsen the k-th constrained metric
            let c = &cs.items[k % cs.items.len()];
            let i = schema.index_of(&c.metric).unwrap();
            let mut w = v.clone();
            w[i] += match c.direction { Direction::AtMost => d, Direction::AtLeast => -d };
            prop_assert!(c.shortfall(w[i]) >= c.shortfall(v[i]));
            let two_sided = cs.items.iter().any(|o| o.metric == c.metric && o.direction != c.direction);
            if !two_sided {
                prop_assert!(cs.violation_vec(&schema, &w).unwrap() >= total);
            }
        }

        #[test]
        fn compare_is_transitive(s in proptest::collection::vec((-5.0f64..5.0, prop_oneof![Just(0.0), 0.0f64..2.0]), 3)) {
            let sc: Vec<Score> = s.iter().enumerate().map(|(i, &(o, v))| Score::new(o.round(), v, i)).collect();
            let (a, b, c) = (&sc[0], &sc[1], &sc[2]);
            if compare_designs(a, b) != Ordering::Greater && compare_designs(b, c) != Ordering::Greater {
                prop_assert_ne!(compare_designs(a, c), Ordering::Greater);
            }
            prop_assert_eq!(compare_designs(a, b), compare_designs(b, a).reverse());
        }

        #[test]
        fn worst_case_idempotent_and_permutation_invariant(rows in proptest::collection::vec(metrics_strategy(), 1..6)) {
            let schema = PerfMetrics::schema();
            let w = schema.worst_case(&rows).unwrap();
            let mut rev = rows.clone();
            rev.reverse();
            prop_assert_eq!(schema.worst_case(&rev).unwrap(), w.clone());
            prop_assert_eq!(schema.worst_case(&[w.clone(), w.clone()]).unwrap(), w.clone());
            let mut with_w = rows.clone();
            with_w.push(w.clone());
            prop_assert_eq!(schema.worst_case(&with_w).unwrap(), w);
        }
    }
}
