//! Design variables, spaces and points.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Continuous => "continuous",
            VarKind::Integer => "integer",
        }
    }
}

impl std::str::FromStr for VarKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "continuous" => Ok(VarKind::Continuous),
            "integer" => Ok(VarKind::Integer),
            other => Err(format!("unknown variable kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub unit: String,
    /// Circuit block the variable belongs to (`vco`, `ldo`, or empty).
    pub block: String,
}

impl Variable {
    pub fn continuous(name: &str, lower: f64, upper: f64, unit: &str) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Continuous,
            lower,
            upper,
            unit: unit.into(),
            block: String::new(),
        }
    }

    pub fn integer(name: &str, lower: f64, upper: f64) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Integer,
            lower,
            upper,
            unit: "integer".into(),
            block: String::new(),
        }
    }

    pub fn in_block(mut self, block: &str) -> Self {
        self.block = block.into();
        self
    }

    /// Clamp, then snap integers (half away from zero) and clamp again.
    pub fn repair_value(&self, raw: f64) -> f64 {
        let raw = if raw.is_nan() { self.lower } else { raw };
        let v = raw.clamp(self.lower, self.upper);
        match self.kind {
            VarKind::Continuous => v,
            VarKind::Integer => v.round().clamp(self.lower, self.upper),
        }
    }
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub variable: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.variable, self.rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DesignSpace {
    pub variables: Vec<Variable>,
    /// Circuit elements held constant during sizing (bypass cap, varactor, ...).
    pub fixed: BTreeMap<String, f64>,
}

/// A concrete assignment, parallel to `DesignSpace::variables`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub values: Vec<f64>,
}

impl DesignPoint {
    pub fn new(values: Vec<f64>) -> Self {
        DesignPoint { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl DesignSpace {
    pub fn new(variables: Vec<Variable>) -> Self {
        DesignSpace {
            variables,
            fixed: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    /// Value of `name` in `point`; panics on an unknown name, which is a
    /// programming error inside the bundled models.
    pub fn value(&self, point: &DesignPoint, name: &str) -> f64 {
        let i = self
            .index_of(name)
            .unwrap_or_else(|| panic!("unknown design variable `{name}`"));
        point.values[i]
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for v in &self.variables {
            let mut push = |rule: &str| {
                out.push(Violation {
                    variable: v.name.clone(),
                    rule: rule.into(),
                })
            };
            if v.name.is_empty() {
                push("empty name");
            }
            if !seen.insert(v.name.as_str()) {
                push("duplicate name");
            }
            if !v.lower.is_finite() || !v.upper.is_finite() {
                push("non-finite bound");
            } else if !(v.lower < v.upper) {
                push("lower bound must be strictly below upper bound");
            }
            if v.kind == VarKind::Integer
                && (v.lower.fract() != 0.0 || v.upper.fract() != 0.0)
            {
                push("integer variable requires integral bounds");
            }
        }
        out
    }

    pub fn repair(&self, raw: &[f64]) -> Result<DesignPoint> {
        if raw.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point has {} values, space has {} variables",
                raw.len(),
                self.dim()
            )));
        }
        Ok(DesignPoint::new(
            self.variables
                .iter()
                .zip(raw)
                .map(|(v, &x)| v.repair_value(x))
                .collect(),
        ))
    }

    /// True when every value is inside its bounds and integers are integral.
    pub fn contains(&self, point: &DesignPoint) -> bool {
        point.len() == self.dim()
            && self.variables.iter().zip(&point.values).all(|(v, &x)| {
                x >= v.lower
                    && x <= v.upper
                    && (v.kind == VarKind::Continuous || x.fract() == 0.0)
            })
    }

    pub fn midpoint(&self) -> DesignPoint {
        let raw: Vec<f64> = self
            .variables
            .iter()
            .map(|v| 0.5 * (v.lower + v.upper))
            .collect();
        self.repair(&raw).expect("dimension matches")
    }

    /// Latin-hypercube initial design: every variable's `n` samples fall in
    /// `n` distinct equal-width strata; integers are snapped afterwards.
    pub fn sample_initial(&self, n: usize, seed: u64) -> Result<Vec<DesignPoint>> {
        if n < 2 {
            return Err(Error::invalid("initial sample count must be at least 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = lhs_unit(n, self.dim(), &mut rng);
        unit.into_iter()
            .map(|u| {
                let raw: Vec<f64> = self
                    .variables
                    .iter()
                    .zip(&u)
                    .map(|(v, &t)| v.lower + t * (v.upper - v.lower))
                    .collect();
                self.repair(&raw)
            })
            .collect()
    }

    /// Space restricted to `names` (in the given order).
    pub fn subspace(&self, names: &[&str]) -> Result<DesignSpace> {
        let variables = names
            .iter()
            .map(|n| {
                self.index_of(n)
                    .map(|i| self.variables[i].clone())
                    .ok_or_else(|| Error::MissingVariable((*n).to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignSpace {
            variables,
            fixed: self.fixed.clone(),
        })
    }

    pub fn block_names(&self, block: &str) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| v.block == block)
            .map(|v| v.name.as_str())
            .collect()
    }
}

/// `n` points in the unit hypercube, one per stratum per dimension.
pub(crate) fn lhs_unit<R: Rng>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        strata.shuffle(rng);
        for (i, p) in points.iter_mut().enumerate() {
            let u: f64 = rng.random();
            p[j] = (strata[i] as f64 + u) / n as f64;
        }
    }
    points
}
