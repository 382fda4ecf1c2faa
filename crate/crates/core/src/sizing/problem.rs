//! The sizing problem: what is searched, where it is checked, what is optimized.

use crate::error::{Error, Result};
use crate::sizing::corner::Corner;
use crate::sizing::metrics::{ConstraintSet, MetricSchema};
use crate::sizing::space::{DesignPoint, DesignSpace};

/// Maps a full design point at one corner to a schema-ordered metric vector.
pub trait Evaluator: Sync {
    fn schema(&self) -> &MetricSchema;
    fn evaluate(&self, point: &DesignPoint, corner: &Corner) -> Result<Vec<f64>>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn schema(&self) -> &MetricSchema {
        (**self).schema()
    }
    fn evaluate(&self, point: &DesignPoint, corner: &Corner) -> Result<Vec<f64>> {
        (**self).evaluate(point, corner)
    }
}

/// A search space that is a slice of a larger one; inactive variables keep
/// the values of `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub full_space: DesignSpace,
    pub base: DesignPoint,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingProblem {
    /// The variables the optimizer moves.
    pub space: DesignSpace,
    pub corners: Vec<Corner>,
    pub constraints: ConstraintSet,
    /// Metric maximized in its worst case over `corners`.
    pub objective: String,
    pub embedding: Option<Embedding>,
}

impl SizingProblem {
    pub fn new(
        space: DesignSpace,
        corners: Vec<Corner>,
        constraints: ConstraintSet,
        objective: &str,
    ) -> Result<Self> {
        if corners.is_empty() {
            return Err(Error::invalid("a sizing problem needs at least one corner"));
        }
        let issues = space.validate();
        if !issues.is_empty() {
            let msgs: Vec<String> = issues.iter().map(|v| v.to_string()).collect();
            return Err(Error::invalid(format!("invalid space: {}", msgs.join("; "))));
        }
        Ok(SizingProblem {
            space,
            corners,
            constraints,
            objective: objective.into(),
            embedding: None,
        })
    }

    /// Same problem searching only `names`, others frozen at `base`.
    pub fn restrict(&self, names: &[&str], base: &DesignPoint) -> Result<SizingProblem> {
        let full = self.full_space().clone();
        if !full.contains(base) {
            return Err(Error::invalid("frozen base point is outside the design space"));
        }
        let space = full.subspace(names)?;
        let active = names
            .iter()
            .map(|n| full.index_of(n).expect("checked by subspace"))
            .collect();
        Ok(SizingProblem {
            space,
            corners: self.corners.clone(),
            constraints: self.constraints.clone(),
            objective: self.objective.clone(),
            embedding: Some(Embedding {
                full_space: full,
                base: base.clone(),
                active,
            }),
        })
    }

    pub fn full_space(&self) -> &DesignSpace {
        match &self.embedding {
            Some(e) => &e.full_space,
            None => &self.space,
        }
    }

    /// Search-space point to a full-space point.
    pub fn expand(&self, point: &DesignPoint) -> DesignPoint {
        match &self.embedding {
            None => point.clone(),
            Some(e) => {
                let mut full = e.base.clone();
                for (&i, &v) in e.active.iter().zip(&point.values) {
                    full.values[i] = v;
                }
                full
            }
        }
    }

    /// Checks that the evaluator can serve this problem; returns
    /// (objective index, constraint indices).
    pub fn bind(&self, schema: &MetricSchema) -> Result<(usize, Vec<usize>)> {
        let obj = schema
            .index_of(&self.objective)
            .ok_or_else(|| Error::invalid(format!("objective `{}` is not a metric", self.objective)))?;
        Ok((obj, self.constraints.resolve(schema)?))
    }

    /// All-corner evaluation of a search-space point.
    pub fn evaluate_all<E: Evaluator + ?Sized>(
        &self,
        evaluator: &E,
        point: &DesignPoint,
    ) -> Result<Vec<Vec<f64>>> {
        let full = self.expand(point);
        self.corners
            .iter()
            .map(|c| evaluator.evaluate(&full, c))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sizing::space::Variable;

    #[test]
    fn restrict_expands_with_frozen_values() {
        let space = DesignSpace::new(vec![
            Variable::continuous("a", 0.0, 1.0, ""),
            Variable::continuous("b", 0.0, 1.0, ""),
            Variable::continuous("c", 0.0, 1.0, ""),
        ]);
        let p = SizingProblem::new(space, vec![Corner::nominal()], ConstraintSet::default(), "y").unwrap();
        let base = DesignPoint::new(vec![0.1, 0.2, 0.3]);
        let sub = p.restrict(&["c", "a"], &base).unwrap();
        assert_eq!(sub.space.dim(), 2);
        let full = sub.expand(&DesignPoint::new(vec![0.9, 0.8]));
        assert_eq!(full.values, vec![0.8, 0.2, 0.9]);
        assert!(p.restrict(&["zz"], &base).is_err());
    }

    #[test]
    fn empty_corners_rejected() {
        let space = DesignSpace::new(vec![Variable::continuous("a", 0.0, 1.0, "")]);
        assert!(SizingProblem::new(space, vec![], ConstraintSet::default(), "y").is_err());
    }
}
