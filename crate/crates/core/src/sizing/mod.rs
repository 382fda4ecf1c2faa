//! Problem definition: variables, corners, metrics, constraints, ordering.

pub mod bundled;
pub mod corner;
pub mod metrics;
pub mod problem;
pub mod space;

pub use corner::{enumerate_corners, Corner, MosCorner, PassiveCorner};
pub use metrics::{
    compare_designs, fom, violation, Constraint, ConstraintSet, Direction, MetricSchema,
    PerfMetrics, Score, Sense,
};
pub use problem::{Embedding, Evaluator, SizingProblem};
pub use space::{DesignPoint, DesignSpace, VarKind, Variable, Violation};
