//! Neural prescreening model.

pub mod ensemble;
pub mod mlp;
pub mod scaler;

pub use ensemble::{EnsembleModel, MlpConfig};
pub use scaler::{ColumnStats, ScalerStats};
