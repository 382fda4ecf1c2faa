//! Corner-aware, surrogate-assisted sizing of a regulator-supplied LC
//! oscillator.

pub mod cli;
pub mod error;
pub mod flows;
pub mod formats;
pub mod models;
pub mod optimizer;
pub mod sizing;
pub mod surrogate;
pub(crate) mod textfmt;
pub mod units;

pub use error::{Error, Result};
