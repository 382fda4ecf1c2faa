//! Analytical stand-ins for the circuit simulator.

pub mod ldo;
pub mod noise;
pub mod tech;
pub mod testbench;
pub mod vco;

pub use ldo::{map_ldo, LdoDerived, LdoSizing};
pub use noise::{combine_pn, supply_pn, vco_pn_intrinsic};
pub use tech::TechConstants;
pub use testbench::{Evaluation, FixedElements, Mode, PnBreakdown, Testbench};
pub use vco::{map_vco, VcoDerived, VcoSizing};
