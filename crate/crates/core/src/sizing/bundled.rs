//! The bundled LDO-regulated LC-VCO design space and its two reference
//! sizings ("co-design" and "sequential").

use std::collections::BTreeMap;

use crate::sizing::corner::nominal_and_standard;
use crate::sizing::metrics::ConstraintSet;
use crate::sizing::problem::SizingProblem;
use crate::sizing::space::{DesignPoint, DesignSpace, Variable};
use crate::units::parse_si;

struct Row {
    block: &'static str,
    name: &'static str,
    unit: &'static str,
    lower: &'static str,
    upper: &'static str,
    codesign: &'static str,
    sequential: &'static str,
}

const fn row(
    block: &'static str,
    name: &'static str,
    unit: &'static str,
    lower: &'static str,
    upper: &'static str,
    codesign: &'static str,
    sequential: &'static str,
) -> Row {
    Row {
        block,
        name,
        unit,
        lower,
        upper,
        codesign,
        sequential,
    }
}

// Order is part of the file format: VCO block first, then the LDO.
#[rustfmt::skip]
const ROWS: [Row; 43] = [
    row("vco", "M2",        "integer", "1",    "1000", "300",   "872"),
    row("vco", "L34",       "m",       "60n",  "240n", "225n",  "239n"),
    row("vco", "W34",       "m",       "1u",   "6u",   "1.22u", "4.60u"),
    row("vco", "F34",       "integer", "2",    "32",   "7",     "10"),
    row("vco", "M34",       "integer", "1",    "10",   "8",     "2"),
    row("vco", "L56",       "m",       "60n",  "240n", "205n",  "75n"),
    row("vco", "W56",       "m",       "1u",   "6u",   "1.96u", "1.72u"),
    row("vco", "F56",       "integer", "2",    "32",   "11",    "13"),
    row("vco", "M56",       "integer", "1",    "10",   "6",     "10"),
    row("vco", "NH",        "integer", "10",   "200",  "74",    "94"),
    row("vco", "NV",        "integer", "10",   "200",  "95",    "88"),
    row("vco", "Mbot",      "integer", "1",    "3",    "1",     "1"),
    row("vco", "W_ind",     "m",       "3u",   "30u",  "28.2u", "27.9u"),
    row("vco", "R_ind",     "m",       "15u",  "90u",  "89.4u", "76.6u"),
    row("vco", "NT_ind",    "integer", "1",    "3",    "1",     "1"),
    row("vco", "S_ind",     "m",       "2u",   "4u",   "2.67u", "3.18u"),
    row("vco", "GR_ind",    "m",       "10u",  "40u",  "28.7u", "21.7u"),
    row("ldo", "L_nLoad",   "m",       "500n", "10u",  "6.64u", "8.28u"),
    row("ldo", "W_nLoad",   "m",       "400n", "10u",  "3.93u", "500n"),
    row("ldo", "F_nLoad",   "integer", "2",    "32",   "25",    "3"),
    row("ldo", "M_nLoad",   "integer", "1",    "10",   "2",     "2"),
    row("ldo", "L_pIn",     "m",       "400n", "10u",  "5.95u", "470n"),
    row("ldo", "W_pIn",     "m",       "400n", "10u",  "3.25u", "1.43u"),
    row("ldo", "F_pIn",     "integer", "2",    "32",   "29",    "5"),
    row("ldo", "M_pIn",     "integer", "1",    "10",   "5",     "1"),
    row("ldo", "L_bias",    "m",       "400n", "10u",  "5.55u", "3.63u"),
    row("ldo", "W_bias",    "m",       "400n", "10u",  "4.58u", "9.14u"),
    row("ldo", "F_bias",    "integer", "2",    "32",   "14",    "22"),
    row("ldo", "M_bias",    "integer", "1",    "10",   "7",     "9"),
    row("ldo", "M_biasIn",  "integer", "1",    "10",   "5",     "6"),
    row("ldo", "M_biasOut", "integer", "1",    "10",   "8",     "1"),
    row("ldo", "L_nOut",    "m",       "500n", "10u",  "2.53u", "3.42u"),
    row("ldo", "W_nOut",    "m",       "400n", "10u",  "2.08u", "6.35u"),
    row("ldo", "F_nOut",    "integer", "2",    "32",   "31",    "20"),
    row("ldo", "M_nOut",    "integer", "1",    "10",   "7",     "7"),
    row("ldo", "C_C",       "F",       "1p",   "100p", "67p",   "60p"),
    row("ldo", "R_C",       "ohm",     "1",    "1M",   "989K",  "514K"),
    row("ldo", "C_F",       "F",       "1p",   "200p", "182p",  "156p"),
    row("ldo", "R_F",       "ohm",     "1",    "2M",   "1.66M", "1.17M"),
    row("ldo", "L_pass",    "m",       "1.2u", "10u",  "1.69u", "1.62u"),
    row("ldo", "W_pass",    "m",       "500n", "10u",  "8.86u", "5.96u"),
    row("ldo", "F_pass",    "integer", "2",    "100",  "47",    "35"),
    row("ldo", "M_pass",    "integer", "1",    "32",   "15",    "15"),
];

pub const VARIABLE_COUNT: usize = ROWS.len();

fn si(s: &str) -> f64 {
    parse_si(s).unwrap_or_else(|e| panic!("bad bundled literal: {e}"))
}

/// Default values of the elements held constant during sizing.
pub fn fixed_elements() -> BTreeMap<String, f64> {
    [
        // varactor at its highest-frequency setting
        ("c_var", 120e-15),
        ("c_byp", 20e-12),
        ("beta_fb", 2.0 / 3.0),
        ("i_ref", 10e-6),
        ("v_out", 1.2),
        // oscillator supply-node capacitance seen by the regulator
        ("c_load", 2e-12),
        // noise densities of the I/O supply and the voltage reference
        ("vn_supply", 2e-6),
        ("vn_ref", 1e-6),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn ldo_vco_space() -> DesignSpace {
    let variables = ROWS
        .iter()
        .map(|r| {
            let (lo, hi) = (si(r.lower), si(r.upper));
            let v = if r.unit == "integer" {
                Variable::integer(r.name, lo, hi)
            } else {
                Variable::continuous(r.name, lo, hi, r.unit)
            };
            v.in_block(r.block)
        })
        .collect();
    DesignSpace {
        variables,
        fixed: fixed_elements(),
    }
}

pub fn codesign_point() -> DesignPoint {
    DesignPoint::new(ROWS.iter().map(|r| si(r.codesign)).collect())
}

pub fn sequential_point() -> DesignPoint {
    DesignPoint::new(ROWS.iter().map(|r| si(r.sequential)).collect())
}

pub fn vco_names() -> Vec<&'static str> {
    ROWS.iter().filter(|r| r.block == "vco").map(|r| r.name).collect()
}

pub fn ldo_names() -> Vec<&'static str> {
    ROWS.iter().filter(|r| r.block == "ldo").map(|r| r.name).collect()
}

/// Full 43-variable problem: nominal + 32 corners, default constraints,
/// worst-case FoM objective.
pub fn ldo_vco_problem() -> SizingProblem {
    SizingProblem::new(
        ldo_vco_space(),
        nominal_and_standard(),
        ConstraintSet::ldo_vco_default(),
        "fom",
    )
    .expect("bundled problem is valid")
}
