//! Cross-coupled LC oscillator: tank, bias, swing and pushing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::models::tech::TechConstants;

const MU0: f64 = 4e-7 * PI;
// Modified-Wheeler coefficients for an octagonal spiral.
const WHEELER_K1: f64 = 2.25;
const WHEELER_K2: f64 = 3.55;
/// Octagon perimeter per unit average diameter: 8·tan(π/8).
const OCTAGON_PERIMETER: f64 = 3.313_708_498_984_761;
/// Guard-ring width at which substrate-loss Q reaches half of `q_sub`.
const GR_HALF: f64 = 10e-6;
/// Sharpness of the current-limited to voltage-limited swing transition.
const SWING_KNEE: f64 = 4.0;

/// The seventeen oscillator sizing values, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcoSizing {
    pub m2: f64,
    pub l34: f64,
    pub w34: f64,
    pub f34: f64,
    pub m34: f64,
    pub l56: f64,
    pub w56: f64,
    pub f56: f64,
    pub m56: f64,
    pub nh: f64,
    pub nv: f64,
    pub mbot: f64,
    pub w_ind: f64,
    pub r_ind: f64,
    pub nt_ind: f64,
    pub s_ind: f64,
    pub gr_ind: f64,
}

impl VcoSizing {
    pub const NAMES: [&'static str; 17] = [
        "M2", "L34", "W34", "F34", "M34", "L56", "W56", "F56", "M56", "NH", "NV", "Mbot", "W_ind",
        "R_ind", "NT_ind", "S_ind", "GR_ind",
    ];

    pub fn from_values(v: &[f64; 17]) -> Self {
        VcoSizing {
            m2: v[0],
            l34: v[1],
            w34: v[2],
            f34: v[3],
            m34: v[4],
            l56: v[5],
            w56: v[6],
            f56: v[7],
            m56: v[8],
            nh: v[9],
            nv: v[10],
            mbot: v[11],
            w_ind: v[12],
            r_ind: v[13],
            nt_ind: v[14],
            s_ind: v[15],
            gr_ind: v[16],
        }
    }
}

/// Derived oscillator quantities at one corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VcoDerived {
    pub f0: f64,
    pub l_tank: f64,
    pub q_tank: f64,
    /// Total tank capacitance including parasitics, F.
    pub c_tank: f64,
    pub c_par: f64,
    pub i_bias: f64,
    /// Effective negative-resistance transconductance, S.
    pub gm_sw: f64,
    pub r_p: f64,
    pub amplitude: f64,
    pub p_sig: f64,
    pub f_corner_1f: f64,
    /// Frequency pushing, Hz/V.
    pub k_push: f64,
    pub startup_margin: f64,
}

/// Octagonal-spiral inductance by the modified Wheeler expression.
pub fn spiral_inductance(turns: f64, width: f64, spacing: f64, inner_radius: f64) -> f64 {
    let d_in = 2.0 * inner_radius;
    let d_out = d_in + 2.0 * (turns * width + (turns - 1.0) * spacing);
    let d_avg = 0.5 * (d_in + d_out);
    let rho = (d_out - d_in) / (d_out + d_in);
    WHEELER_K1 * MU0 * turns * turns * d_avg / (1.0 + WHEELER_K2 * rho)
}

pub fn resonance(l: f64, c: f64) -> f64 {
    1.0 / (2.0 * PI * (l * c).sqrt())
}

/// Smooth minimum of the current-limited swing and the voltage limit.
pub fn limited_swing(current_limited: f64, v_limit: f64) -> f64 {
    let a = (current_limited / v_limit).powf(SWING_KNEE);
    current_limited / (1.0 + a).powf(1.0 / SWING_KNEE)
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::eval(name, format!("non-positive or non-finite value {x}")))
    }
}

/// Closed-form oscillator mapping. `v_limit` is the swing ceiling imposed by
/// the supply node (0.9·V for an ideal source, lower once bypassed).
pub fn map_vco(s: &VcoSizing, tc: &TechConstants, c_var: f64, v_limit: f64) -> Result<VcoDerived> {
    let d_in = 2.0 * s.r_ind;
    let d_out = d_in + 2.0 * (s.nt_ind * s.w_ind + (s.nt_ind - 1.0) * s.s_ind);
    let d_avg = 0.5 * (d_in + d_out);
    let l_tank = positive(
        "l_tank",
        tc.l_factor * spiral_inductance(s.nt_ind, s.w_ind, s.s_ind, s.r_ind),
    )?;
    let wire = OCTAGON_PERIMETER * d_avg * s.nt_ind;
    let r_s = positive("r_s", tc.sheet_r * wire / s.w_ind)?;
    let c_ind = tc.c_ind_area * wire * s.w_ind;
    let c_gr = 0.5 * tc.c_ind_area * s.gr_ind * OCTAGON_PERIMETER * (d_out + s.gr_ind);

    let c_mom = tc.c_unit_mom * s.nh * s.nv * (4.0 - s.mbot);
    let w_n = s.w56 * s.f56 * s.m56;
    let w_p = s.w34 * s.f34 * s.m34;
    // two devices per pair, widths in µm
    let c_par = positive("c_par", tc.c_par_unit * 2.0 * (w_n + w_p) * 1e6)?;
    let c_tank = positive("c_tank", c_mom + c_par + c_var + c_ind + c_gr)?;

    let f0 = resonance(l_tank, c_tank);
    let omega = 2.0 * PI * f0;
    let q_ind = omega * l_tank / r_s;
    let q_sub = tc.q_sub * s.gr_ind / (s.gr_ind + GR_HALF);
    let q_tank = positive("q_tank", 1.0 / (1.0 / q_ind + 1.0 / q_sub))?;
    let r_p = q_tank * omega * l_tank;

    let i_bias = positive("i_bias", tc.i_unit * s.m2)?;
    let half = 0.5 * i_bias;
    let gm_n = (2.0 * tc.kp_n * (w_n / s.l56) * half).sqrt();
    let gm_p = (2.0 * tc.kp_p * (w_p / s.l34) * half).sqrt();
    let gm_sw = positive("gm_sw", 0.5 * (gm_n + gm_p))?;

    let current_limited = (4.0 / PI) * half * r_p;
    let amplitude = positive("amplitude", limited_swing(current_limited, v_limit))?;
    let p_sig = amplitude * amplitude / (2.0 * r_p);

    let area_sw = s.w56 * s.l56 * s.f56 * s.m56;
    let f_corner_1f = positive("f_corner_1f", tc.fc_area / area_sw)?;
    let k_push = tc.kappa_push * f0 * c_par / c_tank;

    Ok(VcoDerived {
        f0,
        l_tank,
        q_tank,
        c_tank,
        c_par,
        i_bias,
        gm_sw,
        r_p,
        amplitude,
        p_sig,
        f_corner_1f,
        k_push,
        startup_margin: gm_sw * r_p,
    })
}
