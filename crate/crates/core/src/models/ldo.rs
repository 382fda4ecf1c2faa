//! Two-stage Miller-compensated error amplifier driving an NMOS pass device.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::tech::TechConstants;
use crate::models::FixedElements;

/// Output-stage mirror scaling relative to the bias reference.
const OUT_STAGE_SCALE: f64 = 4.0;
/// Smallest parasitic at the first-stage output node, F.
const C1_MIN: f64 = 10e-15;
/// Reference-noise flicker corner, Hz.
const REF_FLICKER_CORNER: f64 = 1e3;
/// Swing step used for the overshoot estimate, fraction of v_out.
const STEP_FRACTION: f64 = 0.1;

pub const PSR_GRID_START: f64 = 1e3;
pub const PSR_GRID_DECADES: usize = 6;
pub const PSR_POINTS_PER_DECADE: usize = 40;

/// Supply-rejection grid: 1 kHz to 1 GHz, 40 points per decade.
pub fn psr_grid() -> Vec<f64> {
    let n = PSR_GRID_DECADES * PSR_POINTS_PER_DECADE;
    (0..=n)
        .map(|k| PSR_GRID_START * 10f64.powf(k as f64 / PSR_POINTS_PER_DECADE as f64))
        .collect()
}

/// The twenty-six regulator sizing values, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdoSizing {
    pub l_nload: f64,
    pub w_nload: f64,
    pub f_nload: f64,
    pub m_nload: f64,
    pub l_pin: f64,
    pub w_pin: f64,
    pub f_pin: f64,
    pub m_pin: f64,
    pub l_bias: f64,
    pub w_bias: f64,
    pub f_bias: f64,
    pub m_bias: f64,
    pub m_bias_in: f64,
    pub m_bias_out: f64,
    pub l_nout: f64,
    pub w_nout: f64,
    pub f_nout: f64,
    pub m_nout: f64,
    pub c_c: f64,
    pub r_c: f64,
    pub c_f: f64,
    pub r_f: f64,
    pub l_pass: f64,
    pub w_pass: f64,
    pub f_pass: f64,
    pub m_pass: f64,
}

impl LdoSizing {
    pub const NAMES: [&'static str; 26] = [
        "L_nLoad", "W_nLoad", "F_nLoad", "M_nLoad", "L_pIn", "W_pIn", "F_pIn", "M_pIn", "L_bias",
        "W_bias", "F_bias", "M_bias", "M_biasIn", "M_biasOut", "L_nOut", "W_nOut", "F_nOut",
        "M_nOut", "C_C", "R_C", "C_F", "R_F", "L_pass", "W_pass", "F_pass", "M_pass",
    ];

    pub fn from_values(v: &[f64; 26]) -> Self {
        LdoSizing {
            l_nload: v[0],
            w_nload: v[1],
            f_nload: v[2],
            m_nload: v[3],
            l_pin: v[4],
            w_pin: v[5],
            f_pin: v[6],
            m_pin: v[7],
            l_bias: v[8],
            w_bias: v[9],
            f_bias: v[10],
            m_bias: v[11],
            m_bias_in: v[12],
            m_bias_out: v[13],
            l_nout: v[14],
            w_nout: v[15],
            f_nout: v[16],
            m_nout: v[17],
            c_c: v[18],
            r_c: v[19],
            c_f: v[20],
            r_f: v[21],
            l_pass: v[22],
            w_pass: v[23],
            f_pass: v[24],
            m_pass: v[25],
        }
    }
}

/// Square-law transconductance blended into the weak-inversion limit.
pub fn transconductance(kp: f64, w_over_l: f64, id: f64, n_ut: f64) -> f64 {
    let strong = (2.0 * kp * w_over_l * id).sqrt();
    1.0 / (1.0 / strong + n_ut / id)
}

/// Phase margin of a loop with poles `p1..p3` (Hz) and a zero with time
/// constant `tau_z` (s; negative for a right-half-plane zero), evaluated at
/// the crossover `f_c`.
pub fn phase_margin(f_c: f64, p1: f64, p2: f64, p3: f64, tau_z: f64) -> f64 {
    let lag = (f_c / p1).atan() + (f_c / p2).atan() + (f_c / p3).atan();
    let lead = (2.0 * PI * f_c * tau_z).atan();
    180.0 - (lag - lead).to_degrees()
}

/// Supply rejection from loop gain alone: `-20 log10|1 + a|`.
pub fn loop_rejection_db(a_loop: Complex64) -> f64 {
    -20.0 * (Complex64::new(1.0, 0.0) + a_loop).norm().log10()
}

/// Step overshoot of a second-order loop with the given phase margin.
pub fn overshoot(pm_deg: f64) -> f64 {
    let zeta = (pm_deg / 100.0).clamp(0.0, 0.99);
    (-PI * zeta / (1.0 - zeta * zeta).sqrt()).exp()
}

/// Small-signal regulator model at one corner.
#[derive(Debug, Clone, PartialEq)]
pub struct LdoDerived {
    pub a_dc: f64,
    /// Loop unity-gain frequency, Hz (0 when the loop never reaches unity).
    pub gbw: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Compensation zero, Hz; negative when in the right half plane.
    pub z1: f64,
    pub tau_z: f64,
    pub pm: f64,
    /// (Hz, dB) on `psr_grid()`.
    pub psr_curve: Vec<(f64, f64)>,
    pub psr_max: f64,
    pub i_q: f64,
    pub v_drop: f64,
    pub vdd_max: f64,
    pub gm1: f64,
    pub gm_nload: f64,
    pub gm2: f64,
    pub gm_pass: f64,
    // noise bookkeeping
    beta: f64,
    vn_thermal_sq: f64,
    vn_flicker_sq_hz: f64,
    vn_ref_sq: f64,
    ref_corner: f64,
    rf_thermal_sq: f64,
    vn_supply: f64,
    g_ds: f64,
    c_ds: f64,
    g_load: f64,
    c_out: f64,
}

impl LdoDerived {
    pub fn loop_gain(&self, f: f64) -> Complex64 {
        let j = Complex64::i();
        let num = Complex64::new(self.a_dc, 0.0) * (1.0 + j * (2.0 * PI * f * self.tau_z));
        let den = (1.0 + j * (f / self.p1)) * (1.0 + j * (f / self.p2)) * (1.0 + j * (f / self.p3));
        num / den
    }

    /// Open-loop supply feedthrough of the source follower into the bypassed
    /// output node.
    fn feedthrough(&self, f: f64) -> Complex64 {
        let w = 2.0 * PI * f;
        let y_ds = Complex64::new(self.g_ds, w * self.c_ds);
        y_ds / (y_ds + Complex64::new(self.gm_pass + self.g_load, w * self.c_out))
    }

    /// Complex supply-to-output transfer.
    pub fn psr(&self, f: f64) -> Complex64 {
        self.feedthrough(f) / (1.0 + self.loop_gain(f))
    }

    pub fn psr_db(&self, f: f64) -> f64 {
        20.0 * self.psr(f).norm().log10()
    }

    /// Output noise density at `f`, V/√Hz.
    pub fn vn(&self, f: f64) -> f64 {
        let amp_sq = self.vn_thermal_sq + self.vn_flicker_sq_hz / f;
        let x = 2.0 * PI * f * self.ref_corner;
        let ref_sq = (self.vn_ref_sq * (1.0 + REF_FLICKER_CORNER / f) + self.rf_thermal_sq)
            / (1.0 + x * x);
        let a = self.loop_gain(f);
        let closed = (a / (1.0 + a)).norm();
        let loop_part = (amp_sq + ref_sq) / (self.beta * self.beta) * closed * closed;
        let supply = self.vn_supply * self.psr(f).norm();
        (loop_part + supply * supply).sqrt()
    }

    pub fn vn_curve(&self) -> Vec<(f64, f64)> {
        psr_grid().into_iter().map(|f| (f, self.vn(f))).collect()
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::eval(name, format!("non-positive or non-finite value {x}")))
    }
}

/// Highest frequency where the loop gain magnitude still reaches one.
fn find_crossover(ldo: &LdoDerived) -> Option<f64> {
    let mag = |f: f64| ldo.loop_gain(f).norm();
    if mag(1.0) < 1.0 {
        return None;
    }
    // Scan down from 100 GHz in 1/20-decade steps, then bisect in log f.
    let steps = 11 * 20;
    let mut hi = 1e11;
    if mag(hi) >= 1.0 {
        return Some(hi);
    }
    let mut lo = hi;
    for k in 1..=steps {
        lo = 1e11 * 10f64.powf(-(k as f64) / 20.0);
        if mag(lo) >= 1.0 {
            break;
        }
        hi = lo;
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if mag(m.exp()) >= 1.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some((0.5 * (a + b)).exp())
}

pub fn map_ldo(
    s: &LdoSizing,
    tc: &TechConstants,
    fx: &FixedElements,
    i_load: f64,
    vdd_in: f64,
) -> Result<LdoDerived> {
    positive("i_load", i_load)?;
    let v_drop = vdd_in - fx.v_out;
    if !(v_drop > 0.0) {
        return Err(Error::eval("v_drop", format!("no headroom: vdd_in {vdd_in} V")));
    }
    let n_ut = tc.n_sub * tc.thermal_voltage();
    let beta = fx.beta_fb;

    // bias distribution
    let ratio_in = s.m_bias_in / s.m_bias;
    let ratio_out = s.m_bias_out / s.m_bias;
    let i_tail = fx.i_ref * ratio_in;
    let i2 = fx.i_ref * ratio_out * OUT_STAGE_SCALE;
    let i_q = fx.i_ref + i_tail + i2;

    // the tail device leaves less headroom for the input pair as its
    // overdrive grows
    let wl_bias = s.w_bias * s.f_bias / s.l_bias;
    let wl_pin = s.w_pin * s.f_pin * s.m_pin / s.l_pin;
    let v_ov_tail = (2.0 * i_tail / (tc.kp_p * wl_bias * s.m_bias_in)).sqrt();
    let v_ov_in = (i_tail / (tc.kp_p * wl_pin)).sqrt();
    let need = v_ov_tail + tc.vth_p + v_ov_in;
    let avail = positive("input_headroom", vdd_in - beta * fx.v_out)?;
    let i_tail = i_tail / (1.0 + (need / avail).powi(6));
    let half = 0.5 * i_tail;

    let wl_nload = s.w_nload * s.f_nload * s.m_nload / s.l_nload;
    let wl_nout = s.w_nout * s.f_nout * s.m_nout / s.l_nout;
    let gm1 = positive("gm1", transconductance(tc.kp_p, wl_pin, half, n_ut))?;
    let gm_nload = transconductance(tc.kp_n, wl_nload, half, n_ut);
    let ro1 = 1.0 / ((tc.lambda_p / s.l_pin + tc.lambda_n / s.l_nload) * half);
    let gm2 = positive("gm2", transconductance(tc.kp_n, wl_nout, i2, n_ut))?;
    let ro2 = 1.0 / ((tc.lambda_n / s.l_nout + tc.lambda_p / s.l_bias) * i2);

    // pass device as a source follower; drops out of saturation when its
    // overdrive approaches the available drain-source voltage
    let wl_pass = s.w_pass * s.f_pass * s.m_pass / s.l_pass;
    let v_ov_pass = (2.0 * i_load / (tc.kp_n * wl_pass)).sqrt();
    let gm_pass = positive("gm_pass", transconductance(tc.kp_n, wl_pass, i_load, n_ut))?;
    let sat = 1.0 / (1.0 + (v_ov_pass / v_drop).powi(4));
    let g_ds = tc.lambda_n / s.l_pass * i_load / sat;
    let c_ds = tc.c_ds_unit * s.w_pass * s.f_pass * s.m_pass * 1e6;

    let a_dc = positive("a_dc", gm1 * ro1 * gm2 * ro2 * beta)?;
    let gbw_est = beta * gm1 / (2.0 * PI * s.c_c);
    let p1 = gbw_est / a_dc;
    let c_out = fx.c_load + fx.c_byp;
    let p2 = positive("p2", gm2 / (2.0 * PI * c_out))?;
    let c1 = C1_MIN + (2.0 / 3.0) * tc.c_ox * s.w_nout * s.l_nout * s.f_nout * s.m_nout;
    let p3 = 1.0 / (2.0 * PI * s.r_c * c1);
    let tau_z = s.c_c * (s.r_c - 1.0 / gm2);
    let z1 = if tau_z == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * PI * tau_z)
    };

    // input pair + load thermal, plus flicker of both
    let gm_ratio = gm_nload / gm1;
    let vn_thermal_sq = 8.0 * tc.kt * tc.gamma_excess / gm1 * (1.0 + gm_ratio);
    let area_pin = s.w_pin * s.l_pin * s.f_pin * s.m_pin;
    let area_nload = s.w_nload * s.l_nload * s.f_nload * s.m_nload;
    let vn_flicker_sq_hz = 2.0 * tc.kf / (tc.c_ox * area_pin)
        + 2.0 * gm_ratio * gm_ratio * tc.kf / (tc.c_ox * area_nload);

    let mut out = LdoDerived {
        a_dc,
        gbw: 0.0,
        p1,
        p2,
        p3,
        z1,
        tau_z,
        pm: 180.0,
        psr_curve: Vec::new(),
        psr_max: 0.0,
        i_q,
        v_drop,
        vdd_max: 0.0,
        gm1,
        gm_nload,
        gm2,
        gm_pass,
        beta,
        vn_thermal_sq,
        vn_flicker_sq_hz,
        vn_ref_sq: fx.vn_ref * fx.vn_ref,
        ref_corner: s.r_f * s.c_f,
        rf_thermal_sq: 4.0 * tc.kt * s.r_f,
        vn_supply: fx.vn_supply,
        g_ds,
        c_ds,
        g_load: i_load / fx.v_out,
        c_out,
    };
    if let Some(f_c) = find_crossover(&out) {
        out.gbw = f_c;
        out.pm = phase_margin(f_c, p1, p2, p3, tau_z);
    }
    out.psr_curve = psr_grid().into_iter().map(|f| (f, out.psr_db(f))).collect();
    out.psr_max = out
        .psr_curve
        .iter()
        .map(|&(_, db)| db)
        .fold(f64::NEG_INFINITY, f64::max);
    if !out.psr_max.is_finite() {
        return Err(Error::eval("psr_max", "non-finite supply rejection"));
    }
    let static_err = fx.v_out / (1.0 + a_dc);
    out.vdd_max =
        (fx.v_out + static_err + STEP_FRACTION * fx.v_out * overshoot(out.pm)).min(vdd_in);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pole_margin_is_90() {
        let pm = phase_margin(1e6, 1e-6, f64::INFINITY, f64::INFINITY, 0.0);
        assert!((pm - 90.0).abs() < 1e-6, "{pm}");
    }

    #[test]
    fn pole_at_crossover_gives_45() {
        let pm = phase_margin(1e6, 1e-9, 1e6, f64::INFINITY, 0.0);
        assert!((pm - 45.0).abs() < 1e-9, "{pm}");
    }

    #[test]
    fn rhp_zero_costs_phase() {
        let lhp = phase_margin(1e6, 1e-9, 3e6, f64::INFINITY, 1e-7);
        let none = phase_margin(1e6, 1e-9, 3e6, f64::INFINITY, 0.0);
        let rhp = phase_margin(1e6, 1e-9, 3e6, f64::INFINITY, -1e-7);
        assert!(lhp > none && none > rhp);
    }

    #[test]
    fn dc_loop_rejection() {
        let db = loop_rejection_db(Complex64::new(1000.0, 0.0));
        assert!((db + 60.0).abs() < 0.01, "{db}");
        assert!((db + 20.0 * 1001f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn grid_shape() {
        let g = psr_grid();
        assert_eq!(g.len(), 241);
        assert_eq!(g[0], 1e3);
        assert!((g[240] / 1e9 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_inversion_cap() {
        let ut = 1.5 * 0.02585;
        let gm = transconductance(1e-4, 1e4, 1e-6, ut);
        assert!(gm < 1e-6 / ut);
        assert!(transconductance(1e-4, 1.0, 1e-3, ut) < (2e-7f64).sqrt());
    }

    #[test]
    fn overshoot_decreases_with_margin() {
        assert!(overshoot(45.0) > overshoot(60.0));
        assert!(overshoot(99.0) < 1e-5);
    }
}
