//! Process constants, corner scaling, and the constants file.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sizing::corner::{Corner, NOMINAL_TEMPERATURE};
use crate::textfmt::KvFile;
use crate::units::format_si;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Reference temperature of the base constants, kelvin (27 °C).
pub const T_REF_K: f64 = 273.15 + NOMINAL_TEMPERATURE;

/// Process-level constants of the behavioral testbench. All SI.
#[derive(Debug, Clone, PartialEq)]
pub struct TechConstants {
    /// Thermal energy at the current temperature, J.
    pub kt: f64,
    pub gamma_excess: f64,
    /// Process transconductance µCox, A/V².
    pub kp_n: f64,
    pub kp_p: f64,
    /// Channel-length modulation times length, m/V (λ = lambda / L).
    pub lambda_n: f64,
    pub lambda_p: f64,
    /// Flicker coefficient, V²·F.
    pub kf: f64,
    /// Gate oxide capacitance per area, F/m².
    pub c_ox: f64,
    /// MOM capacitance per finger crossing per layer, F.
    pub c_unit_mom: f64,
    /// Inductor metal sheet resistance, Ω/sq.
    pub sheet_r: f64,
    /// Oscillator tail current per multiplier, A.
    pub i_unit: f64,
    /// Switching-device parasitic capacitance per µm of width, F.
    pub c_par_unit: f64,
    /// Frequency pushing per unit parasitic fraction, 1/V.
    pub kappa_push: f64,
    /// Inductance scale (1 at nominal).
    pub l_factor: f64,
    /// Flicker corner times switching-device gate area, Hz·m².
    pub fc_area: f64,
    /// Substrate-loss Q limit for a very wide guard ring.
    pub q_sub: f64,
    /// Inductor/guard-ring capacitance per metal area, F/m².
    pub c_ind_area: f64,
    /// Metal resistance temperature coefficient, 1/K.
    pub tc_r: f64,
    /// MOM capacitance temperature coefficient, 1/K.
    pub tc_c: f64,
    /// Pass-device drain coupling capacitance per µm of width, F.
    pub c_ds_unit: f64,
    /// Relative parasitic-capacitance shift per slow/fast step.
    pub c_par_process: f64,
    /// Supply-swing flattening strength of the bypass capacitor.
    pub k_flat: f64,
    /// Capacitance at which flattening reaches half its strength, F.
    pub c_flat: f64,
    /// Subthreshold slope factor n.
    pub n_sub: f64,
    /// PMOS threshold magnitude, V.
    pub vth_p: f64,
    /// Current temperature, °C (bookkeeping for temperature coefficients).
    pub temp_c: f64,
}

impl Default for TechConstants {
    fn default() -> Self {
        TechConstants {
            kt: BOLTZMANN * T_REF_K,
            gamma_excess: 0.5,
            kp_n: 300e-6,
            kp_p: 100e-6,
            lambda_n: 0.08e-6,
            lambda_p: 0.1e-6,
            kf: 1e-24,
            c_ox: 0.012,
            c_unit_mom: 0.07e-15,
            sheet_r: 0.015,
            i_unit: 6e-6,
            c_par_unit: 0.5e-15,
            kappa_push: 0.1,
            l_factor: 1.0,
            fc_area: 5e-6,
            q_sub: 60.0,
            c_ind_area: 10e-6,
            tc_r: 3.5e-3,
            tc_c: 1e-4,
            c_ds_unit: 0.05e-15,
            c_par_process: 0.05,
            k_flat: 0.6,
            c_flat: 20e-12,
            n_sub: 1.5,
            vth_p: 0.45,
            temp_c: NOMINAL_TEMPERATURE,
        }
    }
}

macro_rules! fields {
    ($m:ident) => {
        $m!(
            kt, gamma_excess, kp_n, kp_p, lambda_n, lambda_p, kf, c_ox, c_unit_mom, sheet_r,
            i_unit, c_par_unit, kappa_push, l_factor, fc_area, q_sub, c_ind_area, tc_r, tc_c,
            c_ds_unit, c_par_process, k_flat, c_flat, n_sub, vth_p, temp_c
        )
    };
}

impl TechConstants {
    pub fn validate(&self) -> Result<()> {
        macro_rules! check {
            ($($f:ident),*) => {
                $(
                    if !self.$f.is_finite() || (self.$f <= 0.0 && stringify!($f) != "temp_c") {
                        return Err(Error::invalid(format!(
                            "constant `{}` must be finite and positive (got {})",
                            stringify!($f), self.$f
                        )));
                    }
                )*
            };
        }
        fields!(check);
        Ok(())
    }

    /// Thermal voltage kT/q, V.
    pub fn thermal_voltage(&self) -> f64 {
        self.kt / ELECTRON_CHARGE
    }

    /// Reference-temperature base constants rescaled for `corner`.
    pub fn apply_corner(&self, corner: &Corner) -> TechConstants {
        let mut tc = self.clone();
        let t_k = 273.15 + corner.temperature;
        let t_ratio = t_k / T_REF_K;
        let mobility = t_ratio.powf(-1.5);
        let dt = corner.temperature - self.temp_c;
        tc.kp_n *= (1.0 - 0.10 * corner.nmos.slowness()) * mobility;
        tc.kp_p *= (1.0 - 0.10 * corner.pmos.slowness()) * mobility;
        tc.l_factor *= 1.0 + 0.10 * corner.inductor.sign();
        tc.c_unit_mom *= (1.0 + 0.15 * corner.capacitor.sign()) * (1.0 + self.tc_c * dt);
        tc.c_par_unit *=
            1.0 + self.c_par_process * 0.5 * (corner.nmos.slowness() + corner.pmos.slowness());
        tc.sheet_r *= 1.0 + self.tc_r * dt;
        tc.kt *= t_ratio;
        tc.temp_c = corner.temperature;
        tc
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from(
            "# Behavioral process constants, SI units, 27 C reference.\n\
             # Suffixes f p n u m K M G are accepted.\n",
        );
        macro_rules! emit {
            ($($f:ident),*) => {
                $( let _ = writeln!(s, "{} = {}", stringify!($f), format_si(self.$f)); )*
            };
        }
        fields!(emit);
        s
    }

    /// Parses a constants file; keys not present keep their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let kv = KvFile::parse(text)?;
        let mut tc = TechConstants::default();
        for entry in kv.section("") {
            let v = entry.number()?;
            macro_rules! set {
                ($($f:ident),*) => {
                    match entry.key.as_str() {
                        $( stringify!($f) => tc.$f = v, )*
                        other => return Err(Error::parse(entry.line, format!("unknown constant `{other}`"))),
                    }
                };
            }
            fields!(set);
        }
        tc.validate()?;
        Ok(tc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sizing::corner::{MosCorner, PassiveCorner};

    #[test]
    fn nominal_corner_is_identity() {
        let base = TechConstants::default();
        assert_eq!(base.apply_corner(&Corner::nominal()), base);
    }

    #[test]
    fn worst_corner_directions() {
        let base = TechConstants::default();
        let w = base.apply_corner(&Corner::worst_documented());
        assert!(w.kp_n < base.kp_n && w.kp_p < base.kp_p);
        assert!(w.c_unit_mom > base.c_unit_mom);
        assert!(w.l_factor > base.l_factor);
        assert!(w.kt > base.kt);
        assert!(w.c_par_unit > base.c_par_unit);
    }

    #[test]
    fn fast_cold_raises_mobility() {
        let base = TechConstants::default();
        let c = Corner {
            nmos: MosCorner::Fast,
            pmos: MosCorner::Fast,
            inductor: PassiveCorner::Min,
            capacitor: PassiveCorner::Min,
            temperature: -55.0,
            vdd_in: 1.62,
        };
        let f = base.apply_corner(&c);
        assert!(f.kp_n > base.kp_n * 1.1);
        assert!(f.kt < base.kt);
        assert!((f.l_factor - 0.9).abs() < 1e-15);
    }

    #[test]
    fn constants_file_round_trip() {
        let base = TechConstants::default();
        let back = TechConstants::from_text(&base.to_text()).unwrap();
        assert_eq!(back, base);
        assert!(TechConstants::from_text("kp_n = -1").is_err());
        assert!(TechConstants::from_text("nonsense = 1").is_err());
        let partial = TechConstants::from_text("kappa_push = 0.5\n").unwrap();
        assert_eq!(partial.kappa_push, 0.5);
        assert_eq!(partial.kp_n, base.kp_n);
    }
}
