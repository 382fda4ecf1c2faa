//! Oscillator phase noise: Leeson-type intrinsic term plus supply pushing.

use std::f64::consts::SQRT_2;

use crate::models::tech::TechConstants;
use crate::models::vco::VcoDerived;

/// Intrinsic single-sideband phase noise at offset `delta_f`, dBc/Hz.
pub fn vco_pn_intrinsic(d: &VcoDerived, delta_f: f64, tc: &TechConstants) -> f64 {
    leeson(
        1.0 + tc.gamma_excess,
        tc.kt,
        d.p_sig,
        d.f0,
        d.q_tank,
        d.f_corner_1f,
        delta_f,
    )
}

/// The bare Leeson expression.
pub fn leeson(
    noise_factor: f64,
    kt: f64,
    p_sig: f64,
    f0: f64,
    q: f64,
    f_corner: f64,
    delta_f: f64,
) -> f64 {
    let lorentz = f0 / (2.0 * q * delta_f);
    10.0 * ((2.0 * noise_factor * kt / p_sig)
        * (1.0 + lorentz * lorentz)
        * (1.0 + f_corner / delta_f))
        .log10()
}

/// Phase noise from supply noise `vn` (V/√Hz) pushed through `k_push` (Hz/V).
/// Zero noise gives negative infinity.
pub fn supply_pn(k_push: f64, vn: f64, delta_f: f64) -> f64 {
    if vn == 0.0 || k_push == 0.0 {
        return f64::NEG_INFINITY;
    }
    20.0 * (k_push * vn / (SQRT_2 * delta_f)).log10()
}

/// Incoherent power sum of dBc/Hz contributions; negative infinity is the
/// identity.
pub fn combine_pn(parts: &[f64]) -> f64 {
    let total: f64 = parts
        .iter()
        .filter(|p| **p != f64::NEG_INFINITY)
        .map(|p| 10f64.powf(p / 10.0))
        .sum();
    if total == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * total.log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tech::BOLTZMANN;
    use proptest::prelude::*;

    #[test]
    fn thermal_floor() {
        let kt = BOLTZMANN * 290.0;
        let floor = 10.0 * (2.0 * kt / 1e-3).log10();
        let pn = leeson(1.0, kt, 1e-3, 5e9, 10.0, 0.0, 1e12);
        assert!((pn - floor).abs() < 1e-3);
        assert!((pn + 170.97).abs() < 0.01, "{pn}");
    }

    #[test]
    fn leeson_slope() {
        let kt = BOLTZMANN * 300.0;
        let a = leeson(2.0, kt, 1e-3, 5.6e9, 10.0, 1e3, 1e5);
        let b = leeson(2.0, kt, 1e-3, 5.6e9, 10.0, 1e3, 1e6);
        assert!((b - a + 20.0).abs() < 0.5, "{}", b - a);
    }

    #[test]
    fn leeson_point() {
        let kt = BOLTZMANN * 300.0;
        let pn = leeson(2.0, kt, 1e-3, 5.6e9, 10.0, 200e3, 1e6);
        let l = 5.6e9 / (2.0 * 10.0 * 1e6);
        let oracle = 10.0 * (4.0 * kt / 1e-3 * (1.0 + l * l) * 1.2).log10();
        assert!((pn - oracle).abs() < 1e-9);
        assert!((pn + 118.07).abs() < 0.01, "{pn}");
    }

    #[test]
    fn supply_examples() {
        assert_eq!(supply_pn(1e7, 0.0, 1e6), f64::NEG_INFINITY);
        let base = supply_pn(1e7, 1e-7, 1e6);
        let oracle = 20.0 * (1e7 * 1e-7 / (2f64.sqrt() * 1e6)).log10();
        assert!((base - oracle).abs() < 1e-12);
        assert!((base + 123.01).abs() < 0.01, "{base}");
        let doubled = supply_pn(2e7, 1e-7, 1e6);
        assert!((doubled - base - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine_pn(&[-120.0, f64::NEG_INFINITY]), -120.0);
        assert!((combine_pn(&[-120.0, -120.0]) + 116.99).abs() < 0.01);
        assert_eq!(combine_pn(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn combine_permutation_and_identity(a in -200.0..-50.0f64, b in -200.0..-50.0f64, c in -200.0..-50.0f64) {
            let x = combine_pn(&[a, b, c]);
            let y = combine_pn(&[c, a, b, f64::NEG_INFINITY]);
            prop_assert!((x - y).abs() < 1e-9);
            prop_assert!(x >= a.max(b).max(c));
            let nested = combine_pn(&[combine_pn(&[a, b]), c]);
            prop_assert!((x - nested).abs() < 1e-9);
        }
    }
}
