//! PVT corners.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MosCorner {
    Fast,
    Slow,
    Nominal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassiveCorner {
    Min,
    Max,
    Nominal,
}

impl MosCorner {
    fn tag(self) -> char {
        match self {
            MosCorner::Fast => 'f',
            MosCorner::Slow => 's',
            MosCorner::Nominal => 't',
        }
    }

    /// +1 for slow, -1 for fast, 0 for nominal.
    pub fn slowness(self) -> f64 {
        match self {
            MosCorner::Fast => -1.0,
            MosCorner::Slow => 1.0,
            MosCorner::Nominal => 0.0,
        }
    }
}

impl PassiveCorner {
    fn tag(self) -> &'static str {
        match self {
            PassiveCorner::Min => "min",
            PassiveCorner::Max => "max",
            PassiveCorner::Nominal => "nom",
        }
    }

    /// -1 for min, +1 for max, 0 for nominal.
    pub fn sign(self) -> f64 {
        match self {
            PassiveCorner::Min => -1.0,
            PassiveCorner::Max => 1.0,
            PassiveCorner::Nominal => 0.0,
        }
    }
}

pub const ALLOWED_TEMPERATURES: [f64; 3] = [-55.0, 27.0, 125.0];
pub const NOMINAL_TEMPERATURE: f64 = 27.0;
/// Lowest I/O supply: 1.8 V minus 10 %.
pub const VDD_IN_MIN: f64 = 1.62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub nmos: MosCorner,
    pub pmos: MosCorner,
    pub inductor: PassiveCorner,
    pub capacitor: PassiveCorner,
    /// Degrees Celsius.
    pub temperature: f64,
    pub vdd_in: f64,
}

impl Corner {
    pub fn nominal() -> Self {
        Corner {
            nmos: MosCorner::Nominal,
            pmos: MosCorner::Nominal,
            inductor: PassiveCorner::Nominal,
            capacitor: PassiveCorner::Nominal,
            temperature: NOMINAL_TEMPERATURE,
            vdd_in: VDD_IN_MIN,
        }
    }

    /// The slow/slow, max-L, max-C, 125 °C corner.
    pub fn worst_documented() -> Self {
        Corner {
            nmos: MosCorner::Slow,
            pmos: MosCorner::Slow,
            inductor: PassiveCorner::Max,
            capacitor: PassiveCorner::Max,
            temperature: 125.0,
            vdd_in: VDD_IN_MIN,
        }
    }

    pub fn is_nominal(&self) -> bool {
        *self == Corner::nominal()
    }

    /// Short stable label, e.g. `ss_maxL_maxC_125C`.
    pub fn label(&self) -> String {
        if self.is_nominal() {
            return "nominal".into();
        }
        let t = if self.temperature < 0.0 {
            format!("m{}C", -self.temperature)
        } else {
            format!("{}C", self.temperature)
        };
        format!(
            "{}{}_{}L_{}C_{}",
            self.nmos.tag(),
            self.pmos.tag(),
            self.inductor.tag(),
            self.capacitor.tag(),
            t
        )
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Cartesian product, MOS pair outermost and temperature innermost.
pub fn enumerate_corners(
    mos: &[(MosCorner, MosCorner)],
    l_ext: &[PassiveCorner],
    c_ext: &[PassiveCorner],
    temps: &[f64],
    vdd_in: f64,
) -> Result<Vec<Corner>> {
    if mos.is_empty() || l_ext.is_empty() || c_ext.is_empty() || temps.is_empty() {
        return Err(Error::invalid("corner axes must all be non-empty"));
    }
    if let Some(t) = temps.iter().find(|t| !ALLOWED_TEMPERATURES.contains(t)) {
        return Err(Error::invalid(format!(
            "temperature {t} is not one of {ALLOWED_TEMPERATURES:?}"
        )));
    }
    if !(vdd_in > 0.0) {
        return Err(Error::invalid("vdd_in must be positive"));
    }
    let mut out = Vec::with_capacity(mos.len() * l_ext.len() * c_ext.len() * temps.len());
    for &(nmos, pmos) in mos {
        for &inductor in l_ext {
            for &capacitor in c_ext {
                for &temperature in temps {
                    out.push(Corner {
                        nmos,
                        pmos,
                        inductor,
                        capacitor,
                        temperature,
                        vdd_in,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// FF, FS, SS, SF × {min, max} L × {min, max} C × {-55, 125} °C at 1.62 V.
pub fn standard_corners() -> Vec<Corner> {
    use MosCorner::*;
    use PassiveCorner::*;
    enumerate_corners(
        &[(Fast, Fast), (Fast, Slow), (Slow, Slow), (Slow, Fast)],
        &[Min, Max],
        &[Min, Max],
        &[-55.0, 125.0],
        VDD_IN_MIN,
    )
    .expect("static grid is valid")
}

/// Nominal first, then the 32 standard corners.
pub fn nominal_and_standard() -> Vec<Corner> {
    let mut v = vec![Corner::nominal()];
    v.extend(standard_corners());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use MosCorner::*;
    use PassiveCorner::*;

    #[test]
    fn standard_grid_has_32_distinct_corners() {
        let c = standard_corners();
        assert_eq!(c.len(), 32);
        assert!(c.iter().all(|k| !k.is_nominal()));
        let mut labels: Vec<String> = c.iter().map(Corner::label).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 32);
        assert!(c.contains(&Corner::worst_documented()));
    }

    #[test]
    fn singleton_product() {
        let c = enumerate_corners(&[(Slow, Slow)], &[Max], &[Max], &[125.0], 1.62).unwrap();
        assert_eq!(c, vec![Corner::worst_documented()]);
    }

    #[test]
    fn lexicographic_order() {
        let c = enumerate_corners(
            &[(Fast, Fast), (Slow, Slow)],
            &[PassiveCorner::Nominal],
            &[PassiveCorner::Nominal],
            &[-55.0, 125.0],
            1.62,
        )
        .unwrap();
        let t: Vec<(MosCorner, f64)> = c.iter().map(|k| (k.nmos, k.temperature)).collect();
        assert_eq!(
            t,
            vec![(Fast, -55.0), (Fast, 125.0), (Slow, -55.0), (Slow, 125.0)]
        );
    }

    #[test]
    fn empty_axis_is_invalid() {
        assert!(enumerate_corners(&[], &[Min], &[Min], &[27.0], 1.62).is_err());
        assert!(enumerate_corners(&[(Fast, Fast)], &[Min], &[Min], &[], 1.62).is_err());
        assert!(enumerate_corners(&[(Fast, Fast)], &[Min], &[Min], &[30.0], 1.62).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(Corner::nominal().label(), "nominal");
        assert_eq!(Corner::worst_documented().label(), "ss_maxL_maxC_125C");
        assert_eq!(standard_corners()[0].label(), "ff_minL_minC_m55C");
    }
}
