//! The behavioral LDO-VCO testbench: design point + corner to metrics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::models::ldo::{map_ldo, LdoDerived, LdoSizing};
use crate::models::noise::{combine_pn, supply_pn, vco_pn_intrinsic};
use crate::models::tech::TechConstants;
use crate::models::vco::{map_vco, VcoDerived, VcoSizing};
use crate::sizing::corner::Corner;
use crate::sizing::metrics::{fom, MetricSchema, PerfMetrics};
use crate::sizing::problem::Evaluator;
use crate::sizing::space::{DesignPoint, DesignSpace};

/// Phase-noise offsets reported in the metric vector, Hz.
pub const PN_OFFSETS: [f64; 3] = [100e3, 1e6, 10e6];
/// Offset used by the figure of merit.
pub const FOM_OFFSET: f64 = 1e6;
/// Swing ceiling as a fraction of the supply.
const SWING_FRACTION: f64 = 0.9;

// Reported in place of regulator metrics when no regulator is simulated.
const IDEAL_PSR: f64 = -200.0;
const IDEAL_PM: f64 = 90.0;

/// Elements held constant during sizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedElements {
    pub c_var: f64,
    pub c_byp: f64,
    pub beta_fb: f64,
    pub i_ref: f64,
    pub v_out: f64,
    pub c_load: f64,
    pub vn_supply: f64,
    pub vn_ref: f64,
}

impl Default for FixedElements {
    fn default() -> Self {
        FixedElements {
            c_var: 120e-15,
            c_byp: 20e-12,
            beta_fb: 2.0 / 3.0,
            i_ref: 10e-6,
            v_out: 1.2,
            c_load: 2e-12,
            vn_supply: 2e-6,
            vn_ref: 1e-6,
        }
    }
}

impl FixedElements {
    pub const NAMES: [&'static str; 8] = [
        "c_var", "c_byp", "beta_fb", "i_ref", "v_out", "c_load", "vn_supply", "vn_ref",
    ];

    /// Defaults overridden by `map`; unknown keys are rejected.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut fx = FixedElements::default();
        for (k, &v) in map {
            let slot = match k.as_str() {
                "c_var" => &mut fx.c_var,
                "c_byp" => &mut fx.c_byp,
                "beta_fb" => &mut fx.beta_fb,
                "i_ref" => &mut fx.i_ref,
                "v_out" => &mut fx.v_out,
                "c_load" => &mut fx.c_load,
                "vn_supply" => &mut fx.vn_supply,
                "vn_ref" => &mut fx.vn_ref,
                _ => return Err(Error::invalid(format!("unknown fixed element `{k}`"))),
            };
            *slot = v;
        }
        fx.validate()?;
        Ok(fx)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.c_var,
            self.c_byp,
            self.beta_fb,
            self.i_ref,
            self.v_out,
            self.c_load,
        ];
        for (name, v) in Self::NAMES.iter().zip(vals) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("fixed element `{name}` must be positive")));
            }
        }
        if !(self.beta_fb <= 1.0) {
            return Err(Error::invalid("beta_fb must not exceed 1"));
        }
        if !(self.vn_supply >= 0.0 && self.vn_ref >= 0.0) {
            return Err(Error::invalid("noise densities must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Oscillator on a noiseless source at `v_out`.
    IdealSupply,
    /// Regulator metrics at a fixed load current; the oscillator still sees
    /// an ideal source.
    LdoOnly { i_load: f64 },
    /// Oscillator supplied and loaded by the regulator.
    Coupled,
}

impl Mode {
    pub fn parse(text: &str) -> Option<Mode> {
        match text {
            "ideal" | "ideal_supply" => Some(Mode::IdealSupply),
            "coupled" => Some(Mode::Coupled),
            _ => None,
        }
    }
}

/// Everything computed for one (point, corner).
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub tech: TechConstants,
    pub vco: VcoDerived,
    pub ldo: Option<LdoDerived>,
    pub metrics: PerfMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnBreakdown {
    pub offset: f64,
    pub intrinsic: f64,
    pub supply: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct Testbench {
    pub tech: TechConstants,
    pub fixed: FixedElements,
    pub mode: Mode,
    vco_idx: [usize; 17],
    ldo_idx: [usize; 26],
    dim: usize,
    schema: MetricSchema,
}

fn lookup<const N: usize>(space: &DesignSpace, names: &[&str; N]) -> Result<[usize; N]> {
    let mut out = [0usize; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = space
            .index_of(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))?;
    }
    Ok(out)
}

impl Testbench {
    /// Binds the variables of `space` by name. Fixed elements come from
    /// `space.fixed`.
    pub fn new(space: &DesignSpace, tech: TechConstants, mode: Mode) -> Result<Self> {
        tech.validate()?;
        if let Mode::LdoOnly { i_load } = mode {
            if !(i_load > 0.0) {
                return Err(Error::invalid("i_load must be positive"));
            }
        }
        Ok(Testbench {
            tech,
            fixed: FixedElements::from_map(&space.fixed)?,
            mode,
            vco_idx: lookup(space, &VcoSizing::NAMES)?,
            ldo_idx: lookup(space, &LdoSizing::NAMES)?,
            dim: space.dim(),
            schema: PerfMetrics::schema(),
        })
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Testbench {
            mode,
            ..self.clone()
        }
    }

    pub fn vco_sizing(&self, point: &DesignPoint) -> VcoSizing {
        VcoSizing::from_values(&self.vco_idx.map(|i| point.values[i]))
    }

    pub fn ldo_sizing(&self, point: &DesignPoint) -> LdoSizing {
        LdoSizing::from_values(&self.ldo_idx.map(|i| point.values[i]))
    }

    fn v_limit(&self, coupled: bool) -> f64 {
        let base = SWING_FRACTION * self.fixed.v_out;
        if coupled {
            let c = self.fixed.c_byp;
            base / (1.0 + self.tech.k_flat * c / (c + self.tech.c_flat))
        } else {
            base
        }
    }

    /// Full evaluation with intermediate models retained.
    pub fn evaluate_full(&self, point: &DesignPoint, corner: &Corner) -> Result<Evaluation> {
        if point.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has {} values, space has {}",
                point.len(),
                self.dim
            )));
        }
        if let Some(v) = point.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite variable value {v}")));
        }
        let tc = self.tech.apply_corner(corner);
        let fx = &self.fixed;
        let coupled = self.mode == Mode::Coupled;
        let vco = map_vco(&self.vco_sizing(point), &tc, fx.c_var, self.v_limit(coupled))?;
        let ldo = match self.mode {
            Mode::IdealSupply => None,
            Mode::LdoOnly { i_load } => Some(map_ldo(
                &self.ldo_sizing(point),
                &tc,
                fx,
                i_load,
                corner.vdd_in,
            )?),
            Mode::Coupled => Some(map_ldo(
                &self.ldo_sizing(point),
                &tc,
                fx,
                vco.i_bias,
                corner.vdd_in,
            )?),
        };

        let pn_at = |df: f64| {
            let intrinsic = vco_pn_intrinsic(&vco, df, &tc);
            match (&ldo, coupled) {
                (Some(l), true) => combine_pn(&[intrinsic, supply_pn(vco.k_push, l.vn(df), df)]),
                _ => intrinsic,
            }
        };
        let pn = PN_OFFSETS.map(pn_at);
        let core_power = vco.i_bias * fx.v_out;
        let (pdyn, psr_max, pm, vdd_max) = match (&ldo, self.mode) {
            (Some(l), Mode::Coupled) => (
                core_power + l.i_q * corner.vdd_in,
                l.psr_max,
                l.pm,
                l.vdd_max,
            ),
            (Some(l), Mode::LdoOnly { i_load }) => (
                i_load * fx.v_out + l.i_q * corner.vdd_in,
                l.psr_max,
                l.pm,
                l.vdd_max,
            ),
            _ => (core_power, IDEAL_PSR, IDEAL_PM, fx.v_out),
        };
        let pn1m = pn[1];
        let metrics = PerfMetrics {
            f0: vco.f0,
            pn100k: pn[0],
            pn1m,
            pn10m: pn[2],
            pdyn,
            psr_max,
            pm,
            vdd_max,
            startup_margin: vco.startup_margin,
            fom: fom(vco.f0, FOM_OFFSET, pn1m, pdyn)?,
        };
        if !metrics.is_finite() {
            return Err(Error::eval("metrics", "non-finite metric value"));
        }
        Ok(Evaluation {
            tech: tc,
            vco,
            ldo,
            metrics,
        })
    }

    pub fn evaluate_metrics(&self, point: &DesignPoint, corner: &Corner) -> Result<PerfMetrics> {
        Ok(self.evaluate_full(point, corner)?.metrics)
    }

    /// Phase-noise contributions at each offset. The supply part is negative
    /// infinity outside coupled mode.
    pub fn pn_breakdown(
        &self,
        point: &DesignPoint,
        corner: &Corner,
        offsets: &[f64],
    ) -> Result<Vec<PnBreakdown>> {
        let ev = self.evaluate_full(point, corner)?;
        Ok(offsets
            .iter()
            .map(|&df| {
                let intrinsic = vco_pn_intrinsic(&ev.vco, df, &ev.tech);
                let supply = match (&ev.ldo, self.mode) {
                    (Some(l), Mode::Coupled) => supply_pn(ev.vco.k_push, l.vn(df), df),
                    _ => f64::NEG_INFINITY,
                };
                PnBreakdown {
                    offset: df,
                    intrinsic,
                    supply,
                    total: combine_pn(&[intrinsic, supply]),
                }
            })
            .collect())
    }
}

impl Evaluator for Testbench {
    fn schema(&self) -> &MetricSchema {
        &self.schema
    }

    fn evaluate(&self, point: &DesignPoint, corner: &Corner) -> Result<Vec<f64>> {
        Ok(self.evaluate_metrics(point, corner)?.to_vec())
    }
}

/// Log-spaced offsets from `start` over `decades` decades.
pub fn log_grid(start: f64, decades: usize, per_decade: usize) -> Vec<f64> {
    (0..=decades * per_decade)
        .map(|k| start * 10f64.powf(k as f64 / per_decade as f64))
        .collect()
}
