//! Per-column z-scoring fitted on the training database.

use crate::error::{Error, Result};

/// Floor applied to standard deviations so constant columns stay finite.
pub const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ColumnStats {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Surrogate("no rows to scale".into()))?;
        let dim = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            if r.len() != dim {
                return Err(Error::Surrogate("ragged training rows".into()));
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
        Ok(ColumnStats { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn scale(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn unscale(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| x * s + m)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalerStats {
    pub x: ColumnStats,
    pub y: ColumnStats,
}

impl ScalerStats {
    pub fn fit(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<Self> {
        Ok(ScalerStats {
            x: ColumnStats::from_rows(xs)?,
            y: ColumnStats::from_rows(ys)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_column_is_floored() {
        let s = ColumnStats::from_rows(&[vec![3.0, 1.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(s.std[0], STD_FLOOR);
        assert_eq!(s.scale(&[3.0, 1.5]), vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 3), 2..20),
                      probe in prop::collection::vec(-1e6..1e6f64, 3)) {
            let s = ColumnStats::from_rows(&rows).unwrap();
            let back = s.unscale(&s.scale(&probe));
            for (a, b) in back.iter().zip(&probe) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
