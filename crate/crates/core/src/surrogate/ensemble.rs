//! Bootstrap-free ensemble of small networks with a pessimistic quantile.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sizing::metrics::Sense;
use crate::surrogate::mlp::{member_rng, Mlp, TrainParams, TrainStats};
use crate::surrogate::scaler::{ColumnStats, ScalerStats};

pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// `None` means max(10, 2·inputs).
    pub hidden_width: Option<usize>,
    /// Epoch cap of a cold fit.
    pub epochs: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub val_fraction: f64,
    pub batch_size: usize,
    pub members: usize,
    /// Epoch cap of a warm refit.
    pub refit_epochs: usize,
    /// Work allowance of a warm refit per member, in training samples times
    /// network weights; large networks on large databases get fewer epochs.
    pub refit_work: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_width: None,
            epochs: 2000,
            learning_rate: 1e-2,
            patience: 100,
            val_fraction: 0.2,
            batch_size: 8,
            members: 5,
            refit_epochs: 50,
            refit_work: 2e6,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("surrogate config: {m}")));
        if self.hidden_width == Some(0) {
            return bad("hidden_width must be positive");
        }
        if self.epochs == 0
            || self.patience == 0
            || self.batch_size == 0
            || self.members == 0
            || self.refit_epochs == 0
        {
            return bad("epoch caps, patience, batch_size and members must be positive");
        }
        if !(self.refit_work >= 0.0) {
            return bad("refit_work must be non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction <= 0.5) {
            return bad("val_fraction must lie in (0, 0.5]");
        }
        Ok(())
    }

    pub fn width_for(&self, inputs: usize) -> usize {
        self.hidden_width.unwrap_or_else(|| (2 * inputs).max(10))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub members: Vec<Mlp>,
    pub scaler: ScalerStats,
    /// Last training record of each member.
    pub stats: Vec<TrainStats>,
    pub cfg: MlpConfig,
    pub seed: u64,
    refits: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Train/validation split of `n` samples for member `k`. Membership depends
/// only on the sample index, so splits stay stable as data is appended.
fn split(n: usize, seed: u64, k: usize, frac: f64) -> (Vec<usize>, Vec<usize>) {
    let key = splitmix(seed ^ splitmix(k as u64 + 1));
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for i in 0..n {
        let u = (splitmix(key ^ i as u64) >> 11) as f64 / (1u64 << 53) as f64;
        if u < frac {
            val.push(i);
        } else {
            train.push(i);
        }
    }
    if val.is_empty() {
        val.push(train.pop().expect("n >= 2"));
    } else if train.is_empty() {
        train.push(val.pop().expect("n >= 2"));
    }
    (train, val)
}

fn check_data(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Surrogate(format!("{} inputs but {} targets", xs.len(), ys.len())));
    }
    if xs.len() < MIN_SAMPLES {
        return Err(Error::Surrogate(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).flatten().any(|v| !v.is_finite()) {
        return Err(Error::Surrogate("non-finite training data".into()));
    }
    Ok(())
}

fn scaled(stats: &ColumnStats, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| stats.scale(r)).collect()
}

/// Linear-interpolated quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl EnsembleModel {
    pub fn fit(xs: &[Vec<f64>], ys: &[Vec<f64>], cfg: &MlpConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        check_data(xs, ys)?;
        let scaler = ScalerStats::fit(xs, ys)?;
        let (d, o) = (scaler.x.dim(), scaler.y.dim());
        let h = cfg.width_for(d);
        let (sx, sy) = (scaled(&scaler.x, xs), scaled(&scaler.y, ys));
        let tp = TrainParams {
            max_epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            patience: cfg.patience,
            batch_size: cfg.batch_size,
        };
        let mut members = Vec::with_capacity(cfg.members);
        let mut stats = Vec::with_capacity(cfg.members);
        for k in 0..cfg.members {
            let mut rng = member_rng(seed, k, 0);
            let mut net = Mlp::new(d, h, o, &mut rng);
            let (train, val) = split(xs.len(), seed, k, cfg.val_fraction);
            stats.push(net.train(&sx, &sy, &train, &val, &tp, &mut rng));
            members.push(net);
        }
        Ok(EnsembleModel {
            members,
            scaler,
            stats,
            cfg: cfg.clone(),
            seed,
            refits: 0,
        })
    }

    /// Continues training from the current weights on an updated database,
    /// for at most `cfg.refit_epochs` epochs.
    pub fn refit(&mut self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
        check_data(xs, ys)?;
        let scaler = ScalerStats::fit(xs, ys)?;
        if scaler.x.dim() != self.inputs() || scaler.y.dim() != self.outputs() {
            return Err(Error::Surrogate("refit data changed dimension".into()));
        }
        self.refits += 1;
        let (sx, sy) = (scaled(&scaler.x, xs), scaled(&scaler.y, ys));
        let weights = self.members[0].params.len() as f64;
        for (k, net) in self.members.iter_mut().enumerate() {
            net.rescale(&self.scaler, &scaler);
            let mut rng = member_rng(self.seed, k, self.refits);
            let (train, val) = split(xs.len(), self.seed, k, self.cfg.val_fraction);
            let affordable = (self.cfg.refit_work / (train.len() as f64 * weights)).floor();
            let tp = TrainParams {
                max_epochs: (affordable as usize).clamp(1, self.cfg.refit_epochs),
                learning_rate: self.cfg.learning_rate,
                patience: self.cfg.patience,
                batch_size: self.cfg.batch_size,
            };
            self.stats[k] = net.train(&sx, &sy, &train, &val, &tp, &mut rng);
        }
        self.scaler = scaler;
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.scaler.x.dim()
    }

    pub fn outputs(&self) -> usize {
        self.scaler.y.dim()
    }

    /// One prediction per member, original units.
    pub fn predict_members(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.inputs() {
            return Err(Error::Surrogate(format!(
                "input has {} values, model expects {}",
                x.len(),
                self.inputs()
            )));
        }
        let z = self.scaler.x.scale(x);
        Ok(self
            .members
            .iter()
            .map(|m| self.scaler.y.unscale(&m.forward(&z)))
            .collect())
    }

    /// Ensemble mean.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let all = self.predict_members(x)?;
        let n = all.len() as f64;
        Ok((0..self.outputs())
            .map(|k| all.iter().map(|p| p[k]).sum::<f64>() / n)
            .collect())
    }

    /// Per-output `beta` quantile across members, taken on the pessimistic
    /// side of each output's sense.
    pub fn predict_conservative(&self, x: &[f64], beta: f64, senses: &[Sense]) -> Result<Vec<f64>> {
        if senses.len() != self.outputs() {
            return Err(Error::Surrogate("sense list does not match outputs".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!("beta {beta} outside [0, 1]")));
        }
        let all = self.predict_members(x)?;
        let mut col = vec![0.0; all.len()];
        Ok(senses
            .iter()
            .enumerate()
            .map(|(k, sense)| {
                for (c, p) in col.iter_mut().zip(&all) {
                    *c = p[k];
                }
                col.sort_by(f64::total_cmp);
                match sense {
                    Sense::LowerIsBetter => quantile(&col, beta),
                    Sense::HigherIsBetter => quantile(&col, 1.0 - beta),
                }
            })
            .collect())
    }

    /// Plain-text dump: topology, scaler, then one weight line per member.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let h = self.members.first().map_or(0, |m| m.hidden);
        let _ = writeln!(
            s,
            "ensemble {} {} {} {}",
            self.members.len(),
            self.inputs(),
            h,
            self.outputs()
        );
        let line = |s: &mut String, tag: &str, v: &[f64]| {
            s.push_str(tag);
            for x in v {
                let _ = write!(s, " {x:e}");
            }
            s.push('\n');
        };
        line(&mut s, "x_mean", &self.scaler.x.mean);
        line(&mut s, "x_std", &self.scaler.x.std);
        line(&mut s, "y_mean", &self.scaler.y.mean);
        line(&mut s, "y_std", &self.scaler.y.std);
        for m in &self.members {
            line(&mut s, "member", &m.params);
        }
        s
    }

    /// Reads a dump written by `to_text`. Training configuration is not part
    /// of the dump and comes back as the default.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |tag: &str| -> Result<(usize, Vec<String>)> {
            let (no, l) = lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing `{tag}` line")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(tag) {
                return Err(Error::parse(no + 1, format!("expected `{tag}`")));
            }
            Ok((no + 1, it.map(str::to_string).collect()))
        };
        let nums = |no: usize, toks: &[String]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| t.parse::<f64>().map_err(|e| Error::parse(no, format!("{t}: {e}"))))
                .collect()
        };
        let (no, head) = next("ensemble")?;
        let dims: Vec<usize> = head
            .iter()
            .map(|t| t.parse().map_err(|_| Error::parse(no, format!("bad count `{t}`"))))
            .collect::<Result<_>>()?;
        let [count, d, h, o] = dims[..] else {
            return Err(Error::parse(no, "expected four counts"));
        };
        let mut col = |tag: &str, len: usize| -> Result<Vec<f64>> {
            let (no, t) = next(tag)?;
            let v = nums(no, &t)?;
            if v.len() != len {
                return Err(Error::parse(no, format!("`{tag}` needs {len} values")));
            }
            Ok(v)
        };
        let scaler = ScalerStats {
            x: ColumnStats {
                mean: col("x_mean", d)?,
                std: col("x_std", d)?,
            },
            y: ColumnStats {
                mean: col("y_mean", o)?,
                std: col("y_std", o)?,
            },
        };
        let n_par = h * d + h + o * h + o;
        let mut members = Vec::with_capacity(count);
        for _ in 0..count {
            members.push(Mlp {
                inputs: d,
                hidden: h,
                outputs: o,
                params: col("member", n_par)?,
            });
        }
        if members.is_empty() {
            return Err(Error::parse(no, "ensemble has no members"));
        }
        Ok(EnsembleModel {
            stats: vec![TrainStats::default(); count],
            members,
            scaler,
            cfg: MlpConfig::default(),
            seed: 0,
            refits: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sizing::space::lhs_unit;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r2(pred: &[f64], truth: &[f64]) -> f64 {
        let mean = truth.iter().sum::<f64>() / truth.len() as f64;
        let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
        let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
        1.0 - ss_res / ss_tot
    }

    fn samples(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        lhs_unit(n, dim, &mut rng)
    }

    #[test]
    fn constant_target() {
        let xs = samples(30, 3, 1);
        let ys = vec![vec![4.5, -2.0]; 30];
        let m = EnsembleModel::fit(&xs, &ys, &MlpConfig::default(), 7).unwrap();
        for x in &xs {
            for (p, c) in m.predict(x).unwrap().iter().zip([4.5, -2.0]) {
                assert!((p - c).abs() < 1e-3, "{p}");
            }
        }
    }

    #[test]
    fn linear_target_generalizes() {
        let xs = samples(200, 4, 2);
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![2.0 * x[0]]).collect();
        let m = EnsembleModel::fit(&xs, &ys, &MlpConfig::default(), 3).unwrap();
        let held = samples(100, 4, 99);
        let pred: Vec<f64> = held.iter().map(|x| m.predict(x).unwrap()[0]).collect();
        let truth: Vec<f64> = held.iter().map(|x| 2.0 * x[0]).collect();
        assert!(r2(&pred, &truth) >= 0.95);
    }

    #[test]
    fn deterministic_and_member_order_free() {
        let xs = samples(40, 2, 5);
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0] * x[1]]).collect();
        let cfg = MlpConfig { epochs: 50, ..MlpConfig::default() };
        let a = EnsembleModel::fit(&xs, &ys, &cfg, 11).unwrap();
        let b = EnsembleModel::fit(&xs, &ys, &cfg, 11).unwrap();
        assert_eq!(a, b);
        let mut c = a.clone();
        c.members.reverse();
        let (pa, pc) = (a.predict(&xs[0]).unwrap(), c.predict(&xs[0]).unwrap());
        assert!((pa[0] - pc[0]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_data() {
        let xs = samples(5, 2, 1);
        let ys = vec![vec![0.0]; 5];
        assert!(EnsembleModel::fit(&xs, &ys, &MlpConfig::default(), 0).is_err());
        let xs = samples(12, 2, 1);
        let mut ys = vec![vec![0.0]; 12];
        ys[3][0] = f64::NAN;
        assert!(EnsembleModel::fit(&xs, &ys, &MlpConfig::default(), 0).is_err());
        let ys = vec![vec![0.0]; 12];
        let m = EnsembleModel::fit(&xs, &ys, &MlpConfig { epochs: 1, ..MlpConfig::default() }, 0).unwrap();
        assert!(m.predict(&[0.0]).is_err());
    }

    #[test]
    fn refit_keeps_quality() {
        let xs = samples(60, 2, 8);
        let f = |x: &[f64]| vec![x[0] + 3.0 * x[1]];
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| f(x)).collect();
        let mut m = EnsembleModel::fit(&xs[..40], &ys[..40], &MlpConfig::default(), 4).unwrap();
        m.refit(&xs, &ys).unwrap();
        let pred: Vec<f64> = xs.iter().map(|x| m.predict(x).unwrap()[0]).collect();
        let truth: Vec<f64> = ys.iter().map(|y| y[0]).collect();
        assert!(r2(&pred, &truth) > 0.95);
    }

    #[test]
    fn dump_round_trip() {
        let xs = samples(20, 2, 3);
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0], x[1] * 1e9]).collect();
        let m = EnsembleModel::fit(&xs, &ys, &MlpConfig { epochs: 5, ..MlpConfig::default() }, 1).unwrap();
        let back = EnsembleModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back.members, m.members);
        assert_eq!(back.scaler, m.scaler);
        assert!(EnsembleModel::from_text("ensemble 1 2\n").is_err());
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5), 3.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.7), 3.8);
        assert_eq!(quantile(&[2.0], 0.9), 2.0);
    }

    fn spread_model() -> EnsembleModel {
        let xs = samples(20, 2, 4);
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0], x[1]]).collect();
        EnsembleModel::fit(&xs, &ys, &MlpConfig { epochs: 3, ..MlpConfig::default() }, 2).unwrap()
    }

    #[test]
    fn identical_members_ignore_beta() {
        let mut m = spread_model();
        let first = m.members[0].clone();
        m.members.iter_mut().for_each(|n| *n = first.clone());
        let senses = [Sense::HigherIsBetter, Sense::LowerIsBetter];
        let mean = m.predict(&[0.3, 0.6]).unwrap();
        for beta in [0.0, 0.3, 0.7, 1.0] {
            let q = m.predict_conservative(&[0.3, 0.6], beta, &senses).unwrap();
            for (a, b) in q.iter().zip(&mean) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn beta_is_pessimistic(x0 in 0.0..1.0f64, x1 in 0.0..1.0f64, lo in 0.5..1.0f64) {
            let m = spread_model();
            let senses = [Sense::HigherIsBetter, Sense::LowerIsBetter];
            let mid = m.predict_conservative(&[x0, x1], 0.5, &senses).unwrap();
            let hi = m.predict_conservative(&[x0, x1], lo, &senses).unwrap();
            prop_assert!(hi[0] <= mid[0]);
            prop_assert!(hi[1] >= mid[1]);
        }
    }
}
