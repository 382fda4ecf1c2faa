//! Single-hidden-layer tanh network trained with Adam on z-scored data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::surrogate::scaler::ScalerStats;

const ADAM_B1: f64 = 0.9;
const ADAM_B2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Flat parameter layout: `w1` (hidden × input), `b1`, `w2` (output ×
/// hidden), `b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub batch_size: usize,
}

/// Losses recorded by one training call.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainStats {
    pub epochs: usize,
    pub best_epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(inputs: usize, hidden: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut params = vec![0.0; hidden * inputs + hidden + outputs * hidden + outputs];
        let a1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + outputs) as f64).sqrt();
        let (w1, rest) = params.split_at_mut(hidden * inputs);
        for w in w1 {
            *w = rng.random_range(-a1..a1);
        }
        let w2 = &mut rest[hidden..hidden + outputs * hidden];
        for w in w2 {
            *w = rng.random_range(-a2..a2);
        }
        Mlp {
            inputs,
            hidden,
            outputs,
            params,
        }
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.inputs;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.outputs * self.hidden;
        (b1, w2, b2)
    }

    /// Forward pass in scaled units; `act` receives the hidden activations.
    fn forward_into(&self, x: &[f64], act: &mut [f64], out: &mut [f64]) {
        let (ob1, ow2, ob2) = self.offsets();
        let p = &self.params;
        for j in 0..self.hidden {
            let row = &p[j * self.inputs..(j + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + p[ob1 + j];
            act[j] = z.tanh();
        }
        for k in 0..self.outputs {
            let row = &p[ow2 + k * self.hidden..ow2 + (k + 1) * self.hidden];
            out[k] = row.iter().zip(act.iter()).map(|(w, a)| w * a).sum::<f64>() + p[ob2 + k];
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.outputs];
        self.forward_into(x, &mut act, &mut out);
        out
    }

    /// Mean squared error over samples and outputs.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[Vec<f64>], idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        let mut act = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.outputs];
        let mut total = 0.0;
        for &i in idx {
            self.forward_into(&xs[i], &mut act, &mut out);
            total += out.iter().zip(&ys[i]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        total / (idx.len() * self.outputs) as f64
    }

    /// Adds the loss gradient of one minibatch to `grad`.
    fn accumulate(&self, x: &[f64], y: &[f64], scale: f64, grad: &mut [f64], act: &mut [f64], out: &mut [f64], delta: &mut [f64]) {
        self.forward_into(x, act, out);
        let (ob1, ow2, ob2) = self.offsets();
        let p = &self.params;
        delta.iter_mut().for_each(|d| *d = 0.0);
        for k in 0..self.outputs {
            let dy = 2.0 * (out[k] - y[k]) * scale;
            grad[ob2 + k] += dy;
            let base = ow2 + k * self.hidden;
            for j in 0..self.hidden {
                grad[base + j] += dy * act[j];
                delta[j] += dy * p[base + j];
            }
        }
        for j in 0..self.hidden {
            let dz = delta[j] * (1.0 - act[j] * act[j]);
            grad[ob1 + j] += dz;
            let row = &mut grad[j * self.inputs..(j + 1) * self.inputs];
            for (g, v) in row.iter_mut().zip(x) {
                *g += dz * v;
            }
        }
    }

    /// Minibatch Adam with early stopping on `val`. The returned network
    /// always holds the weights of the best validation epoch, counting the
    /// starting weights as epoch 0.
    pub fn train(
        &mut self,
        xs: &[Vec<f64>],
        ys: &[Vec<f64>],
        train: &[usize],
        val: &[usize],
        tp: &TrainParams,
        rng: &mut ChaCha8Rng,
    ) -> TrainStats {
        let n = self.params.len();
        let mut m = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut grad = vec![0.0; n];
        let mut act = vec![0.0; self.hidden];
        let mut out = vec![0.0; self.outputs];
        let mut delta = vec![0.0; self.hidden];
        let mut order = train.to_vec();
        let monitor = if val.is_empty() { train } else { val };

        let mut best = self.params.clone();
        let mut best_loss = self.loss(xs, ys, monitor);
        let mut stats = TrainStats {
            epochs: 0,
            best_epoch: 0,
            train_loss: self.loss(xs, ys, train),
            val_loss: best_loss,
        };
        let mut t = 0i32;
        let batch = tp.batch_size.max(1);
        for epoch in 1..=tp.max_epochs {
            order.shuffle(rng);
            for chunk in order.chunks(batch) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / (chunk.len() * self.outputs) as f64;
                for &i in chunk {
                    self.accumulate(&xs[i], &ys[i], scale, &mut grad, &mut act, &mut out, &mut delta);
                }
                t += 1;
                let c1 = 1.0 - ADAM_B1.powi(t);
                let c2 = 1.0 - ADAM_B2.powi(t);
                for k in 0..n {
                    m[k] = ADAM_B1 * m[k] + (1.0 - ADAM_B1) * grad[k];
                    v[k] = ADAM_B2 * v[k] + (1.0 - ADAM_B2) * grad[k] * grad[k];
                    let mh = m[k] / c1;
                    let vh = v[k] / c2;
                    self.params[k] -= tp.learning_rate * mh / (vh.sqrt() + ADAM_EPS);
                }
            }
            stats.epochs = epoch;
            let l = self.loss(xs, ys, monitor);
            if l < best_loss {
                best_loss = l;
                best.copy_from_slice(&self.params);
                stats.best_epoch = epoch;
            } else if epoch - stats.best_epoch >= tp.patience {
                break;
            }
        }
        self.params = best;
        stats.val_loss = best_loss;
        stats.train_loss = self.loss(xs, ys, train);
        stats
    }

    /// Re-expresses the network for new scaler statistics so that it
    /// computes the same function in original units.
    pub fn rescale(&mut self, old: &ScalerStats, new: &ScalerStats) {
        let (ob1, ow2, ob2) = self.offsets();
        let (d, h) = (self.inputs, self.hidden);
        for j in 0..h {
            let mut shift = 0.0;
            for i in 0..d {
                let w = self.params[j * d + i];
                shift += w * (new.x.mean[i] - old.x.mean[i]) / old.x.std[i];
                self.params[j * d + i] = w * new.x.std[i] / old.x.std[i];
            }
            self.params[ob1 + j] += shift;
        }
        for k in 0..self.outputs {
            let r = old.y.std[k] / new.y.std[k];
            for j in 0..h {
                self.params[ow2 + k * h + j] *= r;
            }
            let b = self.params[ob2 + k];
            self.params[ob2 + k] = (old.y.std[k] * b + old.y.mean[k] - new.y.mean[k]) / new.y.std[k];
        }
    }
}

/// Deterministic generator for member `k` of an ensemble seeded with `seed`.
pub fn member_rng(seed: u64, k: usize, salt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    r.set_stream(k as u64 + 1);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::scaler::ColumnStats;

    #[test]
    fn gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(3, 4, 2, &mut rng);
        let xs = vec![vec![0.3, -0.2, 0.9]];
        let ys = vec![vec![0.5, -1.0]];
        let mut grad = vec![0.0; net.params.len()];
        let (mut a, mut o, mut dl) = (vec![0.0; 4], vec![0.0; 2], vec![0.0; 4]);
        net.accumulate(&xs[0], &ys[0], 0.5, &mut grad, &mut a, &mut o, &mut dl);
        for k in 0..net.params.len() {
            let mut p = net.clone();
            let h = 1e-6;
            p.params[k] += h;
            let up = p.loss(&xs, &ys, &[0]);
            p.params[k] -= 2.0 * h;
            let dn = p.loss(&xs, &ys, &[0]);
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-6, "param {k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn rescale_preserves_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Mlp::new(2, 5, 2, &mut rng);
        let old = ScalerStats {
            x: ColumnStats { mean: vec![1.0, -2.0], std: vec![0.5, 3.0] },
            y: ColumnStats { mean: vec![10.0, 0.0], std: vec![2.0, 0.1] },
        };
        let new = ScalerStats {
            x: ColumnStats { mean: vec![1.3, -1.0], std: vec![0.7, 2.0] },
            y: ColumnStats { mean: vec![9.0, 0.2], std: vec![4.0, 0.3] },
        };
        let x = [1.7, 0.4];
        let before = old.y.unscale(&net.forward(&old.x.scale(&x)));
        net.rescale(&old, &new);
        let after = new.y.unscale(&net.forward(&new.x.scale(&x)));
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn early_stopping_keeps_best_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 15.0 - 1.0]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![(3.0 * x[0]).sin()]).collect();
        let train: Vec<usize> = (0..30).filter(|i| i % 5 != 0).collect();
        let val: Vec<usize> = (0..30).filter(|i| i % 5 == 0).collect();
        let mut net = Mlp::new(1, 6, 1, &mut rng);
        let tp = TrainParams { max_epochs: 300, learning_rate: 1e-2, patience: 20, batch_size: 8 };
        let stats = net.train(&xs, &ys, &train, &val, &tp, &mut rng);
        assert!((net.loss(&xs, &ys, &val) - stats.val_loss).abs() < 1e-15);
        assert!(stats.best_epoch <= stats.epochs);
    }
}
