//! Fully connected Q-network: affine → sigmoid → … → affine.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

use super::Experience;

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// All weights live in one flat vector. Layer `k` maps `widths[k]` inputs to
/// `widths[k + 1]` outputs; its weight matrix is stored row-major (one row
/// per output) and is followed by its bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    widths: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Activations of every layer for one input, kept for backprop.
struct Tape {
    acts: Vec<Vec<f64>>,
}

impl QNetwork {
    /// Network with every weight and bias set to zero.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::invalid(
                "widths",
                format!("need at least two positive layer widths, got {widths:?}"),
            ));
        }
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for w in widths.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        offsets.push(total);
        Ok(QNetwork {
            widths: widths.to_vec(),
            params: vec![0.0; total],
            offsets,
        })
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn xavier<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = QNetwork::zeros(widths)?;
        for k in 0..net.n_layers() {
            let (n_in, n_out) = (net.widths[k], net.widths[k + 1]);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            let start = net.offsets[k];
            for w in &mut net.params[start..start + n_in * n_out] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn n_inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Weight `W[out][inp]` of layer `k`.
    pub fn weight(&self, k: usize, out: usize, inp: usize) -> f64 {
        self.params[self.offsets[k] + out * self.widths[k] + inp]
    }

    pub fn bias(&self, k: usize, out: usize) -> f64 {
        let (n_in, n_out) = (self.widths[k], self.widths[k + 1]);
        self.params[self.offsets[k] + n_in * n_out + out]
    }

    fn check_input(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.n_inputs() {
            return Err(Error::Dimension {
                expected: self.n_inputs(),
                got: s.len(),
            });
        }
        Ok(())
    }

    fn layer(&self, k: usize, x: &[f64], out: &mut Vec<f64>) {
        let (n_in, n_out) = (self.widths[k], self.widths[k + 1]);
        let w = &self.params[self.offsets[k]..self.offsets[k] + n_in * n_out];
        let b = &self.params[self.offsets[k] + n_in * n_out..self.offsets[k + 1]];
        let hidden = k + 1 < self.n_layers();
        out.clear();
        for (row, &bias) in w.chunks_exact(n_in).zip(b) {
            let z = row.iter().zip(x).fold(bias, |acc, (wi, xi)| acc + wi * xi);
            out.push(if hidden { sigmoid(z) } else { z });
        }
    }

    fn run(&self, s: &[f64]) -> Tape {
        let mut acts = Vec::with_capacity(self.widths.len());
        acts.push(s.to_vec());
        for k in 0..self.n_layers() {
            let mut out = Vec::with_capacity(self.widths[k + 1]);
            self.layer(k, &acts[k], &mut out);
            acts.push(out);
        }
        Tape { acts }
    }

    pub fn forward(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_input(s)?;
        Ok(self.run(s).acts.pop().unwrap())
    }

    pub fn max_q(&self, s: &[f64]) -> Result<f64> {
        Ok(self
            .forward(s)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Accumulates `scale · ∂Q(s, a)/∂θ` into `grad`.
    fn backprop(&self, tape: &Tape, a: usize, scale: f64, grad: &mut [f64]) {
        let mut delta = vec![0.0; self.n_outputs()];
        delta[a] = scale;
        for k in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.widths[k], self.widths[k + 1]);
            let off = self.offsets[k];
            let x = &tape.acts[k];
            for (j, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + j * n_in..off + (j + 1) * n_in];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d * xi;
                }
                grad[off + n_in * n_out + j] += d;
            }
            if k == 0 {
                break;
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for (row, &d) in w.chunks_exact(n_in).zip(&delta) {
                for (p, wi) in prev.iter_mut().zip(row) {
                    *p += wi * d;
                }
            }
            for (p, a) in prev.iter_mut().zip(x) {
                *p *= a * (1.0 - a);
            }
            delta = prev;
        }
    }

    /// Mean squared error of `Q(s_j, a_j)` against fixed `targets[j]` and its
    /// gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &[&Experience], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        if batch.len() != targets.len() || batch.is_empty() {
            return Err(Error::Dimension {
                expected: batch.len().max(1),
                got: targets.len(),
            });
        }
        let n = batch.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for (e, &y) in batch.iter().zip(targets) {
            self.check_input(&e.s)?;
            let tape = self.run(&e.s);
            let residual = y - tape.acts.last().unwrap()[e.a];
            loss += residual * residual;
            self.backprop(&tape, e.a, -2.0 * residual / n, &mut grad);
        }
        Ok((loss / n, grad))
    }

    /// One plain SGD step on the minibatch. Targets are computed with the
    /// current weights before the update and treated as constants.
    ///
    /// Returns the pre-update loss. A non-finite loss leaves the weights
    /// untouched; the caller decides how to abort.
    pub fn sgd_step(&mut self, batch: &[&Experience], discount: f64, eta: f64) -> Result<f64> {
        let targets = batch
            .iter()
            .map(|e| bellman_target(e.r, &e.s_next, e.terminal, self, discount))
            .collect::<Result<Vec<_>>>()?;
        let (loss, grad) = self.loss_and_grad(batch, &targets)?;
        if !loss.is_finite() {
            return Ok(loss);
        }
        if eta != 0.0 {
            for (p, g) in self.params.iter_mut().zip(&grad) {
                *p -= eta * g;
            }
        }
        Ok(loss)
    }

    /// Writes the weights as text: a `#` key line, a widths line, then one
    /// parameter per line.
    pub fn save_checkpoint(&self, path: impl AsRef<Path>, key: &CheckpointKey) -> Result<()> {
        let mut out = String::new();
        writeln!(
            out,
            "# config_hash={},seed={},episode={}",
            key.config_hash, key.seed, key.episode
        )
        .unwrap();
        let widths: Vec<String> = self.widths.iter().map(|w| w.to_string()).collect();
        writeln!(out, "widths,{}", widths.join(",")).unwrap();
        for p in &self.params {
            writeln!(out, "{p}").unwrap();
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(CheckpointKey, QNetwork)> {
        let text = std::fs::read_to_string(path)?;
        let bad = |why: &str| Error::Trace(format!("checkpoint: {why}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let mut key = CheckpointKey {
            config_hash: String::new(),
            seed: 0,
            episode: 0,
        };
        for field in header.trim_start_matches('#').trim().split(',') {
            let (k, v) = field.split_once('=').ok_or_else(|| bad("malformed key line"))?;
            match k {
                "config_hash" => key.config_hash = v.to_string(),
                "seed" => key.seed = v.parse().map_err(|_| bad("seed"))?,
                "episode" => key.episode = v.parse().map_err(|_| bad("episode"))?,
                _ => return Err(bad("unknown key")),
            }
        }
        let widths: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("widths,"))
            .ok_or_else(|| bad("missing widths"))?
            .split(',')
            .map(|w| w.parse().map_err(|_| bad("widths")))
            .collect::<Result<_>>()?;
        let mut net = QNetwork::zeros(&widths)?;
        let params: Vec<f64> = lines
            .map(|l| l.parse().map_err(|_| bad("parameter")))
            .collect::<Result<_>>()?;
        if params.len() != net.params.len() {
            return Err(Error::Dimension {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok((key, net))
    }
}

/// Identifies a saved set of weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointKey {
    pub config_hash: String,
    pub seed: u64,
    pub episode: usize,
}

/// `r` for terminal transitions, else `r + γ·max_a' Q(s_next, a')`.
pub fn bellman_target(r: f64, s_next: &[f64], terminal: bool, net: &QNetwork, discount: f64) -> Result<f64> {
    if terminal {
        return Ok(r);
    }
    Ok(r + discount * net.max_q(s_next)?)
}
