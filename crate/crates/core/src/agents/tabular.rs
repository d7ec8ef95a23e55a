//! Tabular Q-learning over a uniformly binned state space.

use crate::error::{Error, Result};

use super::policy::argmax;

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    bins: usize,
    n_dims: usize,
    n_actions: usize,
    q: Vec<f64>,
}

impl QTable {
    /// Zero-initialized table with `bins^n_dims` rows.
    pub fn new(n_dims: usize, bins: usize, n_actions: usize) -> Result<Self> {
        if bins == 0 || n_actions == 0 {
            return Err(Error::invalid("bins", "bins and actions must be positive"));
        }
        let rows = (bins as u64)
            .checked_pow(n_dims as u32)
            .filter(|&r| r <= 1 << 24)
            .ok_or_else(|| Error::invalid("bins", format!("{bins}^{n_dims} rows is too many")))?;
        Ok(QTable {
            bins,
            n_dims,
            n_actions,
            q: vec![0.0; rows as usize * n_actions],
        })
    }

    /// Table over explicit rows, for small hand-built problems.
    pub fn with_rows(rows: usize, n_actions: usize) -> Self {
        QTable {
            bins: rows,
            n_dims: 1,
            n_actions,
            q: vec![0.0; rows * n_actions],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.q.len() / self.n_actions
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Row of a normalized state. Each coordinate is clamped to `[−1, 1]`
    /// and split into `bins` equal bins; dimension 0 is least significant.
    pub fn row(&self, s: &[f64]) -> Result<usize> {
        if s.len() != self.n_dims {
            return Err(Error::Dimension {
                expected: self.n_dims,
                got: s.len(),
            });
        }
        let mut row = 0;
        for &x in s.iter().rev() {
            let u = (x.clamp(-1.0, 1.0) + 1.0) / 2.0;
            let bin = ((u * self.bins as f64) as usize).min(self.bins - 1);
            row = row * self.bins + bin;
        }
        Ok(row)
    }

    pub fn values(&self, row: usize) -> &[f64] {
        &self.q[row * self.n_actions..(row + 1) * self.n_actions]
    }

    pub fn get(&self, row: usize, a: usize) -> f64 {
        self.q[row * self.n_actions + a]
    }

    pub fn set(&mut self, row: usize, a: usize, v: f64) {
        self.q[row * self.n_actions + a] = v;
    }

    pub fn max(&self, row: usize) -> f64 {
        self.values(row)[argmax(self.values(row))]
    }

    /// `Q(s,a) := (1−α)·Q(s,a) + α·(r + γ·max_a' Q(s_next, a'))`.
    /// `s_next = None` marks a terminal transition, whose target is `r`.
    pub fn update(&mut self, s: usize, a: usize, r: f64, s_next: Option<usize>, alpha: f64, discount: f64) {
        let target = match s_next {
            Some(n) => r + discount * self.max(n),
            None => r,
        };
        let old = self.get(s, a);
        self.set(s, a, (1.0 - alpha) * old + alpha * target);
    }
}
