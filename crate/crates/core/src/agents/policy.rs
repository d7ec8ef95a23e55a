//! ε-greedy exploration.

use rand::Rng;

use crate::error::Result;

use super::qnet::QNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyState {
    pub epsilon: f64,
    pub decay: f64,
    pub epsilon_min: f64,
    pub discount: f64,
}

impl PolicyState {
    /// `ε := max(ε·d, ε_min)`
    pub fn decay_epsilon(&mut self) {
        self.epsilon = (self.epsilon * self.decay).max(self.epsilon_min);
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// With probability ε a uniformly random action, otherwise the greedy one.
/// Exactly one uniform draw decides between the two branches.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    if u < epsilon {
        rng.random_range(0..q.len())
    } else {
        argmax(q)
    }
}

pub fn select_action<R: Rng + ?Sized>(
    net: &QNetwork,
    s: &[f64],
    policy: &PolicyState,
    rng: &mut R,
) -> Result<usize> {
    let q = net.forward(s)?;
    Ok(epsilon_greedy(&q, policy.epsilon, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn policy(epsilon: f64) -> PolicyState {
        PolicyState {
            epsilon,
            decay: 0.9995,
            epsilon_min: 0.10,
            discount: 0.995,
        }
    }

    #[test]
    fn decay_cases() {
        let mut p = policy(1.0);
        p.decay_epsilon();
        assert_eq!(p.epsilon, 0.9995);
        let mut p = policy(0.10);
        p.decay_epsilon();
        assert_eq!(p.epsilon, 0.10);
        let mut p = policy(1.0);
        for _ in 0..1_000_000 {
            p.decay_epsilon();
        }
        assert_eq!(p.epsilon, 0.10);
    }

    #[test]
    fn greedy_choice_and_ties() {
        let mut rng = stream(0, Purpose::Exploration, 0);
        let mut q = vec![0.0; 16];
        q[7] = 1.0;
        assert_eq!(epsilon_greedy(&q, 0.0, &mut rng), 7);
        let mut q = vec![0.0; 16];
        q[2] = 5.0;
        q[9] = 5.0;
        assert_eq!(epsilon_greedy(&q, 0.0, &mut rng), 2);
    }
}
