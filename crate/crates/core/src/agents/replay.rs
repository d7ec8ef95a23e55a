//! Fixed-capacity experience replay.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

use super::Experience;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: Vec<Experience>,
    /// Slot the next push overwrites once the buffer is full.
    next: usize,
    last: Option<usize>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("capacity", "must be positive"));
        }
        Ok(ReplayBuffer {
            capacity,
            entries: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
            last: None,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores `e`, evicting the oldest entry at capacity.
    pub fn push(&mut self, e: Experience) {
        let slot = if self.entries.len() < self.capacity {
            self.entries.push(e);
            self.entries.len() - 1
        } else {
            self.entries[self.next] = e;
            self.next
        };
        self.next = (slot + 1) % self.capacity;
        self.last = Some(slot);
    }

    pub fn get(&self, i: usize) -> Option<&Experience> {
        self.entries.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.entries.iter()
    }

    /// The most recently pushed experience.
    pub fn last_mut(&mut self) -> Option<&mut Experience> {
        self.last.map(|i| &mut self.entries[i])
    }

    /// `n` distinct slots drawn uniformly.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if n > self.entries.len() {
            return Err(Error::invalid(
                "n",
                format!("cannot draw {n} from {} stored experiences", self.entries.len()),
            ));
        }
        Ok(index::sample(rng, self.entries.len(), n).into_vec())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&Experience>> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| &self.entries[i])
            .collect())
    }
}
