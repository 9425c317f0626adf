use std::collections::VecDeque;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Episode boundary crossed; targets still bootstrap from `next_state`.
    pub truncated: bool,
}

/// Fixed-capacity ring; once full every push evicts the oldest transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
    pushes: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
            pushes: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Total pushes over the buffer's lifetime.
    pub fn pushes(&self) -> u64 {
        self.pushes
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
        self.pushes += 1;
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }

    /// `n` distinct positions drawn uniformly; `None` if fewer than `n` are stored.
    pub fn sample_indices(&self, rng: &mut SimRng, n: usize) -> Option<Vec<usize>> {
        (n > 0 && self.items.len() >= n).then(|| index::sample(rng, self.items.len(), n).into_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn t(i: usize) -> Transition {
        Transition {
            state: vec![i as f64],
            action: 0,
            reward: i as f64,
            next_state: vec![i as f64 + 1.0],
            truncated: false,
        }
    }

    #[test]
    fn ring_keeps_latest_in_order() {
        let mut b = ReplayBuffer::new(3).unwrap();
        for i in 0..7 {
            b.push(t(i));
        }
        assert_eq!(b.len(), 3);
        let rewards: Vec<f64> = b.iter().map(|x| x.reward).collect();
        assert_eq!(rewards, vec![4.0, 5.0, 6.0]);
        assert_eq!(b.pushes(), 7);
        assert!(ReplayBuffer::new(0).is_err());
    }

    #[test]
    fn sampling_is_without_replacement() {
        let mut b = ReplayBuffer::new(10).unwrap();
        for i in 0..10 {
            b.push(t(i));
        }
        let mut r = rng::seeded(1);
        let mut idx = b.sample_indices(&mut r, 10).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert!(b.sample_indices(&mut r, 11).is_none());
    }
}
