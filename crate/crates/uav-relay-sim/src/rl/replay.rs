use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::env::{MdpAction, MdpState};
use crate::numerics::SeededRng;

/// One transition tuple stored for experience replay.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Experience {
    pub s: MdpState,
    pub a: MdpAction,
    /// Index of `a` in the environment's action set.
    pub a_idx: usize,
    pub r: f64,
    pub s_next: MdpState,
    pub terminal: bool,
}

/// Bounded FIFO buffer of experiences. When full, the oldest entry is
/// evicted first.
#[derive(Clone, Debug)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: VecDeque<Experience>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            buffer: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, e: Experience) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(e);
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, batch: usize, rng: &mut SeededRng) -> Vec<Experience> {
        (0..batch)
            .map(|_| self.buffer[rng.gen_index(self.buffer.len())].clone())
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.buffer.iter()
    }
}
