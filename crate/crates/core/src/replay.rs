//! Prioritized experience replay over a FIFO ring.
//!
//! Entry `i` is drawn with probability `p_i^alpha / sum_j p_j^alpha`, with
//! replacement. Importance weights are `(N * P(i))^-beta`, divided by the
//! largest weight in the batch. A buffer can hold several independent
//! priority channels over the same storage; the decomposed multi-agent
//! trainers give each agent its own channel.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Binary sum tree over a fixed number of leaves.
#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        Self {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.nodes[self.leaves + index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        let mut node = self.leaves + index;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, for `0 <= mass < total`.
    /// Never returns a zero-mass leaf when some leaf has positive mass.
    pub fn find(&self, mut mass: f64) -> usize {
        let mut node = 1;
        while node < self.leaves {
            let left = 2 * node;
            if mass < self.nodes[left] || self.nodes[left + 1] <= 0.0 {
                node = left;
            } else {
                mass -= self.nodes[left];
                node = left + 1;
            }
        }
        node - self.leaves
    }
}

#[derive(Debug, Clone)]
struct Channel {
    tree: SumTree,
    priorities: Vec<f64>,
    max_priority: f64,
}

/// One drawn entry.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a, E> {
    pub index: usize,
    pub item: &'a E,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<E> {
    capacity: usize,
    items: Vec<E>,
    next: usize,
    alpha: f64,
    beta: f64,
    priority_floor: f64,
    channels: Vec<Channel>,
}

impl<E> ReplayBuffer<E> {
    pub fn new(capacity: usize, alpha: f64, beta: f64, priority_floor: f64) -> Result<Self> {
        Self::with_channels(capacity, 1, alpha, beta, priority_floor)
    }

    pub fn with_channels(capacity: usize, channels: usize, alpha: f64, beta: f64, priority_floor: f64) -> Result<Self> {
        if capacity == 0 || channels == 0 {
            return Err(Error::Contract("replay capacity and channel count must be positive".into()));
        }
        if alpha < 0.0 || beta < 0.0 || priority_floor <= 0.0 {
            return Err(Error::Contract(format!(
                "replay needs alpha >= 0, beta >= 0, floor > 0 (got {alpha}, {beta}, {priority_floor})"
            )));
        }
        let channel = Channel {
            tree: SumTree::new(capacity),
            priorities: vec![0.0; capacity],
            max_priority: 1.0,
        };
        Ok(Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
            alpha,
            beta,
            priority_floor,
            channels: vec![channel; channels],
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> Option<&E> {
        self.items.get(index)
    }

    pub fn priority(&self, index: usize) -> f64 {
        self.channel_priority(0, index)
    }

    pub fn channel_priority(&self, channel: usize, index: usize) -> f64 {
        self.channels[channel].priorities[index]
    }

    pub fn max_priority(&self) -> f64 {
        self.channels[0].max_priority
    }

    /// Store `item` at the highest priority seen so far, evicting the oldest
    /// entry once full. Returns the slot index.
    pub fn push(&mut self, item: E) -> usize {
        let index = self.next;
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[index] = item;
        }
        self.next = (self.next + 1) % self.capacity;
        let alpha = self.alpha;
        for channel in &mut self.channels {
            let p = channel.max_priority;
            channel.priorities[index] = p;
            channel.tree.set(index, p.powf(alpha));
        }
        index
    }

    /// Probability of drawing `index` from `channel`.
    pub fn probability(&self, channel: usize, index: usize) -> f64 {
        let ch = &self.channels[channel];
        ch.tree.get(index) / ch.tree.total()
    }

    pub fn sample(&self, batch_size: usize, rng: &mut SimRng) -> Result<Vec<Sample<'_, E>>> {
        self.sample_channel(0, batch_size, rng)
    }

    pub fn sample_channel(&self, channel: usize, batch_size: usize, rng: &mut SimRng) -> Result<Vec<Sample<'_, E>>> {
        if self.items.is_empty() {
            return Err(Error::State("cannot sample from an empty replay buffer".into()));
        }
        let ch = &self.channels[channel];
        let total = ch.tree.total();
        let n = self.items.len() as f64;
        let mut batch = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let mass = rng.random::<f64>() * total;
            let index = ch.tree.find(mass).min(self.items.len() - 1);
            let p = ch.tree.get(index) / total;
            batch.push(Sample {
                index,
                item: &self.items[index],
                weight: (n * p).powf(-self.beta),
            });
        }
        let max_weight = batch.iter().map(|s| s.weight).fold(0.0, f64::max);
        for s in &mut batch {
            s.weight /= max_weight;
        }
        Ok(batch)
    }

    pub fn update_priorities(&mut self, indices: &[usize], td_errors: &[f64]) -> Result<()> {
        self.update_channel_priorities(0, indices, td_errors)
    }

    /// Set `priority = |td_error| + floor` for each index.
    pub fn update_channel_priorities(&mut self, channel: usize, indices: &[usize], td_errors: &[f64]) -> Result<()> {
        if indices.len() != td_errors.len() {
            return Err(Error::Contract(format!(
                "{} indices but {} td errors",
                indices.len(),
                td_errors.len()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.items.len()) {
            return Err(Error::Contract(format!(
                "replay index {bad} out of range (size {})",
                self.items.len()
            )));
        }
        if td_errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("td error used as priority".into()));
        }
        let alpha = self.alpha;
        let floor = self.priority_floor;
        let ch = &mut self.channels[channel];
        for (&i, &e) in indices.iter().zip(td_errors) {
            let p = e.abs() + floor;
            ch.priorities[i] = p;
            ch.tree.set(i, p.powf(alpha));
            if p > ch.max_priority {
                ch.max_priority = p;
            }
        }
        Ok(())
    }
}
