//! Small finite MDPs with exact value iteration, used as ground truth for
//! the learners. States are presented to networks one-hot encoded.

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::envcore::{ActionValues, DiscreteEnv, EnvModel, Outcome, StepOutcome};
use crate::error::{check_len, Error, Result};
use crate::rng::{stream, SimRng};

/// A continuing finite MDP; episodes never terminate on their own.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    /// `transitions[s][a][s']`.
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// Expected reward `rewards[s][a]`, paid deterministically.
    pub rewards: Vec<Vec<f64>>,
    pub discount: f64,
    /// Initial state distribution.
    pub start: Vec<f64>,
    state: usize,
}

impl TabularMdp {
    pub fn new(transitions: Vec<Vec<Vec<f64>>>, rewards: Vec<Vec<f64>>, discount: f64, start: Vec<f64>) -> Result<Self> {
        let n = transitions.len();
        if n == 0 {
            return Err(Error::Contract("an MDP needs at least one state".into()));
        }
        let k = transitions[0].len();
        check_len("reward rows", n, rewards.len())?;
        check_len("start distribution", n, start.len())?;
        for (row, r) in transitions.iter().zip(&rewards) {
            check_len("actions", k, row.len())?;
            check_len("reward actions", k, r.len())?;
            for p in row {
                check_len("successor distribution", n, p.len())?;
                if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < 0.0) {
                    return Err(Error::Contract("transition rows must be probability vectors".into()));
                }
            }
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::Contract("continuing MDPs need a discount in [0, 1)".into()));
        }
        Ok(Self {
            transitions,
            rewards,
            discount,
            start,
            state: 0,
        })
    }

    /// Dirichlet(1)-style random transitions and uniform [0, 1) rewards.
    pub fn random(states: usize, actions: usize, discount: f64, seed: u64) -> Result<Self> {
        let mut rng = stream(seed, 0);
        let unit = Uniform::new(0.0, 1.0).expect("valid range");
        let transitions = (0..states)
            .map(|_| {
                (0..actions)
                    .map(|_| {
                        let w: Vec<f64> = (0..states).map(|_| -f64::max(unit.sample(&mut rng), 1e-12).ln()).collect();
                        let total: f64 = w.iter().sum();
                        w.into_iter().map(|x| x / total).collect()
                    })
                    .collect()
            })
            .collect();
        let rewards = (0..states)
            .map(|_| (0..actions).map(|_| unit.sample(&mut rng)).collect())
            .collect();
        Self::new(transitions, rewards, discount, vec![1.0 / states as f64; states])
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn current_state(&self) -> usize {
        self.state
    }

    pub fn one_hot(&self, s: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.state_count()];
        v[s] = 1.0;
        v
    }

    fn sample(dist: &[f64], rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        dist.len() - 1
    }

    /// Optimal action values by value iteration, to sup-norm change `tol`.
    pub fn value_iteration(&self, tol: f64) -> Vec<Vec<f64>> {
        let n = self.state_count();
        let mut v = vec![0.0; n];
        loop {
            let q = self.q_from(&v);
            let next: Vec<f64> = q.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
            let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if delta < tol * (1.0 - self.discount) {
                return self.q_from(&v);
            }
        }
    }

    fn q_from(&self, v: &[f64]) -> Vec<Vec<f64>> {
        self.transitions
            .iter()
            .zip(&self.rewards)
            .map(|(row, r)| {
                row.iter()
                    .zip(r)
                    .map(|(p, &reward)| reward + self.discount * p.iter().zip(v).map(|(p, v)| p * v).sum::<f64>())
                    .collect()
            })
            .collect()
    }
}

impl EnvModel for TabularMdp {
    type Action = usize;

    fn observation_dim(&self) -> usize {
        self.state_count()
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn check_action(&self, action: &usize) -> Result<()> {
        if *action < self.transitions[0].len() {
            Ok(())
        } else {
            Err(Error::Contract(format!("action {action} out of range")))
        }
    }

    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64> {
        self.state = Self::sample(&self.start, rng);
        self.one_hot(self.state)
    }

    fn step(&mut self, action: &usize, rng: &mut SimRng) -> Result<StepOutcome> {
        self.check_action(action)?;
        let reward = self.rewards[self.state][*action];
        self.state = Self::sample(&self.transitions[self.state][*action], rng);
        Ok(StepOutcome {
            observation: self.one_hot(self.state),
            reward,
            terminal: false,
            outcome: Outcome::Ongoing,
        })
    }
}

impl DiscreteEnv for TabularMdp {
    fn action_count(&self) -> usize {
        self.transitions[0].len()
    }
}

/// A table of action values read through a one-hot state encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    pub values: Vec<Vec<f64>>,
}

impl TabularQ {
    pub fn new(values: Vec<Vec<f64>>) -> Self {
        Self { values }
    }

    /// Index of the hot coordinate.
    pub fn decode(state: &[f64]) -> Result<usize> {
        state
            .iter()
            .position(|&x| x == 1.0)
            .ok_or_else(|| Error::Contract("expected a one-hot state".into()))
    }
}

impl ActionValues for TabularQ {
    fn input_dim(&self) -> usize {
        self.values.len()
    }

    fn action_count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    fn action_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        check_len("tabular state", self.values.len(), state.len())?;
        Ok(self.values[Self::decode(state)?].clone())
    }
}

/// Greedy action per state.
pub fn greedy_policy(q: &[Vec<f64>]) -> Vec<usize> {
    q.iter().map(|row| crate::envcore::argmax(row)).collect()
}
