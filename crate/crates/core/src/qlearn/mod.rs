//! Deep Q-learning: double-Q targets against a periodically synced target
//! network, prioritized replay, Adam on the importance-weighted squared TD
//! error.
//!
//! Both trainers accept an optional frozen prior `Q_lo`. The learned network
//! then represents the correction `delta` and every value used for acting,
//! bootstrapping or prediction is `Q_lo + delta`. With no prior they are
//! plain DQN.

mod decomposed;
mod single;

pub use decomposed::{train_decomposed, AgentNetsHook, DecomposedOutput, DecomposedTrainer, PerAgentValues};
pub use single::{train, train_with_prior, DqnTrainer, TrainOutput};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::envcore::{argmax, Experience};
use crate::error::{Error, Result};
use crate::numerics::{AdamState, ParamNet};

/// Training hyperparameters. `Default` is the fisheries setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    /// Environment steps (= experience samples) to collect.
    pub total_train_steps: u64,
    pub buffer_capacity: usize,
    /// Gradient updates between target-network syncs.
    pub target_update_frequency: u64,
    pub discount: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub exploration_fraction: f64,
    pub final_epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub priority_floor: f64,
    pub hidden_layers: Vec<usize>,
    pub dueling: bool,
    pub double_q: bool,
    /// Environment steps aggregated into one log record.
    pub log_every: u64,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self::fisheries()
    }
}

impl DqnConfig {
    pub fn fisheries() -> Self {
        Self {
            total_train_steps: 160_000,
            buffer_capacity: 500_000,
            target_update_frequency: 2_000,
            discount: 0.99,
            learning_rate: 1e-4,
            batch_size: 32,
            exploration_fraction: 0.2,
            final_epsilon: 0.05,
            alpha: 0.7,
            beta: 1e-3,
            priority_floor: 1e-6,
            hidden_layers: vec![16],
            dueling: true,
            double_q: true,
            log_every: 1_000,
            seed: 0,
        }
    }

    pub fn crosswalk() -> Self {
        Self {
            total_train_steps: 1_000_000,
            buffer_capacity: 400_000,
            target_update_frequency: 5_000,
            discount: 0.99,
            learning_rate: 1e-4,
            batch_size: 32,
            exploration_fraction: 0.5,
            final_epsilon: 0.01,
            alpha: 0.7,
            beta: 1e-3,
            priority_floor: 1e-6,
            hidden_layers: vec![32; 5],
            dueling: true,
            double_q: true,
            log_every: 1_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Contract(msg));
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad(format!("discount {} outside (0, 1]", self.discount));
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 || self.target_update_frequency == 0 || self.log_every == 0 {
            return bad("buffer_capacity, batch_size, target_update_frequency and log_every must be positive".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.exploration_fraction) || !(0.0..=1.0).contains(&self.final_epsilon) {
            return bad("exploration_fraction and final_epsilon must lie in [0, 1]".into());
        }
        if self.alpha < 0.0 || self.beta < 0.0 || !(self.priority_floor > 0.0) {
            return bad("alpha, beta must be >= 0 and priority_floor > 0".into());
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        Ok(())
    }

    pub fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(&self.hidden_layers);
        sizes.push(output);
        sizes
    }
}

/// One aggregated log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    /// Environment steps completed.
    pub step: u64,
    pub updates: u64,
    /// Mean minibatch loss over the updates in this window (NaN if none).
    pub loss: f64,
    pub epsilon: f64,
    pub episodes: u64,
    /// Mean undiscounted return of episodes finished in this window (NaN if none).
    pub mean_return: f64,
}

pub fn write_log_csv<W: Write>(records: &[TrainRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Double-Q TD target for one transition: `r` if terminal, else
/// `r + gamma * Q_target(s', argmax_a Q_online(s', a))`.
pub fn td_target(exp: &Experience, online: &ParamNet<f64>, target: &ParamNet<f64>, discount: f64) -> Result<f64> {
    if online.output_dim() != target.output_dim() {
        return Err(Error::Shape {
            what: "target network output",
            expected: online.output_dim(),
            got: target.output_dim(),
        });
    }
    bootstrap(online, target, exp.reward, exp.terminal, &exp.next_state, &[], discount, true)
}

#[allow(clippy::too_many_arguments)]
fn bootstrap(
    online: &ParamNet<f64>,
    target: &ParamNet<f64>,
    reward: f64,
    terminal: bool,
    next_state: &[f64],
    prior_next: &[f64],
    discount: f64,
    double_q: bool,
) -> Result<f64> {
    if terminal {
        return Ok(reward);
    }
    let mut frozen = target.forward(next_state)?;
    add_prior(&mut frozen, prior_next);
    let best = if double_q {
        let mut live = online.forward(next_state)?;
        add_prior(&mut live, prior_next);
        frozen[argmax(&live)]
    } else {
        frozen.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(reward + discount * best)
}

/// `values += prior`; an empty prior means none.
pub(crate) fn add_prior(values: &mut [f64], prior: &[f64]) {
    for (v, p) in values.iter_mut().zip(prior) {
        *v += p;
    }
}

/// One transition as seen by the learner, with the prior already evaluated.
pub(crate) struct TdSample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub reward: f64,
    pub next_state: &'a [f64],
    pub terminal: bool,
    pub prior_taken: f64,
    pub prior_next: &'a [f64],
    pub weight: f64,
}

/// Online/target pair plus optimizer state.
#[derive(Debug, Clone)]
pub(crate) struct Learner {
    pub online: ParamNet<f64>,
    pub target: ParamNet<f64>,
    pub adam: AdamState<f64>,
    pub updates: u64,
    grad: Vec<f64>,
}

impl Learner {
    pub fn new(net: ParamNet<f64>, learning_rate: f64) -> Self {
        let adam = AdamState::for_net(&net, learning_rate);
        let grad = vec![0.0; net.param_count()];
        Self {
            target: net.clone(),
            online: net,
            adam,
            updates: 0,
            grad,
        }
    }

    /// `prior + online(obs)`.
    pub fn values(&self, obs: &[f64], prior: &[f64]) -> Result<Vec<f64>> {
        let mut q = self.online.forward(obs)?;
        add_prior(&mut q, prior);
        Ok(q)
    }

    /// One Adam step on the weighted mean squared TD error of `batch`.
    /// Returns the loss and the per-sample TD errors.
    pub fn update(&mut self, batch: &[TdSample<'_>], cfg: &DqnConfig) -> Result<(f64, Vec<f64>)> {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut tds = Vec::with_capacity(batch.len());
        let mut cotangent = vec![0.0; self.online.output_dim()];
        for s in batch {
            let trace = self.online.forward_trace(s.state)?;
            let prediction = s.prior_taken + trace.output()[s.action];
            let target = bootstrap(
                &self.online,
                &self.target,
                s.reward,
                s.terminal,
                s.next_state,
                s.prior_next,
                cfg.discount,
                cfg.double_q,
            )?;
            let td = target - prediction;
            loss += s.weight * td * td;
            cotangent[s.action] = -2.0 * s.weight * td / n;
            self.online.backward(&trace, &cotangent, &mut self.grad)?;
            cotangent[s.action] = 0.0;
            tds.push(td);
        }
        loss /= n;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at update {}", self.updates + 1)));
        }
        self.online.apply_adam(&self.grad, &mut self.adam)?;
        self.updates += 1;
        if self.updates.is_multiple_of(cfg.target_update_frequency) {
            self.target = self.online.clone();
        }
        Ok((loss, tds))
    }
}

/// Accumulates per-window statistics into [`TrainRecord`]s.
#[derive(Debug, Default)]
pub(crate) struct LogWindow {
    loss_sum: f64,
    loss_count: u64,
    return_sum: f64,
    finished: u64,
    episodes: u64,
    pub records: Vec<TrainRecord>,
}

impl LogWindow {
    pub fn loss(&mut self, loss: f64) {
        self.loss_sum += loss;
        self.loss_count += 1;
    }

    pub fn episode(&mut self, undiscounted: f64) {
        self.return_sum += undiscounted;
        self.finished += 1;
        self.episodes += 1;
    }

    pub fn flush(&mut self, step: u64, updates: u64, epsilon: f64) {
        let mean = |sum: f64, n: u64| if n == 0 { f64::NAN } else { sum / n as f64 };
        self.records.push(TrainRecord {
            step,
            updates,
            loss: mean(self.loss_sum, self.loss_count),
            epsilon,
            episodes: self.episodes,
            mean_return: mean(self.return_sum, self.finished),
        });
        self.loss_sum = 0.0;
        self.loss_count = 0;
        self.return_sum = 0.0;
        self.finished = 0;
    }
}
