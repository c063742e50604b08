use super::{DqnConfig, Learner, LogWindow, TdSample, TrainRecord};
use crate::envcore::{argmax, epsilon_schedule, JointEnv};
use crate::error::{check_len, Result};
use crate::numerics::ParamNet;
use crate::replay::ReplayBuffer;
use crate::rng::{stream, SimRng, INIT_STREAM, TRAINING_STREAM};
use rand::Rng;

/// Called with the steps done and every agent's online network.
pub type AgentNetsHook<'a> = dyn FnMut(u64, &[&ParamNet<f64>]) -> Result<()> + 'a;

/// Per-agent local action values computed from the global observation.
pub trait PerAgentValues {
    fn input_dim(&self) -> usize;
    fn agent_count(&self) -> usize;
    fn local_action_count(&self) -> usize;
    fn agent_values(&self, agent: usize, observation: &[f64]) -> Result<Vec<f64>>;
}

impl<P: PerAgentValues + ?Sized> PerAgentValues for &P {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn agent_count(&self) -> usize {
        (**self).agent_count()
    }
    fn local_action_count(&self) -> usize {
        (**self).local_action_count()
    }
    fn agent_values(&self, agent: usize, observation: &[f64]) -> Result<Vec<f64>> {
        (**self).agent_values(agent, observation)
    }
}

#[derive(Debug, Clone)]
struct JointStored {
    state: Vec<f64>,
    actions: Vec<usize>,
    reward: f64,
    next_state: Vec<f64>,
    terminal: bool,
    prior_taken: Vec<f64>,
    /// Agent-major `agents x local_actions`; empty when terminal or no prior.
    prior_next: Vec<f64>,
}

/// One network per agent, each mapping the global observation to values of
/// that agent's local actions, all trained on the shared global reward.
/// The joint greedy action maximises the sum of per-agent values, which
/// separates into independent per-agent argmaxes.
#[derive(Debug, Clone)]
pub struct DecomposedTrainer<P> {
    cfg: DqnConfig,
    learners: Vec<Learner>,
    buffer: ReplayBuffer<JointStored>,
    prior: Option<P>,
    local_actions: usize,
    rng: SimRng,
}

impl<P: PerAgentValues> DecomposedTrainer<P> {
    pub fn new(
        observation_dim: usize,
        agents: usize,
        local_actions: usize,
        cfg: DqnConfig,
        prior: Option<P>,
    ) -> Result<Self> {
        cfg.validate()?;
        if let Some(p) = &prior {
            check_len("prior input", observation_dim, p.input_dim())?;
            check_len("prior agents", agents, p.agent_count())?;
            check_len("prior local actions", local_actions, p.local_action_count())?;
        }
        let sizes = cfg.layer_sizes(observation_dim, local_actions);
        let mut init = stream(cfg.seed, INIT_STREAM);
        let learners = (0..agents)
            .map(|_| Ok(Learner::new(ParamNet::new(&sizes, cfg.dueling, &mut init)?, cfg.learning_rate)))
            .collect::<Result<Vec<_>>>()?;
        let buffer = ReplayBuffer::with_channels(cfg.buffer_capacity, agents, cfg.alpha, cfg.beta, cfg.priority_floor)?;
        Ok(Self {
            rng: stream(cfg.seed, TRAINING_STREAM),
            learners,
            buffer,
            prior,
            local_actions,
            cfg,
        })
    }

    pub fn nets(&self) -> Vec<&ParamNet<f64>> {
        self.learners.iter().map(|l| &l.online).collect()
    }

    pub fn updates(&self) -> u64 {
        self.learners.first().map_or(0, |l| l.updates)
    }

    fn prior_all(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let Some(p) = &self.prior else {
            return Ok(Vec::new());
        };
        let mut out = Vec::with_capacity(self.learners.len() * self.local_actions);
        for agent in 0..self.learners.len() {
            out.extend(p.agent_values(agent, obs)?);
        }
        Ok(out)
    }

    fn prior_slice<'a>(&self, all: &'a [f64], agent: usize) -> &'a [f64] {
        if all.is_empty() {
            all
        } else {
            &all[agent * self.local_actions..(agent + 1) * self.local_actions]
        }
    }

    /// Per-agent `Q_lo,i + net_i` at `obs`.
    pub fn joint_values(&self, obs: &[f64]) -> Result<Vec<Vec<f64>>> {
        let prior = self.prior_all(obs)?;
        self.learners
            .iter()
            .enumerate()
            .map(|(i, l)| l.values(obs, self.prior_slice(&prior, i)))
            .collect()
    }

    fn act(&mut self, obs: &[f64], prior: &[f64], epsilon: f64) -> Result<Vec<usize>> {
        if self.rng.random::<f64>() < epsilon {
            let k = self.local_actions;
            return Ok((0..self.learners.len()).map(|_| self.rng.random_range(0..k)).collect());
        }
        self.learners
            .iter()
            .enumerate()
            .map(|(i, l)| Ok(argmax(&l.values(obs, self.prior_slice(prior, i))?)))
            .collect()
    }

    /// One update for every agent network. Returns the mean loss.
    pub fn train_step(&mut self) -> Result<f64> {
        let k = self.local_actions;
        let mut total = 0.0;
        for agent in 0..self.learners.len() {
            let batch = self.buffer.sample_channel(agent, self.cfg.batch_size, &mut self.rng)?;
            let samples: Vec<TdSample<'_>> = batch
                .iter()
                .map(|s| {
                    let item = s.item;
                    TdSample {
                        state: &item.state,
                        action: item.actions[agent],
                        reward: item.reward,
                        next_state: &item.next_state,
                        terminal: item.terminal,
                        prior_taken: item.prior_taken.get(agent).copied().unwrap_or(0.0),
                        prior_next: if item.prior_next.is_empty() {
                            &[]
                        } else {
                            &item.prior_next[agent * k..(agent + 1) * k]
                        },
                        weight: s.weight,
                    }
                })
                .collect();
            let (loss, tds) = self.learners[agent].update(&samples, &self.cfg)?;
            let indices: Vec<usize> = batch.iter().map(|s| s.index).collect();
            drop(samples);
            drop(batch);
            self.buffer.update_channel_priorities(agent, &indices, &tds)?;
            total += loss;
        }
        Ok(total / self.learners.len() as f64)
    }

    pub fn into_nets(self) -> Vec<ParamNet<f64>> {
        self.learners.into_iter().map(|l| l.online).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DecomposedOutput {
    pub nets: Vec<ParamNet<f64>>,
    pub log: Vec<TrainRecord>,
    pub env_steps: u64,
    pub updates: u64,
}

/// Decomposed DQN (no prior) or decomposed deep corrections (with a
/// per-agent prior). `hook(steps_done, nets)` runs before training and after
/// every environment step.
pub fn train_decomposed<E, P>(
    env: &mut E,
    cfg: &DqnConfig,
    prior: Option<P>,
    hook: &mut AgentNetsHook<'_>,
) -> Result<DecomposedOutput>
where
    E: JointEnv,
    P: PerAgentValues,
{
    let mut trainer = DecomposedTrainer::new(
        env.observation_dim(),
        env.agent_count(),
        env.local_action_count(),
        cfg.clone(),
        prior,
    )?;
    let mut log = LogWindow::default();
    let total = cfg.total_train_steps;
    hook(0, &trainer.nets())?;
    if total > 0 {
        let mut obs = env.reset(&mut trainer.rng);
        let mut prior_obs = trainer.prior_all(&obs)?;
        let mut episode_return = 0.0;
        for step in 0..total {
            let epsilon = epsilon_schedule(step, total, cfg.exploration_fraction, cfg.final_epsilon);
            let actions = trainer.act(&obs, &prior_obs, epsilon)?;
            let out = env.step(&actions, &mut trainer.rng)?;
            let prior_next = if out.terminal {
                Vec::new()
            } else {
                trainer.prior_all(&out.observation)?
            };
            let prior_taken = if prior_obs.is_empty() {
                Vec::new()
            } else {
                actions
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| prior_obs[i * trainer.local_actions + a])
                    .collect()
            };
            episode_return += out.reward;
            let next_obs = out.observation.clone();
            trainer.buffer.push(JointStored {
                state: obs,
                actions,
                reward: out.reward,
                next_state: out.observation,
                terminal: out.terminal,
                prior_taken,
                prior_next: prior_next.clone(),
            });
            if trainer.buffer.len() >= cfg.batch_size {
                log.loss(trainer.train_step()?);
            }
            if out.terminal {
                log.episode(episode_return);
                episode_return = 0.0;
                obs = env.reset(&mut trainer.rng);
                prior_obs = trainer.prior_all(&obs)?;
            } else {
                obs = next_obs;
                prior_obs = prior_next;
            }
            let done = step + 1;
            if done % cfg.log_every == 0 || done == total {
                log.flush(done, trainer.updates(), epsilon);
            }
            hook(done, &trainer.nets())?;
        }
    }
    Ok(DecomposedOutput {
        updates: trainer.updates(),
        nets: trainer.into_nets(),
        log: log.records,
        env_steps: total,
    })
}
