use super::{DqnConfig, Learner, LogWindow, TdSample, TrainRecord};
use crate::envcore::{epsilon_schedule, select_epsilon_greedy, ActionValues, DiscreteEnv, Experience};
use crate::error::{check_len, Result};
use crate::numerics::ParamNet;
use crate::replay::ReplayBuffer;
use crate::rng::{stream, SimRng, INIT_STREAM, TRAINING_STREAM};

#[derive(Debug, Clone)]
struct Stored {
    exp: Experience,
    prior_taken: f64,
    prior_next: Vec<f64>,
}

/// Single-agent DQN (or deep-correction) trainer state.
#[derive(Debug, Clone)]
pub struct DqnTrainer<Q> {
    cfg: DqnConfig,
    learner: Learner,
    buffer: ReplayBuffer<Stored>,
    prior: Option<Q>,
    pub(crate) rng: SimRng,
}

impl<Q: ActionValues> DqnTrainer<Q> {
    /// Fresh network initialised from `(cfg.seed, INIT_STREAM)`.
    pub fn new(observation_dim: usize, action_count: usize, cfg: DqnConfig, prior: Option<Q>) -> Result<Self> {
        let sizes = cfg.layer_sizes(observation_dim, action_count);
        let net = ParamNet::new(&sizes, cfg.dueling, &mut stream(cfg.seed, INIT_STREAM))?;
        Self::with_net(net, cfg, prior)
    }

    pub fn with_net(net: ParamNet<f64>, cfg: DqnConfig, prior: Option<Q>) -> Result<Self> {
        cfg.validate()?;
        if let Some(p) = &prior {
            check_len("prior input", net.input_dim(), p.input_dim())?;
            check_len("prior actions", net.output_dim(), p.action_count())?;
        }
        let buffer = ReplayBuffer::new(cfg.buffer_capacity, cfg.alpha, cfg.beta, cfg.priority_floor)?;
        Ok(Self {
            rng: stream(cfg.seed, TRAINING_STREAM),
            learner: Learner::new(net, cfg.learning_rate),
            buffer,
            prior,
            cfg,
        })
    }

    pub fn config(&self) -> &DqnConfig {
        &self.cfg
    }

    pub fn online(&self) -> &ParamNet<f64> {
        &self.learner.online
    }

    pub fn target(&self) -> &ParamNet<f64> {
        &self.learner.target
    }

    pub fn updates(&self) -> u64 {
        self.learner.updates
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    /// Prior values at `obs`, or an empty vector without a prior.
    pub fn prior_values(&self, obs: &[f64]) -> Result<Vec<f64>> {
        match &self.prior {
            Some(p) => p.action_values(obs),
            None => Ok(Vec::new()),
        }
    }

    /// `Q_lo(obs) + net(obs)`.
    pub fn values(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.learner.values(obs, &self.prior_values(obs)?)
    }

    /// Store a transition, evaluating the prior on it.
    pub fn push(&mut self, exp: Experience) -> Result<()> {
        let prior_taken = self.prior_values(&exp.state)?.get(exp.action).copied().unwrap_or(0.0);
        let prior_next = if exp.terminal {
            Vec::new()
        } else {
            self.prior_values(&exp.next_state)?
        };
        self.remember(exp, prior_taken, prior_next);
        Ok(())
    }

    fn remember(&mut self, exp: Experience, prior_taken: f64, prior_next: Vec<f64>) {
        self.buffer.push(Stored {
            exp,
            prior_taken,
            prior_next,
        });
    }

    /// One gradient update from a prioritized batch. Returns the loss.
    pub fn train_step(&mut self) -> Result<f64> {
        let batch = self.buffer.sample(self.cfg.batch_size, &mut self.rng)?;
        let samples: Vec<TdSample<'_>> = batch
            .iter()
            .map(|s| TdSample {
                state: &s.item.exp.state,
                action: s.item.exp.action,
                reward: s.item.exp.reward,
                next_state: &s.item.exp.next_state,
                terminal: s.item.exp.terminal,
                prior_taken: s.item.prior_taken,
                prior_next: &s.item.prior_next,
                weight: s.weight,
            })
            .collect();
        let (loss, tds) = self.learner.update(&samples, &self.cfg)?;
        let indices: Vec<usize> = batch.iter().map(|s| s.index).collect();
        drop(samples);
        drop(batch);
        self.buffer.update_priorities(&indices, &tds)?;
        Ok(loss)
    }

    pub fn into_net(self) -> ParamNet<f64> {
        self.learner.online
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub net: ParamNet<f64>,
    pub log: Vec<TrainRecord>,
    pub env_steps: u64,
    pub updates: u64,
}

/// Plain DQN on `env`.
pub fn train<E: DiscreteEnv>(env: &mut E, cfg: &DqnConfig) -> Result<TrainOutput> {
    train_with_prior::<E, crate::envcore::ZeroValues>(env, cfg, None, &mut |_, _| Ok(()))
}

/// DQN with an optional frozen prior; `hook(steps_done, online)` runs once
/// before training and after every environment step.
pub fn train_with_prior<E, Q>(
    env: &mut E,
    cfg: &DqnConfig,
    prior: Option<Q>,
    hook: &mut dyn FnMut(u64, &ParamNet<f64>) -> Result<()>,
) -> Result<TrainOutput>
where
    E: DiscreteEnv,
    Q: ActionValues,
{
    let mut trainer = DqnTrainer::new(env.observation_dim(), env.action_count(), cfg.clone(), prior)?;
    let mut log = LogWindow::default();
    let total = cfg.total_train_steps;
    hook(0, trainer.online())?;
    if total > 0 {
        let mut obs = env.reset(&mut trainer.rng);
        let mut prior_obs = trainer.prior_values(&obs)?;
        let mut episode_return = 0.0;
        for step in 0..total {
            let epsilon = epsilon_schedule(step, total, cfg.exploration_fraction, cfg.final_epsilon);
            let q = trainer.learner.values(&obs, &prior_obs)?;
            let action = select_epsilon_greedy(&q, epsilon, &mut trainer.rng);
            let out = env.step(&action, &mut trainer.rng)?;
            let prior_next = if out.terminal {
                Vec::new()
            } else {
                trainer.prior_values(&out.observation)?
            };
            let prior_taken = prior_obs.get(action).copied().unwrap_or(0.0);
            episode_return += out.reward;
            let next_obs = out.observation.clone();
            trainer.remember(
                Experience {
                    state: obs,
                    action,
                    reward: out.reward,
                    next_state: out.observation,
                    terminal: out.terminal,
                },
                prior_taken,
                prior_next.clone(),
            );
            if trainer.buffer.len() >= cfg.batch_size {
                log.loss(trainer.train_step()?);
            }
            if out.terminal {
                log.episode(episode_return);
                episode_return = 0.0;
                obs = env.reset(&mut trainer.rng);
                prior_obs = trainer.prior_values(&obs)?;
            } else {
                obs = next_obs;
                prior_obs = prior_next;
            }
            let done = step + 1;
            if done % cfg.log_every == 0 || done == total {
                log.flush(done, trainer.updates(), epsilon);
            }
            hook(done, trainer.online())?;
        }
    }
    Ok(TrainOutput {
        updates: trainer.updates(),
        net: trainer.into_net(),
        log: log.records,
        env_steps: total,
    })
}
