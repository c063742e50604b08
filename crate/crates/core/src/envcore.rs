//! The environment contract shared by every problem, plus rollouts,
//! epsilon-greedy exploration and return accounting.

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ParamNet;
use crate::rng::SimRng;

/// How an episode (or a step) ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Not terminal.
    Ongoing,
    /// Crosswalk: goal reached.
    Success,
    /// Crosswalk: ego hit a pedestrian.
    Collision,
    /// Crosswalk: did not cross in time.
    Timeout,
    /// Fisheries: population fell below the minimum.
    Collapse,
    /// Fisheries: survived the full horizon.
    Survived,
    /// Rollout stopped at `max_steps` before a terminal state.
    Truncated,
    /// Generic terminal state for environments without richer labels.
    Terminal,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Ongoing => "ongoing",
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
            Outcome::Collapse => "collapse",
            Outcome::Survived => "survived",
            Outcome::Truncated => "truncated",
            Outcome::Terminal => "terminal",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one call to [`EnvModel::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
    pub outcome: Outcome,
}

/// A generative model with internal state: `reset` samples an initial
/// state, `step` samples a successor. Observations are what the agent sees.
pub trait EnvModel {
    type Action: Clone + fmt::Debug;

    fn observation_dim(&self) -> usize;
    fn discount(&self) -> f64;
    fn check_action(&self, action: &Self::Action) -> Result<()>;
    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64>;
    fn step(&mut self, action: &Self::Action, rng: &mut SimRng) -> Result<StepOutcome>;
}

/// Environments with a flat discrete action set `0..action_count`.
pub trait DiscreteEnv: EnvModel<Action = usize> {
    fn action_count(&self) -> usize;
}

/// Environments whose action is one local action per agent.
pub trait JointEnv: EnvModel<Action = Vec<usize>> {
    fn agent_count(&self) -> usize;
    fn local_action_count(&self) -> usize;
}

/// One transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience<A = usize> {
    pub state: Vec<f64>,
    pub action: A,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub discounted_return: f64,
    pub undiscounted_return: f64,
    pub step_count: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode<A> {
    pub result: EpisodeResult,
    pub trace: Vec<Experience<A>>,
}

/// Run one episode until a terminal state or `max_steps`.
pub fn rollout<E, P>(env: &mut E, mut policy: P, rng: &mut SimRng, max_steps: usize) -> Result<Episode<E::Action>>
where
    E: EnvModel,
    P: FnMut(&[f64], &mut SimRng) -> E::Action,
{
    try_rollout(env, |s, r| Ok(policy(s, r)), rng, max_steps)
}

/// [`rollout`] with a policy that can fail.
pub fn try_rollout<E, P>(env: &mut E, mut policy: P, rng: &mut SimRng, max_steps: usize) -> Result<Episode<E::Action>>
where
    E: EnvModel,
    P: FnMut(&[f64], &mut SimRng) -> Result<E::Action>,
{
    if max_steps == 0 {
        return Err(Error::Contract("rollout needs max_steps >= 1".into()));
    }
    let gamma = env.discount();
    let mut state = env.reset(rng);
    let mut trace = Vec::new();
    let mut discounted = 0.0;
    let mut undiscounted = 0.0;
    let mut weight = 1.0;
    let mut outcome = Outcome::Truncated;
    for _ in 0..max_steps {
        let action = policy(&state, rng)?;
        env.check_action(&action)?;
        let step = env.step(&action, rng)?;
        discounted += weight * step.reward;
        undiscounted += step.reward;
        weight *= gamma;
        trace.push(Experience {
            state: std::mem::replace(&mut state, step.observation.clone()),
            action,
            reward: step.reward,
            next_state: step.observation,
            terminal: step.terminal,
        });
        if step.terminal {
            outcome = step.outcome;
            break;
        }
    }
    Ok(Episode {
        result: EpisodeResult {
            discounted_return: discounted,
            undiscounted_return: undiscounted,
            step_count: trace.len(),
            outcome,
        },
        trace,
    })
}

/// Write a trace as CSV: `step,s0..,action,reward,terminal`.
pub fn write_trace_csv<W: Write>(trace: &[Experience<usize>], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let dim = trace.first().map_or(0, |e| e.state.len());
    let mut header = vec!["step".to_string()];
    header.extend((0..dim).map(|i| format!("s{i}")));
    header.extend(["action", "reward", "terminal"].map(String::from));
    writer.write_record(&header)?;
    for (t, exp) in trace.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(exp.state.iter().map(|x| x.to_string()));
        row.push(exp.action.to_string());
        row.push(exp.reward.to_string());
        row.push(exp.terminal.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Something that scores every discrete action from an observation.
pub trait ActionValues {
    fn input_dim(&self) -> usize;
    fn action_count(&self) -> usize;
    fn action_values(&self, observation: &[f64]) -> Result<Vec<f64>>;
}

impl ActionValues for ParamNet<f64> {
    fn input_dim(&self) -> usize {
        ParamNet::input_dim(self)
    }
    fn action_count(&self) -> usize {
        self.output_dim()
    }
    fn action_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.forward(observation)
    }
}

impl<Q: ActionValues + ?Sized> ActionValues for &Q {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn action_count(&self) -> usize {
        (**self).action_count()
    }
    fn action_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        (**self).action_values(observation)
    }
}

/// Constant-zero action values, e.g. a trivial low-fidelity prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroValues {
    pub input_dim: usize,
    pub action_count: usize,
}

impl ActionValues for ZeroValues {
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn action_count(&self) -> usize {
        self.action_count
    }
    fn action_values(&self, _observation: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.action_count])
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

/// Pick a uniformly random action with probability `epsilon`, else the
/// argmax. Always consumes one uniform draw, plus one more when exploring.
pub fn select_epsilon_greedy(values: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..values.len())
    } else {
        argmax(values)
    }
}

/// An epsilon-greedy policy over `q`.
pub fn epsilon_greedy<Q: ActionValues>(
    q: Q,
    epsilon: f64,
) -> Result<impl FnMut(&[f64], &mut SimRng) -> usize> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Contract(format!("epsilon {epsilon} outside [0, 1]")));
    }
    Ok(move |obs: &[f64], rng: &mut SimRng| {
        let values = q.action_values(obs).expect("policy evaluated on a well-formed observation");
        select_epsilon_greedy(&values, epsilon, rng)
    })
}

/// Linear decay from 1.0 at step 0 to `final_epsilon` at
/// `exploration_fraction * total_steps`, constant afterwards.
pub fn epsilon_schedule(step: u64, total_steps: u64, exploration_fraction: f64, final_epsilon: f64) -> f64 {
    let horizon = exploration_fraction * total_steps as f64;
    if horizon <= 0.0 || step as f64 >= horizon {
        return if step == 0 && horizon > 0.0 { 1.0 } else { final_epsilon };
    }
    let progress = step as f64 / horizon;
    1.0 + progress * (final_epsilon - 1.0)
}
