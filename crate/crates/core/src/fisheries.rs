//! Multi-boat fisheries management.
//!
//! The state is the fish stock of each region. A season fishes every region
//! (catch ~ Poisson(efficiency * a_i * f_i), capped at the stock), then the
//! remaining total population reproduces logistically and is split equally
//! across regions. The episode ends after `horizon` seasons or when the
//! population falls below the minimum.
//!
//! Boat `i` earns `r_i = C * (c_i - cost * a_i^2)` with `C = n / f_max`; the
//! global reward is the mean of the `r_i`, which puts it on the same scale
//! as the single-boat problem.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::envcore::{DiscreteEnv, EnvModel, JointEnv, Outcome, StepOutcome};
use crate::error::{check_len, Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FisheriesParams {
    pub n_boats: usize,
    pub initial_population: f64,
    pub max_population: f64,
    pub min_population: f64,
    pub growth_rate: f64,
    pub fishing_cost: f64,
    pub boat_efficiency: f64,
    pub discount: f64,
    pub horizon: u32,
    /// Fraction of the regional stock each boat may catch.
    pub local_actions: Vec<f64>,
}

impl Default for FisheriesParams {
    fn default() -> Self {
        Self {
            n_boats: 10,
            initial_population: 1.5e5,
            max_population: 3e5,
            min_population: 200.0,
            growth_rate: 0.5,
            fishing_cost: 1e3,
            boat_efficiency: 0.98,
            discount: 0.99,
            horizon: 100,
            local_actions: vec![1.0, 0.5, 0.3, 0.1],
        }
    }
}

impl FisheriesParams {
    /// One boat in one region: population, capacity and minimum scaled by `1/n`.
    pub fn single_boat(&self) -> Self {
        let n = self.n_boats as f64;
        Self {
            n_boats: 1,
            initial_population: self.initial_population / n,
            max_population: self.max_population / n,
            min_population: self.min_population / n,
            ..self.clone()
        }
    }

    pub fn regional_capacity(&self) -> f64 {
        self.max_population / self.n_boats as f64
    }

    /// `C = n / f_max`.
    pub fn reward_scale(&self) -> f64 {
        self.n_boats as f64 / self.max_population
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.initial_population,
            self.max_population,
            self.min_population,
            self.growth_rate,
            self.fishing_cost,
            self.boat_efficiency,
        ];
        if self.n_boats == 0 || self.horizon == 0 || positive.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Contract("fisheries parameters must be positive".into()));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Contract(format!("discount {} outside (0, 1]", self.discount)));
        }
        if self.local_actions.is_empty() || self.local_actions.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::Contract("local actions must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisheriesState {
    pub fish: Vec<f64>,
    pub season: u32,
}

impl FisheriesState {
    pub fn initial(params: &FisheriesParams) -> Self {
        let n = params.n_boats;
        Self {
            fish: vec![params.initial_population / n as f64; n],
            season: 0,
        }
    }

    pub fn total(&self) -> f64 {
        self.fish.iter().sum()
    }
}

/// Logistic growth `f * exp(G (1 - f / f_max))`, capped at `f_max`.
pub fn grow(total_fish: f64, params: &FisheriesParams) -> f64 {
    let grown = total_fish * (params.growth_rate * (1.0 - total_fish / params.max_population)).exp();
    grown.min(params.max_population)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonOutcome {
    pub next: FisheriesState,
    pub catches: Vec<f64>,
    pub individual_rewards: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
    pub outcome: Outcome,
}

fn poisson(mean: f64, rng: &mut SimRng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng)
}

/// One season under the catch fractions `joint_action` (values, not indices).
pub fn step(state: &FisheriesState, joint_action: &[f64], params: &FisheriesParams, rng: &mut SimRng) -> Result<SeasonOutcome> {
    check_len("joint action", params.n_boats, joint_action.len())?;
    check_len("fisheries state", params.n_boats, state.fish.len())?;
    if let Some(a) = joint_action.iter().find(|a| !params.local_actions.contains(a)) {
        return Err(Error::Contract(format!(
            "catch fraction {a} not in the action set {:?}",
            params.local_actions
        )));
    }
    let scale = params.reward_scale();
    let n = params.n_boats;
    let mut catches = Vec::with_capacity(n);
    let mut rewards = Vec::with_capacity(n);
    let mut remaining = 0.0;
    for (&f, &a) in state.fish.iter().zip(joint_action) {
        let caught = poisson(params.boat_efficiency * a * f, rng).min(f.floor());
        remaining += f - caught;
        rewards.push(scale * (caught - params.fishing_cost * a * a));
        catches.push(caught);
    }
    let grown = grow(remaining, params);
    let season = state.season + 1;
    let (terminal, outcome) = if grown < params.min_population {
        (true, Outcome::Collapse)
    } else if season >= params.horizon {
        (true, Outcome::Survived)
    } else {
        (false, Outcome::Ongoing)
    };
    Ok(SeasonOutcome {
        next: FisheriesState {
            fish: vec![grown / n as f64; n],
            season,
        },
        reward: rewards.iter().sum::<f64>() / n as f64,
        catches,
        individual_rewards: rewards,
        terminal,
        outcome,
    })
}

/// The `n`-boat problem: joint action = one action index per boat;
/// observation = regional stocks divided by the regional capacity.
#[derive(Debug, Clone)]
pub struct FisheriesEnv {
    params: FisheriesParams,
    state: FisheriesState,
}

impl FisheriesEnv {
    pub fn new(params: FisheriesParams) -> Result<Self> {
        params.validate()?;
        let state = FisheriesState::initial(&params);
        Ok(Self { params, state })
    }

    pub fn params(&self) -> &FisheriesParams {
        &self.params
    }

    pub fn state(&self) -> &FisheriesState {
        &self.state
    }

    pub fn observe(&self) -> Vec<f64> {
        let cap = self.params.regional_capacity();
        self.state.fish.iter().map(|f| f / cap).collect()
    }

    fn fractions(&self, actions: &[usize]) -> Result<Vec<f64>> {
        actions
            .iter()
            .map(|&i| {
                self.params.local_actions.get(i).copied().ok_or_else(|| {
                    Error::Contract(format!(
                        "action index {i} out of range 0..{}",
                        self.params.local_actions.len()
                    ))
                })
            })
            .collect()
    }

    fn advance(&mut self, actions: &[usize], rng: &mut SimRng) -> Result<StepOutcome> {
        let fractions = self.fractions(actions)?;
        let season = step(&self.state, &fractions, &self.params, rng)?;
        self.state = season.next;
        Ok(StepOutcome {
            observation: self.observe(),
            reward: season.reward,
            terminal: season.terminal,
            outcome: season.outcome,
        })
    }
}

impl EnvModel for FisheriesEnv {
    type Action = Vec<usize>;

    fn observation_dim(&self) -> usize {
        self.params.n_boats
    }

    fn discount(&self) -> f64 {
        self.params.discount
    }

    fn check_action(&self, action: &Vec<usize>) -> Result<()> {
        check_len("joint action", self.params.n_boats, action.len())?;
        self.fractions(action).map(|_| ())
    }

    fn reset(&mut self, _rng: &mut SimRng) -> Vec<f64> {
        self.state = FisheriesState::initial(&self.params);
        self.observe()
    }

    fn step(&mut self, action: &Vec<usize>, rng: &mut SimRng) -> Result<StepOutcome> {
        self.advance(action, rng)
    }
}

impl JointEnv for FisheriesEnv {
    fn agent_count(&self) -> usize {
        self.params.n_boats
    }
    fn local_action_count(&self) -> usize {
        self.params.local_actions.len()
    }
}

/// One boat fishing one region; see [`FisheriesParams::single_boat`].
#[derive(Debug, Clone)]
pub struct SingleBoatEnv {
    inner: FisheriesEnv,
}

pub fn single_boat_env(params: &FisheriesParams) -> Result<SingleBoatEnv> {
    Ok(SingleBoatEnv {
        inner: FisheriesEnv::new(params.single_boat())?,
    })
}

impl SingleBoatEnv {
    pub fn params(&self) -> &FisheriesParams {
        self.inner.params()
    }

    pub fn state(&self) -> &FisheriesState {
        self.inner.state()
    }
}

impl EnvModel for SingleBoatEnv {
    type Action = usize;

    fn observation_dim(&self) -> usize {
        1
    }

    fn discount(&self) -> f64 {
        self.inner.discount()
    }

    fn check_action(&self, action: &usize) -> Result<()> {
        self.inner.fractions(&[*action]).map(|_| ())
    }

    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64> {
        self.inner.reset(rng)
    }

    fn step(&mut self, action: &usize, rng: &mut SimRng) -> Result<StepOutcome> {
        self.inner.advance(&[*action], rng)
    }
}

impl DiscreteEnv for SingleBoatEnv {
    fn action_count(&self) -> usize {
        self.inner.local_action_count()
    }
}

/// Every boat always takes local action `index`.
pub fn fixed_policy(n_boats: usize, index: usize) -> impl Fn(&[f64], &mut SimRng) -> Vec<usize> + Clone + Sync {
    move |_, _| vec![index; n_boats]
}

/// Every boat picks a uniformly random local action each season.
pub fn random_policy(n_boats: usize, actions: usize) -> impl Fn(&[f64], &mut SimRng) -> Vec<usize> + Clone + Sync {
    move |_, rng| (0..n_boats).map(|_| rng.random_range(0..actions)).collect()
}
