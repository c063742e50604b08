//! Occluded crosswalk.
//!
//! Frame: the ego lane runs along `x` with centerline `y = 0`; pedestrians
//! walk along the crosswalk line `x = crosswalk_x` in `+y`, appearing at
//! `ped_y_start` and leaving past `ped_y_end`. An axis-aligned obstacle hides
//! pedestrians whose line of sight to the ego sensor (at `(ego_x, 0)`)
//! crosses it. Hidden or absent pedestrians are observed as the constant
//! `absent_value` in both of their slots.
//!
//! The agent chooses an acceleration every `decision_period`; the physics
//! advance in `sim_step` increments, with collisions and the goal checked at
//! every increment. Rewards: collision -1, goal +1, timeout 0, otherwise 0.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::envcore::{DiscreteEnv, EnvModel, Outcome, StepOutcome};
use crate::error::{Error, Result};
use crate::fusion::EntitySlice;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Training,
    Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeParams {
    pub sim_step: f64,
    /// Pedestrian speed = desired speed + a uniform draw from this set.
    pub speed_noise: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    /// Whether the segment `a -> b` touches the rectangle (Liang-Barsky).
    pub fn intersects_segment(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in [
            (-dx, a.0 - self.x_min),
            (dx, self.x_max - a.0),
            (-dy, a.1 - self.y_min),
            (dy, self.y_max - a.1),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let t = q / p;
                if p < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrosswalkParams {
    /// Acceleration per action index, m/s^2.
    pub accelerations: Vec<f64>,
    pub decision_period: f64,
    pub training: ModeParams,
    pub evaluation: ModeParams,
    pub position_noise: f64,
    pub velocity_noise: f64,
    pub desired_speed: f64,
    pub appearance_probability: f64,
    pub max_pedestrians: usize,
    pub timeout: f64,
    pub discount: f64,
    pub crosswalk_x: f64,
    pub crosswalk_half_width: f64,
    pub ped_y_start: f64,
    pub ped_y_end: f64,
    pub ego_start_x: f64,
    pub ego_initial_speed: (f64, f64),
    pub goal_x: f64,
    pub obstacle: Rect,
    pub ego_half_length: f64,
    pub ego_half_width: f64,
    pub absent_value: f64,
    /// Chance that each slot starts occupied.
    pub initial_presence: f64,
    /// Observations stacked into one state.
    pub history: usize,
}

impl Default for CrosswalkParams {
    fn default() -> Self {
        Self {
            accelerations: vec![-4.0, -2.0, 0.0, 2.0],
            decision_period: 0.5,
            training: ModeParams {
                sim_step: 0.5,
                speed_noise: vec![-1.0, 0.0, 1.0],
            },
            evaluation: ModeParams {
                sim_step: 0.1,
                speed_noise: vec![-0.5, 0.0, 0.5],
            },
            position_noise: 0.5,
            velocity_noise: 0.5,
            desired_speed: 1.0,
            appearance_probability: 0.3,
            max_pedestrians: 10,
            timeout: 20.0,
            discount: 0.99,
            crosswalk_x: 25.0,
            crosswalk_half_width: 3.0,
            ped_y_start: -5.0,
            ped_y_end: 5.0,
            ego_start_x: 5.0,
            ego_initial_speed: (6.0, 8.0),
            goal_x: 34.0,
            obstacle: Rect {
                x_min: 12.0,
                x_max: 22.0,
                y_min: -6.0,
                y_max: -2.0,
            },
            ego_half_length: 2.5,
            ego_half_width: 1.0,
            absent_value: -10.0,
            initial_presence: 0.5,
            history: 4,
        }
    }
}

impl CrosswalkParams {
    pub fn mode(&self, mode: Mode) -> &ModeParams {
        match mode {
            Mode::Training => &self.training,
            Mode::Evaluation => &self.evaluation,
        }
    }

    /// Sub-steps per decision in `mode`.
    pub fn substeps(&self, mode: Mode) -> usize {
        (self.decision_period / self.mode(mode).sim_step).round() as usize
    }

    /// Decisions before the timeout.
    pub fn max_decisions(&self) -> usize {
        (self.timeout / self.decision_period).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        if self.accelerations.is_empty() {
            return bad("empty acceleration set".into());
        }
        for mode in [Mode::Training, Mode::Evaluation] {
            let m = self.mode(mode);
            if !(m.sim_step > 0.0) || m.speed_noise.is_empty() {
                return bad(format!("{mode:?}: sim_step must be positive and speed noise nonempty"));
            }
            let ratio = self.decision_period / m.sim_step;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                return bad(format!(
                    "{mode:?}: sim step {} does not divide the decision period {}",
                    m.sim_step, self.decision_period
                ));
            }
        }
        if self.position_noise < 0.0 || self.velocity_noise < 0.0 {
            return bad("sensor noise must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.appearance_probability) || !(0.0..=1.0).contains(&self.initial_presence) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        if self.max_pedestrians == 0 || self.history == 0 {
            return bad("max_pedestrians and history must be positive".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) || !(self.timeout > 0.0) {
            return bad("discount must lie in (0, 1] and timeout be positive".into());
        }
        if self.ego_initial_speed.0 > self.ego_initial_speed.1 || self.ego_initial_speed.0 < 0.0 {
            return bad("initial speed range must be an ordered nonnegative interval".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    /// Position along the crosswalk, m.
    pub y: f64,
    /// Speed along the crosswalk, m/s.
    pub speed: f64,
    pub present: bool,
}

impl Pedestrian {
    pub const ABSENT: Pedestrian = Pedestrian {
        y: 0.0,
        speed: 0.0,
        present: false,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosswalkState {
    pub ego_x: f64,
    pub ego_v: f64,
    pub pedestrians: Vec<Pedestrian>,
    /// Elapsed decisions.
    pub decisions: u32,
}

fn speed_sample(params: &CrosswalkParams, mode: Mode, rng: &mut SimRng) -> f64 {
    let noise = &params.mode(mode).speed_noise;
    params.desired_speed + noise[rng.random_range(0..noise.len())]
}

impl CrosswalkState {
    /// Ego at the start line with a uniform initial speed; each slot
    /// occupied with probability `initial_presence` at a uniform position.
    pub fn sample_initial(params: &CrosswalkParams, slots: usize, mode: Mode, rng: &mut SimRng) -> Self {
        let (lo, hi) = params.ego_initial_speed;
        let ego_v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let pedestrians = (0..slots)
            .map(|_| {
                if rng.random::<f64>() < params.initial_presence {
                    Pedestrian {
                        y: rng.random_range(params.ped_y_start..=params.ped_y_end),
                        speed: speed_sample(params, mode, rng),
                        present: true,
                    }
                } else {
                    Pedestrian::ABSENT
                }
            })
            .collect();
        Self {
            ego_x: params.ego_start_x,
            ego_v,
            pedestrians,
            decisions: 0,
        }
    }

    pub fn time(&self, params: &CrosswalkParams) -> f64 {
        f64::from(self.decisions) * params.decision_period
    }

    pub fn collides(&self, params: &CrosswalkParams) -> bool {
        (params.crosswalk_x - self.ego_x).abs() <= params.ego_half_length
            && self
                .pedestrians
                .iter()
                .any(|p| p.present && p.y.abs() <= params.ego_half_width)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosswalkStep {
    pub next: CrosswalkState,
    pub reward: f64,
    pub terminal: bool,
    pub outcome: Outcome,
}

fn advance_ego(x: &mut f64, v: &mut f64, accel: f64, dt: f64) {
    if *v + accel * dt < 0.0 {
        let stop = *v / -accel;
        *x += *v * stop + 0.5 * accel * stop * stop;
        *v = 0.0;
    } else {
        *x += *v * dt + 0.5 * accel * dt * dt;
        *v += accel * dt;
    }
}

/// Advance one decision period under acceleration index `action`.
pub fn step(state: &CrosswalkState, action: usize, params: &CrosswalkParams, rng: &mut SimRng, mode: Mode) -> Result<CrosswalkStep> {
    let accel = *params
        .accelerations
        .get(action)
        .ok_or_else(|| Error::Contract(format!("action {action} out of range 0..{}", params.accelerations.len())))?;
    let dt = params.mode(mode).sim_step;
    let mut next = state.clone();
    let terminal = |next: CrosswalkState, reward: f64, outcome: Outcome| {
        Ok(CrosswalkStep {
            next,
            reward,
            terminal: true,
            outcome,
        })
    };
    for _ in 0..params.substeps(mode) {
        advance_ego(&mut next.ego_x, &mut next.ego_v, accel, dt);
        for p in next.pedestrians.iter_mut().filter(|p| p.present) {
            p.y += p.speed * dt;
            if p.y > params.ped_y_end {
                *p = Pedestrian::ABSENT;
            }
        }
        if next.collides(params) {
            next.decisions += 1;
            return terminal(next, -1.0, Outcome::Collision);
        }
        if next.ego_x >= params.goal_x {
            next.decisions += 1;
            return terminal(next, 1.0, Outcome::Success);
        }
    }
    next.decisions += 1;
    if next.time(params) >= params.timeout - 1e-9 {
        return terminal(next, 0.0, Outcome::Timeout);
    }
    for p in next.pedestrians.iter_mut() {
        if p.present {
            p.speed = speed_sample(params, mode, rng);
        } else if rng.random::<f64>() < params.appearance_probability {
            *p = Pedestrian {
                y: params.ped_y_start,
                speed: speed_sample(params, mode, rng),
                present: true,
            };
        }
    }
    Ok(CrosswalkStep {
        next,
        reward: 0.0,
        terminal: false,
        outcome: Outcome::Ongoing,
    })
}

/// Whether the ego sensor at `(ego_x, 0)` sees the point `(crosswalk_x, ped_y)`.
pub fn visible(ego_x: f64, ped_y: f64, params: &CrosswalkParams) -> bool {
    !params
        .obstacle
        .intersects_segment((ego_x, 0.0), (params.crosswalk_x, ped_y))
}

fn noisy(value: f64, sigma: f64, rng: &mut SimRng) -> f64 {
    if sigma > 0.0 {
        value + Normal::new(0.0, sigma).expect("valid sigma").sample(rng)
    } else {
        value
    }
}

/// Noisy observation `[ego_x, ego_v, (y_i, speed_i)...]`, one pair per slot
/// in slot order.
pub fn observe(state: &CrosswalkState, params: &CrosswalkParams, rng: &mut SimRng) -> Vec<f64> {
    let mut obs = Vec::with_capacity(2 + 2 * state.pedestrians.len());
    obs.push(noisy(state.ego_x, params.position_noise, rng));
    obs.push(noisy(state.ego_v, params.velocity_noise, rng));
    for p in &state.pedestrians {
        if p.present && visible(state.ego_x, p.y, params) {
            obs.push(noisy(p.y, params.position_noise, rng));
            obs.push(noisy(p.speed, params.velocity_noise, rng));
        } else {
            obs.push(params.absent_value);
            obs.push(params.absent_value);
        }
    }
    obs
}

/// [`observe`] without sensor noise.
pub fn observe_exact(state: &CrosswalkState, params: &CrosswalkParams) -> Vec<f64> {
    let exact = CrosswalkParams {
        position_noise: 0.0,
        velocity_noise: 0.0,
        ..params.clone()
    };
    // no draws happen at zero noise
    observe(state, &exact, &mut crate::rng::stream(0, 0))
}

/// Concatenate observations, oldest first.
pub fn stack(frames: &[Vec<f64>]) -> Vec<f64> {
    frames.concat()
}

/// The last `k` observations; reset fills it with copies of the first.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    k: usize,
    frames: VecDeque<Vec<f64>>,
}

impl History {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            frames: VecDeque::with_capacity(k),
        }
    }

    pub fn reset(&mut self, first: Vec<f64>) {
        self.frames.clear();
        for _ in 1..self.k {
            self.frames.push_back(first.clone());
        }
        self.frames.push_back(first);
    }

    pub fn push(&mut self, obs: Vec<f64>) {
        if self.frames.len() == self.k {
            self.frames.pop_front();
        }
        self.frames.push_back(obs);
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.frames.iter().flatten().copied().collect()
    }
}

/// Slices mapping the stacked global observation to each pedestrian's
/// stacked single-pedestrian observation `(ego_x, ego_v, y_i, speed_i)` per frame.
pub fn pedestrian_slices(params: &CrosswalkParams) -> Vec<EntitySlice> {
    let frame = 2 + 2 * params.max_pedestrians;
    (0..params.max_pedestrians)
        .map(|i| {
            EntitySlice::new(
                (0..params.history)
                    .flat_map(|f| {
                        let base = f * frame;
                        [base, base + 1, base + 2 + 2 * i, base + 3 + 2 * i]
                    })
                    .collect(),
            )
        })
        .collect()
}

/// The crosswalk as a learning environment over stacked observations.
#[derive(Debug, Clone)]
pub struct CrosswalkEnv {
    params: CrosswalkParams,
    mode: Mode,
    slots: usize,
    state: CrosswalkState,
    history: History,
}

impl CrosswalkEnv {
    /// All `max_pedestrians` slots.
    pub fn new(params: CrosswalkParams, mode: Mode) -> Result<Self> {
        let slots = params.max_pedestrians;
        Self::with_slots(params, mode, slots)
    }

    pub fn with_slots(params: CrosswalkParams, mode: Mode, slots: usize) -> Result<Self> {
        params.validate()?;
        if slots == 0 {
            return Err(Error::Contract("at least one pedestrian slot".into()));
        }
        let history = History::new(params.history);
        Ok(Self {
            state: CrosswalkState {
                ego_x: params.ego_start_x,
                ego_v: params.ego_initial_speed.0,
                pedestrians: vec![Pedestrian::ABSENT; slots],
                decisions: 0,
            },
            params,
            mode,
            slots,
            history,
        })
    }

    pub fn params(&self) -> &CrosswalkParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn state(&self) -> &CrosswalkState {
        &self.state
    }

    pub fn frame_dim(&self) -> usize {
        2 + 2 * self.slots
    }

    /// Start from a given state, history filled with its observation.
    pub fn reset_to(&mut self, state: CrosswalkState, rng: &mut SimRng) -> Result<Vec<f64>> {
        if state.pedestrians.len() != self.slots {
            return Err(Error::Shape {
                what: "pedestrian slots",
                expected: self.slots,
                got: state.pedestrians.len(),
            });
        }
        self.state = state;
        self.history.reset(observe(&self.state, &self.params, rng));
        Ok(self.history.stacked())
    }
}

/// The single-pedestrian subproblem: same dynamics, one slot.
pub fn single_pedestrian_env(params: CrosswalkParams, mode: Mode) -> Result<CrosswalkEnv> {
    CrosswalkEnv::with_slots(params, mode, 1)
}

impl EnvModel for CrosswalkEnv {
    type Action = usize;

    fn observation_dim(&self) -> usize {
        self.params.history * self.frame_dim()
    }

    fn discount(&self) -> f64 {
        self.params.discount
    }

    fn check_action(&self, action: &usize) -> Result<()> {
        if *action < self.params.accelerations.len() {
            Ok(())
        } else {
            Err(Error::Contract(format!("action {action} out of range")))
        }
    }

    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64> {
        self.state = CrosswalkState::sample_initial(&self.params, self.slots, self.mode, rng);
        self.history.reset(observe(&self.state, &self.params, rng));
        self.history.stacked()
    }

    fn step(&mut self, action: &usize, rng: &mut SimRng) -> Result<StepOutcome> {
        let out = step(&self.state, *action, &self.params, rng, self.mode)?;
        self.state = out.next;
        self.history.push(observe(&self.state, &self.params, rng));
        Ok(StepOutcome {
            observation: self.history.stacked(),
            reward: out.reward,
            terminal: out.terminal,
            outcome: out.outcome,
        })
    }
}

impl DiscreteEnv for CrosswalkEnv {
    fn action_count(&self) -> usize {
        self.params.accelerations.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envcore::rollout;
    use crate::rng::stream;

    fn empty_state(x: f64, v: f64, slots: usize) -> CrosswalkState {
        CrosswalkState {
            ego_x: x,
            ego_v: v,
            pedestrians: vec![Pedestrian::ABSENT; slots],
            decisions: 0,
        }
    }

    fn quiet() -> CrosswalkParams {
        CrosswalkParams {
            appearance_probability: 0.0,
            initial_presence: 0.0,
            ..CrosswalkParams::default()
        }
    }

    #[test]
    fn braking_at_standstill_stays_put() {
        let p = quiet();
        for mode in [Mode::Training, Mode::Evaluation] {
            let out = step(&empty_state(7.0, 0.0, 1), 0, &p, &mut stream(0, 0), mode).unwrap();
            assert_eq!(out.next.ego_v, 0.0);
            assert_eq!(out.next.ego_x, 7.0);
        }
    }

    #[test]
    fn braking_saturates_mid_step() {
        let p = quiet();
        // 1 m/s under -4 m/s^2 stops after 0.25 s having covered 0.125 m
        let out = step(&empty_state(7.0, 1.0, 1), 0, &p, &mut stream(0, 0), Mode::Training).unwrap();
        assert_eq!(out.next.ego_v, 0.0);
        assert!((out.next.ego_x - 7.125).abs() < 1e-12);
    }

    #[test]
    fn constant_speed_kinematics() {
        let p = quiet();
        let out = step(&empty_state(5.0, 6.0, 1), 2, &p, &mut stream(0, 0), Mode::Training).unwrap();
        assert_eq!(out.next.ego_x, 8.0);
        assert_eq!(out.next.ego_v, 6.0);
        let eval = step(&empty_state(5.0, 6.0, 1), 2, &p, &mut stream(0, 0), Mode::Evaluation).unwrap();
        assert!((eval.next.ego_x - 8.0).abs() < 1e-12);
    }

    #[test]
    fn empty_road_reaches_goal() {
        let p = quiet();
        let mut env = CrosswalkEnv::new(p.clone(), Mode::Training).unwrap();
        let mut rng = stream(3, 0);
        env.reset(&mut rng);
        let mut state = empty_state(p.ego_start_x, 8.0, 10);
        env.reset_to(state.clone(), &mut rng).unwrap();
        let mut steps = 0;
        loop {
            let out = env.step(&2, &mut rng).unwrap();
            steps += 1;
            if out.terminal {
                assert_eq!(out.reward, 1.0);
                assert_eq!(out.outcome, Outcome::Success);
                break;
            }
        }
        state = env.state().clone();
        // 29 m at 8 m/s = 3.625 s, rounded up to the decision grid
        assert_eq!(steps, 8);
        assert_eq!(state.time(&p), 4.0);
    }

    #[test]
    fn standing_still_times_out() {
        let p = quiet();
        let mut state = empty_state(5.0, 0.0, 1);
        let mut rng = stream(1, 0);
        let mut n = 0;
        loop {
            let out = step(&state, 2, &p, &mut rng, Mode::Training).unwrap();
            n += 1;
            if out.terminal {
                assert_eq!(out.outcome, Outcome::Timeout);
                assert_eq!(out.reward, 0.0);
                break;
            }
            state = out.next;
        }
        assert_eq!(n, p.max_decisions());
        assert_eq!(n, 40);
    }

    #[test]
    fn collision_in_the_crosswalk() {
        let p = quiet();
        let mut state = empty_state(22.0, 2.0, 1);
        state.pedestrians[0] = Pedestrian {
            y: 0.0,
            speed: 0.0,
            present: true,
        };
        let out = step(&state, 2, &p, &mut stream(0, 0), Mode::Evaluation).unwrap();
        assert!(out.terminal);
        assert_eq!(out.outcome, Outcome::Collision);
        assert_eq!(out.reward, -1.0);
    }

    #[test]
    fn invalid_action() {
        let p = quiet();
        assert!(matches!(
            step(&empty_state(5.0, 6.0, 1), 4, &p, &mut stream(0, 0), Mode::Training),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn absent_and_occluded_slots_read_absent() {
        let p = CrosswalkParams::default();
        let mut state = empty_state(5.0, 6.0, 3);
        state.pedestrians[1] = Pedestrian {
            y: -5.0,
            speed: 1.0,
            present: true,
        };
        state.pedestrians[2] = Pedestrian {
            y: 2.0,
            speed: 1.0,
            present: true,
        };
        assert!(!visible(5.0, -5.0, &p));
        assert!(visible(5.0, 2.0, &p));
        let obs = observe(&state, &p, &mut stream(0, 0));
        assert_eq!(obs.len(), 8);
        assert_eq!(&obs[2..4], &[-10.0, -10.0]);
        assert_eq!(&obs[4..6], &[-10.0, -10.0]);
        assert_ne!(obs[6], -10.0);
        let exact = observe_exact(&state, &p);
        assert_eq!(exact, vec![5.0, 6.0, -10.0, -10.0, -10.0, -10.0, 2.0, 1.0]);
    }

    #[test]
    fn spawn_region_hidden_until_close() {
        let p = CrosswalkParams::default();
        assert!(!visible(18.0, -5.0, &p));
        assert!(visible(21.0, -5.0, &p));
        assert!(visible(30.0, -5.0, &p));
    }

    #[test]
    fn stacking_pads_with_the_first_observation() {
        let mut h = History::new(4);
        let o = vec![1.0, 2.0];
        h.reset(o.clone());
        assert_eq!(h.stacked(), o.repeat(4));
        h.push(vec![3.0, 4.0]);
        assert_eq!(h.stacked(), vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(stack(&[vec![1.0], vec![2.0]]), vec![1.0, 2.0]);
    }

    #[test]
    fn dimensions() {
        let p = CrosswalkParams::default();
        let global = CrosswalkEnv::new(p.clone(), Mode::Training).unwrap();
        assert_eq!(global.frame_dim(), 22);
        assert_eq!(global.observation_dim(), 88);
        let single = single_pedestrian_env(p.clone(), Mode::Training).unwrap();
        assert_eq!(single.frame_dim(), 4);
        assert_eq!(single.observation_dim(), 16);
        assert_eq!(single.action_count(), 4);
        let slices = pedestrian_slices(&p);
        assert_eq!(slices.len(), 10);
        assert_eq!(slices[3].indices[..4], [0, 1, 8, 9]);
        assert_eq!(slices[3].indices[4..8], [22, 23, 30, 31]);
    }

    #[test]
    fn slices_reproduce_single_pedestrian_observation() {
        let p = CrosswalkParams {
            position_noise: 0.0,
            velocity_noise: 0.0,
            ..CrosswalkParams::default()
        };
        let mut state = empty_state(15.0, 5.0, 10);
        state.pedestrians[4] = Pedestrian {
            y: 1.5,
            speed: 1.0,
            present: true,
        };
        let mut global = CrosswalkEnv::new(p.clone(), Mode::Training).unwrap();
        let obs = global.reset_to(state.clone(), &mut stream(0, 0)).unwrap();
        let mut one = empty_state(15.0, 5.0, 1);
        one.pedestrians[0] = state.pedestrians[4];
        let mut single = single_pedestrian_env(p.clone(), Mode::Training).unwrap();
        let expected = single.reset_to(one, &mut stream(0, 0)).unwrap();
        assert_eq!(pedestrian_slices(&p)[4].apply(&obs).unwrap(), expected);
    }

    #[test]
    fn episodes_are_bounded_and_rewards_terminal_only() {
        let p = CrosswalkParams::default();
        let mut env = CrosswalkEnv::new(p, Mode::Training).unwrap();
        for seed in 0..50 {
            let mut rng = stream(seed, 0);
            let ep = rollout(&mut env, |_, r: &mut SimRng| r.random_range(0..4), &mut rng, 1000).unwrap();
            assert!(ep.result.step_count <= 40);
            for e in &ep.trace {
                assert!([-1.0, 0.0, 1.0].contains(&e.reward));
                if !e.terminal {
                    assert_eq!(e.reward, 0.0);
                }
            }
        }
    }

    #[test]
    fn modes_agree_when_matched() {
        let mut p = CrosswalkParams::default();
        p.evaluation = p.training.clone();
        for seed in 0..20 {
            let mut a = CrosswalkEnv::new(p.clone(), Mode::Training).unwrap();
            let mut b = CrosswalkEnv::new(p.clone(), Mode::Evaluation).unwrap();
            let policy = |o: &[f64], _: &mut SimRng| if o[1] > 7.0 { 1 } else { 3 };
            let ea = rollout(&mut a, policy, &mut stream(seed, 0), 100).unwrap();
            let eb = rollout(&mut b, policy, &mut stream(seed, 0), 100).unwrap();
            assert_eq!(ea, eb);
        }
    }

    #[test]
    fn validation() {
        let mut p = CrosswalkParams::default();
        p.evaluation.sim_step = 0.3;
        assert!(p.validate().is_err());
        let mut p = CrosswalkParams::default();
        p.position_noise = -1.0;
        assert!(p.validate().is_err());
        assert!(CrosswalkParams::default().validate().is_ok());
    }

    proptest::proptest! {
        #[test]
        fn shrinking_the_obstacle_never_hides(
            ego_x in 0.0f64..40.0, ped_y in -5.0f64..5.0,
            shrink in proptest::collection::vec(0.0f64..1.0, 4)
        ) {
            let big = CrosswalkParams::default();
            let o = big.obstacle;
            let small_rect = Rect {
                x_min: o.x_min + shrink[0] * 4.0,
                x_max: o.x_max - shrink[1] * 4.0,
                y_min: o.y_min + shrink[2] * 1.5,
                y_max: o.y_max - shrink[3] * 1.5,
            };
            let small = CrosswalkParams { obstacle: small_rect, ..big.clone() };
            if visible(ego_x, ped_y, &big) {
                proptest::prop_assert!(visible(ego_x, ped_y, &small));
            }
        }
    }
}
