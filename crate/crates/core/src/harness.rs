//! Evaluation, Pareto fronts, policy slices and convergence tracking, with
//! CSV export for each.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crosswalk::{observe_exact, pedestrian_slices, CrosswalkParams, CrosswalkState, Pedestrian};
use crate::envcore::{argmax, try_rollout, ActionValues, EnvModel, Outcome};
use crate::error::{Error, Result};
use crate::fisheries::{fixed_policy, random_policy, FisheriesEnv, FisheriesParams};
use crate::fusion::{joint_argmax_sum, EntitySlice, FusedQ, FusionRule};
use crate::numerics::ParamNet;
use crate::qlearn::PerAgentValues;
use crate::rng::{stream, SimRng, EVALUATION_STREAM_BASE};

/// How many episodes to run and how to seed them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub n_sims: usize,
    /// Episode `i` draws from `stream(seeds[i % len], EVALUATION_STREAM_BASE + i)`.
    pub seeds: Vec<u64>,
    pub max_steps: usize,
    /// Wall-clock length of one decision, used for time-to-cross.
    pub seconds_per_step: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            n_sims: 100,
            seeds: vec![0],
            max_steps: 10_000,
            seconds_per_step: 1.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            return Err(Error::Contract("n_sims must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Contract("evaluation needs at least one seed".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Contract("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn episode_rng(&self, episode: usize) -> SimRng {
        stream(self.seeds[episode % self.seeds.len()], EVALUATION_STREAM_BASE + episode as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub undiscounted_return: f64,
    pub discounted_return: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_sims: usize,
    /// Mean undiscounted return.
    pub mean_return: f64,
    /// Standard error of `mean_return`.
    pub std_error: f64,
    pub mean_discounted_return: f64,
    pub crash_pct: f64,
    pub success_pct: f64,
    pub timeout_pct: f64,
    pub collapse_pct: f64,
    /// Seconds, averaged over successful episodes only.
    pub mean_time_to_cross: Option<f64>,
    pub mean_steps: f64,
    pub seeds: Vec<u64>,
}

impl EvalReport {
    pub fn from_episodes(episodes: &[EpisodeRecord], seconds_per_step: f64, seeds: Vec<u64>) -> Result<Self> {
        let n = episodes.len();
        if n == 0 {
            return Err(Error::Contract("no episodes to aggregate".into()));
        }
        let nf = n as f64;
        let mean = episodes.iter().map(|e| e.undiscounted_return).sum::<f64>() / nf;
        let std_error = if n > 1 {
            let var = episodes.iter().map(|e| (e.undiscounted_return - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        let pct = |o: Outcome| 100.0 * episodes.iter().filter(|e| e.outcome == o).count() as f64 / nf;
        let successes: Vec<_> = episodes.iter().filter(|e| e.outcome == Outcome::Success).collect();
        let mean_time_to_cross = (!successes.is_empty()).then(|| {
            successes.iter().map(|e| e.steps as f64 * seconds_per_step).sum::<f64>() / successes.len() as f64
        });
        Ok(Self {
            n_sims: n,
            mean_return: mean,
            std_error,
            mean_discounted_return: episodes.iter().map(|e| e.discounted_return).sum::<f64>() / nf,
            crash_pct: pct(Outcome::Collision),
            success_pct: pct(Outcome::Success),
            timeout_pct: pct(Outcome::Timeout),
            collapse_pct: pct(Outcome::Collapse),
            mean_time_to_cross,
            mean_steps: episodes.iter().map(|e| e.steps as f64).sum::<f64>() / nf,
            seeds,
        })
    }

    /// Objectives for Pareto comparison; `None` without any success.
    pub fn pareto_point(&self, policy: impl Into<String>) -> Option<ParetoPoint> {
        Some(ParetoPoint {
            policy: policy.into(),
            time_to_cross: self.mean_time_to_cross?,
            crash_rate: self.crash_pct,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub episodes: Vec<EpisodeRecord>,
}

/// Run `cfg.n_sims` seeded episodes in parallel with a frozen policy.
/// Results do not depend on thread scheduling.
pub fn evaluate<E, P>(env: &E, policy: P, cfg: &EvalConfig) -> Result<Evaluation>
where
    E: EnvModel + Clone + Sync,
    P: Fn(&[f64], &mut SimRng) -> Result<E::Action> + Sync,
{
    cfg.validate()?;
    let episodes = (0..cfg.n_sims)
        .into_par_iter()
        .map(|i| {
            let mut env = env.clone();
            let mut rng = cfg.episode_rng(i);
            let ep = try_rollout(&mut env, &policy, &mut rng, cfg.max_steps)?;
            Ok(EpisodeRecord {
                episode: i,
                seed: cfg.seeds[i % cfg.seeds.len()],
                outcome: ep.result.outcome,
                undiscounted_return: ep.result.undiscounted_return,
                discounted_return: ep.result.discounted_return,
                steps: ep.result.step_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EvalReport::from_episodes(&episodes, cfg.seconds_per_step, cfg.seeds.clone())?;
    Ok(Evaluation { report, episodes })
}

/// Greedy policy over any action-value function.
pub fn greedy<Q: ActionValues>(q: Q) -> impl Fn(&[f64], &mut SimRng) -> Result<usize> {
    move |s: &[f64], _: &mut SimRng| Ok(argmax(&q.action_values(s)?))
}

/// Joint greedy policy maximizing the sum of per-agent values.
pub fn joint_greedy<P: PerAgentValues>(p: P) -> impl Fn(&[f64], &mut SimRng) -> Result<Vec<usize>> {
    move |s: &[f64], _: &mut SimRng| {
        let per_agent = (0..p.agent_count())
            .map(|i| p.agent_values(i, s))
            .collect::<Result<Vec<_>>>()?;
        joint_argmax_sum(&per_agent)
    }
}

/// One policy's objectives: seconds to cross and crash percentage, both minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub policy: String,
    pub time_to_cross: f64,
    pub crash_rate: f64,
}

/// Strictly better in one objective and no worse in the other.
pub fn dominates(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    let no_worse = a.time_to_cross <= b.time_to_cross && a.crash_rate <= b.crash_rate;
    let better = a.time_to_cross < b.time_to_cross || a.crash_rate < b.crash_rate;
    no_worse && better
}

/// The nondominated points, sorted by time (ties keep input order).
pub fn pareto_front(points: &[ParetoPoint]) -> Result<Vec<ParetoPoint>> {
    if let Some(p) = points.iter().find(|p| !p.time_to_cross.is_finite() || !p.crash_rate.is_finite()) {
        return Err(Error::NonFinite(format!("objectives of policy {}", p.policy)));
    }
    let mut front: Vec<ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p)))
        .cloned()
        .collect();
    front.sort_by(|a, b| a.time_to_cross.total_cmp(&b.time_to_cross));
    Ok(front)
}

/// Grid for a policy slice: ego position against pedestrian position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SliceConfig {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_points: usize,
    pub y_points: usize,
    pub ego_speed: f64,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            x_range: (5.0, 37.0),
            y_range: (-5.0, 5.0),
            x_points: 65,
            y_points: 41,
            ego_speed: 6.0,
        }
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `actions[j][i]` is the greedy action at `(xs[i], ys[j])`.
    pub actions: Vec<Vec<usize>>,
    /// Acceleration of each action index.
    pub legend: Vec<f64>,
}

impl PolicyGrid {
    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn action_at(&self, i: usize, j: usize) -> usize {
        self.actions[j][i]
    }

    /// Long-format CSV: `ego_x,ped_y,action,acceleration`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            ego_x: f64,
            ped_y: f64,
            action: usize,
            acceleration: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (j, &y) in self.ys.iter().enumerate() {
            for (i, &x) in self.xs.iter().enumerate() {
                let a = self.actions[j][i];
                w.serialize(Row {
                    ego_x: x,
                    ped_y: y,
                    action: a,
                    acceleration: self.legend[a],
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Greedy actions with one standing pedestrian on the crosswalk in slot 0 of
/// `slots`, ego at a fixed speed, exact observations (occlusion still
/// applies) and the history filled with the current observation.
pub fn policy_slice<Q: ActionValues>(q: &Q, params: &CrosswalkParams, slots: usize, cfg: &SliceConfig) -> Result<PolicyGrid> {
    if cfg.x_points == 0 || cfg.y_points == 0 || slots == 0 {
        return Err(Error::Contract("slice grid and slot count must be nonempty".into()));
    }
    let xs = linspace(cfg.x_range, cfg.x_points);
    let ys = linspace(cfg.y_range, cfg.y_points);
    let actions = ys
        .iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| {
                    let mut pedestrians = vec![Pedestrian::ABSENT; slots];
                    pedestrians[0] = Pedestrian {
                        y,
                        speed: 0.0,
                        present: true,
                    };
                    let state = CrosswalkState {
                        ego_x: x,
                        ego_v: cfg.ego_speed,
                        pedestrians,
                        decisions: 0,
                    };
                    let obs = observe_exact(&state, params).repeat(params.history);
                    Ok(argmax(&q.action_values(&obs)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolicyGrid {
        xs,
        ys,
        actions,
        legend: params.accelerations.clone(),
    })
}

/// Training steps at which snapshots are evaluated: `budget - j*every` for
/// `j = 0..=budget/every`, ascending, so the final weights are always included.
pub fn snapshot_steps(budget: u64, every: u64) -> Result<Vec<u64>> {
    if every == 0 {
        return Err(Error::Contract("eval_every must be at least 1".into()));
    }
    let mut steps: Vec<u64> = (0..=budget / every).map(|j| budget - j * every).collect();
    steps.reverse();
    Ok(steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub step: u64,
    pub report: EvalReport,
}

/// Evaluate frozen snapshots while training. `train` receives the hook to
/// pass to a trainer; `eval` sees the weights at each snapshot step and must
/// use its own random streams, so the training trajectory is unchanged.
pub fn convergence_track<N: ?Sized, T>(
    budget: u64,
    every: u64,
    train: impl FnOnce(&mut dyn FnMut(u64, &N) -> Result<()>) -> Result<T>,
    mut eval: impl FnMut(&N) -> Result<EvalReport>,
) -> Result<(T, Vec<ConvergencePoint>)> {
    let wanted: BTreeSet<u64> = snapshot_steps(budget, every)?.into_iter().collect();
    let mut points = Vec::with_capacity(wanted.len());
    let out = train(&mut |step, net| {
        if wanted.contains(&step) {
            points.push(ConvergencePoint { step, report: eval(net)? });
        }
        Ok(())
    })?;
    if points.len() != wanted.len() {
        return Err(Error::State(format!(
            "trainer reported {} of {} snapshot steps",
            points.len(),
            wanted.len()
        )));
    }
    Ok((out, points))
}

#[derive(Serialize)]
struct ReportRow<'a> {
    label: &'a str,
    n_sims: usize,
    mean_return: f64,
    std_error: f64,
    mean_discounted_return: f64,
    crash_pct: f64,
    success_pct: f64,
    timeout_pct: f64,
    collapse_pct: f64,
    mean_time_to_cross: Option<f64>,
    mean_steps: f64,
    seeds: String,
}

impl<'a> ReportRow<'a> {
    fn new(label: &'a str, r: &EvalReport) -> Self {
        Self {
            label,
            n_sims: r.n_sims,
            mean_return: r.mean_return,
            std_error: r.std_error,
            mean_discounted_return: r.mean_discounted_return,
            crash_pct: r.crash_pct,
            success_pct: r.success_pct,
            timeout_pct: r.timeout_pct,
            collapse_pct: r.collapse_pct,
            mean_time_to_cross: r.mean_time_to_cross,
            mean_steps: r.mean_steps,
            seeds: r.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
        }
    }
}

/// One row per labelled report.
pub fn write_reports_csv<W: Write>(rows: &[(String, EvalReport)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (label, r) in rows {
        w.serialize(ReportRow::new(label, r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_episodes_csv<W: Write>(episodes: &[EpisodeRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in episodes {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pareto_csv<W: Write>(points: &[ParetoPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv<W: Write>(points: &[ConvergencePoint], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        step: u64,
        #[serde(flatten)]
        report: ReportRow<'a>,
    }
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(Row {
            step: p.step,
            report: ReportRow::new("", &p.report),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed and random fisheries policies: random, then one fixed policy per
/// local action.
pub fn fisheries_baselines(params: &FisheriesParams, cfg: &EvalConfig) -> Result<Vec<(String, EvalReport)>> {
    let env = FisheriesEnv::new(params.clone())?;
    let n = params.n_boats;
    let k = params.local_actions.len();
    let random = random_policy(n, k);
    let mut rows = vec![(
        "random".to_string(),
        evaluate(&env, |s: &[f64], r: &mut SimRng| Ok(random(s, r)), cfg)?.report,
    )];
    for (idx, a) in params.local_actions.iter().enumerate() {
        let fixed = fixed_policy(n, idx);
        let report = evaluate(&env, |s: &[f64], r: &mut SimRng| Ok(fixed(s, r)), cfg)?.report;
        rows.push((format!("fixed-{a}"), report));
    }
    Ok(rows)
}

/// Every boat scored by the shared single-boat network on its own region.
pub fn fisheries_fusion(params: &FisheriesParams, net: Arc<ParamNet<f64>>, rule: FusionRule) -> Result<FusedQ> {
    let slices = (0..params.n_boats).map(|i| EntitySlice::new(vec![i])).collect();
    FusedQ::shared(params.n_boats, net, slices, rule)
}

/// Every pedestrian scored by the shared single-pedestrian network.
pub fn crosswalk_fusion(params: &CrosswalkParams, net: Arc<ParamNet<f64>>, rule: FusionRule) -> Result<FusedQ> {
    let dim = params.history * (2 + 2 * params.max_pedestrians);
    FusedQ::shared(dim, net, pedestrian_slices(params), rule)
}
