//! The `train`, `evaluate`, `slice` and `sweep` commands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use deepcorr::corrections::{train_correction, train_decomposed_correction, DecomposedCorrection};
use deepcorr::crosswalk::{single_pedestrian_env, CrosswalkEnv, Mode};
use deepcorr::envcore::{ActionValues, DiscreteEnv, EnvModel};
use deepcorr::fisheries::{fixed_policy, random_policy, single_boat_env, FisheriesEnv};
use deepcorr::fusion::{FusedQ, FusionRule};
use deepcorr::harness::{
    self, crosswalk_fusion, evaluate, fisheries_fusion, greedy, joint_greedy, pareto_front, policy_slice, EvalConfig,
    EvalReport, Evaluation, PolicyGrid,
};
use deepcorr::numerics::NetFile;
use deepcorr::qlearn::{train, train_decomposed, write_log_csv, DqnConfig, PerAgentValues, TrainOutput, TrainRecord};
use deepcorr::rng::SimRng;
use deepcorr::Net;
use rand::Rng;
use serde::Serialize;

use crate::checkpoint::{Checkpoint, CheckpointRef};
use crate::config::{sha256_hex, Environment, ExperimentConfig, Method, Schedule, Scope};
use crate::error::{CliError, Result};

/// Environment variable naming the directory relative output paths resolve against.
pub const OUTPUT_ROOT_ENV: &str = "DEEPCORR_OUTPUT_ROOT";

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const Q_LO_FILE: &str = "q_lo.json";

/// A loaded configuration and where its outputs go.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Directory relative `q_lo_checkpoint` paths resolve against.
    pub config_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Run {
    pub fn new(config: ExperimentConfig, config_dir: &Path, output_root: &Path) -> Self {
        let out_dir = if config.output_dir.is_absolute() {
            config.output_dir.clone()
        } else {
            output_root.join(&config.output_dir)
        };
        Self {
            config_hash: config.hash(),
            config,
            config_dir: config_dir.to_path_buf(),
            out_dir,
        }
    }

    pub fn load(config_path: &Path, output_root: &Path) -> Result<Self> {
        let config = ExperimentConfig::load(config_path)?;
        let dir = config_path.parent().unwrap_or(Path::new("."));
        Ok(Self::new(config, dir, output_root))
    }

    /// Write `bytes` under the output directory, returning its record.
    fn write(&self, name: &str, bytes: &[u8]) -> Result<FileRecord> {
        std::fs::create_dir_all(&self.out_dir).map_err(CliError::io(&self.out_dir))?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        Ok(FileRecord {
            name: name.into(),
            sha256: sha256_hex(bytes),
        })
    }

    /// Write a CSV with a leading `config_hash` column.
    fn write_csv(&self, name: &str, csv_bytes: Vec<u8>) -> Result<FileRecord> {
        let bytes = with_hash_column(&csv_bytes, &self.config_hash)?;
        self.write(name, &bytes)
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.out_dir.join(CHECKPOINT_FILE)
    }
}

fn with_hash_column(csv_bytes: &[u8], hash: &str) -> Result<Vec<u8>> {
    let mut reader = csv::Reader::from_reader(csv_bytes);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Core(e.into());
    let headers = reader.headers().map_err(csv_err)?.clone();
    writer
        .write_record(std::iter::once("config_hash").chain(headers.iter()))
        .map_err(csv_err)?;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        writer.write_record(std::iter::once(hash).chain(record.iter())).map_err(csv_err)?;
    }
    writer.into_inner().map_err(|e| CliError::Core(deepcorr::Error::Io(e.into_error())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: &'a str,
    environment: Environment,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<Budget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checkpoint: Option<CheckpointRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checkpoint_config_hash: Option<String>,
    references: Vec<CheckpointRef>,
    files: Vec<FileRecord>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Budget {
    single_agent_steps: u64,
    correction_steps: u64,
    total_steps: u64,
}

fn write_manifest(run: &Run, name: &str, manifest: &Manifest<'_>) -> Result<FileRecord> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    run.write(name, &bytes)
}

fn log_bytes(log: &[TrainRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_log_csv(log, &mut buf)?;
    Ok(buf)
}

/// Train one network on the configured scope.
fn train_scoped(config: &ExperimentConfig, scope: Scope, dqn: &DqnConfig) -> Result<TrainOutput> {
    Ok(match (config.environment, scope) {
        (Environment::Fisheries, Scope::Single) => train(&mut single_boat_env(config.fisheries_params())?, dqn)?,
        (Environment::Fisheries, Scope::Global) => {
            return Err(CliError::Invalid("fisheries global training uses decomposed-dqn".into()))
        }
        (Environment::Crosswalk, Scope::Single) => train(
            &mut single_pedestrian_env(config.crosswalk_params().clone(), Mode::Training)?,
            dqn,
        )?,
        (Environment::Crosswalk, Scope::Global) => {
            train(&mut CrosswalkEnv::new(config.crosswalk_params().clone(), Mode::Training)?, dqn)?
        }
    })
}

/// The frozen single-scope network for fusion and correction runs: loaded
/// from `q_lo_checkpoint` or trained with `single_agent_budget`.
struct QLo {
    net: Net,
    reference: CheckpointRef,
    steps: u64,
    files: Vec<FileRecord>,
}

fn obtain_q_lo(run: &Run) -> Result<QLo> {
    let cfg = &run.config;
    if let Some(p) = &cfg.q_lo_checkpoint {
        let path = if p.is_relative() { run.config_dir.join(p) } else { p.clone() };
        let (ckpt, hash) = Checkpoint::load(&path)?;
        if ckpt.method != Method::Dqn || ckpt.scope != Scope::Single || ckpt.environment != cfg.environment {
            return Err(CliError::Checkpoint {
                path,
                message: format!("q_lo must be a single-scope dqn checkpoint for {:?}", cfg.environment),
            });
        }
        let net = single_net(&ckpt, &path)?;
        let path = std::path::absolute(&path).map_err(CliError::io(&path))?;
        return Ok(QLo {
            net,
            reference: CheckpointRef { path, sha256: hash },
            steps: 0,
            files: Vec::new(),
        });
    }
    let budget = cfg.single_agent_budget.expect("validated");
    let dqn = DqnConfig {
        total_train_steps: budget,
        ..cfg.dqn.clone()
    };
    let out = train_scoped(cfg, Scope::Single, &dqn)?;
    let mut ckpt = Checkpoint::new(&run.config_hash, cfg.environment, Scope::Single, Method::Dqn);
    ckpt.env_steps = out.env_steps;
    ckpt.nets.push(NetFile::from_net(&out.net));
    let bytes = ckpt.to_bytes();
    let files = vec![
        run.write(Q_LO_FILE, &bytes)?,
        run.write_csv("q_lo_log.csv", log_bytes(&out.log)?)?,
    ];
    Ok(QLo {
        net: out.net,
        reference: CheckpointRef {
            path: PathBuf::from(Q_LO_FILE),
            sha256: sha256_hex(&bytes),
        },
        steps: out.env_steps,
        files,
    })
}

fn single_net(ckpt: &Checkpoint, path: &Path) -> Result<Net> {
    let mut nets = ckpt.networks()?;
    if nets.len() != 1 {
        return Err(CliError::Checkpoint {
            path: path.to_path_buf(),
            message: format!("expected one network, found {}", nets.len()),
        });
    }
    Ok(nets.remove(0))
}

fn fuse(config: &ExperimentConfig, net: Net, rule: FusionRule) -> Result<FusedQ> {
    let net = Arc::new(net);
    Ok(match config.environment {
        Environment::Fisheries => fisheries_fusion(config.fisheries_params(), net, rule)?,
        Environment::Crosswalk => crosswalk_fusion(config.crosswalk_params(), net, rule)?,
    })
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub env_steps: u64,
    pub files: Vec<FileRecord>,
}

pub fn cmd_train(run: &Run) -> Result<TrainSummary> {
    let cfg = &run.config;
    if cfg.method.is_baseline() {
        return Err(CliError::Invalid(format!("{} has nothing to train", cfg.method.as_str())));
    }
    let mut ckpt = Checkpoint::new(&run.config_hash, cfg.environment, cfg.scope, cfg.method);
    ckpt.fusion_rule = cfg.fusion_rule;
    let mut files = Vec::new();
    let mut references = Vec::new();
    let mut budget = None;
    let log = match cfg.method {
        Method::Dqn => {
            let out = train_scoped(cfg, cfg.scope, &cfg.dqn)?;
            ckpt.env_steps = out.env_steps;
            ckpt.nets.push(NetFile::from_net(&out.net));
            out.log
        }
        Method::DecomposedDqn => {
            let mut env = FisheriesEnv::new(cfg.fisheries_params().clone())?;
            let out = train_decomposed::<_, FusedQ>(&mut env, &cfg.dqn, None, &mut |_, _| Ok(()))?;
            ckpt.env_steps = out.env_steps;
            ckpt.nets.extend(out.nets.iter().map(NetFile::from_net));
            out.log
        }
        Method::Fusion | Method::Correction => {
            let q_lo = obtain_q_lo(run)?;
            files.extend(q_lo.files);
            references.push(q_lo.reference.clone());
            ckpt.q_lo = Some(q_lo.reference);
            let rule = cfg.fusion_rule.expect("validated");
            let fused = fuse(cfg, q_lo.net, rule)?;
            let mut correction_steps = 0;
            let log = if cfg.method == Method::Correction {
                let dqn = DqnConfig {
                    total_train_steps: cfg.correction_budget(),
                    ..cfg.dqn.clone()
                };
                correction_steps = dqn.total_train_steps;
                match cfg.environment {
                    Environment::Fisheries => {
                        let mut env = FisheriesEnv::new(cfg.fisheries_params().clone())?;
                        let out = train_decomposed_correction(&mut env, &fused, &dqn, &mut |_, _| Ok(()))?;
                        ckpt.nets.extend(out.corrected.deltas.iter().map(NetFile::from_net));
                        out.log
                    }
                    Environment::Crosswalk => {
                        let mut env = CrosswalkEnv::new(cfg.crosswalk_params().clone(), Mode::Training)?;
                        let out = train_correction(&mut env, &fused, &dqn, &mut |_, _| Ok(()))?;
                        ckpt.nets.push(NetFile::from_net(&out.corrected.delta));
                        out.log
                    }
                }
            } else {
                Vec::new()
            };
            ckpt.env_steps = correction_steps;
            budget = Some(Budget {
                single_agent_steps: q_lo.steps,
                correction_steps,
                total_steps: q_lo.steps + correction_steps,
            });
            log
        }
        Method::BaselineFixed | Method::BaselineRandom => unreachable!("rejected above"),
    };
    let steps = budget.map_or(ckpt.env_steps, |b| b.total_steps);
    files.push(run.write(CHECKPOINT_FILE, &ckpt.to_bytes())?);
    files.push(run.write_csv("train_log.csv", log_bytes(&log)?)?);
    files.push(run.write("config.toml", run.config.to_toml().as_bytes())?);
    let manifest = Manifest {
        command: "train",
        config_hash: &run.config_hash,
        environment: cfg.environment,
        method: cfg.method,
        budget: Some(budget.unwrap_or(Budget {
            single_agent_steps: 0,
            correction_steps: 0,
            total_steps: steps,
        })),
        checkpoint: None,
        checkpoint_config_hash: None,
        references,
        files: files.clone(),
    };
    files.push(write_manifest(run, "manifest.json", &manifest)?);
    Ok(TrainSummary {
        checkpoint: run.checkpoint_path(),
        env_steps: steps,
        files,
    })
}

/// Independently trained per-agent networks.
#[derive(Debug, Clone)]
pub struct AgentNets(pub Vec<Net>);

impl PerAgentValues for AgentNets {
    fn input_dim(&self) -> usize {
        self.0.first().map_or(0, Net::input_dim)
    }
    fn agent_count(&self) -> usize {
        self.0.len()
    }
    fn local_action_count(&self) -> usize {
        self.0.first().map_or(0, Net::output_dim)
    }
    fn agent_values(&self, agent: usize, observation: &[f64]) -> deepcorr::Result<Vec<f64>> {
        self.0[agent].forward(observation)
    }
}

/// A frozen policy rebuilt from a config and, for learned methods, a checkpoint.
#[derive(Debug, Clone)]
pub enum Policy {
    Fixed(usize),
    Random,
    Single(Net),
    Agents(AgentNets),
    /// Fused per-entity values; crosswalk corrections are folded in.
    Fused(FusedQ),
    Corrected(DecomposedCorrection<FusedQ>),
}

/// A policy, the scope it acts in, and the checkpoint it came from.
pub type LoadedPolicy = (Policy, Scope, Option<(Checkpoint, CheckpointRef)>);

/// The policy a run evaluates and the scope it acts in.
pub fn load_policy(run: &Run, checkpoint: Option<&Path>) -> Result<LoadedPolicy> {
    let cfg = &run.config;
    match cfg.method {
        Method::BaselineFixed => return Ok((Policy::Fixed(cfg.fixed_action.expect("validated")), cfg.scope, None)),
        Method::BaselineRandom => return Ok((Policy::Random, cfg.scope, None)),
        _ => {}
    }
    let path = checkpoint.map_or_else(|| run.checkpoint_path(), Path::to_path_buf);
    let (ckpt, hash) = Checkpoint::load(&path)?;
    let mismatch = |message: String| CliError::Checkpoint {
        path: path.clone(),
        message,
    };
    if ckpt.environment != cfg.environment {
        return Err(mismatch(format!(
            "trained for {:?} but the config is for {:?}",
            ckpt.environment, cfg.environment
        )));
    }
    let policy = match ckpt.method {
        Method::Dqn => Policy::Single(single_net(&ckpt, &path)?),
        Method::DecomposedDqn => Policy::Agents(AgentNets(ckpt.networks()?)),
        Method::Fusion | Method::Correction => {
            let (q_lo, q_lo_path) = ckpt
                .load_q_lo(&path)?
                .ok_or_else(|| mismatch("fusion checkpoint without a q_lo reference".into()))?;
            let rule = ckpt.fusion_rule.ok_or_else(|| mismatch("missing fusion_rule".into()))?;
            let fused = fuse(cfg, single_net(&q_lo, &q_lo_path)?, rule)?;
            match (ckpt.method, cfg.environment) {
                (Method::Fusion, _) => Policy::Fused(fused),
                (_, Environment::Fisheries) => Policy::Corrected(DecomposedCorrection::new(fused, ckpt.networks()?)?),
                (_, Environment::Crosswalk) => Policy::Fused(fused.with_correction(single_net(&ckpt, &path)?)?),
            }
        }
        Method::BaselineFixed | Method::BaselineRandom => return Err(mismatch("baselines have no checkpoint".into())),
    };
    let reference = CheckpointRef {
        path: std::path::absolute(&path).map_err(CliError::io(&path))?,
        sha256: hash,
    };
    let scope = ckpt.scope;
    Ok((policy, scope, Some((ckpt, reference))))
}

fn check_dims(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(deepcorr::Error::Shape { what, expected, got }.into())
    }
}

fn eval_greedy<E, Q>(env: &E, q: &Q, cfg: &EvalConfig) -> Result<Evaluation>
where
    E: DiscreteEnv + Clone + Sync,
    Q: ActionValues + Sync,
{
    check_dims("policy input", env.observation_dim(), q.input_dim())?;
    check_dims("policy actions", env.action_count(), q.action_count())?;
    Ok(evaluate(env, greedy(q), cfg)?)
}

fn eval_discrete<E>(env: &E, policy: &Policy, cfg: &EvalConfig) -> Result<Evaluation>
where
    E: DiscreteEnv + Clone + Sync,
{
    let k = env.action_count();
    match policy {
        Policy::Fixed(a) => Ok(evaluate(env, |_: &[f64], _: &mut SimRng| Ok(*a), cfg)?),
        Policy::Random => Ok(evaluate(env, |_: &[f64], r: &mut SimRng| Ok(r.random_range(0..k)), cfg)?),
        Policy::Single(net) => eval_greedy(env, net, cfg),
        Policy::Fused(f) => eval_greedy(env, f, cfg),
        Policy::Agents(_) | Policy::Corrected(_) => {
            Err(CliError::Invalid("multi-agent policy on a single-agent environment".into()))
        }
    }
}

fn eval_joint(env: &FisheriesEnv, policy: &Policy, cfg: &EvalConfig) -> Result<Evaluation> {
    let n = env.params().n_boats;
    let k = env.params().local_actions.len();
    let check = |p: &dyn PerAgentValues| -> Result<()> {
        check_dims("policy input", env.observation_dim(), p.input_dim())?;
        check_dims("policy agents", n, p.agent_count())?;
        check_dims("policy actions", k, p.local_action_count())
    };
    Ok(match policy {
        Policy::Fixed(a) => {
            let p = fixed_policy(n, *a);
            evaluate(env, |s: &[f64], r: &mut SimRng| Ok(p(s, r)), cfg)?
        }
        Policy::Random => {
            let p = random_policy(n, k);
            evaluate(env, |s: &[f64], r: &mut SimRng| Ok(p(s, r)), cfg)?
        }
        Policy::Agents(a) => {
            check(a)?;
            evaluate(env, joint_greedy(a), cfg)?
        }
        Policy::Fused(f) => {
            check(f)?;
            evaluate(env, joint_greedy(f), cfg)?
        }
        Policy::Corrected(c) => {
            check(&c.prior)?;
            evaluate(env, |s: &[f64], _: &mut SimRng| c.greedy(s), cfg)?
        }
        Policy::Single(_) => return Err(CliError::Invalid("single-boat network on the joint fisheries problem".into())),
    })
}

/// Evaluate `policy` in the configured environment's evaluation mode.
pub fn evaluate_policy(config: &ExperimentConfig, policy: &Policy, scope: Scope) -> Result<Evaluation> {
    let mut eval = EvalConfig {
        n_sims: config.evaluation.n_sims,
        seeds: config.evaluation.seeds.clone(),
        max_steps: 100_000,
        seconds_per_step: 1.0,
    };
    match (config.environment, scope) {
        (Environment::Fisheries, Scope::Single) => eval_discrete(&single_boat_env(config.fisheries_params())?, policy, &eval),
        (Environment::Fisheries, Scope::Global) => eval_joint(&FisheriesEnv::new(config.fisheries_params().clone())?, policy, &eval),
        (Environment::Crosswalk, _) => {
            let params = config.crosswalk_params().clone();
            eval.seconds_per_step = params.decision_period;
            let env = match scope {
                Scope::Single => single_pedestrian_env(params, Mode::Evaluation)?,
                Scope::Global => CrosswalkEnv::new(params, Mode::Evaluation)?,
            };
            eval_discrete(&env, policy, &eval)
        }
    }
}

/// Row label for reports: the method, plus the fusion rule when there is one.
pub fn method_label(config: &ExperimentConfig) -> String {
    match (config.method, config.fusion_rule) {
        (Method::Fusion | Method::Correction, Some(rule)) => format!("{}-{}", config.method.as_str(), rule.as_str()),
        (Method::BaselineFixed, _) => format!("baseline-fixed-{}", config.fixed_action.unwrap_or(0)),
        (m, _) => m.as_str().into(),
    }
}

pub fn cmd_evaluate(run: &Run, checkpoint: Option<&Path>) -> Result<EvalReport> {
    let (policy, scope, ckpt) = load_policy(run, checkpoint)?;
    let evaluation = evaluate_policy(&run.config, &policy, scope)?;
    let mut report = Vec::new();
    harness::write_reports_csv(&[(method_label(&run.config), evaluation.report.clone())], &mut report)?;
    let mut episodes = Vec::new();
    harness::write_episodes_csv(&evaluation.episodes, &mut episodes)?;
    let files = vec![
        run.write_csv("eval_report.csv", report)?,
        run.write_csv("eval_episodes.csv", episodes)?,
    ];
    let (checkpoint, checkpoint_config_hash, references) = match ckpt {
        Some((c, r)) => (Some(r), Some(c.config_hash.clone()), c.q_lo.into_iter().collect()),
        None => (None, None, Vec::new()),
    };
    let manifest = Manifest {
        command: "evaluate",
        config_hash: &run.config_hash,
        environment: run.config.environment,
        method: run.config.method,
        budget: None,
        checkpoint,
        checkpoint_config_hash,
        references,
        files,
    };
    write_manifest(run, "eval_manifest.json", &manifest)?;
    Ok(evaluation.report)
}

/// Greedy actions over the standard slice; `points` overrides the grid size.
pub fn cmd_slice(run: &Run, checkpoint: Option<&Path>, points: Option<(usize, usize)>) -> Result<PolicyGrid> {
    if run.config.environment != Environment::Crosswalk {
        return Err(CliError::Invalid("policy slices are defined for the crosswalk environment only".into()));
    }
    let params = run.config.crosswalk_params();
    let mut slice = run.config.slice.clone();
    if let Some((x, y)) = points {
        slice.x_points = x;
        slice.y_points = y;
    }
    let (policy, scope, _) = load_policy(run, checkpoint)?;
    let slots = match scope {
        Scope::Single => 1,
        Scope::Global => params.max_pedestrians,
    };
    let grid = match &policy {
        Policy::Single(net) => {
            check_dims("policy input", params.history * (2 + 2 * slots), net.input_dim())?;
            policy_slice(net, params, slots, &slice)?
        }
        Policy::Fused(f) => policy_slice(f, params, slots, &slice)?,
        _ => return Err(CliError::Invalid("baselines have no value function to slice".into())),
    };
    let mut bytes = Vec::new();
    grid.write_csv(&mut bytes)?;
    run.write_csv("policy_slice.csv", bytes)?;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub run: String,
    pub seed: u64,
    pub exploration_fraction: f64,
    pub final_epsilon: f64,
    pub run_config_hash: String,
    pub mean_return: f64,
    pub std_error: f64,
    pub crash_pct: f64,
    pub success_pct: f64,
    pub timeout_pct: f64,
    pub collapse_pct: f64,
    pub mean_time_to_cross: Option<f64>,
}

/// Train and evaluate every seed x exploration schedule combination, each in
/// its own subdirectory, then tabulate (and, for the crosswalk, extract the
/// Pareto front).
pub fn cmd_sweep(run: &Run) -> Result<Vec<SweepRow>> {
    let cfg = &run.config;
    let schedules = if cfg.sweep.schedules.is_empty() {
        vec![Schedule {
            exploration_fraction: cfg.dqn.exploration_fraction,
            final_epsilon: cfg.dqn.final_epsilon,
        }]
    } else {
        cfg.sweep.schedules.clone()
    };
    let mut rows = Vec::new();
    for &seed in &cfg.sweep.seeds {
        for (j, schedule) in schedules.iter().enumerate() {
            let name = format!("seed{seed}-schedule{j}");
            let mut sub = cfg.clone();
            sub.dqn.seed = seed;
            sub.dqn.exploration_fraction = schedule.exploration_fraction;
            sub.dqn.final_epsilon = schedule.final_epsilon;
            sub.output_dir = run.out_dir.join(&name);
            sub.sweep = Default::default();
            sub.validate()?;
            let sub_run = Run::new(sub, &run.config_dir, &run.out_dir);
            if !sub_run.config.method.is_baseline() {
                cmd_train(&sub_run)?;
            }
            let r = cmd_evaluate(&sub_run, None)?;
            rows.push(SweepRow {
                run: name,
                seed,
                exploration_fraction: schedule.exploration_fraction,
                final_epsilon: schedule.final_epsilon,
                run_config_hash: sub_run.config_hash.clone(),
                mean_return: r.mean_return,
                std_error: r.std_error,
                crash_pct: r.crash_pct,
                success_pct: r.success_pct,
                timeout_pct: r.timeout_pct,
                collapse_pct: r.collapse_pct,
                mean_time_to_cross: r.mean_time_to_cross,
            });
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Core(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Core(deepcorr::Error::Io(e.into_error())))?;
    run.write_csv("sweep.csv", bytes)?;
    if cfg.environment == Environment::Crosswalk {
        let points: Vec<_> = rows
            .iter()
            .filter_map(|r| {
                r.mean_time_to_cross.map(|t| harness::ParetoPoint {
                    policy: r.run.clone(),
                    time_to_cross: t,
                    crash_rate: r.crash_pct,
                })
            })
            .collect();
        let mut bytes = Vec::new();
        harness::write_pareto_csv(&pareto_front(&points)?, &mut bytes)?;
        run.write_csv("pareto.csv", bytes)?;
    }
    Ok(rows)
}
