//! Deep corrections: learn an additive term `delta(s, a; theta)` on top of
//! a frozen low-fidelity value function so that `Q* ~ Q_lo + delta`.
//!
//! Training is DQN with the network standing in for `delta` only. Acting,
//! prediction and bootstrapping all use `Q_lo + delta`; the target network
//! is a copy of `delta` since `Q_lo` never changes. The update descends the
//! squared TD error.

use crate::envcore::{ActionValues, DiscreteEnv, JointEnv};
use crate::error::{check_len, Result};
use crate::fusion::joint_argmax_sum;
use crate::numerics::ParamNet;
use crate::qlearn::{train_decomposed, train_with_prior, AgentNetsHook, DqnConfig, PerAgentValues, TrainRecord};

/// `Q_lo + delta` as a value function.
#[derive(Debug, Clone)]
pub struct CorrectedQ<Q> {
    pub q_lo: Q,
    pub delta: ParamNet<f64>,
}

impl<Q: ActionValues> CorrectedQ<Q> {
    pub fn new(q_lo: Q, delta: ParamNet<f64>) -> Result<Self> {
        check_len("correction input", q_lo.input_dim(), delta.input_dim())?;
        check_len("correction output", q_lo.action_count(), delta.output_dim())?;
        Ok(Self { q_lo, delta })
    }
}

/// `Q_lo(s, .) + delta(s, .)`.
pub fn corrected_q<Q: ActionValues>(q_lo: &Q, delta: &ParamNet<f64>, state: &[f64]) -> Result<Vec<f64>> {
    let mut q = q_lo.action_values(state)?;
    check_len("correction output", q.len(), delta.output_dim())?;
    for (v, d) in q.iter_mut().zip(delta.forward(state)?) {
        *v += d;
    }
    Ok(q)
}

impl<Q: ActionValues> ActionValues for CorrectedQ<Q> {
    fn input_dim(&self) -> usize {
        self.q_lo.input_dim()
    }
    fn action_count(&self) -> usize {
        self.q_lo.action_count()
    }
    fn action_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        corrected_q(&self.q_lo, &self.delta, observation)
    }
}

/// A frozen low-fidelity value function and the trainer settings used to
/// learn its correction.
#[derive(Debug, Clone)]
pub struct CorrectionSpec<Q> {
    pub q_lo: Q,
    pub config: DqnConfig,
}

#[derive(Debug, Clone)]
pub struct CorrectionOutput<Q> {
    pub corrected: CorrectedQ<Q>,
    pub log: Vec<TrainRecord>,
    pub env_steps: u64,
}

impl<Q: ActionValues> CorrectionSpec<Q> {
    pub fn new(q_lo: Q, config: DqnConfig) -> Self {
        Self { q_lo, config }
    }

    pub fn train<E: DiscreteEnv>(self, env: &mut E) -> Result<CorrectionOutput<Q>> {
        train_correction(env, self.q_lo, &self.config, &mut |_, _| Ok(()))
    }
}

/// Learn `delta` for a single-agent problem. `hook(steps_done, delta)` runs
/// before training and after every environment step.
pub fn train_correction<E, Q>(
    env: &mut E,
    q_lo: Q,
    cfg: &DqnConfig,
    hook: &mut dyn FnMut(u64, &ParamNet<f64>) -> Result<()>,
) -> Result<CorrectionOutput<Q>>
where
    E: DiscreteEnv,
    Q: ActionValues,
{
    check_len("low-fidelity input", env.observation_dim(), q_lo.input_dim())?;
    check_len("low-fidelity actions", env.action_count(), q_lo.action_count())?;
    let out = train_with_prior(env, cfg, Some(&q_lo), hook)?;
    Ok(CorrectionOutput {
        corrected: CorrectedQ {
            q_lo,
            delta: out.net,
        },
        log: out.log,
        env_steps: out.env_steps,
    })
}

/// Per-agent corrections over a per-agent prior: agent `i` scores its local
/// actions with `prior_i(s) + delta_i(s)`, each `delta_i` seeing the full
/// state.
#[derive(Debug, Clone)]
pub struct DecomposedCorrection<P> {
    pub prior: P,
    pub deltas: Vec<ParamNet<f64>>,
}

impl<P: PerAgentValues> DecomposedCorrection<P> {
    pub fn new(prior: P, deltas: Vec<ParamNet<f64>>) -> Result<Self> {
        check_len("correction networks", prior.agent_count(), deltas.len())?;
        for d in &deltas {
            check_len("correction input", prior.input_dim(), d.input_dim())?;
            check_len("correction output", prior.local_action_count(), d.output_dim())?;
        }
        Ok(Self { prior, deltas })
    }

    pub fn joint_values(&self, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.deltas
            .iter()
            .enumerate()
            .map(|(i, delta)| {
                let mut q = self.prior.agent_values(i, state)?;
                for (v, d) in q.iter_mut().zip(delta.forward(state)?) {
                    *v += d;
                }
                Ok(q)
            })
            .collect()
    }

    pub fn greedy(&self, state: &[f64]) -> Result<Vec<usize>> {
        joint_argmax_sum(&self.joint_values(state)?)
    }
}

#[derive(Debug, Clone)]
pub struct DecomposedCorrectionOutput<P> {
    pub corrected: DecomposedCorrection<P>,
    pub log: Vec<TrainRecord>,
    pub env_steps: u64,
}

/// One correction network per agent, each updated every training step on
/// the shared reward.
pub fn train_decomposed_correction<E, P>(
    env: &mut E,
    prior: P,
    cfg: &DqnConfig,
    hook: &mut AgentNetsHook<'_>,
) -> Result<DecomposedCorrectionOutput<P>>
where
    E: JointEnv,
    P: PerAgentValues,
{
    let out = train_decomposed(env, cfg, Some(&prior), hook)?;
    Ok(DecomposedCorrectionOutput {
        corrected: DecomposedCorrection::new(prior, out.nets)?,
        log: out.log,
        env_steps: out.env_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envcore::argmax;

    fn constant(values: &[f64]) -> ParamNet<f64> {
        ParamNet::from_layers(&[1, values.len()], false, &[vec![0.0; values.len()]], &[values.to_vec()]).unwrap()
    }

    #[test]
    fn zero_delta_returns_prior() {
        let q_lo = constant(&[0.4, -1.0, 2.5]);
        let delta = ParamNet::zeros(&[1, 8, 3], true).unwrap();
        assert_eq!(corrected_q(&q_lo, &delta, &[0.7]).unwrap(), vec![0.4, -1.0, 2.5]);
    }

    #[test]
    fn zero_prior_returns_delta() {
        let q_lo = ParamNet::zeros(&[1, 3], false).unwrap();
        let delta = constant(&[0.1, 0.2, 0.3]);
        assert_eq!(corrected_q(&q_lo, &delta, &[4.0]).unwrap(), delta.forward(&[4.0]).unwrap());
    }

    #[test]
    fn correction_can_flip_the_greedy_action() {
        let q_lo = constant(&[1.0, 0.0]);
        assert_eq!(argmax(&q_lo.forward(&[0.0]).unwrap()), 0);
        let c = CorrectedQ::new(q_lo, constant(&[0.2, 1.5])).unwrap();
        let q = c.action_values(&[0.0]).unwrap();
        assert!((q[0] - 1.2).abs() < 1e-15 && q[1] == 1.5);
        assert_eq!(argmax(&q), 1);
    }

    #[test]
    fn dimension_checks() {
        let q_lo = constant(&[1.0, 0.0]);
        assert!(CorrectedQ::new(q_lo.clone(), constant(&[1.0, 2.0, 3.0])).is_err());
        assert!(corrected_q(&q_lo, &constant(&[1.0]), &[0.0]).is_err());
    }
}
