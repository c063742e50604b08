//! Utility fusion: combine per-entity value functions into one.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::envcore::{argmax, ActionValues};
use crate::error::{check_len, Error, Result};
use crate::numerics::{ParamNet, Scalar};
use crate::qlearn::PerAgentValues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionRule {
    /// Sum of the entity values: every entity matters independently.
    MaxSum,
    /// Elementwise minimum: act for the worst-off entity.
    MaxMin,
}

impl FusionRule {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionRule::MaxSum => "max-sum",
            FusionRule::MaxMin => "max-min",
        }
    }

    /// Combine equal-length per-entity vectors elementwise.
    pub fn combine<T: Scalar>(self, per_entity: &[Vec<T>]) -> Result<Vec<T>> {
        let first = per_entity
            .first()
            .ok_or_else(|| Error::Contract("fusion needs at least one entity".into()))?;
        let mut out = first.clone();
        for values in &per_entity[1..] {
            check_len("entity action values", out.len(), values.len())?;
            for (o, &v) in out.iter_mut().zip(values) {
                *o = match self {
                    FusionRule::MaxSum => *o + v,
                    FusionRule::MaxMin => o.min(v),
                };
            }
        }
        Ok(out)
    }
}

impl std::str::FromStr for FusionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-sum" => Ok(FusionRule::MaxSum),
            "max-min" => Ok(FusionRule::MaxMin),
            other => Err(Error::Contract(format!("unknown fusion rule {other:?}"))),
        }
    }
}

/// Index list picking an entity's substate out of the global state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntitySlice {
    pub indices: Vec<usize>,
}

impl EntitySlice {
    pub fn new(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn apply(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.indices
            .iter()
            .map(|&i| {
                state.get(i).copied().ok_or(Error::Shape {
                    what: "entity slice index",
                    expected: i + 1,
                    got: state.len(),
                })
            })
            .collect()
    }
}

/// Per-entity value networks plus a fusion rule and an optional additive
/// correction network evaluated on the full state.
#[derive(Debug, Clone)]
pub struct FusedQ {
    global_dim: usize,
    entities: Vec<(EntitySlice, Arc<ParamNet<f64>>)>,
    rule: FusionRule,
    correction: Option<ParamNet<f64>>,
}

impl FusedQ {
    pub fn new(global_dim: usize, entities: Vec<(EntitySlice, Arc<ParamNet<f64>>)>, rule: FusionRule) -> Result<Self> {
        let (_, first) = entities
            .first()
            .ok_or_else(|| Error::Contract("fused value needs at least one entity".into()))?;
        let actions = first.output_dim();
        for (slice, net) in &entities {
            check_len("entity action count", actions, net.output_dim())?;
            check_len("entity slice width", net.input_dim(), slice.indices.len())?;
            if let Some(&i) = slice.indices.iter().find(|&&i| i >= global_dim) {
                return Err(Error::Shape {
                    what: "entity slice index",
                    expected: global_dim,
                    got: i + 1,
                });
            }
        }
        Ok(Self {
            global_dim,
            entities,
            rule,
            correction: None,
        })
    }

    /// Same network for every entity.
    pub fn shared(global_dim: usize, net: Arc<ParamNet<f64>>, slices: Vec<EntitySlice>, rule: FusionRule) -> Result<Self> {
        Self::new(global_dim, slices.into_iter().map(|s| (s, Arc::clone(&net))).collect(), rule)
    }

    pub fn with_correction(mut self, correction: ParamNet<f64>) -> Result<Self> {
        check_len("correction input", self.global_dim, correction.input_dim())?;
        check_len("correction output", self.local_action_count(), correction.output_dim())?;
        self.correction = Some(correction);
        Ok(self)
    }

    pub fn rule(&self) -> FusionRule {
        self.rule
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn slices(&self) -> impl Iterator<Item = &EntitySlice> {
        self.entities.iter().map(|(s, _)| s)
    }

    pub fn correction(&self) -> Option<&ParamNet<f64>> {
        self.correction.as_ref()
    }

    pub fn local_action_count(&self) -> usize {
        self.entities[0].1.output_dim()
    }

    pub fn entity_values(&self, entity: usize, state: &[f64]) -> Result<Vec<f64>> {
        check_len("global state", self.global_dim, state.len())?;
        let (slice, net) = &self.entities[entity];
        net.forward(&slice.apply(state)?)
    }

    pub fn per_entity(&self, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        (0..self.entities.len()).map(|i| self.entity_values(i, state)).collect()
    }

    /// Fused values, plus the correction when one is attached.
    pub fn fuse(&self, state: &[f64]) -> Result<Vec<f64>> {
        let mut fused = self.rule.combine(&self.per_entity(state)?)?;
        if let Some(delta) = &self.correction {
            for (q, d) in fused.iter_mut().zip(delta.forward(state)?) {
                *q += d;
            }
        }
        Ok(fused)
    }
}

impl ActionValues for FusedQ {
    fn input_dim(&self) -> usize {
        self.global_dim
    }
    fn action_count(&self) -> usize {
        self.local_action_count()
    }
    fn action_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.fuse(observation)
    }
}

impl PerAgentValues for FusedQ {
    fn input_dim(&self) -> usize {
        self.global_dim
    }
    fn agent_count(&self) -> usize {
        self.entities.len()
    }
    fn local_action_count(&self) -> usize {
        FusedQ::local_action_count(self)
    }
    fn agent_values(&self, agent: usize, observation: &[f64]) -> Result<Vec<f64>> {
        self.entity_values(agent, observation)
    }
}

/// `argmax over (a_1..a_n) of sum_i q_i(a_i)`. The sum separates, so each
/// agent takes its own argmax (lowest index on ties).
pub fn joint_argmax_sum(per_agent: &[Vec<f64>]) -> Result<Vec<usize>> {
    let Some(first) = per_agent.first() else {
        return Ok(Vec::new());
    };
    if first.is_empty() {
        return Err(Error::Contract("agents need at least one action".into()));
    }
    for q in per_agent {
        check_len("agent action values", first.len(), q.len())?;
    }
    Ok(per_agent.iter().map(|q| argmax(q)).collect())
}
