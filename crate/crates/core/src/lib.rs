//! Utility decomposition with deep corrections.
//!
//! A frozen low-fidelity value function, typically a fusion of per-entity
//! value networks, is refined by learning an additive correction network
//! with DQN. Two environments are included: a multi-boat fisheries problem
//! and an occluded pedestrian crosswalk.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corrections;
pub mod crosswalk;
pub mod envcore;
pub mod error;
pub mod fisheries;
pub mod fusion;
pub mod harness;
pub mod numerics;
pub mod qlearn;
pub mod replay;
pub mod rng;
pub mod tabular;

pub use error::{Error, Result};

/// Double precision network, the type every trainer uses.
pub type Net = numerics::ParamNet<f64>;
/// Single precision network.
pub type NetF32 = numerics::ParamNet<f32>;
pub type Adam = numerics::AdamState<f64>;
