//! Small fully connected networks with exact gradients and Adam.
//!
//! Everything here is generic over the floating point type; the trainers
//! elsewhere in the crate use `f64`.

mod adam;
mod net;
mod persist;

pub use adam::{adam_step, AdamState};
pub use net::{ForwardTrace, ParamNet};
pub use persist::NetFile;

use num_traits::{Float, FromPrimitive};
use std::fmt::Debug;

/// Floating point type usable as network parameters.
pub trait Scalar: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {}
