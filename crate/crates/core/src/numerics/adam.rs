use serde::{Deserialize, Serialize};

use super::{ParamNet, Scalar};
use crate::error::{check_len, Error, Result};

/// Moment estimates and hyperparameters for Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState<T> {
    pub first_moment: Vec<T>,
    pub second_moment: Vec<T>,
    pub step: u64,
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> AdamState<T> {
    /// Zeroed moments with betas (0.9, 0.999) and epsilon 1e-8.
    pub fn new(param_count: usize, learning_rate: T) -> Self {
        Self {
            first_moment: vec![T::zero(); param_count],
            second_moment: vec![T::zero(); param_count],
            step: 0,
            learning_rate,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
        }
    }

    pub fn for_net(net: &ParamNet<T>, learning_rate: T) -> Self {
        Self::new(net.param_count(), learning_rate)
    }
}

/// One bias-corrected Adam update of `params` in the direction of `-grads`.
pub fn adam_step<T: Scalar>(params: &mut [T], grads: &[T], state: &mut AdamState<T>) -> Result<()> {
    check_len("adam gradient", params.len(), grads.len())?;
    check_len("adam first moment", params.len(), state.first_moment.len())?;
    check_len("adam second moment", params.len(), state.second_moment.len())?;
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient component {i}")));
    }
    state.step += 1;
    let t = i32::try_from(state.step).unwrap_or(i32::MAX);
    let one = T::one();
    let bias1 = one - state.beta1.powi(t);
    let bias2 = one - state.beta2.powi(t);
    for ((p, &g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        *m = state.beta1 * *m + (one - state.beta1) * g;
        *v = state.beta2 * *v + (one - state.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p = *p - state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("parameters after adam step".into()));
    }
    Ok(())
}

impl<T: Scalar> ParamNet<T> {
    pub fn apply_adam(&mut self, grads: &[T], state: &mut AdamState<T>) -> Result<()> {
        adam_step(self.params_mut(), grads, state)
    }
}
