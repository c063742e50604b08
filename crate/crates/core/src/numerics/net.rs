use rand::Rng;

use super::Scalar;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    weight_offset: usize,
    bias_offset: usize,
}

/// A feedforward network: ReLU on hidden layers, identity output, and an
/// optional dueling head.
///
/// Parameters live in one flat vector, layer by layer, each layer stored as
/// its row-major weight matrix (`fan_out x fan_in`) followed by its bias.
/// With `dueling` set, the last layer has `actions + 1` rows: row 0 is the
/// state value and the remaining rows are advantages, combined as
/// `Q(a) = V + A(a) - mean(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamNet<T> {
    layer_sizes: Vec<usize>,
    dueling: bool,
    layers: Vec<Layer>,
    params: Vec<T>,
}

/// Activations recorded by [`ParamNet::forward_trace`], consumed by
/// [`ParamNet::backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    /// `activations[0]` is the input; `activations[l]` the post-ReLU output
    /// of hidden layer `l`.
    activations: Vec<Vec<T>>,
    output: Vec<T>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn output(&self) -> &[T] {
        &self.output
    }
}

fn layout(layer_sizes: &[usize], dueling: bool) -> Result<(Vec<Layer>, usize)> {
    if layer_sizes.len() < 2 {
        return Err(Error::Contract(format!(
            "a network needs at least an input and an output size, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Contract(format!(
            "layer sizes must be positive, got {layer_sizes:?}"
        )));
    }
    let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
    let mut offset = 0;
    for (l, pair) in layer_sizes.windows(2).enumerate() {
        let fan_in = pair[0];
        let is_last = l == layer_sizes.len() - 2;
        let fan_out = if is_last && dueling { pair[1] + 1 } else { pair[1] };
        layers.push(Layer {
            fan_in,
            fan_out,
            weight_offset: offset,
            bias_offset: offset + fan_in * fan_out,
        });
        offset += fan_in * fan_out + fan_out;
    }
    Ok((layers, offset))
}

impl<T: Scalar> ParamNet<T> {
    /// All-zero network.
    pub fn zeros(layer_sizes: &[usize], dueling: bool) -> Result<Self> {
        let (layers, count) = layout(layer_sizes, dueling)?;
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            dueling,
            layers,
            params: vec![T::zero(); count],
        })
    }

    /// Weights and biases drawn uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], dueling: bool, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, dueling)?;
        for layer in net.layers.clone() {
            let bound = 1.0 / (layer.fan_in as f64).sqrt();
            let end = layer.bias_offset + layer.fan_out;
            for p in &mut net.params[layer.weight_offset..end] {
                *p = T::lit(rng.random_range(-bound..=bound));
            }
        }
        Ok(net)
    }

    /// Build from explicit per-layer row-major weights and biases.
    pub fn from_layers(
        layer_sizes: &[usize],
        dueling: bool,
        weights: &[Vec<T>],
        biases: &[Vec<T>],
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, dueling)?;
        check_len("layer weight list", net.layers.len(), weights.len())?;
        check_len("layer bias list", net.layers.len(), biases.len())?;
        for (l, layer) in net.layers.clone().into_iter().enumerate() {
            check_len("layer weights", layer.fan_in * layer.fan_out, weights[l].len())?;
            check_len("layer biases", layer.fan_out, biases[l].len())?;
            net.params[layer.weight_offset..layer.bias_offset].copy_from_slice(&weights[l]);
            net.params[layer.bias_offset..layer.bias_offset + layer.fan_out]
                .copy_from_slice(&biases[l]);
        }
        net.check_finite()?;
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn dueling(&self) -> bool {
        self.dueling
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("nonempty layer sizes")
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Row-major weight matrix of layer `l` (rows = outputs).
    pub fn weights(&self, l: usize) -> &[T] {
        let layer = self.layers[l];
        &self.params[layer.weight_offset..layer.bias_offset]
    }

    pub fn biases(&self, l: usize) -> &[T] {
        let layer = self.layers[l];
        &self.params[layer.bias_offset..layer.bias_offset + layer.fan_out]
    }

    /// `(rows, cols)` of layer `l`'s weight matrix.
    pub fn layer_shape(&self, l: usize) -> (usize, usize) {
        (self.layers[l].fan_out, self.layers[l].fan_in)
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        check_len("parameter vector", self.params.len(), params.len())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub(crate) fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.params.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::NonFinite(format!("network parameter {i}"))),
            None => Ok(()),
        }
    }

    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        check_len("network input", self.input_dim(), input.len())?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            self.affine(layer, &current, &mut next);
            if l < last {
                relu_in_place(&mut next);
            }
            std::mem::swap(&mut current, &mut next);
        }
        let output = self.head(current);
        if output.iter().any(|q| !q.is_finite()) {
            return Err(Error::NonFinite("network output".into()));
        }
        Ok(output)
    }

    /// Forward pass keeping what [`backward`](Self::backward) needs.
    pub fn forward_trace(&self, input: &[T]) -> Result<ForwardTrace<T>> {
        check_len("network input", self.input_dim(), input.len())?;
        let mut activations = Vec::with_capacity(self.layers.len());
        activations.push(input.to_vec());
        let last = self.layers.len() - 1;
        let mut raw = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.fan_out);
            self.affine(layer, &activations[l], &mut out);
            if l < last {
                relu_in_place(&mut out);
                activations.push(out);
            } else {
                raw = out;
            }
        }
        let output = self.head(raw);
        if output.iter().any(|q| !q.is_finite()) {
            return Err(Error::NonFinite("network output".into()));
        }
        Ok(ForwardTrace { activations, output })
    }

    /// Accumulate `d(cotangent . output)/d params` into `grad`.
    pub fn backward(&self, trace: &ForwardTrace<T>, cotangent: &[T], grad: &mut [T]) -> Result<()> {
        check_len("output cotangent", self.output_dim(), cotangent.len())?;
        check_len("gradient buffer", self.params.len(), grad.len())?;
        let mut delta = self.head_cotangent(cotangent);
        for l in (0..self.layers.len()).rev() {
            let layer = self.layers[l];
            let input = &trace.activations[l];
            for (row, &d) in delta.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                grad[layer.bias_offset + row] = grad[layer.bias_offset + row] + d;
                let w = layer.weight_offset + row * layer.fan_in;
                for (g, &x) in grad[w..w + layer.fan_in].iter_mut().zip(input) {
                    *g = *g + d * x;
                }
            }
            if l == 0 {
                break;
            }
            let mut upstream = vec![T::zero(); layer.fan_in];
            for (row, &d) in delta.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                let w = layer.weight_offset + row * layer.fan_in;
                for (u, &wij) in upstream.iter_mut().zip(&self.params[w..w + layer.fan_in]) {
                    *u = *u + d * wij;
                }
            }
            // ReLU derivative: the stored activation is zero exactly where
            // the pre-activation was not positive.
            for (u, &a) in upstream.iter_mut().zip(input) {
                if a <= T::zero() {
                    *u = T::zero();
                }
            }
            delta = upstream;
        }
        Ok(())
    }

    /// Flattened gradient of `cotangent . forward(input)`.
    pub fn grad(&self, input: &[T], cotangent: &[T]) -> Result<Vec<T>> {
        check_len("output cotangent", self.output_dim(), cotangent.len())?;
        let trace = self.forward_trace(input)?;
        let mut grad = vec![T::zero(); self.params.len()];
        self.backward(&trace, cotangent, &mut grad)?;
        Ok(grad)
    }

    fn affine(&self, layer: &Layer, input: &[T], out: &mut Vec<T>) {
        out.clear();
        let weights = &self.params[layer.weight_offset..layer.bias_offset];
        let biases = &self.params[layer.bias_offset..layer.bias_offset + layer.fan_out];
        for (row, &b) in weights.chunks_exact(layer.fan_in).zip(biases) {
            let mut acc = b;
            for (&w, &x) in row.iter().zip(input) {
                acc = acc + w * x;
            }
            out.push(acc);
        }
    }

    fn head(&self, raw: Vec<T>) -> Vec<T> {
        if !self.dueling {
            return raw;
        }
        let value = raw[0];
        let advantages = &raw[1..];
        let mean = mean(advantages);
        advantages.iter().map(|&a| value + a - mean).collect()
    }

    fn head_cotangent(&self, cotangent: &[T]) -> Vec<T> {
        if !self.dueling {
            return cotangent.to_vec();
        }
        let total = cotangent.iter().fold(T::zero(), |acc, &c| acc + c);
        let mean = mean(cotangent);
        std::iter::once(total)
            .chain(cotangent.iter().map(|&c| c - mean))
            .collect()
    }
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    let n = T::from_usize(xs.len()).expect("length fits scalar");
    xs.iter().fold(T::zero(), |acc, &x| acc + x) / n
}

fn relu_in_place<T: Scalar>(xs: &mut [T]) {
    for x in xs {
        if !(*x > T::zero()) && x.is_finite() {
            *x = T::zero();
        }
    }
}
