//! A small fully connected Q-network: rectifier hidden layers, linear output,
//! backpropagation and Adam.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// One affine layer. `weights` is `inputs x outputs` so a batch is `x.dot(&weights)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
        }
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.weights.nrows(), self.weights.ncols())
    }

    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

/// Multilayer perceptron with ReLU on every hidden layer and identity on the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Layer inputs of a batched forward pass; `activations[0]` is the input batch and the
/// last entry is the network output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("non-empty cache")
    }
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net.layers.iter().map(Dense::zeros_like).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.params().copied())
            .collect()
    }
}

impl Mlp {
    /// Glorot-uniform weights from `rng`, zero biases. `dims = [input, hidden.., output]`.
    pub fn new(dims: &[usize], rng: &mut SimRng) -> Result<Self> {
        validate_dims(dims)?;
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights =
                    Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-limit..limit));
                Dense {
                    weights,
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        validate_dims(dims)?;
        Ok(Self {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].outputs(),
                    actual: pair[1].inputs(),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.outputs() {
                return Err(Error::DimensionMismatch {
                    expected: l.outputs(),
                    actual: l.bias.len(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Dense::outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").outputs()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.params().copied())
            .collect()
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                actual: values.len(),
            });
        }
        for (p, v) in self
            .layers
            .iter_mut()
            .flat_map(Dense::params_mut)
            .zip(values)
        {
            *p = *v;
        }
        Ok(())
    }

    /// FNV-1a over the parameter bit patterns.
    pub fn param_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in self.layers.iter().flat_map(Dense::params) {
            for b in p.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01B3);
            }
        }
        h
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .flat_map(Dense::params)
            .all(|p| p.is_finite())
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.bias.to_vec();
            for (xi, row) in a.iter().zip(layer.weights.rows()) {
                if *xi != 0.0 {
                    for (zj, wij) in z.iter_mut().zip(row) {
                        *zj += xi * wij;
                    }
                }
            }
            if i < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self
            .forward_cached(x)?
            .activations
            .pop()
            .expect("non-empty cache"))
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_owned());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = activations[i].dot(&layer.weights);
            z += &layer.bias;
            if i < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Gradients of `sum(upstream ⊙ output)` with respect to every parameter, where
    /// `upstream` is dLoss/dOutput for the cached batch.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: ArrayView2<'_, f64>,
    ) -> Result<Gradients> {
        let out = cache.output();
        if upstream.dim() != out.dim() {
            return Err(Error::DimensionMismatch {
                expected: out.len(),
                actual: upstream.len(),
            });
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.to_owned();
        for i in (0..self.layers.len()).rev() {
            let input = &cache.activations[i];
            let weights = input.t().dot(&delta);
            let bias = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&self.layers[i].weights.t());
                back.zip_mut_with(input, |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
            grads.push(Dense { weights, bias });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    pub fn gradients(
        &self,
        x: ArrayView2<'_, f64>,
        upstream: ArrayView2<'_, f64>,
    ) -> Result<Gradients> {
        let cache = self.forward_cached(x)?;
        self.backward(&cache, upstream)
    }
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::invalid(format!("bad layer dims {dims:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Dense>,
    second: Vec<Dense>,
}

impl AdamState {
    pub fn new(net: &Mlp, config: AdamConfig) -> Self {
        let zeros: Vec<Dense> = net.layers.iter().map(Dense::zeros_like).collect();
        Self {
            config,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    /// Bias-corrected Adam update of `net` along `grads`.
    pub fn apply(&mut self, net: &mut Mlp, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != net.layers.len() || self.first.len() != net.layers.len() {
            return Err(Error::DimensionMismatch {
                expected: net.layers.len(),
                actual: grads.layers.len(),
            });
        }
        for ((layer, g), m) in net.layers.iter().zip(&grads.layers).zip(&self.first) {
            if layer.weights.dim() != g.weights.dim() || layer.weights.dim() != m.weights.dim() {
                return Err(Error::invalid("gradient shape does not match network"));
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (((layer, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            let params = layer.params_mut();
            let moments = m.params_mut().zip(v.params_mut());
            for ((p, gi), (mi, vi)) in params.zip(g.params()).zip(moments) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

/// Largest relative error between backpropagated gradients and central finite
/// differences of `sum(upstream ⊙ forward(x))`. Relative errors use
/// `max(|analytic|, |numeric|, 1e-8)` as the denominator.
pub fn gradient_check(
    net: &Mlp,
    x: ArrayView2<'_, f64>,
    upstream: ArrayView2<'_, f64>,
    h: f64,
) -> Result<f64> {
    let analytic = net.gradients(x, upstream)?.flatten();
    let loss = |n: &Mlp| -> Result<f64> { Ok((&n.forward_batch(x)? * &upstream).sum()) };
    let base = net.params();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_params(&p)?;
        let up = loss(&probe)?;
        p[i] = base[i] - h;
        probe.set_params(&p)?;
        let down = loss(&probe)?;
        let numeric = (up - down) / (2.0 * h);
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use ndarray::array;

    #[test]
    fn identity_and_zero_forward() {
        let layer = Dense {
            weights: array![[1.0, 0.0], [0.0, 1.0]],
            bias: array![0.0, 0.0],
        };
        let net = Mlp::from_layers(vec![layer]).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let zero = Mlp::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(zero.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert!(zero.forward(&[1.0]).is_err());
    }

    #[test]
    fn single_and_batch_forward_agree() {
        let net = Mlp::new(&[5, 8, 8, 3], &mut rng::seeded(4)).unwrap();
        let x = Array2::from_shape_fn((4, 5), |(i, j)| (i as f64 - j as f64) * 0.3);
        let batch = net.forward_batch(x.view()).unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            let single = net.forward(row.as_slice().unwrap()).unwrap();
            for (a, b) in single.iter().zip(batch.row(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_layer_gradient_by_hand() {
        let net = Mlp::zeros(&[2, 2]).unwrap();
        let x = array![[1.0, 2.0]];
        // L = q0
        let g = net.gradients(x.view(), array![[1.0, 0.0]].view()).unwrap();
        assert_eq!(g.layers[0].weights.column(0).to_vec(), vec![1.0, 2.0]);
        assert_eq!(g.layers[0].weights.column(1).to_vec(), vec![0.0, 0.0]);
        assert_eq!(g.layers[0].bias.to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = Mlp::new(&[3, 4, 2], &mut rng::seeded(1)).unwrap();
        let x = array![[0.5, -1.0, 2.0]];
        let g = net
            .gradients(x.view(), Array2::zeros((1, 2)).view())
            .unwrap();
        assert!(g.flatten().iter().all(|v| *v == 0.0));
        assert!(net
            .gradients(x.view(), Array2::zeros((1, 3)).view())
            .is_err());
    }

    #[test]
    fn adam_zero_gradient_is_noop_and_first_step_is_lr() {
        let mut net = Mlp::new(&[2, 3, 1], &mut rng::seeded(2)).unwrap();
        let before = net.clone();
        let mut opt = AdamState::new(&net, AdamConfig::default());
        let zero = Gradients::zeros_like(&net);
        opt.apply(&mut net, &zero).unwrap();
        assert_eq!(net, before);

        let mut net = before.clone();
        let mut opt = AdamState::new(&net, AdamConfig::default());
        let mut g = Gradients::zeros_like(&net);
        g.layers[0].weights[[0, 0]] = 0.3;
        g.layers[1].bias[0] = -2.0;
        opt.apply(&mut net, &g).unwrap();
        let lr = AdamConfig::default().learning_rate;
        let dw = net.layers()[0].weights[[0, 0]] - before.layers()[0].weights[[0, 0]];
        let db = net.layers()[1].bias[0] - before.layers()[1].bias[0];
        assert!((dw + lr).abs() < 1e-9, "{dw}");
        assert!((db - lr).abs() < 1e-9, "{db}");
    }

    #[test]
    fn gradient_check_on_seeded_net() {
        let mut r = rng::seeded(3);
        let net = Mlp::new(&[6, 16, 16, 3], &mut r).unwrap();
        let x = Array2::from_shape_fn((5, 6), |_| r.random_range(-1.0..1.0));
        let up = Array2::from_shape_fn((5, 3), |_| r.random_range(-1.0..1.0));
        assert!(gradient_check(&net, x.view(), up.view(), 1e-5).unwrap() <= 1e-4);
    }
}
