//! Small dense networks with tanh hidden layers and exact reverse-mode
//! gradients. No autograd: the forward pass caches pre-activations and the
//! backward pass replays them.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Weights and biases of a feedforward network. Layer `l` maps
/// `sizes[l] -> sizes[l+1]`; all layers but the last apply tanh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

/// Intermediate activations from [`Mlp::eval`], consumed by [`Mlp::grad`].
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each layer (post-activation of the previous one).
    layer_inputs: Vec<DVector<f64>>,
    /// Pre-activation of each layer.
    pre_activations: Vec<DVector<f64>>,
}

/// Parameter gradients with the same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            biases: net.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &MlpGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            *w *= s;
        }
        for b in &mut self.biases {
            *b *= s;
        }
    }
}

impl Mlp {
    /// Fresh network with Xavier-uniform weights and zero biases.
    pub fn new(sizes: &[usize], rng: &mut ChaCha8Rng) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Contract("an MLP needs at least two layer sizes".into()));
        }
        if sizes.iter().any(|s| *s == 0) {
            return Err(Error::Contract("layer sizes must be positive".into()));
        }
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                rng.random_range(-bound..bound)
            }));
            biases.push(DVector::zeros(fan_out));
        }
        Ok(Self { weights, biases })
    }

    pub fn from_parts(weights: Vec<DMatrix<f64>>, biases: Vec<DVector<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Contract("mismatched MLP part counts".into()));
        }
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != b.len() {
                return Err(Error::Contract(format!(
                    "layer {l}: weight rows {} vs bias length {}",
                    w.nrows(),
                    b.len()
                )));
            }
            if l > 0 && w.ncols() != weights[l - 1].nrows() {
                return Err(Error::Contract(format!("layer {l} input width mismatch",)));
            }
        }
        Ok(Self { weights, biases })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.weights[0].ncols()];
        sizes.extend(self.weights.iter().map(DMatrix::nrows));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().expect("nonempty").nrows()
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Forward pass: tanh on hidden layers, linear output. The cache holds
    /// everything the backward pass needs.
    pub fn eval(&self, input: &DVector<f64>) -> Result<(DVector<f64>, MlpCache)> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "MLP input",
                expected: self.input_dim(),
                actual: input.len(),
            });
        }
        let n_layers = self.weights.len();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut pre_activations = Vec::with_capacity(n_layers);
        let mut x = input.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            layer_inputs.push(x.clone());
            let z = w * &x + b;
            pre_activations.push(z.clone());
            x = if l + 1 < n_layers { z.map(f64::tanh) } else { z };
        }
        Ok((
            x,
            MlpCache {
                layer_inputs,
                pre_activations,
            },
        ))
    }

    /// Output without the cache, for inference-only callers.
    pub fn forward(&self, input: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.eval(input)?.0)
    }

    /// Exact reverse-mode gradients of `output . output_grad` with respect to
    /// every weight and bias.
    pub fn grad(&self, cache: &MlpCache, output_grad: &DVector<f64>) -> Result<MlpGrads> {
        let n_layers = self.weights.len();
        if cache.layer_inputs.len() != n_layers || cache.pre_activations.len() != n_layers {
            return Err(Error::Contract(
                "gradient cache does not match this network".into(),
            ));
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "MLP output gradient",
                expected: self.output_dim(),
                actual: output_grad.len(),
            });
        }
        for (l, (w, input)) in self.weights.iter().zip(&cache.layer_inputs).enumerate() {
            if w.ncols() != input.len() || cache.pre_activations[l].len() != w.nrows() {
                return Err(Error::Contract(format!(
                    "gradient cache layer {l} shape does not match this network"
                )));
            }
        }

        let mut d_weights = Vec::with_capacity(n_layers);
        let mut d_biases = Vec::with_capacity(n_layers);
        let mut delta = output_grad.clone();
        for l in (0..n_layers).rev() {
            if l + 1 < n_layers {
                // dtanh/dz = 1 - tanh(z)^2
                let z = &cache.pre_activations[l];
                for i in 0..delta.len() {
                    let t = z[i].tanh();
                    delta[i] *= 1.0 - t * t;
                }
            }
            d_biases.push(delta.clone());
            d_weights.push(&delta * cache.layer_inputs[l].transpose());
            if l > 0 {
                delta = self.weights[l].transpose() * &delta;
            }
        }
        d_weights.reverse();
        d_biases.reverse();
        Ok(MlpGrads {
            weights: d_weights,
            biases: d_biases,
        })
    }

    /// Mutable access for the optimizer.
    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.weights
            .iter_mut()
            .map(|w| w.as_mut_slice())
            .chain(self.biases.iter_mut().map(|b| b.as_mut_slice()))
    }

    /// Gradient tensors in the same order as [`Mlp::params_mut`].
    pub(crate) fn grads_flat(grads: &MlpGrads) -> impl Iterator<Item = &[f64]> {
        grads
            .weights
            .iter()
            .map(|w| w.as_slice())
            .chain(grads.biases.iter().map(|b| b.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rng(seed: u64) -> ChaCha8Rng {
        crate::rng::rng_from(seed, "mlp-test")
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let mut net = Mlp::new(&[3, 4, 2], &mut rng(0)).unwrap();
        for w in &mut net.weights {
            w.fill(0.0);
        }
        let (out, _) = net.eval(&DVector::from_vec(vec![0.5, -1.0, 2.0])).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_identity_layer_reproduces_input() {
        let net = Mlp::from_parts(
            vec![DMatrix::identity(3, 3)],
            vec![DVector::zeros(3)],
        )
        .unwrap();
        let x = DVector::from_vec(vec![0.3, -0.7, 1.2]);
        let (out, _) = net.eval(&x).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn rejects_wrong_input_size() {
        let net = Mlp::new(&[3, 4, 2], &mut rng(1)).unwrap();
        assert!(net.forward(&DVector::zeros(5)).is_err());
    }

    #[test]
    fn zero_output_grad_gives_zero_grads() {
        let net = Mlp::new(&[4, 6, 3], &mut rng(2)).unwrap();
        let (_, cache) = net.eval(&DVector::from_element(4, 0.2)).unwrap();
        let grads = net.grad(&cache, &DVector::zeros(3)).unwrap();
        for w in &grads.weights {
            assert!(w.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn backward_is_linear_in_output_grad() {
        let net = Mlp::new(&[5, 8, 2], &mut rng(3)).unwrap();
        let x = DVector::from_fn(5, |i, _| (i as f64 - 2.0) * 0.3);
        let (_, cache) = net.eval(&x).unwrap();
        let g1 = DVector::from_vec(vec![0.7, -0.2]);
        let g2 = DVector::from_vec(vec![-1.1, 0.4]);
        let (a, b) = (2.5, -0.75);

        let grad1 = net.grad(&cache, &g1).unwrap();
        let grad2 = net.grad(&cache, &g2).unwrap();
        let mut combo = grad1.clone();
        combo.scale(a);
        let mut scaled2 = grad2.clone();
        scaled2.scale(b);
        combo.add_assign(&scaled2);

        let direct = net.grad(&cache, &(g1 * a + g2 * b)).unwrap();
        for (lhs, rhs) in combo.weights.iter().zip(&direct.weights) {
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        for (lhs, rhs) in combo.biases.iter().zip(&direct.biases) {
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    // Central finite differences on a 12 -> 8 -> 8 -> 2 network.
    #[test]
    fn gradients_match_finite_differences() {
        let mut net = Mlp::new(&[12, 8, 8, 2], &mut rng(4)).unwrap();
        let x = DVector::from_fn(12, |i, _| ((i * 7 % 5) as f64 - 2.0) * 0.21);
        let out_grad = DVector::from_vec(vec![0.9, -1.3]);
        let scalar = |net: &Mlp| -> f64 {
            let (out, _) = net.eval(&x).unwrap();
            out.dot(&out_grad)
        };

        let (_, cache) = net.eval(&x).unwrap();
        let grads = net.grad(&cache, &out_grad).unwrap();

        let h = 1e-5;
        for layer in 0..net.weights.len() {
            for idx in [0usize, 1, net.weights[layer].len() - 1] {
                let orig = net.weights[layer].as_slice()[idx];
                net.weights[layer].as_mut_slice()[idx] = orig + h;
                let plus = scalar(&net);
                net.weights[layer].as_mut_slice()[idx] = orig - h;
                let minus = scalar(&net);
                net.weights[layer].as_mut_slice()[idx] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.weights[layer].as_slice()[idx];
                let denom = numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-6,
                    "layer {layer} idx {idx}: numeric {numeric} vs analytic {analytic}"
                );
            }
            for idx in 0..net.biases[layer].len().min(3) {
                let orig = net.biases[layer][idx];
                net.biases[layer][idx] = orig + h;
                let plus = scalar(&net);
                net.biases[layer][idx] = orig - h;
                let minus = scalar(&net);
                net.biases[layer][idx] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.biases[layer][idx];
                let denom = numeric.abs().max(analytic.abs()).max(1e-8);
                assert!((numeric - analytic).abs() / denom < 1e-6);
            }
        }
    }

    #[test]
    fn stale_cache_is_rejected() {
        let net_a = Mlp::new(&[3, 4, 2], &mut rng(5)).unwrap();
        let net_b = Mlp::new(&[3, 5, 2], &mut rng(6)).unwrap();
        let (_, cache) = net_a.eval(&DVector::zeros(3)).unwrap();
        assert!(net_b.grad(&cache, &DVector::zeros(2)).is_err());
    }
}
