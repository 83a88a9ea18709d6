use serde::{Deserialize, Serialize};

use crate::numerics::SeededRng;

/// One fully connected layer; weights are row-major, `outputs x inputs`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

/// Fully connected Q-value network: rectifier activations on hidden layers,
/// linear output, one output per action. Trained with plain stochastic
/// gradient descent through [`QNetwork::apply_gradients`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QNetwork {
    layers: Vec<Layer>,
    sizes: Vec<usize>,
}

/// Parameter-shaped gradient accumulator.
#[derive(Clone, Debug)]
pub struct Gradients {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl QNetwork {
    /// Random initialization scaled by `1/sqrt(fan_in)`.
    pub fn new(sizes: &[usize], rng: &mut SeededRng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output layers");
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let scale = 1.0 / (inputs as f64).sqrt();
                Layer {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs)
                        .map(|_| rng.normal(0.0, scale))
                        .collect(),
                    biases: vec![0.0; outputs],
                }
            })
            .collect();
        Self {
            layers,
            sizes: sizes.to_vec(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// Q-values for one state.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.activations(input).pop().unwrap()
    }

    /// Post-activation values of every layer, input included.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(input.len(), self.sizes[0]);
        let mut acts = vec![input.to_vec()];
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let prev = acts.last().unwrap();
            let mut out = layer.biases.clone();
            for o in 0..layer.outputs {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                out[o] += row.iter().zip(prev).map(|(w, x)| w * x).sum::<f64>();
            }
            if li != last {
                for v in &mut out {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(out);
        }
        acts
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Accumulate `d loss / d theta` for one input given the gradient of the
    /// loss with respect to the network output.
    pub fn accumulate_gradients(&self, input: &[f64], grad_out: &[f64], grads: &mut Gradients) {
        let acts = self.activations(input);
        let mut delta = grad_out.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let prev = &acts[li];
            for o in 0..layer.outputs {
                grads.biases[li][o] += delta[o];
                let row = &mut grads.weights[li][o * layer.inputs..(o + 1) * layer.inputs];
                for (g, &x) in row.iter_mut().zip(prev) {
                    *g += delta[o] * x;
                }
            }
            if li == 0 {
                break;
            }
            let mut prev_delta = vec![0.0; layer.inputs];
            for o in 0..layer.outputs {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (pd, &w) in prev_delta.iter_mut().zip(row) {
                    *pd += delta[o] * w;
                }
            }
            // Rectifier gate of the layer below (its output is acts[li]).
            for (pd, &a) in prev_delta.iter_mut().zip(&acts[li]) {
                if a <= 0.0 {
                    *pd = 0.0;
                }
            }
            delta = prev_delta;
        }
    }

    /// One SGD step: `theta -= lr * scale * grad`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64, scale: f64) {
        for (li, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weights[li]) {
                *w -= lr * scale * g;
            }
            for (b, g) in layer.biases.iter_mut().zip(&grads.biases[li]) {
                *b -= lr * scale * g;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    /// Total parameter count, for flat indexing in audits.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in &self.layers {
            if idx < l.weights.len() {
                return l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.biases.len() {
                return l.biases[idx];
            }
            idx -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in &mut self.layers {
            if idx < l.weights.len() {
                l.weights[idx] = value;
                return;
            }
            idx -= l.weights.len();
            if idx < l.biases.len() {
                l.biases[idx] = value;
                return;
            }
            idx -= l.biases.len();
        }
        panic!("parameter index out of range");
    }

    /// Flat gradient view matching [`QNetwork::get_param`] indexing.
    pub fn flatten_gradients(&self, grads: &Gradients) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for li in 0..self.layers.len() {
            out.extend_from_slice(&grads.weights[li]);
            out.extend_from_slice(&grads.biases[li]);
        }
        out
    }
}
