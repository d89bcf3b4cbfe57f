//! Minimal dense network with hand-written backprop and an Adam optimizer.
//! Parameters live in one flat vector per network so optimizer steps and
//! finite-difference checks can address them uniformly.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fully connected network with tanh hidden activations and a linear output
/// layer. `dims` lists every layer width including input and output.
/// Parameters are stored per layer as the weight matrix (row-major,
/// `out x in`) followed by the bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dims: Vec<usize>,
    pub params: Vec<f64>,
}

impl Mlp {
    /// Xavier-uniform initialization.
    pub fn new<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        assert!(dims.len() >= 2);
        let mut params = Vec::with_capacity(Self::param_count_for(dims));
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.random_range(-a..a));
            }
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self {
            dims: dims.to_vec(),
            params,
        }
    }

    pub fn param_count_for(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    fn layer_offset(&self, layer: usize) -> usize {
        Self::param_count_for(&self.dims[..=layer])
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_trace(x).0
    }

    /// Forward pass keeping every layer's activation for backprop.
    /// `trace[0]` is the input; `trace[l + 1]` is layer `l`'s output after
    /// its activation.
    pub fn forward_trace(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        assert_eq!(x.len(), self.input_dim());
        let layers = self.dims.len() - 1;
        let mut trace = Vec::with_capacity(layers + 1);
        trace.push(x.to_vec());
        for l in 0..layers {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let off = self.layer_offset(l);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let input = &trace[l];
            let mut z = vec![0.0; n_out];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = b[o];
                for (wi, xi) in row.iter().zip(input) {
                    acc += wi * xi;
                }
                *zo = acc;
            }
            if l + 1 < layers {
                for zo in &mut z {
                    *zo = zo.tanh();
                }
            }
            trace.push(z);
        }
        (trace.last().unwrap().clone(), trace)
    }

    /// Accumulates parameter gradients for one sample given dLoss/dOutput.
    pub fn backward(&self, trace: &[Vec<f64>], d_out: &[f64], grads: &mut [f64]) {
        assert_eq!(grads.len(), self.param_count());
        let layers = self.dims.len() - 1;
        let mut delta = d_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let off = self.layer_offset(l);
            // Hidden layers pass through tanh; fold its derivative in.
            if l + 1 < layers {
                for (d, a) in delta.iter_mut().zip(&trace[l + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let input = &trace[l];
            let (gw, gb) = grads[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for o in 0..n_out {
                let d = delta[o];
                gb[o] += d;
                let row = &mut gw[o * n_in..(o + 1) * n_in];
                for (g, xi) in row.iter_mut().zip(input) {
                    *g += d * xi;
                }
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                let mut d_in = vec![0.0; n_in];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    for (di, wi) in d_in.iter_mut().zip(row) {
                        *di += d * wi;
                    }
                }
                delta = d_in;
            }
        }
    }
}

/// Adam with the usual bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(learning_rate: f64, params: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; params],
            v: vec![0.0; params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(params.len(), grads.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Actor-critic pair: the actor emits categorical logits over the action
/// set, the critic a scalar state value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub actor: Mlp,
    pub critic: Mlp,
}

/// Hidden widths of the default actor (three layers) and critic (two).
pub const ACTOR_HIDDEN: [usize; 3] = [128, 128, 128];
pub const CRITIC_HIDDEN: [usize; 2] = [128, 128];

impl PolicyNet {
    pub fn new<R: Rng>(obs_dim: usize, action_count: usize, rng: &mut R) -> Self {
        Self::with_sizes(obs_dim, action_count, &ACTOR_HIDDEN, &CRITIC_HIDDEN, rng)
    }

    pub fn with_sizes<R: Rng>(
        obs_dim: usize,
        action_count: usize,
        actor_hidden: &[usize],
        critic_hidden: &[usize],
        rng: &mut R,
    ) -> Self {
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend_from_slice(actor_hidden);
        actor_dims.push(action_count);
        let mut critic_dims = vec![obs_dim];
        critic_dims.extend_from_slice(critic_hidden);
        critic_dims.push(1);
        Self {
            actor: Mlp::new(&actor_dims, rng),
            critic: Mlp::new(&critic_dims, rng),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn action_count(&self) -> usize {
        self.actor.output_dim()
    }

    /// Log-probabilities of every action under the current policy.
    pub fn log_probs(&self, obs: &[f64]) -> Vec<f64> {
        log_softmax(&self.actor.forward(obs))
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.critic.forward(obs)[0]
    }

    /// Samples an action; returns `(action, log_prob, value)`.
    pub fn act<R: Rng>(&self, obs: &[f64], rng: &mut R) -> (usize, f64, f64) {
        let logp = self.log_probs(obs);
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut action = logp.len() - 1;
        for (i, lp) in logp.iter().enumerate() {
            cum += lp.exp();
            if u < cum {
                action = i;
                break;
            }
        }
        (action, logp[action], self.value(obs))
    }

    /// Deterministic argmax action, ties to the smallest index.
    pub fn act_greedy(&self, obs: &[f64]) -> (usize, f64, f64) {
        let logp = self.log_probs(obs);
        let action = logp
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        (action, logp[action], self.value(obs))
    }
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|l| l - log_sum).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).iter().map(|l| l.exp()).collect()
}
