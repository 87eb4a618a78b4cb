//! One-hidden-layer tanh perceptron with a softmax cross-entropy head.

use serde::{Deserialize, Serialize};

use crate::rng::Rng;

use super::N_CLASSES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// `hidden x inputs`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `classes x hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    /// Mean cross-entropy before each epoch's update, plus the final value.
    pub train_loss: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let l1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + N_CLASSES) as f64).sqrt();
        Mlp {
            inputs,
            hidden,
            w1: (0..hidden * inputs).map(|_| rng.uniform(-l1, l1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..N_CLASSES * hidden).map(|_| rng.uniform(-l2, l2)).collect(),
            b2: vec![0.0; N_CLASSES],
            train_loss: Vec::new(),
        }
    }

    pub fn fit(rows: &[Vec<f64>], labels: &[usize], hidden: usize, epochs: usize, lr: f64, seed: u64) -> Self {
        let inputs = rows.first().map_or(0, Vec::len);
        let mut net = Mlp::init(inputs, hidden, seed);
        let mut history = Vec::with_capacity(epochs + 1);
        let mut params = net.parameters();
        for _ in 0..epochs {
            let (loss, grad) = net.loss_and_gradient(rows, labels);
            history.push(loss);
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= lr * g;
            }
            net.set_parameters(&params);
        }
        history.push(net.loss(rows, labels));
        net.train_loss = history;
        net
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
                (self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()).tanh()
            })
            .collect()
    }

    fn logits_from_hidden(&self, a: &[f64]) -> [f64; N_CLASSES] {
        let mut z = [0.0; N_CLASSES];
        for (k, zk) in z.iter_mut().enumerate() {
            let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
            *zk = self.b2[k] + row.iter().zip(a).map(|(w, v)| w * v).sum::<f64>();
        }
        z
    }

    pub fn logits(&self, x: &[f64]) -> [f64; N_CLASSES] {
        self.logits_from_hidden(&self.hidden_activations(x))
    }

    pub fn probabilities(&self, x: &[f64]) -> [f64; N_CLASSES] {
        softmax(&self.logits(x))
    }

    pub fn loss(&self, rows: &[Vec<f64>], labels: &[usize]) -> f64 {
        rows.iter()
            .zip(labels)
            .map(|(x, &y)| -self.probabilities(x)[y].max(1e-300).ln())
            .sum::<f64>()
            / rows.len() as f64
    }

    /// Flattened as `w1, b1, w2, b2`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        let (n1, n2, n3) = (self.w1.len(), self.b1.len(), self.w2.len());
        self.w1.copy_from_slice(&p[..n1]);
        self.b1.copy_from_slice(&p[n1..n1 + n2]);
        self.w2.copy_from_slice(&p[n1 + n2..n1 + n2 + n3]);
        self.b2.copy_from_slice(&p[n1 + n2 + n3..]);
    }

    /// Mean cross-entropy and its gradient in `parameters()` layout.
    pub fn loss_and_gradient(&self, rows: &[Vec<f64>], labels: &[usize]) -> (f64, Vec<f64>) {
        let (d, h) = (self.inputs, self.hidden);
        let mut gw1 = vec![0.0; h * d];
        let mut gb1 = vec![0.0; h];
        let mut gw2 = vec![0.0; N_CLASSES * h];
        let mut gb2 = vec![0.0; N_CLASSES];
        let mut loss = 0.0;
        let scale = 1.0 / rows.len() as f64;
        for (x, &y) in rows.iter().zip(labels) {
            let a = self.hidden_activations(x);
            let p = softmax(&self.logits_from_hidden(&a));
            loss -= p[y].max(1e-300).ln();
            let mut dz = p;
            dz[y] -= 1.0;
            let mut da = vec![0.0; h];
            for k in 0..N_CLASSES {
                gb2[k] += dz[k] * scale;
                for j in 0..h {
                    gw2[k * h + j] += dz[k] * a[j] * scale;
                    da[j] += dz[k] * self.w2[k * h + j];
                }
            }
            for j in 0..h {
                let dpre = da[j] * (1.0 - a[j] * a[j]) * scale;
                gb1[j] += dpre;
                for (g, &v) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *g += dpre * v;
                }
            }
        }
        (loss * scale, [gw1, gb1, gw2, gb2].concat())
    }
}

fn softmax(z: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = z.map(|v| (v - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}
