//! Parameterized layers.
//!
//! Each layer owns its parameter arrays and registers them on the active
//! [`Graph`](crate::tensor::Graph) by hierarchical name at forward time, so
//! one training step sees every parameter exactly once regardless of weight
//! sharing. `visit`/`visit_mut` expose parameters (and, separately, the
//! running statistics of batch normalization) to the optimizer and the
//! checkpoint writer in a fixed order.

use std::cell::RefCell;

use ndarray::{Array1, ArrayD, IxDyn};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::tensor::{BatchNormStats, Graph, Tensor};

/// Read-only parameter walk: `(name, value)` in declaration order.
pub type Visit<'a, 'b> = &'a mut dyn FnMut(&str, &ArrayD<f64>);
/// Mutable parameter walk for optimizer updates and checkpoint restore.
pub type VisitMut<'a, 'b> = &'a mut dyn FnMut(&str, &mut ArrayD<f64>);

/// Uniform init on `[-bound, bound]`.
pub fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], bound: f64) -> ArrayD<f64> {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
    ArrayD::from_shape_vec(IxDyn(shape), data).unwrap()
}

/// Fully connected layer; weight is stored `(in, out)` so the forward pass is
/// a plain right-multiplication and accepts `(.., in)` of rank 2 or 3.
pub struct Linear {
    name: String,
    pub weight: ArrayD<f64>,
    pub bias: Option<ArrayD<f64>>,
}

impl Linear {
    pub fn new(name: impl Into<String>, in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        Self {
            name: name.into(),
            weight: uniform(rng, &[in_dim, out_dim], bound),
            bias: Some(ArrayD::zeros(IxDyn(&[out_dim]))),
        }
    }

    pub fn new_no_bias(
        name: impl Into<String>,
        in_dim: usize,
        out_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut l = Self::new(name, in_dim, out_dim, rng);
        l.bias = None;
        l
    }

    pub fn forward(&self, g: &Graph, x: &Tensor) -> Tensor {
        let w = g.param(&format!("{}.weight", self.name), &self.weight);
        let y = x.matmul(&w);
        match &self.bias {
            Some(b) => y.add_bcast(&g.param(&format!("{}.bias", self.name), b)),
            None => y,
        }
    }

    pub fn visit(&self, f: Visit) {
        f(&format!("{}.weight", self.name), &self.weight);
        if let Some(b) = &self.bias {
            f(&format!("{}.bias", self.name), b);
        }
    }

    pub fn visit_mut(&mut self, f: VisitMut) {
        f(&format!("{}.weight", self.name), &mut self.weight);
        if let Some(b) = &mut self.bias {
            f(&format!("{}.bias", self.name), b);
        }
    }
}

/// 2-d convolution with owned weight `(out, in, kh, kw)` and bias.
pub struct Conv2d {
    name: String,
    pub weight: ArrayD<f64>,
    pub bias: ArrayD<f64>,
    pub stride: (usize, usize),
    pub pad: (usize, usize),
}

impl Conv2d {
    pub fn new(
        name: impl Into<String>,
        in_ch: usize,
        out_ch: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        pad: (usize, usize),
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let fan_in = (in_ch * kernel.0 * kernel.1) as f64;
        let bound = (6.0 / fan_in).sqrt();
        Self {
            name: name.into(),
            weight: uniform(rng, &[out_ch, in_ch, kernel.0, kernel.1], bound),
            bias: ArrayD::zeros(IxDyn(&[out_ch])),
            stride,
            pad,
        }
    }

    pub fn forward(&self, g: &Graph, x: &Tensor) -> Tensor {
        let w = g.param(&format!("{}.weight", self.name), &self.weight);
        let b = g.param(&format!("{}.bias", self.name), &self.bias);
        x.conv2d(&w, &b, self.stride, self.pad)
    }

    pub fn visit(&self, f: Visit) {
        f(&format!("{}.weight", self.name), &self.weight);
        f(&format!("{}.bias", self.name), &self.bias);
    }

    pub fn visit_mut(&mut self, f: VisitMut) {
        f(&format!("{}.weight", self.name), &mut self.weight);
        f(&format!("{}.bias", self.name), &mut self.bias);
    }
}

/// Per-channel batch normalization with running statistics for inference.
pub struct BatchNorm2d {
    name: String,
    pub gamma: ArrayD<f64>,
    pub beta: ArrayD<f64>,
    running: RefCell<BatchNormStats>,
    pub momentum: f64,
    pub eps: f64,
}

impl BatchNorm2d {
    pub fn new(name: impl Into<String>, channels: usize) -> Self {
        Self {
            name: name.into(),
            gamma: ArrayD::ones(IxDyn(&[channels])),
            beta: ArrayD::zeros(IxDyn(&[channels])),
            running: RefCell::new(BatchNormStats {
                mean: Array1::zeros(channels),
                var: Array1::ones(channels),
            }),
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    pub fn forward(&self, g: &Graph, x: &Tensor) -> Tensor {
        let gamma = g.param(&format!("{}.gamma", self.name), &self.gamma);
        let beta = g.param(&format!("{}.beta", self.name), &self.beta);
        if g.train_mode() {
            let (y, stats) = x.batch_norm2d_train(&gamma, &beta, self.eps);
            let mut running = self.running.borrow_mut();
            let m = self.momentum;
            running.mean = &running.mean * (1.0 - m) + &stats.mean * m;
            running.var = &running.var * (1.0 - m) + &stats.var * m;
            y
        } else {
            let running = self.running.borrow();
            x.batch_norm2d_eval(&gamma, &beta, &running.mean, &running.var, self.eps)
        }
    }

    pub fn visit(&self, f: Visit) {
        f(&format!("{}.gamma", self.name), &self.gamma);
        f(&format!("{}.beta", self.name), &self.beta);
    }

    pub fn visit_mut(&mut self, f: VisitMut) {
        f(&format!("{}.gamma", self.name), &mut self.gamma);
        f(&format!("{}.beta", self.name), &mut self.beta);
    }

    /// Running statistics, saved alongside parameters in checkpoints.
    pub fn visit_buffers(&self, f: Visit) {
        let running = self.running.borrow();
        f(
            &format!("{}.running_mean", self.name),
            &running.mean.clone().into_dyn(),
        );
        f(
            &format!("{}.running_var", self.name),
            &running.var.clone().into_dyn(),
        );
    }

    pub fn set_buffers(&self, mean: ArrayD<f64>, var: ArrayD<f64>) {
        let mut running = self.running.borrow_mut();
        running.mean = mean.into_dimensionality().expect("running mean 1-d");
        running.var = var.into_dimensionality().expect("running var 1-d");
    }

    pub fn buffer_names(&self) -> (String, String) {
        (
            format!("{}.running_mean", self.name),
            format!("{}.running_var", self.name),
        )
    }
}

/// Layer normalization over the last axis with learned scale and shift.
pub struct LayerNorm {
    name: String,
    pub gamma: ArrayD<f64>,
    pub beta: ArrayD<f64>,
    pub eps: f64,
}

impl LayerNorm {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            gamma: ArrayD::ones(IxDyn(&[dim])),
            beta: ArrayD::zeros(IxDyn(&[dim])),
            eps: 1e-6,
        }
    }

    pub fn forward(&self, g: &Graph, x: &Tensor) -> Tensor {
        let gamma = g.param(&format!("{}.gamma", self.name), &self.gamma);
        let beta = g.param(&format!("{}.beta", self.name), &self.beta);
        x.layer_norm_last(self.eps).mul_bcast(&gamma).add_bcast(&beta)
    }

    pub fn visit(&self, f: Visit) {
        f(&format!("{}.gamma", self.name), &self.gamma);
        f(&format!("{}.beta", self.name), &self.beta);
    }

    pub fn visit_mut(&mut self, f: VisitMut) {
        f(&format!("{}.gamma", self.name), &mut self.gamma);
        f(&format!("{}.beta", self.name), &mut self.beta);
    }
}

/// Token embedding table `(vocab, dim)`.
pub struct Embedding {
    name: String,
    pub table: ArrayD<f64>,
}

impl Embedding {
    pub fn new(name: impl Into<String>, vocab: usize, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (3.0 / dim as f64).sqrt();
        Self {
            name: name.into(),
            table: uniform(rng, &[vocab, dim], bound),
        }
    }

    pub fn forward(&self, g: &Graph, ids: &ndarray::Array2<u32>) -> Tensor {
        g.param(&format!("{}.table", self.name), &self.table).embedding(ids)
    }

    pub fn visit(&self, f: Visit) {
        f(&format!("{}.table", self.name), &self.table);
    }

    pub fn visit_mut(&mut self, f: VisitMut) {
        f(&format!("{}.table", self.name), &mut self.table);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr2, Array4};
    use rand::SeedableRng;

    #[test]
    fn linear_applies_weight_and_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut lin = Linear::new("l", 2, 3, &mut rng);
        lin.weight = arr2(&[[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]]).into_dyn();
        lin.bias = Some(ndarray::arr1(&[10.0, 20.0, 30.0]).into_dyn());
        let g = Graph::inference();
        let x = g.constant(arr2(&[[1.0, 2.0]]).into_dyn());
        let y = lin.forward(&g, &x);
        assert_eq!(y.array(), arr2(&[[11.0, 22.0, 30.0]]).into_dyn());
    }

    #[test]
    fn linear_broadcasts_over_batch_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let lin = Linear::new("l", 4, 2, &mut rng);
        let g = Graph::inference();
        let x = g.constant(ArrayD::zeros(IxDyn(&[3, 5, 4])));
        let y = lin.forward(&g, &x);
        assert_eq!(y.shape(), vec![3, 5, 2]);
    }

    #[test]
    fn batch_norm_updates_running_stats_in_train_mode_only() {
        let bn = BatchNorm2d::new("bn", 2);
        let x = Array4::from_shape_fn((2, 2, 2, 2), |(n, c, i, j)| (n + c + i + j) as f64);

        let g = Graph::inference();
        let xt = g.constant(x.clone().into_dyn());
        bn.forward(&g, &xt);
        assert_eq!(bn.running.borrow().mean, Array1::zeros(2));

        let g = Graph::training(0);
        let xt = g.constant(x.into_dyn());
        bn.forward(&g, &xt);
        let mean = bn.running.borrow().mean.clone();
        assert!(mean[0] > 0.0 && mean[1] > mean[0]);
    }

    #[test]
    fn visit_names_are_prefixed_and_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let conv = Conv2d::new("stage.conv", 1, 2, (3, 3), (1, 1), (1, 1), &mut rng);
        let mut names = Vec::new();
        conv.visit(&mut |n, _| names.push(n.to_string()));
        assert_eq!(names, vec!["stage.conv.weight", "stage.conv.bias"]);
    }

    #[test]
    fn layer_norm_affine_round_trip() {
        let ln = LayerNorm::new("ln", 3);
        let g = Graph::inference();
        let x = g.constant(arr2(&[[1.0, 2.0, 3.0]]).into_dyn());
        let y = ln.forward(&g, &x).array();
        let mean: f64 = y.iter().sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-9);
    }
}
