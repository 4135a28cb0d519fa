//! Finite-difference verification of reverse-mode gradients.
//!
//! Used by the test suites; lives in the library so integration tests can
//! drive it against full model pipelines.

use ndarray::ArrayD;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, Tensor};

/// Compare the tape gradient of a scalar loss against central finite
/// differences at `samples` randomly chosen coordinates of `inputs[wrt]`,
/// and return the worst relative error.
///
/// The error at one coordinate is `|analytic - numeric|` divided by
/// `max(|analytic|, |numeric|, 1e-4)`; the floor keeps finite-difference
/// roundoff on near-zero gradients from dominating while still exposing
/// structurally wrong gradients of small magnitude.
///
/// `build` must construct the same computation for every call; when
/// `train_seed` is `Some`, it runs on training-mode graphs reseeded
/// identically so stochastic layers repeat their draws.
pub fn gradient_check(
    inputs: &[ArrayD<f64>],
    wrt: usize,
    samples: usize,
    seed: u64,
    train_seed: Option<u64>,
    build: impl Fn(&Graph, &[Tensor]) -> Tensor,
) -> f64 {
    let recording = |train_seed: Option<u64>| match train_seed {
        Some(s) => Graph::training(s),
        None => Graph::recording_eval(),
    };
    let forward_only = |train_seed: Option<u64>| match train_seed {
        Some(s) => Graph::new(false, true, s),
        None => Graph::inference(),
    };

    let graph = recording(train_seed);
    let leaves: Vec<Tensor> = inputs.iter().map(|x| graph.leaf(x.clone())).collect();
    let loss = build(&graph, &leaves);
    let grads = graph.backward(&loss);
    let analytic = grads
        .wrt(&leaves[wrt])
        .cloned()
        .unwrap_or_else(|| ArrayD::zeros(inputs[wrt].raw_dim()));

    let len = inputs[wrt].len();
    let n = samples.min(len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = rand::seq::index::sample(&mut rng, len, n);

    let eval = |perturbed: &ArrayD<f64>| -> f64 {
        let g = forward_only(train_seed);
        let leaves: Vec<Tensor> = inputs
            .iter()
            .enumerate()
            .map(|(i, x)| g.leaf(if i == wrt { perturbed.clone() } else { x.clone() }))
            .collect();
        build(&g, &leaves).scalar()
    };

    let flat_analytic = analytic.as_standard_layout();
    let an_slice = flat_analytic.as_slice().unwrap();
    let base = inputs[wrt].as_standard_layout().to_owned();
    let base_slice = base.as_slice().unwrap();
    let mut worst: f64 = 0.0;
    for idx in coords.iter() {
        let x0 = base_slice[idx];
        let step = 1e-5 * x0.abs().max(1.0);
        let mut plus = base.clone();
        plus.as_slice_mut().unwrap()[idx] = x0 + step;
        let mut minus = base.clone();
        minus.as_slice_mut().unwrap()[idx] = x0 - step;
        let numeric = (eval(&plus) - eval(&minus)) / (2.0 * step);
        let an = an_slice[idx];
        let denom = an.abs().max(numeric.abs()).max(1e-4);
        worst = worst.max((an - numeric).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{ArrayD, IxDyn};
    use rand::Rng;

    fn random_array(shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ArrayD::from_shape_fn(IxDyn(shape), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn elementwise_chain_passes() {
        let x = random_array(&[3, 4], 1);
        let err = gradient_check(&[x], 0, 12, 7, None, |_g, leaves| {
            leaves[0].sigmoid().mul(&leaves[0]).relu().mean_all()
        });
        assert!(err < 1e-6, "rel err {err}");
    }

    #[test]
    fn matmul_softmax_chain_passes() {
        let a = random_array(&[4, 5], 2);
        let b = random_array(&[5, 3], 3);
        for wrt in 0..2 {
            let err = gradient_check(&[a.clone(), b.clone()], wrt, 10, 11, None, |_g, l| {
                l[0].matmul(&l[1]).softmax_last().layer_norm_last(1e-6).sum_all().scale(0.1)
            });
            assert!(err < 1e-6, "input {wrt}: rel err {err}");
        }
    }

    #[test]
    fn conv_pool_bn_chain_passes() {
        let x = random_array(&[2, 3, 6, 8], 4);
        let w = random_array(&[4, 3, 3, 3], 5);
        let b = random_array(&[4], 6);
        let gamma = random_array(&[4], 7).mapv(|v| v + 2.0);
        let beta = random_array(&[4], 8);
        let inputs = [x, w, b, gamma, beta];
        for wrt in 0..5 {
            let err = gradient_check(&inputs.to_vec(), wrt, 8, 13, None, |g, l| {
                let conv = l[0].conv2d(&l[1], &l[2], (1, 1), (1, 1));
                let (bn, _) = conv.batch_norm2d_train(&l[3], &l[4], 1e-5);
                bn.relu().max_pool2d().mean_all()
            });
            assert!(err < 1e-4, "input {wrt}: rel err {err}");
        }
    }

    #[test]
    fn grid_sample_passes_for_image_and_grid() {
        let img = random_array(&[1, 2, 6, 7], 9);
        // keep coordinates inside the image and away from kinks
        let grid = random_array(&[1, 3, 4, 2], 10).mapv(|v| 0.31 + 0.33 * v.abs());
        let inputs = [img, grid];
        for wrt in 0..2 {
            let err = gradient_check(&inputs.to_vec(), wrt, 10, 17, None, |_g, l| {
                l[0].grid_sample(&l[1]).mean_all()
            });
            assert!(err < 1e-4, "input {wrt}: rel err {err}");
        }
    }

    #[test]
    fn dropout_train_mode_is_reproducible_under_check() {
        let x = random_array(&[4, 8], 12);
        let err = gradient_check(&[x], 0, 10, 19, Some(99), |_g, l| {
            l[0].dropout(0.3).mean_all()
        });
        assert!(err < 1e-6, "rel err {err}");
    }

    #[test]
    fn deliberately_wrong_gradient_is_caught() {
        // sanity check on the harness itself: compare d(sum x^2) against an
        // op wired with the gradient of sum(x)
        let x = random_array(&[5], 20);
        let err = gradient_check(&[x], 0, 5, 23, None, |g, l| {
            let v = l[0].array();
            let pa = l[0].id();
            let wrong = g.push_custom(v.mapv(|t| t * t), true, move |_| {
                Box::new(move |_vals, grad, sink| sink.add(pa, grad.clone()))
            });
            wrong.sum_all()
        });
        assert!(err > 1e-2, "harness failed to flag a wrong gradient: {err}");
    }
}
