//! Convolution, pooling, and batch normalization nodes.

use ndarray::{Array1, Array2, Array4, ArrayD, ArrayView4, Axis, Ix1, Ix4};

use super::{BackwardOp, GradSink, Tensor, Values};

/// Output spatial size of a convolution.
pub fn conv2d_output_hw(
    (h, w): (usize, usize),
    (kh, kw): (usize, usize),
    (sh, sw): (usize, usize),
    (ph, pw): (usize, usize),
) -> (usize, usize) {
    assert!(h + 2 * ph >= kh && w + 2 * pw >= kw, "conv kernel larger than padded input");
    ((h + 2 * ph - kh) / sh + 1, (w + 2 * pw - kw) / sw + 1)
}

/// Per-channel mean and (biased) variance of one batch, as used for the
/// normalization itself and for the running-statistics update.
#[derive(Debug, Clone)]
pub struct BatchNormStats {
    pub mean: Array1<f64>,
    pub var: Array1<f64>,
}

/// Lay out all receptive fields of one sample as columns:
/// `(ci*kh*kw, ho*wo)`.
fn im2col(
    x: &ArrayView4<'_, f64>,
    n: usize,
    (kh, kw): (usize, usize),
    (sh, sw): (usize, usize),
    (ph, pw): (usize, usize),
    (ho, wo): (usize, usize),
) -> Array2<f64> {
    let (_, ci, h, w) = x.dim();
    let mut cols = Array2::<f64>::zeros((ci * kh * kw, ho * wo));
    for c in 0..ci {
        for ki in 0..kh {
            for kj in 0..kw {
                let row = (c * kh + ki) * kw + kj;
                for oh in 0..ho {
                    let iy = (oh * sh + ki) as isize - ph as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for ow in 0..wo {
                        let ix = (ow * sw + kj) as isize - pw as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        cols[[row, oh * wo + ow]] = x[[n, c, iy as usize, ix as usize]];
                    }
                }
            }
        }
    }
    cols
}

/// Scatter column gradients back onto the padded input of one sample.
fn col2im_accumulate(
    dcols: &Array2<f64>,
    dx: &mut ndarray::ArrayViewMut4<'_, f64>,
    n: usize,
    (kh, kw): (usize, usize),
    (sh, sw): (usize, usize),
    (ph, pw): (usize, usize),
    (ho, wo): (usize, usize),
) {
    let (_, ci, h, w) = dx.dim();
    for c in 0..ci {
        for ki in 0..kh {
            for kj in 0..kw {
                let row = (c * kh + ki) * kw + kj;
                for oh in 0..ho {
                    let iy = (oh * sh + ki) as isize - ph as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for ow in 0..wo {
                        let ix = (ow * sw + kj) as isize - pw as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        dx[[n, c, iy as usize, ix as usize]] += dcols[[row, oh * wo + ow]];
                    }
                }
            }
        }
    }
}

fn conv2d_forward(
    x: &ArrayView4<'_, f64>,
    w: &ndarray::ArrayView4<'_, f64>,
    b: &ndarray::ArrayView1<'_, f64>,
    stride: (usize, usize),
    pad: (usize, usize),
) -> Array4<f64> {
    let (batch, ci, h, wid) = x.dim();
    let (co, ci_w, kh, kw) = w.dim();
    assert_eq!(ci, ci_w, "conv2d: channel mismatch");
    assert_eq!(b.len(), co, "conv2d: bias length mismatch");
    let (ho, wo) = conv2d_output_hw((h, wid), (kh, kw), stride, pad);
    let w2 = w.to_shape((co, ci * kh * kw)).unwrap();
    let mut out = Array4::<f64>::zeros((batch, co, ho, wo));
    for n in 0..batch {
        let cols = im2col(x, n, (kh, kw), stride, pad, (ho, wo));
        let y = w2.dot(&cols); // (co, ho*wo)
        let mut out_n = out.index_axis_mut(Axis(0), n);
        for c in 0..co {
            let bias = b[c];
            let mut plane = out_n.index_axis_mut(Axis(0), c);
            let src = y.row(c);
            for (dst, &v) in plane.iter_mut().zip(src.iter()) {
                *dst = v + bias;
            }
        }
    }
    out
}

impl Tensor {
    /// 2-d convolution of `(n,ci,h,w)` with weights `(co,ci,kh,kw)` and bias
    /// `(co,)`, zero padding. Columns are rebuilt during the backward pass
    /// instead of being cached.
    pub fn conv2d(
        &self,
        weight: &Tensor,
        bias: &Tensor,
        stride: (usize, usize),
        pad: (usize, usize),
    ) -> Tensor {
        self.same_graph(weight);
        self.same_graph(bias);
        let value = {
            let x = self.value();
            let w = weight.value();
            let b = bias.value();
            let x4 = x.view().into_dimensionality::<Ix4>().expect("conv2d input 4-d");
            let w4 = w.view().into_dimensionality::<Ix4>().expect("conv2d weight 4-d");
            let b1 = b.view().into_dimensionality::<Ix1>().expect("conv2d bias 1-d");
            conv2d_forward(&x4, &w4, &b1, stride, pad).into_dyn()
        };
        let (px, pw, pb) = (self.id, weight.id, bias.id);
        let needs = self.needs_grad() || weight.needs_grad() || bias.needs_grad();
        self.graph.push_custom(value, needs, move |_| {
            Box::new(move |vals: &Values, g: &ArrayD<f64>, sink: &mut GradSink| {
                let x = vals.get(px).view().into_dimensionality::<Ix4>().unwrap();
                let w = vals.get(pw).view().into_dimensionality::<Ix4>().unwrap();
                let g4 = g.view().into_dimensionality::<Ix4>().unwrap();
                let (batch, ci, _, _) = x.dim();
                let (co, _, kh, kw) = w.dim();
                let (_, _, ho, wo) = g4.dim();
                let w2 = w.to_shape((co, ci * kh * kw)).unwrap();
                let mut dx = Array4::<f64>::zeros(x.raw_dim());
                let mut dw2 = Array2::<f64>::zeros((co, ci * kh * kw));
                let mut db = Array1::<f64>::zeros(co);
                for n in 0..batch {
                    let gn = g4
                        .index_axis(Axis(0), n)
                        .to_shape((co, ho * wo))
                        .unwrap()
                        .to_owned();
                    let cols = im2col(&x, n, (kh, kw), stride, pad, (ho, wo));
                    dw2 += &gn.dot(&cols.t());
                    let dcols = w2.t().dot(&gn);
                    col2im_accumulate(
                        &dcols,
                        &mut dx.view_mut(),
                        n,
                        (kh, kw),
                        stride,
                        pad,
                        (ho, wo),
                    );
                    db += &gn.sum_axis(Axis(1));
                }
                sink.add(px, dx.into_dyn());
                sink.add(
                    pw,
                    dw2.into_shape_with_order((co, ci, kh, kw)).unwrap().into_dyn(),
                );
                sink.add(pb, db.into_dyn());
            }) as BackwardOp
        })
    }

    /// 2x2 max pooling with stride 2 (ties resolve to the first element in
    /// row-major scan order).
    pub fn max_pool2d(&self) -> Tensor {
        let (value, argmax) = {
            let x = self.value();
            let x4 = x.view().into_dimensionality::<Ix4>().expect("max_pool2d input 4-d");
            let (n, c, h, w) = x4.dim();
            assert!(h % 2 == 0 && w % 2 == 0, "max_pool2d requires even spatial dims, got {h}x{w}");
            let (ho, wo) = (h / 2, w / 2);
            let mut out = Array4::<f64>::zeros((n, c, ho, wo));
            let mut argmax = vec![0u32; n * c * ho * wo];
            let mut k = 0usize;
            for ni in 0..n {
                for ci in 0..c {
                    for oh in 0..ho {
                        for ow in 0..wo {
                            let mut best = f64::NEG_INFINITY;
                            let mut best_idx = 0u32;
                            for di in 0..2 {
                                for dj in 0..2 {
                                    let (iy, ix) = (2 * oh + di, 2 * ow + dj);
                                    let v = x4[[ni, ci, iy, ix]];
                                    if v > best {
                                        best = v;
                                        best_idx = (iy * w + ix) as u32;
                                    }
                                }
                            }
                            out[[ni, ci, oh, ow]] = best;
                            argmax[k] = best_idx;
                            k += 1;
                        }
                    }
                }
            }
            (out.into_dyn(), argmax)
        };
        let px = self.id;
        let in_shape = self.shape();
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            Box::new(move |_vals: &Values, g: &ArrayD<f64>, sink: &mut GradSink| {
                let (n, c, h, w) = (in_shape[0], in_shape[1], in_shape[2], in_shape[3]);
                let mut dx = Array4::<f64>::zeros((n, c, h, w));
                let g4 = g.view().into_dimensionality::<Ix4>().unwrap();
                let (_, _, ho, wo) = g4.dim();
                let mut k = 0usize;
                for ni in 0..n {
                    for ci in 0..c {
                        for oh in 0..ho {
                            for ow in 0..wo {
                                let flat = argmax[k] as usize;
                                dx[[ni, ci, flat / w, flat % w]] += g4[[ni, ci, oh, ow]];
                                k += 1;
                            }
                        }
                    }
                }
                sink.add(px, dx.into_dyn());
            }) as BackwardOp
        })
    }

    /// Batch normalization over `(n,h,w)` per channel using statistics of the
    /// current batch; returns those statistics for the caller's running
    /// averages.
    pub fn batch_norm2d_train(
        &self,
        gamma: &Tensor,
        beta: &Tensor,
        eps: f64,
    ) -> (Tensor, BatchNormStats) {
        self.same_graph(gamma);
        self.same_graph(beta);
        let x = self.array();
        let x4 = x.view().into_dimensionality::<Ix4>().expect("batch_norm2d input 4-d");
        let (n, c, h, w) = x4.dim();
        let count = (n * h * w) as f64;
        let mut mean = Array1::<f64>::zeros(c);
        let mut var = Array1::<f64>::zeros(c);
        for ci in 0..c {
            let plane = x4.index_axis(Axis(1), ci);
            let m = plane.sum() / count;
            mean[ci] = m;
            var[ci] = plane.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / count;
        }
        let stats = BatchNormStats {
            mean: mean.clone(),
            var: var.clone(),
        };
        let inv_std: Array1<f64> = var.mapv(|v| 1.0 / (v + eps).sqrt());
        let out = bn_affine(&x4, &mean, &inv_std, &gamma.value(), &beta.value());
        let (px, pg, pb) = (self.id, gamma.id, beta.id);
        let needs = self.needs_grad() || gamma.needs_grad() || beta.needs_grad();
        let t = self.graph.push_custom(out.into_dyn(), needs, move |_| {
            Box::new(move |vals: &Values, g: &ArrayD<f64>, sink: &mut GradSink| {
                let x = vals.get(px).view().into_dimensionality::<Ix4>().unwrap();
                let gamma = vals.get(pg).view().into_dimensionality::<Ix1>().unwrap();
                let g4 = g.view().into_dimensionality::<Ix4>().unwrap();
                let (n, c, h, w) = x.dim();
                let count = (n * h * w) as f64;
                let mut dx = Array4::<f64>::zeros(x.raw_dim());
                let mut dgamma = Array1::<f64>::zeros(c);
                let mut dbeta = Array1::<f64>::zeros(c);
                for ci in 0..c {
                    let xs = x.index_axis(Axis(1), ci);
                    let gs = g4.index_axis(Axis(1), ci);
                    let sum_g: f64 = gs.sum();
                    let mut sum_gxh = 0.0;
                    for (gv, xv) in gs.iter().zip(xs.iter()) {
                        sum_gxh += gv * (xv - mean[ci]) * inv_std[ci];
                    }
                    dgamma[ci] = sum_gxh;
                    dbeta[ci] = sum_g;
                    let scale = gamma[ci] * inv_std[ci];
                    let mean_g = sum_g / count;
                    let mean_gxh = sum_gxh / count;
                    let mut dxs = dx.index_axis_mut(Axis(1), ci);
                    for ((dv, gv), xv) in dxs.iter_mut().zip(gs.iter()).zip(xs.iter()) {
                        let xh = (xv - mean[ci]) * inv_std[ci];
                        *dv = scale * (gv - mean_g - xh * mean_gxh);
                    }
                }
                sink.add(px, dx.into_dyn());
                sink.add(pg, dgamma.into_dyn());
                sink.add(pb, dbeta.into_dyn());
            }) as BackwardOp
        });
        (t, stats)
    }

    /// Batch normalization with fixed (running) statistics.
    pub fn batch_norm2d_eval(
        &self,
        gamma: &Tensor,
        beta: &Tensor,
        mean: &Array1<f64>,
        var: &Array1<f64>,
        eps: f64,
    ) -> Tensor {
        self.same_graph(gamma);
        self.same_graph(beta);
        let x = self.array();
        let x4 = x.view().into_dimensionality::<Ix4>().expect("batch_norm2d input 4-d");
        let inv_std: Array1<f64> = var.mapv(|v| 1.0 / (v + eps).sqrt());
        let out = bn_affine(&x4, mean, &inv_std, &gamma.value(), &beta.value());
        let (px, pg, pb) = (self.id, gamma.id, beta.id);
        let needs = self.needs_grad() || gamma.needs_grad() || beta.needs_grad();
        let mean = mean.clone();
        self.graph.push_custom(out.into_dyn(), needs, move |_| {
            Box::new(move |vals: &Values, g: &ArrayD<f64>, sink: &mut GradSink| {
                let x = vals.get(px).view().into_dimensionality::<Ix4>().unwrap();
                let gamma = vals.get(pg).view().into_dimensionality::<Ix1>().unwrap();
                let g4 = g.view().into_dimensionality::<Ix4>().unwrap();
                let c = x.dim().1;
                let mut dx = Array4::<f64>::zeros(x.raw_dim());
                let mut dgamma = Array1::<f64>::zeros(c);
                let mut dbeta = Array1::<f64>::zeros(c);
                for ci in 0..c {
                    let xs = x.index_axis(Axis(1), ci);
                    let gs = g4.index_axis(Axis(1), ci);
                    dbeta[ci] = gs.sum();
                    let mut sum_gxh = 0.0;
                    for (gv, xv) in gs.iter().zip(xs.iter()) {
                        sum_gxh += gv * (xv - mean[ci]) * inv_std[ci];
                    }
                    dgamma[ci] = sum_gxh;
                    let scale = gamma[ci] * inv_std[ci];
                    let mut dxs = dx.index_axis_mut(Axis(1), ci);
                    for (dv, gv) in dxs.iter_mut().zip(gs.iter()) {
                        *dv = scale * gv;
                    }
                }
                sink.add(px, dx.into_dyn());
                sink.add(pg, dgamma.into_dyn());
                sink.add(pb, dbeta.into_dyn());
            }) as BackwardOp
        })
    }
}

fn bn_affine(
    x: &ArrayView4<'_, f64>,
    mean: &Array1<f64>,
    inv_std: &Array1<f64>,
    gamma: &ArrayD<f64>,
    beta: &ArrayD<f64>,
) -> Array4<f64> {
    let gamma = gamma.view().into_dimensionality::<Ix1>().expect("gamma 1-d");
    let beta = beta.view().into_dimensionality::<Ix1>().expect("beta 1-d");
    let c = x.dim().1;
    assert_eq!(gamma.len(), c, "batch_norm2d: gamma length mismatch");
    assert_eq!(beta.len(), c, "batch_norm2d: beta length mismatch");
    let mut out = x.to_owned();
    for ci in 0..c {
        let (m, s, ga, be) = (mean[ci], inv_std[ci], gamma[ci], beta[ci]);
        out.index_axis_mut(Axis(1), ci)
            .mapv_inplace(|v| (v - m) * s * ga + be);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::Graph;
    use super::*;
    use ndarray::{arr1, Array4, ArrayD};

    #[test]
    fn conv2d_identity_kernel_preserves_input() {
        let g = Graph::inference();
        let x = Array4::from_shape_fn((1, 1, 4, 5), |(_, _, i, j)| (i * 5 + j) as f64);
        let mut w = Array4::<f64>::zeros((1, 1, 3, 3));
        w[[0, 0, 1, 1]] = 1.0;
        let xt = g.constant(x.clone().into_dyn());
        let wt = g.constant(w.into_dyn());
        let bt = g.constant(arr1(&[0.0]).into_dyn());
        let y = xt.conv2d(&wt, &bt, (1, 1), (1, 1));
        assert_eq!(y.array(), x.into_dyn());
    }

    #[test]
    fn conv2d_known_sum_kernel() {
        let g = Graph::inference();
        let x = Array4::from_shape_fn((1, 1, 3, 3), |(_, _, i, j)| (i * 3 + j) as f64);
        let w = Array4::from_elem((1, 1, 3, 3), 1.0);
        let xt = g.constant(x.into_dyn());
        let wt = g.constant(w.into_dyn());
        let bt = g.constant(arr1(&[2.0]).into_dyn());
        let y = xt.conv2d(&wt, &bt, (1, 1), (0, 0));
        assert_eq!(y.shape(), vec![1, 1, 1, 1]);
        assert_eq!(y.scalar(), 36.0 + 2.0);
    }

    #[test]
    fn conv2d_stride_and_output_shape() {
        assert_eq!(conv2d_output_hw((32, 100), (3, 3), (2, 2), (1, 1)), (16, 50));
        assert_eq!(conv2d_output_hw((8, 25), (3, 3), (2, 1), (1, 1)), (4, 25));
    }

    #[test]
    fn max_pool_takes_window_maxima_and_routes_grads() {
        let g = Graph::recording_eval();
        let mut x = Array4::<f64>::zeros((1, 1, 2, 4));
        x[[0, 0, 0, 0]] = 3.0;
        x[[0, 0, 1, 1]] = 1.0;
        x[[0, 0, 0, 2]] = -5.0;
        x[[0, 0, 0, 3]] = -1.0;
        x[[0, 0, 1, 2]] = -2.0;
        x[[0, 0, 1, 3]] = -7.0;
        let xt = g.leaf(x.into_dyn());
        let y = xt.max_pool2d();
        assert_eq!(y.array().as_slice().unwrap(), &[3.0, -1.0]);
        let loss = y.sum_all();
        let grads = g.backward(&loss);
        let dx = grads.wrt(&xt).unwrap();
        let mut expect = ArrayD::<f64>::zeros(ndarray::IxDyn(&[1, 1, 2, 4]));
        expect[[0, 0, 0, 0]] = 1.0;
        expect[[0, 0, 0, 3]] = 1.0;
        assert_eq!(dx, &expect);
    }

    #[test]
    fn batch_norm_train_normalizes_channels() {
        let g = Graph::training(0);
        let x = Array4::from_shape_fn((2, 3, 2, 2), |(n, c, i, j)| {
            (n * 24 + c * 8 + i * 2 + j) as f64 * (c as f64 + 1.0)
        });
        let xt = g.leaf(x.into_dyn());
        let gamma = g.constant(arr1(&[1.0, 1.0, 1.0]).into_dyn());
        let beta = g.constant(arr1(&[0.0, 0.0, 0.0]).into_dyn());
        let (y, stats) = xt.batch_norm2d_train(&gamma, &beta, 1e-5);
        let y4 = y.array().into_dimensionality::<Ix4>().unwrap();
        for c in 0..3 {
            let plane = y4.index_axis(Axis(1), c);
            let mean = plane.sum() / 8.0;
            let var = plane.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 8.0;
            assert!(mean.abs() < 1e-10, "channel {c} mean {mean}");
            assert!((var - 1.0).abs() < 1e-4, "channel {c} var {var}");
        }
        assert_eq!(stats.mean.len(), 3);
    }

    #[test]
    fn batch_norm_eval_uses_given_statistics() {
        let g = Graph::inference();
        let x = Array4::from_elem((1, 1, 2, 2), 10.0);
        let xt = g.constant(x.into_dyn());
        let gamma = g.constant(arr1(&[2.0]).into_dyn());
        let beta = g.constant(arr1(&[1.0]).into_dyn());
        let y = xt.batch_norm2d_eval(&gamma, &beta, &arr1(&[4.0]), &arr1(&[9.0]), 0.0);
        // (10 - 4) / 3 * 2 + 1 = 5
        for v in y.array().iter() {
            assert!((v - 5.0).abs() < 1e-12);
        }
    }
}
