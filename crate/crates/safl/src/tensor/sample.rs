//! Bilinear sampling: the differentiable grid-sample node and the plain
//! resize built on the same kernel.
//!
//! Coordinates are normalized to `[0,1]` per axis with pixel centers at
//! `(i + 0.5) / n`; a normalized `x` maps to the continuous column
//! `u = x * w - 0.5`. Reads outside the image clamp to the border pixel,
//! which also makes the coordinate gradient vanish smoothly there.

use ndarray::{Array4, ArrayD, ArrayView3, ArrayView4, Ix4};

use super::{BackwardOp, GradSink, Tensor, Values};

#[derive(Clone, Copy)]
struct Corner {
    lo: usize,
    hi: usize,
    frac: f64,
}

/// Split a normalized coordinate into clamped neighbor indices and the
/// interpolation fraction.
fn corner(coord: f64, n: usize) -> Corner {
    let u = coord * n as f64 - 0.5;
    let floor = u.floor();
    let frac = u - floor;
    let i0 = floor as isize;
    let clamp = |i: isize| i.clamp(0, n as isize - 1) as usize;
    Corner {
        lo: clamp(i0),
        hi: clamp(i0 + 1),
        frac,
    }
}

/// Sample `image (n,c,h,w)` at `grid (n,ho,wo,2)` whose last axis holds
/// normalized `(x, y)`.
pub fn grid_sample_arrays(image: &ArrayView4<'_, f64>, grid: &ArrayView4<'_, f64>) -> Array4<f64> {
    let (n, c, h, w) = image.dim();
    let (ng, ho, wo, two) = grid.dim();
    assert_eq!(n, ng, "grid_sample: batch mismatch");
    assert_eq!(two, 2, "grid_sample: grid last axis must be (x, y)");
    let mut out = Array4::<f64>::zeros((n, c, ho, wo));
    for ni in 0..n {
        for oh in 0..ho {
            for ow in 0..wo {
                let cx = corner(grid[[ni, oh, ow, 0]], w);
                let cy = corner(grid[[ni, oh, ow, 1]], h);
                let (tx, ty) = (cx.frac, cy.frac);
                for ci in 0..c {
                    let p00 = image[[ni, ci, cy.lo, cx.lo]];
                    let p01 = image[[ni, ci, cy.lo, cx.hi]];
                    let p10 = image[[ni, ci, cy.hi, cx.lo]];
                    let p11 = image[[ni, ci, cy.hi, cx.hi]];
                    out[[ni, ci, oh, ow]] = (1.0 - ty) * ((1.0 - tx) * p00 + tx * p01)
                        + ty * ((1.0 - tx) * p10 + tx * p11);
                }
            }
        }
    }
    out
}

/// Resize `(c,h,w)` to `(c,out_h,out_w)` by sampling output pixel centers
/// with the kernel above.
pub fn resize_bilinear(image: &ArrayView3<'_, f64>, out_h: usize, out_w: usize) -> ndarray::Array3<f64> {
    let (c, h, w) = image.dim();
    let mut out = ndarray::Array3::<f64>::zeros((c, out_h, out_w));
    for oh in 0..out_h {
        let cy = corner((oh as f64 + 0.5) / out_h as f64, h);
        for ow in 0..out_w {
            let cx = corner((ow as f64 + 0.5) / out_w as f64, w);
            let (tx, ty) = (cx.frac, cy.frac);
            for ci in 0..c {
                let p00 = image[[ci, cy.lo, cx.lo]];
                let p01 = image[[ci, cy.lo, cx.hi]];
                let p10 = image[[ci, cy.hi, cx.lo]];
                let p11 = image[[ci, cy.hi, cx.hi]];
                out[[ci, oh, ow]] = (1.0 - ty) * ((1.0 - tx) * p00 + tx * p01)
                    + ty * ((1.0 - tx) * p10 + tx * p11);
            }
        }
    }
    out
}

impl Tensor {
    /// Differentiable bilinear sampling; gradients flow to both the image and
    /// the grid coordinates.
    pub fn grid_sample(&self, grid: &Tensor) -> Tensor {
        self.same_graph(grid);
        let value = {
            let img = self.value();
            let gr = grid.value();
            let i4 = img.view().into_dimensionality::<Ix4>().expect("grid_sample image 4-d");
            let g4 = gr.view().into_dimensionality::<Ix4>().expect("grid_sample grid 4-d");
            grid_sample_arrays(&i4, &g4).into_dyn()
        };
        let (pi, pg) = (self.id, grid.id);
        let needs = self.needs_grad() || grid.needs_grad();
        self.graph.push_custom(value, needs, move |_| {
            Box::new(move |vals: &Values, g: &ArrayD<f64>, sink: &mut GradSink| {
                let image = vals.get(pi).view().into_dimensionality::<Ix4>().unwrap();
                let grid = vals.get(pg).view().into_dimensionality::<Ix4>().unwrap();
                let gout = g.view().into_dimensionality::<Ix4>().unwrap();
                let (n, c, h, w) = image.dim();
                let (_, ho, wo, _) = grid.dim();
                let mut dimg = Array4::<f64>::zeros((n, c, h, w));
                let mut dgrid = Array4::<f64>::zeros(grid.raw_dim());
                for ni in 0..n {
                    for oh in 0..ho {
                        for ow in 0..wo {
                            let cx = corner(grid[[ni, oh, ow, 0]], w);
                            let cy = corner(grid[[ni, oh, ow, 1]], h);
                            let (tx, ty) = (cx.frac, cy.frac);
                            let mut dx_acc = 0.0;
                            let mut dy_acc = 0.0;
                            for ci in 0..c {
                                let up = gout[[ni, ci, oh, ow]];
                                let p00 = image[[ni, ci, cy.lo, cx.lo]];
                                let p01 = image[[ni, ci, cy.lo, cx.hi]];
                                let p10 = image[[ni, ci, cy.hi, cx.lo]];
                                let p11 = image[[ni, ci, cy.hi, cx.hi]];
                                dimg[[ni, ci, cy.lo, cx.lo]] += up * (1.0 - ty) * (1.0 - tx);
                                dimg[[ni, ci, cy.lo, cx.hi]] += up * (1.0 - ty) * tx;
                                dimg[[ni, ci, cy.hi, cx.lo]] += up * ty * (1.0 - tx);
                                dimg[[ni, ci, cy.hi, cx.hi]] += up * ty * tx;
                                dx_acc += up * ((1.0 - ty) * (p01 - p00) + ty * (p11 - p10));
                                dy_acc += up * ((1.0 - tx) * (p10 - p00) + tx * (p11 - p01));
                            }
                            dgrid[[ni, oh, ow, 0]] = dx_acc * w as f64;
                            dgrid[[ni, oh, ow, 1]] = dy_acc * h as f64;
                        }
                    }
                }
                sink.add(pi, dimg.into_dyn());
                sink.add(pg, dgrid.into_dyn());
            }) as BackwardOp
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::Graph;
    use super::*;
    use ndarray::{Array3, Array4};

    fn identity_grid(n: usize, ho: usize, wo: usize) -> Array4<f64> {
        Array4::from_shape_fn((n, ho, wo, 2), |(_, oh, ow, k)| {
            if k == 0 {
                (ow as f64 + 0.5) / wo as f64
            } else {
                (oh as f64 + 0.5) / ho as f64
            }
        })
    }

    #[test]
    fn identity_grid_at_native_size_reproduces_image() {
        let img = Array4::from_shape_fn((1, 2, 4, 6), |(_, c, i, j)| (c * 100 + i * 6 + j) as f64);
        let grid = identity_grid(1, 4, 6);
        let out = grid_sample_arrays(&img.view(), &grid.view());
        assert_eq!(out, img);
    }

    #[test]
    fn identity_grid_matches_resize() {
        let img = Array3::from_shape_fn((3, 8, 12), |(c, i, j)| {
            ((c + 1) * (i + 2) * (j + 3)) as f64 / 10.0
        });
        let resized = resize_bilinear(&img.view(), 5, 7);
        let batched = img.clone().insert_axis(ndarray::Axis(0));
        let grid = identity_grid(1, 5, 7);
        let sampled = grid_sample_arrays(&batched.view(), &grid.view());
        for c in 0..3 {
            for i in 0..5 {
                for j in 0..7 {
                    assert!((sampled[[0, c, i, j]] - resized[[c, i, j]]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampling_is_linear_in_the_image() {
        let a = Array4::from_shape_fn((1, 1, 5, 5), |(_, _, i, j)| (i * 5 + j) as f64);
        let b = Array4::from_shape_fn((1, 1, 5, 5), |(_, _, i, j)| ((i as f64) - (j as f64)).sin());
        let grid = Array4::from_shape_fn((1, 3, 3, 2), |(_, oh, ow, k)| {
            0.1 + 0.07 * (oh * 3 + ow + k) as f64
        });
        let sa = grid_sample_arrays(&a.view(), &grid.view());
        let sb = grid_sample_arrays(&b.view(), &grid.view());
        let mixed = a.mapv(|v| 2.5 * v) + b.mapv(|v| -0.75 * v);
        let sm = grid_sample_arrays(&mixed.view(), &grid.view());
        let expect = sa.mapv(|v| 2.5 * v) + sb.mapv(|v| -0.75 * v);
        for (x, y) in sm.iter().zip(expect.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_coordinates_clamp_to_border() {
        let img = Array4::from_shape_fn((1, 1, 2, 2), |(_, _, i, j)| (i * 2 + j) as f64);
        let mut grid = Array4::<f64>::zeros((1, 1, 2, 2));
        grid[[0, 0, 0, 0]] = -3.0; // far left
        grid[[0, 0, 0, 1]] = 0.25; // top row center
        grid[[0, 0, 1, 0]] = 5.0; // far right
        grid[[0, 0, 1, 1]] = 5.0; // far bottom
        let out = grid_sample_arrays(&img.view(), &grid.view());
        assert_eq!(out[[0, 0, 0, 0]], 0.0); // top-left pixel
        assert_eq!(out[[0, 0, 0, 1]], 3.0); // bottom-right pixel
    }

    #[test]
    fn image_gradient_scatters_bilinear_weights() {
        let g = Graph::recording_eval();
        let img = g.leaf(Array4::from_elem((1, 1, 2, 2), 1.0).into_dyn());
        let mut grid = Array4::<f64>::zeros((1, 1, 1, 2));
        grid[[0, 0, 0, 0]] = 0.5; // between both columns
        grid[[0, 0, 0, 1]] = 0.25; // exactly the first row
        let gr = g.constant(grid.into_dyn());
        let y = img.grid_sample(&gr);
        let loss = y.sum_all();
        let grads = g.backward(&loss);
        let di = grads.wrt(&img).unwrap();
        assert!((di[[0, 0, 0, 0]] - 0.5).abs() < 1e-12);
        assert!((di[[0, 0, 0, 1]] - 0.5).abs() < 1e-12);
        assert!(di[[0, 0, 1, 0]].abs() < 1e-12);
        assert!(di[[0, 0, 1, 1]].abs() < 1e-12);
    }
}
