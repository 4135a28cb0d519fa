//! Reverse-mode autodiff over `f64` arrays.
//!
//! A [`Graph`] is a tape of immutable value nodes. Operations on [`Tensor`]
//! handles append nodes; [`Graph::backward`] walks the tape in reverse and
//! accumulates gradients into every node that needs them. Parameters are
//! registered by name so a training step can hand their gradients to the
//! optimizer without knowing the model structure.
//!
//! The engine is deliberately small: dense `f64` arrays, no broadcasting
//! beyond suffix-shaped right operands, and fused nodes for the layers that
//! need custom derivatives (convolution, pooling, normalization, bilinear
//! sampling, the sequence losses). Inference runs on the same code path with
//! gradient recording switched off.

mod conv;
mod sample;

pub mod check;

pub use conv::{conv2d_output_hw, BatchNormStats};
pub use sample::{grid_sample_arrays, resize_bilinear};

use std::cell::{Ref, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use ndarray::{ArrayD, Axis, Ix2, Ix3, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) type BackwardOp = Box<dyn Fn(&Values, &ArrayD<f64>, &mut GradSink)>;

pub(crate) struct Node {
    value: ArrayD<f64>,
    needs_grad: bool,
    backward: Option<BackwardOp>,
}

struct GraphInner {
    nodes: RefCell<Vec<Node>>,
    params: RefCell<Vec<(String, usize)>>,
    param_ids: RefCell<HashMap<String, usize>>,
    grad_enabled: bool,
    train_mode: bool,
    rng: RefCell<ChaCha8Rng>,
}

/// A tape of operations. Cheap to clone (shared handle).
#[derive(Clone)]
pub struct Graph {
    inner: Rc<GraphInner>,
}

/// Read-only access to node values during the backward pass.
pub struct Values<'a> {
    nodes: &'a [Node],
}

impl Values<'_> {
    pub fn get(&self, id: usize) -> &ArrayD<f64> {
        &self.nodes[id].value
    }
}

/// Gradient accumulator for the backward pass.
pub struct GradSink<'a> {
    nodes: &'a [Node],
    grads: &'a mut Vec<Option<ArrayD<f64>>>,
}

impl GradSink<'_> {
    /// Accumulate `delta` into the gradient of node `id` (no-op when the node
    /// does not require gradients).
    pub fn add(&mut self, id: usize, delta: ArrayD<f64>) {
        if !self.nodes[id].needs_grad {
            return;
        }
        match &mut self.grads[id] {
            Some(g) => *g += &delta,
            slot @ None => *slot = Some(delta),
        }
    }
}

/// Gradients produced by one backward pass.
pub struct Gradients {
    grads: Vec<Option<ArrayD<f64>>>,
    params: Vec<(String, usize)>,
}

impl Gradients {
    /// Gradient of the loss with respect to a tracked leaf tensor.
    pub fn wrt(&self, t: &Tensor) -> Option<&ArrayD<f64>> {
        self.grads.get(t.id).and_then(|g| g.as_ref())
    }

    /// Iterate `(name, gradient)` over registered parameters that received a
    /// gradient, in registration order.
    pub fn params(&self) -> impl Iterator<Item = (&str, &ArrayD<f64>)> {
        self.params
            .iter()
            .filter_map(|(name, id)| self.grads[*id].as_ref().map(|g| (name.as_str(), g)))
    }
}

/// Handle to one node of a [`Graph`].
#[derive(Clone)]
pub struct Tensor {
    graph: Graph,
    id: usize,
}

impl Graph {
    /// A recording graph for training: gradients on, train-time behavior for
    /// dropout and batch normalization, dropout randomness seeded by `seed`.
    pub fn training(seed: u64) -> Self {
        Self::new(true, true, seed)
    }

    /// An inference graph: no gradient recording, eval-time behavior.
    pub fn inference() -> Self {
        Self::new(false, false, 0)
    }

    /// A recording graph with eval-time behavior (for gradient checks).
    pub fn recording_eval() -> Self {
        Self::new(true, false, 0)
    }

    fn new(grad_enabled: bool, train_mode: bool, seed: u64) -> Self {
        Self {
            inner: Rc::new(GraphInner {
                nodes: RefCell::new(Vec::new()),
                params: RefCell::new(Vec::new()),
                param_ids: RefCell::new(HashMap::new()),
                grad_enabled,
                train_mode,
                rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed)),
            }),
        }
    }

    pub fn grad_enabled(&self) -> bool {
        self.inner.grad_enabled
    }

    pub fn train_mode(&self) -> bool {
        self.inner.train_mode
    }

    pub(crate) fn rand_uniform(&self, n: usize) -> Vec<f64> {
        let mut rng = self.inner.rng.borrow_mut();
        (0..n).map(|_| rng.gen::<f64>()).collect()
    }

    fn push(&self, value: ArrayD<f64>, needs_grad: bool, backward: Option<BackwardOp>) -> Tensor {
        let mut nodes = self.inner.nodes.borrow_mut();
        let id = nodes.len();
        nodes.push(Node {
            value,
            needs_grad,
            backward,
        });
        Tensor {
            graph: self.clone(),
            id,
        }
    }

    /// A constant node; gradients never flow into it.
    pub fn constant(&self, value: ArrayD<f64>) -> Tensor {
        self.push(value, false, None)
    }

    /// A tracked leaf; its gradient is retrievable from [`Gradients::wrt`].
    pub fn leaf(&self, value: ArrayD<f64>) -> Tensor {
        self.push(value, self.inner.grad_enabled, None)
    }

    /// A named parameter leaf. Repeated registration under one name returns
    /// the same node.
    pub fn param(&self, name: &str, value: &ArrayD<f64>) -> Tensor {
        if let Some(&id) = self.inner.param_ids.borrow().get(name) {
            return Tensor {
                graph: self.clone(),
                id,
            };
        }
        let t = self.push(value.clone(), self.inner.grad_enabled, None);
        self.inner.param_ids.borrow_mut().insert(name.to_string(), t.id);
        self.inner.params.borrow_mut().push((name.to_string(), t.id));
        t
    }

    /// Append a computed node. `make_backward` receives the id of the new node
    /// so the closure can read its own output value during the backward pass.
    pub(crate) fn push_custom(
        &self,
        value: ArrayD<f64>,
        parents_need_grad: bool,
        make_backward: impl FnOnce(usize) -> BackwardOp,
    ) -> Tensor {
        let needs = self.inner.grad_enabled && parents_need_grad;
        let t = self.push(value, needs, None);
        if needs {
            let op = make_backward(t.id);
            self.inner.nodes.borrow_mut()[t.id].backward = Some(op);
        }
        t
    }

    /// Reverse pass from a scalar loss node. Consumable more than once only by
    /// rebuilding the forward; gradients accumulate per call into the result.
    pub fn backward(&self, loss: &Tensor) -> Gradients {
        let nodes = self.inner.nodes.borrow();
        assert_eq!(
            nodes[loss.id].value.len(),
            1,
            "backward requires a scalar loss, got shape {:?}",
            nodes[loss.id].value.shape()
        );
        let mut grads: Vec<Option<ArrayD<f64>>> = (0..nodes.len()).map(|_| None).collect();
        grads[loss.id] = Some(ArrayD::ones(nodes[loss.id].value.raw_dim()));
        for id in (0..=loss.id).rev() {
            if nodes[id].backward.is_none() {
                continue; // leaves keep their accumulated gradient
            }
            let Some(g) = grads[id].take() else { continue };
            let values = Values { nodes: &nodes };
            let mut sink = GradSink {
                nodes: &nodes,
                grads: &mut grads,
            };
            (nodes[id].backward.as_ref().unwrap())(&values, &g, &mut sink);
        }
        Gradients {
            grads,
            params: self.inner.params.borrow().clone(),
        }
    }
}

/// Sum `g` over leading axes so its shape matches `target` (a suffix of
/// `g.shape()`).
fn reduce_to_suffix(g: &ArrayD<f64>, target: &[usize]) -> ArrayD<f64> {
    let extra = g.ndim() - target.len();
    let mut out = g.clone();
    for _ in 0..extra {
        out = out.sum_axis(Axis(0));
    }
    debug_assert_eq!(out.shape(), target);
    out
}

impl Tensor {
    pub fn id(&self) -> usize {
        self.id
    }

    pub(crate) fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Borrow the node's value.
    pub fn value(&self) -> Ref<'_, ArrayD<f64>> {
        Ref::map(self.graph.inner.nodes.borrow(), |nodes| &nodes[self.id].value)
    }

    /// Clone the node's value out of the graph.
    pub fn array(&self) -> ArrayD<f64> {
        self.value().clone()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value().shape().to_vec()
    }

    pub fn needs_grad(&self) -> bool {
        self.graph.inner.nodes.borrow()[self.id].needs_grad
    }

    /// The single element of a scalar node.
    pub fn scalar(&self) -> f64 {
        let v = self.value();
        assert_eq!(v.len(), 1, "scalar() on shape {:?}", v.shape());
        *v.iter().next().unwrap()
    }

    fn same_graph(&self, other: &Tensor) {
        assert!(
            Rc::ptr_eq(&self.graph.inner, &other.graph.inner),
            "tensors belong to different graphs"
        );
    }

    pub fn add(&self, rhs: &Tensor) -> Tensor {
        self.same_graph(rhs);
        let value = {
            let a = self.value();
            let b = rhs.value();
            assert_eq!(a.shape(), b.shape(), "add: shape mismatch");
            &*a + &*b
        };
        let (pa, pb) = (self.id, rhs.id);
        self.graph.push_custom(
            value,
            self.needs_grad() || rhs.needs_grad(),
            move |_| {
                Box::new(move |_vals, g, sink| {
                    sink.add(pa, g.clone());
                    sink.add(pb, g.clone());
                })
            },
        )
    }

    /// Add a right operand whose shape is a suffix of `self`'s shape
    /// (broadcast over the leading axes). Covers biases, positional tables,
    /// and attention masks.
    pub fn add_bcast(&self, rhs: &Tensor) -> Tensor {
        self.same_graph(rhs);
        let value = {
            let a = self.value();
            let b = rhs.value();
            let (ash, bsh) = (a.shape().to_vec(), b.shape().to_vec());
            assert!(
                ash.len() >= bsh.len() && ash[ash.len() - bsh.len()..] == bsh[..],
                "add_bcast: {bsh:?} is not a suffix of {ash:?}"
            );
            &*a + &b.view().into_shape_with_order(IxDyn(&bsh)).unwrap()
        };
        let (pa, pb) = (self.id, rhs.id);
        let b_shape = rhs.shape();
        self.graph.push_custom(
            value,
            self.needs_grad() || rhs.needs_grad(),
            move |_| {
                Box::new(move |_vals, g, sink| {
                    sink.add(pa, g.clone());
                    sink.add(pb, reduce_to_suffix(g, &b_shape));
                })
            },
        )
    }

    pub fn sub(&self, rhs: &Tensor) -> Tensor {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Tensor) -> Tensor {
        self.same_graph(rhs);
        let value = {
            let a = self.value();
            let b = rhs.value();
            assert_eq!(a.shape(), b.shape(), "mul: shape mismatch");
            &*a * &*b
        };
        let (pa, pb) = (self.id, rhs.id);
        self.graph.push_custom(
            value,
            self.needs_grad() || rhs.needs_grad(),
            move |_| {
                Box::new(move |vals, g, sink| {
                    sink.add(pa, g * vals.get(pb));
                    sink.add(pb, g * vals.get(pa));
                })
            },
        )
    }

    /// Multiply by a right operand whose shape is a suffix of `self`'s shape.
    pub fn mul_bcast(&self, rhs: &Tensor) -> Tensor {
        self.same_graph(rhs);
        let b_shape = rhs.shape();
        let value = {
            let a = self.value();
            let b = rhs.value();
            let ash = a.shape().to_vec();
            assert!(
                ash.len() >= b_shape.len() && ash[ash.len() - b_shape.len()..] == b_shape[..],
                "mul_bcast: {b_shape:?} is not a suffix of {ash:?}"
            );
            &*a * &b.view().into_shape_with_order(IxDyn(&b_shape)).unwrap()
        };
        let (pa, pb) = (self.id, rhs.id);
        let bs = b_shape.clone();
        self.graph.push_custom(
            value,
            self.needs_grad() || rhs.needs_grad(),
            move |_| {
                Box::new(move |vals, g, sink| {
                    let b = vals.get(pb);
                    let bview = b.view().into_shape_with_order(IxDyn(&bs)).unwrap();
                    sink.add(pa, g * &bview);
                    sink.add(pb, reduce_to_suffix(&(g * vals.get(pa)), &bs));
                })
            },
        )
    }

    pub fn neg(&self) -> Tensor {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        let value = self.value().mapv(|x| x * c);
        let pa = self.id;
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            Box::new(move |_vals, g, sink| sink.add(pa, g.mapv(|x| x * c)))
        })
    }

    pub fn relu(&self) -> Tensor {
        let value = self.value().mapv(|x| x.max(0.0));
        let pa = self.id;
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            Box::new(move |vals, g, sink| {
                let a = vals.get(pa);
                let mut d = g.clone();
                d.zip_mut_with(a, |gi, &ai| {
                    if ai <= 0.0 {
                        *gi = 0.0;
                    }
                });
                sink.add(pa, d);
            })
        })
    }

    pub fn sigmoid(&self) -> Tensor {
        let value = self.value().mapv(|x| 1.0 / (1.0 + (-x).exp()));
        let pa = self.id;
        self.graph.push_custom(value, self.needs_grad(), move |out_id| {
            Box::new(move |vals, g, sink| {
                let y = vals.get(out_id);
                sink.add(pa, g * &y.mapv(|yi| yi * (1.0 - yi)));
            })
        })
    }

    /// Numerically stable softmax over the last axis. Rows may contain
    /// `-inf` entries (masked); they get exactly zero weight.
    pub fn softmax_last(&self) -> Tensor {
        let value = softmax_last_array(&self.value());
        let pa = self.id;
        self.graph.push_custom(value, self.needs_grad(), move |out_id| {
            Box::new(move |vals, g, sink| {
                let y = vals.get(out_id);
                let last = y.ndim() - 1;
                let mut d = g * y;
                for (mut drow, yrow) in d
                    .lanes_mut(Axis(last))
                    .into_iter()
                    .zip(y.lanes(Axis(last)))
                {
                    let dot: f64 = drow.iter().sum();
                    for (di, &yi) in drow.iter_mut().zip(yrow.iter()) {
                        *di -= dot * yi;
                    }
                }
                sink.add(pa, d);
            })
        })
    }

    /// Normalize the last axis to zero mean and unit variance (no affine).
    pub fn layer_norm_last(&self, eps: f64) -> Tensor {
        let a = self.array();
        let last = a.ndim() - 1;
        let mut value = a.clone();
        let mut inv_stds = Vec::new();
        for mut row in value.lanes_mut(Axis(last)) {
            let n = row.len() as f64;
            let mean = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let inv_std = 1.0 / (var + eps).sqrt();
            inv_stds.push(inv_std);
            row.mapv_inplace(|x| (x - mean) * inv_std);
        }
        let pa = self.id;
        self.graph.push_custom(value, self.needs_grad(), move |out_id| {
            let inv_stds = inv_stds.clone();
            Box::new(move |vals, g, sink| {
                let y = vals.get(out_id);
                let last = y.ndim() - 1;
                let mut d = g.clone();
                for ((mut drow, yrow), inv_std) in d
                    .lanes_mut(Axis(last))
                    .into_iter()
                    .zip(y.lanes(Axis(last)))
                    .zip(inv_stds.iter())
                {
                    let n = drow.len() as f64;
                    let mean_g = drow.iter().sum::<f64>() / n;
                    let mean_gy = drow
                        .iter()
                        .zip(yrow.iter())
                        .map(|(gi, yi)| gi * yi)
                        .sum::<f64>()
                        / n;
                    for (di, &yi) in drow.iter_mut().zip(yrow.iter()) {
                        *di = (*di - mean_g - yi * mean_gy) * inv_std;
                    }
                }
                sink.add(pa, d);
            })
        })
    }

    /// Inverted dropout; identity outside train mode.
    pub fn dropout(&self, p: f64) -> Tensor {
        if !self.graph.train_mode() || p <= 0.0 {
            return self.clone();
        }
        let keep = 1.0 - p;
        let shape = self.shape();
        let noise = self.graph.rand_uniform(self.value().len());
        let mask_vec: Vec<f64> = noise
            .into_iter()
            .map(|u| if u < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let mask = ArrayD::from_shape_vec(IxDyn(&shape), mask_vec).unwrap();
        let value = &*self.value() * &mask;
        let pa = self.id;
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            Box::new(move |_vals, g, sink| sink.add(pa, g * &mask))
        })
    }

    /// Reshape (same element count, standard layout).
    pub fn reshape(&self, shape: &[usize]) -> Tensor {
        let value = self
            .array()
            .into_shape_with_order(IxDyn(shape))
            .expect("reshape: incompatible shape");
        let pa = self.id;
        let old_shape = self.shape();
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            Box::new(move |_vals, g, sink| {
                sink.add(
                    pa,
                    g.clone().into_shape_with_order(IxDyn(&old_shape)).unwrap(),
                );
            })
        })
    }

    /// Permute axes (materializes a standard-layout copy).
    pub fn permute(&self, axes: &[usize]) -> Tensor {
        let value = self
            .value()
            .view()
            .permuted_axes(IxDyn(axes))
            .as_standard_layout()
            .to_owned();
        let pa = self.id;
        let mut inverse = vec![0usize; axes.len()];
        for (i, &ax) in axes.iter().enumerate() {
            inverse[ax] = i;
        }
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            let inverse = inverse.clone();
            Box::new(move |_vals, g, sink| {
                sink.add(
                    pa,
                    g.view()
                        .permuted_axes(IxDyn(&inverse))
                        .as_standard_layout()
                        .to_owned(),
                );
            })
        })
    }

    /// Matrix product: `(n,k)x(k,m)`, batched `(b,n,k)x(b,k,m)`, or with a
    /// 2-d operand broadcast across the batch.
    pub fn matmul(&self, rhs: &Tensor) -> Tensor {
        self.same_graph(rhs);
        let value = {
            let a = self.value();
            let b = rhs.value();
            matmul_arrays(&a, &b)
        };
        let (pa, pb) = (self.id, rhs.id);
        self.graph.push_custom(
            value,
            self.needs_grad() || rhs.needs_grad(),
            move |_| {
                Box::new(move |vals, g, sink| {
                    let a = vals.get(pa);
                    let b = vals.get(pb);
                    let (da, db) = matmul_backward(a, b, g);
                    sink.add(pa, da);
                    sink.add(pb, db);
                })
            },
        )
    }

    /// Batched `a x b^T` on the last two axes: `(b,n,d)x(b,m,d) -> (b,n,m)`.
    pub fn bmm_nt(&self, rhs: &Tensor) -> Tensor {
        self.same_graph(rhs);
        let value = {
            let a = self.value();
            let b = rhs.value();
            let a3 = a.view().into_dimensionality::<Ix3>().expect("bmm_nt lhs 3-d");
            let b3 = b.view().into_dimensionality::<Ix3>().expect("bmm_nt rhs 3-d");
            let (bn, n, d) = a3.dim();
            let (bn2, m, d2) = b3.dim();
            assert_eq!((bn, d), (bn2, d2), "bmm_nt: shape mismatch");
            let mut out = ndarray::Array3::<f64>::zeros((bn, n, m));
            for i in 0..bn {
                let prod = a3.index_axis(Axis(0), i).dot(&b3.index_axis(Axis(0), i).t());
                out.index_axis_mut(Axis(0), i).assign(&prod);
            }
            out.into_dyn()
        };
        let (pa, pb) = (self.id, rhs.id);
        self.graph.push_custom(
            value,
            self.needs_grad() || rhs.needs_grad(),
            move |_| {
                Box::new(move |vals, g, sink| {
                    let a = vals.get(pa).view().into_dimensionality::<Ix3>().unwrap();
                    let b = vals.get(pb).view().into_dimensionality::<Ix3>().unwrap();
                    let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
                    let (bn, n, d) = a.dim();
                    let m = b.dim().1;
                    let mut da = ndarray::Array3::<f64>::zeros((bn, n, d));
                    let mut db = ndarray::Array3::<f64>::zeros((bn, m, d));
                    for i in 0..bn {
                        let gi = g3.index_axis(Axis(0), i);
                        da.index_axis_mut(Axis(0), i)
                            .assign(&gi.dot(&b.index_axis(Axis(0), i)));
                        db.index_axis_mut(Axis(0), i)
                            .assign(&gi.t().dot(&a.index_axis(Axis(0), i)));
                    }
                    sink.add(pa, da.into_dyn());
                    sink.add(pb, db.into_dyn());
                })
            },
        )
    }

    /// Row lookup: `ids (n,t)` into a `(v,d)` table, giving `(n,t,d)`.
    pub fn embedding(&self, ids: &ndarray::Array2<u32>) -> Tensor {
        let table = self.value();
        let t2 = table.view().into_dimensionality::<Ix2>().expect("embedding table 2-d");
        let (v, d) = t2.dim();
        let (n, t) = ids.dim();
        let mut out = ndarray::Array3::<f64>::zeros((n, t, d));
        for ((i, j), &id) in ids.indexed_iter() {
            assert!((id as usize) < v, "embedding id {id} out of range {v}");
            out.slice_mut(ndarray::s![i, j, ..]).assign(&t2.row(id as usize));
        }
        drop(table);
        let pa = self.id;
        let ids = ids.clone();
        self.graph
            .push_custom(out.into_dyn(), self.needs_grad(), move |_| {
                let ids = ids.clone();
                Box::new(move |vals, g, sink| {
                    let table = vals.get(pa);
                    let mut dt = ArrayD::<f64>::zeros(table.raw_dim());
                    let mut dt2 = dt.view_mut().into_dimensionality::<Ix2>().unwrap();
                    let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
                    for ((i, j), &id) in ids.indexed_iter() {
                        let mut row = dt2.row_mut(id as usize);
                        row += &g3.slice(ndarray::s![i, j, ..]);
                    }
                    sink.add(pa, dt);
                })
            })
    }

    pub fn sum_all(&self) -> Tensor {
        let value = ArrayD::from_elem(IxDyn(&[]), self.value().sum());
        let pa = self.id;
        let shape = self.shape();
        self.graph.push_custom(value, self.needs_grad(), move |_| {
            Box::new(move |_vals, g, sink| {
                let gval = *g.iter().next().unwrap();
                sink.add(pa, ArrayD::from_elem(IxDyn(&shape), gval));
            })
        })
    }

    pub fn mean_all(&self) -> Tensor {
        let n = self.value().len() as f64;
        self.sum_all().scale(1.0 / n)
    }
}

/// Stable softmax over the last axis of a plain array (rows of all `-inf`
/// are rejected).
pub fn softmax_last_array(a: &ArrayD<f64>) -> ArrayD<f64> {
    let mut out = a.clone();
    let last = out.ndim() - 1;
    for mut row in out.lanes_mut(Axis(last)) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            max.is_finite(),
            "softmax over a fully masked row (all -inf)"
        );
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

fn matmul_arrays(a: &ArrayD<f64>, b: &ArrayD<f64>) -> ArrayD<f64> {
    match (a.ndim(), b.ndim()) {
        (2, 2) => {
            let a2 = a.view().into_dimensionality::<Ix2>().unwrap();
            let b2 = b.view().into_dimensionality::<Ix2>().unwrap();
            a2.dot(&b2).into_dyn()
        }
        (3, 2) => {
            let a3 = a.view().into_dimensionality::<Ix3>().unwrap();
            let b2 = b.view().into_dimensionality::<Ix2>().unwrap();
            let (n, r, _) = a3.dim();
            let c = b2.dim().1;
            let mut out = ndarray::Array3::<f64>::zeros((n, r, c));
            for i in 0..n {
                out.index_axis_mut(Axis(0), i)
                    .assign(&a3.index_axis(Axis(0), i).dot(&b2));
            }
            out.into_dyn()
        }
        (2, 3) => {
            let a2 = a.view().into_dimensionality::<Ix2>().unwrap();
            let b3 = b.view().into_dimensionality::<Ix3>().unwrap();
            let (n, _, c) = b3.dim();
            let r = a2.dim().0;
            let mut out = ndarray::Array3::<f64>::zeros((n, r, c));
            for i in 0..n {
                out.index_axis_mut(Axis(0), i)
                    .assign(&a2.dot(&b3.index_axis(Axis(0), i)));
            }
            out.into_dyn()
        }
        (3, 3) => {
            let a3 = a.view().into_dimensionality::<Ix3>().unwrap();
            let b3 = b.view().into_dimensionality::<Ix3>().unwrap();
            let (n, r, _) = a3.dim();
            assert_eq!(n, b3.dim().0, "matmul: batch mismatch");
            let c = b3.dim().2;
            let mut out = ndarray::Array3::<f64>::zeros((n, r, c));
            for i in 0..n {
                out.index_axis_mut(Axis(0), i)
                    .assign(&a3.index_axis(Axis(0), i).dot(&b3.index_axis(Axis(0), i)));
            }
            out.into_dyn()
        }
        (da, db) => panic!("matmul: unsupported ranks {da} x {db}"),
    }
}

fn matmul_backward(
    a: &ArrayD<f64>,
    b: &ArrayD<f64>,
    g: &ArrayD<f64>,
) -> (ArrayD<f64>, ArrayD<f64>) {
    match (a.ndim(), b.ndim()) {
        (2, 2) => {
            let a2 = a.view().into_dimensionality::<Ix2>().unwrap();
            let b2 = b.view().into_dimensionality::<Ix2>().unwrap();
            let g2 = g.view().into_dimensionality::<Ix2>().unwrap();
            (g2.dot(&b2.t()).into_dyn(), a2.t().dot(&g2).into_dyn())
        }
        (3, 2) => {
            let a3 = a.view().into_dimensionality::<Ix3>().unwrap();
            let b2 = b.view().into_dimensionality::<Ix2>().unwrap();
            let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
            let (n, r, k) = a3.dim();
            let mut da = ndarray::Array3::<f64>::zeros((n, r, k));
            let mut db = ndarray::Array2::<f64>::zeros(b2.raw_dim());
            for i in 0..n {
                let gi = g3.index_axis(Axis(0), i);
                da.index_axis_mut(Axis(0), i).assign(&gi.dot(&b2.t()));
                db += &a3.index_axis(Axis(0), i).t().dot(&gi);
            }
            (da.into_dyn(), db.into_dyn())
        }
        (2, 3) => {
            let a2 = a.view().into_dimensionality::<Ix2>().unwrap();
            let b3 = b.view().into_dimensionality::<Ix3>().unwrap();
            let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
            let (n, k, c) = b3.dim();
            let mut da = ndarray::Array2::<f64>::zeros(a2.raw_dim());
            let mut db = ndarray::Array3::<f64>::zeros((n, k, c));
            for i in 0..n {
                let gi = g3.index_axis(Axis(0), i);
                da += &gi.dot(&b3.index_axis(Axis(0), i).t());
                db.index_axis_mut(Axis(0), i).assign(&a2.t().dot(&gi));
            }
            (da.into_dyn(), db.into_dyn())
        }
        (3, 3) => {
            let a3 = a.view().into_dimensionality::<Ix3>().unwrap();
            let b3 = b.view().into_dimensionality::<Ix3>().unwrap();
            let g3 = g.view().into_dimensionality::<Ix3>().unwrap();
            let (n, r, k) = a3.dim();
            let c = b3.dim().2;
            let mut da = ndarray::Array3::<f64>::zeros((n, r, k));
            let mut db = ndarray::Array3::<f64>::zeros((n, k, c));
            for i in 0..n {
                let gi = g3.index_axis(Axis(0), i);
                da.index_axis_mut(Axis(0), i)
                    .assign(&gi.dot(&b3.index_axis(Axis(0), i).t()));
                db.index_axis_mut(Axis(0), i)
                    .assign(&a3.index_axis(Axis(0), i).t().dot(&gi));
            }
            (da.into_dyn(), db.into_dyn())
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn dyn2(rows: &[[f64; 2]; 2]) -> ArrayD<f64> {
        arr2(rows).into_dyn()
    }

    #[test]
    fn add_mul_backward() {
        let g = Graph::recording_eval();
        let a = g.leaf(dyn2(&[[1.0, 2.0], [3.0, 4.0]]));
        let b = g.leaf(dyn2(&[[5.0, 6.0], [7.0, 8.0]]));
        let loss = a.add(&b).mul(&a).sum_all(); // sum(a^2 + ab)
        let grads = g.backward(&loss);
        // d/da = 2a + b, d/db = a
        let da = grads.wrt(&a).unwrap();
        let db = grads.wrt(&b).unwrap();
        assert_eq!(da, &dyn2(&[[7.0, 10.0], [13.0, 16.0]]));
        assert_eq!(db, &dyn2(&[[1.0, 2.0], [3.0, 4.0]]));
    }

    #[test]
    fn matmul_matches_by_hand() {
        let g = Graph::inference();
        let a = g.constant(dyn2(&[[1.0, 2.0], [3.0, 4.0]]));
        let b = g.constant(dyn2(&[[5.0, 6.0], [7.0, 8.0]]));
        let c = a.matmul(&b);
        assert_eq!(c.array(), dyn2(&[[19.0, 22.0], [43.0, 50.0]]));
    }

    #[test]
    fn softmax_rows_sum_to_one_and_respect_neg_inf() {
        let g = Graph::inference();
        let x = g.constant(
            arr2(&[[0.3, -1.0, 2.5], [f64::NEG_INFINITY, 0.0, 1.0]]).into_dyn(),
        );
        let y = x.softmax_last().array();
        for row in y.rows() {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(y[[1, 0]], 0.0);
    }

    #[test]
    fn layer_norm_zero_mean_unit_variance() {
        let g = Graph::inference();
        let x = g.constant(arr2(&[[3.0, -1.0, 2.0, 10.0]]).into_dyn());
        let y = x.layer_norm_last(1e-6).array();
        let mean: f64 = y.iter().sum::<f64>() / 4.0;
        let var: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-5);
    }

    #[test]
    fn reshape_permute_round_trip() {
        let g = Graph::recording_eval();
        let x = g.leaf(ArrayD::from_shape_vec(IxDyn(&[2, 3]), (0..6).map(|v| v as f64).collect()).unwrap());
        let y = x.permute(&[1, 0]).reshape(&[6]);
        assert_eq!(y.array().as_slice().unwrap(), &[0.0, 3.0, 1.0, 4.0, 2.0, 5.0]);
        let loss = y.mul(&y).sum_all();
        let grads = g.backward(&loss);
        let dx = grads.wrt(&x).unwrap();
        // d/dx sum(x^2) = 2x independent of the permutation
        assert_eq!(dx, &x.array().mapv(|v| 2.0 * v));
    }

    #[test]
    fn embedding_scatters_gradients() {
        let g = Graph::recording_eval();
        let table = g.leaf(arr2(&[[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]]).into_dyn());
        let ids = ndarray::arr2(&[[0u32, 2, 2]]);
        let y = table.embedding(&ids);
        assert_eq!(y.shape(), vec![1, 3, 2]);
        let loss = y.sum_all();
        let grads = g.backward(&loss);
        let dt = grads.wrt(&table).unwrap();
        assert_eq!(dt, &arr2(&[[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]]).into_dyn());
    }

    #[test]
    fn params_deduplicate_and_receive_grads() {
        let g = Graph::recording_eval();
        let w = ArrayD::from_elem(IxDyn(&[2]), 3.0);
        let p1 = g.param("w", &w);
        let p2 = g.param("w", &w);
        assert_eq!(p1.id(), p2.id());
        let loss = p1.mul(&p2).sum_all(); // w^2
        let grads = g.backward(&loss);
        let got: Vec<_> = grads.params().collect();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].1, &ArrayD::from_elem(IxDyn(&[2]), 6.0));
    }

    #[test]
    fn dropout_is_identity_in_eval() {
        let g = Graph::inference();
        let x = g.constant(dyn2(&[[1.0, 2.0], [3.0, 4.0]]));
        let y = x.dropout(0.5);
        assert_eq!(y.array(), x.array());
    }
}
