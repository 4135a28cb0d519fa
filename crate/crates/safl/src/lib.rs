//! Scene text recognition with a rectify-then-read pipeline.
//!
//! The pipeline has three stages plus a training objective:
//!
//! 1. **Rectification** ([`rectifier`]): a localization network predicts fiducial
//!    control points along the top and bottom of the text, a thin-plate-spline
//!    warp is solved against a canonical point layout, and a differentiable
//!    bilinear sampler produces a fixed-size rectified image.
//! 2. **Feature extraction** ([`backbone`]): a residual convolutional network
//!    collapses the rectified image to a single row and emits a left-to-right
//!    sequence of column feature vectors, augmented with sinusoidal positional
//!    encodings.
//! 3. **Recognition** ([`recognizer`]): a self-attention encoder-decoder maps the
//!    feature sequence to a character sequence, decoding greedily from `<start>`
//!    until `<end>`.
//! 4. **Objective** ([`objective`]): focal loss over the per-step character
//!    probabilities, with plain negative log-likelihood as the baseline family.
//!
//! Everything runs on a small reverse-mode autodiff engine ([`tensor`]) over
//! `f64` arrays, so every stage is trainable end to end on CPU and every
//! analytic gradient can be checked against finite differences.
//!
//! [`data`] provides vocabulary encoding, dataset manifests, and a seeded
//! synthetic word-image generator; [`trainer`] provides the Adam training loop,
//! word-accuracy evaluation, checkpointing, and the loss/rectification ablation
//! harnesses.

pub mod config;
pub mod data;
pub mod error;
pub mod nn;
pub mod tensor;
pub mod vocab;

pub use config::{LossConfig, LossFamily, ModelConfig, TrainConfig};
pub use data::ImageTensor;
pub use error::{Error, Result};
pub use vocab::{TokenSequence, Vocabulary};
