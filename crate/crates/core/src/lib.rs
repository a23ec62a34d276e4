//! Hash-seeded random-feature kernel expansions.
//!
//! * [`detrand`]: counter-based randomness from `(seed, label, block, counter)`.
//! * [`wht`]: Walsh-Hadamard transforms (naive oracle, recursive, cache-blocked fast path).
//! * [`fastfood`]: the `C H G P H B` feature map and its cos/sin features.
//! * [`exact_kernel`]: exact Gram matrices, kernel ridge and V-matrix solves.
//! * [`linear_model`]: softmax head trained by mini-batch SGD.
//! * [`dataio`]: IDX parsing, binary dumps and synthetic datasets.

pub mod dataio;
pub mod detrand;
pub mod error;
pub mod exact_kernel;
pub mod fastfood;
pub mod linear_model;
pub mod wht;

pub use error::{Error, Result};

/// Floating-point element type used by transforms and models.
pub trait Real: num_traits::Float + std::fmt::Debug + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}
