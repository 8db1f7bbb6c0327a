//! Lattice jump martingales, their iterated stochastic integrals, singular
//! space-time kernels, labelled-graph power counting, and Monte Carlo checks of
//! the resulting moment bounds for the dynamical Φ⁴₃ discretization.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod experiment;
pub mod fft;
pub mod graphs;
pub mod kernels;
pub mod model;
pub mod noise;
pub mod profiles;
pub mod quad;
pub mod rng;

pub use noise::{
    predictable_bracket, sample_paths, smooth, JumpEvent, JumpModel, LatticeSpec, MartingalePathSet, MartingaleSpec,
    NoiseError, SmoothedFieldSpec,
};
