//! Contractions, orderings and exact evaluation of multiple and iterated
//! stochastic integrals against lattice jump martingales.

mod combinatorics;
mod integrals;
mod norms;

pub use combinatorics::{
    contractions, orderings, Contraction, Label, Labeling, Ordering, PFunction, PVal, MAX_CONTRACTION_N,
};
pub use integrals::{
    chaos_expansion, diagonal_decomposition, diagonal_integral, iterated_integral, product_integral,
    renormalized_iterated_integral, GridFunction, SpaceTimePoint, EVAL_BUDGET,
};
pub use norms::{
    admissible_for_moment_bound, contracted_function, exponent_alpha, exponent_beta, nested_norm, sobolev_sides,
    NORM_BUDGET,
};

use thiserror::Error;

use crate::noise::NoiseError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

pub type Result<T> = std::result::Result<T, ChaosError>;
