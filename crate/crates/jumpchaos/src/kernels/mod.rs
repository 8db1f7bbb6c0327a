//! Singular space-time kernels on `ℝ × εℤ³`: the smoothed heat kernel and its
//! compactly supported singular part, lattice mollification, dyadic
//! decompositions, weighted norms, renormalization operators and the Φ⁴₃
//! renormalization constants.
//!
//! Kernels are sampled on a time grid of step `dt` and on lattice offsets (in
//! units of `ε`). Off-grid times use four-point Lagrange interpolation.

mod dyadic;
mod export;
mod norm;
mod renorm;
mod singular;
mod torus;

pub use dyadic::{dyadic_decompose, partition_weight, surrogate_norm, DyadicLevel, DyadicStack, LevelReport};
pub use export::{export_kernel, read_kernel_header, KernelHeader, EXPORT_MAGIC};
pub use norm::{derivative, kernel_norm, multiindices};
pub use renorm::{
    chain_kernel, chain_kernel_direct, chain_renorm, negative_renorm_apply, positive_renorm, renorm_constant_c1,
    renorm_constant_c2, Estimate, MeasurePoint, PositiveRenorm,
};
pub use singular::{build_singular_kernel, Cutoff, Remainder, SingularKernel, SmoothedHeat};
pub use torus::{discrete_convolve, MollifiedKernel, TorusKernel};

use std::sync::Arc;

use thiserror::Error;

use crate::noise::NoiseError;
use crate::quad::lagrange4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported renormalization order {0}")]
    UnsupportedOrder(i32),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Parabolic scaling `𝔰 = (2, 1, .., 1)` on `ℝ × ℝ^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParabolicGeometry {
    pub d: usize,
}

impl ParabolicGeometry {
    pub const PHI43: ParabolicGeometry = ParabolicGeometry { d: 3 };

    /// `|𝔰| = d + 2`.
    pub fn scaling_dimension(&self) -> usize {
        self.d + 2
    }

    /// `‖z‖_𝔰 = |t|^{1/2} + |x|`.
    pub fn norm(&self, t: f64, x: &[f64]) -> f64 {
        t.abs().sqrt() + x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `λ^𝔰 z = (λ² t, λ x)`.
    pub fn dilate(&self, lambda: f64, t: f64, x: &[f64]) -> (f64, Vec<f64>) {
        (lambda * lambda * t, x.iter().map(|v| lambda * v).collect())
    }
}

/// `|k|_𝔰 = 2 k_0 + Σ k_i` for `k = (k_0, k_1, .., k_d)`.
pub fn multiindex_weight(k: &[u32]) -> u32 {
    match k.split_first() {
        Some((k0, rest)) => 2 * k0 + rest.iter().sum::<u32>(),
        None => 0,
    }
}

/// Heat kernel `(4πt)^{-3/2} exp(-|x|²/(4t))` on `ℝ³`, zero for `t ≤ 0`.
pub fn heat_kernel(t: f64, x: [f64; 3]) -> f64 {
    heat_kernel_radial(t, (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
}

pub(crate) fn heat_kernel_radial(t: f64, r: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (4.0 * std::f64::consts::PI * t).powf(-1.5) * (-r * r / (4.0 * t)).exp()
}

/// Order of singularity, renormalization order and regularization scale of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelLabel {
    pub a: f64,
    pub r: i32,
    pub e: f64,
}

/// A kernel sampled on time nodes `i·dt` and lattice offsets in `ℤ³`.
pub trait SpaceTimeKernel: Send + Sync {
    /// Lattice mesh `ε`.
    fn eps(&self) -> f64;
    fn dt(&self) -> f64;
    /// Inclusive range of time nodes outside which the kernel vanishes.
    fn node_range(&self) -> (i64, i64);
    /// Largest `|offset_j|` at which the kernel can be nonzero.
    fn reach(&self) -> i64;
    /// Value at time node `i` and lattice offset `off`; zero outside the support.
    fn node_value(&self, i: i64, off: [i64; 3]) -> f64;
    fn label(&self) -> KernelLabel;

    /// Value at an arbitrary time by cubic interpolation between nodes.
    fn value(&self, t: f64, off: [i64; 3]) -> f64 {
        let (lo, hi) = self.node_range();
        let u = t / self.dt();
        let i0 = u.floor();
        let frac = u - i0;
        let i0 = i0 as i64;
        if i0 + 2 < lo || i0 - 1 > hi {
            return 0.0;
        }
        let w = lagrange4(frac);
        (0..4)
            .map(|j| {
                let i = i0 - 1 + j as i64;
                if i < lo || i > hi {
                    0.0
                } else {
                    w[j] * self.node_value(i, off)
                }
            })
            .sum()
    }

    /// Time of node `i`.
    fn node_time(&self, i: i64) -> f64 {
        i as f64 * self.dt()
    }
}

impl<K: SpaceTimeKernel + ?Sized> SpaceTimeKernel for Arc<K> {
    fn eps(&self) -> f64 {
        (**self).eps()
    }
    fn dt(&self) -> f64 {
        (**self).dt()
    }
    fn node_range(&self) -> (i64, i64) {
        (**self).node_range()
    }
    fn reach(&self) -> i64 {
        (**self).reach()
    }
    fn node_value(&self, i: i64, off: [i64; 3]) -> f64 {
        (**self).node_value(i, off)
    }
    fn label(&self) -> KernelLabel {
        (**self).label()
    }
    fn value(&self, t: f64, off: [i64; 3]) -> f64 {
        (**self).value(t, off)
    }
}

type Profile = Arc<dyn Fn(f64, [f64; 3]) -> f64 + Send + Sync>;

/// A kernel given by a closure of physical coordinates `(t, x)`.
#[derive(Clone)]
pub struct AnalyticKernel {
    eps: f64,
    dt: f64,
    range: (i64, i64),
    reach: i64,
    label: KernelLabel,
    f: Profile,
}

impl AnalyticKernel {
    /// `f` must vanish for `|t| > time_support` or `|x_j| > space_support`.
    pub fn new(
        eps: f64,
        dt: f64,
        time_support: (f64, f64),
        space_support: f64,
        label: KernelLabel,
        f: impl Fn(f64, [f64; 3]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let range = ((time_support.0 / dt).floor() as i64, (time_support.1 / dt).ceil() as i64);
        let reach = (space_support / eps).ceil() as i64;
        Self { eps, dt, range, reach, label, f: Arc::new(f) }
    }
}

impl SpaceTimeKernel for AnalyticKernel {
    fn eps(&self) -> f64 {
        self.eps
    }
    fn dt(&self) -> f64 {
        self.dt
    }
    fn node_range(&self) -> (i64, i64) {
        self.range
    }
    fn reach(&self) -> i64 {
        self.reach
    }
    fn node_value(&self, i: i64, off: [i64; 3]) -> f64 {
        if i < self.range.0 || i > self.range.1 || off.iter().any(|c| c.abs() > self.reach) {
            return 0.0;
        }
        let x = [off[0] as f64 * self.eps, off[1] as f64 * self.eps, off[2] as f64 * self.eps];
        (self.f)(i as f64 * self.dt, x)
    }
    fn label(&self) -> KernelLabel {
        self.label
    }
}

/// Physical coordinates of a lattice offset.
pub(crate) fn offset_position(eps: f64, off: [i64; 3]) -> [f64; 3] {
    [off[0] as f64 * eps, off[1] as f64 * eps, off[2] as f64 * eps]
}

/// Every offset of the cube `[-r, r]³`.
pub(crate) fn cube(r: i64) -> impl Iterator<Item = [i64; 3]> {
    (-r..=r).flat_map(move |a| (-r..=r).flat_map(move |b| (-r..=r).map(move |c| [a, b, c])))
}
