//! Dyadic decomposition `K = Σ_{n=0}^N K^{(n)}` by a smooth partition of unity in
//! the parabolic scale.
//!
//! The partition is built from `ρ(t, x) = (t² + |x|⁴)^{1/4}`, which is smooth away
//! from the origin and satisfies `2^{-3/4} ‖z‖_𝔰 ≤ ρ ≤ ‖z‖_𝔰`. With
//! `Θ_n = θ(2^n ρ)` and `θ ≡ 1` on `[0, 1]`, `θ ≡ 0` on `[2^{1/4}, ∞)`, level `n`
//! lives where `2^{-n-1} ≤ ‖z‖_𝔰 ≤ 2^{-n+1}`.

use std::sync::Arc;

use super::{
    cube, derivative, multiindex_weight, multiindices, offset_position, KernelLabel, ParabolicGeometry, SpaceTimeKernel,
};
use crate::profiles::plateau;

/// Ratios of the level supports: level `n` sits in `[C₁ 2^{-n}, C₂ 2^{-n}]`.
pub const SUPPORT_RATIOS: (f64, f64) = (0.5, 2.0);

/// `ρ(t, x) = (t² + |x|⁴)^{1/4}`.
pub fn surrogate_norm(t: f64, x: [f64; 3]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    (t * t + r2 * r2).sqrt().sqrt()
}

fn theta(n: usize, rho: f64) -> f64 {
    plateau(2f64.powi(n as i32) * rho, 1.0, 2f64.powf(0.25))
}

/// `ψ^{(n)}(t, x)` for the partition with levels `0..=big_n`.
pub fn partition_weight(n: usize, big_n: usize, t: f64, x: [f64; 3]) -> f64 {
    let rho = surrogate_norm(t, x);
    if big_n == 0 {
        return 1.0;
    }
    match n {
        0 => 1.0 - theta(1, rho),
        _ if n == big_n => theta(big_n, rho),
        _ if n < big_n => theta(n, rho) - theta(n + 1, rho),
        _ => 0.0,
    }
}

/// Level `n` of a decomposition: `K^{(n)} = ψ^{(n)} K`.
#[derive(Clone)]
pub struct DyadicLevel {
    base: Arc<dyn SpaceTimeKernel>,
    n: usize,
    big_n: usize,
}

impl DyadicLevel {
    pub fn level(&self) -> usize {
        self.n
    }

    /// The shell `[C₁ 2^{-n}, C₂ 2^{-n}]`, with no lower bound on the last level.
    pub fn support_shell(&self) -> (f64, f64) {
        let s = 2f64.powi(-(self.n as i32));
        let lo = if self.n == self.big_n { 0.0 } else { SUPPORT_RATIOS.0 * s };
        (lo, SUPPORT_RATIOS.1 * s)
    }
}

impl SpaceTimeKernel for DyadicLevel {
    fn eps(&self) -> f64 {
        self.base.eps()
    }
    fn dt(&self) -> f64 {
        self.base.dt()
    }
    fn node_range(&self) -> (i64, i64) {
        self.base.node_range()
    }
    fn reach(&self) -> i64 {
        self.base.reach()
    }
    fn node_value(&self, i: i64, off: [i64; 3]) -> f64 {
        let v = self.base.node_value(i, off);
        if v == 0.0 {
            return 0.0;
        }
        let t = self.base.node_time(i);
        v * partition_weight(self.n, self.big_n, t, offset_position(self.base.eps(), off))
    }
    fn label(&self) -> KernelLabel {
        self.base.label()
    }
}

/// Per-level measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub level: usize,
    /// `max_{|k|_𝔰 ≤ q} sup |D^k K^{(n)}| 2^{-n(a + |k|_𝔰)}`.
    pub constant: f64,
    /// Smallest and largest `‖z‖_𝔰` at which the level is nonzero on the grid.
    pub observed_support: (f64, f64),
    pub shell: (f64, f64),
}

impl LevelReport {
    pub fn support_ok(&self) -> bool {
        let tol = 1e-12;
        self.observed_support.1 == 0.0
            || (self.observed_support.0 >= self.shell.0 - tol && self.observed_support.1 <= self.shell.1 + tol)
    }
}

#[derive(Clone)]
pub struct DyadicStack {
    base: Arc<dyn SpaceTimeKernel>,
    levels: Vec<DyadicLevel>,
}

/// Decompose `k` into `N + 1` levels with `N = -⌊log₂ 𝔢⌋`.
pub fn dyadic_decompose(k: Arc<dyn SpaceTimeKernel>, e: f64) -> DyadicStack {
    let big_n = (-(e.log2() + 1e-12).floor()).max(0.0) as usize;
    let levels = (0..=big_n).map(|n| DyadicLevel { base: k.clone(), n, big_n }).collect();
    DyadicStack { base: k, levels }
}

impl DyadicStack {
    pub fn levels(&self) -> &[DyadicLevel] {
        &self.levels
    }

    /// Index `N` of the finest level.
    pub fn finest(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn base(&self) -> &Arc<dyn SpaceTimeKernel> {
        &self.base
    }

    /// `Σ_n K^{(n)}(z)` at a grid point.
    pub fn reconstruct(&self, i: i64, off: [i64; 3]) -> f64 {
        self.levels.iter().map(|l| l.node_value(i, off)).sum()
    }

    /// Largest relative reconstruction error over the grid, relative to `sup |K|`.
    pub fn reconstruction_error(&self) -> f64 {
        let (lo, hi) = self.base.node_range();
        let mut sup = 0.0f64;
        let mut err = 0.0f64;
        for i in lo..=hi {
            for off in cube(self.base.reach()) {
                let v = self.base.node_value(i, off);
                sup = sup.max(v.abs());
                err = err.max((self.reconstruct(i, off) - v).abs());
            }
        }
        if sup == 0.0 {
            0.0
        } else {
            err / sup
        }
    }

    /// Support and derivative-bound measurements for each level.
    pub fn reports(&self, a: f64, q: u32) -> Vec<LevelReport> {
        let g = ParabolicGeometry::PHI43;
        let (lo, hi) = self.base.node_range();
        let eps = self.base.eps();
        let mis = multiindices(q);
        self.levels
            .iter()
            .map(|lvl| {
                let scale = 2f64.powi(lvl.n as i32);
                let mut constant = 0.0f64;
                let mut support = (f64::INFINITY, 0.0f64);
                for i in lo..=hi {
                    let t = self.base.node_time(i);
                    for off in cube(self.base.reach()) {
                        let v = lvl.node_value(i, off);
                        if v != 0.0 {
                            let nz = g.norm(t, &offset_position(eps, off));
                            support = (support.0.min(nz), support.1.max(nz));
                        }
                        for &mi in &mis {
                            let d = if mi == [0; 4] { v } else { derivative(lvl, mi, i, off) };
                            let w = multiindex_weight(&mi) as f64;
                            constant = constant.max(d.abs() * scale.powf(-(a + w)));
                        }
                    }
                }
                if support.1 == 0.0 {
                    support.0 = 0.0;
                }
                LevelReport { level: lvl.n, constant, observed_support: support, shell: lvl.support_shell() }
            })
            .collect()
    }
}
