//! The discrete model on the symbols `Ξ`, `Ψ`, `Ψ²` and `𝓘(Ψ³)Ψ²`, paired
//! against rescaled test functions.
//!
//! Fields live on a space-time grid with the lattice in space and time step
//! `dt = ε² / substeps`; see [`ModelGrid`]. Monte Carlo replicas are driven by
//! [`Engine`].

mod cherry;
mod engine;
mod grid;

pub use cherry::CherryDiagram;
pub(crate) use engine::parallel_map;
pub use engine::{Engine, Observable};
pub use grid::{
    lattice_weights, pi_ipsi3psi2, pi_psi, pi_psi2, pi_xi, psi_direct, xi_variance, CubicField, Frame, LatticeTest,
    ModelGrid, ModelParams, PsiField, XiWeight,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::kernels::KernelError;
use crate::noise::NoiseError;
use crate::profiles::bump;
use crate::quad::GaussRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// The four basis symbols of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelSymbol {
    Xi,
    Psi,
    Psi2,
    IPsi3Psi2,
}

impl ModelSymbol {
    pub const ALL: [ModelSymbol; 4] = [ModelSymbol::Xi, ModelSymbol::Psi, ModelSymbol::Psi2, ModelSymbol::IPsi3Psi2];

    /// Homogeneity `|τ|` with the small parameter `κ`.
    pub fn homogeneity(self, kappa: f64) -> f64 {
        match self {
            ModelSymbol::Xi => -2.5 - kappa,
            ModelSymbol::Psi => -0.5 - kappa,
            ModelSymbol::Psi2 => -1.0 - 2.0 * kappa,
            ModelSymbol::IPsi3Psi2 => -0.5 - 5.0 * kappa,
        }
    }

    /// Expected λ-slope of `E₂` (homogeneity at `κ = 0`).
    pub fn target_slope(self) -> f64 {
        self.homogeneity(0.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelSymbol::Xi => "Xi",
            ModelSymbol::Psi => "Psi",
            ModelSymbol::Psi2 => "Psi2",
            ModelSymbol::IPsi3Psi2 => "IPsi3Psi2",
        }
    }
}

impl fmt::Display for ModelSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelSymbol {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self> {
        ModelSymbol::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::Config(format!("unknown symbol '{s}'")))
    }
}

/// Time half-width of the base profile.
pub const TIME_SCALE: f64 = 0.25;
/// Spatial radius of the base profile.
pub const SPACE_SCALE: f64 = 0.5;

/// `φ^λ_z(t, x) = λ^{-5} φ(λ^{-2}(t - t̄), λ^{-1}(x - x̄))` for the product bump
/// `φ(t, x) ∝ b(t/τ₀) b(|x|/r₀)` of unit mass. With `τ₀ = 1/4` and `r₀ = 1/2`
/// the base is supported in the unit parabolic ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    lambda: f64,
    t: f64,
    x: [f64; 3],
    time_mass: f64,
    space_mass: f64,
}

fn bump_masses() -> (f64, f64) {
    let rule = GaussRule::new(48);
    let time = rule.integrate_composite(-1.0, 1.0, 8, bump);
    let space = 4.0 * std::f64::consts::PI * rule.integrate_composite(0.0, 1.0, 8, |r| r * r * bump(r));
    (time, space)
}

impl TestFunction {
    pub fn new(lambda: f64, t: f64, x: [f64; 3]) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(ModelError::Config(format!("scale λ = {lambda} must lie in (0, 1]")));
        }
        let (time_mass, space_mass) = bump_masses();
        Ok(Self { lambda, t, x, time_mass, space_mass })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn center(&self) -> (f64, [f64; 3]) {
        (self.t, self.x)
    }

    /// Half-width of the time support.
    pub fn time_half_width(&self) -> f64 {
        TIME_SCALE * self.lambda * self.lambda
    }
    pub fn time_support(&self) -> (f64, f64) {
        (self.t - self.time_half_width(), self.t + self.time_half_width())
    }
    /// Radius of the spatial support.
    pub fn radius(&self) -> f64 {
        SPACE_SCALE * self.lambda
    }

    /// Unit-mass time factor.
    pub fn time_profile(&self, t: f64) -> f64 {
        let w = self.time_half_width();
        bump((t - self.t) / w) / (w * self.time_mass)
    }

    /// Unit-mass spatial factor at distance `r` from the centre.
    pub fn space_profile(&self, r: f64) -> f64 {
        let rad = self.radius();
        bump(r / rad) / (rad.powi(3) * self.space_mass)
    }

    pub fn value(&self, t: f64, x: [f64; 3]) -> f64 {
        let r = ((x[0] - self.x[0]).powi(2) + (x[1] - self.x[1]).powi(2) + (x[2] - self.x[2]).powi(2)).sqrt();
        self.time_profile(t) * self.space_profile(r)
    }

    /// `∫ φ^λ_z` by product Gauss quadrature.
    pub fn mass(&self) -> f64 {
        let rule = GaussRule::new(48);
        let (lo, hi) = self.time_support();
        let time = rule.integrate_composite(lo, hi, 8, |t| self.time_profile(t));
        let space = 4.0
            * std::f64::consts::PI
            * rule.integrate_composite(0.0, self.radius(), 8, |r| r * r * self.space_profile(r));
        time * space
    }
}
