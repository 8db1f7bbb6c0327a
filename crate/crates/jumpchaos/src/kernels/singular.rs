//! The smoothed heat kernel `P^ε = P * ψ̃_𝔢` and its split `P^ε = K^ε + R^ε`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{KernelError, KernelLabel, ParabolicGeometry, Result, SpaceTimeKernel};
use crate::profiles::{plateau, Bump1d, RadialBump};
use crate::quad::GaussRule;

/// Half-width of the time factor of `ψ̃` in units of `𝔢²`.
const TIME_HALF_WIDTH: f64 = 0.5;
/// Radius of the spatial factor of `ψ̃` in units of `𝔢`.
const SPACE_RADIUS: f64 = 1.0;

/// `P^ε(t, x) = ∫ P(t - s, x - y) ψ̃_𝔢(s, y) ds dy` for the product mollifier
/// `ψ̃(s, y) = ρ(s) g(|y|)`, evaluated by nested Gauss-Legendre quadrature.
#[derive(Debug, Clone)]
pub struct SmoothedHeat {
    e: f64,
    time: Bump1d,
    space: RadialBump,
    rule_t: GaussRule,
    rule_s: GaussRule,
}

impl SmoothedHeat {
    pub fn new(e: f64) -> Self {
        Self {
            e,
            time: Bump1d::new(TIME_HALF_WIDTH * e * e),
            space: RadialBump::new(3, SPACE_RADIUS * e),
            rule_t: GaussRule::new(16),
            rule_s: GaussRule::new(32),
        }
    }

    pub fn scale(&self) -> f64 {
        self.e
    }

    /// Earliest time at which `P^ε` can be nonzero.
    pub fn time_start(&self) -> f64 {
        -self.time.half_width()
    }

    /// Heat kernel convolved in space only: `∫ P(τ, x - y) g(|y|) dy` at `|x| = r`.
    fn spatial(&self, tau: f64, r: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let big_r = self.space.radius();
        let sq = tau.sqrt();
        let pref = (4.0 * PI * tau).powf(-1.5);
        if r == 0.0 {
            let hi = big_r.min(10.0 * sq);
            return 4.0
                * PI
                * pref
                * self
                    .rule_s
                    .integrate_composite(0.0, hi, 2, |s| s * s * self.space.at(s) * (-s * s / (4.0 * tau)).exp());
        }
        let lo = (r - 10.0 * sq).max(0.0);
        let hi = big_r.min(r + 10.0 * sq);
        if lo >= hi {
            return 0.0;
        }
        // Angular integral in closed form: e^{-(r-s)²/4τ} - e^{-(r+s)²/4τ}, written stably.
        let integral = self.rule_s.integrate_composite(lo, hi, 2, |s| {
            let d = r - s;
            s * self.space.at(s) * (-d * d / (4.0 * tau)).exp() * -(-r * s / tau).exp_m1()
        });
        pref * 2.0 * PI * 2.0 * tau / r * integral
    }

    /// `P^ε(t, x)` at `|x| = r`.
    pub fn value(&self, t: f64, r: f64) -> f64 {
        let w = self.time.half_width();
        let upper = w.min(t);
        if upper <= -w {
            return 0.0;
        }
        self.rule_t.integrate_composite(-w, upper, 4, |s| self.time.at(s) * self.spatial(t - s, r))
    }

    /// Spatial mass `∫ P^ε(t, x) dx` (equals `∫_{s<t} ρ`), by radial quadrature.
    pub fn spatial_mass(&self, t: f64) -> f64 {
        let reach = self.space.radius() + 12.0 * (t + self.time.half_width()).max(0.0).sqrt();
        GaussRule::new(32).integrate_composite(0.0, reach, 24, |r| 4.0 * PI * r * r * self.value(t, r))
    }
}

type CutoffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The cutoff `χ` with `χ = 1` on `‖z‖_𝔰 ≤ 1/2` and `χ = 0` on `‖z‖_𝔰 ≥ 1`.
#[derive(Clone)]
pub enum Cutoff {
    /// Smooth step in the surrogate norm `ρ = (t² + |x|⁴)^{1/4}`, from 1 at `ρ = 1/2`
    /// to 0 at `ρ = 2^{-3/4}`. Since `ρ ≤ ‖z‖_𝔰 ≤ 2^{3/4} ρ` the plateau conditions hold.
    Standard,
    /// A user profile `χ(t, |x|)`; it is assumed to vanish on `‖z‖_𝔰 ≥ 1`.
    Custom(CutoffFn),
}

impl std::fmt::Debug for Cutoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cutoff::Standard => write!(f, "Standard"),
            Cutoff::Custom(_) => write!(f, "Custom"),
        }
    }
}

const STANDARD_OUTER: f64 = 0.594_603_557_501_360_5; // 2^{-3/4}

impl Cutoff {
    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Cutoff::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64, r: f64) -> f64 {
        match self {
            Cutoff::Standard => {
                let rho = (t * t + r.powi(4)).powf(0.25);
                plateau(rho, 0.5, STANDARD_OUTER)
            }
            Cutoff::Custom(f) => f(t, r),
        }
    }

    /// Bounds `(|t|, |x|)` outside which the cutoff vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Cutoff::Standard => (STANDARD_OUTER * STANDARD_OUTER, STANDARD_OUTER),
            Cutoff::Custom(_) => (1.0, 1.0),
        }
    }

    /// Sampled check of the plateau conditions.
    pub fn validate(&self) -> Result<()> {
        let g = ParabolicGeometry::PHI43;
        for i in 0..=80 {
            for j in 0..=80 {
                let t = -1.2 + 2.4 * i as f64 / 80.0;
                let r = 1.2 * j as f64 / 80.0;
                let n = g.norm(t, &[r, 0.0, 0.0]);
                let v = self.eval(t, r);
                if n <= 0.5 && (v - 1.0).abs() > 1e-9 {
                    return Err(KernelError::Config(format!(
                        "cutoff is {v} at ‖z‖ = {n:.3} (t = {t:.3}, |x| = {r:.3}); it must equal 1 on ‖z‖ <= 1/2"
                    )));
                }
                if n >= 1.0 && v.abs() > 1e-9 {
                    return Err(KernelError::Config(format!(
                        "cutoff is {v} at ‖z‖ = {n:.3} (t = {t:.3}, |x| = {r:.3}); it must vanish on ‖z‖ >= 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The singular part `K^ε = χ P^ε`, tabulated by time node and `|offset|²`.
#[derive(Debug, Clone)]
pub struct SingularKernel {
    eps: f64,
    dt: f64,
    range: (i64, i64),
    m_max: usize,
    reach: i64,
    table: Vec<f64>,
    heat: SmoothedHeat,
    cutoff: Cutoff,
}

/// `R^ε = (1 - χ) P^ε`, evaluated directly.
#[derive(Debug, Clone)]
pub struct Remainder {
    heat: SmoothedHeat,
    cutoff: Cutoff,
}

impl Remainder {
    pub fn value(&self, t: f64, x: [f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        (1.0 - self.cutoff.eval(t, r)) * self.heat.value(t, r)
    }
}

/// Build `K^ε` on the lattice of mesh `eps` with regularization `e` and time step `eps² / substeps`,
/// together with the remainder `R^ε`.
pub fn build_singular_kernel(eps: f64, e: f64, cutoff: Cutoff, substeps: usize) -> Result<(SingularKernel, Remainder)> {
    if !(e >= eps * (1.0 - 1e-12) && e <= 1.0) {
        return Err(KernelError::Config(format!("regularization {e} must lie in [ε, 1] = [{eps}, 1]")));
    }
    if substeps == 0 {
        return Err(KernelError::Config("time substeps must be positive".into()));
    }
    cutoff.validate()?;
    let heat = SmoothedHeat::new(e);
    let dt = eps * eps / substeps as f64;
    let (t_sup, r_sup) = cutoff.support();
    let range = ((heat.time_start() / dt).floor() as i64, (t_sup / dt).ceil() as i64);
    let m_max = ((r_sup / eps).powi(2)).floor() as usize;
    let reach = (r_sup / eps).floor() as i64;
    let width = m_max + 1;
    let mut table = vec![0.0; (range.1 - range.0 + 1) as usize * width];
    for i in range.0..=range.1 {
        let t = i as f64 * dt;
        let row = (i - range.0) as usize * width;
        for m in 0..=m_max {
            let r = eps * (m as f64).sqrt();
            let chi = cutoff.eval(t, r);
            if chi != 0.0 {
                table[row + m] = chi * heat.value(t, r);
            }
        }
    }
    let remainder = Remainder { heat: heat.clone(), cutoff: cutoff.clone() };
    Ok((SingularKernel { eps, dt, range, m_max, reach, table, heat, cutoff }, remainder))
}

impl SingularKernel {
    pub fn smoothed_heat(&self) -> &SmoothedHeat {
        &self.heat
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    /// `K^ε` at node `i` and squared offset length `m`.
    pub fn radial_node(&self, i: i64, m: usize) -> f64 {
        if i < self.range.0 || i > self.range.1 || m > self.m_max {
            return 0.0;
        }
        self.table[(i - self.range.0) as usize * (self.m_max + 1) + m]
    }
}

impl SpaceTimeKernel for SingularKernel {
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
        let m = off[0] * off[0] + off[1] * off[1] + off[2] * off[2];
        self.radial_node(i, m as usize)
    }
    fn label(&self) -> KernelLabel {
        KernelLabel { a: 3.0, r: 0, e: self.heat.scale() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_kernel_radial;

    #[test]
    fn smoothed_heat_resembles_heat_kernel_away_from_origin() {
        let h = SmoothedHeat::new(1.0 / 16.0);
        for &(t, r) in &[(0.1, 0.2), (0.2, 0.05), (0.05, 0.3)] {
            let p = heat_kernel_radial(t, r);
            let v = h.value(t, r);
            assert!((v - p).abs() < 0.02 * p, "t={t} r={r}: {v} vs {p}");
        }
        assert_eq!(h.value(-0.01, 0.0), 0.0);
    }

    #[test]
    fn smoothed_heat_spatial_mass_follows_time_profile() {
        let h = SmoothedHeat::new(0.25);
        assert!((h.spatial_mass(0.2) - 1.0).abs() < 1e-6);
        let half = h.spatial_mass(0.0);
        assert!((half - 0.5).abs() < 1e-6, "{half}");
    }

    #[test]
    fn small_radius_is_continuous() {
        let h = SmoothedHeat::new(0.125);
        let a = h.value(0.004, 0.0);
        let b = h.value(0.004, 1e-7);
        assert!((a - b).abs() < 1e-6 * a, "{a} {b}");
    }

    #[test]
    fn standard_cutoff_satisfies_plateau() {
        Cutoff::Standard.validate().unwrap();
        assert!(Cutoff::custom(|_, _| 1.0).validate().is_err());
        let step = Cutoff::custom(|t, r| crate::profiles::smooth_step(2.0 * (1.0 - t.abs().sqrt() - r)));
        step.validate().unwrap();
    }

    #[test]
    fn kernel_vanishes_outside_unit_ball_and_splits_heat() {
        let (k, rem) = build_singular_kernel(0.125, 0.25, Cutoff::Standard, 4).unwrap();
        let g = ParabolicGeometry::PHI43;
        let (lo, hi) = k.node_range();
        for i in (lo..=hi + 40).step_by(3) {
            for off in super::super::cube(9) {
                let x = super::super::offset_position(0.125, off);
                let t = i as f64 * k.dt();
                let v = k.node_value(i, off);
                if g.norm(t, &x) > 1.0 {
                    assert_eq!(v, 0.0);
                }
                if off[1] == 0 && off[2] == 0 && off[0] % 2 == 0 {
                    let r = x[0].abs();
                    let p = k.smoothed_heat().value(t, r);
                    assert!((v + rem.value(t, x) - p).abs() < 1e-12 * p.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_regularization() {
        assert!(build_singular_kernel(0.25, 0.1, Cutoff::Standard, 4).is_err());
    }
}
