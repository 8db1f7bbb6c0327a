//! Smooth compactly supported profiles: bumps, steps, and unit-mass radial mollifiers.

use crate::quad::{sphere_area, GaussRule};

/// Standard bump `exp(-1/(1-u²))` on `|u| < 1`, zero outside.
pub fn bump(u: f64) -> f64 {
    let v = 1.0 - u * u;
    if v <= 0.0 {
        0.0
    } else {
        (-1.0 / v).exp()
    }
}

/// Smooth monotone step: 0 for `v ≤ 0`, 1 for `v ≥ 1`.
pub fn smooth_step(v: f64) -> f64 {
    let h = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    let a = h(v);
    let b = h(1.0 - v);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Smooth transition equal to 1 on `[0, lo]` and 0 on `[hi, ∞)`.
pub fn plateau(u: f64, lo: f64, hi: f64) -> f64 {
    smooth_step((hi - u) / (hi - lo))
}

/// `∫_0^1 r^{d-1} bump(r) dr`, by high-order Gauss quadrature.
fn radial_moment(d: usize) -> f64 {
    GaussRule::new(64).integrate_composite(0.0, 1.0, 8, |r| r.powi(d as i32 - 1) * bump(r))
}

/// Radial bump in `ℝ^d` supported in the ball of radius `radius`, normalized to unit mass.
#[derive(Debug, Clone, Copy)]
pub struct RadialBump {
    d: usize,
    radius: f64,
    norm: f64,
}

impl RadialBump {
    pub fn new(d: usize, radius: f64) -> Self {
        let unit_mass = sphere_area(d) * radial_moment(d);
        let norm = 1.0 / (unit_mass * radius.powi(d as i32));
        Self { d, radius, norm }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Value at distance `r` from the centre.
    pub fn at(&self, r: f64) -> f64 {
        self.norm * bump(r / self.radius)
    }

    /// Total mass by radial quadrature (should be 1).
    pub fn mass(&self) -> f64 {
        let rule = GaussRule::new(64);
        sphere_area(self.d) * rule.integrate_composite(0.0, self.radius, 8, |r| r.powi(self.d as i32 - 1) * self.at(r))
    }
}

/// One-dimensional unit-mass bump supported in `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy)]
pub struct Bump1d {
    half_width: f64,
    norm: f64,
}

impl Bump1d {
    pub fn new(half_width: f64) -> Self {
        let unit = 2.0 * radial_moment(1);
        Self { half_width, norm: 1.0 / (unit * half_width) }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn at(&self, t: f64) -> f64 {
        self.norm * bump(t / self.half_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_bumps_have_unit_mass() {
        for d in 1..=4 {
            let b = RadialBump::new(d, 0.3);
            assert!((b.mass() - 1.0).abs() < 1e-8, "d={d} mass={}", b.mass());
        }
    }

    #[test]
    fn one_dimensional_bump_has_unit_mass() {
        let b = Bump1d::new(0.2);
        let m = GaussRule::new(64).integrate_composite(-0.2, 0.2, 8, |t| b.at(t));
        assert!((m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn step_and_plateau_limits() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(plateau(0.3, 0.5, 1.0), 1.0);
        assert_eq!(plateau(1.0, 0.5, 1.0), 0.0);
        let mid = plateau(0.75, 0.5, 1.0);
        assert!(mid > 0.0 && mid < 1.0);
    }
}
