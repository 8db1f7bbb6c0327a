//! Quadrature and interpolation helpers shared by the numerical modules.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pairs: Vec<(f64, f64)>,
}

impl GaussRule {
    /// Rule with `n` nodes (exact for polynomials of degree `2n - 1`).
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("at least one node"));
        Self { pairs: rule.as_node_weight_pairs().to_vec() }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    /// `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// `∫_a^b f` split into `panels` equal panels.
    pub fn integrate_composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * width;
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }
}

/// Midpoint grid on `[t0, t1)` with cell width at most `h`.
///
/// Returns the cell midpoints and the common cell width.
pub fn midpoint_cells(t0: f64, t1: f64, h: f64) -> (Vec<f64>, f64) {
    if t1 <= t0 {
        return (Vec::new(), 0.0);
    }
    let n = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let width = (t1 - t0) / n as f64;
    ((0..n).map(|i| t0 + (i as f64 + 0.5) * width).collect(), width)
}

/// Four-point Lagrange weights for nodes at offsets `-1, 0, 1, 2` evaluated at `frac ∈ [0, 1)`.
pub fn lagrange4(frac: f64) -> [f64; 4] {
    let u = frac;
    [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ]
}

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let rule = GaussRule::new(4);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-11);
    }

    #[test]
    fn composite_rule_handles_oscillation() {
        let rule = GaussRule::new(8);
        let v = rule.integrate_composite(0.0, 10.0, 20, |x| x.sin());
        assert!((v - (1.0 - 10f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn midpoint_cells_cover_interval() {
        let (mids, w) = midpoint_cells(0.0, 1.0, 0.3);
        assert_eq!(mids.len(), 4);
        assert!((w * mids.len() as f64 - 1.0).abs() < 1e-15);
        assert!(midpoint_cells(1.0, 1.0, 0.1).0.is_empty());
    }

    #[test]
    fn lagrange_weights_reproduce_cubics() {
        for &u in &[0.0, 0.25, 0.5, 0.9] {
            let w = lagrange4(u);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let f = |x: f64| 2.0 * x * x * x - x + 0.5;
            let interp: f64 = (0..4).map(|j| w[j] * f(j as f64 - 1.0)).sum();
            assert!((interp - f(u)).abs() < 1e-12);
        }
        assert_eq!(lagrange4(0.0), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }
}
