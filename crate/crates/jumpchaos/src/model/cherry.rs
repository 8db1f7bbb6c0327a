//! The fully contracted part of `∫ φ (Ψ² - C₁)`: the same-jump terms minus their mean,
//!
//! `X = ε⁶ Σ_jumps (Δ𝕄)² F(s, y) - C₁ ∫ φ`, with `F(s, y) = ∫ φ(z̄) K^𝔢(z̄ - (s, y))² dz̄`.
//!
//! `F` is evaluated exactly for the interpolated kernel. Writing
//! `K(t_g - s) = Σ_m L_m K[g - c + m]`, the square expands into the correlations
//! `H_δ(q, y) = Σ_{n,x} W(n + q, x) K[n](x - y) K[n + δ](x - y)` for `δ = 0..3`,
//! computed once by FFT.

use rustfft::num_complex::Complex64;

use super::engine::parallel_map;
use super::grid::{LatticeTest, ModelGrid};
use super::{Result, TestFunction};
use crate::kernels::SpaceTimeKernel;
use crate::noise::{sample_paths, MartingalePathSet};
use crate::quad::{lagrange4, GaussRule};
use crate::rng::derive_seed;

/// Grid index offset of physical node 0 (matches the field grid).
const PAD: usize = 2;

pub struct CherryDiagram<'a> {
    grid: &'a ModelGrid,
    test: LatticeTest,
    /// `H_δ` for `δ = 0..3`, node-major.
    h: [Vec<f64>; 4],
}

impl<'a> CherryDiagram<'a> {
    pub fn new(grid: &'a ModelGrid, phi: &TestFunction) -> Result<Self> {
        let test = grid.discretize(phi)?;
        let f = *grid.frame();
        let k = grid.k_frak();
        let (lo, hi) = k.node_range();
        let mut fft = grid.fft();
        let mut w = vec![Complex64::new(0.0, 0.0); f.len * f.vol];
        for &(g, x, v) in &test.entries {
            w[g * f.vol + x].re += v;
        }
        fft.forward(&mut w);
        let h = std::array::from_fn(|delta| {
            let mut q = vec![Complex64::new(0.0, 0.0); f.len * f.vol];
            for n in lo..=hi - delta as i64 {
                let g = n.rem_euclid(f.len as i64) as usize;
                let (r0, r1) = (k.row(n), k.row(n + delta as i64));
                for x in 0..f.vol {
                    q[g * f.vol + x].re += r0[x] * r1[x];
                }
            }
            fft.forward(&mut q);
            for (a, b) in q.iter_mut().zip(&w) {
                *a = b * a.conj();
            }
            fft.inverse(&mut q);
            q.into_iter().map(|c| c.re).collect()
        });
        Ok(Self { grid, test, h })
    }

    fn h(&self, delta: usize, q: usize, y: usize) -> f64 {
        self.h[delta][q * self.grid.frame().vol + y]
    }

    /// `F(s, y) = Σ_{g,x} W(g, x) K(t_g - s, x - y)²`.
    pub fn weight(&self, s: f64, y: usize) -> f64 {
        let f = self.grid.frame();
        let u = s / f.dt;
        let i0 = u.floor();
        let l = lagrange4(1.0 - (u - i0));
        let c = i0 as usize + 2 + PAD;
        let mut acc = 0.0;
        for m in 0..4 {
            for mp in 0..4 {
                let lo = m.min(mp);
                acc += l[m] * l[mp] * self.h(m.abs_diff(mp), c - lo, y);
            }
        }
        acc
    }

    /// `X` for one path.
    pub fn evaluate(&self, path: &MartingalePathSet) -> f64 {
        let a = path.jump_size();
        let cell = self.grid.lattice().cell_volume();
        let sum: f64 = path.iter_events().map(|e| self.weight(e.time, e.site)).sum();
        cell * cell * a * a * sum - self.grid.c1().value * self.test.mass()
    }

    /// `E[X] = ε⁶ a² ρ Σ_y ∫ F ds - C₁ ∫ φ`; zero when `C₁` is exact.
    pub fn exact_mean(&self) -> f64 {
        let (m1, _) = self.moments();
        m1 - self.grid.c1().value * self.test.mass()
    }

    /// `Var X = ε¹² a⁴ ρ Σ_y ∫ F² ds` for the symmetric model.
    pub fn exact_variance(&self) -> f64 {
        self.moments().1
    }

    fn moments(&self) -> (f64, f64) {
        let lat = self.grid.lattice();
        let spec = self.grid.spec();
        let (a, rho, cell) = (spec.jump_size(lat.eps()), spec.site_rate, lat.cell_volume());
        let f = self.grid.frame();
        // F is a polynomial of degree ≤ 6 on each cell, so 8 Gauss points integrate F and F² exactly.
        let cells = f.len - 2 * PAD;
        let rule = GaussRule::new(8);
        let pts: Vec<(f64, f64)> = rule.mapped(0.0, 1.0).collect();
        let (mut s1, mut s2) = (0.0, 0.0);
        for y in 0..f.vol {
            for i in 0..cells {
                for &(x, w) in &pts {
                    let v = self.weight((i as f64 + x) * f.dt, y);
                    s1 += w * v;
                    s2 += w * v * v;
                }
            }
        }
        let scale = cell * cell * a * a;
        (scale * rho * f.dt * s1, scale * scale * rho * f.dt * s2)
    }

    /// `X` on replicas `0..count`, replica `r` seeded by `derive_seed(seed, r)`.
    pub fn run(&self, seed: u64, count: usize) -> Result<Vec<f64>> {
        let lattice = self.grid.lattice();
        let spec = self.grid.spec();
        parallel_map(
            count,
            || (),
            |_, r| -> Result<f64> {
                let path = sample_paths(lattice, spec, derive_seed(seed, r as u64))?;
                Ok(self.evaluate(&path))
            },
        )
        .into_iter()
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::grid::ModelParams;
    use super::*;
    use crate::noise::Jump;

    fn grid() -> ModelGrid {
        let mut p = ModelParams::new(0.25, 0.25);
        p.cubic = false;
        ModelGrid::new(p).unwrap()
    }

    #[test]
    fn weight_matches_direct_square_sum() {
        let g = grid();
        let phi = g.test_function(0.5).unwrap();
        let d = CherryDiagram::new(&g, &phi).unwrap();
        let f = *g.frame();
        let k = g.k_frak();
        for (s, y) in [(0.21, 0usize), (0.4377, 5), (f.time(f.center) - 0.01, 33)] {
            let mut want = 0.0;
            for &(gi, x, w) in &d.test.entries {
                let off = g.lattice().displacement(y, x);
                want += w * k.value(f.time(gi) - s, [off[0], off[1], off[2]]).powi(2);
            }
            let got = d.weight(s, y);
            assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "{got} {want}");
        }
    }

    #[test]
    fn diagonal_part_is_centered_and_matches_psi_square() {
        let g = grid();
        let phi = g.test_function(0.5).unwrap();
        let d = CherryDiagram::new(&g, &phi).unwrap();
        assert!(d.exact_mean().abs() < 1e-9 * g.c1().value);
        assert!(d.exact_variance() > 0.0);
        // One jump: the full pairing of Ψ² is exactly the diagonal term.
        let mut events = vec![Vec::new(); g.lattice().sites()];
        events[9].push(Jump { time: 0.3, sign: 1 });
        let path = MartingalePathSet::from_events(*g.lattice(), *g.spec(), events, 0).unwrap();
        let psi = g.psi_field(&path).unwrap();
        let c1 = g.c1().value;
        let full = super::super::grid::pi_psi2(&psi, &d.test, c1);
        assert!((d.evaluate(&path) - full).abs() < 1e-12 * (1.0 + full.abs()));
    }
}
