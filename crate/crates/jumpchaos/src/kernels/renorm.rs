//! Renormalization operators on kernels and the two Φ⁴₃ renormalization constants.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::torus::wrap;
use super::{KernelError, KernelLabel, Result, SpaceTimeKernel, TorusKernel};
use crate::fft::GridFft;
use crate::quad::lagrange4;

/// Work limit for point-pair sums.
const PAIR_BUDGET: f64 = 1e8;
/// Work limit for the direct chain-kernel oracle.
const DIRECT_BUDGET: f64 = 1e10;
/// Largest FFT grid for the chain kernel.
const FFT_BUDGET: f64 = 1e8;

/// A space-time point with lattice coordinates (in units of `ε`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurePoint {
    pub t: f64,
    pub x: [i64; 3],
}

impl MeasurePoint {
    pub fn new(t: f64, x: [i64; 3]) -> Self {
        Self { t, x }
    }

    fn minus(self, other: MeasurePoint) -> MeasurePoint {
        MeasurePoint {
            t: self.t - other.t,
            x: [self.x[0] - other.x[0], self.x[1] - other.x[1], self.x[2] - other.x[2]],
        }
    }

    fn shifted(self, axis: usize, by: i64) -> MeasurePoint {
        let mut x = self.x;
        x[axis] += by;
        MeasurePoint { t: self.t, x }
    }

    /// The point measure `ε³ Σ_y δ_y ⊗ dt` discretized by the midpoint rule on
    /// `[t0, t1]` with step `dt`, over offsets in `[-radius, radius]³`.
    pub fn lattice_measure(eps: f64, t0: f64, t1: f64, dt: f64, radius: i64) -> Vec<(MeasurePoint, f64)> {
        let (times, h) = crate::quad::midpoint_cells(t0, t1, dt);
        let w = eps.powi(3) * h;
        times.iter().flat_map(|&t| super::cube(radius).map(move |x| (MeasurePoint { t, x }, w))).collect()
    }
}

fn eval_at(k: &dyn SpaceTimeKernel, z: MeasurePoint) -> f64 {
    k.value(z.t, z.x)
}

/// Spatial gradient of `k` at `z` by central differences at step `ε`.
fn gradient(k: &dyn SpaceTimeKernel, z: MeasurePoint) -> [f64; 3] {
    let h = 2.0 * k.eps();
    std::array::from_fn(|j| (eval_at(k, z.shifted(j, 1)) - eval_at(k, z.shifted(j, -1))) / h)
}

/// `K̂(z₋, z₊) = K(z₊ - z₋) - Σ_{|k|_𝔰 < r} z₊^k / k! D^k K(-z₋)`.
#[derive(Clone)]
pub struct PositiveRenorm {
    kernel: Arc<dyn SpaceTimeKernel>,
    r: i32,
}

/// The two-point kernel `K̂` for renormalization order `r`; orders above 2 are not supported.
pub fn positive_renorm(k: Arc<dyn SpaceTimeKernel>, r: i32) -> Result<PositiveRenorm> {
    if r > 2 {
        return Err(KernelError::UnsupportedOrder(r));
    }
    Ok(PositiveRenorm { kernel: k, r })
}

impl PositiveRenorm {
    pub fn order(&self) -> i32 {
        self.r
    }

    pub fn eval(&self, zm: MeasurePoint, zp: MeasurePoint) -> f64 {
        let k = self.kernel.as_ref();
        let mut v = eval_at(k, zp.minus(zm));
        if self.r >= 1 {
            let origin = MeasurePoint::new(0.0, [0; 3]).minus(zm);
            v -= eval_at(k, origin);
            if self.r >= 2 {
                let g = gradient(k, origin);
                let eps = k.eps();
                v -= (0..3).map(|j| zp.x[j] as f64 * eps * g[j]).sum::<f64>();
            }
        }
        v
    }
}

/// `∫∫ K(z₊ - z₋) (T_r η)(z₋, z₊) μ(dz₋) μ(dz₊)` where `T_r η` subtracts the Taylor
/// expansion of `η(z₋, ·)` at `z₋` of parabolic order below `-r`.
///
/// Measures are weighted point lists. `r` must be `-1` or `-2`.
pub fn negative_renorm_apply(
    k: &dyn SpaceTimeKernel,
    r: i32,
    eta: &dyn Fn(MeasurePoint, MeasurePoint) -> f64,
    minus: &[(MeasurePoint, f64)],
    plus: &[(MeasurePoint, f64)],
) -> Result<f64> {
    if !(r == -1 || r == -2) {
        return Err(KernelError::UnsupportedOrder(r));
    }
    let pairs = minus.len() as f64 * plus.len() as f64;
    if pairs > PAIR_BUDGET {
        return Err(KernelError::Guard(format!("{pairs:.3e} point pairs exceed the budget")));
    }
    let mut total = 0.0;
    for &(zm, wm) in minus {
        let base = eta(zm, zm);
        let grad: [f64; 3] = if r == -2 {
            std::array::from_fn(|j| (eta(zm, zm.shifted(j, 1)) - eta(zm, zm.shifted(j, -1))) / 2.0)
        } else {
            [0.0; 3]
        };
        let mut inner = 0.0;
        for &(zp, wp) in plus {
            let kv = eval_at(k, zp.minus(zm));
            if kv == 0.0 {
                continue;
            }
            let mut tv = eta(zm, zp) - base;
            if r == -2 {
                tv -= (0..3).map(|j| (zp.x[j] - zm.x[j]) as f64 * grad[j]).sum::<f64>();
            }
            inner += wp * kv * tv;
        }
        total += wm * inner;
    }
    Ok(total)
}

fn chain_label(k: &TorusKernel) -> KernelLabel {
    KernelLabel { a: 5.0, r: 0, e: k.label().e }
}

/// `A(u) = ∫ K(w) K(w + u) dw` with the torus lattice-time measure, at lags `u` in
/// the node range of `k`, by FFT (zero-padded in time, periodic in space).
fn autocorrelation(k: &TorusKernel) -> Result<Vec<f64>> {
    let nodes = k.nodes();
    let vol = k.sites();
    let n = k.side();
    let len = (2 * nodes).next_power_of_two();
    if (len * vol) as f64 > FFT_BUDGET {
        return Err(KernelError::Guard(format!("FFT grid of {} points exceeds the budget", len * vol)));
    }
    let mut grid = vec![Complex64::new(0.0, 0.0); len * vol];
    for (j, row) in k.data().chunks(vol).enumerate() {
        for (g, &v) in grid[j * vol..][..vol].iter_mut().zip(row) {
            *g = Complex64::new(v, 0.0);
        }
    }
    let mut fft = GridFft::new(&[len, n, n, n]);
    fft.forward(&mut grid);
    for v in grid.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    fft.inverse(&mut grid);
    // grid[s][y] = Σ_{j,x} K_j(x) K_{j+s}(x+y).
    let w = k.dt() * k.eps().powi(3);
    let (lo, hi) = k.node_range();
    let mut out = Vec::with_capacity(nodes * vol);
    for i in lo..=hi {
        let s = i.rem_euclid(len as i64) as usize;
        out.extend(grid[s * vol..][..vol].iter().map(|c| w * c.re));
    }
    Ok(out)
}

/// The chain kernel `𝒢(u) = K(u) A(u)²`, `A(u) = ∫ K(w) K(w + u) dw`, which is the
/// pentagon integral over the two internal vertices.
pub fn chain_kernel(k: &TorusKernel) -> Result<TorusKernel> {
    let a = autocorrelation(k)?;
    let data = k.data().iter().zip(&a).map(|(kv, av)| kv * av * av).collect();
    Ok(TorusKernel::from_rows(k.side(), k.eps(), k.dt(), k.node_range(), chain_label(k), data))
}

/// The same kernel by direct summation over both internal vertices; quadratic cost.
pub fn chain_kernel_direct(k: &TorusKernel) -> Result<TorusKernel> {
    let nodes = k.nodes();
    let vol = k.sites();
    let n = k.side();
    let work = (nodes * vol) as f64 * (nodes * vol) as f64;
    if work > DIRECT_BUDGET {
        return Err(KernelError::Guard(format!("direct chain sum of {work:.3e} terms exceeds the budget")));
    }
    let (lo, hi) = k.node_range();
    let w = k.dt() * k.eps().powi(3);
    let coords = |s: usize| [(s % n) as i64, ((s / n) % n) as i64, (s / (n * n)) as i64];
    let mut data = vec![0.0; nodes * vol];
    for u in lo..=hi {
        for y in 0..vol {
            let ku = k.at(u, y);
            if ku == 0.0 {
                continue;
            }
            let cy = coords(y);
            let mut a = 0.0;
            for j in lo..=hi {
                for x in 0..vol {
                    let kx = k.at(j, x);
                    if kx == 0.0 {
                        continue;
                    }
                    let cx = coords(x);
                    a += kx * k.at(j + u, wrap(n, [cx[0] + cy[0], cx[1] + cy[1], cx[2] + cy[2]]));
                }
            }
            a *= w;
            data[(u - lo) as usize * vol + y] = ku * a * a;
        }
    }
    Ok(TorusKernel::from_rows(n, k.eps(), k.dt(), k.node_range(), chain_label(k), data))
}

/// `(ℛ𝒢)(η) = ∫∫ 𝒢(z₁ - z₂) (η(z₁, z₂) - η(z₁, z₁)) μ(dz₁) μ(dz₂)`.
pub fn chain_renorm(
    g: &dyn SpaceTimeKernel,
    eta: &dyn Fn(MeasurePoint, MeasurePoint) -> f64,
    points: &[(MeasurePoint, f64)],
) -> Result<f64> {
    let pairs = (points.len() as f64).powi(2);
    if pairs > PAIR_BUDGET {
        return Err(KernelError::Guard(format!("{pairs:.3e} point pairs exceed the budget")));
    }
    let mut total = 0.0;
    for &(z1, w1) in points {
        let diag = eta(z1, z1);
        let mut inner = 0.0;
        for &(z2, w2) in points {
            let gv = eval_at(g, z1.minus(z2));
            if gv != 0.0 {
                inner += w2 * gv * (eta(z1, z2) - diag);
            }
        }
        total += w1 * inner;
    }
    Ok(total)
}

/// A quadrature value with an error estimate from one step-doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `|value - coarse|`.
    pub error: f64,
    /// The same quantity at twice the time step.
    pub coarse: f64,
}

impl Estimate {
    fn from_pair(value: f64, coarse: f64) -> Self {
        Self { value, error: (value - coarse).abs(), coarse }
    }
}

/// Keep every other time node (even indices), giving a kernel at step `2 dt`.
fn coarsen(k: &TorusKernel) -> TorusKernel {
    let (lo, hi) = k.node_range();
    let clo = lo.div_euclid(2) + i64::from(lo.rem_euclid(2) != 0);
    let chi = hi.div_euclid(2);
    let vol = k.sites();
    let mut data = Vec::with_capacity(((chi - clo + 1).max(0) as usize) * vol);
    for j in clo..=chi {
        data.extend_from_slice(k.row(2 * j));
    }
    TorusKernel::from_rows(k.side(), k.eps(), 2.0 * k.dt(), (clo, chi), k.label(), data)
}

/// `ε³ Σ_x ∫ K(t, x)² dt` with `K` the cubic interpolant in time, integrated exactly.
fn square_integral(k: &TorusKernel) -> f64 {
    let (lo, hi) = k.node_range();
    let vol = k.sites();
    // Four Gauss points integrate the squared cubic on each cell exactly.
    let gauss: Vec<(f64, [f64; 4])> =
        crate::quad::GaussRule::new(4).mapped(0.0, 1.0).map(|(x, w)| (w, lagrange4(x))).collect();
    let mut total = 0.0;
    for site in 0..vol {
        for i0 in lo - 2..=hi + 1 {
            let vals: [f64; 4] = std::array::from_fn(|j| k.at(i0 - 1 + j as i64, site));
            if vals.iter().all(|v| *v == 0.0) {
                continue;
            }
            total += gauss
                .iter()
                .map(|(w, l)| {
                    let p: f64 = (0..4).map(|j| l[j] * vals[j]).sum();
                    w * p * p
                })
                .sum::<f64>();
        }
    }
    total * k.dt() * k.eps().powi(3)
}

/// `C₁ = ∫ K(z)² dz` over the torus lattice-time measure.
pub fn renorm_constant_c1(k: &TorusKernel) -> Estimate {
    Estimate::from_pair(square_integral(k), square_integral(&coarsen(k)))
}

fn c2_sum(k: &TorusKernel) -> Result<f64> {
    let g = chain_kernel(k)?;
    Ok(2.0 * k.dt() * k.eps().powi(3) * g.data().iter().sum::<f64>())
}

/// `C₂ = 2 ∫ 𝒢(z) dz = 2 ∫ K(u) A(u)² du`.
pub fn renorm_constant_c2(k: &TorusKernel) -> Result<Estimate> {
    Ok(Estimate::from_pair(c2_sum(k)?, c2_sum(&coarsen(k))?))
}
