//! Nested mixed norms of integrands and the power-counting exponents of the moment bounds.

use super::combinatorics::{Contraction, Ordering, PFunction, PVal};
use super::integrals::{GridFunction, SpaceTimePoint};
use super::{ChaosError, Result};
use crate::noise::LatticeSpec;
use crate::quad::{midpoint_cells, GaussRule};

/// Largest number of integrand evaluations [`nested_norm`] will attempt.
pub const NORM_BUDGET: f64 = 1e8;

/// `‖F^{γ,σ}‖_{L^𝐩_ε}` over `[0, T) × torus` with time step `h`.
///
/// Position `j` (0-based, earliest first) is normed in `L^{𝐩(j)}`; the innermost
/// variable is position 0 and the indicators `s_{j+1} > s_j` restrict the domain.
/// `f` takes the `m` position points directly (it is `F^{γ,σ}`, not `F`).
pub fn nested_norm(f: &GridFunction, p: &PFunction, lattice: &LatticeSpec, horizon: f64, h: f64) -> Result<f64> {
    let m = p.m();
    if f.arity() != m {
        return Err(ChaosError::Contract(format!("integrand arity {} differs from m = {m}", f.arity())));
    }
    let (times, width) = midpoint_cells(0.0, horizon, h);
    let sites = lattice.sites();
    let nodes = (times.len() * sites) as f64;
    if nodes.powi(m as i32) > NORM_BUDGET {
        return Err(ChaosError::Guard(format!(
            "nested norm needs {:.3e} evaluations (budget {NORM_BUDGET:.0e})",
            nodes.powi(m as i32)
        )));
    }
    let weight = width * lattice.cell_volume();
    let mut z = vec![SpaceTimePoint { t: 0.0, site: 0 }; m];

    struct Ctx<'a> {
        f: &'a GridFunction,
        p: &'a [PVal],
        times: &'a [f64],
        sites: usize,
        weight: f64,
    }
    // Norm over position j of the inner norm, for fixed later positions.
    fn level(j: usize, ctx: &Ctx, z: &mut [SpaceTimePoint]) -> f64 {
        let upper = if j + 1 < z.len() { z[j + 1].t } else { f64::INFINITY };
        let mut acc = 0.0f64;
        for &t in ctx.times.iter().take_while(|&&t| t < upper) {
            for site in 0..ctx.sites {
                z[j] = SpaceTimePoint { t, site };
                let v = if j == 0 { ctx.f.eval(z).abs() } else { level(j - 1, ctx, z) };
                match ctx.p[j] {
                    PVal::One => acc += ctx.weight * v,
                    PVal::Two => acc += ctx.weight * v * v,
                    PVal::Inf => acc = acc.max(v),
                }
            }
        }
        match ctx.p[j] {
            PVal::Two => acc.sqrt(),
            _ => acc,
        }
    }
    if m == 0 {
        return Ok(f.eval(&[]).abs());
    }
    let ctx = Ctx { f, p: &p.values, times: &times, sites, weight };
    Ok(level(m - 1, &ctx, &mut z))
}

/// `F^{γ,σ}(z_1, .., z_m) = F(z̄_1, .., z̄_n)` with `z̄_i` the point of the component holding `i`.
pub fn contracted_function(f: &GridFunction, gamma: &Contraction, sigma: &Ordering) -> GridFunction {
    let pos: Vec<usize> = (0..gamma.n()).map(|i| sigma.position_of(gamma.component_of(i))).collect();
    let m = gamma.len();
    let f = f.clone();
    GridFunction::new(m, move |z| {
        let zbar: Vec<SpaceTimePoint> = pos.iter().map(|&p| z[p]).collect();
        f.eval(&zbar)
    })
}

/// `α_γ(𝐩) = (d + k)(Σ|γ_i| − 2|𝐩⁻¹(1)| − |𝐩⁻¹(2)|)`.
pub fn exponent_alpha(gamma: &Contraction, p: &PFunction, d: usize, k: f64) -> Result<f64> {
    if p.m() != gamma.len() {
        return Err(ChaosError::Contract(format!("𝐩 has {} entries for {} components", p.m(), gamma.len())));
    }
    let total = gamma.n() as f64;
    let ones = p.preimage(PVal::One).len() as f64;
    let twos = p.preimage(PVal::Two).len() as f64;
    Ok((d as f64 + k) * (total - 2.0 * ones - twos))
}

/// `β_{γ,p}(𝐩) = ∏ (p−1)/p` over positions `i ≥ 2` with `𝐩(i) = ∞` and `|γ_i| ≥ 2`.
///
/// `sizes` lists component sizes in time order (see [`Contraction::sizes_in_order`]).
pub fn exponent_beta(sizes: &[usize], p: &PFunction, moment: f64) -> Result<f64> {
    if p.m() != sizes.len() {
        return Err(ChaosError::Contract(format!("𝐩 has {} entries for {} components", p.m(), sizes.len())));
    }
    let count = (1..sizes.len()).filter(|&i| p.values[i] == PVal::Inf && sizes[i] != 1).count();
    Ok(((moment - 1.0) / moment).powi(count as i32))
}

/// `𝐩` whose `𝐩⁻¹(1)` avoids the non-contracted positions.
pub fn admissible_for_moment_bound(sizes: &[usize]) -> Vec<PFunction> {
    PFunction::all(sizes.len()).into_iter().filter(|p| p.preimage(PVal::One).iter().all(|&i| sizes[i] != 1)).collect()
}

/// Both sides of the one-dimensional Sobolev-type inequality
/// `sup|f|^p ≤ |I|^{-1}∫|f|^p + p(∫|f|^p)^{(p−1)/p}(∫|f'|^p)^{1/p}` on `I = [a, b]`.
///
/// Integrals use composite Gauss-Legendre; the supremum is taken on `samples` points.
pub fn sobolev_sides(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    p: f64,
    samples: usize,
) -> (f64, f64) {
    let rule = GaussRule::new(16);
    let ip = rule.integrate_composite(a, b, 64, |x| f(x).abs().powf(p));
    let idp = rule.integrate_composite(a, b, 64, |x| df(x).abs().powf(p));
    let sup = (0..=samples).map(|i| f(a + (b - a) * i as f64 / samples as f64).abs()).fold(0.0, f64::max);
    let lhs = sup.powf(p);
    let rhs = ip / (b - a) + p * ip.powf((p - 1.0) / p) * idp.powf(1.0 / p);
    (lhs, rhs)
}
