//! Exact jump-sum evaluation of multiple, diagonal and iterated integrals.

use std::sync::Arc;

use super::combinatorics::{contractions, orderings, Contraction, Label, Labeling, Ordering};
use super::{ChaosError, Result};
use crate::noise::MartingalePathSet;
use crate::quad::midpoint_cells;

/// Largest number of integrand evaluations the brute-force routines will attempt.
pub const EVAL_BUDGET: f64 = 1e7;

/// A point of `[0, T) × torus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub site: usize,
}

type Evaluator = Arc<dyn Fn(&[SpaceTimePoint]) -> f64 + Send + Sync>;
type Derivative = Arc<dyn Fn(&[SpaceTimePoint], usize) -> f64 + Send + Sync>;

/// An integrand `F: ([0, T) × torus)^n → ℝ`.
#[derive(Clone)]
pub struct GridFunction {
    arity: usize,
    f: Evaluator,
    dt: Option<Derivative>,
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction").field("arity", &self.arity).finish_non_exhaustive()
    }
}

impl GridFunction {
    pub fn new(arity: usize, f: impl Fn(&[SpaceTimePoint]) -> f64 + Send + Sync + 'static) -> Self {
        Self { arity, f: Arc::new(f), dt: None }
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Self::new(arity, move |_| c)
    }

    /// Attach the time derivatives: `dt(z, i) = ∂F/∂s_i (z)`.
    pub fn with_time_derivative(
        mut self,
        dt: impl Fn(&[SpaceTimePoint], usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.dt = Some(Arc::new(dt));
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, z: &[SpaceTimePoint]) -> f64 {
        debug_assert_eq!(z.len(), self.arity);
        (self.f)(z)
    }

    pub fn time_derivative(&self, z: &[SpaceTimePoint], var: usize) -> Option<f64> {
        self.dt.as_ref().map(|d| d(z, var))
    }

    /// `λ F`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let f = self.f.clone();
        Self::new(self.arity, move |z| lambda * f(z))
    }

    /// `F(z_{perm[0]}, .., z_{perm[n-1]})`.
    pub fn permuted(&self, perm: Vec<usize>) -> Self {
        let f = self.f.clone();
        Self::new(self.arity, move |z| {
            let w: Vec<SpaceTimePoint> = perm.iter().map(|&i| z[i]).collect();
            f(&w)
        })
    }
}

fn check_arity(f: &GridFunction, n: usize) -> Result<()> {
    if f.arity() != n {
        return Err(ChaosError::Contract(format!("integrand has arity {}, expected {n}", f.arity())));
    }
    Ok(())
}

/// A weighted point of a discrete integrator.
#[derive(Debug, Clone, Copy)]
struct Atom {
    z: SpaceTimePoint,
    w: f64,
}

/// Quadrature nodes for Lebesgue-type parts on `[0, t)`.
fn drift_nodes(path: &MartingalePathSet, t: f64, h: f64, weight: f64) -> Vec<Atom> {
    let (mids, width) = midpoint_cells(0.0, t, h);
    let mut out = Vec::with_capacity(mids.len() * path.lattice().sites());
    for site in 0..path.lattice().sites() {
        for &s in &mids {
            out.push(Atom { z: SpaceTimePoint { t: s, site }, w: weight * width });
        }
    }
    out
}

/// Atoms of `𝐌^{(q)}` restricted to `[0, t)`: jumps weighted `ε^{qd}(Δ𝕄)^q`,
/// plus the compensator drift when `q = 1`.
fn chaos_atoms(path: &MartingalePathSet, q: usize, t: f64, h: f64) -> Vec<Atom> {
    let lat = path.lattice();
    let vol = lat.cell_volume();
    let a = path.jump_size();
    let mut out: Vec<Atom> = path
        .iter_events()
        .filter(|e| e.time < t)
        .map(|e| Atom { z: SpaceTimePoint { t: e.time, site: e.site }, w: (vol * a * e.sign as f64).powi(q as i32) })
        .collect();
    if q == 1 && path.drift_rate() != 0.0 {
        out.extend(drift_nodes(path, t, h, -vol * path.drift_rate()));
    }
    out
}

/// Integrator atoms at a time position of a renormalized integral.
fn labelled_atoms(path: &MartingalePathSet, q: usize, label: Label, t: f64, h: f64) -> Vec<Atom> {
    let lat = path.lattice();
    let eps = lat.eps();
    let d = lat.dim() as f64;
    let spec = path.spec();
    let (k, c) = (spec.k, spec.c);
    let qf = q as f64;
    let vol = lat.cell_volume();
    match label {
        Label::Nil => chaos_atoms(path, q, t, h),
        Label::Down => {
            let pref = c.powf(qf - 2.0) * eps.powf((d + k) * (qf - 2.0)) * vol * spec.bracket_density;
            drift_nodes(path, t, h, pref)
        }
        Label::Diamond => {
            let pref = c.powf(qf - 2.0) * eps.powf((d + k) * (qf - 1.0)) * vol;
            let bar = path.renormalized();
            let jump = bar.jump_size();
            let mut out: Vec<Atom> = bar
                .iter_events()
                .filter(|e| e.time < t)
                .map(|e| Atom { z: SpaceTimePoint { t: e.time, site: e.site }, w: pref * jump })
                .collect();
            out.extend(drift_nodes(path, t, h, -pref * bar.drift_rate()));
            out
        }
    }
}

/// `∫_{[0,T)^n} F d𝐌^{⊗n}`: the sum over all `n`-tuples of integrator atoms.
///
/// Exact on symmetric paths. For compensated paths each coordinate also carries
/// the midpoint-rule drift with step `h`, so the result has an `O(h)` error.
pub fn product_integral(f: &GridFunction, path: &MartingalePathSet, n: usize, t: f64, h: f64) -> Result<f64> {
    check_arity(f, n)?;
    let atoms = chaos_atoms(path, 1, t, h);
    let cost = (atoms.len() as f64).powi(n as i32);
    if cost > EVAL_BUDGET {
        return Err(ChaosError::Guard(format!(
            "product integral needs {cost:.3e} evaluations (budget {EVAL_BUDGET:.0e}); use fewer events or smaller n"
        )));
    }
    let mut z = vec![SpaceTimePoint { t: 0.0, site: 0 }; n];
    fn rec(i: usize, w: f64, atoms: &[Atom], z: &mut [SpaceTimePoint], f: &GridFunction) -> f64 {
        if i == z.len() {
            return w * f.eval(z);
        }
        let mut acc = 0.0;
        for a in atoms {
            z[i] = a.z;
            acc += rec(i + 1, w * a.w, atoms, z, f);
        }
        acc
    }
    Ok(rec(0, 1.0, &atoms, &mut z, f))
}

/// `Σ_x ε^{nd} Σ_{0≤s<t} F(s, x) (Δ_s 𝕄(x))^n`.
pub fn diagonal_integral(f: &GridFunction, path: &MartingalePathSet, n: usize, t: f64) -> Result<f64> {
    check_arity(f, 1)?;
    if n < 2 {
        return Err(ChaosError::Contract("diagonal integrals need n >= 2".into()));
    }
    Ok(chaos_atoms(path, n, t, 1.0).iter().map(|a| a.w * f.eval(&[a.z])).sum())
}

/// The diagonal integral split into a martingale part and a Lebesgue part.
///
/// Odd `n`: `c^{n-1} ε^{(d+k)(n-1)} ∫F d𝐌` and `c^{n-1} ε^{(d+k)(n-2)} ε^d Σ_x ∫F 𝙲 ds`.
/// Even `n`: `c^{n-2} ε^{(d+k)(n-1)} ∫F d𝐌̄` and `c^{n-2} ε^{(d+k)(n-2)} ε^d Σ_x ∫F C ds`.
/// Time integrals use the midpoint rule with step `h`; both parts share the same nodes.
pub fn diagonal_decomposition(
    f: &GridFunction,
    path: &MartingalePathSet,
    n: usize,
    t: f64,
    h: f64,
) -> Result<(f64, f64)> {
    check_arity(f, 1)?;
    if n < 2 {
        return Err(ChaosError::Contract("diagonal integrals need n >= 2".into()));
    }
    let lat = path.lattice();
    let (eps, d) = (lat.eps(), lat.dim() as f64);
    let spec = path.spec();
    let (k, c) = (spec.k, spec.c);
    let nf = n as f64;
    let vol = lat.cell_volume();
    let integrate = |atoms: &[Atom]| atoms.iter().map(|a| a.w * f.eval(&[a.z])).sum::<f64>();
    if n % 2 == 1 {
        let pref = c.powf(nf - 1.0) * eps.powf((d + k) * (nf - 1.0));
        let mart = pref * integrate(&chaos_atoms(path, 1, t, h));
        let leb_weight = c.powf(nf - 1.0) * eps.powf((d + k) * (nf - 2.0)) * vol * spec.compensator_density;
        let leb = if leb_weight == 0.0 { 0.0 } else { integrate(&drift_nodes(path, t, h, leb_weight)) };
        Ok((mart, leb))
    } else {
        let bar = path.renormalized();
        let pref = c.powf(nf - 2.0) * eps.powf((d + k) * (nf - 1.0)) * vol;
        let jumps: f64 = bar
            .iter_events()
            .filter(|e| e.time < t)
            .map(|e| bar.jump_size() * f.eval(&[SpaceTimePoint { t: e.time, site: e.site }]))
            .sum();
        let drift = integrate(&drift_nodes(path, t, h, bar.drift_rate()));
        let mart = pref * (jumps - drift);
        let leb_weight = c.powf(nf - 2.0) * eps.powf((d + k) * (nf - 2.0)) * vol * spec.bracket_density;
        let leb = integrate(&drift_nodes(path, t, h, leb_weight));
        Ok((mart, leb))
    }
}

/// Time-ordered sum over one atom per position: `Σ ∏_j w_j · F(z̄)` with `s_1 < .. < s_m`.
fn ordered_sum(
    gamma: &Contraction,
    sigma: &Ordering,
    f: &GridFunction,
    mut per_position: Vec<Vec<Atom>>,
) -> Result<f64> {
    let m = per_position.len();
    let mut cost = 1.0;
    for (j, atoms) in per_position.iter_mut().enumerate() {
        atoms.sort_by(|a, b| a.z.t.total_cmp(&b.z.t));
        cost *= atoms.len() as f64 / (j + 1) as f64;
    }
    if cost > 10.0 * EVAL_BUDGET {
        return Err(ChaosError::Guard(format!(
            "iterated integral needs about {cost:.3e} evaluations (budget {:.0e})",
            10.0 * EVAL_BUDGET
        )));
    }
    // Variable i reads the point chosen at the position of its component.
    let pos_of_var: Vec<usize> = (0..gamma.n()).map(|i| sigma.position_of(gamma.component_of(i))).collect();
    let mut zpos = vec![SpaceTimePoint { t: 0.0, site: 0 }; m];
    let mut zbar = vec![SpaceTimePoint { t: 0.0, site: 0 }; gamma.n()];

    struct Ctx<'a> {
        atoms: &'a [Vec<Atom>],
        pos_of_var: &'a [usize],
        f: &'a GridFunction,
    }
    fn rec(j: usize, prev: f64, w: f64, ctx: &Ctx, zpos: &mut [SpaceTimePoint], zbar: &mut [SpaceTimePoint]) -> f64 {
        if j == zpos.len() {
            for (i, &p) in ctx.pos_of_var.iter().enumerate() {
                zbar[i] = zpos[p];
            }
            return w * ctx.f.eval(zbar);
        }
        let atoms = &ctx.atoms[j];
        let start = atoms.partition_point(|a| a.z.t <= prev);
        let mut acc = 0.0;
        for a in &atoms[start..] {
            zpos[j] = a.z;
            acc += rec(j + 1, a.z.t, w * a.w, ctx, zpos, zbar);
        }
        acc
    }
    let ctx = Ctx { atoms: &per_position, pos_of_var: &pos_of_var, f };
    Ok(rec(0, f64::NEG_INFINITY, 1.0, &ctx, &mut zpos, &mut zbar))
}

fn check_shapes(gamma: &Contraction, sigma: &Ordering, f: &GridFunction) -> Result<()> {
    check_arity(f, gamma.n())?;
    if sigma.len() != gamma.len() {
        return Err(ChaosError::Contract(format!(
            "ordering has {} entries for {} components",
            sigma.len(),
            gamma.len()
        )));
    }
    Ok(())
}

/// `(𝓘_{γ,σ} F)_t`: components integrated in the time order `σ` against `𝐌^{(|γ_i|)}`.
///
/// `h` is the midpoint step for compensator drifts (unused on symmetric paths).
pub fn iterated_integral(
    gamma: &Contraction,
    sigma: &Ordering,
    f: &GridFunction,
    path: &MartingalePathSet,
    t: f64,
    h: f64,
) -> Result<f64> {
    check_shapes(gamma, sigma, f)?;
    let per_position = sigma.sigma().iter().map(|&c| chaos_atoms(path, gamma.components()[c].len(), t, h)).collect();
    ordered_sum(gamma, sigma, f, per_position)
}

/// Renormalized iterated integral: `▽` components integrate `C` against Lebesgue
/// measure, `◇` components integrate against `𝕄̄`, both with the prefactors that
/// make `nil = ▽ + ◇` hold per component.
pub fn renormalized_iterated_integral(
    gamma: &Contraction,
    sigma: &Ordering,
    labels: &Labeling,
    f: &GridFunction,
    path: &MartingalePathSet,
    t: f64,
    h: f64,
) -> Result<f64> {
    check_shapes(gamma, sigma, f)?;
    // Re-validate so hand-built labelings cannot slip through.
    let labels = Labeling::new(gamma, labels.labels().to_vec())?;
    let per_position =
        sigma.sigma().iter().map(|&c| labelled_atoms(path, gamma.components()[c].len(), labels.get(c), t, h)).collect();
    ordered_sum(gamma, sigma, f, per_position)
}

/// `Σ_γ Σ_σ (𝓘_{γ,σ} F)_t`, which equals [`product_integral`] on symmetric paths.
pub fn chaos_expansion(f: &GridFunction, path: &MartingalePathSet, n: usize, t: f64, h: f64) -> Result<f64> {
    let mut total = 0.0;
    for gamma in contractions(n)? {
        for sigma in orderings(&gamma) {
            total += iterated_integral(&gamma, &sigma, f, path, t, h)?;
        }
    }
    Ok(total)
}
