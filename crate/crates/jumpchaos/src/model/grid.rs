//! Space-time grid, the fields `Ψ = K^𝔢 ⊛ d𝐌` and `Y = K^ε ⊛ Ψ³`, and the pairings.
//!
//! A jump at time `s` enters the grid through the cubic Lagrange weights of
//! the kernel interpolation, so a node value of `Ψ` equals the exact jump sum
//! `ε³ Σ K^𝔢(t - s, x - y) Δ𝕄` with the interpolated kernel. The time axis of
//! the FFT is circular; nodes whose stencil wraps around are never read.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::{ModelError, Result, TestFunction, TIME_SCALE};
use crate::fft::GridFft;
use crate::kernels::{
    build_singular_kernel, renorm_constant_c1, renorm_constant_c2, Cutoff, Estimate, SpaceTimeKernel, TorusKernel,
};
use crate::noise::{LatticeMollifier, LatticeSpec, MartingalePathSet, MartingaleSpec, SpaceTimeTest};
use crate::quad::{lagrange4, GaussRule};

/// Nodes of padding in front of `t = 0` for the deposition stencil.
const PAD: usize = 2;
/// Largest grid (nodes × sites) accepted.
const GRID_BUDGET: usize = 1 << 25;

/// Inputs of a [`ModelGrid`].
#[derive(Clone)]
pub struct ModelParams {
    pub eps: f64,
    /// Regularization scale `𝔢`.
    pub e: f64,
    /// Time nodes per `ε²`.
    pub substeps: usize,
    /// Largest test-function scale that will be paired.
    pub lambda_max: f64,
    /// Whether `Y = K^ε ⊛ Ψ³` is needed (longer time window).
    pub cubic: bool,
    pub cutoff: Cutoff,
    /// Law of the driving noise.
    pub spec: MartingaleSpec,
}

impl ModelParams {
    /// Defaults: two time nodes per `ε²`, `λ ≤ 1/2`, standard cutoff, the Φ⁴₃ noise.
    pub fn new(eps: f64, e: f64) -> Self {
        Self {
            eps,
            e,
            substeps: 2,
            lambda_max: 0.5,
            cubic: true,
            cutoff: Cutoff::Standard,
            spec: MartingaleSpec::phi43(eps),
        }
    }
}

/// Time layout of the grid: node `g` sits at time `(g - 2)·dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub dt: f64,
    /// Number of time nodes (FFT length).
    pub len: usize,
    /// Lattice sites.
    pub vol: usize,
    /// Node of the base point `z`.
    pub center: usize,
    /// Nodes at which `Ψ` is complete and free of wrap-around.
    pub psi_valid: (usize, usize),
    /// Same for `Y`, when the grid carries it.
    pub cubic_valid: Option<(usize, usize)>,
}

impl Frame {
    pub fn time(&self, g: usize) -> f64 {
        (g as f64 - PAD as f64) * self.dt
    }

    /// Node at time `t`, if `t` is a node time.
    pub fn node(&self, t: f64) -> Option<usize> {
        let u = t / self.dt + PAD as f64;
        let g = u.round();
        if (u - g).abs() > 1e-9 || g < 0.0 || g as usize >= self.len {
            None
        } else {
            Some(g as usize)
        }
    }

    /// Noise horizon `T`.
    pub fn horizon(&self) -> f64 {
        (self.len - 2 * PAD) as f64 * self.dt
    }
}

/// Kernels, renormalization constants and FFT data for one `(ε, 𝔢)`.
pub struct ModelGrid {
    params: ModelParams,
    frame: Frame,
    lattice: LatticeSpec,
    spec: MartingaleSpec,
    moll: LatticeMollifier,
    k_eps: TorusKernel,
    k_frak: TorusKernel,
    c1: Estimate,
    c2: Option<Estimate>,
    hat_frak: Arc<Vec<Complex64>>,
    hat_eps: Option<Arc<Vec<Complex64>>>,
}

fn smooth_len(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut v = m;
            for p in [2, 3, 5] {
                while v % p == 0 {
                    v /= p;
                }
            }
            v == 1
        })
        .expect("5-smooth numbers are unbounded")
}

fn kernel_hat(k: &TorusKernel, frame: &Frame, fft: &mut GridFft) -> Vec<Complex64> {
    let (lo, hi) = k.node_range();
    let vol = frame.vol;
    let mut buf = vec![Complex64::new(0.0, 0.0); frame.len * vol];
    for i in lo..=hi {
        let g = i.rem_euclid(frame.len as i64) as usize;
        for (dst, &v) in buf[g * vol..][..vol].iter_mut().zip(k.row(i)) {
            dst.re += v;
        }
    }
    fft.forward(&mut buf);
    buf
}

impl ModelGrid {
    pub fn new(params: ModelParams) -> Result<Self> {
        let eps = params.eps;
        if !(params.lambda_max > 0.0 && params.lambda_max <= 0.5) {
            return Err(ModelError::Config(format!("largest test scale {} must lie in (0, 1/2]", params.lambda_max)));
        }
        let side = (1.0 / eps).round() as usize;
        let probe = LatticeSpec::new(3, eps, 1.0)?;
        let moll = LatticeMollifier::new(&probe, params.e)?;
        let (k, _) = build_singular_kernel(eps, params.e, params.cutoff.clone(), params.substeps)?;
        let k_eps = TorusKernel::from_kernel(&k, side);
        let k_frak = k_eps.mollify(&moll)?;
        let dt = k.dt();
        let (lo_f, hi_f) = k_frak.node_range();
        let (lo_e, hi_e) = k_eps.node_range();
        let half = (TIME_SCALE * params.lambda_max.powi(2) / dt).ceil() as i64 + 1;
        // Interpolated kernels are supported on node offsets (lo - 2, hi + 2).
        let first_psi = hi_f + 2 + PAD as i64;
        let (center, last) = if params.cubic {
            let c = first_psi + hi_e + half;
            (c, c + half - lo_e - lo_f)
        } else {
            let c = first_psi + half;
            (c, c + half - lo_f)
        };
        let len = smooth_len(last as usize + 2 * PAD);
        let vol = side.pow(3);
        if len * vol > GRID_BUDGET {
            return Err(ModelError::Guard(format!("grid of {len} × {vol} nodes exceeds {GRID_BUDGET}")));
        }
        let m = (len - 2 * PAD) as i64;
        let psi_valid = (first_psi as usize, (m + lo_f) as usize);
        let cubic_valid = params.cubic.then_some(((first_psi + hi_e) as usize, (m + lo_f + lo_e) as usize));
        let frame = Frame { dt, len, vol, center: center as usize, psi_valid, cubic_valid };
        let lattice = LatticeSpec::new(3, eps, frame.horizon())?;
        let spec = params.spec;
        spec.validate(&lattice)?;
        let c1 = renorm_constant_c1(&k_frak);
        let c2 = if params.cubic { Some(renorm_constant_c2(&k_frak)?) } else { None };
        let mut fft = GridFft::new(&[len, side, side, side]);
        let hat_frak = Arc::new(kernel_hat(&k_frak, &frame, &mut fft));
        let hat_eps = params.cubic.then(|| Arc::new(kernel_hat(&k_eps, &frame, &mut fft)));
        Ok(Self { params, frame, lattice, spec, moll, k_eps, k_frak, c1, c2, hat_frak, hat_eps })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn frame(&self) -> &Frame {
        &self.frame
    }
    /// Lattice on `[0, T]` for the driving noise.
    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }
    pub fn spec(&self) -> &MartingaleSpec {
        &self.spec
    }
    pub fn mollifier(&self) -> &LatticeMollifier {
        &self.moll
    }
    /// `K^ε`, periodized.
    pub fn k_eps(&self) -> &TorusKernel {
        &self.k_eps
    }
    /// `K^𝔢 = K^ε ⋆_ε ψ_𝔢`, periodized.
    pub fn k_frak(&self) -> &TorusKernel {
        &self.k_frak
    }
    pub fn c1(&self) -> Estimate {
        self.c1
    }
    pub fn c2(&self) -> Option<Estimate> {
        self.c2
    }

    /// Base point `z = (t_c, 0)`.
    pub fn center(&self) -> (f64, usize) {
        (self.frame.time(self.frame.center), 0)
    }

    /// `φ^λ_z` at the base point.
    pub fn test_function(&self, lambda: f64) -> Result<TestFunction> {
        TestFunction::new(lambda, self.center().0, [0.0; 3])
    }

    pub fn fft(&self) -> GridFft {
        let n = self.lattice.side();
        GridFft::new(&[self.frame.len, n, n, n])
    }

    fn check_path(&self, path: &MartingalePathSet) -> Result<()> {
        let lat = path.lattice();
        if lat.dim() != 3 || lat.side() != self.lattice.side() || lat.horizon() < self.frame.horizon() * (1.0 - 1e-12) {
            return Err(ModelError::Domain(format!(
                "path lattice (d = {}, side {}, T = {}) does not cover the grid (side {}, T = {})",
                lat.dim(),
                lat.side(),
                lat.horizon(),
                self.lattice.side(),
                self.frame.horizon()
            )));
        }
        Ok(())
    }

    /// Add `ε³ Δ𝕄` of every jump (and the compensator drift) to the real or imaginary part of `buf`.
    fn deposit(&self, path: &MartingalePathSet, buf: &mut [Complex64], imag: bool) {
        let f = &self.frame;
        let cell = self.lattice.cell_volume();
        let a = cell * path.jump_size();
        let horizon = f.horizon();
        let mut add = |g: usize, site: usize, v: f64| {
            let c = &mut buf[g * f.vol + site];
            if imag {
                c.im += v;
            } else {
                c.re += v;
            }
        };
        for e in path.iter_events() {
            if e.time >= horizon {
                continue;
            }
            let u = e.time / f.dt;
            let i0 = u.floor();
            let w = lagrange4(1.0 - (u - i0));
            let base = i0 as usize + 2 + PAD;
            let v = a * e.sign as f64;
            for (m, wm) in w.iter().enumerate() {
                add(base - m, e.site, v * wm);
            }
        }
        let drift = path.drift_rate();
        if drift != 0.0 {
            let v = -cell * drift * f.dt;
            for g in PAD..=f.len - PAD {
                for site in 0..f.vol {
                    add(g, site, v);
                }
            }
        }
    }

    /// `Ψ` for one path.
    pub fn psi_field(&self, path: &MartingalePathSet) -> Result<PsiField> {
        let mut fft = self.fft();
        Ok(self.psi_fields(&mut fft, path, None)?.0)
    }

    /// `Ψ` for one or two paths sharing one complex transform.
    pub fn psi_fields(
        &self,
        fft: &mut GridFft,
        a: &MartingalePathSet,
        b: Option<&MartingalePathSet>,
    ) -> Result<(PsiField, Option<PsiField>)> {
        self.check_path(a)?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.frame.len * self.frame.vol];
        self.deposit(a, &mut buf, false);
        if let Some(b) = b {
            self.check_path(b)?;
            self.deposit(b, &mut buf, true);
        }
        fft.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(self.hat_frak.iter()) {
            *v *= k;
        }
        fft.inverse(&mut buf);
        let re = PsiField { frame: self.frame, data: buf.iter().map(|c| c.re).collect() };
        let im = b.map(|_| PsiField { frame: self.frame, data: buf.iter().map(|c| c.im).collect() });
        Ok((re, im))
    }

    /// `Y = ∫ K^ε(· - z̃) Ψ(z̃)³ dz̃` by the lattice-time Riemann sum, for one or two fields.
    pub fn cubic_fields(
        &self,
        fft: &mut GridFft,
        a: &PsiField,
        b: Option<&PsiField>,
    ) -> Result<(CubicField, Option<CubicField>)> {
        let hat =
            self.hat_eps.as_ref().ok_or_else(|| ModelError::Config("grid built without the cubic window".into()))?;
        let mut buf: Vec<Complex64> = match b {
            Some(b) => a.data.iter().zip(&b.data).map(|(x, y)| Complex64::new(x.powi(3), y.powi(3))).collect(),
            None => a.data.iter().map(|x| Complex64::new(x.powi(3), 0.0)).collect(),
        };
        fft.forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(hat.iter()) {
            *v *= k;
        }
        fft.inverse(&mut buf);
        let scale = self.lattice.cell_volume() * self.frame.dt;
        let re = CubicField { frame: self.frame, data: buf.iter().map(|c| scale * c.re).collect() };
        let im = b.map(|_| CubicField { frame: self.frame, data: buf.iter().map(|c| scale * c.im).collect() });
        Ok((re, im))
    }

    pub fn cubic_field(&self, psi: &PsiField) -> Result<CubicField> {
        let mut fft = self.fft();
        Ok(self.cubic_fields(&mut fft, psi, None)?.0)
    }

    /// Grid weights of `φ`, checked against the window where the fields are valid.
    pub fn discretize(&self, phi: &TestFunction) -> Result<LatticeTest> {
        let test = lattice_weights(&self.lattice, &self.frame, phi)?;
        let (lo, hi) = self.frame.cubic_valid.unwrap_or(self.frame.psi_valid);
        if test.entries.iter().any(|&(g, _, _)| g < lo || g > hi) {
            return Err(ModelError::Domain(format!(
                "test function support {:?} leaves the valid window [{}, {}]",
                phi.time_support(),
                self.frame.time(lo),
                self.frame.time(hi)
            )));
        }
        Ok(test)
    }

    /// Exact `Var ∫ φ Ψ = ε³ C Σ_y ∫ F(s, y)² ds` with `F(s, y) = Σ_{g,x} w(g, x) K^𝔢(t_g - s, x - y)`.
    pub fn psi_pairing_variance(&self, test: &LatticeTest) -> f64 {
        let f = &self.frame;
        let mut fft = self.fft();
        let mut w = vec![Complex64::new(0.0, 0.0); f.len * f.vol];
        for &(g, x, v) in &test.entries {
            w[g * f.vol + x].re += v;
        }
        fft.forward(&mut w);
        // J(q, y) = Σ_{n,x} w(n + q, x) K[n](x - y): correlation with the kernel.
        for (a, k) in w.iter_mut().zip(self.hat_frak.iter()) {
            *a *= k.conj();
        }
        fft.inverse(&mut w);
        let j = |q: usize, y: usize| w[q * f.vol + y].re;
        // F is cubic on each cell, so four Gauss points integrate F² exactly.
        let pts: Vec<(f64, [f64; 4])> =
            GaussRule::new(4).mapped(0.0, 1.0).map(|(x, wt)| (wt, lagrange4(1.0 - x))).collect();
        let mut total = 0.0;
        for i0 in 0..f.len - 2 * PAD {
            let c = i0 + 2 + PAD;
            for y in 0..f.vol {
                let vals: [f64; 4] = std::array::from_fn(|m| j(c - m, y));
                for (wt, l) in &pts {
                    let v: f64 = (0..4).map(|m| l[m] * vals[m]).sum();
                    total += wt * v * v;
                }
            }
        }
        self.lattice.cell_volume() * self.spec.bracket_density * f.dt * total
    }

    /// `φ^λ_z ⋆_ε ψ_𝔢` for the pairing with the noise.
    pub fn xi_weight(&self, phi: &TestFunction) -> XiWeight {
        XiWeight::new(phi, &self.lattice, &self.moll)
    }
}

/// `Ψ` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiField {
    frame: Frame,
    data: Vec<f64>,
}

/// `Y = K^ε ⊛ Ψ³` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicField {
    frame: Frame,
    data: Vec<f64>,
}

macro_rules! field_access {
    ($t:ty, $valid:expr) => {
        impl $t {
            pub fn frame(&self) -> &Frame {
                &self.frame
            }
            /// Value at node `g`, site `site`.
            pub fn value(&self, g: usize, site: usize) -> f64 {
                self.data[g * self.frame.vol + site]
            }
            /// Value at a node time inside the valid window.
            pub fn at(&self, t: f64, site: usize) -> Result<f64> {
                let (lo, hi) = ($valid)(&self.frame);
                match self.frame.node(t) {
                    Some(g) if g >= lo && g <= hi && site < self.frame.vol => Ok(self.value(g, site)),
                    _ => Err(ModelError::Domain(format!("({t}, {site}) is not a valid grid point"))),
                }
            }
        }
    };
}

field_access!(PsiField, |f: &Frame| f.psi_valid);
field_access!(CubicField, |f: &Frame| f.cubic_valid.expect("cubic fields need the cubic window"));

/// `Ψ(t, x) = ε³ [Σ K(t - s, x - y) Δ𝕄 - drift ∫ K(t - s, x - y) ds]` evaluated jump by jump.
pub fn psi_direct(path: &MartingalePathSet, k: &dyn SpaceTimeKernel, t: f64, site: usize) -> f64 {
    let lat = path.lattice();
    let a = path.jump_size();
    let off = |y: usize| -> [i64; 3] {
        let d = lat.displacement(y, site);
        [d[0], d[1], d[2]]
    };
    let mut acc = 0.0;
    for e in path.iter_events() {
        acc += a * e.sign as f64 * k.value(t - e.time, off(e.site));
    }
    let drift = path.drift_rate();
    if drift != 0.0 {
        let (lo, hi) = k.node_range();
        let (s0, s1) = ((t - (hi + 2) as f64 * k.dt()).max(0.0), (t - (lo - 2) as f64 * k.dt()).min(lat.horizon()));
        let rule = GaussRule::new(8);
        let panels = ((s1 - s0) / k.dt()).ceil().max(1.0) as usize;
        for y in 0..lat.sites() {
            let o = off(y);
            acc -= drift * rule.integrate_composite(s0, s1, panels, |s| k.value(t - s, o));
        }
    }
    lat.cell_volume() * acc
}

/// A test function on the grid: weights `w` with `∫ φ F ≈ Σ w F(g, x)`, and its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTest {
    pub center: (usize, usize),
    pub entries: Vec<(usize, usize, f64)>,
}

impl LatticeTest {
    /// `Σ w`, the discrete `∫ φ`.
    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    /// `a·self + b·other` for tests with the same base point.
    pub fn combine(&self, a: f64, other: &LatticeTest, b: f64) -> Result<LatticeTest> {
        if self.center != other.center {
            return Err(ModelError::Config("combined test functions must share the base point".into()));
        }
        let mut entries: Vec<_> = self.entries.iter().map(|&(g, x, w)| (g, x, a * w)).collect();
        entries.extend(other.entries.iter().map(|&(g, x, w)| (g, x, b * w)));
        Ok(LatticeTest { center: self.center, entries })
    }
}

/// Spatial weights of `φ` on the torus, normalized to unit sum.
fn space_weights(lattice: &LatticeSpec, phi: &TestFunction) -> Vec<(usize, f64)> {
    let eps = lattice.eps();
    let (_, xc) = phi.center();
    let n = lattice.side() as i64;
    let c: Vec<i64> = xc.iter().map(|v| (v / eps).round() as i64).collect();
    let reach = (phi.radius() / eps).floor() as i64 + 1;
    let mut out = Vec::new();
    for dz in -reach..=reach {
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let p = [c[0] + dx, c[1] + dy, c[2] + dz];
                let r2: f64 = (0..3).map(|j| (p[j] as f64 * eps - xc[j]).powi(2)).sum();
                let w = phi.space_profile(r2.sqrt());
                if w > 0.0 {
                    out.push((lattice.site_at(&p), w));
                }
            }
        }
    }
    if 2 * reach + 1 > n {
        // Fold duplicate images of a site.
        out.sort_by_key(|e| e.0);
        out.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
    }
    let total: f64 = out.iter().map(|e| e.1).sum();
    if total == 0.0 {
        return vec![(lattice.site_at(&c), 1.0)];
    }
    out.into_iter().map(|(s, w)| (s, w / total)).collect()
}

/// Time weights `∫ φ(t) hat((t - t_g)/dt) dt`, normalized to unit sum.
fn time_weights(frame: &Frame, phi: &TestFunction) -> Result<Vec<(usize, f64)>> {
    let (lo, hi) = phi.time_support();
    let dt = frame.dt;
    let first = (lo / dt).floor() as i64;
    let last = (hi / dt).ceil() as i64;
    let rule = GaussRule::new(16);
    let mut out = Vec::new();
    for i in first..=last {
        let node = i as f64 * dt;
        let clip = |a: f64, b: f64| (a.max(lo), b.min(hi));
        let (a0, b0) = clip(node - dt, node);
        let (a1, b1) = clip(node, node + dt);
        let mut w = 0.0;
        if a0 < b0 {
            w += rule.integrate_composite(a0, b0, 4, |t| phi.time_profile(t) * (t - node + dt) / dt);
        }
        if a1 < b1 {
            w += rule.integrate_composite(a1, b1, 4, |t| phi.time_profile(t) * (node + dt - t) / dt);
        }
        if w > 0.0 {
            let g = i + PAD as i64;
            if g < 0 || g as usize >= frame.len {
                return Err(ModelError::Domain(format!("test function support [{lo}, {hi}] leaves the grid")));
            }
            out.push((g as usize, w));
        }
    }
    let total: f64 = out.iter().map(|e| e.1).sum();
    Ok(out.into_iter().map(|(g, w)| (g, w / total)).collect())
}

/// Product grid weights of `φ^λ_z` with unit discrete mass.
///
/// The base point is the grid point nearest to the centre of `φ`.
pub fn lattice_weights(lattice: &LatticeSpec, frame: &Frame, phi: &TestFunction) -> Result<LatticeTest> {
    let (tc, xc) = phi.center();
    let center_node = frame
        .node(tc)
        .or_else(|| frame.node((tc / frame.dt).round() * frame.dt))
        .ok_or_else(|| ModelError::Domain(format!("centre time {tc} outside the grid")))?;
    let cs: Vec<i64> = xc.iter().map(|v| (v / lattice.eps()).round() as i64).collect();
    let times = time_weights(frame, phi)?;
    let spaces = space_weights(lattice, phi);
    let mut entries = Vec::with_capacity(times.len() * spaces.len());
    for &(g, wt) in &times {
        for &(x, ws) in &spaces {
            entries.push((g, x, wt * ws));
        }
    }
    Ok(LatticeTest { center: (center_node, lattice.site_at(&cs)), entries })
}

/// `∫ φ Ψ`.
pub fn pi_psi(psi: &PsiField, test: &LatticeTest) -> f64 {
    test.entries.iter().map(|&(g, x, w)| w * psi.value(g, x)).sum()
}

/// `∫ φ (Ψ² - C₁)`.
pub fn pi_psi2(psi: &PsiField, test: &LatticeTest, c1: f64) -> f64 {
    test.entries
        .iter()
        .map(|&(g, x, w)| {
            let v = psi.value(g, x);
            w * (v * v - c1)
        })
        .sum()
}

/// `∫ φ(z̄) [Ψ(z̄)² (Y(z̄) - Y(z)) - 3 C₂ Ψ(z̄)] dz̄` with `z` the base point of the test.
pub fn pi_ipsi3psi2(psi: &PsiField, y: &CubicField, test: &LatticeTest, c2: f64) -> f64 {
    let yz = y.value(test.center.0, test.center.1);
    test.entries
        .iter()
        .map(|&(g, x, w)| {
            let v = psi.value(g, x);
            w * (v * v * (y.value(g, x) - yz) - 3.0 * c2 * v)
        })
        .sum()
}

/// `w(s, y) = Σ_i c_i (φ_i ⋆_ε ψ_𝔢)(s, y)`, separable in each term.
#[derive(Debug, Clone)]
pub struct XiWeight {
    parts: Vec<(f64, TestFunction, Vec<f64>)>,
    support: (f64, f64),
}

impl XiWeight {
    pub fn new(phi: &TestFunction, lattice: &LatticeSpec, moll: &LatticeMollifier) -> Self {
        let spaces = space_weights(lattice, phi);
        let mut s = vec![0.0; lattice.sites()];
        for &(x, wx) in &spaces {
            let c: Vec<i64> = lattice.coords(x).iter().map(|&v| v as i64).collect();
            for (off, wpsi) in moll.taps() {
                let y: Vec<i64> = c.iter().zip(off).map(|(a, o)| a + o).collect();
                s[lattice.site_at(&y)] += wx * wpsi;
            }
        }
        Self { parts: vec![(1.0, *phi, s)], support: phi.time_support() }
    }

    pub fn combine(&self, a: f64, other: &XiWeight, b: f64) -> XiWeight {
        let mut parts: Vec<_> = self.parts.iter().map(|(c, p, s)| (a * c, *p, s.clone())).collect();
        parts.extend(other.parts.iter().map(|(c, p, s)| (b * c, *p, s.clone())));
        let support = (self.support.0.min(other.support.0), self.support.1.max(other.support.1));
        XiWeight { parts, support }
    }
}

impl SpaceTimeTest for XiWeight {
    fn value(&self, t: f64, site: usize) -> f64 {
        self.parts.iter().map(|(c, p, s)| c * p.time_profile(t) * s[site]).sum()
    }
    fn time_support(&self) -> (f64, f64) {
        self.support
    }
}

/// `∫ (φ^λ_z ⋆_ε ψ_𝔢) d𝐌`.
pub fn pi_xi(path: &MartingalePathSet, w: &XiWeight) -> Result<f64> {
    let lat = path.lattice();
    let h = lat.eps().powi(2) / 8.0;
    Ok(path.pair_with_test(w, lat.horizon(), h)?)
}

/// Exact variance `ε^d C Σ_y ∫ w(s, y)² ds` of [`pi_xi`].
pub fn xi_variance(w: &XiWeight, lattice: &LatticeSpec, spec: &MartingaleSpec) -> f64 {
    let (lo, hi) = w.support;
    let rule = GaussRule::new(24);
    let mut total = 0.0;
    for site in 0..lattice.sites() {
        if w.parts.iter().all(|(_, _, s)| s[site] == 0.0) {
            continue;
        }
        total += rule.integrate_composite(lo, hi, 16, |t| w.value(t, site).powi(2));
    }
    lattice.cell_volume() * spec.bracket_density * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_paths, Jump, JumpModel};

    fn small_grid() -> ModelGrid {
        let mut p = ModelParams::new(0.25, 0.25);
        p.lambda_max = 0.5;
        ModelGrid::new(p).unwrap()
    }

    fn empty_path(grid: &ModelGrid) -> MartingalePathSet {
        let events = vec![Vec::new(); grid.lattice().sites()];
        MartingalePathSet::from_events(*grid.lattice(), *grid.spec(), events, 0).unwrap()
    }

    #[test]
    fn frame_layout() {
        let g = small_grid();
        let f = g.frame();
        let cv = f.cubic_valid.unwrap();
        assert!(f.psi_valid.0 <= cv.0 && cv.1 <= f.psi_valid.1);
        assert!(cv.0 < f.center && f.center < cv.1);
        assert_eq!(f.node(f.time(f.center)), Some(f.center));
        assert_eq!(f.node(f.time(3) + 0.3 * f.dt), None);
        assert!((g.lattice().horizon() - f.horizon()).abs() < 1e-12);
    }

    #[test]
    fn empty_path_gives_zero_fields() {
        let g = small_grid();
        let path = empty_path(&g);
        let psi = g.psi_field(&path).unwrap();
        let y = g.cubic_field(&psi).unwrap();
        let phi = g.discretize(&g.test_function(0.5).unwrap()).unwrap();
        assert!(psi.data.iter().all(|v| v.abs() < 1e-300));
        assert_eq!(pi_psi(&psi, &phi), 0.0);
        let c1 = g.c1().value;
        assert!((pi_psi2(&psi, &phi, c1) + c1 * phi.mass()).abs() < 1e-15);
        assert_eq!(pi_ipsi3psi2(&psi, &y, &phi, g.c2().unwrap().value), 0.0);
        assert_eq!(pi_xi(&path, &g.xi_weight(&g.test_function(0.5).unwrap())).unwrap(), 0.0);
    }

    #[test]
    fn single_jump_matches_kernel() {
        let g = small_grid();
        let mut events = vec![Vec::new(); g.lattice().sites()];
        let s0 = 0.3137;
        let x0 = g.lattice().site_at(&[1, 2, 3]);
        events[x0].push(Jump { time: s0, sign: -1 });
        let path = MartingalePathSet::from_events(*g.lattice(), *g.spec(), events, 0).unwrap();
        let psi = g.psi_field(&path).unwrap();
        let f = *g.frame();
        let a = path.jump_size() * g.lattice().cell_volume();
        for gi in (f.psi_valid.0..=f.psi_valid.1).step_by(3) {
            for site in [0, 7, x0, 40] {
                let d = g.lattice().displacement(x0, site);
                let want = -a * g.k_frak().value(f.time(gi) - s0, [d[0], d[1], d[2]]);
                assert!((psi.value(gi, site) - want).abs() < 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn grid_field_matches_direct_sum() {
        let g = small_grid();
        let path = sample_paths(g.lattice(), g.spec(), 5).unwrap();
        let psi = g.psi_field(&path).unwrap();
        let f = *g.frame();
        for (k, gi) in [f.psi_valid.0, f.center, f.psi_valid.1].into_iter().enumerate() {
            let site = 13 * k + 1;
            let direct = psi_direct(&path, g.k_frak(), f.time(gi), site);
            assert!((psi.at(f.time(gi), site).unwrap() - direct).abs() < 1e-10, "{gi}");
        }
        assert!(psi.at(f.time(0), 0).is_err());
    }

    #[test]
    fn one_sided_drift_is_deposited() {
        let mut p = ModelParams::new(0.25, 0.25);
        p.cubic = false;
        let g = ModelGrid::new(p).unwrap();
        let spec = MartingaleSpec::one_sided(-0.5, std::f64::consts::FRAC_1_SQRT_2, 1.0, 3, 0.25);
        assert_eq!(spec.jump_model, JumpModel::OneSidedCompensated);
        let path = sample_paths(g.lattice(), &spec, 9).unwrap();
        let psi = g.psi_field(&path).unwrap();
        let f = *g.frame();
        let t = f.time(f.center);
        let direct = psi_direct(&path, g.k_frak(), t, 3);
        assert!(
            (psi.value(f.center, 3) - direct).abs() < 1e-6 * (1.0 + direct.abs()),
            "{} {direct}",
            psi.value(f.center, 3)
        );
    }

    #[test]
    fn paired_transforms_match_single() {
        let g = small_grid();
        let a = sample_paths(g.lattice(), g.spec(), 1).unwrap();
        let b = sample_paths(g.lattice(), g.spec(), 2).unwrap();
        let mut fft = g.fft();
        let (pa, pb) = g.psi_fields(&mut fft, &a, Some(&b)).unwrap();
        let pb = pb.unwrap();
        let sa = g.psi_field(&a).unwrap();
        let sb = g.psi_field(&b).unwrap();
        let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(u, v)| (u - v).abs() < 1e-12);
        assert!(close(&pa.data, &sa.data) && close(&pb.data, &sb.data));
        let (ya, yb) = g.cubic_fields(&mut fft, &pa, Some(&pb)).unwrap();
        assert!(close(&ya.data, &g.cubic_field(&sa).unwrap().data));
        assert!(close(&yb.unwrap().data, &g.cubic_field(&sb).unwrap().data));
    }

    #[test]
    fn cubic_field_matches_riemann_sum() {
        let g = small_grid();
        let path = sample_paths(g.lattice(), g.spec(), 3).unwrap();
        let psi = g.psi_field(&path).unwrap();
        let y = g.cubic_field(&psi).unwrap();
        let f = *g.frame();
        let k = g.k_eps();
        let (lo, hi) = k.node_range();
        let site = 21;
        let mut want = 0.0;
        for i in lo..=hi {
            let gp = (f.center as i64 - i) as usize;
            for yv in 0..f.vol {
                let d = g.lattice().displacement(yv, site);
                want += k.node_value(i, [d[0], d[1], d[2]]) * psi.value(gp, yv).powi(3);
            }
        }
        want *= g.lattice().cell_volume() * f.dt;
        assert!((y.value(f.center, site) - want).abs() < 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn lattice_weights_have_unit_mass() {
        let g = small_grid();
        for &lambda in &[0.5, 0.25, 0.1, 0.01] {
            let phi = g.test_function(lambda).unwrap();
            let w = g.discretize(&phi).unwrap();
            assert!((w.mass() - 1.0).abs() < 1e-12);
            assert_eq!(w.center, (g.frame().center, 0));
        }
        let far = TestFunction::new(0.5, 0.01, [0.0; 3]).unwrap();
        assert!(matches!(g.discretize(&far), Err(ModelError::Domain(_))));
    }

    #[test]
    fn psi_variance_matches_direct_quadrature() {
        let g = small_grid();
        let test = g.discretize(&g.test_function(0.5).unwrap()).unwrap();
        let var = g.psi_pairing_variance(&test);
        let f = *g.frame();
        let k = g.k_frak();
        let lat = g.lattice();
        let rule = GaussRule::new(4);
        let mut acc = 0.0;
        for y in 0..f.vol {
            for i in 0..f.len - 2 * PAD {
                acc += rule.integrate(i as f64 * f.dt, (i + 1) as f64 * f.dt, |s| {
                    let v: f64 = test
                        .entries
                        .iter()
                        .map(|&(gi, x, w)| {
                            let d = lat.displacement(y, x);
                            w * k.value(f.time(gi) - s, [d[0], d[1], d[2]])
                        })
                        .sum();
                    v * v
                });
            }
        }
        let want = acc * lat.cell_volume();
        assert!((var - want).abs() < 1e-9 * want, "{var} {want}");
    }

    #[test]
    fn xi_variance_matches_bracket_sum() {
        let g = small_grid();
        let phi = g.test_function(0.5).unwrap();
        let w = g.xi_weight(&phi);
        let var = xi_variance(&w, g.lattice(), g.spec());
        // Riemann check on a fine time grid.
        let (lo, hi) = phi.time_support();
        let n = 4000;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for site in 0..g.lattice().sites() {
            for i in 0..n {
                acc += h * w.value(lo + (i as f64 + 0.5) * h, site).powi(2);
            }
        }
        let want = g.lattice().cell_volume() * acc;
        assert!((var - want).abs() < 1e-6 * want);
    }
}
