//! Lattice jump martingales on the discrete torus `(εℤ/ℤ)^d`.
//!
//! Each site carries a pure-jump martingale whose jumps have magnitude `c ε^k`.
//! The symmetric model is a difference of two Poisson clocks; the one-sided model
//! has positive jumps only and is compensated by a linear drift.

use std::collections::HashSet;

use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::profiles::RadialBump;
use crate::quad::midpoint_cells;
use crate::rng::{derive_seed, stream_rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, NoiseError>;

/// Relative tolerance for the consistency identities of a `MartingaleSpec`.
const SPEC_TOL: f64 = 1e-9;

/// The torus `(εℤ/ℤ)^d` together with a time horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    d: usize,
    eps: f64,
    horizon: f64,
    side: usize,
}

impl LatticeSpec {
    pub fn new(d: usize, eps: f64, horizon: f64) -> Result<Self> {
        if d == 0 {
            return Err(NoiseError::Config("dimension must be positive".into()));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(NoiseError::Config(format!("eps = {eps} must lie in (0, 1]")));
        }
        let inv = 1.0 / eps;
        let side = inv.round();
        if (inv - side).abs() > 1e-9 * inv {
            return Err(NoiseError::Config(format!("1/eps = {inv} is not an integer")));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(NoiseError::Config(format!("horizon {horizon} must be finite and >= 0")));
        }
        let side = side as usize;
        if (side as f64).powi(d as i32) > 1e9 {
            return Err(NoiseError::Config("lattice has more than 1e9 sites".into()));
        }
        Ok(Self { d, eps: 1.0 / side as f64, horizon, side })
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.d, self.eps, horizon)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    /// Number of sites along each axis, `1/ε`.
    pub fn side(&self) -> usize {
        self.side
    }
    pub fn sites(&self) -> usize {
        self.side.pow(self.d as u32)
    }
    /// `ε^d`, the spatial weight of a single site.
    pub fn cell_volume(&self) -> f64 {
        self.eps.powi(self.d as i32)
    }

    /// Integer coordinates of a site; axis 0 varies fastest.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        (0..self.d)
            .map(|_| {
                let c = rest % self.side;
                rest /= self.side;
                c
            })
            .collect()
    }

    /// Site index for (possibly negative or out-of-range) integer coordinates, wrapped periodically.
    pub fn site_at(&self, coords: &[i64]) -> usize {
        let n = self.side as i64;
        coords.iter().rev().fold(0usize, |acc, &c| acc * self.side + c.rem_euclid(n) as usize)
    }

    /// Minimal-image displacement `b - a` in lattice units.
    pub fn displacement(&self, a: usize, b: usize) -> Vec<i64> {
        let n = self.side as i64;
        self.coords(a)
            .iter()
            .zip(self.coords(b))
            .map(|(&ca, cb)| {
                let mut v = (cb as i64 - ca as i64).rem_euclid(n);
                if 2 * v > n {
                    v -= n;
                }
                v
            })
            .collect()
    }

    /// Euclidean torus distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let s: i64 = self.displacement(a, b).iter().map(|v| v * v).sum();
        self.eps * (s as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpModel {
    /// Difference of two independent Poisson clocks, jumps `±c ε^k`, zero drift.
    SymmetricPair,
    /// Positive jumps only, compensated by `ε^{-k-d} 𝙲 t`.
    OneSidedCompensated,
}

/// Law of the per-site martingales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleSpec {
    pub k: f64,
    pub c: f64,
    /// `C_ε`, density of the predictable bracket.
    pub bracket_density: f64,
    /// `𝙲_ε`, density of the compensator.
    pub compensator_density: f64,
    pub jump_model: JumpModel,
    /// Total jump intensity per site.
    pub site_rate: f64,
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SPEC_TOL * a.abs().max(b.abs()).max(1e-300)
}

impl MartingaleSpec {
    /// The Φ⁴₃ preset in `d = 3`: `k = -1/2`, `c = 1/√2`, `C = 1`, two unit clocks in rescaled time.
    pub fn phi43(eps: f64) -> Self {
        Self::symmetric(-0.5, std::f64::consts::FRAC_1_SQRT_2, 1.0, 3, eps)
    }

    /// Symmetric model with the site rate fixed by the bracket identity.
    pub fn symmetric(k: f64, c: f64, bracket_density: f64, d: usize, eps: f64) -> Self {
        let site_rate = bracket_density * eps.powf(-(d as f64)) / (c * c * eps.powf(2.0 * k));
        Self { k, c, bracket_density, compensator_density: 0.0, jump_model: JumpModel::SymmetricPair, site_rate }
    }

    /// One-sided model with the compensator chosen so that the process is a martingale.
    pub fn one_sided(k: f64, c: f64, bracket_density: f64, d: usize, eps: f64) -> Self {
        let site_rate = bracket_density * eps.powf(-(d as f64)) / (c * c * eps.powf(2.0 * k));
        Self {
            k,
            c,
            bracket_density,
            compensator_density: bracket_density / c,
            jump_model: JumpModel::OneSidedCompensated,
            site_rate,
        }
    }

    /// Check the structural identities against a lattice.
    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        let d = lattice.dim() as f64;
        let eps = lattice.eps();
        if !(self.k > -d / 2.0) {
            return Err(NoiseError::Config(format!("jump exponent k = {} must exceed -d/2", self.k)));
        }
        if !(self.c > 0.0) {
            return Err(NoiseError::Config(format!("jump constant c = {} must be positive", self.c)));
        }
        if !(self.site_rate > 0.0 && self.site_rate.is_finite()) {
            return Err(NoiseError::Config(format!("site_rate = {} must be positive", self.site_rate)));
        }
        if !(self.bracket_density > 0.0 && self.bracket_density <= 1.0) {
            return Err(NoiseError::Config(format!("bracket density {} must lie in (0, 1]", self.bracket_density)));
        }
        let lhs = self.site_rate * self.c * self.c * eps.powf(2.0 * self.k);
        let rhs = self.bracket_density * eps.powf(-d);
        if !rel_close(lhs, rhs) {
            return Err(NoiseError::Config(format!(
                "bracket identity site_rate·c²·ε^(2k) = C·ε^(-d) violated: {lhs} != {rhs}"
            )));
        }
        match self.jump_model {
            JumpModel::SymmetricPair => {
                if self.compensator_density != 0.0 {
                    return Err(NoiseError::Config("symmetric-pair model requires compensator density 0".into()));
                }
            }
            JumpModel::OneSidedCompensated => {
                // Martingale property: rate·c·ε^k = ε^{-k-d}𝙲.
                let drift = self.site_rate * self.c * eps.powf(self.k);
                let comp = eps.powf(-self.k - d) * self.compensator_density;
                if !rel_close(drift, comp) {
                    return Err(NoiseError::Config(format!(
                        "compensator identity site_rate·c·ε^k = ε^(-k-d)·𝙲 violated: {drift} != {comp}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `c ε^k`.
    pub fn jump_size(&self, eps: f64) -> f64 {
        self.c * eps.powf(self.k)
    }

    /// Drift slope `ε^{-k-d} 𝙲` of the compensator.
    pub fn drift_rate(&self, eps: f64, d: usize) -> f64 {
        eps.powf(-self.k - d as f64) * self.compensator_density
    }
}

/// One jump at a fixed site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub site: usize,
    pub sign: i8,
}

/// A realization of all site martingales on `[0, T]`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePathSet {
    lattice: LatticeSpec,
    spec: MartingaleSpec,
    events: Vec<Vec<Jump>>,
    seed: u64,
}

fn sample_clock(seed: u64, site: usize, stream: u32, rate: f64, horizon: f64, sign: i8, out: &mut Vec<Jump>) {
    if horizon <= 0.0 {
        return;
    }
    let mut rng = stream_rng(seed, site as u64, stream);
    let exp = Exp::new(rate).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t >= horizon {
            break;
        }
        out.push(Jump { time: t, sign });
    }
}

/// Draw a path set. Deterministic in `(seed, lattice, spec)`.
pub fn sample_paths(lattice: &LatticeSpec, spec: &MartingaleSpec, seed: u64) -> Result<MartingalePathSet> {
    spec.validate(lattice)?;
    let horizon = lattice.horizon();
    let mut events = Vec::with_capacity(lattice.sites());
    for site in 0..lattice.sites() {
        let mut jumps = Vec::new();
        match spec.jump_model {
            JumpModel::SymmetricPair => {
                let half = 0.5 * spec.site_rate;
                sample_clock(seed, site, 0, half, horizon, 1, &mut jumps);
                sample_clock(seed, site, 1, half, horizon, -1, &mut jumps);
                jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
            }
            JumpModel::OneSidedCompensated => {
                sample_clock(seed, site, 0, spec.site_rate, horizon, 1, &mut jumps);
            }
        }
        events.push(jumps);
    }
    MartingalePathSet::from_events(*lattice, *spec, events, seed)
}

impl MartingalePathSet {
    /// Build a path set from explicit per-site jumps, checking every invariant.
    pub fn from_events(lattice: LatticeSpec, spec: MartingaleSpec, events: Vec<Vec<Jump>>, seed: u64) -> Result<Self> {
        if events.len() != lattice.sites() {
            return Err(NoiseError::Config(format!("expected {} sites, got {}", lattice.sites(), events.len())));
        }
        let mut seen = HashSet::with_capacity(events.iter().map(Vec::len).sum());
        for (site, jumps) in events.iter().enumerate() {
            for (i, j) in jumps.iter().enumerate() {
                if !(j.time >= 0.0 && j.time < lattice.horizon()) {
                    return Err(NoiseError::Domain(format!("event at site {site} has time {} outside [0, T)", j.time)));
                }
                if j.sign != 1 && j.sign != -1 {
                    return Err(NoiseError::Config(format!("event sign {} is not ±1", j.sign)));
                }
                if spec.jump_model == JumpModel::OneSidedCompensated && j.sign != 1 {
                    return Err(NoiseError::Config("one-sided model has positive jumps only".into()));
                }
                if i > 0 && !(jumps[i - 1].time < j.time) {
                    return Err(NoiseError::Config(format!("event times at site {site} are not strictly increasing")));
                }
                if !seen.insert(j.time.to_bits()) {
                    return Err(NoiseError::Config(format!("simultaneous jumps at time {} (site {site})", j.time)));
                }
            }
        }
        Ok(Self { lattice, spec, events, seed })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }
    pub fn spec(&self) -> &MartingaleSpec {
        &self.spec
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn site_events(&self, site: usize) -> &[Jump] {
        &self.events[site]
    }
    pub fn total_events(&self) -> usize {
        self.events.iter().map(Vec::len).sum()
    }

    /// `c ε^k`.
    pub fn jump_size(&self) -> f64 {
        self.spec.jump_size(self.lattice.eps())
    }

    /// `ε^{-k-d} 𝙲`.
    pub fn drift_rate(&self) -> f64 {
        self.spec.drift_rate(self.lattice.eps(), self.lattice.dim())
    }

    /// All events in global time order.
    pub fn events_sorted(&self) -> Vec<JumpEvent> {
        let mut all: Vec<JumpEvent> = self.iter_events().collect();
        all.sort_by(|a, b| a.time.total_cmp(&b.time));
        all
    }

    /// Events grouped by site (site order, then time order).
    pub fn iter_events(&self) -> impl Iterator<Item = JumpEvent> + '_ {
        self.events
            .iter()
            .enumerate()
            .flat_map(|(site, js)| js.iter().map(move |j| JumpEvent { time: j.time, site, sign: j.sign }))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.lattice.horizon()) {
            return Err(NoiseError::Domain(format!("t = {t} outside [0, {}]", self.lattice.horizon())));
        }
        Ok(())
    }

    fn check_site(&self, x: usize) -> Result<()> {
        if x >= self.lattice.sites() {
            return Err(NoiseError::Domain(format!("site {x} out of range")));
        }
        Ok(())
    }

    /// Number of events at `x` with time `≤ t`.
    fn count_upto(&self, t: f64, x: usize) -> usize {
        self.events[x].partition_point(|j| j.time <= t)
    }

    /// Càdlàg value `𝕄(t, x)`.
    pub fn evaluate(&self, t: f64, x: usize) -> Result<f64> {
        self.check_time(t)?;
        self.check_site(x)?;
        let n = self.count_upto(t, x);
        let signed: i64 = self.events[x][..n].iter().map(|j| j.sign as i64).sum();
        Ok(signed as f64 * self.jump_size() - self.drift_rate() * t)
    }

    /// Realized bracket `Σ_{s≤t} (Δ𝕄)²`.
    pub fn realized_bracket(&self, t: f64, x: usize) -> Result<f64> {
        self.check_time(t)?;
        self.check_site(x)?;
        let a = self.jump_size();
        Ok(a * a * self.count_upto(t, x) as f64)
    }

    /// Jump count on the half-open interval `[a, b)`.
    pub fn jump_count(&self, a: f64, b: f64, x: usize) -> Result<usize> {
        self.check_site(x)?;
        if b <= a {
            return Ok(0);
        }
        self.check_time(a)?;
        self.check_time(b)?;
        let js = &self.events[x];
        Ok(js.partition_point(|j| j.time < b) - js.partition_point(|j| j.time < a))
    }

    /// Total variation of `t ↦ 𝕄(t, x)` on `[0, t]`.
    pub fn total_variation(&self, t: f64, x: usize) -> Result<f64> {
        self.check_time(t)?;
        self.check_site(x)?;
        Ok(self.jump_size() * self.count_upto(t, x) as f64 + self.drift_rate().abs() * t)
    }

    /// Exact `sup_{s ≤ t} |𝕄(s, x)|`.
    pub fn running_sup(&self, t: f64, x: usize) -> Result<f64> {
        self.check_time(t)?;
        self.check_site(x)?;
        let a = self.jump_size();
        let drift = self.drift_rate();
        let mut level = 0.0f64;
        let mut sup = 0.0f64;
        let mut last = 0.0;
        for j in self.events[x].iter().take_while(|j| j.time <= t) {
            // Between jumps the path is linear, so extremes sit at the endpoints.
            let before = level - drift * (j.time - last);
            level = before + a * j.sign as f64;
            sup = sup.max(before.abs()).max(level.abs());
            last = j.time;
        }
        sup = sup.max((level - drift * (t - last)).abs());
        Ok(sup)
    }

    /// The path of `𝕄̄ = ε^{-k}([𝕄] - ⟨𝕄⟩)`: same jump times, all signs positive.
    pub fn renormalized(&self) -> MartingalePathSet {
        let s = &self.spec;
        let spec = MartingaleSpec {
            k: s.k,
            c: s.c * s.c,
            bracket_density: s.c * s.c * s.bracket_density,
            compensator_density: s.bracket_density,
            jump_model: JumpModel::OneSidedCompensated,
            site_rate: s.site_rate,
        };
        let events = self.events.iter().map(|js| js.iter().map(|j| Jump { time: j.time, sign: 1 }).collect()).collect();
        MartingalePathSet { lattice: self.lattice, spec, events, seed: self.seed }
    }

    /// `∫ φ d𝐌 = ε^d Σ_x [Σ_jumps φ(s, x) Δ𝕄 - ε^{-k-d}𝙲 ∫ φ(s, x) ds]`.
    ///
    /// Jumps are counted up to and including `t`. The drift integral uses the
    /// midpoint rule with step at most `h`.
    pub fn pair_with_test(&self, phi: &dyn SpaceTimeTest, t: f64, h: f64) -> Result<f64> {
        self.check_time(t)?;
        let (lo, hi) = phi.time_support();
        if lo < 0.0 || hi > self.lattice.horizon() {
            return Err(NoiseError::Domain(format!(
                "test function support [{lo}, {hi}] escapes [0, {}]",
                self.lattice.horizon()
            )));
        }
        let a = self.jump_size();
        let mut jumps = 0.0;
        for (x, js) in self.events.iter().enumerate() {
            for j in js.iter().take_while(|j| j.time <= t) {
                jumps += phi.value(j.time, x) * j.sign as f64;
            }
        }
        let mut total = a * jumps;
        let drift = self.drift_rate();
        if drift != 0.0 {
            let (mids, w) = midpoint_cells(lo.max(0.0), hi.min(t), h);
            let mut acc = 0.0;
            for x in 0..self.lattice.sites() {
                for &s in &mids {
                    acc += phi.value(s, x);
                }
            }
            total -= drift * w * acc;
        }
        Ok(self.lattice.cell_volume() * total)
    }
}

/// `ε^{-d} C t`.
pub fn predictable_bracket(spec: &MartingaleSpec, lattice: &LatticeSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= lattice.horizon()) {
        return Err(NoiseError::Domain(format!("t = {t} outside [0, {}]", lattice.horizon())));
    }
    Ok(lattice.eps().powi(-(lattice.dim() as i32)) * spec.bracket_density * t)
}

/// A test function on `[0, T] × torus`.
pub trait SpaceTimeTest {
    fn value(&self, t: f64, site: usize) -> f64;
    /// Interval outside which the function vanishes.
    fn time_support(&self) -> (f64, f64);
}

/// Test function given by a closure.
pub struct FnTest<F> {
    pub f: F,
    pub support: (f64, f64),
}

impl<F: Fn(f64, usize) -> f64> SpaceTimeTest for FnTest<F> {
    fn value(&self, t: f64, site: usize) -> f64 {
        if t < self.support.0 || t > self.support.1 {
            0.0
        } else {
            (self.f)(t, site)
        }
    }
    fn time_support(&self) -> (f64, f64) {
        self.support
    }
}

/// Independent forward and backward paths realizing the noise on `[-T, T]`.
#[derive(Debug, Clone)]
pub struct TwoSidedPath {
    pub forward: MartingalePathSet,
    pub backward: MartingalePathSet,
}

impl TwoSidedPath {
    pub fn sample(lattice: &LatticeSpec, spec: &MartingaleSpec, seed: u64) -> Result<Self> {
        Ok(Self {
            forward: sample_paths(lattice, spec, derive_seed(seed, 0))?,
            backward: sample_paths(lattice, spec, derive_seed(seed, 1))?,
        })
    }

    /// `𝕄(t, x)` for `t ≥ 0`, and the backward copy at `-t` for `t < 0`.
    pub fn evaluate(&self, t: f64, x: usize) -> Result<f64> {
        if t >= 0.0 {
            self.forward.evaluate(t, x)
        } else {
            self.backward.evaluate(-t, x)
        }
    }
}

/// `ψ_𝔢(x) = 𝔢^{-d} ψ(x/𝔢)` sampled on the lattice.
///
/// The weights are renormalized to unit discrete mass `ε^d Σ_x ψ_𝔢(x) = 1`.
#[derive(Debug, Clone)]
pub struct LatticeMollifier {
    scale: f64,
    /// Offsets in lattice units and their normalized weights.
    taps: Vec<(Vec<i64>, f64)>,
    riemann_mass: f64,
    profile: RadialBump,
}

impl LatticeMollifier {
    pub fn new(lattice: &LatticeSpec, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(NoiseError::Config(format!("mollifier scale {scale} must be positive")));
        }
        if 2.0 * scale > 1.0 {
            return Err(NoiseError::Config(format!("mollifier support diameter {} exceeds the torus", 2.0 * scale)));
        }
        let d = lattice.dim();
        let eps = lattice.eps();
        let profile = RadialBump::new(d, scale);
        let reach = (scale / eps).floor() as i64;
        let mut taps = Vec::new();
        let mut offset = vec![-reach; d];
        loop {
            let r2: i64 = offset.iter().map(|v| v * v).sum();
            let r = eps * (r2 as f64).sqrt();
            let w = profile.at(r);
            if w > 0.0 {
                taps.push((offset.clone(), w));
            }
            // Odometer over the cube [-reach, reach]^d.
            let mut axis = 0;
            loop {
                if axis == d {
                    break;
                }
                offset[axis] += 1;
                if offset[axis] <= reach {
                    break;
                }
                offset[axis] = -reach;
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
        let vol = lattice.cell_volume();
        let riemann_mass: f64 = vol * taps.iter().map(|(_, w)| w).sum::<f64>();
        if taps.is_empty() {
            // Below lattice resolution: degenerate to the lattice delta.
            taps.push((vec![0; d], 1.0 / vol));
        } else {
            for (_, w) in taps.iter_mut() {
                *w /= riemann_mass;
            }
        }
        Ok(Self { scale, taps, riemann_mass, profile })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
    /// Lattice offsets with nonzero weight and their weights.
    pub fn taps(&self) -> &[(Vec<i64>, f64)] {
        &self.taps
    }
    /// `ε^d Σ_x` of the raw (unnormalized) samples.
    pub fn riemann_mass(&self) -> f64 {
        self.riemann_mass
    }
    pub fn profile(&self) -> &RadialBump {
        &self.profile
    }
}

/// Smoothing exponent: `𝔢 = ε^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedFieldSpec {
    pub alpha: f64,
}

impl Default for SmoothedFieldSpec {
    fn default() -> Self {
        Self { alpha: 0.75 }
    }
}

impl SmoothedFieldSpec {
    pub fn scale(&self, eps: f64) -> Result<f64> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(NoiseError::Config(format!("alpha = {} must lie in (0, 1]", self.alpha)));
        }
        Ok(eps.powf(self.alpha))
    }
}

/// `𝓜(t, x) = ε^d Σ_y ψ_𝔢(x - y) 𝕄(t, y)`.
pub struct SmoothedField<'a> {
    path: &'a MartingalePathSet,
    mollifier: LatticeMollifier,
}

/// Smooth a path set with `ψ_𝔢` at the scale prescribed by `field`.
pub fn smooth<'a>(path: &'a MartingalePathSet, field: &SmoothedFieldSpec) -> Result<SmoothedField<'a>> {
    let scale = field.scale(path.lattice().eps())?;
    let mollifier = LatticeMollifier::new(path.lattice(), scale)?;
    Ok(SmoothedField { path, mollifier })
}

impl<'a> SmoothedField<'a> {
    pub fn with_mollifier(path: &'a MartingalePathSet, mollifier: LatticeMollifier) -> Self {
        Self { path, mollifier }
    }

    pub fn mollifier(&self) -> &LatticeMollifier {
        &self.mollifier
    }

    pub fn value(&self, t: f64, x: usize) -> Result<f64> {
        let lat = self.path.lattice();
        let base: Vec<i64> = lat.coords(x).into_iter().map(|c| c as i64).collect();
        let vol = lat.cell_volume();
        let mut acc = 0.0;
        let mut probe = vec![0i64; lat.dim()];
        for (off, w) in self.mollifier.taps() {
            for (p, (b, o)) in probe.iter_mut().zip(base.iter().zip(off)) {
                *p = b - o;
            }
            acc += w * self.path.evaluate(t, lat.site_at(&probe))?;
        }
        Ok(vol * acc)
    }
}
