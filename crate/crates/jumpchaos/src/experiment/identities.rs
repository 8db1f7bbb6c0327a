//! Deterministic suite of the exact algebraic identities between the
//! integrals of the chaos module, on random small paths.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Result;
use crate::chaos::{
    chaos_expansion, contractions, diagonal_decomposition, diagonal_integral, orderings, product_integral,
    renormalized_iterated_integral, GridFunction, Label, Labeling,
};
use crate::noise::{sample_paths, Jump, LatticeSpec, MartingalePathSet, MartingaleSpec};
use crate::rng::derive_seed;

/// How many random cases each identity is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentitySizes {
    /// Paths for the chaos decomposition.
    pub seeds: usize,
    /// Largest `n` in the chaos decomposition.
    pub max_n: usize,
    /// Largest number of jumps on a decomposition path.
    pub max_events: usize,
    /// Paths for the diagonal identities.
    pub diag_seeds: usize,
    /// Largest diagonal power (from 2).
    pub diag_max_n: usize,
    /// Paths for the `nil = ▽ + ◇` split.
    pub split_seeds: usize,
    /// Largest `n` in the split.
    pub split_max_n: usize,
}

impl Default for IdentitySizes {
    fn default() -> Self {
        Self { seeds: 100, max_n: 3, max_events: 12, diag_seeds: 50, diag_max_n: 5, split_seeds: 10, split_max_n: 4 }
    }
}

impl IdentitySizes {
    /// A few cases of each kind, for smoke tests.
    pub fn quick() -> Self {
        Self { seeds: 5, max_n: 3, max_events: 8, diag_seeds: 3, diag_max_n: 5, split_seeds: 2, split_max_n: 3 }
    }
}

/// Worst relative error of one identity over its cases.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub max_rel: f64,
    pub cases: usize,
    pub tolerance: f64,
}

impl SuiteResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, max_rel: 0.0, cases: 0, tolerance }
    }

    fn record(&mut self, rel: f64) {
        self.cases += 1;
        // NaN must fail, so it is kept rather than dropped by max().
        if rel.is_nan() || rel > self.max_rel {
            self.max_rel = rel;
        }
    }

    pub fn passed(&self) -> bool {
        self.max_rel <= self.tolerance
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "identity {} cases={} max_rel={:.3e} tolerance={:.0e} verdict={}",
            self.name,
            self.cases,
            self.max_rel,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub decomposition: SuiteResult,
    pub diagonal: SuiteResult,
    pub renormalization: SuiteResult,
}

impl IdentityReport {
    pub fn suites(&self) -> [&SuiteResult; 3] {
        [&self.decomposition, &self.diagonal, &self.renormalization]
    }

    pub fn passed(&self) -> bool {
        self.suites().iter().all(|s| s.passed())
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.suites().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `|a - b|` relative to `|a|`, floored at `1e-6 · scale` against cancellation.
fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let den = a.abs().max(1e-6 * scale.abs());
    if den == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b).abs() / den
    }
}

/// Smooth, non-symmetric integrand with random phases.
fn random_integrand(n: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    let freq: Vec<(f64, f64, f64)> =
        (0..n).map(|_| (rng.random_range(0.5..3.0), rng.random_range(0.0..1.0), rng.random_range(0.0..6.3))).collect();
    GridFunction::new(n, move |z| {
        z.iter().zip(&freq).map(|(p, &(a, b, c))| 1.2 + (a * p.t + b * p.site as f64 + c).cos()).product()
    })
}

/// A symmetric path with `1..=max_events` jumps at random sites and times on `[0, 1)`.
fn random_path(d: usize, max_events: usize, all_positive: bool, rng: &mut ChaCha8Rng) -> Result<MartingalePathSet> {
    let eps = if d == 1 { 0.25 } else { 0.5 };
    let lattice = LatticeSpec::new(d, eps, 1.0)?;
    let spec = MartingaleSpec::symmetric(-0.5, 0.7, 1.0, d, eps);
    let mut events = vec![Vec::new(); lattice.sites()];
    for _ in 0..rng.random_range(1..=max_events) {
        let site = rng.random_range(0..lattice.sites());
        let sign = if all_positive || rng.random_bool(0.5) { 1 } else { -1 };
        events[site].push(Jump { time: rng.random_range(0.0..1.0), sign });
    }
    for e in &mut events {
        e.sort_by(|a, b| a.time.total_cmp(&b.time));
    }
    Ok(MartingalePathSet::from_events(lattice, spec, events, 0)?)
}

/// Same events with every sign set to +1.
fn unsigned(path: &MartingalePathSet) -> Result<MartingalePathSet> {
    let lat = *path.lattice();
    let events = (0..lat.sites())
        .map(|x| path.site_events(x).iter().map(|j| Jump { time: j.time, sign: 1 }).collect())
        .collect();
    Ok(MartingalePathSet::from_events(lat, *path.spec(), events, path.seed())?)
}

fn decomposition_suite(seed: u64, sizes: &IdentitySizes) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("chaos-decomposition", 1e-10);
    for case in 0..sizes.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, case as u64));
        let d = if case % 2 == 0 { 1 } else { 3 };
        let path = random_path(d, sizes.max_events, false, &mut rng)?;
        let abs_path = unsigned(&path)?;
        for n in 1..=sizes.max_n {
            let f = random_integrand(n, &mut rng);
            let direct = product_integral(&f, &path, n, 1.0, 1e-3)?;
            let sum = chaos_expansion(&f, &path, n, 1.0, 1e-3)?;
            // The integrand is positive, so this is the integral of |F| against |d𝐌|.
            let scale = product_integral(&f, &abs_path, n, 1.0, 1e-3)?;
            out.record(rel_err(direct, sum, scale));
        }
    }
    Ok(out)
}

fn diagonal_suite(seed: u64, sizes: &IdentitySizes) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("diagonal", 1e-12);
    let eps = 0.25;
    let t = 0.25;
    let lattice = LatticeSpec::new(3, eps, t)?;
    let spec = MartingaleSpec::phi43(eps);
    for case in 0..sizes.diag_seeds {
        let s = derive_seed(seed ^ 0xd1a6, case as u64);
        let path = sample_paths(&lattice, &spec, s)?;
        let abs_path = unsigned(&path)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = random_integrand(1, &mut rng);
        for n in 2..=sizes.diag_max_n {
            let whole = diagonal_integral(&f, &path, n, t)?;
            let (mart, leb) = diagonal_decomposition(&f, &path, n, t, 1e-3)?;
            let scale = diagonal_integral(&f, &abs_path, n, t)?;
            out.record(rel_err(whole, mart + leb, scale));
        }
    }
    Ok(out)
}

fn renormalization_suite(seed: u64, sizes: &IdentitySizes) -> Result<SuiteResult> {
    let mut out = SuiteResult::new("renormalization-split", 1e-6);
    let t = 1.0;
    let h = 1e-4 * t;
    for case in 0..sizes.split_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ 0x5e11, case as u64));
        let d = if case % 2 == 0 { 1 } else { 3 };
        let path = random_path(d, sizes.max_events.min(8), false, &mut rng)?;
        for n in 2..=sizes.split_max_n {
            let f = random_integrand(n, &mut rng);
            for gamma in contractions(n)? {
                let sigmas = orderings(&gamma);
                let sigma = &sigmas[rng.random_range(0..sigmas.len())];
                for (c, block) in gamma.components().iter().enumerate() {
                    if block.len() % 2 == 1 {
                        continue;
                    }
                    let with = |l: Label| -> Result<f64> {
                        let mut labels = vec![Label::Nil; gamma.len()];
                        labels[c] = l;
                        let labels = Labeling::new(&gamma, labels)?;
                        Ok(renormalized_iterated_integral(&gamma, sigma, &labels, &f, &path, t, h)?)
                    };
                    let nil = with(Label::Nil)?;
                    let (down, dia) = (with(Label::Down)?, with(Label::Diamond)?);
                    out.record(rel_err(nil, down + dia, down.abs() + dia.abs()));
                }
            }
        }
    }
    Ok(out)
}

/// Run the three identity checks. Deterministic in `(seed, sizes)`.
///
/// * chaos decomposition: product integral against the sum over contractions
///   and orderings, `n ≤ max_n`, on paths in `d = 1` and `d = 3`;
/// * diagonal: martingale part plus Lebesgue part against the diagonal sum,
///   Φ⁴₃ paths at `ε = 1/4`;
/// * renormalization: `nil = ▽ + ◇` per even component, step `h = 10⁻⁴ T`.
pub fn run_identity_suite(seed: u64, sizes: &IdentitySizes) -> Result<IdentityReport> {
    Ok(IdentityReport {
        decomposition: decomposition_suite(seed, sizes)?,
        diagonal: diagonal_suite(seed, sizes)?,
        renormalization: renormalization_suite(seed, sizes)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let a = run_identity_suite(7, &IdentitySizes::quick()).unwrap();
        assert!(a.passed(), "{a}");
        assert_eq!(a.decomposition.cases, 15);
        assert_eq!(a.diagonal.cases, 12);
        assert!(a.renormalization.cases > 0);
        assert_eq!(a, run_identity_suite(7, &IdentitySizes::quick()).unwrap());
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(rel_err(2.0, 2.0, 1.0), 0.0);
        assert!((rel_err(2.0, 2.2, 1.0) - 0.1).abs() < 1e-12);
        assert!((rel_err(0.0, 1e-7, 1.0) - 0.1).abs() < 1e-9);
        assert_eq!(rel_err(0.0, 1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn broken_value_is_reported() {
        let mut s = SuiteResult::new("x", 1e-10);
        s.record(1e-12);
        s.record(f64::NAN);
        assert!(!s.passed());
    }
}
