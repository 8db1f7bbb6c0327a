//! Statistical checks of the driving noise: jump rates and the Wiener limit
//! of the lattice pairing.

use std::f64::consts::PI;
use std::fmt;

use super::Result;
use crate::model::parallel_map;
use crate::noise::{sample_paths, LatticeSpec, MartingaleSpec};
use crate::rng::derive_seed;

/// A sample estimate compared with its target at `threshold` standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub threshold: f64,
    pub samples: usize,
}

impl StatCheck {
    pub fn new(estimate: f64, stderr: f64, target: f64, threshold: f64, samples: usize) -> Self {
        Self { estimate, stderr, target, threshold, samples }
    }

    /// Distance to the target in standard errors.
    pub fn z(&self) -> f64 {
        if self.stderr > 0.0 {
            (self.estimate - self.target).abs() / self.stderr
        } else if self.estimate == self.target {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn passed(&self) -> bool {
        self.z() <= self.threshold
    }
}

impl fmt::Display for StatCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "estimate={:.6} target={:.6} se={:.3e} z={:.2} n={}",
            self.estimate,
            self.target,
            self.stderr,
            self.z(),
            self.samples
        )
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Jump counts of the Φ⁴₃ noise on `[0, ε² t)` against their mean `2t`.
///
/// At least `site_samples` site-counts are drawn, from whole independent paths.
pub fn jump_rate_check(eps: f64, t: f64, site_samples: usize, seed: u64) -> Result<StatCheck> {
    let horizon = eps * eps * t;
    let lattice = LatticeSpec::new(3, eps, horizon)?;
    let spec = MartingaleSpec::phi43(eps);
    let paths = site_samples.div_ceil(lattice.sites()).max(1);
    let counts = parallel_map(
        paths,
        || (),
        |_, i| -> Result<Vec<f64>> {
            let p = sample_paths(&lattice, &spec, derive_seed(seed, i as u64))?;
            (0..lattice.sites()).map(|x| Ok(p.jump_count(0.0, horizon, x)? as f64)).collect()
        },
    );
    let mut all = Vec::with_capacity(paths * lattice.sites());
    for c in counts {
        all.extend(c?);
    }
    let (mean, se) = mean_and_se(&all);
    // site_rate = 2ε⁻², so the expected count is exactly 2t.
    Ok(StatCheck::new(mean, se, 2.0 * t, 4.0, all.len()))
}

/// Variance of `ε³ Σ_x φ(x) 𝕄(t, x)` against `t ε³ Σ_x φ(x)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerCheck {
    pub eps: f64,
    pub t: f64,
    pub variance: StatCheck,
}

impl WienerCheck {
    /// Sample variance over its target; close to 1 for every `ε`.
    pub fn normalized(&self) -> f64 {
        self.variance.estimate / self.variance.target
    }
}

/// The fixed spatial test function of [`wiener_check`].
pub fn wiener_test_function(x: [f64; 3]) -> f64 {
    (2.0 * PI * x[0]).cos() + 0.5 * (2.0 * PI * x[1]).sin() * (2.0 * PI * x[2]).cos() + 0.25
}

/// Sample `n` paths of the Φ⁴₃ noise and check the variance of the lattice pairing at time `t`.
///
/// The standard error of the sample variance is `sqrt((m₄ - s⁴) / n)`.
pub fn wiener_check(eps: f64, t: f64, n: usize, seed: u64) -> Result<WienerCheck> {
    let lattice = LatticeSpec::new(3, eps, t)?;
    let spec = MartingaleSpec::phi43(eps);
    let vol = lattice.cell_volume();
    let phi: Vec<f64> = (0..lattice.sites())
        .map(|s| {
            let c = lattice.coords(s);
            wiener_test_function([c[0] as f64 * eps, c[1] as f64 * eps, c[2] as f64 * eps])
        })
        .collect();
    let samples = parallel_map(
        n,
        || (),
        |_, i| -> Result<f64> {
            let p = sample_paths(&lattice, &spec, derive_seed(seed, i as u64))?;
            let mut acc = 0.0;
            for (x, w) in phi.iter().enumerate() {
                acc += w * p.evaluate(t, x)?;
            }
            Ok(vol * acc)
        },
    );
    let xs = samples.into_iter().collect::<Result<Vec<f64>>>()?;
    let nf = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let se = ((m4 - var * var).max(0.0) / nf).sqrt();
    let target = t * vol * spec.bracket_density * phi.iter().map(|v| v * v).sum::<f64>();
    Ok(WienerCheck { eps, t, variance: StatCheck::new(var, se, target, 4.0, xs.len()) })
}
