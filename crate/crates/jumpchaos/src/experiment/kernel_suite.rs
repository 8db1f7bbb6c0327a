//! Measurements on the singular kernel over a grid of regularization scales:
//! dyadic reconstruction, per-level derivative constants, the weighted norm,
//! and the renormalization constants with their step-doubling errors.

use std::fmt;
use std::sync::Arc;

use super::Result;
use crate::kernels::{
    build_singular_kernel, dyadic_decompose, kernel_norm, renorm_constant_c1, renorm_constant_c2, Cutoff, Estimate,
    TorusKernel,
};
use crate::noise::{LatticeMollifier, LatticeSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSuiteConfig {
    pub eps: f64,
    /// Regularization scales, coarse to fine.
    pub scales: Vec<f64>,
    /// Time substeps for the kernel measurements and the coarser C₁.
    pub substeps: usize,
    /// Substeps of the refined C₁ (usually twice `substeps`).
    pub fine_substeps: usize,
    /// Compute C₂ as well (the expensive part of the suite).
    pub with_c2: bool,
}

impl Default for KernelSuiteConfig {
    fn default() -> Self {
        Self { eps: 1.0 / 16.0, scales: vec![0.25, 0.125, 1.0 / 16.0], substeps: 4, fine_substeps: 8, with_c2: true }
    }
}

/// Measurements at one regularization scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleReport {
    pub e: f64,
    pub levels: usize,
    pub reconstruction_error: f64,
    /// Level constants of the dyadic bound at `a = 3`, `q = 0`.
    pub level_constants: Vec<f64>,
    pub supports_ok: bool,
    /// `kernel_norm(K^ε, 3, 0, 𝔢)`.
    pub norm: f64,
    pub c1: Estimate,
    pub c1_fine: Estimate,
    pub c2: Option<Estimate>,
}

impl ScaleReport {
    pub fn level_spread(&self) -> f64 {
        spread(&self.level_constants)
    }

    /// Refined C₁ is within the error estimate of the coarser one.
    pub fn c1_consistent(&self) -> bool {
        (self.c1_fine.value - self.c1.value).abs() <= self.c1.error
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSuiteReport {
    pub eps: f64,
    pub scales: Vec<ScaleReport>,
}

/// One named verdict of the kernel suite.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVerdict {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl KernelSuiteReport {
    pub fn max_reconstruction_error(&self) -> f64 {
        self.scales.iter().map(|s| s.reconstruction_error).fold(0.0, f64::max)
    }

    pub fn max_level_spread(&self) -> f64 {
        self.scales.iter().map(|s| s.level_spread()).fold(0.0, f64::max)
    }

    pub fn norm_variation(&self) -> f64 {
        spread(&self.scales.iter().map(|s| s.norm).collect::<Vec<_>>())
    }

    /// C₁ (refined) strictly increases as `𝔢` decreases.
    pub fn c1_increasing(&self) -> bool {
        let mut s: Vec<&ScaleReport> = self.scales.iter().collect();
        s.sort_by(|a, b| b.e.total_cmp(&a.e));
        s.windows(2).all(|w| w[1].c1_fine.value > w[0].c1_fine.value)
    }

    pub fn verdicts(&self) -> Vec<KernelVerdict> {
        let v = |name, value: f64, threshold: f64, passed| KernelVerdict { name, value, threshold, passed };
        let rec = self.max_reconstruction_error();
        let spread = self.max_level_spread();
        let norms = self.norm_variation();
        let consistent = self.scales.iter().filter(|s| !s.c1_consistent()).count();
        vec![
            v("dyadic-reconstruction", rec, 1e-8, rec <= 1e-8),
            v(
                "level-supports",
                self.scales.iter().filter(|s| !s.supports_ok).count() as f64,
                0.0,
                self.scales.iter().all(|s| s.supports_ok),
            ),
            v("level-constant-spread", spread, 4.0, spread <= 4.0),
            v("norm-variation", norms, 2.0, norms <= 2.0),
            v("c1-step-halving", consistent as f64, 0.0, consistent == 0),
            v("c1-increasing", f64::from(u8::from(self.c1_increasing())), 1.0, self.c1_increasing()),
        ]
    }

    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|v| v.passed)
    }
}

impl fmt::Display for KernelSuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.scales {
            write!(
                f,
                "kernel eps={} e={} levels={} reconstruction={:.3e} level_spread={:.3} norm={:.6e} C1={:.6e} C1_err={:.2e} C1_fine={:.6e}",
                self.eps,
                s.e,
                s.levels,
                s.reconstruction_error,
                s.level_spread(),
                s.norm,
                s.c1.value,
                s.c1.error,
                s.c1_fine.value
            )?;
            if let Some(c2) = s.c2 {
                write!(f, " C2={:.6e} C2_err={:.2e}", c2.value, c2.error)?;
            }
            writeln!(f)?;
        }
        for (i, v) in self.verdicts().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "check {} value={:.4e} threshold={} verdict={}",
                v.name,
                v.value,
                v.threshold,
                if v.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Mollified torus kernel `K^𝔢` at the given substeps.
fn mollified(eps: f64, e: f64, substeps: usize) -> Result<TorusKernel> {
    let side = (1.0 / eps).round() as usize;
    let moll = LatticeMollifier::new(&LatticeSpec::new(3, eps, 1.0)?, e)?;
    let (k, _) = build_singular_kernel(eps, e, Cutoff::Standard, substeps)?;
    Ok(TorusKernel::from_kernel(&k, side).mollify(&moll)?)
}

pub fn run_kernel_suite(cfg: &KernelSuiteConfig) -> Result<KernelSuiteReport> {
    let mut scales = Vec::with_capacity(cfg.scales.len());
    for &e in &cfg.scales {
        let (k, _) = build_singular_kernel(cfg.eps, e, Cutoff::Standard, cfg.substeps)?;
        let k = Arc::new(k);
        let stack = dyadic_decompose(k.clone(), e);
        let reports = stack.reports(3.0, 0);
        let norm = kernel_norm(k.as_ref(), 3.0, 0, e);
        let torus = mollified(cfg.eps, e, cfg.substeps)?;
        let c1 = renorm_constant_c1(&torus);
        let c2 = if cfg.with_c2 { Some(renorm_constant_c2(&torus)?) } else { None };
        let c1_fine = renorm_constant_c1(&mollified(cfg.eps, e, cfg.fine_substeps)?);
        scales.push(ScaleReport {
            e,
            levels: stack.levels().len(),
            reconstruction_error: stack.reconstruction_error(),
            level_constants: reports.iter().map(|r| r.constant).collect(),
            supports_ok: reports.iter().all(|r| r.support_ok()),
            norm,
            c1,
            c1_fine,
            c2,
        });
    }
    Ok(KernelSuiteReport { eps: cfg.eps, scales })
}
