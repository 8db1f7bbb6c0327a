//! Experiment configuration: a TOML document with sections
//! `[lattice] [martingale] [kernels] [experiment]`. Every key is optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::model::{ModelParams, ModelSymbol};
use crate::noise::{LatticeSpec, MartingaleSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub d: usize,
    /// Lattice meshes, each `1/n`.
    pub eps: Vec<f64>,
    /// Horizon for path statistics.
    pub horizon: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self { d: 3, eps: vec![0.125], horizon: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartingaleSection {
    /// `symmetric` or `one_sided`.
    pub model: String,
    pub k: f64,
    pub c: f64,
    pub bracket_density: f64,
}

impl Default for MartingaleSection {
    fn default() -> Self {
        Self { model: "symmetric".into(), k: -0.5, c: std::f64::consts::FRAC_1_SQRT_2, bracket_density: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// `𝔢 = ε^alpha`.
    pub alpha: f64,
    /// Time nodes per `ε²`.
    pub substeps: usize,
    /// Reporting parameter for homogeneities.
    pub kappa: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self { alpha: 0.75, substeps: 2, kappa: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub symbols: Vec<String>,
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    /// Midpoint step for compensator drift integrals.
    pub h: f64,
    pub out: PathBuf,
    /// Wall-clock budget for a scaling run.
    pub budget_ms: Option<u64>,
    /// Replicas evaluated between budget checks.
    pub chunk: usize,
    /// Write the measured `wall_ms`; when false the column is 0 and output is byte-reproducible.
    pub record_wall_time: bool,
    /// Also fit saturation-regime points (diagnostic only).
    pub include_saturation: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            symbols: ModelSymbol::ALL.iter().map(|s| s.name().to_string()).collect(),
            lambda: vec![0.5, 0.25, 0.125],
            p: vec![2.0],
            replicas: 2000,
            seed: 1,
            h: 1e-3,
            out: PathBuf::from("results"),
            budget_ms: None,
            chunk: 200,
            record_wall_time: true,
            include_saturation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSection,
    pub martingale: MartingaleSection,
    pub kernels: KernelSection,
    pub experiment: RunSection,
}

fn is_dyadic(v: f64) -> bool {
    v > 0.0 && v <= 1.0 && {
        let l = -v.log2();
        (l - l.round()).abs() < 1e-12
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            ExperimentError::Parse(m) => ExperimentError::Parse(format!("{}: {m}", path.display())),
            ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.lattice.eps.is_empty() {
            return bad("at least one lattice mesh is required".into());
        }
        for &e in &self.lattice.eps {
            let n = (1.0 / e).round();
            if !(e > 0.0 && (n * e - 1.0).abs() < 1e-12) {
                return bad(format!("mesh {e} is not of the form 1/n"));
            }
            self.martingale_spec(e)?;
        }
        if !(self.kernels.alpha > 0.0 && self.kernels.alpha <= 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1]", self.kernels.alpha));
        }
        if self.kernels.substeps == 0 {
            return bad("substeps must be positive".into());
        }
        self.symbols()?;
        for &l in &self.experiment.lambda {
            if !is_dyadic(l) {
                return bad(format!("λ = {l} is not a dyadic scale 2^-j"));
            }
        }
        for &p in &self.experiment.p {
            if !(p >= 1.0) {
                return bad(format!("moment order p = {p} must be at least 1"));
            }
        }
        if self.experiment.replicas == 0 || self.experiment.chunk == 0 {
            return bad("replicas and chunk must be positive".into());
        }
        if !(self.experiment.h > 0.0) {
            return bad(format!("quadrature step h = {} must be positive", self.experiment.h));
        }
        if !(self.lattice.horizon > 0.0) {
            return bad(format!("horizon {} must be positive", self.lattice.horizon));
        }
        Ok(())
    }

    pub fn symbols(&self) -> Result<Vec<ModelSymbol>> {
        self.experiment.symbols.iter().map(|s| s.parse().map_err(ExperimentError::from)).collect()
    }

    /// Regularization scale `𝔢 = ε^α`.
    pub fn e(&self, eps: f64) -> f64 {
        eps.powf(self.kernels.alpha)
    }

    pub fn martingale_spec(&self, eps: f64) -> Result<MartingaleSpec> {
        let m = &self.martingale;
        let d = self.lattice.d;
        let spec = match m.model.as_str() {
            "symmetric" => MartingaleSpec::symmetric(m.k, m.c, m.bracket_density, d, eps),
            "one_sided" => MartingaleSpec::one_sided(m.k, m.c, m.bracket_density, d, eps),
            other => return Err(ExperimentError::Config(format!("unknown martingale model '{other}'"))),
        };
        spec.validate(&LatticeSpec::new(d, eps, self.lattice.horizon)?)?;
        Ok(spec)
    }

    /// Grid parameters for the model at mesh `eps`.
    pub fn model_params(&self, eps: f64) -> Result<ModelParams> {
        if self.lattice.d != 3 {
            return Err(ExperimentError::Config(format!("the model needs d = 3, got {}", self.lattice.d)));
        }
        let symbols = self.symbols()?;
        let mut p = ModelParams::new(eps, self.e(eps));
        p.substeps = self.kernels.substeps;
        p.lambda_max = self.experiment.lambda.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        p.cubic = symbols.contains(&ModelSymbol::IPsi3Psi2);
        p.spec = self.martingale_spec(eps)?;
        Ok(p)
    }
}
