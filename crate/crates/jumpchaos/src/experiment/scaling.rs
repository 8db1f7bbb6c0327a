//! Replica runs of the model pairings and their moment estimates.

use std::time::Instant;

use super::{fit_exponent, ExperimentConfig, ExperimentError, FitResult, Result};
use crate::model::{Engine, ModelGrid, ModelSymbol};

/// One `(symbol, ε, λ, p)` moment estimate `E_p = E[|X|^p]^{1/p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub symbol: ModelSymbol,
    pub eps: f64,
    pub lambda: f64,
    pub p: f64,
    pub moment: f64,
    /// Delta-method standard error; `None` for a single replica.
    pub stderr: Option<f64>,
    pub n_replicas: usize,
    pub seed: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalingRun {
    pub records: Vec<ScalingRecord>,
    pub fits: Vec<FitResult>,
    /// Fits that could not be formed, with the reason.
    pub skipped: Vec<String>,
}

/// `E_p` from samples and its standard error `se(m_p) / (p m_p^{1 - 1/p})`.
pub fn moment_estimate(samples: &[f64], p: f64) -> (f64, Option<f64>) {
    let n = samples.len();
    if n == 0 {
        return (0.0, None);
    }
    let powers: Vec<f64> = samples.iter().map(|x| x.abs().powf(p)).collect();
    let mp = powers.iter().sum::<f64>() / n as f64;
    let moment = mp.powf(1.0 / p);
    if n < 2 {
        return (moment, None);
    }
    let var = powers.iter().map(|v| (v - mp).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se_mp = (var / n as f64).sqrt();
    let se = if mp > 0.0 { se_mp / (p * mp.powf(1.0 - 1.0 / p)) } else { 0.0 };
    (moment, Some(se))
}

/// Run every configured `(symbol, ε, λ, p)` and fit the λ-slopes.
///
/// Replicas are processed in chunks; when the budget runs out the records so
/// far are returned inside [`ExperimentError::Budget`].
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<ScalingRun> {
    cfg.validate()?;
    let symbols = cfg.symbols()?;
    let run_cfg = &cfg.experiment;
    let start = Instant::now();
    let over_budget = || run_cfg.budget_ms.is_some_and(|b| start.elapsed().as_millis() as u64 >= b);
    let mut run = ScalingRun::default();
    let mut exhausted = false;
    for &eps in &cfg.lattice.eps {
        let t0 = Instant::now();
        let grid = ModelGrid::new(cfg.model_params(eps)?)?;
        let engine = Engine::new(&grid, &symbols, &run_cfg.lambda)?;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(run_cfg.replicas);
        while rows.len() < run_cfg.replicas {
            if over_budget() {
                exhausted = true;
                break;
            }
            let n = run_cfg.chunk.min(run_cfg.replicas - rows.len());
            rows.extend(engine.run(run_cfg.seed, rows.len(), n)?);
        }
        let wall_ms = if run_cfg.record_wall_time { t0.elapsed().as_millis() as u64 } else { 0 };
        if !rows.is_empty() {
            for (j, col) in engine.columns().iter().enumerate() {
                let samples: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                for &p in &run_cfg.p {
                    let (moment, stderr) = moment_estimate(&samples, p);
                    run.records.push(ScalingRecord {
                        symbol: col.symbol,
                        eps,
                        lambda: col.lambda,
                        p,
                        moment,
                        stderr,
                        n_replicas: samples.len(),
                        seed: run_cfg.seed,
                        wall_ms,
                    });
                }
            }
        }
        if exhausted {
            break;
        }
        for &symbol in &symbols {
            for &p in &run_cfg.p {
                match fit_exponent(&run.records, symbol, eps, p, cfg.e(eps), run_cfg.include_saturation) {
                    Ok(f) => run.fits.push(f),
                    Err(e) => run.skipped.push(format!("fit symbol={symbol} eps={eps} p={p}: {e}")),
                }
            }
        }
    }
    if exhausted {
        return Err(ExperimentError::Budget { budget_ms: run_cfg.budget_ms.unwrap_or(0), run: Box::new(run) });
    }
    Ok(run)
}
