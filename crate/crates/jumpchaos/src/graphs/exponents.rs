//! Power counting: `ν_γ`, `δ_γ(𝐩)`, admissible exponent functions and the
//! predicted right-hand side of the moment bound (with unit constants).

use super::{ContractedGraph, GraphError, Result};
use crate::chaos::{exponent_alpha, exponent_beta, Label, PFunction, PVal};

/// Default `κ` for terms with `𝐩⁻¹(∞) ≠ ∅`.
pub const DEFAULT_KAPPA: f64 = 0.01;

/// Largest number of components for exponent enumeration.
const MAX_COMPONENTS: usize = 8;

/// Dimension `d` and martingale scaling exponent `𝐤`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCounting {
    pub d: usize,
    pub k: f64,
}

impl PowerCounting {
    pub const PHI43: PowerCounting = PowerCounting { d: 3, k: -0.5 };

    /// `|𝔰| = d + 2`.
    pub fn scaling_dimension(&self) -> f64 {
        self.d as f64 + 2.0
    }
}

/// `ν_γ = |𝔰| |V̂_⋆̄ ∖ {v̂↑}| − (|𝔰|/2)|Γ| − Σ_Ê â_e`.
pub fn nu_gamma(cg: &ContractedGraph, pc: &PowerCounting) -> f64 {
    let s = pc.scaling_dimension();
    let inner = (cg.vertices().len() - 2) as f64;
    let a: f64 = cg.edges().iter().map(|e| e.a).sum();
    s * inner - s / 2.0 * cg.gamma().len() as f64 - a
}

/// `δ_γ(𝐩) = (|𝔰|/2)(2|𝐩⁻¹(∞)∖Γ| + |𝐩⁻¹(∞)∩Γ| + |𝐩⁻¹(2)∖Γ|)`, with `𝐩` indexed by component.
pub fn delta_gamma(cg: &ContractedGraph, p: &PFunction, pc: &PowerCounting) -> Result<f64> {
    check_arity(cg, p)?;
    let mut units = 0.0;
    for (c, v) in p.values.iter().enumerate() {
        let g = cg.component_in_gamma(c);
        units += match (v, g) {
            (PVal::Inf, false) => 2.0,
            (PVal::Inf, true) => 1.0,
            (PVal::Two, false) => 1.0,
            _ => 0.0,
        };
    }
    Ok(pc.scaling_dimension() / 2.0 * units)
}

fn check_arity(cg: &ContractedGraph, p: &PFunction) -> Result<()> {
    let m = cg.contraction().len();
    if p.m() != m {
        return Err(GraphError::Contract(format!("𝐩 has {} entries for {m} components", p.m())));
    }
    Ok(())
}

/// All `𝐩` with `𝐩⁻¹(1) ∩ Γ = ∅` and `L⁻¹(▽) ⊂ 𝐩⁻¹(1)`, split into those with
/// `𝐩⁻¹(∞) = ∅` and the rest.
pub fn admissible_p_functions(cg: &ContractedGraph) -> Result<(Vec<PFunction>, Vec<PFunction>)> {
    let m = cg.contraction().len();
    if m > MAX_COMPONENTS {
        return Err(GraphError::Guard(format!("{m} components exceed the limit {MAX_COMPONENTS}")));
    }
    let labels = cg.labeling();
    let ok = |p: &PFunction| {
        (0..m).all(|c| {
            let one = p.values[c] == PVal::One;
            !(one && cg.component_in_gamma(c)) && (labels.get(c) != Label::Down || one)
        })
    };
    Ok(PFunction::all(m).into_iter().filter(ok).partition(|p| !p.values.contains(&PVal::Inf)))
}

/// Exponents for one admissible `𝐩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PRecord {
    pub p: PFunction,
    pub alpha: f64,
    /// `β` for the requested moment, with components in contracted-vertex order.
    pub beta: f64,
    pub delta: f64,
    pub infinite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub nu: f64,
    pub records: Vec<PRecord>,
}

pub fn exponent_report(cg: &ContractedGraph, pc: &PowerCounting, moment: f64) -> Result<ExponentReport> {
    let (finite, infinite) = admissible_p_functions(cg)?;
    let sizes = cg.contraction().sizes();
    let mut records = Vec::new();
    for (p, inf) in finite.into_iter().map(|p| (p, false)).chain(infinite.into_iter().map(|p| (p, true))) {
        records.push(PRecord {
            alpha: exponent_alpha(cg.contraction(), &p, pc.d, pc.k)?,
            beta: exponent_beta(&sizes, &p, moment)?,
            delta: delta_gamma(cg, &p, pc)?,
            infinite: inf,
            p,
        });
    }
    Ok(ExponentReport { nu: nu_gamma(cg, pc), records })
}

/// `Σ_𝐩 (λ ∨ 𝔢)^{ν_γ} ε^{α_γ(𝐩) − κ 1[𝐩⁻¹(∞) ≠ ∅]} 𝔢^{−δ_γ(𝐩)}`; requires `ν_γ < 0`.
pub fn predicted_bound(
    cg: &ContractedGraph,
    pc: &PowerCounting,
    lambda: f64,
    eps: f64,
    e: f64,
    kappa: f64,
) -> Result<f64> {
    let nu = nu_gamma(cg, pc);
    if nu >= 0.0 {
        return Err(GraphError::Hypothesis(format!("ν_γ = {nu} is not negative")));
    }
    let report = exponent_report(cg, pc, 2.0)?;
    let scale = lambda.max(e).powf(nu);
    Ok(report
        .records
        .iter()
        .map(|r| {
            let alpha = if r.infinite { r.alpha - kappa } else { r.alpha };
            scale * eps.powf(alpha) * e.powf(-r.delta)
        })
        .sum())
}
