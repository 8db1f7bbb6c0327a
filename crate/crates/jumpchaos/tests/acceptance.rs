//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! The process exits 0 regardless of verdicts so that `cargo test` reports the
//! rest of the suite; set `ACCEPTANCE_STRICT=1` to make any FAIL fatal.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use jumpchaos::chaos::{admissible_for_moment_bound, contractions, exponent_alpha, Contraction, PFunction, PVal};
use jumpchaos::experiment::{
    fit_exponent, jump_rate_check, moment_estimate, run_identity_suite, run_kernel_suite, run_scaling, wiener_check,
    ExperimentConfig, IdentitySizes, KernelSuiteConfig, ScalingRecord,
};
use jumpchaos::graphs::{check_contraction_assumption, contract_graph, nu_gamma, parse_fixture, PowerCounting};
use jumpchaos::model::{CherryDiagram, Engine, ModelGrid, ModelParams, ModelSymbol};

struct Verdict {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn criterion(
    id: usize,
    name: &'static str,
    limit_s: u64,
    f: impl FnOnce() -> Result<(bool, String), String>,
) -> Verdict {
    let start = Instant::now();
    let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_s);
    let v = Verdict { id, name, passed: ok && elapsed <= limit, detail, elapsed, limit };
    println!(
        "{} {:>2} {}: {} [{:.1}s of {}s]",
        if v.passed { "PASS" } else { "FAIL" },
        v.id,
        v.name,
        v.detail,
        v.elapsed.as_secs_f64(),
        v.limit.as_secs()
    );
    v
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn only(sizes: IdentitySizes, which: usize) -> IdentitySizes {
    IdentitySizes {
        seeds: if which == 0 { sizes.seeds } else { 0 },
        diag_seeds: if which == 1 { sizes.diag_seeds } else { 0 },
        split_seeds: if which == 2 { sizes.split_seeds } else { 0 },
        ..sizes
    }
}

fn identity(which: usize) -> Result<(bool, String), String> {
    let r = run_identity_suite(20260101, &only(IdentitySizes::default(), which)).map_err(e)?;
    let s = r.suites()[which].clone();
    Ok((
        s.passed() && s.cases > 0,
        format!("cases={} max_rel={:.3e} tolerance={:.0e}", s.cases, s.max_rel, s.tolerance),
    ))
}

fn jump_rates() -> Result<(bool, String), String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, eps) in [0.25, 0.125].into_iter().enumerate() {
        for t in [1.0, 2.0] {
            let c = jump_rate_check(eps, t, 1000, 400 + i as u64 * 10 + t as u64).map_err(e)?;
            ok &= c.passed() && c.samples >= 1000;
            parts.push(format!(
                "eps={eps} t={t}: mean={:.4} target={} z={:.2} n={}",
                c.estimate,
                c.target,
                c.z(),
                c.samples
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn wiener() -> Result<(bool, String), String> {
    let a = wiener_check(0.25, 1.0, 2000, 501).map_err(e)?;
    let b = wiener_check(0.125, 1.0, 2000, 502).map_err(e)?;
    let ratio = a.normalized() / b.normalized();
    let ok = a.variance.passed() && b.variance.passed() && (ratio - 1.0).abs() <= 0.1;
    Ok((
        ok,
        format!(
            "eps=1/4 var={:.5} target={:.5} z={:.2}; eps=1/8 var={:.5} target={:.5} z={:.2}; normalized ratio={:.4} (within 0.1 of 1)",
            a.variance.estimate,
            a.variance.target,
            a.variance.z(),
            b.variance.estimate,
            b.variance.target,
            b.variance.z(),
            ratio
        ),
    ))
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn graphs() -> Result<(bool, String), String> {
    let pc = PowerCounting::PHI43;
    let mut ok = true;
    let mut parts = Vec::new();
    // (fixture, expected ν if passing, whether item 1 must fail)
    let cases: [(&str, Option<f64>, bool); 4] =
        [("psi", Some(-0.5), false), ("psi2", Some(-1.0), false), ("cherry", None, true), ("g_chain", None, true)];
    for (name, nu_expected, item1_fails) in cases {
        let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.graph"))).map_err(e)?;
        let f = parse_fixture(&text).map_err(e)?;
        let cg = contract_graph(&f.graph, &f.contraction, &f.labeling).map_err(e)?;
        let nu = nu_gamma(&cg, &pc);
        let rep = check_contraction_assumption(&cg, &pc).map_err(e)?;
        let good = match nu_expected {
            Some(v) => rep.passed() && (nu - v).abs() < 1e-12,
            None => item1_fails && !rep.item(1).passed,
        };
        ok &= good;
        parts.push(format!(
            "{name}: ν={nu} assumption={} item1={}",
            if rep.passed() { "PASS" } else { "FAIL" },
            if rep.item(1).passed { "PASS" } else { "FAIL" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn exponents() -> Result<(bool, String), String> {
    let (d, k) = (3usize, -0.5);
    let dk = d as f64 + k;
    let mut ok = true;
    for n in 1..=8usize {
        let g = Contraction::full(n);
        let nf = n as f64;
        for (v, want) in [(PVal::One, dk * (nf - 2.0)), (PVal::Two, dk * (nf - 1.0)), (PVal::Inf, dk * nf)] {
            ok &= (exponent_alpha(&g, &PFunction::new(vec![v]), d, k).map_err(e)? - want).abs() < 1e-12;
        }
    }
    let mut checked = 0usize;
    let mut violations = 0usize;
    for n in 1..=7 {
        for g in contractions(n).map_err(e)? {
            if g.len() > 4 {
                continue;
            }
            let sizes = g.sizes();
            let big = sizes.iter().any(|&s| s >= 3);
            for p in admissible_for_moment_bound(&sizes) {
                if p.preimage(PVal::Inf).is_empty() && !big {
                    continue;
                }
                checked += 1;
                if exponent_alpha(&g, &p, d, k).map_err(e)? < dk - 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    ok &= violations == 0 && checked > 0;
    Ok((
        ok,
        format!(
            "base cases n=1..8 reproduced={ok}; α ≥ d+k on {checked} (γ, p) pairs with m ≤ 4, violations={violations}"
        ),
    ))
}

fn kernels() -> Result<(bool, String), String> {
    let r = run_kernel_suite(&KernelSuiteConfig { with_c2: false, ..KernelSuiteConfig::default() }).map_err(e)?;
    let parts: Vec<String> = r
        .verdicts()
        .iter()
        .map(|v| format!("{}={:.3e}/{}", v.name, v.value, if v.passed { "ok" } else { "FAIL" }))
        .collect();
    let c1: Vec<String> =
        r.scales.iter().map(|s| format!("C1(e={})={:.5e}±{:.1e}", s.e, s.c1_fine.value, s.c1.error)).collect();
    Ok((r.passed(), format!("{}; {}", parts.join(" "), c1.join(" "))))
}

fn slopes() -> Result<(bool, String), String> {
    let eps = 0.125;
    let mut cfg = ExperimentConfig::default();
    cfg.lattice.eps = vec![eps];
    cfg.kernels.alpha = 0.75;
    cfg.experiment.lambda = vec![0.5, 0.25, 0.125];
    cfg.experiment.p = vec![2.0];
    cfg.experiment.seed = 90;
    cfg.experiment.record_wall_time = false;
    let mut records: Vec<ScalingRecord> = Vec::new();
    // The cubic symbol runs at a reduced budget.
    for (symbols, n) in [(vec!["Xi", "Psi", "Psi2"], 2000), (vec!["IPsi3Psi2"], 500)] {
        cfg.experiment.symbols = symbols.into_iter().map(String::from).collect();
        cfg.experiment.replicas = n;
        records.extend(run_scaling(&cfg).map_err(e)?.records);
    }
    let e_reg = cfg.e(eps);
    let mut ok = true;
    let mut parts = Vec::new();
    for symbol in ModelSymbol::ALL {
        let diag = fit_exponent(&records, symbol, eps, 2.0, e_reg, true).map_err(e)?;
        match fit_exponent(&records, symbol, eps, 2.0, e_reg, false) {
            Ok(f) => {
                ok &= f.passed();
                parts.push(format!("{symbol}: slope={:.3} target={} ±{}", f.slope, f.target, f.tolerance));
            }
            Err(err) => {
                ok = false;
                parts.push(format!(
                    "{symbol}: no scaling-regime fit ({err}); all-points slope={:.3} target={} ±{}",
                    diag.slope, diag.target, diag.tolerance
                ));
            }
        }
    }
    let moments: Vec<String> = records.iter().map(|r| format!("{}@{}={:.4e}", r.symbol, r.lambda, r.moment)).collect();
    Ok((
        ok,
        format!("e={e_reg:.4}, scaling regime λ ≥ {:.4}; {}; E2: {}", 2.0 * e_reg, parts.join("; "), moments.join(" ")),
    ))
}

fn cherry() -> Result<(bool, String), String> {
    let mut est = Vec::new();
    for (eps, n) in [(0.125, 400), (0.0625, 200)] {
        let mut p = ModelParams::new(eps, f64::powf(eps, 0.75));
        p.cubic = false;
        let grid = ModelGrid::new(p).map_err(e)?;
        let phi = grid.test_function(0.5).map_err(e)?;
        let d = CherryDiagram::new(&grid, &phi).map_err(e)?;
        let xs = d.run(1000 + n as u64, n).map_err(e)?;
        let (m, se) = moment_estimate(&xs, 2.0);
        let exact = (d.exact_variance() + d.exact_mean().powi(2)).sqrt();
        est.push((eps, m, se.unwrap_or(0.0), exact));
    }
    let (_, m8, s8, x8) = est[0];
    let (_, m16, s16, x16) = est[1];
    let ratio = m16 / m8;
    let se = ratio * ((s16 / m16).powi(2) + (s8 / m8).powi(2)).sqrt();
    Ok((
        ratio + 2.0 * se < 0.9,
        format!(
            "E2(1/8)={m8:.4e}±{s8:.1e} (exact {x8:.4e}), E2(1/16)={m16:.4e}±{s16:.1e} (exact {x16:.4e}), ratio={ratio:.3}±{se:.3}, need ratio+2se < 0.9"
        ),
    ))
}

fn centering() -> Result<(bool, String), String> {
    let eps = 0.125;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, e_reg) in [0.25, 0.125].into_iter().enumerate() {
        let mut p = ModelParams::new(eps, e_reg);
        p.cubic = false;
        let grid = ModelGrid::new(p).map_err(e)?;
        let engine = Engine::new(&grid, &[ModelSymbol::Psi2], &[0.5]).map_err(e)?;
        let xs: Vec<f64> = engine.run(1100 + i as u64, 0, 2000).map_err(e)?.into_iter().map(|r| r[0]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let mass = grid.discretize(&grid.test_function(0.5).map_err(e)?).map_err(e)?.mass();
        // Without the counterterm the pairing is shifted by C₁ times the test mass.
        let raw = mean + grid.c1().value * mass;
        let z = mean.abs() / se;
        let z_raw = raw.abs() / se;
        ok &= z <= 4.0;
        if e_reg == 0.125 {
            ok &= z_raw > 10.0;
        }
        parts.push(format!(
            "e={e_reg}: mean={mean:.3e} se={se:.2e} z={z:.2}; unrenormalized mean={raw:.4e} z={z_raw:.0}"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn main() {
    let start = Instant::now();
    let verdicts = vec![
        criterion(1, "exact chaos decomposition", 30, || identity(0)),
        criterion(2, "diagonal identities", 10, || identity(1)),
        criterion(3, "renormalization split", 10, || identity(2)),
        criterion(4, "jump-rate law", 20, jump_rates),
        criterion(5, "Wiener-limit covariance", 60, wiener),
        criterion(6, "graph verdicts", 1, graphs),
        criterion(7, "exponent algebra", 5, exponents),
        criterion(8, "kernel suite", 120, kernels),
        criterion(9, "scaling slopes", 1800, slopes),
        criterion(10, "vanishing contraction", 600, cherry),
        criterion(11, "renormalization centering", 300, centering),
    ];
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s{}",
        verdicts.len() - failed.len(),
        verdicts.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
    );
    if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") && !failed.is_empty() {
        std::process::exit(1);
    }
}
