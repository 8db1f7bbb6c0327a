//! `jumpchaos`: run the identity, kernel and graph suites and the scaling experiments.
//!
//! Exit codes: 0 when every verdict passes, 1 on a failed verdict, 2 on a
//! configuration or parse error, 3 on an I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use jumpchaos::experiment::{
    fit_exponent, read_records, run_identity_suite, run_kernel_suite, run_scaling, write_fits, write_records,
    write_text, ExperimentConfig, ExperimentError, FitResult, IdentitySizes, KernelSuiteConfig, StatCheck,
};
use jumpchaos::graphs::{
    check_contraction_assumption, contract_graph, exponent_report, nu_gamma, parse_fixture, validate_graph, GraphError,
    PowerCounting,
};
use jumpchaos::model::ModelSymbol;
use jumpchaos::{predictable_bracket, sample_paths, LatticeSpec};

#[derive(Debug, Parser)]
#[command(name = "jumpchaos", version, about = "Lattice jump martingales, chaos identities and diagram scaling checks")]
struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo replicas.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Lattice meshes, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    eps: Option<Vec<f64>>,
    /// Test-function scales, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    lambda: Option<Vec<f64>>,
    /// Wall-clock budget for scaling runs.
    #[arg(long = "budget-ms", global = true)]
    budget_ms: Option<u64>,
    /// Suppress the summaries on standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample path sets and report jump counts and brackets.
    Simulate,
    /// Exact identities between the chaos integrals.
    Identities,
    /// Dyadic, norm and renormalization-constant checks of the singular kernel.
    KernelsCheck,
    /// Parse graph fixtures and print assumption verdicts and exponents.
    GraphCheck {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Monte Carlo moments of the model symbols and their λ-slopes.
    Scaling,
    /// Summarize the records of a results directory.
    Report {
        /// Results directory (defaults to the output directory).
        dir: Option<PathBuf>,
    },
}

/// A verdict did not pass.
#[derive(Debug)]
struct VerdictFailure(String);

impl std::fmt::Display for VerdictFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verdict failed: {}", self.0)
    }
}

impl std::error::Error for VerdictFailure {}

/// The configuration file could not be read or understood.
#[derive(Debug)]
struct ConfigFailure(String);

impl std::fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerdictFailure>().is_some() {
        return 1;
    }
    if err.downcast_ref::<ConfigFailure>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<ExperimentError>() {
        return match e {
            ExperimentError::Io { .. } => 3,
            ExperimentError::Budget { .. } => 1,
            _ => 2,
        };
    }
    if err.downcast_ref::<GraphError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    2
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, text: &str) {
        if !self.quiet {
            println!("{text}");
        }
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Print a summary, save it under `name`, and fail unless `passed`.
    fn finish(&self, name: &str, text: &str, passed: bool, what: &str) -> Result<()> {
        self.say(text.trim_end());
        let mut body = text.to_string();
        if !body.ends_with('\n') {
            body.push('\n');
        }
        write_text(&self.artifact(name), &body)?;
        if passed {
            Ok(())
        } else {
            Err(VerdictFailure(what.to_string()).into())
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
            ExperimentError::Io { path, msg } => anyhow!(ConfigFailure(format!("config {}: {msg}", path.display()))),
            other => anyhow!(other),
        })?,
        None => ExperimentConfig::default(),
    };
    let run = &mut cfg.experiment;
    if let Some(s) = cli.seed {
        run.seed = s;
    }
    if let Some(o) = &cli.out {
        run.out = o.clone();
    }
    if let Some(n) = cli.replicas {
        run.replicas = n;
    }
    if let Some(l) = &cli.lambda {
        run.lambda = l.clone();
    }
    if let Some(b) = cli.budget_ms {
        run.budget_ms = Some(b);
    }
    if let Some(e) = &cli.eps {
        cfg.lattice.eps = e.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `ν` with a typographic minus sign.
fn signed(v: f64) -> String {
    let s = format!("{v}");
    s.strip_prefix('-').map_or(s.clone(), |r| format!("−{r}"))
}

fn simulate(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let seed = cfg.experiment.seed;
    let mut text = String::new();
    let mut passed = true;
    for &eps in &cfg.lattice.eps {
        let lattice = LatticeSpec::new(cfg.lattice.d, eps, cfg.lattice.horizon)?;
        let spec = cfg.martingale_spec(eps)?;
        let path = sample_paths(&lattice, &spec, seed)?;
        let t = lattice.horizon();
        let counts: Vec<f64> =
            (0..lattice.sites()).map(|x| path.jump_count(0.0, t, x).map(|c| c as f64)).collect::<Result<_, _>>()?;
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let check = StatCheck::new(mean, (var / n).sqrt(), spec.site_rate * t, 4.0, counts.len());
        let bracket = (0..lattice.sites()).map(|x| path.realized_bracket(t, x)).sum::<Result<f64, _>>()? / n;
        let predicted = predictable_bracket(&spec, &lattice, t)?;
        passed &= check.passed();
        writeln!(
            text,
            "simulate eps={eps} d={} sites={} horizon={t} seed={seed} events={} jumps_per_site: {check} verdict={}",
            lattice.dim(),
            lattice.sites(),
            path.total_events(),
            if check.passed() { "PASS" } else { "FAIL" }
        )?;
        writeln!(text, "simulate eps={eps} realized_bracket_mean={bracket:.6e} predictable_bracket={predicted:.6e}")?;
    }
    ctx.finish("simulate.txt", &text, passed, "jump counts")
}

fn identities(ctx: &Ctx) -> Result<()> {
    let report = run_identity_suite(ctx.cfg.experiment.seed, &IdentitySizes::default())?;
    ctx.finish("identities.txt", &report.to_string(), report.passed(), "chaos identities")
}

fn kernels_check(ctx: &Ctx, eps_override: bool) -> Result<()> {
    let mut suite = KernelSuiteConfig::default();
    if eps_override {
        suite.eps = ctx.cfg.lattice.eps[0];
        suite.scales.retain(|&e| e >= suite.eps);
    }
    let report = run_kernel_suite(&suite)?;
    ctx.finish("kernels.txt", &report.to_string(), report.passed(), "kernel suite")
}

fn graph_check(ctx: &Ctx, files: &[PathBuf]) -> Result<()> {
    let pc = PowerCounting::PHI43;
    let mut text = String::new();
    let mut passed = true;
    for file in files {
        let body = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
        let fixture = parse_fixture(&body).with_context(|| format!("parsing {}", file.display()))?;
        let validation = validate_graph(&fixture.graph);
        if !validation.passed() {
            passed = false;
            writeln!(text, "{}: structural validation: FAIL", file.display())?;
            for c in validation.failures() {
                writeln!(text, "  {}: FAIL ({})", c.name, c.detail.as_deref().unwrap_or(""))?;
            }
        }
        let cg = match contract_graph(&fixture.graph, &fixture.contraction, &fixture.labeling) {
            Ok(cg) => cg,
            Err(e) if !validation.passed() => {
                writeln!(text, "  contraction unavailable: {e}")?;
                continue;
            }
            Err(e) => return Err(anyhow!(e).context(format!("contracting {}", file.display()))),
        };
        let nu = nu_gamma(&cg, &pc);
        let assumption = check_contraction_assumption(&cg, &pc)?;
        passed &= assumption.passed();
        writeln!(
            text,
            "{}: ν_γ = {}, Assumption: {}",
            file.display(),
            signed(nu),
            if assumption.passed() { "PASS" } else { "FAIL" }
        )?;
        for line in assumption.to_string().lines() {
            writeln!(text, "  {line}")?;
        }
        match exponent_report(&cg, &pc, 2.0) {
            Ok(rep) => {
                for r in &rep.records {
                    let p: Vec<&str> =
                        r.p.values
                            .iter()
                            .map(|v| match v {
                                jumpchaos::chaos::PVal::One => "1",
                                jumpchaos::chaos::PVal::Two => "2",
                                jumpchaos::chaos::PVal::Inf => "∞",
                            })
                            .collect();
                    writeln!(
                        text,
                        "  p=({}) α={} β={} δ={}{}",
                        p.join(","),
                        signed(r.alpha),
                        signed(r.beta),
                        signed(r.delta),
                        if r.infinite { " (L∞ position)" } else { "" }
                    )?;
                }
            }
            Err(e) => writeln!(text, "  exponents unavailable: {e}")?,
        }
    }
    ctx.finish("graph-check.txt", &text, passed, "contraction assumption")
}

fn fits_text(fits: &[FitResult], skipped: &[String]) -> String {
    fits.iter()
        .map(|f| f.to_string())
        .chain(skipped.iter().map(|s| format!("skipped {s}")))
        .collect::<Vec<_>>()
        .join("\n")
}

fn scaling(ctx: &Ctx) -> Result<()> {
    let records_path = ctx.artifact("records.csv");
    let fits_path = ctx.artifact("fits.txt");
    let run = match run_scaling(&ctx.cfg) {
        Ok(run) => run,
        Err(ExperimentError::Budget { budget_ms, run }) => {
            write_records(&records_path, &run.records)?;
            write_fits(&fits_path, &run.fits)?;
            return Err(VerdictFailure(format!(
                "budget of {budget_ms} ms exhausted; {} partial records written to {}",
                run.records.len(),
                records_path.display()
            ))
            .into());
        }
        Err(e) => return Err(e.into()),
    };
    write_records(&records_path, &run.records)?;
    write_fits(&fits_path, &run.fits)?;
    let mut text = String::new();
    for r in &run.records {
        writeln!(
            text,
            "record symbol={} eps={} lambda={} p={} moment={:.6e} stderr={} n={}",
            r.symbol,
            r.eps,
            r.lambda,
            r.p,
            r.moment,
            r.stderr.map_or("n/a".into(), |s| format!("{s:.3e}")),
            r.n_replicas
        )?;
    }
    text.push_str(&fits_text(&run.fits, &run.skipped));
    ctx.say(text.trim_end());
    let passed = run.skipped.is_empty() && run.fits.iter().all(|f| f.passed());
    if passed {
        Ok(())
    } else {
        Err(VerdictFailure("scaling slopes".into()).into())
    }
}

fn report(ctx: &Ctx, dir: &Path) -> Result<()> {
    let records = read_records(&dir.join("records.csv"))?;
    let cfg = &ctx.cfg;
    let mut text = String::new();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    let mut meshes: Vec<f64> = records.iter().map(|r| r.eps).collect();
    meshes.sort_by(f64::total_cmp);
    meshes.dedup();
    let mut orders: Vec<f64> = records.iter().map(|r| r.p).collect();
    orders.sort_by(f64::total_cmp);
    orders.dedup();
    writeln!(text, "report dir={} records={}", dir.display(), records.len())?;
    for &eps in &meshes {
        for symbol in ModelSymbol::ALL {
            for &p in &orders {
                if !records.iter().any(|r| r.symbol == symbol && r.eps == eps && r.p == p) {
                    continue;
                }
                match fit_exponent(&records, symbol, eps, p, cfg.e(eps), cfg.experiment.include_saturation) {
                    Ok(f) => fits.push(f),
                    Err(e) => skipped.push(format!("fit symbol={symbol} eps={eps} p={p}: {e}")),
                }
            }
        }
    }
    text.push_str(&fits_text(&fits, &skipped));
    let passed = skipped.is_empty() && fits.iter().all(|f| f.passed());
    ctx.finish("report.txt", &text, passed, "scaling slopes")
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let ctx = Ctx { out: cfg.experiment.out.clone(), cfg, quiet: cli.quiet };
    match &cli.command {
        Command::Simulate => simulate(&ctx),
        Command::Identities => identities(&ctx),
        Command::KernelsCheck => kernels_check(&ctx, cli.eps.is_some()),
        Command::GraphCheck { files } => graph_check(&ctx, files),
        Command::Scaling => scaling(&ctx),
        Command::Report { dir } => report(&ctx, dir.as_deref().unwrap_or(&ctx.out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
