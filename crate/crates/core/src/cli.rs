//! The `fermi-klein` command line: loads JSON input files, runs a construction or a
//! verification battery and writes a deterministic JSON report.
//!
//! Exit status is 0 when every check passes, 1 when a check fails or the
//! requested construction is mathematically unavailable, 2 on malformed input.

use std::cell::Cell;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded::{GradedAlgebra, DEFAULT_TOLERANCE};
use crate::io::{self, AlgebraSpec, Tolerance};
use crate::klein::klein_battery;
use crate::map::FULL_PAIR_LIMIT;
use crate::product::{build_product, is_symmetric, product_state_n, ProductKind};
use crate::report::{Check, Report};
use crate::structure::{run_counterexample, CounterexampleFixture, COUNTEREXAMPLE_TOLERANCE};

pub const TOLERANCE_ENV: &str = "FERMI_KLEIN_TOLERANCE";

#[derive(Debug, Parser)]
#[command(name = "fermi-klein", version, about = "Graded matrix algebras, Fermi products and the Klein transformation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Numerical tolerance; overrides the input file and FERMI_KLEIN_TOLERANCE.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Seed for randomized probes and states.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of legs; overrides the product file.
    #[arg(long, global = true)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a graded algebra file (or builtin:<name>).
    Check { algebra: String },
    /// Build the Fermi product described by a product file.
    Fermi { product: PathBuf },
    /// Build the ordinary product described by a product file.
    Ordinary { product: PathBuf },
    /// Build the iterated Klein map for a product file and verify it.
    Klein { product: PathBuf },
    /// GNS representation of a state file.
    Gns { state: PathBuf },
    /// Permutation invariance of the n-fold product of a state.
    Symmetric {
        state: PathBuf,
        #[arg(long, default_value = "fermi")]
        kind: ProductKind,
    },
    /// The CAR(2) counterexample battery.
    Counterexample {
        /// Perturb the annihilators by seeded noise of this norm.
        #[arg(long)]
        noise: Option<f64>,
        /// Use commuting legs instead of the Jordan-Wigner pair.
        #[arg(long, conflicts_with = "noise")]
        ordinary: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Fermi { .. } => "fermi",
            Command::Ordinary { .. } => "ordinary",
            Command::Klein { .. } => "klein",
            Command::Gns { .. } => "gns",
            Command::Symmetric { .. } => "symmetric",
            Command::Counterexample { .. } => "counterexample",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

/// Everything a command writes. Field order is the output order.
#[derive(Debug, Serialize)]
pub struct Output {
    pub command: &'static str,
    pub pass: bool,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

impl Output {
    pub fn exit_code(&self) -> u8 {
        match &self.error {
            Some(e) if e.kind == "input" => 2,
            _ if self.pass => 0,
            _ => 1,
        }
    }
}

/// Verification failures and unavailable constructions exit with 1; anything
/// wrong with the input itself exits with 2.
pub fn is_input_error(err: &Error) -> bool {
    !matches!(
        err,
        Error::GradingNotInner { .. }
            | Error::Verification(_)
            | Error::RankDeficient(_)
            | Error::NotEven { .. }
            | Error::ClosureDiverged { .. }
            | Error::GradingNotImplemented(_)
    )
}

fn error_kind(err: &Error) -> &'static str {
    if is_input_error(err) {
        return "input";
    }
    match err {
        Error::GradingNotInner { .. } => "GradingNotInner",
        Error::Verification(_) => "Verification",
        Error::RankDeficient(_) => "RankDeficient",
        Error::NotEven { .. } => "NotEven",
        Error::ClosureDiverged { .. } => "ClosureDiverged",
        _ => "GradingNotImplemented",
    }
}

struct Ctx {
    tol: Tolerance,
    seed: u64,
    n: Option<usize>,
    /// Tolerance the command actually ran with, for the report.
    used: Cell<Option<f64>>,
}

impl Ctx {
    fn note(&self, tolerance: f64) {
        self.used.set(Some(tolerance));
    }
}

/// Outcome of a command body: checks plus a free-form result.
type Body = (Report, serde_json::Value);

/// A failure that still carries the checks gathered so far.
struct Failed {
    error: Error,
    checks: Report,
}

impl From<Error> for Failed {
    fn from(error: Error) -> Self {
        Failed { error, checks: Report::new() }
    }
}

fn json<T: Serialize>(value: T) -> serde_json::Value {
    serde_json::to_value(value).expect("report values serialize")
}

/// Resolves the tolerance fallback from the environment.
pub fn env_tolerance() -> Result<Option<f64>> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t >= 0.0)
            .map(Some)
            .ok_or_else(|| Error::InvalidInput(format!("{TOLERANCE_ENV}={s:?} is not a nonnegative number"))),
        Err(_) => Ok(None),
    }
}

/// Runs one command and returns its report; never panics on bad input.
pub fn run(cmd: &Command, global: &GlobalArgs) -> Output {
    let mut out = Output {
        command: cmd.name(),
        pass: false,
        seed: global.seed,
        tolerance: global.tolerance,
        checks: Vec::new(),
        result: None,
        error: None,
    };
    let fallback = match env_tolerance() {
        Ok(t) => t,
        Err(e) => {
            out.error = Some(ErrorReport { kind: "input", message: e.to_string() });
            return out;
        }
    };
    if let Some(t) = global.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            out.error = Some(ErrorReport { kind: "input", message: format!("tolerance must be nonnegative, got {t}") });
            return out;
        }
    }
    let ctx = Ctx {
        tol: Tolerance { explicit: global.tolerance, fallback: fallback.unwrap_or(DEFAULT_TOLERANCE) },
        seed: global.seed,
        n: global.n,
        used: Cell::new(None),
    };
    let body = match cmd {
        Command::Check { algebra } => cmd_check(&ctx, algebra),
        Command::Fermi { product } => cmd_product(&ctx, product, ProductKind::Fermi),
        Command::Ordinary { product } => cmd_product(&ctx, product, ProductKind::Ordinary),
        Command::Klein { product } => cmd_klein(&ctx, product),
        Command::Gns { state } => cmd_gns(&ctx, state),
        Command::Symmetric { state, kind } => cmd_symmetric(&ctx, state, *kind),
        Command::Counterexample { noise, ordinary } => cmd_counterexample(&ctx, *noise, *ordinary),
    };
    out.tolerance = ctx.used.get().or(global.tolerance);
    match body {
        Ok((report, result)) => {
            out.pass = report.passed() && !report.is_empty();
            out.checks = report.checks;
            out.result = Some(result);
        }
        Err(Failed { error, mut checks }) => {
            if !is_input_error(&error) && checks.passed() {
                checks.push(check_for_error(&error));
            }
            out.checks = checks.checks;
            out.error = Some(ErrorReport { kind: error_kind(&error), message: error.to_string() });
        }
    }
    out
}

/// A failed check standing in for an error that has no report of its own.
fn check_for_error(err: &Error) -> Check {
    match err {
        Error::NotEven { residual } => Check::with_verdict("state_even", *residual, false),
        Error::GradingNotInner { leg } => Check::with_verdict(format!("grading_inner_leg_{leg}"), f64::NAN, false),
        Error::RankDeficient(_) => Check::with_verdict("rank", f64::NAN, false),
        Error::ClosureDiverged { rounds } => Check::with_verdict("closure", *rounds as f64, false),
        _ => Check::with_verdict(error_kind(err), f64::NAN, false),
    }
}

fn load_ref(ctx: &Ctx, reference: &str) -> Result<GradedAlgebra> {
    match reference.strip_prefix(io::BUILTIN_PREFIX) {
        Some(name) => io::builtin(name, ctx.tol),
        None => io::load_algebra(Path::new(reference), ctx.tol),
    }
}

fn cmd_check(ctx: &Ctx, reference: &str) -> std::result::Result<Body, Failed> {
    let alg = load_ref(ctx, reference)?;
    ctx.note(alg.tolerance());
    let report = alg.validate();
    // the even/odd split is only meaningful for a genuine involution
    let split = report.passed().then(|| alg.homogeneous_basis());
    let inner = alg.inner_search();
    let result = serde_json::json!({
        "ambient_dim": alg.ambient_dim(),
        "dim": alg.dim(),
        "even_dim": split.as_ref().map(|hb| hb.even.len()),
        "odd_dim": split.as_ref().map(|hb| hb.odd.len()),
        "grading": alg.grading().kind(),
        "inner": inner.unit.is_some(),
        "inner_residual": inner.residual,
        "commutative": alg.is_commutative(),
    });
    Ok((report, result))
}

fn legs_for(ctx: &Ctx, spec_n: usize) -> usize {
    ctx.n.unwrap_or(spec_n)
}

fn prefixed(report: Report, prefix: &str) -> Report {
    Report {
        checks: report
            .checks
            .into_iter()
            .map(|c| Check { check: format!("{prefix}{}", c.check), ..c })
            .collect(),
    }
}

fn cmd_product(ctx: &Ctx, path: &Path, kind: ProductKind) -> std::result::Result<Body, Failed> {
    let (factor, spec) = io::load_product(path, ctx.tol)?;
    ctx.note(factor.tolerance());
    let n = legs_for(ctx, spec.n);
    let mut report = prefixed(factor.validate(), "factor_");
    if !report.passed() {
        return Err(Failed { error: Error::Verification("factor algebra is invalid".into()), checks: report });
    }
    let product = build_product(vec![Arc::new(factor); n], kind)?;
    report.extend(product.relation_residuals());
    let realized = product.realized();
    let expected: usize = (0..n).map(|k| product.leg_basis(k).len()).product();
    report.push(Check::with_verdict("realized_dimension", realized.dim() as f64, realized.dim() == expected));
    if realized.dim() <= FULL_PAIR_LIMIT {
        report.extend(prefixed(realized.validate(), "realized_"));
    }
    let parities: Vec<i8> = (0..product.words().len()).map(|j| product.word_parity(j).sign()).collect();
    let result = serde_json::json!({
        "kind": kind,
        "legs": n,
        "leg_dims": product.spaces().iter().map(|s| s.dim()).collect::<Vec<_>>(),
        "ambient_dim": product.ambient_dim(),
        "dim": realized.dim(),
        "words": product.words(),
        "word_parities": parities,
        "algebra": json(AlgebraSpec::from_algebra(realized)),
    });
    Ok((report, result))
}

fn cmd_klein(ctx: &Ctx, path: &Path) -> std::result::Result<Body, Failed> {
    let (factor, spec) = io::load_product(path, ctx.tol)?;
    ctx.note(factor.tolerance());
    let n = legs_for(ctx, spec.n);
    let factor = Arc::new(factor);
    let validity = prefixed(factor.validate(), "factor_");
    if !validity.passed() {
        return Err(Failed { error: Error::Verification("factor algebra is invalid".into()), checks: validity });
    }
    let (kmap, report) = match klein_battery(factor.clone(), n, ctx.seed) {
        Ok(done) => done,
        Err(error @ Error::GradingNotInner { leg }) => {
            let mut checks = Report::new();
            checks.push(Check::with_verdict(format!("grading_inner_leg_{leg}"), factor.inner_search().residual, false));
            return Err(Failed { error, checks });
        }
        Err(e) => return Err(e.into()),
    };
    let result = serde_json::json!({
        "legs": n,
        "source_dim": kmap.source().realized().dim(),
        "target_dim": kmap.target().realized().dim(),
        "conditioning": kmap.conditioning(),
    });
    Ok((report, result))
}

fn cmd_gns(ctx: &Ctx, path: &Path) -> std::result::Result<Body, Failed> {
    let state = io::load_state(path, ctx.tol)?;
    ctx.note(state.algebra().tolerance());
    let gns = state.gns()?;
    let report = gns.validate();
    let result = serde_json::json!({
        "algebra_dim": state.algebra().dim(),
        "gns_dim": gns.gns_dim,
        "even": state.is_even(),
        "even_residual": state.even_residual(),
        "covariant": gns.implementing_unitary.is_some(),
        "cyclic": gns.is_cyclic(),
        "central_support": gns.has_central_support(),
        "reconstruction_residual": gns.reconstruction_residual(),
    });
    Ok((report, result))
}

fn cmd_symmetric(ctx: &Ctx, path: &Path, kind: ProductKind) -> std::result::Result<Body, Failed> {
    let state = io::load_state(path, ctx.tol)?;
    ctx.note(state.algebra().tolerance());
    let n = ctx.n.unwrap_or(2);
    let (product, psi) = product_state_n(&state, n, kind)?;
    let sym = is_symmetric(&product, &psi)?;
    let tol = product.realized().tolerance();
    let mut report = Report::new();
    for p in &sym.permutations {
        let name = format!("permutation_{}", p.permutation.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("_"));
        report.push(Check::below(name, p.residual, tol));
    }
    let result = serde_json::json!({
        "legs": n,
        "kind": kind,
        "symmetric": sym.symmetric,
        "permutations": sym.permutations.len(),
    });
    Ok((report, result))
}

fn cmd_counterexample(ctx: &Ctx, noise: Option<f64>, ordinary: bool) -> std::result::Result<Body, Failed> {
    let fixture = match (noise, ordinary) {
        (_, true) => CounterexampleFixture::Ordinary,
        (Some(noise), _) if noise.is_finite() && noise >= 0.0 => CounterexampleFixture::Perturbed { noise, seed: ctx.seed },
        (Some(noise), _) => return Err(Error::InvalidInput(format!("noise must be nonnegative, got {noise}")).into()),
        (None, false) => CounterexampleFixture::JordanWigner,
    };
    // the battery runs at its own fixed tolerance
    ctx.note(COUNTEREXAMPLE_TOLERANCE);
    let report = run_counterexample(fixture)?;
    let result = serde_json::json!({
        "fixture": match fixture {
            CounterexampleFixture::JordanWigner => "jordan-wigner",
            CounterexampleFixture::Ordinary => "ordinary",
            CounterexampleFixture::Perturbed { .. } => "perturbed",
        },
    });
    Ok((report, result))
}

/// Serializes the report to `--out` or stdout.
pub fn emit(output: &Output, out: Option<&Path>) -> Result<()> {
    let text = io::to_json(output)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = run(&cli.command, &cli.global);
    if let Some(err) = &output.error {
        eprintln!("fermi-klein {}: {}", output.command, err.message);
    }
    for c in output.checks.iter().filter(|c| !c.pass) {
        eprintln!("failed check {} (residual {:e})", c.check, c.residual);
    }
    if let Err(e) = emit(&output, cli.global.out.as_deref()) {
        eprintln!("fermi-klein: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(output.exit_code())
}
