//! `wcep`: compute generalized inverses, run the verification suites and
//! generate random instances.
//!
//! JSON results go to standard output, human-readable text to standard error.
//! Exit status: 0 on success, 1 on usage, I/O or validation errors, 2 when the
//! requested inverse does not exist or a verification run had failures.

use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use wcep::classic;
use wcep::format::{read_matrix, to_json_string, write_matrix};
use wcep::harness::report::parse_report_lines;
use wcep::harness::{generate_pair, run_suite, GeneratorSpec, Suite, WeightMode};
use wcep::weighted::{self, CoreEpRoute};
use wcep::{CMatrix, InverseCertificate, ToleranceConfig, WeightedPair};

#[derive(Debug, Parser)]
#[command(
    name = "wcep",
    version,
    about = "Weighted core-EP and related generalized inverses"
)]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, global = true, default_value_t = ToleranceConfig::DEFAULT_RANK_RTOL)]
    rank_rtol: f64,
    /// Absolute part of the matrix equality test.
    #[arg(long, global = true, default_value_t = ToleranceConfig::DEFAULT_EQ_ATOL)]
    eq_atol: f64,
    /// Relative part of the matrix equality test.
    #[arg(long, global = true, default_value_t = ToleranceConfig::DEFAULT_EQ_RTOL)]
    eq_rtol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one inverse and print its certificate.
    Compute(ComputeArgs),
    /// Run verification suites and print one JSON report per suite.
    Verify(VerifyArgs),
    /// Generate a random weighted pair with a prescribed index.
    Randgen(RandgenArgs),
    /// Summarize reports produced by `verify`.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    MoorePenrose,
    Group,
    Drazin,
    Core,
    CoreEp,
    OneThree,
    WGdrazin,
    WCore,
    WOneThree,
    WCoreEp,
    Bc,
}

impl Kind {
    fn weighted(self) -> bool {
        matches!(
            self,
            Self::WGdrazin | Self::WCore | Self::WOneThree | Self::WCoreEp
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Direct,
    Gdrazin,
    #[value(name = "13w")]
    OneThreeW,
}

impl From<Route> for CoreEpRoute {
    fn from(r: Route) -> Self {
        match r {
            Route::Direct => CoreEpRoute::Direct,
            Route::Gdrazin => CoreEpRoute::Gdrazin,
            Route::OneThreeW => CoreEpRoute::OneThreeW,
        }
    }
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Input matrix `A` (for `bc`, the matrix `a`).
    #[arg(long)]
    matrix: PathBuf,
    /// Weight `W`; required for the `w-*` kinds.
    #[arg(long)]
    weight: Option<PathBuf>,
    /// Route for `w-core-ep`.
    #[arg(long, value_enum)]
    route: Option<Route>,
    /// `b` for the `bc` kind.
    #[arg(long)]
    b: Option<PathBuf>,
    /// `c` for the `bc` kind.
    #[arg(long)]
    c: Option<PathBuf>,
    /// Where to write the inverse. Without it the value is embedded in the
    /// JSON printed to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite label, or `all`.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Identity,
    RandomInvertible,
    RandomSingular,
}

impl From<Mode> for WeightMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Identity => WeightMode::Identity,
            Mode::RandomInvertible => WeightMode::RandomInvertible,
            Mode::RandomSingular => WeightMode::RandomSingular,
        }
    }
}

#[derive(Debug, Args)]
struct RandgenArgs {
    #[arg(long)]
    n: usize,
    /// Target index of `WA`. Exact for the identity and random-invertible
    /// weight modes.
    #[arg(long)]
    index: usize,
    #[arg(long, value_enum, default_value_t = Mode::RandomInvertible)]
    weight_mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = GeneratorSpec::DEFAULT_CONDITION_CAP)]
    condition_cap: f64,
    /// Output files are `<prefix>A.json` and `<prefix>W.json`.
    #[arg(long, default_value = "")]
    out_prefix: String,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Newline-delimited report JSON; standard input when absent or `-`.
    input: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let tol = ToleranceConfig::new(cli.tol.rank_rtol, cli.tol.eq_atol, cli.tol.eq_rtol)?;
    match cli.command {
        Command::Compute(args) => compute(&args, &tol),
        Command::Verify(args) => verify(&args, &tol),
        Command::Randgen(args) => randgen(&args),
        Command::Report(args) => report(&args),
    }
}

fn load(path: &Path) -> Result<CMatrix> {
    read_matrix(path).with_context(|| format!("reading {}", path.display()))
}

fn compute(args: &ComputeArgs, tol: &ToleranceConfig) -> Result<u8> {
    let kind = args.kind;
    if args.weight.is_some() && !kind.weighted() {
        bail!("--weight only applies to the w-* kinds");
    }
    if args.route.is_some() && kind != Kind::WCoreEp {
        bail!("--route only applies to w-core-ep");
    }
    if (args.b.is_some() || args.c.is_some()) && kind != Kind::Bc {
        bail!("--b and --c only apply to bc");
    }
    let a = load(&args.matrix)?;
    let pair = || -> Result<WeightedPair> {
        let path = args
            .weight
            .as_ref()
            .context("--weight is required for weighted kinds")?;
        Ok(WeightedPair::new(a.clone(), load(path)?)?)
    };
    let cert: InverseCertificate = match kind {
        Kind::MoorePenrose => classic::moore_penrose(&a, tol)?,
        Kind::Group => classic::group(&a, tol)?,
        Kind::Drazin => classic::drazin(&a, tol)?,
        Kind::Core => classic::core(&a, tol)?,
        Kind::CoreEp => classic::core_ep(&a, tol)?,
        Kind::OneThree => classic::one_three(&a, tol)?,
        Kind::WGdrazin => weighted::w_gdrazin(&pair()?, tol)?,
        Kind::WCore => weighted::w_core(&pair()?, tol)?,
        Kind::WOneThree => weighted::w_one_three(&pair()?, tol)?,
        Kind::WCoreEp => {
            weighted::w_core_ep(&pair()?, args.route.unwrap_or(Route::Direct).into(), tol)?
        }
        Kind::Bc => {
            let b = load(args.b.as_ref().context("--b is required for bc")?)?;
            let c = load(args.c.as_ref().context("--c is required for bc")?)?;
            weighted::bc_inverse(&a, &b, &c, tol)?
        }
    };

    let verified = cert.verified(tol);
    let residuals: Map<String, Value> = cert
        .residuals
        .iter()
        .map(|(label, r)| {
            (
                label.clone(),
                json!({"abs": r.abs, "scale": r.scale, "passes": r.passes(tol)}),
            )
        })
        .collect();
    let mut out = json!({
        "kind": cert.kind.name(),
        "exists": cert.exists,
        "verified": verified,
        "worst_residual": cert.worst_residual(),
        "residuals": residuals,
    });
    if cert.exists {
        match &args.out {
            Some(path) => {
                write_matrix(path, &cert.value)
                    .with_context(|| format!("writing {}", path.display()))?;
                out["out"] = json!(path.display().to_string());
            }
            None => out["value"] = serde_json::from_str(&to_json_string(&cert.value)?)?,
        }
    }
    println!("{out}");

    if !cert.exists {
        eprintln!("{}: does not exist for this input", cert.kind);
        return Ok(2);
    }
    if verified {
        eprintln!(
            "{}: certified, worst residual {:.3e}",
            cert.kind,
            cert.worst_residual()
        );
    } else {
        eprintln!(
            "{}: computed, but these checks failed: {}",
            cert.kind,
            cert.failing(tol).join(", ")
        );
    }
    Ok(0)
}

fn verify(args: &VerifyArgs, tol: &ToleranceConfig) -> Result<u8> {
    let suites = Suite::resolve(&args.suite)?;
    let mut failed = 0;
    for suite in &suites {
        let label = if suites.len() == 1 {
            args.suite.as_str()
        } else {
            suite.label()
        };
        let r = run_suite(label, args.trials, args.seed, tol)?;
        println!("{}", r.to_json());
        let status = if r.passed() { "ok" } else { "FAIL" };
        eprintln!(
            "{:<18} {status:<4} failures={} worst={:.2e}",
            r.suite, r.failures, r.worst_residual
        );
        failed += usize::from(!r.passed());
    }
    eprintln!(
        "{} of {} suites passed",
        suites.len() - failed,
        suites.len()
    );
    Ok(if failed == 0 { 0 } else { 2 })
}

fn randgen(args: &RandgenArgs) -> Result<u8> {
    let mut spec = GeneratorSpec::new(args.n, args.index, args.weight_mode.into(), args.seed);
    spec.condition_cap = args.condition_cap;
    let pair = generate_pair(&spec)?;
    let a_path = PathBuf::from(format!("{}A.json", args.out_prefix));
    let w_path = PathBuf::from(format!("{}W.json", args.out_prefix));
    for (path, m) in [(&a_path, &pair.a), (&w_path, &pair.w)] {
        write_matrix(path, m).with_context(|| format!("writing {}", path.display()))?;
    }
    let index_wa = classic::index(&pair.wa(), &ToleranceConfig::default())?;
    println!(
        "{}",
        json!({
            "a": a_path.display().to_string(),
            "w": w_path.display().to_string(),
            "n": args.n,
            "target_index": args.index,
            "index_wa": index_wa,
            "weight_mode": WeightMode::from(args.weight_mode).name(),
            "seed": args.seed,
        })
    );
    eprintln!(
        "wrote {} and {} (ind(WA) = {index_wa})",
        a_path.display(),
        w_path.display()
    );
    Ok(0)
}

fn report(args: &ReportArgs) -> Result<u8> {
    let text = match &args.input {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .context("reading standard input")?;
            s
        }
    };
    let reports = parse_report_lines(&text)?;
    if reports.is_empty() {
        bail!("no reports in input");
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.suite.as_str())
        .collect();
    let trials: usize = reports.iter().map(|r| r.trials).sum();
    let worst = reports.iter().map(|r| r.worst_residual).fold(0.0, f64::max);
    for r in &reports {
        eprintln!(
            "{:<18} trials={:<5} failures={:<4} worst={:.2e}",
            r.suite, r.trials, r.failures, r.worst_residual
        );
        if !r.passed() {
            eprintln!("    {}", r.notes);
        }
    }
    println!(
        "{}",
        json!({
            "suites": reports.len(),
            "trials": trials,
            "failed": failed,
            "worst_residual": worst,
            "passed": failed.is_empty(),
        })
    );
    Ok(if failed.is_empty() { 0 } else { 2 })
}
