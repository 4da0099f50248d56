//! Command-line interface for the INAR(1) toolkit.
//!
//! Six subcommands cover the workflow end to end: `simulate` emits a plain
//! series, `fit` / `test-dispersion` / `lr-test` analyze an observed series,
//! `mc-study` runs a bias/MSE replication study from a JSON config, and
//! `disp-table` prints the stationary Fisher-index grid. Every analysis
//! report is JSON with floats at 17 significant digits and an embedded run
//! manifest whose timestamp is the only field that varies between reruns.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/model error.

mod io;
mod report;

pub use io::{read_series, write_series_plain};
pub use report::{dispersion_table_latex, mc_result_latex, to_json_string, RunManifest};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use inar::{
    cls_fit_dp, cls_fit_gp, cls_fit_poisson, cml_fit_with, dispersion_table,
    equidispersion_test_from_stats, lr_test, run_mc_study, sample_stats, yw_alpha, yw_fit_dp,
    yw_fit_gp, yw_fit_poisson, CmlOptions, CountSeries, Direction, DispersionTable, Family,
    FitResult, Inar1Model, InnovationSpec, McConfig, McResult, Method, NormalizationMode,
    StationaryMoments, TestReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

/// Master seed used when neither `--seed` nor the environment gives one, so
/// default invocations are reproducible.
pub const DEFAULT_SEED: u64 = 0xD1CE_5EED;

/// Environment variable overriding the default seed (base-10 u64).
pub const SEED_ENV_VAR: &str = "INAR_SEED";

/// A subcommand failure, split by exit code: usage errors (1) are mistakes
/// in the invocation itself, data errors (2) are problems with the inputs or
/// the model they describe.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<inar::Error> for CliError {
    fn from(err: inar::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code. `--help`/`--version` print and return 0.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::TestDispersion(args) => cmd_test_dispersion(args),
        Command::LrTest(args) => cmd_lr_test(args),
        Command::McStudy(args) => cmd_mc_study(args),
        Command::DispTable(args) => cmd_disp_table(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

#[derive(Parser)]
#[command(
    name = "inar",
    version,
    about = "INAR(1) count time series: simulation, estimation, dispersion testing, Monte Carlo studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an INAR(1) path (plain series, one count per line)
    Simulate(SimulateArgs),
    /// Fit INAR(1) models to an observed series
    Fit(FitArgs),
    /// Equidispersion test against the Poisson INAR(1) null
    TestDispersion(TestDispersionArgs),
    /// Likelihood-ratio test of the Poisson null against a dispersed family
    LrTest(LrTestArgs),
    /// Bias/MSE Monte Carlo study driven by a JSON config file
    McStudy(McStudyArgs),
    /// Stationary Fisher-index table over an (alpha, phi) grid
    DispTable(DispTableArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Poisson,
    #[value(alias = "dp")]
    DoublePoisson,
    #[value(alias = "gp")]
    GenPoisson,
}

impl FamilyArg {
    fn family(self) -> Family {
        match self {
            FamilyArg::Poisson => Family::Poisson,
            FamilyArg::DoublePoisson => Family::DoublePoisson,
            FamilyArg::GenPoisson => Family::GenPoisson,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DispersedFamilyArg {
    #[value(alias = "dp")]
    DoublePoisson,
    #[value(alias = "gp")]
    GenPoisson,
}

impl DispersedFamilyArg {
    fn family(self) -> Family {
        match self {
            DispersedFamilyArg::DoublePoisson => Family::DoublePoisson,
            DispersedFamilyArg::GenPoisson => Family::GenPoisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Yw,
    Cls,
    Cml,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Over,
    Under,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Approximate,
    ExactSum,
}

impl NormalizationArg {
    fn mode(self) -> NormalizationMode {
        match self {
            NormalizationArg::Approximate => NormalizationMode::Approximate,
            NormalizationArg::ExactSum => NormalizationMode::exact_sum_default(),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Innovation family
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Thinning parameter in [0, 1)
    #[arg(long)]
    alpha: f64,
    /// Innovation location parameter (> 0)
    #[arg(long)]
    mu: f64,
    /// Dispersion parameter (double-poisson: > 0; gen-poisson: |phi| < 1)
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Number of observations to emit (at least 2)
    #[arg(long)]
    length: usize,
    /// Transitions discarded before recording starts
    #[arg(long, default_value_t = 500)]
    burn_in: usize,
    /// RNG seed (default: INAR_SEED, then a fixed built-in constant)
    #[arg(long)]
    seed: Option<u64>,
    /// Write the series here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Series file (plain text: one count per line, blanks ignored)
    #[arg(long)]
    input: PathBuf,
    /// Treat the input as CSV and read this column (header name, or 0-based
    /// index into headerless rows)
    #[arg(long)]
    csv_column: Option<String>,
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Estimation method; `all` runs YW, CLS and CML
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Double-Poisson normalization used in likelihood evaluations
    #[arg(long, value_enum, default_value_t = NormalizationArg::Approximate)]
    normalization: NormalizationArg,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TestDispersionArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    csv_column: Option<String>,
    /// Test level
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Alternative hypothesis
    #[arg(long, value_enum, default_value_t = DirectionArg::Over)]
    direction: DirectionArg,
    /// Plug-in thinning estimate (default: Yule-Walker from the series)
    #[arg(long)]
    alpha_hat: Option<f64>,
    /// Compare the raw Fisher index against the cutoffs instead of FI - 1
    #[arg(long)]
    uncentered: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LrTestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    csv_column: Option<String>,
    /// Alternative family fitted (by CML) against the Poisson null
    #[arg(long, value_enum)]
    alt_family: DispersedFamilyArg,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Approximate)]
    normalization: NormalizationArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct McStudyArgs {
    /// JSON study configuration (an McConfig document)
    #[arg(long)]
    config: PathBuf,
    /// Emit the bias/(MSE) grid as a LaTeX tabular instead of JSON
    #[arg(long)]
    latex_table: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DispTableArgs {
    /// Innovation family of the table (the Poisson grid is identically 1)
    #[arg(long, value_enum)]
    family: DispersedFamilyArg,
    /// Comma-separated thinning parameters
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    /// Comma-separated dispersion parameters (negative values are valid for
    /// the gen-poisson family)
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    phis: Vec<f64>,
    /// Emit a LaTeX tabular instead of JSON
    #[arg(long)]
    latex_table: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Seed resolution: `--seed` flag, then the environment, then the constant.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{SEED_ENV_VAR} must be a base-10 unsigned 64-bit integer, got '{raw}'"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(err) => Err(CliError::Data(format!("cannot read {SEED_ENV_VAR}: {err}"))),
    }
}

fn innovation_spec(family: Family, mu: f64, phi: Option<f64>) -> Result<InnovationSpec, CliError> {
    match (family, phi) {
        (Family::Poisson, None) => Ok(InnovationSpec::poisson(mu)?),
        (Family::Poisson, Some(_)) => Err(CliError::Usage(
            "--phi is not accepted for the poisson family".to_string(),
        )),
        (Family::DoublePoisson, Some(phi)) => Ok(InnovationSpec::double_poisson(mu, phi)?),
        (Family::GenPoisson, Some(phi)) => Ok(InnovationSpec::gen_poisson(mu, phi)?),
        (family, None) => Err(CliError::Usage(format!(
            "--phi is required for the {family} family"
        ))),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|err| CliError::Data(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.length < 2 {
        return Err(CliError::Usage("--length must be at least 2".to_string()));
    }
    let seed = resolve_seed(args.seed)?;
    let spec = innovation_spec(args.family.family(), args.mu, args.phi)?;
    let model = Inar1Model::new(args.alpha, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = inar::simulate(&model, args.length, args.burn_in, &mut rng)?;
    match &args.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(|err| {
                CliError::Data(format!("cannot create {}: {err}", path.display()))
            })?;
            write_series_plain(std::io::BufWriter::new(file), &series)
                .map_err(|err| CliError::Data(format!("cannot write {}: {err}", path.display())))
        }
        None => write_series_plain(std::io::stdout().lock(), &series)
            .map_err(|err| CliError::Data(format!("cannot write series: {err}"))),
    }
}

#[derive(Serialize)]
struct Estimates {
    alpha: f64,
    mu: f64,
    phi: Option<f64>,
}

#[derive(Serialize)]
struct FitBlock {
    method: Method,
    family: Family,
    estimates: Estimates,
    /// Aligned with the family's parameter order (alpha, mu[, phi]); null
    /// when the method carries no error theory or the information matrix was
    /// not invertible.
    std_errors: Option<Vec<f64>>,
    loglik: Option<f64>,
    aic: Option<f64>,
    bic: Option<f64>,
    converged: bool,
    warnings: Vec<String>,
    /// Stationary moments implied by the fitted parameters; null when an
    /// estimate leaves the parameter domain.
    implied: Option<StationaryMoments>,
}

#[derive(Serialize)]
struct SampleBlock {
    length: usize,
    mean: f64,
    variance: f64,
    fisher_index: f64,
    acf_lag1: f64,
}

impl SampleBlock {
    fn new(series: &CountSeries) -> Result<Self, CliError> {
        let stats = sample_stats(series, 1)?;
        Ok(SampleBlock {
            length: series.len(),
            mean: stats.mean,
            variance: stats.variance,
            fisher_index: stats.fisher_index,
            acf_lag1: stats.acf[0],
        })
    }
}

#[derive(Serialize)]
struct FitReport {
    sample: SampleBlock,
    fits: Vec<FitBlock>,
    manifest: RunManifest,
}

fn implied_stats(fit: &FitResult, mode: NormalizationMode) -> Option<StationaryMoments> {
    let spec = match fit.family {
        Family::Poisson => InnovationSpec::poisson(fit.mu),
        Family::DoublePoisson => InnovationSpec::double_poisson(fit.mu, fit.phi?),
        Family::GenPoisson => InnovationSpec::gen_poisson(fit.mu, fit.phi?),
    }
    .ok()?;
    let model = Inar1Model::with_mode(fit.alpha, spec, mode).ok()?;
    Some(inar::stationary_moments(&model))
}

fn fit_block(fit: FitResult, mode: NormalizationMode) -> FitBlock {
    let implied = implied_stats(&fit, mode);
    FitBlock {
        method: fit.method,
        family: fit.family,
        estimates: Estimates {
            alpha: fit.alpha,
            mu: fit.mu,
            phi: fit.phi,
        },
        std_errors: fit.std_errors,
        loglik: fit.loglik,
        aic: fit.aic,
        bic: fit.bic,
        converged: fit.converged,
        warnings: fit.warnings,
        implied,
    }
}

fn fit_series(
    series: &CountSeries,
    family: Family,
    method: Method,
    mode: NormalizationMode,
) -> Result<FitResult, CliError> {
    Ok(match (method, family) {
        (Method::Yw, Family::Poisson) => yw_fit_poisson(series)?,
        (Method::Yw, Family::DoublePoisson) => yw_fit_dp(series)?,
        (Method::Yw, Family::GenPoisson) => yw_fit_gp(series)?,
        (Method::Cls, Family::Poisson) => cls_fit_poisson(series)?,
        (Method::Cls, Family::DoublePoisson) => cls_fit_dp(series)?,
        (Method::Cls, Family::GenPoisson) => cls_fit_gp(series, None)?,
        (Method::Cml, _) => cml_fit_with(
            series,
            family,
            &CmlOptions {
                mode,
                ..CmlOptions::default()
            },
        )?,
    })
}

fn method_arg_name(method: MethodArg) -> &'static str {
    match method {
        MethodArg::Yw => "yw",
        MethodArg::Cls => "cls",
        MethodArg::Cml => "cml",
        MethodArg::All => "all",
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let series = read_series(&args.input, args.csv_column.as_deref())?;
    let family = args.family.family();
    let mode = args.normalization.mode();
    let methods = match args.method {
        MethodArg::Yw => vec![Method::Yw],
        MethodArg::Cls => vec![Method::Cls],
        MethodArg::Cml => vec![Method::Cml],
        MethodArg::All => vec![Method::Yw, Method::Cls, Method::Cml],
    };
    let sample = SampleBlock::new(&series)?;
    let mut fits = Vec::with_capacity(methods.len());
    for method in methods {
        fits.push(fit_block(fit_series(&series, family, method, mode)?, mode));
    }
    let manifest = RunManifest::new(
        "fit",
        json!({
            "input": args.input.display().to_string(),
            "csv_column": args.csv_column,
            "family": family,
            "method": method_arg_name(args.method),
            "normalization": mode,
        }),
        None,
    );
    let report = FitReport {
        sample,
        fits,
        manifest,
    };
    emit(&to_json_string(&report), args.output.as_deref())
}

#[derive(Serialize)]
struct DispersionReport {
    sample: SampleBlock,
    alpha_hat: f64,
    test: TestReport,
    manifest: RunManifest,
}

fn cmd_test_dispersion(args: TestDispersionArgs) -> Result<(), CliError> {
    if !(args.beta > 0.0 && args.beta < 1.0) {
        return Err(CliError::Usage(format!(
            "--beta must lie strictly between 0 and 1, got {}",
            args.beta
        )));
    }
    if let Some(alpha_hat) = args.alpha_hat {
        if !(0.0..1.0).contains(&alpha_hat) {
            return Err(CliError::Usage(format!(
                "--alpha-hat must lie in [0, 1), got {alpha_hat}"
            )));
        }
    }
    let series = read_series(&args.input, args.csv_column.as_deref())?;
    let sample = SampleBlock::new(&series)?;
    let alpha_hat = match args.alpha_hat {
        Some(alpha) => alpha,
        None => yw_alpha(&series)?,
    };
    let direction = match args.direction {
        DirectionArg::Over => Direction::Over,
        DirectionArg::Under => Direction::Under,
    };
    let test = equidispersion_test_from_stats(
        sample.fisher_index,
        alpha_hat,
        series.len(),
        args.beta,
        direction,
        !args.uncentered,
    )?;
    let manifest = RunManifest::new(
        "test-dispersion",
        json!({
            "input": args.input.display().to_string(),
            "csv_column": args.csv_column,
            "beta": args.beta,
            "direction": direction,
            "alpha_hat_override": args.alpha_hat,
            "uncentered": args.uncentered,
        }),
        None,
    );
    let report = DispersionReport {
        sample,
        alpha_hat,
        test,
        manifest,
    };
    emit(&to_json_string(&report), args.output.as_deref())
}

#[derive(Serialize)]
struct LrReport {
    sample: SampleBlock,
    null: FitBlock,
    alt: FitBlock,
    test: TestReport,
    manifest: RunManifest,
}

fn cmd_lr_test(args: LrTestArgs) -> Result<(), CliError> {
    let series = read_series(&args.input, args.csv_column.as_deref())?;
    let sample = SampleBlock::new(&series)?;
    let mode = args.normalization.mode();
    let opts = CmlOptions {
        mode,
        ..CmlOptions::default()
    };
    let alt_family = args.alt_family.family();
    let null_fit = cml_fit_with(&series, Family::Poisson, &opts)?;
    let alt_fit = cml_fit_with(&series, alt_family, &opts)?;
    let l0 = null_fit
        .loglik
        .ok_or_else(|| CliError::Data("null fit reported no log-likelihood".to_string()))?;
    let l1 = alt_fit
        .loglik
        .ok_or_else(|| CliError::Data("alternative fit reported no log-likelihood".to_string()))?;
    let df = (alt_family.param_count() - Family::Poisson.param_count()) as u32;
    let test = lr_test(l0, l1, df)?;
    let manifest = RunManifest::new(
        "lr-test",
        json!({
            "input": args.input.display().to_string(),
            "csv_column": args.csv_column,
            "null_family": Family::Poisson,
            "alt_family": alt_family,
            "normalization": mode,
        }),
        None,
    );
    let report = LrReport {
        sample,
        null: fit_block(null_fit, mode),
        alt: fit_block(alt_fit, mode),
        test,
        manifest,
    };
    emit(&to_json_string(&report), args.output.as_deref())
}

#[derive(Serialize)]
struct McReport {
    result: McResult,
    manifest: RunManifest,
}

fn cmd_mc_study(args: McStudyArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|err| CliError::Data(format!("cannot read {}: {err}", args.config.display())))?;
    let config: McConfig = serde_json::from_str(&text)
        .map_err(|err| CliError::Data(format!("{}: {err}", args.config.display())))?;
    let result = run_mc_study(&config)?;
    if args.latex_table {
        return emit(&mc_result_latex(&result), args.output.as_deref());
    }
    let master_seed = config.master_seed;
    let manifest = RunManifest::new(
        "mc-study",
        serde_json::to_value(&config).expect("McConfig serializes"),
        Some(master_seed),
    );
    let report = McReport { result, manifest };
    emit(&to_json_string(&report), args.output.as_deref())
}

#[derive(Serialize)]
struct TableReport {
    table: DispersionTable,
    manifest: RunManifest,
}

fn cmd_disp_table(args: DispTableArgs) -> Result<(), CliError> {
    let family = args.family.family();
    let table = dispersion_table(family, &args.alphas, &args.phis)?;
    if args.latex_table {
        return emit(&dispersion_table_latex(&table), args.output.as_deref());
    }
    let manifest = RunManifest::new(
        "disp-table",
        json!({
            "family": family,
            "alphas": args.alphas,
            "phis": args.phis,
        }),
        None,
    );
    let report = TableReport { table, manifest };
    emit(&to_json_string(&report), args.output.as_deref())
}
