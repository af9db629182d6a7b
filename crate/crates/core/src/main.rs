//! `occam` command-line entry point.
//!
//! Exit status: 0 on success, 2 on invalid input or flags, 1 on internal or
//! output errors. Diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use occam_hammer::bounds::classifier_bound_report;
use occam_hammer::io::{
    self, emit, float_table_csv, parse_complexity_prior_csv, parse_knots_csv, parse_pvalue_csv,
    parse_size_prior_csv, to_json_string, AdjustReport, Format,
};
use occam_hammer::multitest::{bh_baseline, by_baseline, step_up, weighted_bonferroni};
use occam_hammer::priors::{ComplexityPrior, ContinuousPrior, SizePrior};
use occam_hammer::sharpness::{self, Marginal, SharpnessConfig};
use occam_hammer::simulate::{
    equispaced_errors, estimate_fdr, validate_classifier_coverage, validate_constant_volume,
    validate_hammer_joint, BuiltinRule, ClassifierRule, Dependence, FdrProcedure, McEstimate,
    ScenarioSpec, DEFAULT_SEED,
};
use occam_hammer::{Error, Result};

#[derive(Parser)]
#[command(name = "occam", version, about = "Prior-weighted step-up testing, classifier bounds and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a step-up procedure on a p-value CSV
    Adjust(AdjustArgs),
    /// Estimate the false discovery rate of a procedure by simulation
    SimulateFdr(SimulateArgs),
    /// Evaluate the randomized-classifier error bound
    ClassifierBound(ClassifierArgs),
    /// Simulate the tightness construction on a discretized circle
    Sharpness(SharpnessArgs),
    /// Monte Carlo check of one of the expected-rate or coverage guarantees
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AdjustProcedure {
    Hammer,
    By,
    Bh,
    Bonferroni,
}

#[derive(Args)]
struct AdjustArgs {
    /// CSV with header hypothesis_id,p_value[,weight][,is_null]
    #[arg(long)]
    input: PathBuf,
    /// Target level in [0, 1]
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "hammer")]
    procedure: AdjustProcedure,
    /// by | uniform | dirac:A | custom:FILE (index,weight)
    #[arg(long, default_value = "by")]
    size_prior: String,
    /// uniform | column (weight column of the input) | custom:FILE (hypothesis_id,weight)
    #[arg(long, default_value = "uniform")]
    complexity_prior: String,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Output file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ScenarioArgs {
    /// JSON scenario file; explicit flags override its values
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Number of hypotheses
    #[arg(long)]
    m: Option<usize>,
    /// Number of true nulls
    #[arg(long)]
    m0: Option<usize>,
    /// Mean shift of the alternatives
    #[arg(long)]
    effect: Option<f64>,
    /// Equicorrelation of the test statistics (0 = independent)
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn resolve(&self, defaults: ScenarioSpec) -> Result<ScenarioSpec> {
        let mut spec = match &self.scenario {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::InputFile {
                    path: path.display().to_string(),
                    source,
                })?;
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    line: e.line(),
                    msg: e.to_string(),
                })?
            }
            None => defaults,
        };
        if let Some(m) = self.m {
            spec.m = m;
        }
        if let Some(m0) = self.m0 {
            spec.m0 = m0;
        }
        if let Some(effect) = self.effect {
            spec.effect = effect;
        }
        if let Some(rho) = self.rho {
            spec.dependence = if rho == 0.0 {
                Dependence::Independent
            } else {
                Dependence::Equicorrelated { rho }
            };
        }
        if let Some(trials) = self.trials {
            spec.trials = trials;
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SimProcedure {
    Hammer,
    Bh,
    By,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "hammer")]
    procedure: SimProcedure,
    /// by | uniform | dirac:A | custom:FILE (hammer only)
    #[arg(long, default_value = "by")]
    size_prior: String,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifierArgs {
    /// Sample size
    #[arg(long)]
    n: u64,
    #[arg(long)]
    delta: f64,
    /// Output density at the drawn classifier
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Empirical error of the drawn classifier
    #[arg(long)]
    emp_error: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SharpnessArgs {
    #[arg(long, default_value_t = 0.2)]
    alpha0: f64,
    /// uniform01 | power:N | table:FILE (x,cdf knots)
    #[arg(long, default_value = "uniform01")]
    nu: String,
    #[arg(long, default_value_t = 100_000)]
    grid_n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Per-trial rows (u, set_size, fpr, degenerate) for plotting
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Check {
    ConstantVolume,
    HammerJoint,
    Classifier,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    check: Check,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Confidence budget (default 0.1 for constant-volume, 0.05 otherwise)
    #[arg(long)]
    delta: Option<f64>,
    /// Output size for constant-volume
    #[arg(long, default_value_t = 5)]
    a: usize,
    /// Density rule for hammer-joint: topk-uniform | topk:A | below:T | softmax:TEMP
    #[arg(long, default_value = "topk-uniform")]
    rule: String,
    /// by | uniform | dirac:A | custom:FILE | power:N | uniform01 (hammer-joint)
    #[arg(long, default_value = "by")]
    size_prior: String,
    /// Sample size for the classifier check
    #[arg(long, default_value_t = 100)]
    n: u64,
    /// Number of classifiers for the classifier check
    #[arg(long, default_value_t = 50)]
    classifiers: usize,
    #[arg(long, default_value_t = 0.1)]
    err_lo: f64,
    #[arg(long, default_value_t = 0.5)]
    err_hi: f64,
    /// softmax | uniform
    #[arg(long, default_value = "softmax")]
    classifier_rule: String,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Acceptance margin, in standard errors, for Monte Carlo checks.
const SIGMAS: f64 = 3.0;

fn bad_flag(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn parse_size_prior(spec: &str, m: usize) -> Result<SizePrior<f64>> {
    match spec.split_once(':') {
        None if spec == "by" => SizePrior::benjamini_yekutieli(m),
        None if spec == "uniform" => SizePrior::uniform(m),
        Some(("dirac", a)) => {
            let a = a
                .parse()
                .map_err(|_| bad_flag(format!("bad dirac size {a:?}")))?;
            SizePrior::dirac(a, m)
        }
        Some(("custom", file)) => parse_size_prior_csv(Path::new(file), m),
        _ => Err(bad_flag(format!(
            "unknown size prior {spec:?} (by | uniform | dirac:A | custom:FILE)"
        ))),
    }
}

fn parse_nu(spec: &str) -> Result<ContinuousPrior<f64>> {
    match spec.split_once(':') {
        None if spec == "uniform01" => Ok(ContinuousPrior::uniform01()),
        Some(("power", n)) => ContinuousPrior::power(
            n.parse()
                .map_err(|_| bad_flag(format!("bad power parameter {n:?}")))?,
        ),
        Some(("table", file)) => ContinuousPrior::density_table(&parse_knots_csv(Path::new(file))?),
        _ => Err(bad_flag(format!(
            "unknown prior {spec:?} (uniform01 | power:N | table:FILE)"
        ))),
    }
}

fn parse_rule(spec: &str) -> Result<BuiltinRule> {
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| bad_flag(format!("bad rule parameter {s:?}")))
    };
    match spec.split_once(':') {
        None if spec == "topk-uniform" => Ok(BuiltinRule::TopKUniform),
        Some(("topk", a)) => Ok(BuiltinRule::TopKFixed(
            a.parse()
                .map_err(|_| bad_flag(format!("bad rule parameter {a:?}")))?,
        )),
        Some(("below", t)) => Ok(BuiltinRule::TopKBelow(num(t)?)),
        Some(("softmax", t)) if num(t)? > 0.0 => Ok(BuiltinRule::Softmax(num(t)?)),
        _ => Err(bad_flag(format!(
            "unknown rule {spec:?} (topk-uniform | topk:A | below:T | softmax:TEMP)"
        ))),
    }
}

fn run_adjust(args: &AdjustArgs) -> Result<()> {
    let (pool, column_prior) = parse_pvalue_csv(&args.input)?;
    let m = pool.len();
    let (pi, pi_spec) = match args.complexity_prior.split_once(':') {
        None if args.complexity_prior == "uniform" => (ComplexityPrior::uniform(m)?, "uniform".to_string()),
        None if args.complexity_prior == "column" => (
            column_prior.ok_or_else(|| bad_flag("--complexity-prior column needs a weight column".into()))?,
            "column".to_string(),
        ),
        Some(("custom", file)) => (
            parse_complexity_prior_csv(Path::new(file), &pool)?,
            format!("custom:{file}"),
        ),
        _ => {
            return Err(bad_flag(format!(
                "unknown complexity prior {:?} (uniform | column | custom:FILE)",
                args.complexity_prior
            )))
        }
    };
    let (result, size_spec) = match args.procedure {
        AdjustProcedure::Hammer => {
            let gamma = parse_size_prior(&args.size_prior, m)?;
            (step_up(&pool, &pi, &gamma, args.alpha)?, gamma.describe())
        }
        AdjustProcedure::By => {
            let kappa = occam_hammer::priors::harmonic::<f64>(m);
            (by_baseline(&pool, args.alpha)?, format!("by(kappa={})", io::format_sig(kappa)))
        }
        AdjustProcedure::Bh => (bh_baseline(&pool, args.alpha)?, "bh(kappa=1)".to_string()),
        AdjustProcedure::Bonferroni => (weighted_bonferroni(&pool, &pi, args.alpha)?, "dirac(1)".to_string()),
    };
    let report = AdjustReport::new(&result, &pool, size_spec, pi_spec);
    emit(&report.render(args.format.into())?, args.output.as_deref())
}

#[derive(Serialize)]
struct SimulationReport {
    procedure: &'static str,
    alpha: f64,
    size_prior: String,
    scenario: ScenarioSpec,
    /// π(H₀)·α for the hammer procedure, α for the baselines.
    bound: f64,
    estimate: McEstimate,
    within_bound: bool,
}

fn estimate_csv(label: &str, bound: f64, est: &McEstimate) -> Result<String> {
    let body = float_table_csv(
        &["trials", "value", "std_error", "bound", "seed"],
        [vec![est.trials as f64, est.value, est.std_error, bound, est.seed as f64]],
    )?;
    Ok(format!("# {label}\n{body}"))
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = args
        .scenario
        .resolve(ScenarioSpec::new(100, 80, 3.0, Dependence::Independent, 10_000, DEFAULT_SEED))?;
    let (procedure, name, size_spec, bound) = match args.procedure {
        SimProcedure::Hammer => {
            let pi = ComplexityPrior::uniform(spec.m)?;
            let gamma = parse_size_prior(&args.size_prior, spec.m)?;
            let desc = gamma.describe();
            let null_mass = pi.mass(0..spec.m0);
            (FdrProcedure::Hammer { pi, gamma }, "hammer", desc, null_mass * args.alpha)
        }
        SimProcedure::Bh => (FdrProcedure::BenjaminiHochberg, "bh", "bh(kappa=1)".into(), args.alpha),
        SimProcedure::By => (FdrProcedure::BenjaminiYekutieli, "by", "by".into(), args.alpha),
    };
    let estimate = estimate_fdr(&procedure, &spec, args.alpha)?;
    let text = match args.format {
        OutputFormat::Json => to_json_string(&SimulationReport {
            procedure: name,
            alpha: args.alpha,
            size_prior: size_spec,
            scenario: spec,
            bound,
            within_bound: estimate.within(bound, SIGMAS),
            estimate,
        })?,
        OutputFormat::Csv => estimate_csv(&format!("simulate-fdr procedure={name}"), bound, &estimate)?,
    };
    emit(&text, args.output.as_deref())
}

fn run_classifier_bound(args: &ClassifierArgs) -> Result<()> {
    let report = classifier_bound_report(args.n, args.delta, args.theta, args.emp_error)?;
    emit(&to_json_string(&report)?, args.output.as_deref())
}

fn run_sharpness(args: &SharpnessArgs) -> Result<()> {
    let config = SharpnessConfig {
        alpha0: args.alpha0,
        nu: parse_nu(&args.nu)?,
        grid_n: args.grid_n,
        marginal: Marginal::default(),
        trials: args.trials,
        seed: args.seed,
    };
    let summary = sharpness::estimate(&config)?;
    if let Some(path) = &args.csv {
        let table = float_table_csv(
            &["u", "set_size", "fpr", "degenerate"],
            summary
                .rows
                .iter()
                .map(|r| vec![r.u, r.set_size, r.fpr, if r.degenerate { 1.0 } else { 0.0 }]),
        )?;
        emit(&table, Some(path))?;
    }
    emit(&to_json_string(&summary)?, args.output.as_deref())
}

#[derive(Serialize)]
struct ValidationReport {
    check: &'static str,
    delta: f64,
    detail: String,
    bound: f64,
    margin_sigmas: f64,
    estimate: McEstimate,
    within_bound: bool,
}

fn run_validate(args: &ValidateArgs) -> Result<()> {
    let delta = args
        .delta
        .unwrap_or(if args.check == Check::ConstantVolume { 0.1 } else { 0.05 });
    let (name, detail, estimate) = match args.check {
        Check::ConstantVolume => {
            let spec = args.scenario.resolve(ScenarioSpec::all_null(50, 10_000, DEFAULT_SEED))?;
            let pi = ComplexityPrior::uniform(spec.m)?;
            let est = validate_constant_volume(&spec, args.a, &pi, delta)?;
            ("constant-volume", format!("m={} m0={} a={}", spec.m, spec.m0, args.a), est)
        }
        Check::HammerJoint => {
            let spec = args.scenario.resolve(ScenarioSpec::all_null(100, 10_000, DEFAULT_SEED))?;
            let pi = ComplexityPrior::uniform(spec.m)?;
            let rule = parse_rule(&args.rule)?;
            let detail = format!("m={} m0={} rule={} prior={}", spec.m, spec.m0, args.rule, args.size_prior);
            let est = match args.size_prior.as_str() {
                s if s == "uniform01" || s.starts_with("power:") => {
                    validate_hammer_joint(&spec, &rule, &pi, &parse_nu(s)?, delta)?
                }
                s => validate_hammer_joint(&spec, &rule, &pi, &parse_size_prior(s, spec.m)?, delta)?,
            };
            ("hammer-joint", detail, est)
        }
        Check::Classifier => {
            let rule = match args.classifier_rule.as_str() {
                "softmax" => ClassifierRule::Softmax { scale: args.n as f64 },
                "uniform" => ClassifierRule::Uniform,
                other => return Err(bad_flag(format!("unknown classifier rule {other:?}"))),
            };
            let errors = equispaced_errors(args.classifiers, args.err_lo, args.err_hi);
            let trials = args.scenario.trials.unwrap_or(10_000);
            let seed = args.scenario.seed.unwrap_or(DEFAULT_SEED);
            let est = validate_classifier_coverage(args.n, delta, &errors, rule, trials, seed)?;
            (
                "classifier",
                format!(
                    "n={} classifiers={} errors=[{},{}] rule={}",
                    args.n, args.classifiers, args.err_lo, args.err_hi, args.classifier_rule
                ),
                est,
            )
        }
    };
    let text = match args.format {
        OutputFormat::Json => to_json_string(&ValidationReport {
            check: name,
            delta,
            detail,
            bound: delta,
            margin_sigmas: SIGMAS,
            within_bound: estimate.within(delta, SIGMAS),
            estimate,
        })?,
        OutputFormat::Csv => estimate_csv(&format!("validate check={name}"), delta, &estimate)?,
    };
    emit(&text, args.output.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Adjust(a) => run_adjust(&a),
        Command::SimulateFdr(a) => run_simulate(&a),
        Command::ClassifierBound(a) => run_classifier_bound(&a),
        Command::Sharpness(a) => run_sharpness(&a),
        Command::Validate(a) => run_validate(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("occam: {err}");
            if err.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
