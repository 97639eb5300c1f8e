//! Batch certification surface. Every subcommand is deterministic given
//! its flags: all randomness is seeded, floats are printed losslessly,
//! and outputs are written atomically (temp file + rename).
//!
//! Exit codes: 0 for a satisfied certificate or a pure generation run,
//! 1 for an unsatisfied or inconclusive certificate, 2 for usage, parse,
//! or I/O errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use infostab::{
    certify, certify_family, eval_approximant, eval_f, extend_boundary, family_table_from_json,
    family_table_to_json, make_canonical_family, make_exact_log, make_exact_power,
    noise_residual_bound, parse_table_csv, parse_table_csv_closed, perturb, perturb_family,
    render_json, residual_sup, stability_constant, tabulate_family, write_table_csv, Alpha,
    DomainGrid, FamilyParams, FunctionSpec, MeasureFamily, NoiseKind, PerturbationPlan,
    ResidualEstimate, StabilityCertificate, CONSTANT_SUP_NEGATIVE, DEFAULT_MARGIN,
    DEFAULT_RESOLUTION,
};
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Interior sampling window for generated tables. Narrower than the
/// default analysis margin so a generated table always covers the
/// analysis grid, its midpoints, and the fit probe arguments.
const TABLE_MARGIN: f64 = 5e-4;

#[derive(Parser)]
#[command(
    name = "infostab",
    version,
    about = "Stability certificates for the parametric fundamental equation of information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a tabulated candidate against its nearest exact solution
    Analyze(AnalyzeArgs),
    /// Generate sample tables and frozen families, with parameter sidecars
    #[command(subcommand)]
    Gen(GenCommand),
    /// Tabulate the per-degree stability constant
    Constants(ConstantsArgs),
    /// Certify an information-measure family level by level
    FamilyCertify(FamilyCertifyArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Degree of the candidate; must be <= 0 (0 selects the log form)
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Input samples, CSV `x,value`
    #[arg(long)]
    input: PathBuf,
    /// Certificate destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Evaluation-grid margin
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Evaluation-grid resolution
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: u32,
    /// Take this residual bound as supplied instead of estimating one
    #[arg(long, conflicts_with = "noise_bound", allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Derive a sound residual bound from this pointwise noise amplitude
    #[arg(long, allow_negative_numbers = true)]
    noise_bound: Option<f64>,
    /// Plot-data destination, CSV `x,f,approximant,deviation`
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Read x = 0 / x = 1 rows as endpoint data and check the closed-domain extension
    #[arg(long)]
    closed_domain: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Sample a power-form candidate into CSV
    Power(GenPowerArgs),
    /// Sample a log-form candidate into CSV
    Log(GenLogArgs),
    /// Freeze a family into its JSON table form
    Family(GenFamilyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseKindArg {
    /// Hash-uniform values in [-delta, delta]
    Uniform,
    /// Exactly +delta or -delta by hash parity
    Comb,
}

impl NoiseKindArg {
    fn kind(self) -> NoiseKind {
        match self {
            NoiseKindArg::Uniform => NoiseKind::Uniform,
            NoiseKindArg::Comb => NoiseKind::Comb,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NoiseKindArg::Uniform => "uniform",
            NoiseKindArg::Comb => "comb",
        }
    }
}

#[derive(Args)]
struct GenPowerArgs {
    /// Coefficient of x^alpha
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    /// Coefficient of (1-x)^alpha (its negation is the constant term)
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Degree; must be < 0 for the power form
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Number of interior samples
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Pointwise noise amplitude (exact samples when omitted)
    #[arg(long, allow_negative_numbers = true)]
    noise_bound: Option<f64>,
    #[arg(long, value_enum, default_value_t = NoiseKindArg::Uniform)]
    noise: NoiseKindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the closed-domain rows x = 0 and x = 1
    #[arg(long)]
    closed_domain: bool,
    /// CSV destination; parameters echo into `<output>.meta.json`
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct GenLogArgs {
    /// Coefficient of ln(1-x)
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    /// Constant term
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    /// Number of interior samples
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Pointwise noise amplitude (exact samples when omitted)
    #[arg(long, allow_negative_numbers = true)]
    noise_bound: Option<f64>,
    #[arg(long, value_enum, default_value_t = NoiseKindArg::Uniform)]
    noise: NoiseKindArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; parameters echo into `<output>.meta.json`
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct GenFamilyArgs {
    /// Entropy coefficient of the family
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    /// Power-family offset (degree < 0 only)
    #[arg(long, allow_negative_numbers = true)]
    d: Option<f64>,
    /// Log-family coefficient (degree 0 only)
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Degree; must be <= 0
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Highest level to freeze
    #[arg(long, default_value_t = 6)]
    max_n: usize,
    /// Seeded sample vectors per level
    #[arg(long, default_value_t = 25)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest admissible component in sampled vectors
    #[arg(long, default_value_t = 0.05)]
    margin: f64,
    /// Comma-separated per-level noise amplitudes (one per level 2..=max-n)
    #[arg(long, allow_hyphen_values = true)]
    deltas: Option<String>,
    /// JSON destination; parameters echo into `<output>.meta.json`
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Comma-separated degrees, all < 0
    #[arg(long, allow_hyphen_values = true)]
    alphas: String,
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FamilyCertifyArgs {
    /// Frozen family JSON; generator flags are used when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    /// Degree; required without --input, cross-checked against the file with it
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Entropy coefficient for a synthesized family
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Power-family offset for a synthesized family (degree < 0 only)
    #[arg(long, allow_negative_numbers = true)]
    d: Option<f64>,
    /// Log-family coefficient for a synthesized family (degree 0 only)
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Highest level to certify (defaults to the family's own)
    #[arg(long)]
    max_n: Option<usize>,
    /// Seeded sample vectors per level; must match the frozen table's
    #[arg(long, default_value_t = 25)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest admissible component in sampled vectors
    #[arg(long, default_value_t = 0.05)]
    margin: f64,
    /// Comma-separated per-level noise amplitudes for a synthesized family
    #[arg(long, allow_hyphen_values = true)]
    deltas: Option<String>,
    /// Certificate destination (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Gen(GenCommand::Power(args)) => cmd_gen_power(args),
        Command::Gen(GenCommand::Log(args)) => cmd_gen_log(args),
        Command::Gen(GenCommand::Family(args)) => cmd_gen_family(args),
        Command::Constants(args) => cmd_constants(args),
        Command::FamilyCertify(args) => cmd_family_certify(args),
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn checked_alpha(v: f64) -> Result<Alpha, String> {
    if !v.is_finite() || v > 0.0 {
        return Err(format!("alpha must be <= 0 (got {v})"));
    }
    Alpha::new(v).map_err(fail)
}

fn read_input(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes through a temp file in the destination directory so a crash
/// never leaves a half-written artifact behind.
fn write_atomic(path: &Path, content: &str) -> Result<(), String> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    tmp.write_all(content.as_bytes())
        .map_err(|e| format!("{}: {e}", path.display()))?;
    tmp.persist(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_meta(output: &Path, meta: Value) -> Result<(), String> {
    let path = PathBuf::from(format!("{}.meta.json", output.display()));
    write_atomic(&path, &format!("{}\n", render_json(&meta)))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// analyze

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode, String> {
    let alpha = checked_alpha(args.alpha)?;
    let text = read_input(&args.input)?;
    let (spec, f0, f1) = if args.closed_domain {
        let t = parse_table_csv_closed(&text).map_err(fail)?;
        (t.spec, t.f0, t.f1)
    } else {
        (parse_table_csv(&text).map_err(fail)?, None, None)
    };
    let grid = DomainGrid::new(args.margin, args.resolution).map_err(fail)?;
    let eps = match (args.epsilon, args.noise_bound) {
        (Some(e), _) => ResidualEstimate::supplied(e).map_err(fail)?,
        (None, Some(d)) => noise_residual_bound(d, alpha, &grid).map_err(fail)?,
        (None, None) => residual_sup(&spec, alpha, &grid).map_err(fail)?,
    };
    let mut cert = certify(&spec, alpha, &grid, eps).map_err(fail)?;
    if args.closed_domain {
        let report =
            extend_boundary(&cert.params, alpha, f0, f1, cert.epsilon.value).map_err(fail)?;
        cert.boundary = Some(report);
    }
    emit(args.output.as_deref(), &format!("{}\n", cert.to_json()))?;
    if let Some(plot) = &args.plot {
        let csv = plot_csv(&spec, alpha, &cert, &grid).map_err(fail)?;
        write_atomic(plot, &csv)?;
    }
    Ok(exit_for(&cert))
}

fn exit_for(cert: &StabilityCertificate) -> ExitCode {
    let boundary_ok = cert.boundary.as_ref().map_or(true, |b| b.ok);
    if cert.satisfied && boundary_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Deviation data over the certification grid, midpoints included, so
/// the column maximum reproduces the certificate's sup_deviation.
fn plot_csv(
    spec: &FunctionSpec,
    alpha: Alpha,
    cert: &StabilityCertificate,
    grid: &DomainGrid,
) -> infostab::Result<String> {
    let mut out = String::from("x,f,approximant,deviation\n");
    for x in grid.xs_with_midpoints() {
        let f = eval_f(spec, alpha, x)?;
        let h = eval_approximant(&cert.params, alpha, x)?;
        let dev = (f - h).abs();
        writeln!(out, "{x},{f},{h},{dev}").expect("string write");
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// gen

fn noise_plan(
    delta: Option<f64>,
    seed: u64,
    kind: NoiseKindArg,
) -> Result<Option<PerturbationPlan>, String> {
    delta
        .map(|d| PerturbationPlan::new(d, seed, kind.kind()).map_err(fail))
        .transpose()
}

fn interior_xs(points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err(format!("--points must be at least 2 (got {points})"));
    }
    let lo = TABLE_MARGIN;
    let hi = 1.0 - TABLE_MARGIN;
    Ok((0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect())
}

fn sample_table(spec: &FunctionSpec, alpha: Alpha, xs: &[f64]) -> Result<Vec<f64>, String> {
    xs.iter()
        .map(|&x| eval_f(spec, alpha, x).map_err(fail))
        .collect()
}

fn noise_meta(delta: Option<f64>, seed: u64, kind: NoiseKindArg) -> Value {
    match delta {
        Some(d) => {
            let mut m = Map::new();
            m.insert("delta".into(), Value::from(d));
            m.insert("seed".into(), Value::from(seed));
            m.insert("kind".into(), Value::from(kind.name()));
            Value::Object(m)
        }
        None => Value::Null,
    }
}

fn cmd_gen_power(args: GenPowerArgs) -> Result<ExitCode, String> {
    let alpha = checked_alpha(args.alpha)?;
    if alpha.is_log() {
        return Err("degree 0 is the log form; use `gen log`".into());
    }
    let exact = make_exact_power(args.a, args.b, alpha).map_err(fail)?;
    let plan = noise_plan(args.noise_bound, args.seed, args.noise)?;
    let spec = match plan {
        Some(p) => perturb(exact, p),
        None => exact,
    };
    let mut xs = interior_xs(args.points)?;
    let mut values = sample_table(&spec, alpha, &xs)?;
    if args.closed_domain {
        // closed-extension endpoint values: 0 at x = 0, a - b at x = 1
        xs.insert(0, 0.0);
        values.insert(0, plan.map_or(0.0, |p| p.noise(0.0)));
        xs.push(1.0);
        values.push(args.a - args.b + plan.map_or(0.0, |p| p.noise(1.0)));
    }
    write_atomic(&args.output, &write_table_csv(&xs, &values))?;

    let mut meta = Map::new();
    meta.insert("command".into(), Value::from("gen power"));
    meta.insert("a".into(), Value::from(args.a));
    meta.insert("b".into(), Value::from(args.b));
    meta.insert("alpha".into(), Value::from(args.alpha));
    meta.insert("points".into(), Value::from(args.points as u64));
    meta.insert("table_margin".into(), Value::from(TABLE_MARGIN));
    meta.insert(
        "noise".into(),
        noise_meta(args.noise_bound, args.seed, args.noise),
    );
    meta.insert("closed_domain".into(), Value::from(args.closed_domain));
    write_meta(&args.output, Value::Object(meta))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_log(args: GenLogArgs) -> Result<ExitCode, String> {
    let exact = make_exact_log(args.lambda, args.c);
    let plan = noise_plan(args.noise_bound, args.seed, args.noise)?;
    let spec = match plan {
        Some(p) => perturb(exact, p),
        None => exact,
    };
    let xs = interior_xs(args.points)?;
    let values = sample_table(&spec, Alpha::new(0.0).expect("0 is admissible"), &xs)?;
    write_atomic(&args.output, &write_table_csv(&xs, &values))?;

    let mut meta = Map::new();
    meta.insert("command".into(), Value::from("gen log"));
    meta.insert("lambda".into(), Value::from(args.lambda));
    meta.insert("c".into(), Value::from(args.c));
    meta.insert("alpha".into(), Value::from(0.0));
    meta.insert("points".into(), Value::from(args.points as u64));
    meta.insert("table_margin".into(), Value::from(TABLE_MARGIN));
    meta.insert(
        "noise".into(),
        noise_meta(args.noise_bound, args.seed, args.noise),
    );
    write_meta(&args.output, Value::Object(meta))?;
    Ok(ExitCode::SUCCESS)
}

fn family_params(
    alpha: Alpha,
    c: f64,
    d: Option<f64>,
    lambda: Option<f64>,
) -> Result<FamilyParams, String> {
    if alpha.is_log() {
        match (d, lambda) {
            (None, Some(lambda)) => Ok(FamilyParams::LogFamily { c, lambda }),
            (Some(_), _) => Err("degree 0 families take --lambda, not --d".into()),
            (None, None) => Err("degree 0 families need --lambda".into()),
        }
    } else {
        match (d, lambda) {
            (Some(d), None) => Ok(FamilyParams::PowerFamily { c, d }),
            (_, Some(_)) => Err("negative-degree families take --d, not --lambda".into()),
            (None, None) => Err("negative-degree families need --d".into()),
        }
    }
}

fn synthesize_family(
    alpha: Alpha,
    params: FamilyParams,
    max_n: usize,
    deltas: Option<&str>,
    seed: u64,
) -> Result<MeasureFamily, String> {
    let family = make_canonical_family(params, alpha, max_n).map_err(fail)?;
    match deltas {
        Some(list) => perturb_family(family, parse_list(list)?, seed).map_err(fail),
        None => Ok(family),
    }
}

fn family_params_meta(params: &FamilyParams) -> Value {
    let mut m = Map::new();
    match params {
        FamilyParams::PowerFamily { c, d } => {
            m.insert("kind".into(), Value::from("power-family"));
            m.insert("c".into(), Value::from(*c));
            m.insert("d".into(), Value::from(*d));
        }
        FamilyParams::LogFamily { c, lambda } => {
            m.insert("kind".into(), Value::from("log-family"));
            m.insert("c".into(), Value::from(*c));
            m.insert("lambda".into(), Value::from(*lambda));
        }
    }
    Value::Object(m)
}

fn cmd_gen_family(args: GenFamilyArgs) -> Result<ExitCode, String> {
    let alpha = checked_alpha(args.alpha)?;
    let params = family_params(alpha, args.c, args.d, args.lambda)?;
    let family = synthesize_family(
        alpha,
        params.clone(),
        args.max_n,
        args.deltas.as_deref(),
        args.seed,
    )?;
    let frozen = tabulate_family(
        &family,
        alpha,
        args.max_n,
        args.samples,
        args.seed,
        args.margin,
    )
    .map_err(fail)?;
    let json = family_table_to_json(alpha, &frozen).map_err(fail)?;
    write_atomic(&args.output, &format!("{json}\n"))?;

    let mut meta = Map::new();
    meta.insert("command".into(), Value::from("gen family"));
    meta.insert("alpha".into(), Value::from(args.alpha));
    meta.insert("params".into(), family_params_meta(&params));
    meta.insert("max_n".into(), Value::from(args.max_n as u64));
    meta.insert("samples".into(), Value::from(args.samples as u64));
    meta.insert("seed".into(), Value::from(args.seed));
    meta.insert("margin".into(), Value::from(args.margin));
    meta.insert(
        "deltas".into(),
        match &args.deltas {
            Some(list) => Value::Array(parse_list(list)?.into_iter().map(Value::from).collect()),
            None => Value::Null,
        },
    );
    write_meta(&args.output, Value::Object(meta))?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// constants

fn cmd_constants(args: ConstantsArgs) -> Result<ExitCode, String> {
    let degrees = parse_list(&args.alphas)?;
    if degrees.is_empty() {
        return Err("--alphas needs at least one degree".into());
    }
    let mut out = String::from("alpha,constant\n");
    for v in &degrees {
        if !v.is_finite() || *v >= 0.0 {
            return Err(format!(
                "the constant table is defined for negative degrees only (got {v})"
            ));
        }
        let k = stability_constant(Alpha::new(*v).map_err(fail)?);
        writeln!(out, "{v},{k}").expect("string write");
    }
    writeln!(out, "limit alpha->0-,{CONSTANT_SUP_NEGATIVE}").expect("string write");
    emit(args.output.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// family-certify

fn cmd_family_certify(args: FamilyCertifyArgs) -> Result<ExitCode, String> {
    let (alpha, family) = match &args.input {
        Some(path) => {
            if args.c.is_some()
                || args.d.is_some()
                || args.lambda.is_some()
                || args.deltas.is_some()
            {
                return Err("--input and generator flags are mutually exclusive".into());
            }
            let text = read_input(path)?;
            let (file_alpha, family) = family_table_from_json(&text).map_err(fail)?;
            if let Some(flag) = args.alpha {
                if flag != file_alpha.value() {
                    return Err(format!(
                        "--alpha {flag} does not match the file's degree {}",
                        file_alpha.value()
                    ));
                }
            }
            (file_alpha, family)
        }
        None => {
            let alpha = checked_alpha(
                args.alpha
                    .ok_or("either --input or --alpha with generator flags is required")?,
            )?;
            let c = args.c.ok_or("generator families need --c")?;
            let params = family_params(alpha, c, args.d, args.lambda)?;
            let max_n = args.max_n.unwrap_or(6);
            (
                alpha,
                synthesize_family(alpha, params, max_n, args.deltas.as_deref(), args.seed)?,
            )
        }
    };
    let max_n = args.max_n.unwrap_or_else(|| family.max_n());
    let from_file = args.input.is_some();
    let cert = certify_family(&family, alpha, max_n, args.samples, args.seed, args.margin)
        .map_err(|e| {
            let mut msg = e.to_string();
            if from_file && matches!(e, infostab::Error::MissingFamilyValue { .. }) {
                msg.push_str(
                    "; frozen tables must be certified with the --samples, --seed, \
                     --margin, and --max-n they were generated with",
                );
            }
            msg
        })?;
    emit(args.output.as_deref(), &format!("{}\n", cert.to_json()))?;
    Ok(if cert.satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
