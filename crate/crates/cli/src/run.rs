use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bidisk_julia::catalog::{from_measure_recipe, Builtin, CatalogError, SCHUR_SAMPLES};
use bidisk_julia::classifier::{self, ClassifierConfig, ClassifyError};
use bidisk_julia::design::seed_from_env;
use bidisk_julia::geometry::radial_direction;
use bidisk_julia::pick::{f_from_measure, g_bound_probe, linearity_test, moments, PickError, LINEARITY_TOL};
use bidisk_julia::report::{sweep_csv, to_json};
use bidisk_julia::{AnalyticFunction, BoundaryPoint, Direction, FunctionDescriptor, MeasureSpec, Schedule, C64};
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, Format, FunctionArgs, RunArgs};

/// Smallest schedule depth accepted from the command line.
const MIN_DEPTH: usize = 8;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical fault: {m}"),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        if e.is_numerical_fault() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PickError> for CliError {
    fn from(e: PickError) -> Self {
        match e {
            PickError::Measure(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Contents of `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    function: Option<FunctionDescriptor>,
    tau: Option<[[f64; 2]; 2]>,
    classifier: ClassifierConfig,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("malformed JSON in {}: {e}", path.display())))
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config_err(format!("{what}: expected comma-separated numbers, got {s:?}")))?;
    if n > 0 && v.len() != n {
        return Err(config_err(format!("{what}: expected {n} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn parse_pair(s: &str, what: &str) -> Result<(C64, C64), CliError> {
    let v = parse_floats(s, 4, what)?;
    Ok((C64::new(v[0], v[1]), C64::new(v[2], v[3])))
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("--param expects k=v, got {item:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| config_err(format!("--param {k}: not a number: {v:?}")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn load_function(src: &FunctionArgs, fallback: Option<&FunctionDescriptor>) -> Result<AnalyticFunction, CliError> {
    let given = [src.builtin.is_some(), src.function_json.is_some(), src.measure_json.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given > 1 {
        return Err(config_err("give only one of --builtin, --function-json, --measure-json"));
    }
    if !src.params.is_empty() && src.builtin.is_none() {
        return Err(config_err("--param applies to --builtin only"));
    }
    if let Some(name) = &src.builtin {
        let b: Builtin = name.parse()?;
        return Ok(bidisk_julia::catalog::builtin(b, &parse_params(&src.params)?)?);
    }
    if let Some(path) = &src.function_json {
        let d: FunctionDescriptor = read_json(path)?;
        return Ok(d.build()?);
    }
    if let Some(path) = &src.measure_json {
        let mu: MeasureSpec = read_json(path)?;
        return Ok(from_measure_recipe(&mu)?);
    }
    match fallback {
        Some(d) => Ok(d.build()?),
        None => Err(config_err("no function given (use --builtin, --function-json or --measure-json)")),
    }
}

struct Resolved {
    phi: AnalyticFunction,
    tau: BoundaryPoint,
    config: ClassifierConfig,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn resolve(args: &RunArgs) -> Result<Resolved, CliError> {
    let file: RunConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => RunConfig::default(),
    };
    let phi = load_function(&args.source, file.function.as_ref())?;
    let tau = match (&args.tau, file.tau) {
        (Some(s), _) => {
            let (a, b) = parse_pair(s, "--tau")?;
            BoundaryPoint::new(a, b).map_err(|e| config_err(e.to_string()))?
        }
        (None, Some([a, b])) => {
            BoundaryPoint::new(C64::new(a[0], a[1]), C64::new(b[0], b[1])).map_err(|e| config_err(e.to_string()))?
        }
        (None, None) => BoundaryPoint::chi(),
    };
    let mut config = file.classifier;
    if let Some(a) = &args.apertures {
        config.apertures = parse_floats(a, 0, "--apertures")?;
    }
    if let Some(d) = args.depth {
        config.schedule.depth = d;
    }
    if let Some(r) = args.ratio {
        config.schedule.ratio = r;
    }
    if let Some(l) = args.levels {
        config.richardson_levels = l;
    }
    if config.schedule.depth < MIN_DEPTH {
        return Err(config_err(format!("schedule depth must be at least {MIN_DEPTH}")));
    }
    config.validate()?;
    Ok(Resolved {
        phi,
        tau,
        config,
        out: args.out.clone(),
        format: args.format,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| config_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(config_err(format!("cannot write output: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    to_json(value).map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))
}

#[derive(Serialize)]
struct SweepJson<'a> {
    schema: u32,
    function: &'a str,
    tau: BoundaryPoint,
    rows: Vec<classifier::JuliaSample>,
}

#[derive(Serialize)]
struct DerivativeJson<'a> {
    schema: u32,
    function: &'a str,
    tau: BoundaryPoint,
    omega: C64,
    omega_converged: bool,
    derivative: classifier::DerivativeSample,
}

#[derive(Serialize)]
struct DecomposeJson {
    schema: u32,
    measure: MeasureSpec,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    moments: [f64; 3],
    g_bound_probe: bidisk_julia::pick::GBound,
    linearity: bidisk_julia::pick::Linearity,
}

#[derive(Serialize)]
struct ConstructJson<'a> {
    schema: u32,
    name: &'a str,
    is_rational: bool,
    descriptor: &'a FunctionDescriptor,
    schur_sample_size: usize,
    schur_sample_seed: u64,
    schur_sample_max: f64,
}

#[derive(Serialize)]
struct ExampleJson {
    name: &'static str,
    summary: &'static str,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify(args) => {
            let r = resolve(&args)?;
            if r.format == Some(Format::Csv) {
                return Err(config_err("classify writes JSON only"));
            }
            let report = classifier::classify(&r.phi, &r.tau, &r.config)?;
            emit(&json(&report)?, r.out.as_deref())
        }
        Command::Sweep(args) => {
            let r = resolve(&args)?;
            let rows = classifier::sweep(
                &r.phi,
                &r.tau,
                &r.config.apertures,
                &r.config.schedule.values(),
                &r.config.lattice.directions(&r.tau),
            )?;
            let text = match r.format.unwrap_or(Format::Csv) {
                Format::Csv => sweep_csv(&rows),
                Format::Json => json(&SweepJson {
                    schema: classifier::SCHEMA_VERSION,
                    function: r.phi.name(),
                    tau: r.tau,
                    rows,
                })?,
            };
            emit(&text, r.out.as_deref())
        }
        Command::Derivative { run, direction } => {
            let r = resolve(&run)?;
            if r.format == Some(Format::Csv) {
                return Err(config_err("derivative writes JSON only"));
            }
            let h = match direction {
                Some(s) => {
                    let (a, b) = parse_pair(&s, "--direction")?;
                    Direction::new(a, b)
                }
                None => radial_direction(&r.tau),
            };
            if !h.is_inward_at(&r.tau) {
                return Err(config_err("--direction does not point into the bidisk"));
            }
            let Schedule { ratio, .. } = r.config.schedule;
            let ts = r.config.schedule.values();
            let omega = classifier::estimate_omega(&r.phi, &r.tau, &ts, ratio, r.config.richardson_levels)?;
            let d = classifier::directional_derivative(
                &r.phi,
                &r.tau,
                omega.omega,
                &h,
                &ts,
                ratio,
                r.config.richardson_levels,
            )?;
            emit(
                &json(&DerivativeJson {
                    schema: classifier::SCHEMA_VERSION,
                    function: r.phi.name(),
                    tau: r.tau,
                    omega: omega.omega,
                    omega_converged: omega.converged,
                    derivative: d,
                })?,
                r.out.as_deref(),
            )
        }
        Command::Decompose { measure_json, out } => {
            let mu: MeasureSpec = read_json(&measure_json)?;
            let hp = f_from_measure(&mu);
            let report = DecomposeJson {
                a: hp.a(),
                b: hp.b(),
                moments: [moments(&mu, 0), moments(&mu, 1), moments(&mu, 2)],
                g_bound_probe: g_bound_probe(&hp)?,
                linearity: linearity_test(&hp, LINEARITY_TOL)?,
                schema: classifier::SCHEMA_VERSION,
                measure: mu,
            };
            emit(&json(&report)?, out.as_deref())
        }
        Command::Construct { source, out } => {
            let phi = load_function(&source, None)?;
            let seed = seed_from_env();
            let (max, _) = phi
                .schur_sample(SCHUR_SAMPLES, seed)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            emit(
                &json(&ConstructJson {
                    schema: classifier::SCHEMA_VERSION,
                    name: phi.name(),
                    is_rational: phi.is_rational(),
                    descriptor: phi.descriptor(),
                    schur_sample_size: SCHUR_SAMPLES,
                    schur_sample_seed: seed,
                    schur_sample_max: max,
                })?,
                out.as_deref(),
            )
        }
        Command::ListExamples { format } => {
            let text = match format {
                Some(Format::Json) => json(
                    &Builtin::ALL
                        .iter()
                        .map(|b| ExampleJson {
                            name: b.name(),
                            summary: b.summary(),
                        })
                        .collect::<Vec<_>>(),
                )?,
                Some(Format::Csv) => return Err(config_err("list-examples writes text or JSON")),
                None => Builtin::ALL
                    .iter()
                    .map(|b| format!("{:<6} {}\n", b.name(), b.summary()))
                    .collect(),
            };
            emit(&text, None)
        }
    }
}
