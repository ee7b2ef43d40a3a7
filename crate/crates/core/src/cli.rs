//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code (0 success, 1 usage, 2 runtime or validation failure), so the
//! binary is a thin wrapper and the commands can be driven in-process.
//!
//! Every artifact starts with the fully resolved configuration: a
//! `# config: {…}` line for CSV and JSON lines, a `"config"` key for JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::adiabatic::{
    apply_energy_correction, estimate_energy, measure_offset, prepare_state, EnergyEstimate, Measurement, Method,
    TrotterSchedule, METHOD_II_PRESET_DELTA, METHOD_I_PRESET_DELTA, METHOD_I_PRESET_TAU,
};
use crate::analysis::{
    depth_scan, epsilon_scan, loglog_fit, Metric, ScalingPoint, ScanParameter, UGrid, DEFAULT_FIXED_DELTA,
    DEFAULT_FIXED_TAU, EPSILON_DELTA_WINDOW, EPSILON_TAU_WINDOW, REFERENCE_DELTA_GRID, REFERENCE_TAU_GRID,
};
use crate::circuit::Circuit;
use crate::compiler::{lower_circuit, verify_lowering, SignParams};
use crate::error::SimError;
use crate::gate::{Gate, GateKind};
use crate::hubbard::{exact_r2, ground_energy, subsystem_purity, HubbardParams};
use crate::noise::{
    apply_spam, apply_spam_record, correct_spam, derive_seed, run_noisy, NoiseModel, SpamModel, DEFAULT_P1, DEFAULT_P2,
};
use crate::renyi::{
    build_swap_test_circuit, cswap_truth_table, estimate_r2_from_distribution, estimate_r2_from_weights, R2Estimate,
};
use crate::shots::ShotRecord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const DEFAULT_SEED: u64 = 1;
/// Shots used when noise is requested without an explicit shot count.
const DEFAULT_NOISY_SHOTS: u64 = 2500;
/// Largest register for which `compile` builds the dense unitary check.
const MAX_VERIFY_QUBITS: usize = 10;
const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "renyi-sim",
    version,
    about = "Simulate adiabatic preparation and swap-test Renyi entropy of the Hubbard dimer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy expectation along the adiabatic schedule
    Evolve(ExperimentArgs),
    /// Second Renyi purity from the two-copy swap test
    Renyi(ExperimentArgs),
    /// Trotter-error or circuit-depth scaling scan with a log-log fit
    Scan(ScanArgs),
    /// Lower a gate or circuit to native gates and verify it
    Compile(CompileArgs),
    /// Output distribution of the lowered C-Swap for every basis input
    Truthtable(TruthTableArgs),
    /// Re-analyse recorded shots: readout correction, post-selection, estimates
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML file with default values; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug, Default)]
struct NoiseArgs {
    /// Enable gate noise with the default depolarizing probabilities
    #[arg(long)]
    noisy: bool,
    /// Single-qubit depolarizing probability (implies --noisy)
    #[arg(long)]
    p1: Option<f64>,
    /// Two-qubit depolarizing probability (implies --noisy)
    #[arg(long)]
    p2: Option<f64>,
    /// Readout confusion matrices (JSON array of per-qubit 2×2 matrices)
    #[arg(long)]
    spam: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Interactions: `a,b,c` or `start:stop:step`
    #[arg(long = "U", value_name = "LIST")]
    u: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    /// Method I only; method II fixes τ = 5δ/U
    #[arg(long)]
    tau: Option<f64>,
    /// Shots per basis; exact expectation values when absent and noiseless
    #[arg(long)]
    shots: Option<u64>,
    /// Discard the swap-test zero-weight outcomes (default true)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    post_select: Option<bool>,
    /// Hadamards on the data qubits before readout (default true)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    final_hadamards: Option<bool>,
    /// Energy correction: `none`, `auto` (method II, offset measured at U = 0) or a number
    /// (slope for method I, offset for method II)
    #[arg(long)]
    correction: Option<String>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "tau")]
    vary: VaryArg,
    #[arg(long, value_enum, default_value = "r2")]
    metric: MetricArg,
    /// Values of the varied parameter (`a,b,c` or `start:stop:step`)
    #[arg(long)]
    values: Option<String>,
    /// Value of the parameter held fixed
    #[arg(long)]
    fixed: Option<f64>,
    /// Interaction grid `start:stop:step` for the ε metrics
    #[arg(long, default_value = "0:10:0.1")]
    grid: String,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Gate name (cswap, h, cnot, swap, rzz, rx, ry, rz, r, xx)
    gate: Option<String>,
    /// Qubits for the named gate (default 0, 1, …)
    #[arg(long, value_delimiter = ',')]
    qubits: Option<Vec<usize>>,
    /// Angles for the named gate
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    angles: Option<Vec<f64>>,
    /// Circuit file: one gate per line, `name q… [angle…]`, `#` comments
    #[arg(long, conflicts_with = "gate")]
    circuit: Option<PathBuf>,
    /// Compile the full swap-test circuit for this method
    #[arg(long, value_parser = parse_method, conflicts_with_all = ["gate", "circuit"])]
    method: Option<Method>,
    #[arg(long = "U", requires = "method")]
    u: Option<f64>,
    #[arg(long, requires = "method")]
    delta: Option<f64>,
    #[arg(long, requires = "method")]
    tau: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    final_hadamards: Option<bool>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    alpha: i32,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    beta: i32,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    gamma: i32,
}

#[derive(Args, Debug)]
struct TruthTableArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    alpha: i32,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    beta: i32,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    gamma: i32,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Shot records (CSV `outcome,count` or JSON); five-qubit swap-test or two-qubit energy data
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Readout confusion matrices used to correct each record
    #[arg(long)]
    spam: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    post_select: Option<bool>,
    /// X-basis record paired with a single two-qubit Z-basis file, for ⟨H⟩
    #[arg(long, requires = "u")]
    x_basis: Option<PathBuf>,
    #[arg(long = "U")]
    u: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VaryArg {
    Tau,
    Delta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    R2,
    Psi,
    Depth,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: SimError| e.to_string())
}

/// Values as written in a config file: a list or the same string syntax as the flag.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ValueList {
    List(Vec<f64>),
    Spec(String),
}

/// Contents of a `--config` TOML file. Every field is optional; flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    method: Option<String>,
    #[serde(alias = "U")]
    u: Option<ValueList>,
    delta: Option<f64>,
    tau: Option<f64>,
    shots: Option<u64>,
    noisy: Option<bool>,
    p1: Option<f64>,
    p2: Option<f64>,
    spam: Option<PathBuf>,
    seed: Option<u64>,
    post_select: Option<bool>,
    final_hadamards: Option<bool>,
    correction: Option<String>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))
    }
}

/// Parses `a,b,c` or `start:stop:step` (inclusive).
fn parse_values(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse value list {spec:?} (expected a,b,c or start:stop:step)"));
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<f64> =
            spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        return UGrid { start, stop, step }.values().map_err(|_| bad());
    }
    let values: Vec<f64> =
        spec.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn resolve_values(flag: Option<&str>, file: Option<&ValueList>) -> CliResult<Option<Vec<f64>>> {
    match (flag, file) {
        (Some(s), _) => parse_values(s).map(Some),
        (None, Some(ValueList::List(v))) => Ok(Some(v.clone())),
        (None, Some(ValueList::Spec(s))) => parse_values(s).map(Some),
        (None, None) => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct NoiseSettings {
    p1: f64,
    p2: f64,
}

/// Fully resolved settings of an `evolve` or `renyi` run; echoed into the output.
#[derive(Debug, Clone, Serialize)]
struct ExperimentConfig {
    command: &'static str,
    method: Method,
    #[serde(rename = "U")]
    u: Vec<f64>,
    delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spam: Option<PathBuf>,
    seed: u64,
    post_select: bool,
    final_hadamards: bool,
    correction: String,
    format: Format,
}

struct Resolved {
    config: ExperimentConfig,
    out: Option<PathBuf>,
    spam: Option<SpamModel>,
}

fn load_spam(path: Option<&Path>) -> CliResult<Option<SpamModel>> {
    path.map(SpamModel::load).transpose().map_err(CliError::from)
}

fn resolve_noise(args: &NoiseArgs, file: &RunConfig) -> CliResult<Option<NoiseSettings>> {
    let p1 = args.p1.or(file.p1);
    let p2 = args.p2.or(file.p2);
    let noisy = args.noisy || file.noisy.unwrap_or(false) || p1.is_some() || p2.is_some();
    if !noisy {
        return Ok(None);
    }
    let settings = NoiseSettings { p1: p1.unwrap_or(DEFAULT_P1), p2: p2.unwrap_or(DEFAULT_P2) };
    NoiseModel::new(settings.p1, settings.p2, 0)?;
    Ok(Some(settings))
}

fn resolve_experiment(command: &'static str, args: &ExperimentArgs) -> CliResult<Resolved> {
    let file = RunConfig::load(args.common.config.as_deref())?;
    let method = match (args.method, &file.method) {
        (Some(m), _) => m,
        (None, Some(s)) => parse_method(s).map_err(CliError::Usage)?,
        (None, None) => Method::II,
    };
    let u = resolve_values(args.u.as_deref(), file.u.as_ref())?.unwrap_or_else(|| match method {
        Method::I => (0..=6).map(f64::from).collect(),
        Method::II => (1..=5).map(f64::from).collect(),
    });
    let delta = args.delta.or(file.delta).unwrap_or(match method {
        Method::I => METHOD_I_PRESET_DELTA,
        Method::II => METHOD_II_PRESET_DELTA,
    });
    let tau = args.tau.or(file.tau);
    let tau = match method {
        Method::I => Some(tau.unwrap_or(METHOD_I_PRESET_TAU)),
        Method::II if tau.is_some() => {
            return Err(CliError::Runtime("method II fixes τ = 5δ/U; --tau is only valid for method I".into()))
        }
        Method::II => None,
    };
    let noise = resolve_noise(&args.noise, &file)?;
    let shots = args.shots.or(file.shots).or(noise.map(|_| DEFAULT_NOISY_SHOTS));
    if shots == Some(0) {
        return Err(CliError::Runtime(SimError::ZeroShots.to_string()));
    }
    let spam_path = args.noise.spam.clone().or(file.spam.clone());
    let config = ExperimentConfig {
        command,
        method,
        u,
        delta,
        tau,
        shots,
        noise,
        spam: spam_path.clone(),
        seed: args.common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        post_select: args.post_select.or(file.post_select).unwrap_or(true),
        final_hadamards: args.final_hadamards.or(file.final_hadamards).unwrap_or(true),
        correction: args.correction.clone().or(file.correction.clone()).unwrap_or_else(|| "none".into()),
        format: args.common.format.or(file.format).unwrap_or(Format::Csv),
    };
    Ok(Resolved { config, out: args.common.out.clone().or(file.out), spam: load_spam(spam_path.as_deref())? })
}

impl ExperimentConfig {
    fn schedule(&self, u: f64) -> CliResult<TrotterSchedule> {
        let s = match self.method {
            Method::I => {
                let tau = self.tau.unwrap_or(METHOD_I_PRESET_TAU);
                if self.delta == METHOD_I_PRESET_DELTA && tau == METHOD_I_PRESET_TAU {
                    TrotterSchedule::preset(Method::I, u)?
                } else {
                    TrotterSchedule::method_i_rounded(u, self.delta, tau)?
                }
            }
            Method::II => TrotterSchedule::method_ii(u, self.delta)?,
        };
        Ok(s)
    }

    fn measurement(&self, stream: u64) -> Measurement {
        let seed = derive_seed(self.seed, stream);
        match (self.noise, self.shots) {
            (Some(n), shots) => Measurement::Noisy {
                shots: shots.unwrap_or(DEFAULT_NOISY_SHOTS),
                noise: NoiseModel { p1: n.p1, p2: n.p2, seed },
            },
            (None, Some(shots)) => Measurement::Shots { shots, seed },
            (None, None) => Measurement::Exact,
        }
    }
}

/// Plain table rendered as CSV or JSON.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    summary: Option<Value>,
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn render(config: &impl Serialize, table: &Table, format: Format) -> CliResult<String> {
    let config = serde_json::to_value(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(match format {
        Format::Csv => {
            let mut s = format!("# config: {config}\n{}\n", table.columns.join(","));
            for row in &table.rows {
                s.push_str(&row.iter().map(csv_field).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            if let Some(summary) = &table.summary {
                s.push_str(&format!("# summary: {summary}\n"));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        table.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect::<Map<_, _>>(),
                    )
                })
                .collect();
            let mut doc = json!({ "config": config, "rows": rows });
            if let Some(summary) = &table.summary {
                doc["summary"] = summary.clone();
            }
            format!("{}\n", serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?)
        }
    })
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn cmd_evolve(args: &ExperimentArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let Resolved { config, out, .. } = resolve_experiment("evolve", args)?;
    let schedules: Vec<TrotterSchedule> = config.u.iter().map(|&u| config.schedule(u)).collect::<CliResult<_>>()?;
    let estimates: Vec<EnergyEstimate> = schedules
        .par_iter()
        .enumerate()
        .map(|(i, s)| estimate_energy(s, config.measurement(i as u64)))
        .collect::<Result<_, _>>()?;
    let points: Vec<(f64, f64)> = config.u.iter().zip(&estimates).map(|(&u, e)| (u, e.h_expect)).collect();

    let (corrected, correction_value) = match config.correction.trim().to_ascii_lowercase().as_str() {
        "none" => (None, None),
        "auto" => {
            if config.method != Method::II {
                return Err(CliError::Runtime(
                    "automatic correction measures the U = 0 offset of method II; give a slope for method I".into(),
                ));
            }
            let offset = measure_offset(config.delta, config.measurement(u64::MAX))?;
            (Some(apply_energy_correction(&points, Method::II, offset)?), Some(offset))
        }
        other => {
            let param: f64 = other
                .parse()
                .map_err(|_| CliError::Usage(format!("--correction expects none, auto or a number, got {other:?}")))?;
            (Some(apply_energy_correction(&points, config.method, param)?), Some(param))
        }
    };

    let rows = schedules
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                num(s.u),
                json!(s.method.to_string()),
                num(s.delta),
                opt_num(s.tau.is_finite().then_some(s.tau)),
                json!(s.n_steps),
                num(ground_energy(s.u)),
                num(estimates[i].h_expect),
                opt_num(corrected.as_ref().map(|c| c[i].1)),
            ]
        })
        .collect();
    let table = Table {
        columns: vec!["U", "method", "delta", "tau", "n_steps", "h_exact", "h_sim", "h_corrected"],
        rows,
        summary: correction_value.map(|v| json!({ "correction_parameter": v })),
    };
    emit(&render(&config, &table, config.format)?, out.as_deref(), stdout)
}

fn cmd_renyi(args: &ExperimentArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let Resolved { config, out, spam } = resolve_experiment("renyi", args)?;
    if let Some(s) = &spam {
        s.check_qubits(5)?;
    }
    let schedules: Vec<TrotterSchedule> = config.u.iter().map(|&u| config.schedule(u)).collect::<CliResult<_>>()?;
    let rows: Vec<Vec<Value>> = schedules
        .par_iter()
        .enumerate()
        .map(|(i, s)| -> CliResult<Vec<Value>> {
            let circuit = build_swap_test_circuit(s, config.final_hadamards)?;
            let seed = derive_seed(config.seed, i as u64);
            let (raw, post) = match (config.noise, config.shots) {
                (None, None) => {
                    let mut probs = circuit.run()?.probabilities();
                    if let Some(spam) = &spam {
                        probs = apply_spam(&probs, spam)?;
                    }
                    let exact = |post| -> CliResult<R2Estimate> {
                        let mut e = estimate_r2_from_distribution(&probs, 1.0, post)?;
                        e.std_err = Some(0.0);
                        Ok(e)
                    };
                    (exact(false)?, config.post_select.then(|| exact(true)).transpose()?)
                }
                (noise, shots) => {
                    let shots = shots.unwrap_or(DEFAULT_NOISY_SHOTS);
                    let mut record = match noise {
                        Some(n) => {
                            let native = lower_circuit(&circuit, SignParams::default())?.native_circuit;
                            run_noisy(&native, &NoiseModel { p1: n.p1, p2: n.p2, seed }, shots)?
                        }
                        None => circuit.run()?.sample_shots(shots, seed)?,
                    };
                    if let Some(spam) = &spam {
                        record = apply_spam_record(&record, spam, derive_seed(seed, 1))?;
                    }
                    let est = |post| crate::renyi::estimate_r2(&record, post);
                    (est(false)?, config.post_select.then(|| est(true)).transpose()?)
                }
            };
            Ok(vec![
                num(s.u),
                json!(s.method.to_string()),
                opt_num(raw.r2),
                opt_num(post.and_then(|p| p.r2)),
                num(post.map_or(1.0, |p| p.yield_fraction)),
                opt_num(raw.std_err),
                opt_num(post.and_then(|p| p.std_err)),
                num(subsystem_purity(&prepare_state(s)?)),
                num(exact_r2(HubbardParams::new(s.u))?),
            ])
        })
        .collect::<CliResult<_>>()?;
    let table = Table {
        columns: vec![
            "U",
            "method",
            "r2_raw",
            "r2_post",
            "yield",
            "std_err_raw",
            "std_err_post",
            "r2_trotter",
            "r2_exact",
        ],
        rows,
        summary: None,
    };
    emit(&render(&config, &table, config.format)?, out.as_deref(), stdout)
}

#[derive(Debug, Serialize)]
struct ScanConfig {
    command: &'static str,
    vary: &'static str,
    metric: &'static str,
    values: Vec<f64>,
    fixed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<UGrid>,
    format: Format,
}

fn cmd_scan(args: &ScanArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let file = RunConfig::load(args.common.config.as_deref())?;
    let vary = match args.vary {
        VaryArg::Tau => ScanParameter::Tau,
        VaryArg::Delta => ScanParameter::Delta,
    };
    let depth = matches!(args.metric, MetricArg::Depth);
    let values = match &args.values {
        Some(s) => parse_values(s)?,
        None => match (vary, depth) {
            (ScanParameter::Tau, false) => EPSILON_TAU_WINDOW.to_vec(),
            (ScanParameter::Delta, false) => EPSILON_DELTA_WINDOW.to_vec(),
            (ScanParameter::Tau, true) => REFERENCE_TAU_GRID.to_vec(),
            (ScanParameter::Delta, true) => REFERENCE_DELTA_GRID.to_vec(),
        },
    };
    let fixed = args.fixed.unwrap_or(match vary {
        ScanParameter::Tau => DEFAULT_FIXED_DELTA,
        ScanParameter::Delta => DEFAULT_FIXED_TAU,
    });
    let grid = {
        let g = parse_values(&args.grid)?;
        let [start, .., stop] = g[..] else {
            return Err(CliError::Usage("--grid needs start:stop:step".into()));
        };
        let step = if g.len() > 1 { g[1] - g[0] } else { 1.0 };
        UGrid { start, stop, step }
    };
    let (metric_name, points): (&'static str, Vec<ScalingPoint>) = match args.metric {
        MetricArg::R2 => ("epsilon_r2", epsilon_scan(Metric::EpsilonR2, vary, &values, fixed, &grid)?),
        MetricArg::Psi => ("epsilon_psi", epsilon_scan(Metric::EpsilonPsi, vary, &values, fixed, &grid)?),
        MetricArg::Depth => ("depth", depth_scan(vary, &values, fixed)?),
    };
    let fit = loglog_fit(&points).ok();
    let config = ScanConfig {
        command: "scan",
        vary: vary.name(),
        metric: metric_name,
        values,
        fixed,
        grid: (!depth).then_some(grid),
        format: args.common.format.or(file.format).unwrap_or(Format::Csv),
    };
    let table = Table {
        columns: vec!["param_name", "param_value", "metric_name", "metric_value"],
        rows: points
            .iter()
            .map(|p| vec![json!(vary.name()), num(p.parameter), json!(metric_name), num(p.value)])
            .collect(),
        summary: Some(fit.map_or(Value::Null, |f| json!(f))),
    };
    emit(&render(&config, &table, config.format)?, args.common.out.as_deref().or(file.out.as_deref()), stdout)
}

/// One gate per line: `name q… [angle…]`; blank lines and `#` comments ignored.
pub fn parse_circuit_text(text: &str) -> crate::error::Result<Circuit> {
    let mut gates = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| SimError::Parse(format!("line {}: {msg}", lineno + 1));
        let mut tokens = line.split_whitespace();
        let name = tokens.next().unwrap_or_default();
        let kind = GateKind::parse(name).ok_or_else(|| bad(format!("unknown gate {name:?}")))?;
        let rest: Vec<&str> = tokens.collect();
        if rest.len() < kind.arity() {
            return Err(bad(format!("{kind} needs {} qubit(s)", kind.arity())));
        }
        let qubits: Vec<usize> = rest[..kind.arity()]
            .iter()
            .map(|t| t.parse().map_err(|_| bad(format!("bad qubit index {t:?}"))))
            .collect::<Result<_, _>>()?;
        let angles: Vec<f64> = rest[kind.arity()..]
            .iter()
            .map(|t| t.parse().map_err(|_| bad(format!("bad angle {t:?}"))))
            .collect::<Result<_, _>>()?;
        gates.push(Gate::from_parts(kind, &qubits, &angles).map_err(|e| bad(e.to_string()))?);
    }
    let width = gates.iter().flat_map(|g| g.qubits()).max().map_or(1, |q| q + 1);
    Circuit::from_gates(width, gates)
}

#[derive(Debug, Serialize)]
struct CompileConfig {
    command: &'static str,
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<Value>,
    signs: [i32; 3],
}

fn gate_line(g: &Gate) -> Value {
    let angles = g.angles();
    let mut v = json!({ "kind": g.kind().name(), "qubits": g.qubits(), "angle": angles.first().copied().map_or(Value::Null, num) });
    if let Gate::R { phi, .. } = g {
        v["phi"] = num(*phi);
    }
    v
}

fn cmd_compile(args: &CompileArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let signs = SignParams::new(args.alpha, args.beta, args.gamma)?;
    let (circuit, source, schedule) = if let Some(name) = &args.gate {
        let kind = GateKind::parse(name).ok_or_else(|| CliError::Runtime(format!("unknown gate {name:?}")))?;
        let qubits = args.qubits.clone().unwrap_or_else(|| (0..kind.arity()).collect());
        let angles = args.angles.clone().unwrap_or_default();
        let gate = Gate::from_parts(kind, &qubits, &angles)?;
        let width = qubits.iter().max().map_or(1, |q| q + 1);
        (Circuit::from_gates(width, [gate])?, format!("gate {}", gate), None)
    } else if let Some(path) = &args.circuit {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read circuit file {}: {e}", path.display())))?;
        (parse_circuit_text(&text)?, format!("file {}", path.display()), None)
    } else if let Some(method) = args.method {
        let u = args.u.ok_or_else(|| CliError::Usage("--method needs --U".into()))?;
        let schedule = match method {
            Method::I if args.delta.is_none() && args.tau.is_none() => TrotterSchedule::preset(Method::I, u)?,
            Method::I => TrotterSchedule::method_i_rounded(
                u,
                args.delta.unwrap_or(METHOD_I_PRESET_DELTA),
                args.tau.unwrap_or(METHOD_I_PRESET_TAU),
            )?,
            Method::II if args.tau.is_some() => {
                return Err(CliError::Runtime("method II fixes τ = 5δ/U; --tau is only valid for method I".into()))
            }
            Method::II => TrotterSchedule::method_ii(u, args.delta.unwrap_or(METHOD_II_PRESET_DELTA))?,
        };
        let fh = args.final_hadamards.unwrap_or(true);
        let info = json!({ "method": method.to_string(), "U": u, "delta": schedule.delta, "n_steps": schedule.n_steps, "final_hadamards": fh });
        (build_swap_test_circuit(&schedule, fh)?, "swap-test circuit".to_string(), Some(info))
    } else {
        return Err(CliError::Usage("compile needs a gate name, --circuit <file> or --method with --U".into()));
    };

    let lowered = lower_circuit(&circuit, signs)?;
    let residual =
        if circuit.num_qubits() <= MAX_VERIFY_QUBITS { Some(verify_lowering(&circuit, &lowered)?) } else { None };
    let config = CompileConfig { command: "compile", source, schedule, signs: [args.alpha, args.beta, args.gamma] };
    let mut text =
        format!("# config: {}\n", serde_json::to_string(&config).map_err(|e| CliError::Runtime(e.to_string()))?);
    for g in lowered.native_circuit.gates() {
        text.push_str(&format!("{}\n", gate_line(g)));
    }
    let summary = json!({ "summary": {
        "num_qubits": circuit.num_qubits(),
        "logical_gates": circuit.len(),
        "entangling": lowered.entangling_count,
        "single_qubit": lowered.single_qubit_count,
        "rz": lowered.native_circuit.count_kind(GateKind::Rz),
        "depth": lowered.depth,
        "residual": opt_num(residual),
    }});
    text.push_str(&format!("{summary}\n"));
    emit(&text, args.common.out.as_deref(), stdout)?;
    match residual {
        Some(r) if r > VERIFY_TOLERANCE => {
            Err(CliError::Runtime(format!("lowering verification failed: residual {r:e} > {VERIFY_TOLERANCE:e}")))
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct TruthTableConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spam: Option<PathBuf>,
    seed: u64,
    signs: [i32; 3],
    format: Format,
}

fn cmd_truthtable(args: &TruthTableArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let file = RunConfig::load(args.common.config.as_deref())?;
    let signs = SignParams::new(args.alpha, args.beta, args.gamma)?;
    let noise = resolve_noise(&args.noise, &file)?;
    let seed = args.common.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let shots = noise.map(|_| args.shots.or(file.shots).unwrap_or(DEFAULT_NOISY_SHOTS));
    let spam_path = args.noise.spam.clone().or(file.spam.clone());
    let spam = load_spam(spam_path.as_deref())?;
    let model = noise.map(|n| NoiseModel { p1: n.p1, p2: n.p2, seed });
    let mut table = cswap_truth_table(model.as_ref(), shots.unwrap_or(0), signs)?;
    if let Some(spam) = &spam {
        spam.check_qubits(3)?;
        for row in table.probs.iter_mut() {
            let read = apply_spam(row, spam)?;
            row.copy_from_slice(&read);
        }
    }
    let config = TruthTableConfig {
        command: "truthtable",
        noise,
        shots,
        spam: spam_path,
        seed,
        signs: [args.alpha, args.beta, args.gamma],
        format: args.common.format.or(file.format).unwrap_or(Format::Csv),
    };
    let bits = |i: usize| format!("{i:03b}");
    let rows = (0..8)
        .flat_map(|i| (0..8).map(move |o| (i, o)))
        .map(|(i, o)| vec![json!(bits(i)), json!(bits(o)), num(table.probs[i][o])])
        .collect();
    let out = Table {
        columns: vec!["input", "output", "probability"],
        rows,
        summary: Some(json!({
            "average_success": table.average_success(),
            "control_correctness": table.control_correctness(),
        })),
    };
    emit(&render(&config, &out, config.format)?, args.common.out.as_deref().or(file.out.as_deref()), stdout)
}

#[derive(Debug, Serialize)]
struct AnalyzeConfig {
    command: &'static str,
    files: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spam: Option<PathBuf>,
    post_select: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_basis: Option<PathBuf>,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    u: Option<f64>,
    format: Format,
}

/// Distribution of a record after optional readout correction.
fn corrected_distribution(record: &ShotRecord, spam: Option<&SpamModel>) -> CliResult<Vec<f64>> {
    let freqs = record.frequencies()?;
    Ok(match spam {
        Some(s) => correct_spam(&freqs, s)?,
        None => freqs,
    })
}

/// `(⟨Z₁⟩, ⟨Z₂⟩, ⟨Z₁Z₂⟩)` of a two-qubit distribution.
fn parities(probs: &[f64]) -> (f64, f64, f64) {
    let sign = |b: bool| if b { -1.0 } else { 1.0 };
    probs.iter().enumerate().fold((0.0, 0.0, 0.0), |(a, b, c), (o, p)| {
        let (b0, b1) = (o & 2 != 0, o & 1 != 0);
        (a + sign(b0) * p, b + sign(b1) * p, c + sign(b0 ^ b1) * p)
    })
}

fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let file = RunConfig::load(args.common.config.as_deref())?;
    let spam_path = args.spam.clone().or(file.spam.clone());
    let spam = load_spam(spam_path.as_deref())?;
    let post_select = args.post_select.or(file.post_select).unwrap_or(true);
    let mut rows = Vec::new();
    let mut z_parities = None;
    for path in &args.files {
        let record = ShotRecord::load(path)?;
        if let Some(s) = &spam {
            s.check_qubits(record.num_qubits())?;
        }
        let shots = record.total_shots() as f64;
        let probs = corrected_distribution(&record, spam.as_ref())?;
        let name = json!(path.display().to_string());
        match record.num_qubits() {
            5 => {
                let weights: Vec<f64> = probs.iter().map(|p| p * shots).collect();
                let raw = estimate_r2_from_weights(&weights, false)?;
                let post = post_select.then(|| estimate_r2_from_weights(&weights, true)).transpose()?;
                let defined = post.map_or(raw.is_defined(), |p| p.is_defined());
                rows.push(vec![
                    name,
                    json!(5),
                    json!(record.total_shots()),
                    num(post.map_or(1.0, |p| p.yield_fraction)),
                    opt_num(raw.r2),
                    opt_num(post.and_then(|p| p.r2)),
                    opt_num(raw.std_err),
                    opt_num(post.and_then(|p| p.std_err)),
                    json!(defined),
                    Value::Null,
                    Value::Null,
                    Value::Null,
                ]);
            }
            2 => {
                let (z1, z2, zz) = parities(&probs);
                z_parities = Some((z1, z2, zz));
                let mut row = vec![name, json!(2), json!(record.total_shots())];
                row.extend(std::iter::repeat_n(Value::Null, 6));
                row.extend([num(z1), num(z2), num(zz)]);
                rows.push(row);
            }
            n => {
                return Err(CliError::Runtime(format!(
                    "{}: expected a 5-qubit swap-test or 2-qubit energy record, got {n} qubits",
                    path.display()
                )))
            }
        }
    }
    let summary = match (&args.x_basis, args.u) {
        (Some(xpath), Some(u)) => {
            let (Some((_, _, zz)), [_]) = (z_parities, args.files.as_slice()) else {
                return Err(CliError::Runtime("--x-basis pairs with exactly one two-qubit Z-basis record".into()));
            };
            let xrec = ShotRecord::load(xpath)?;
            if xrec.num_qubits() != 2 {
                return Err(CliError::Runtime(format!("{}: X-basis record must have 2 qubits", xpath.display())));
            }
            if let Some(s) = &spam {
                s.check_qubits(2)?;
            }
            let (x1, x2, _) = parities(&corrected_distribution(&xrec, spam.as_ref())?);
            Some(
                json!({ "U": u, "x1": x1, "x2": x2, "z1z2": zz, "h_expect": -(x1 + x2) + u / 2.0 * zz, "h_exact": ground_energy(u) }),
            )
        }
        _ => None,
    };
    let config = AnalyzeConfig {
        command: "analyze",
        files: args.files.clone(),
        spam: spam_path,
        post_select,
        x_basis: args.x_basis.clone(),
        u: args.u,
        format: args.common.format.or(file.format).unwrap_or(Format::Csv),
    };
    let table = Table {
        columns: vec![
            "file",
            "num_qubits",
            "shots",
            "yield",
            "r2_raw",
            "r2_post",
            "std_err_raw",
            "std_err_post",
            "r2_defined",
            "z1",
            "z2",
            "z1z2",
        ],
        rows,
        summary,
    };
    emit(&render(&config, &table, config.format)?, args.common.out.as_deref().or(file.out.as_deref()), stdout)
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Evolve(a) => cmd_evolve(a, stdout),
        Command::Renyi(a) => cmd_renyi(a, stdout),
        Command::Scan(a) => cmd_scan(a, stdout),
        Command::Compile(a) => cmd_compile(a, stdout),
        Command::Truthtable(a) => cmd_truthtable(a, stdout),
        Command::Analyze(a) => cmd_analyze(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nRun `renyi-sim --help` for usage.");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("1,2.5, 3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_values("0:6:1").unwrap().len(), 7);
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn circuit_text() {
        let c = parse_circuit_text("# bell\nh 0\ncnot 0 1\nrz 1 0.5  # phase\n\nR 2 0.1 -0.3\n").unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.len(), 4);
        assert!(parse_circuit_text("foo 0").is_err());
        assert!(parse_circuit_text("rx 0").is_err());
        assert!(parse_circuit_text("cnot 0 0").is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field(&json!("a,b")), "\"a,b\"");
        assert_eq!(csv_field(&Value::Null), "");
        assert_eq!(csv_field(&num(0.5)), "0.5");
    }
}
