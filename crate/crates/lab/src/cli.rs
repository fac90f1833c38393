//! The `tmbqc` command line.
//!
//! Settings resolve in three layers: built-in defaults, then the JSON object
//! given by `--config`, then explicit flags. The resolved settings (seed
//! included) head every output as a `# config: {...}` comment. `out` and
//! `workers` may also come from the config file but are not recorded, since
//! they do not affect results.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use thermal_mbqc::exact::{critical_temperature_2d, even_row_correlation, IsingParams, RowCorrelatorSpec};
use thermal_mbqc::fidelity::{FidelityOptions, GateSpec, Model as FidelityModel, Provenance, Reading};
use thermal_mbqc::lattice::{CubicClusterGraph, ErrorChain, Graph, RhgComplex, SquareLattice};
use thermal_mbqc::mc::{sample_correlators, Branch, McSchedule, McWarning};
use thermal_mbqc::rng::{derive_seed, stream};
use thermal_mbqc::tqec::{
    decode_verdict, extract_syndrome, free_energy_decode, mwpm_decode, sample_fch_errors, ErrorSampler, FreeEnergyOptions,
};

use crate::error::{LabError, LabResult};
use crate::experiments::{
    derivative_peak, estimate_threshold, fidelity_table, nishimori_check, run_logical_error_experiment, tc_estimate,
    ExperimentConfig, Model, NishimoriConfig,
};
use crate::fixtures::{Fixture, FixtureKind};
use crate::format::{parse_range, sig};
use crate::output::{csv_text, emit_results, ensure_dir, fidelity_plot, result_csv, write_file, Format, Plot, Series, Table};

#[derive(Debug, Parser)]
#[command(name = "tmbqc", version, about = "Thermal cluster-state MBQC: correlators, gate fidelities and topological error correction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Even-body square-lattice row correlator as an exact determinant.
    ExactCorr(ExactCorrArgs),
    /// Symmetry-broken row correlator by Metropolis sampling.
    IsingMc(IsingMcArgs),
    /// Critical temperature from Binder-cumulant crossings (exchange MC).
    TcEstimate(TcArgs),
    /// Identity/Hadamard gate fidelity against temperature.
    Fidelity(FidelityArgs),
    /// Draw thermal error chains on the RHG lattice.
    TqecSample(SampleArgs),
    /// Decode a syndrome or chain fixture.
    Decode(DecodeArgs),
    /// MWPM logical-error sweep and threshold crossing.
    Threshold(ThresholdArgs),
    /// cRPGM internal energy on the Nishimori line against the Ising energy.
    NishimoriCheck(NishimoriArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON file with settings; explicit flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed (64-bit) [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory [default: print to stdout].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Temperature or β grid: `start:stop:step` or a comma list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(text: &str) -> Result<Grid, String> {
    let values = if text.contains(':') {
        parse_range(text)
    } else {
        crate::format::parse_list::<f64>(text)
    };
    match values {
        Ok(v) if !v.is_empty() => Ok(Grid(v)),
        Ok(_) => Err("empty grid".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GateArg {
    Identity,
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FidelityModelArg {
    Fch,
    Ich,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReadingArg {
    Resolved,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LatticeArg {
    /// Periodic L × L square lattice.
    Square,
    /// Qubit graph of the periodic RHG lattice of size N.
    Rhg,
    /// Periodic N × N × N simple-cubic lattice.
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    /// Flip to the positive branch whenever the magnetization is negative.
    Flip,
    /// Keep whatever branch the all-up start falls into.
    Initial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecoderArg {
    Mwpm,
    /// Free-energy comparison of homology classes (cRPGM thermodynamic integration).
    Fe,
}

// Flag structs: every field optional so that unset flags leave the config
// file and defaults in place.

#[derive(Debug, Args, Serialize)]
pub struct ExactCorrArgs {
    /// Row positions, strictly increasing, even count [default: 1,2].
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    positions: Option<Vec<i64>>,
    /// Temperatures (start:stop:step or a list) [default: 2.0].
    #[arg(long = "temps", visible_alias = "temp", value_parser = parse_grid)]
    temperatures: Option<Grid>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactCorrSettings {
    pub positions: Vec<i64>,
    pub temperatures: Vec<f64>,
    pub seed: u64,
}

impl Default for ExactCorrSettings {
    fn default() -> Self {
        Self {
            positions: vec![1, 2],
            temperatures: vec![2.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IsingMcArgs {
    /// Side of the periodic square lattice [default: 150].
    #[arg(long)]
    lattice: Option<usize>,
    /// Row positions (columns of row 0) [default: 1].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    positions: Option<Vec<usize>>,
    /// Temperatures [default: 2.0].
    #[arg(long = "temps", visible_alias = "temp", value_parser = parse_grid)]
    temperatures: Option<Grid>,
    /// Discarded sweeps [default: 1500].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Measured samples [default: 100000].
    #[arg(long)]
    measurement: Option<usize>,
    /// Sweeps between samples [default: 1].
    #[arg(long)]
    thinning: Option<usize>,
    /// Branch rule [default: flip].
    #[arg(long)]
    branch: Option<BranchArg>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingMcSettings {
    pub lattice: usize,
    pub positions: Vec<usize>,
    pub temperatures: Vec<f64>,
    pub equilibration: usize,
    pub measurement: usize,
    pub thinning: usize,
    pub branch: BranchArg,
    pub seed: u64,
}

impl Default for IsingMcSettings {
    fn default() -> Self {
        Self {
            lattice: 150,
            positions: vec![1],
            temperatures: vec![2.0],
            equilibration: 1500,
            measurement: 100_000,
            thinning: 1,
            branch: BranchArg::Flip,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TcArgs {
    /// Lattice family [default: square].
    #[arg(long)]
    lattice: Option<LatticeArg>,
    /// System sizes (L or N) [default: 8,16].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    sizes: Option<Vec<usize>>,
    /// Temperature ladder [default: 2.0:2.6:0.05].
    #[arg(long = "temps", value_parser = parse_grid)]
    temperatures: Option<Grid>,
    /// Discarded sweeps [default: 2000].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Measured sweeps [default: 20000].
    #[arg(long)]
    measurement: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcSettings {
    pub lattice: LatticeArg,
    pub sizes: Vec<usize>,
    pub temperatures: Vec<f64>,
    pub equilibration: usize,
    pub measurement: usize,
    pub seed: u64,
}

impl Default for TcSettings {
    fn default() -> Self {
        Self {
            lattice: LatticeArg::Square,
            sizes: vec![8, 16],
            temperatures: parse_range("2.0:2.6:0.05").expect("valid default"),
            equilibration: 2000,
            measurement: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FidelityArgs {
    /// Gate [default: hadamard].
    #[arg(long)]
    gate: Option<GateArg>,
    /// Thermal model [default: fch].
    #[arg(long)]
    model: Option<FidelityModelArg>,
    /// Gate distance l [default: 2].
    #[arg(long)]
    l: Option<usize>,
    /// Temperatures [default: 0.1:5.0:0.1].
    #[arg(long = "temps", value_parser = parse_grid)]
    temperatures: Option<Grid>,
    /// Stabilizer-set reading [default: resolved].
    #[arg(long)]
    reading: Option<ReadingArg>,
    /// Add a dF/dT column (central differences).
    #[arg(long)]
    derivative: bool,
    /// Square-lattice side for odd-body Monte Carlo [default: 150].
    #[arg(long)]
    lattice: Option<usize>,
    /// Discarded sweeps for odd-body Monte Carlo [default: 1500].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Samples for odd-body Monte Carlo [default: 100000].
    #[arg(long)]
    measurement: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelitySettings {
    pub gate: GateArg,
    pub model: FidelityModelArg,
    pub l: usize,
    pub temperatures: Vec<f64>,
    pub reading: ReadingArg,
    pub derivative: bool,
    pub lattice: usize,
    pub equilibration: usize,
    pub measurement: usize,
    pub seed: u64,
}

impl Default for FidelitySettings {
    fn default() -> Self {
        Self {
            gate: GateArg::Hadamard,
            model: FidelityModelArg::Fch,
            l: 2,
            temperatures: parse_range("0.1:5.0:0.1").expect("valid default"),
            reading: ReadingArg::Resolved,
            derivative: false,
            lattice: 150,
            equilibration: 1500,
            measurement: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Error model [default: fch].
    #[arg(long)]
    model: Option<Model>,
    /// RHG size N [default: 4].
    #[arg(long = "n")]
    size: Option<usize>,
    /// Temperature [default: 0.5].
    #[arg(long = "temp")]
    temperature: Option<f64>,
    /// Number of chains [default: 1].
    #[arg(long)]
    samples: Option<usize>,
    /// Sweeps before the first correlated draw [default: 500].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Sweeps between correlated draws [default: 5].
    #[arg(long)]
    thinning: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSettings {
    pub model: Model,
    pub size: usize,
    pub temperature: f64,
    pub samples: usize,
    pub equilibration: usize,
    pub thinning: usize,
    pub seed: u64,
}

impl Default for SampleSettings {
    fn default() -> Self {
        Self {
            model: Model::Fch,
            size: 4,
            temperature: 0.5,
            samples: 1,
            equilibration: 500,
            thinning: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    /// Syndrome or chain fixture.
    #[arg(long = "in", value_name = "PATH")]
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    /// Decoder [default: mwpm].
    #[arg(long)]
    decoder: Option<DecoderArg>,
    /// Temperature of the free-energy decoder [default: 1.0].
    #[arg(long = "temp")]
    temperature: Option<f64>,
    /// β-ladder points of the free-energy decoder [default: 21].
    #[arg(long)]
    ladder: Option<usize>,
    /// Discarded sweeps per ladder point [default: 200].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Measured sweeps per ladder point [default: 1000].
    #[arg(long)]
    measurement: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeSettings {
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub decoder: DecoderArg,
    pub temperature: f64,
    pub ladder: usize,
    pub equilibration: usize,
    pub measurement: usize,
    pub seed: u64,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        Self {
            input: None,
            decoder: DecoderArg::Mwpm,
            temperature: 1.0,
            ladder: 21,
            equilibration: 200,
            measurement: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    /// Error model [default: fch].
    #[arg(long)]
    model: Option<Model>,
    /// RHG sizes [default: 6,8,10,12].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    sizes: Option<Vec<usize>>,
    /// Temperatures [default: per model].
    #[arg(long = "temps", value_parser = parse_grid)]
    temperatures: Option<Grid>,
    /// Trials per point [default: 10000].
    #[arg(long)]
    trials: Option<usize>,
    /// Sweeps before the first correlated draw [default: 500].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Sweeps between correlated draws [default: 5].
    #[arg(long)]
    thinning: Option<usize>,
    /// Trials per correlated chain [default: 250].
    #[arg(long)]
    batch: Option<usize>,
    /// Abort a point beyond this fraction of warned trials [default: 0.5].
    #[arg(long)]
    max_warning_fraction: Option<f64>,
    /// Record wall time per point (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Vertical marker of the plot [default: the estimated threshold].
    #[arg(long)]
    critical_temperature: Option<f64>,
    /// Files written to --out [default: csv,json,svg].
    #[arg(long, value_delimiter = ',', num_args = 1)]
    formats: Option<Vec<Format>>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSettings {
    pub model: Model,
    pub sizes: Vec<usize>,
    /// `None` selects the model's default grid.
    pub temperatures: Option<Vec<f64>>,
    pub trials: usize,
    pub equilibration: usize,
    pub thinning: usize,
    pub batch: usize,
    pub max_warning_fraction: f64,
    pub timing: bool,
    pub critical_temperature: Option<f64>,
    pub formats: Vec<Format>,
    pub seed: u64,
}

impl Default for ThresholdSettings {
    fn default() -> Self {
        let e = ExperimentConfig::new(Model::Fch);
        Self {
            model: e.model,
            sizes: e.sizes,
            temperatures: None,
            trials: e.trials,
            equilibration: e.equilibration,
            thinning: e.thinning,
            batch: e.batch,
            max_warning_fraction: e.max_warning_fraction,
            timing: e.timing,
            critical_temperature: None,
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            seed: 0,
        }
    }
}

impl ThresholdSettings {
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model,
            sizes: self.sizes.clone(),
            temperatures: self.temperatures.clone().unwrap_or_else(|| self.model.default_temperatures()),
            trials: self.trials,
            seed: self.seed,
            equilibration: self.equilibration,
            thinning: self.thinning,
            batch: self.batch,
            max_warning_fraction: self.max_warning_fraction,
            timing: self.timing,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct NishimoriArgs {
    /// RHG size N [default: 4].
    #[arg(long = "n")]
    size: Option<usize>,
    /// Inverse temperatures [default: 0.3,0.45,0.6].
    #[arg(long, value_parser = parse_grid)]
    betas: Option<Grid>,
    /// Disorder samples per β [default: 400].
    #[arg(long)]
    samples: Option<usize>,
    /// Discarded sweeps [default: 500].
    #[arg(long)]
    equilibration: Option<usize>,
    /// Gauge-chain sweeps per disorder sample [default: 2000].
    #[arg(long)]
    measurement: Option<usize>,
    /// Sweeps of the reference Ising run [default: 200000].
    #[arg(long)]
    ising_measurement: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

/// Output location and parallelism, never part of the recorded config.
#[derive(Debug, Clone, Default)]
pub struct Runtime {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn config_error(e: impl std::fmt::Display) -> LabError {
    LabError::Config(e.to_string())
}

/// Defaults, overlaid by the `--config` object, overlaid by the set flags.
pub fn resolve<R: Serialize + DeserializeOwned + Default>(flags: &impl Serialize, common: &Common) -> LabResult<(R, Runtime)> {
    let mut merged = match serde_json::to_value(R::default()).map_err(config_error)? {
        Value::Object(m) => m,
        _ => unreachable!("settings are structs"),
    };
    let mut runtime = Runtime::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| LabError::parse(path, e.to_string()))?;
        let Value::Object(mut file) = file else {
            return Err(LabError::parse(path, "config must be a JSON object"));
        };
        if let Some(out) = file.remove("out") {
            let out = out.as_str().ok_or_else(|| LabError::parse(path, "'out' must be a string"))?;
            runtime.out = Some(PathBuf::from(out));
        }
        if let Some(w) = file.remove("workers") {
            let w = w.as_u64().ok_or_else(|| LabError::parse(path, "'workers' must be a positive integer"))?;
            runtime.workers = Some(w as usize);
        }
        for (k, v) in file {
            if !merged.contains_key(&k) {
                return Err(LabError::parse(path, format!("unknown key '{k}'")));
            }
            merged.insert(k, v);
        }
    }
    if let Value::Object(flags) = serde_json::to_value(flags).map_err(config_error)? {
        for (k, v) in flags {
            if !(v.is_null() || v == Value::Bool(false)) {
                merged.insert(k, v);
            }
        }
    }
    if let Some(seed) = common.seed {
        merged.insert("seed".into(), json!(seed));
    }
    if common.out.is_some() {
        runtime.out = common.out.clone();
    }
    if common.workers.is_some() {
        runtime.workers = common.workers;
    }
    if runtime.workers == Some(0) {
        return Err(LabError::Config("--workers must be positive".into()));
    }
    let settings = serde_json::from_value(Value::Object(merged)).map_err(config_error)?;
    Ok((settings, runtime))
}

/// Where a command's text goes: a file under `--out` or stdout.
struct Sink<'a> {
    out: Option<&'a Path>,
    stdout: Vec<u8>,
}

impl Sink<'_> {
    fn emit(&mut self, name: &str, text: &str) -> LabResult<()> {
        match self.out {
            Some(dir) => {
                ensure_dir(dir)?;
                write_file(&dir.join(name), text)
            }
            None => {
                self.stdout.extend_from_slice(text.as_bytes());
                Ok(())
            }
        }
    }

    /// Extra files only exist with `--out`.
    fn emit_file(&mut self, name: &str, text: &str) -> LabResult<()> {
        if self.out.is_some() {
            self.emit(name, text)?;
        }
        Ok(())
    }
}

fn config_value(settings: &impl Serialize) -> Value {
    serde_json::to_value(settings).expect("settings serialise")
}

fn warning_text(w: &Option<McWarning>) -> String {
    match w {
        None => String::new(),
        Some(McWarning::LongAutocorrelation { tau_int, .. }) => format!("tau_int={}", sig(*tau_int)),
        Some(McWarning::LowSwapAcceptance { pair, rate }) => format!("swap{pair}={}", sig(*rate)),
    }
}

fn warnings_json(ws: &[McWarning]) -> Value {
    Value::Array(
        ws.iter()
            .map(|w| match w {
                McWarning::LongAutocorrelation { index, tau_int } => json!({"long_autocorrelation": {"index": index, "tau_int": tau_int}}),
                McWarning::LowSwapAcceptance { pair, rate } => json!({"low_swap_acceptance": {"pair": pair, "rate": rate}}),
            })
            .collect(),
    )
}

fn check_temperatures(ts: &[f64]) -> LabResult<()> {
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(LabError::Config("temperatures must be nonempty, positive and finite".into()));
    }
    Ok(())
}

fn exact_corr(s: &ExactCorrSettings, sink: &mut Sink) -> LabResult<()> {
    check_temperatures(&s.temperatures)?;
    let spec = RowCorrelatorSpec::new(s.positions.clone())?;
    let params: Vec<IsingParams> = s.temperatures.iter().map(|&t| IsingParams::at_temperature(t)).collect::<Result<_, _>>()?;
    let values = params.par_iter().map(|p| even_row_correlation(&spec, p)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["T", "value"]);
    for (t, v) in s.temperatures.iter().zip(values) {
        table.push(vec![sig(*t), sig(v)]);
    }
    sink.emit("exact_corr.csv", &csv_text(&[("config", &config_value(s))], &table))
}

fn ising_mc(s: &IsingMcSettings, sink: &mut Sink) -> LabResult<()> {
    check_temperatures(&s.temperatures)?;
    let lattice = SquareLattice::new(s.lattice, s.lattice)?;
    if s.positions.is_empty() || s.positions.iter().any(|&p| p >= s.lattice) {
        return Err(LabError::Config(format!("positions must be nonempty and below the lattice side {}", s.lattice)));
    }
    let sites: Vec<usize> = s.positions.iter().map(|&p| lattice.site(0, p)).collect();
    let branch = match s.branch {
        BranchArg::Flip => Branch::FlipToPositive,
        BranchArg::Initial => Branch::InitialOnly,
    };
    let schedule = McSchedule::new(s.equilibration, s.measurement, s.seed)
        .with_thinning(s.thinning)
        .with_branch(branch);
    schedule.validate()?;
    let params: Vec<IsingParams> = s.temperatures.iter().map(|&t| IsingParams::at_temperature(t)).collect::<Result<_, _>>()?;
    let estimates = params
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let sch = schedule.with_seed(derive_seed(s.seed, &[k as u64]));
            sample_correlators(lattice.graph(), &[sites.clone()], p, &sch).map(|e| e[0])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["T", "mean", "error", "tau_int", "warning"]);
    for (t, e) in s.temperatures.iter().zip(&estimates) {
        table.push(vec![sig(*t), sig(e.mean), sig(e.error), sig(e.tau_int), warning_text(&e.warning)]);
    }
    sink.emit("ising_mc.csv", &csv_text(&[("config", &config_value(s))], &table))
}

fn tc(s: &TcSettings, sink: &mut Sink) -> LabResult<()> {
    check_temperatures(&s.temperatures)?;
    if s.sizes.len() < 2 {
        return Err(LabError::Config("tc-estimate needs at least two sizes".into()));
    }
    let schedule = McSchedule::new(s.equilibration, s.measurement, s.seed);
    schedule.validate()?;
    let graphs: Vec<Graph> = s
        .sizes
        .iter()
        .map(|&n| -> LabResult<Graph> {
            Ok(match s.lattice {
                LatticeArg::Square => SquareLattice::new(n, n)?.into_graph(),
                LatticeArg::Rhg => RhgComplex::new(n)?.qubit_graph().clone(),
                LatticeArg::Cubic => CubicClusterGraph::new(n)?.graph().clone(),
            })
        })
        .collect::<LabResult<_>>()?;
    let refs: Vec<&Graph> = graphs.iter().collect();
    let est = tc_estimate(&refs, &s.temperatures, &schedule)?;
    let mut table = Table::new(["sites", "T", "U", "U_err"]);
    for c in &est.curves {
        for k in 0..c.temperatures.len() {
            table.push(vec![c.sites.to_string(), sig(c.temperatures[k]), sig(c.u[k]), sig(c.error[k])]);
        }
    }
    let summary = json!({
        "tc": est.tc,
        "ci": [est.ci.0, est.ci.1],
        "crossings": est.crossings.iter().map(|((a, b), x)| json!([a, b, x])).collect::<Vec<_>>(),
        "warnings": warnings_json(&est.warnings),
    });
    let config = config_value(s);
    sink.emit("tc.csv", &csv_text(&[("config", &config), ("tc", &summary)], &table))?;
    let plot = Plot {
        title: format!("Binder cumulant ({:?} lattice)", s.lattice).to_lowercase(),
        x_label: "T".into(),
        y_label: "U".into(),
        series: est
            .curves
            .iter()
            .map(|c| Series {
                label: format!("{} sites", c.sites),
                points: (0..c.u.len()).map(|k| (c.temperatures[k], c.u[k], c.error[k])).collect(),
            })
            .collect(),
        vlines: vec![(est.tc, format!("Tc = {}", sig(est.tc)))],
        hlines: Vec::new(),
    };
    sink.emit_file("tc.svg", &plot.render())
}

fn fidelity(s: &FidelitySettings, sink: &mut Sink) -> LabResult<()> {
    check_temperatures(&s.temperatures)?;
    if s.derivative && s.temperatures.len() < 3 {
        return Err(LabError::Config("--derivative needs at least three temperatures".into()));
    }
    let reading = match s.reading {
        ReadingArg::Resolved => Reading::Resolved,
        ReadingArg::Literal => Reading::Literal,
    };
    let spec = match s.gate {
        GateArg::Identity => GateSpec::identity(s.l)?,
        GateArg::Hadamard => GateSpec::hadamard(s.l)?,
    }
    .with_reading(reading);
    let model = match s.model {
        FidelityModelArg::Fch => FidelityModel::Fch,
        FidelityModelArg::Ich => FidelityModel::Ich,
    };
    let options = FidelityOptions {
        lattice: s.lattice,
        schedule: McSchedule::new(s.equilibration, s.measurement, s.seed),
    };
    options.schedule.validate()?;
    let (points, derivative) = fidelity_table(&spec, &s.temperatures, model, &options)?;
    let prov = |p: Provenance| match p {
        Provenance::Exact => "exact",
        Provenance::MonteCarlo => "mc",
        Provenance::SymmetricZero => "zero",
    };
    let mut header = vec!["T", "F", "stderr", "c_x", "c_z", "c_xz", "prov_x", "prov_z", "prov_xz"];
    if s.derivative {
        header.push("dF_dT");
    }
    let mut table = Table::new(header);
    for (k, p) in points.iter().enumerate() {
        let mut row = vec![sig(p.temperature), sig(p.fidelity), sig(p.error)];
        row.extend(p.correlators.iter().map(|c| sig(*c)));
        row.extend(p.provenance.iter().map(|&q| prov(q).to_string()));
        if s.derivative {
            row.push(sig(derivative.as_ref().expect("three or more points")[k]));
        }
        table.push(row);
    }
    let mut comments = vec![("config", config_value(s))];
    if let Some(d) = derivative.as_ref().filter(|_| s.derivative) {
        comments.push(("derivative_peak", json!(derivative_peak(&s.temperatures, d))));
    }
    let warnings: Vec<McWarning> = points.iter().flat_map(|p| p.warnings.iter().copied()).collect();
    if !warnings.is_empty() {
        comments.push(("warnings", warnings_json(&warnings)));
    }
    let refs: Vec<(&str, &Value)> = comments.iter().map(|(k, v)| (*k, v)).collect();
    sink.emit("fidelity.csv", &csv_text(&refs, &table))?;
    let title = format!("{:?} gate, {:?}, l = {}", s.gate, s.model, s.l).to_lowercase();
    let series = vec![Series {
        label: format!("l = {}", s.l),
        points: points.iter().map(|p| (p.temperature, p.fidelity, p.error)).collect(),
    }];
    sink.emit_file("fidelity.svg", &fidelity_plot(&title, series, critical_temperature_2d()).render())
}

fn tqec_sample(s: &SampleSettings, sink: &mut Sink) -> LabResult<()> {
    if s.samples == 0 {
        return Err(LabError::Config("samples must be positive".into()));
    }
    let params = IsingParams::at_temperature(s.temperature)?;
    let schedule = McSchedule::new(s.equilibration, 1, s.seed).with_thinning(s.thinning);
    schedule.validate()?;
    let cubic;
    let complex;
    let (complex, chains): (&RhgComplex, Vec<ErrorChain>) = match s.model {
        Model::Fch => {
            complex = RhgComplex::new(s.size)?;
            let chains = (0..s.samples)
                .map(|k| sample_fch_errors(&complex, &params, &mut stream(s.seed, &[k as u64])))
                .collect();
            (&complex, chains)
        }
        Model::Ich => {
            complex = RhgComplex::new(s.size)?;
            let mut sampler = ErrorSampler::ich(&complex, &params, &schedule, stream(s.seed, &[0]))?;
            let chains = (0..s.samples).map(|_| sampler.next_chain()).collect();
            (&complex, chains)
        }
        Model::Sc => {
            cubic = CubicClusterGraph::new(2 * s.size)?;
            let mut sampler = ErrorSampler::sc_reduced(&cubic, &params, &schedule, stream(s.seed, &[0]))?;
            let chains = (0..s.samples).map(|_| sampler.next_chain()).collect();
            (cubic.complex(), chains)
        }
    };
    let config = config_value(s);
    let mut table = Table::new(["sample", "weight", "primal_defects", "dual_defects"]);
    for (k, chain) in chains.iter().enumerate() {
        let syndrome = extract_syndrome(complex, chain)?;
        table.push(vec![
            k.to_string(),
            chain.weight().to_string(),
            syndrome.primal.count_ones().to_string(),
            syndrome.dual.count_ones().to_string(),
        ]);
        let header = format!("# config: {}\n", serde_json::to_string(&config).expect("JSON"));
        sink.emit_file(&format!("sample_{k}.chain"), &(header.clone() + &Fixture::from_chain(complex, chain).to_text()))?;
        sink.emit_file(&format!("sample_{k}.syndrome"), &(header + &Fixture::from_syndrome(complex, &syndrome).to_text()))?;
    }
    sink.emit("samples.csv", &csv_text(&[("config", &config)], &table))
}

fn decode(s: &DecodeSettings, sink: &mut Sink) -> LabResult<()> {
    let path = s.input.as_deref().ok_or_else(|| LabError::Config("decode needs --in PATH".into()))?;
    if !(s.temperature > 0.0 && s.temperature.is_finite()) {
        return Err(LabError::Config("temperature must be positive and finite".into()));
    }
    let fe_options = FreeEnergyOptions {
        ladder: s.ladder,
        schedule: McSchedule::new(s.equilibration, s.measurement, s.seed),
    };
    fe_options.schedule.validate()?;
    if s.ladder < 2 {
        return Err(LabError::Config("ladder needs at least 2 points".into()));
    }
    let fixture = Fixture::read(path)?;
    let config = config_value(s);
    let mut comments = vec![("config", config)];
    let text = match fixture.size {
        None => Fixture {
            kind: FixtureKind::Chain,
            size: None,
            primal: Vec::new(),
            dual: Vec::new(),
        }
        .to_text(),
        Some(n) => {
            let complex = RhgComplex::new(n)?;
            let syndrome = fixture.syndrome(&complex, path)?;
            let mut correction = mwpm_decode(&complex, &syndrome)?;
            if s.decoder == DecoderArg::Fe {
                let params = IsingParams::at_temperature(s.temperature)?;
                let d = free_energy_decode(&complex, &syndrome, &correction, &params, &fe_options)?;
                comments.push((
                    "free_energy",
                    json!({
                        "chosen_class": d.chosen.0,
                        "inconclusive": d.inconclusive,
                        "beta_free_energy": d.beta_free_energy,
                        "errors": d.errors,
                        "probabilities": d.probabilities,
                        "warnings": warnings_json(&d.warnings),
                    }),
                ));
                correction = d.correction;
            }
            if fixture.kind == FixtureKind::Chain {
                let actual = fixture.chain(&complex, path)?;
                let ok = decode_verdict(&complex, &actual, &correction)?;
                comments.push(("verdict", json!(if ok { "success" } else { "failure" })));
            }
            Fixture::from_chain(&complex, &correction).to_text()
        }
    };
    let mut header = String::new();
    for (k, v) in &comments {
        let mut v = v.clone();
        crate::output::round_json(&mut v);
        header.push_str(&format!("# {k}: {}\n", serde_json::to_string(&v).expect("JSON")));
    }
    sink.emit("correction.chain", &(header + &text))
}

fn threshold(s: &ThresholdSettings, runtime: &Runtime, sink: &mut Sink) -> LabResult<()> {
    let config = s.experiment();
    config.validate_threshold()?;
    if s.critical_temperature.is_some_and(|t| !t.is_finite()) {
        return Err(LabError::Config("critical_temperature must be finite".into()));
    }
    let mut table = run_logical_error_experiment(&config)?;
    let mut recorded = config_value(s);
    recorded["temperatures"] = json!(config.temperatures);
    table.config = Some(recorded);
    let estimate = estimate_threshold(&table, s.seed);
    let summary = match &estimate {
        Ok(e) => json!({
            "temperature": e.temperature,
            "ci": [e.ci.0, e.ci.1],
            "p_beta_j": e.error_probability(),
            "crossings": e.crossings,
            "failed_replicates": e.failed_replicates,
        }),
        Err(_) => Value::Null,
    };
    let extra = [("threshold", &summary)];
    match &runtime.out {
        Some(dir) => {
            let marker = s.critical_temperature.or(estimate.as_ref().ok().map(|e| e.temperature));
            emit_results(&table, dir, &s.formats, marker, &extra)?;
        }
        None => sink.emit("results.csv", &result_csv(&table, &extra))?,
    }
    estimate.map(|_| ())
}

fn nishimori(s: &NishimoriConfig, sink: &mut Sink) -> LabResult<()> {
    if s.betas.iter().any(|&b| !(b >= 0.0 && b.is_finite())) {
        return Err(LabError::Config("betas must be finite and non-negative".into()));
    }
    let report = nishimori_check(s)?;
    let mut table = Table::new(["beta", "crpgm", "crpgm_err", "ising", "ising_err", "z"]);
    for r in &report.rows {
        table.push(vec![sig(r.beta), sig(r.crpgm), sig(r.crpgm_error), sig(r.ising), sig(r.ising_error), sig(r.z)]);
    }
    sink.emit(
        "nishimori.csv",
        &csv_text(&[("config", &config_value(s)), ("pass", &json!(report.pass))], &table),
    )
}

fn with_pool<T: Send>(runtime: &Runtime, f: impl FnOnce() -> LabResult<T> + Send) -> LabResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = runtime.workers {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| LabError::Pool(e.to_string()))?;
    pool.install(f)
}

fn execute(command: Command, stdout: &mut dyn Write) -> LabResult<()> {
    macro_rules! go {
        ($args:expr, $settings:ty, |$s:ident, $rt:ident, $sink:ident| $body:expr) => {{
            let ($s, $rt) = resolve::<$settings>(&$args, &$args.common)?;
            let mut $sink = Sink {
                out: $rt.out.as_deref(),
                stdout: Vec::new(),
            };
            let result = with_pool(&$rt, || $body);
            stdout.write_all(&$sink.stdout).map_err(|e| LabError::io("<stdout>", e))?;
            result
        }};
    }
    match command {
        Command::ExactCorr(a) => go!(a, ExactCorrSettings, |s, rt, sink| exact_corr(&s, &mut sink)),
        Command::IsingMc(a) => go!(a, IsingMcSettings, |s, rt, sink| ising_mc(&s, &mut sink)),
        Command::TcEstimate(a) => go!(a, TcSettings, |s, rt, sink| tc(&s, &mut sink)),
        Command::Fidelity(a) => go!(a, FidelitySettings, |s, rt, sink| fidelity(&s, &mut sink)),
        Command::TqecSample(a) => go!(a, SampleSettings, |s, rt, sink| tqec_sample(&s, &mut sink)),
        Command::Decode(a) => go!(a, DecodeSettings, |s, rt, sink| decode(&s, &mut sink)),
        Command::Threshold(a) => go!(a, ThresholdSettings, |s, rt, sink| threshold(&s, &rt, &mut sink)),
        Command::NishimoriCheck(a) => go!(a, NishimoriConfig, |s, rt, sink| nishimori(&s, &mut sink)),
    }
}

/// Parse `argv` (program name first), run, and return the exit code: 0 on
/// success, 1 on invalid input, 2 on numerical non-convergence.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
