//! Parallel experiment drivers.
//!
//! Every unit of work draws from its own stream `(seed, labels)`, and results
//! are aggregated in a fixed order, so output does not depend on the number
//! of worker threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use thermal_mbqc::exact::{critical_temperature_2d, fch_error_probability, IsingParams};
use thermal_mbqc::fidelity::{fidelity, fidelity_derivative, point_options, FidelityOptions, FidelityPoint, GateSpec, Model as FidelityModel};
use thermal_mbqc::lattice::{CubicClusterGraph, ErrorChain, Graph, RhgComplex};
use thermal_mbqc::mc::{exchange_mc, sample_energy, McEstimate, tc_from_curves, BinderCurve, McSchedule, TcEstimate};
use thermal_mbqc::rng::{below, derive_seed, stream, uniform};
use thermal_mbqc::stats::{mean, percentile};
use thermal_mbqc::tqec::{
    crpgm_sample_energy, decode_verdict, extract_syndrome, mwpm_decode, sample_fch_errors, CrpgmEnergy, ErrorSampler,
    QuenchedDisorder,
};

use crate::error::{LabError, LabResult};
use crate::format::round_sig;

/// Bootstrap replicates for threshold intervals.
pub const THRESHOLD_BOOTSTRAP: usize = 400;

/// Thermal error model of a logical-error run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Fch,
    Ich,
    Sc,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Fch => "fch",
            Model::Ich => "ich",
            Model::Sc => "sc",
        }
    }

    fn label(self) -> u64 {
        match self {
            Model::Fch => 0,
            Model::Ich => 1,
            Model::Sc => 2,
        }
    }

    /// Default temperature grid.
    pub fn default_temperatures(self) -> Vec<f64> {
        let (start, step, count) = match self {
            Model::Fch => (0.45, 0.025, 11),
            Model::Ich => (1.5, 0.1, 10),
            Model::Sc => (3.0, 0.2, 8),
        };
        (0..count).map(|k| round_sig(start + step * k as f64)).collect()
    }
}

impl std::str::FromStr for Model {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s {
            "fch" => Ok(Model::Fch),
            "ich" => Ok(Model::Ich),
            "sc" => Ok(Model::Sc),
            _ => Err(LabError::Config(format!("unknown model '{s}' (fch, ich, sc)"))),
        }
    }
}

/// Logical-error sweep over sizes and temperatures. `N` is the RHG size; the
/// SC-reduced model samples the `2N` simple-cubic cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub sizes: Vec<usize>,
    pub temperatures: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Sweeps before the first draw of each correlated-error chain.
    pub equilibration: usize,
    /// Sweeps between draws.
    pub thinning: usize,
    /// Trials drawn from one correlated-error chain.
    pub batch: usize,
    /// Abort a point when chains with long autocorrelation supplied more than
    /// this fraction of its trials.
    pub max_warning_fraction: f64,
    /// Record wall time per point (otherwise 0, keeping output reproducible).
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            sizes: vec![6, 8, 10, 12],
            temperatures: model.default_temperatures(),
            trials: 10_000,
            seed: 0,
            equilibration: 500,
            thinning: 5,
            batch: 250,
            max_warning_fraction: 0.5,
            timing: false,
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.sizes.is_empty() || self.temperatures.is_empty() {
            return bad("sizes and temperatures must be nonempty");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sizes must be strictly increasing");
        }
        if self.temperatures.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("temperatures must be strictly increasing");
        }
        if self.temperatures.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return bad("temperatures must be positive and finite");
        }
        if self.sizes.iter().any(|&n| n < 2) {
            return bad("RHG sizes must be >= 2");
        }
        if self.trials == 0 || self.batch == 0 || self.equilibration == 0 || self.thinning == 0 {
            return bad("trials, batch, equilibration and thinning must be positive");
        }
        if !(0.0..=1.0).contains(&self.max_warning_fraction) {
            return bad("max_warning_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    /// Additional requirement for threshold runs.
    pub fn validate_threshold(&self) -> LabResult<()> {
        self.validate()?;
        if self.trials < 100 {
            return Err(LabError::Config("threshold runs need at least 100 trials per point".into()));
        }
        if self.sizes.len() < 2 || self.temperatures.len() < 4 {
            return Err(LabError::Config("threshold runs need >= 2 sizes and >= 4 temperatures".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: Model,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub p_fail: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seconds: f64,
}

impl ResultRow {
    pub fn new(model: Model, n: usize, t: f64, failures: usize, trials: usize, seconds: f64) -> Self {
        let p = failures as f64 / trials as f64;
        Self {
            model,
            n,
            t,
            p_fail: p,
            stderr: binomial_stderr(p, trials),
            trials,
            seconds,
        }
    }

    pub fn failures(&self) -> usize {
        (self.p_fail * self.trials as f64).round() as usize
    }
}

/// `sqrt(p (1 - p) / trials)`.
pub fn binomial_stderr(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    /// Resolved configuration, written into output headers.
    pub config: Option<serde_json::Value>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Rows of one size, by increasing temperature.
    pub fn curve(&self, n: usize) -> Vec<&ResultRow> {
        let mut rows: Vec<&ResultRow> = self.rows.iter().filter(|r| r.n == n).collect();
        rows.sort_by(|a, b| a.t.total_cmp(&b.t));
        rows
    }
}

struct UnitResult {
    failures: usize,
    trials: usize,
    warned: bool,
    seconds: f64,
}

enum Lattice {
    Rhg(RhgComplex),
    Cubic(CubicClusterGraph),
}

impl Lattice {
    fn complex(&self) -> &RhgComplex {
        match self {
            Lattice::Rhg(c) => c,
            Lattice::Cubic(c) => c.complex(),
        }
    }
}

fn failed(complex: &RhgComplex, actual: &ErrorChain) -> LabResult<bool> {
    let syndrome = extract_syndrome(complex, actual)?;
    let correction = mwpm_decode(complex, &syndrome)?;
    Ok(!decode_verdict(complex, actual, &correction)?)
}

/// Sample, decode and judge `trials` errors per `(N, T)` point.
///
/// fCH trial `i` uses the stream `(seed, [model, N, T index, i])`. Correlated
/// models run one chain per batch of trials with stream
/// `(seed, [model, N, T index, batch])`.
pub fn run_logical_error_experiment(config: &ExperimentConfig) -> LabResult<ResultTable> {
    config.validate()?;
    let lattices: Vec<Lattice> = config
        .sizes
        .iter()
        .map(|&n| {
            Ok(match config.model {
                Model::Sc => Lattice::Cubic(CubicClusterGraph::new(2 * n)?),
                _ => Lattice::Rhg(RhgComplex::new(n)?),
            })
        })
        .collect::<LabResult<_>>()?;
    let batches = config.trials.div_ceil(config.batch);
    let units: Vec<(usize, usize, usize)> = (0..config.sizes.len())
        .flat_map(|si| (0..config.temperatures.len()).flat_map(move |ti| (0..batches).map(move |b| (si, ti, b))))
        .collect();
    let schedule = McSchedule::new(config.equilibration, 1, config.seed).with_thinning(config.thinning);

    let results: Vec<UnitResult> = units
        .par_iter()
        .map(|&(si, ti, b)| -> LabResult<UnitResult> {
            let start = Instant::now();
            let n = config.sizes[si];
            let params = IsingParams::at_temperature(config.temperatures[ti])?;
            let lo = b * config.batch;
            let hi = (lo + config.batch).min(config.trials);
            let labels = |x: usize| [config.model.label(), n as u64, ti as u64, x as u64];
            let lattice = &lattices[si];
            let complex = lattice.complex();
            let mut failures = 0;
            let mut warned = false;
            match (config.model, lattice) {
                (Model::Fch, _) => {
                    for i in lo..hi {
                        let mut rng = stream(config.seed, &labels(i));
                        let actual = sample_fch_errors(complex, &params, &mut rng);
                        failures += failed(complex, &actual)? as usize;
                    }
                }
                (_, lat) => {
                    let rng = stream(config.seed, &labels(b));
                    let mut sampler = match lat {
                        Lattice::Rhg(c) => ErrorSampler::ich(c, &params, &schedule, rng)?,
                        Lattice::Cubic(c) => ErrorSampler::sc_reduced(c, &params, &schedule, rng)?,
                    };
                    for _ in lo..hi {
                        let actual = sampler.next_chain();
                        failures += failed(complex, &actual)? as usize;
                    }
                    warned = !sampler.warnings().is_empty();
                }
            }
            Ok(UnitResult {
                failures,
                trials: hi - lo,
                warned,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<LabResult<_>>()?;

    let mut rows = Vec::new();
    for (si, &n) in config.sizes.iter().enumerate() {
        for (ti, &t) in config.temperatures.iter().enumerate() {
            let point = &results[(si * config.temperatures.len() + ti) * batches..][..batches];
            let failures = point.iter().map(|u| u.failures).sum();
            let warned: usize = point.iter().filter(|u| u.warned).map(|u| u.trials).sum();
            let fraction = warned as f64 / config.trials as f64;
            if fraction > config.max_warning_fraction {
                return Err(LabError::TooManyWarnings {
                    size: n,
                    temperature: t,
                    fraction,
                    limit: config.max_warning_fraction,
                });
            }
            let seconds = if config.timing { point.iter().map(|u| u.seconds).sum() } else { 0.0 };
            rows.push(ResultRow::new(config.model, n, round_sig(t), failures, config.trials, round_sig(seconds)));
        }
    }
    Ok(ResultTable {
        config: Some(serde_json::to_value(config).expect("config serialises")),
        rows,
    })
}

/// MWPM failure rate against uniformly random errors (every qubit flipped
/// with probability 1/2), the chance level of the verdict.
pub fn chance_level(n: usize, trials: usize, seed: u64) -> LabResult<f64> {
    let complex = RhgComplex::new(n)?;
    let params = IsingParams::new(1.0, 0.0)?;
    let failures: usize = (0..trials)
        .into_par_iter()
        .map(|i| -> LabResult<usize> {
            let mut rng = stream(seed, &[u64::MAX, n as u64, i as u64]);
            let actual = sample_fch_errors(&complex, &params, &mut rng);
            Ok(failed(&complex, &actual)? as usize)
        })
        .sum::<LabResult<usize>>()?;
    Ok(failures as f64 / trials as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Mean of the pairwise crossings.
    pub temperature: f64,
    /// 95% binomial-bootstrap interval.
    pub ci: (f64, f64),
    /// `(smaller N, larger N, crossing T)`.
    pub crossings: Vec<(usize, usize, f64)>,
    /// Replicates without a crossing, left out of the interval.
    pub failed_replicates: usize,
}

impl ThresholdEstimate {
    /// `p_βJ` at the threshold temperature (free-cluster error rate).
    pub fn error_probability(&self) -> f64 {
        IsingParams::at_temperature(self.temperature)
            .map(|p| fch_error_probability(&p))
            .unwrap_or(f64::NAN)
    }
}

/// Crossing where `large − small` turns from non-positive to positive; the
/// steepest such rise wins, by linear interpolation on its interval.
fn failure_crossing(ts: &[f64], small: &[f64], large: &[f64]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for i in 0..ts.len().saturating_sub(1) {
        let d0 = large[i] - small[i];
        let d1 = large[i + 1] - small[i + 1];
        if d0 <= 0.0 && d1 > 0.0 {
            let rise = d1 - d0;
            let x = ts[i] + (ts[i + 1] - ts[i]) * (-d0) / rise;
            if best.map_or(true, |(r, _)| rise > r) {
                best = Some((rise, x));
            }
        }
    }
    best.map(|(_, x)| x)
}

fn pairwise_crossings(sizes: &[usize], ts: &[f64], curves: &[Vec<f64>]) -> Option<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for i in 0..sizes.len() {
        for j in i + 1..sizes.len() {
            out.push((sizes[i], sizes[j], failure_crossing(ts, &curves[i], &curves[j])?));
        }
    }
    Some(out)
}

/// Threshold temperature of a table: mean pairwise crossing of the failure
/// curves, with a 95% interval from resampling every point binomially.
pub fn estimate_threshold(table: &ResultTable, seed: u64) -> LabResult<ThresholdEstimate> {
    let sizes = table.sizes();
    if sizes.len() < 2 {
        return Err(LabError::Config("threshold needs at least two sizes".into()));
    }
    let ts: Vec<f64> = table.curve(sizes[0]).iter().map(|r| r.t).collect();
    if ts.len() < 4 {
        return Err(LabError::Config("threshold needs at least four temperatures".into()));
    }
    let curves: Vec<Vec<&ResultRow>> = sizes.iter().map(|&n| table.curve(n)).collect();
    for c in &curves {
        if c.iter().map(|r| r.t).collect::<Vec<_>>() != ts {
            return Err(LabError::Config("all sizes must share one temperature grid".into()));
        }
    }
    let p: Vec<Vec<f64>> = curves.iter().map(|c| c.iter().map(|r| r.p_fail).collect()).collect();
    let crossings = pairwise_crossings(&sizes, &ts, &p).ok_or(thermal_mbqc::Error::NoCrossing)?;
    let temperature = mean(&crossings.iter().map(|c| c.2).collect::<Vec<_>>());

    let replicates: Vec<Option<f64>> = (0..THRESHOLD_BOOTSTRAP)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, &[u64::MAX - 2, r as u64]);
            let resampled: Vec<Vec<f64>> = curves
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|row| {
                            let hits = (0..row.trials).filter(|_| uniform(&mut rng) < row.p_fail).count();
                            hits as f64 / row.trials as f64
                        })
                        .collect()
                })
                .collect();
            pairwise_crossings(&sizes, &ts, &resampled).map(|x| mean(&x.iter().map(|c| c.2).collect::<Vec<_>>()))
        })
        .collect();
    let samples: Vec<f64> = replicates.iter().flatten().copied().collect();
    let ci = if samples.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (percentile(&samples, 0.025), percentile(&samples, 0.975))
    };
    Ok(ThresholdEstimate {
        temperature,
        ci,
        crossings,
        failed_replicates: replicates.len() - samples.len(),
    })
}

/// Standard deviation of `replicates` bootstrap resamplings of `failures`
/// out of `trials` Bernoulli outcomes.
pub fn bootstrap_stderr(failures: usize, trials: usize, replicates: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, &[u64::MAX - 3]);
    let xs: Vec<f64> = (0..replicates)
        .map(|_| {
            let hits = (0..trials)
                .filter(|_| (below(&mut rng, trials as u64) as usize) < failures)
                .count();
            hits as f64 / trials as f64
        })
        .collect();
    let m = mean(&xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NishimoriConfig {
    pub size: usize,
    pub betas: Vec<f64>,
    /// Disorder samples per β.
    pub samples: usize,
    pub equilibration: usize,
    /// Gauge-chain measurement sweeps per disorder sample.
    pub measurement: usize,
    /// Measurement sweeps of the reference Ising run.
    pub ising_measurement: usize,
    pub seed: u64,
}

impl Default for NishimoriConfig {
    fn default() -> Self {
        Self {
            size: 4,
            betas: vec![0.3, 0.45, 0.6],
            samples: 400,
            equilibration: 500,
            measurement: 2000,
            ising_measurement: 200_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NishimoriRow {
    pub beta: f64,
    pub crpgm: f64,
    pub crpgm_error: f64,
    pub ising: f64,
    pub ising_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NishimoriReport {
    pub rows: Vec<NishimoriRow>,
    /// All `|z| ≤ 3`.
    pub pass: bool,
}

/// `z = (a − b) / sqrt(ea² + eb²)`, 0 when both are exact and equal.
pub fn z_score(a: f64, ea: f64, b: f64, eb: f64) -> f64 {
    let s = (ea * ea + eb * eb).sqrt();
    if s == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b) / s
    }
}

/// cRPGM internal energy on the Nishimori line against the Ising energy of
/// the qubit graph. Disorder sample `k` at β index `i` comes from its own
/// equilibrated Ising chain (stream `[i, k, 0]`), its gauge chain uses
/// `[i, k, 1]`, and the Ising reference `[i, 2]`. At `β = 0` the Ising
/// reference is the exact value 0.
pub fn nishimori_check(config: &NishimoriConfig) -> LabResult<NishimoriReport> {
    if config.size < 2 || config.betas.is_empty() || config.samples == 0 {
        return Err(LabError::Config("need N >= 2, at least one beta and one sample".into()));
    }
    if config.equilibration == 0 || config.measurement == 0 || config.ising_measurement == 0 {
        return Err(LabError::Config("sweep counts must be positive".into()));
    }
    let complex = RhgComplex::new(config.size)?;
    let mut rows = Vec::new();
    for (bi, &beta) in config.betas.iter().enumerate() {
        let params = IsingParams::new(1.0, beta)?;
        let disorder_schedule = McSchedule::new(config.equilibration, 1, config.seed);
        let gauge_schedule = McSchedule::new(config.equilibration, config.measurement, config.seed);
        let samples = (0..config.samples)
            .into_par_iter()
            .map(|k| -> LabResult<_> {
                let rng = stream(config.seed, &[bi as u64, k as u64, 0]);
                let chain = ErrorSampler::ich(&complex, &params, &disorder_schedule, rng)?.next_chain();
                let disorder = QuenchedDisorder::from_chain(&chain);
                Ok(crpgm_sample_energy(&complex, &params, &disorder, &gauge_schedule, &[bi as u64, k as u64, 1])?)
            })
            .collect::<LabResult<Vec<_>>>()?;
        let crpgm = CrpgmEnergy::from_samples(samples);
        let ising_schedule = McSchedule::new(
            config.equilibration,
            config.ising_measurement,
            derive_seed(config.seed, &[bi as u64, 2]),
        );
        // Free spins at β = 0: the energy is exactly zero, and fixed-order
        // Metropolis would only flip the whole lattice back and forth.
        let ising = if beta == 0.0 {
            McEstimate {
                mean: 0.0,
                error: 0.0,
                tau_int: 0.0,
                warning: None,
            }
        } else {
            sample_energy(complex.qubit_graph(), &params, &ising_schedule)?
        };
        rows.push(NishimoriRow {
            beta,
            crpgm: crpgm.mean,
            crpgm_error: crpgm.error,
            ising: ising.mean,
            ising_error: ising.error,
            z: z_score(crpgm.mean, crpgm.error, ising.mean, ising.error),
        });
    }
    let pass = rows.iter().all(|r| r.z.abs() <= 3.0);
    Ok(NishimoriReport { rows, pass })
}

/// Binder-crossing `Tc` with one exchange run per graph in parallel; size
/// `k` uses seed `(seed, [k])`, as the serial core routine does.
pub fn tc_estimate(graphs: &[&Graph], temperatures: &[f64], schedule: &McSchedule) -> LabResult<TcEstimate> {
    if graphs.len() < 2 {
        return Err(LabError::Config("need at least two system sizes".into()));
    }
    let runs = graphs
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            let s = schedule.with_seed(derive_seed(schedule.seed, &[k as u64]));
            exchange_mc(g, temperatures, 1.0, &s).map(|r| (BinderCurve::from_exchange(g.num_sites(), &r), r.warnings))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut warnings = Vec::new();
    let mut curves = Vec::new();
    for (c, w) in runs {
        curves.push(c);
        warnings.extend(w);
    }
    let mut est = tc_from_curves(curves, schedule.seed)?;
    est.warnings = warnings;
    Ok(est)
}

/// Fidelity on a temperature grid in parallel (point `k` seeded as in the
/// serial curve) and `dF/dT` when the grid has at least three points.
pub fn fidelity_table(
    spec: &GateSpec,
    temperatures: &[f64],
    model: FidelityModel,
    options: &FidelityOptions,
) -> LabResult<(Vec<FidelityPoint>, Option<Vec<f64>>)> {
    if temperatures.is_empty() {
        return Err(LabError::Config("temperature grid is empty".into()));
    }
    let points = temperatures
        .par_iter()
        .enumerate()
        .map(|(k, &t)| fidelity(spec, t, model, &point_options(options, k)))
        .collect::<Result<Vec<_>, _>>()?;
    let derivative = if temperatures.len() >= 3 {
        Some(fidelity_derivative(temperatures, &points.iter().map(|p| p.fidelity).collect::<Vec<_>>())?)
    } else {
        None
    };
    Ok((points, derivative))
}

/// Temperature of the largest `|dF/dT|`.
pub fn derivative_peak(temperatures: &[f64], derivative: &[f64]) -> f64 {
    let k = (0..derivative.len())
        .max_by(|&a, &b| derivative[a].abs().total_cmp(&derivative[b].abs()))
        .expect("nonempty derivative");
    temperatures[k]
}

/// Onsager's `Tc` for the SVG markers of square-lattice plots.
pub fn square_tc() -> f64 {
    critical_temperature_2d()
}
