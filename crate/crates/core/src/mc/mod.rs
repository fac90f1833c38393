//! Metropolis Monte Carlo for the ferromagnetic Ising model `-J Σ s_i s_j` on
//! an arbitrary [`Graph`].
//!
//! Spins are stored as `i8`, the energy is tracked through the integer bond
//! sum `Σ_bonds s_i s_j` and acceptance tests compare a raw 64-bit draw with
//! precomputed integer thresholds, so the inner loop is integer-only.

mod correlator;
mod exchange;

pub use correlator::{sample_correlator, sample_correlators, sample_energy, McEstimate};
pub use exchange::{
    binder_crossings, estimate_tc, exchange_mc, tc_from_curves, BinderCurve, ExchangeResult, TcEstimate, TemperatureObservables,
};

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::exact::IsingParams;
use crate::lattice::Graph;
use crate::math::exp;
use crate::rng::{probability_threshold, stream, McRng};
use crate::{Error, Result};

/// Warn when the integrated autocorrelation time exceeds this many samples.
pub const TAU_WARN_SAMPLES: f64 = 10.0;
/// Warn when a replica swap is accepted less often than this.
pub const SWAP_WARN_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Init {
    AllUp,
    Random,
}

/// How the symmetry-broken branch is maintained during measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Flip every spin whenever the magnetisation is negative at a
    /// measurement, keeping the chain in the positive branch.
    FlipToPositive,
    /// Only the initial state selects the branch.
    InitialOnly,
}

/// Sampling protocol: `equilibration` discarded sweeps, then `measurement`
/// samples taken every `thinning` sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct McSchedule {
    pub equilibration: usize,
    pub measurement: usize,
    pub thinning: usize,
    pub seed: u64,
    pub init: Init,
    pub branch: Branch,
}

impl McSchedule {
    pub fn new(equilibration: usize, measurement: usize, seed: u64) -> Self {
        Self {
            equilibration,
            measurement,
            thinning: 1,
            seed,
            init: Init::AllUp,
            branch: Branch::FlipToPositive,
        }
    }

    pub fn with_thinning(mut self, thinning: usize) -> Self {
        self.thinning = thinning;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.equilibration == 0 || self.measurement == 0 || self.thinning == 0 {
            return Err(Error::InvalidArgument(
                "schedule counts (equilibration, measurement, thinning) must be positive",
            ));
        }
        Ok(())
    }
}

/// Diagnostics that do not invalidate a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McWarning {
    /// Observable `index` has an integrated autocorrelation time above
    /// [`TAU_WARN_SAMPLES`] samples.
    LongAutocorrelation { index: usize, tau_int: f64 },
    /// Swap between ladder slots `pair` and `pair + 1` accepted at `rate`.
    LowSwapAcceptance { pair: usize, rate: f64 },
}

/// ±1 spins with cached bond sum and magnetisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    spins: Vec<i8>,
    bond_sum: i64,
    magnetization: i64,
}

impl SpinConfig {
    pub fn all_up(graph: &Graph) -> Self {
        Self::from_spins(graph, alloc::vec![1; graph.num_sites()]).unwrap()
    }

    pub fn random<R: RngCore + ?Sized>(graph: &Graph, rng: &mut R) -> Self {
        let n = graph.num_sites();
        let mut spins = Vec::with_capacity(n);
        let mut bits = 0u64;
        for i in 0..n {
            if i % 64 == 0 {
                bits = rng.next_u64();
            }
            spins.push(if bits >> (i % 64) & 1 == 1 { 1 } else { -1 });
        }
        Self::from_spins(graph, spins).unwrap()
    }

    pub fn from_spins(graph: &Graph, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != graph.num_sites() {
            return Err(Error::SizeMismatch {
                expected: graph.num_sites(),
                got: spins.len(),
            });
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("spins must be +1 or -1"));
        }
        let mut c = Self {
            spins,
            bond_sum: 0,
            magnetization: 0,
        };
        c.recompute(graph);
        Ok(c)
    }

    fn recompute(&mut self, graph: &Graph) {
        self.bond_sum = graph
            .bonds()
            .map(|(i, j)| (self.spins[i] * self.spins[j]) as i64)
            .sum();
        self.magnetization = self.spins.iter().map(|&s| s as i64).sum();
    }

    /// Cache consistency check against a full recomputation.
    pub fn is_consistent(&self, graph: &Graph) -> bool {
        let mut fresh = self.clone();
        fresh.recompute(graph);
        fresh.bond_sum == self.bond_sum && fresh.magnetization == self.magnetization
    }

    #[inline]
    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    pub fn spin(&self, i: usize) -> i8 {
        self.spins[i]
    }

    /// `Σ_bonds s_i s_j`.
    #[inline]
    pub fn bond_sum(&self) -> i64 {
        self.bond_sum
    }

    #[inline]
    pub fn energy(&self, coupling: f64) -> f64 {
        -coupling * self.bond_sum as f64
    }

    #[inline]
    pub fn magnetization(&self) -> i64 {
        self.magnetization
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Global spin flip; the energy is unchanged.
    pub fn flip_all(&mut self) {
        self.spins.iter_mut().for_each(|s| *s = -*s);
        self.magnetization = -self.magnetization;
    }

    /// Product of spins over `sites`.
    pub fn product(&self, sites: &[usize]) -> i8 {
        sites.iter().fold(1, |p, &i| p * self.spins[i])
    }
}

/// Metropolis acceptance tables for a fixed `βJ`.
///
/// Flipping spin `i` changes the energy by `2J d` with `d = s_i Σ_j s_j`;
/// moves with `d < 0` are always accepted, others when a uniform 64-bit draw
/// falls below `thresholds[d] ≈ 2^64 e^{−2βJ d}`.
///
/// Zero-energy moves (`d = 0`) are accepted with probability 1/2 rather
/// than 1: with a fixed scan order, always flipping them makes the chain
/// non-ergodic on small periodic lattices (the 2×2 lattice samples the wrong
/// energy distribution). The rule is still symmetric, so detailed balance
/// holds for every flip.
#[derive(Debug, Clone)]
pub struct Metropolis {
    thresholds: Vec<u64>,
}

impl Metropolis {
    pub fn new(params: &IsingParams, max_degree: usize) -> Self {
        let thresholds = (0..=max_degree)
            .map(|d| {
                if d == 0 {
                    1u64 << 63
                } else {
                    probability_threshold(exp(-2.0 * params.beta_j() * d as f64))
                }
            })
            .collect();
        Self { thresholds }
    }

    pub fn for_graph(params: &IsingParams, graph: &Graph) -> Self {
        let max_degree = (0..graph.num_sites()).map(|i| graph.degree(i)).max().unwrap_or(0);
        Self::new(params, max_degree)
    }

    /// Exact probability of accepting a move with local field product `d`.
    pub fn acceptance(&self, d: i64) -> f64 {
        if d < 0 {
            1.0
        } else {
            self.thresholds[d as usize] as f64 / 18_446_744_073_709_551_616.0
        }
    }

    /// One attempted flip per site, in index order.
    pub fn sweep<R: RngCore + ?Sized>(&self, graph: &Graph, config: &mut SpinConfig, rng: &mut R) {
        let spins = &mut config.spins;
        for i in 0..spins.len() {
            let h: i32 = graph.neighbors(i).iter().map(|&j| spins[j as usize] as i32).sum();
            let s = spins[i] as i32;
            let d = s * h;
            if d < 0 || rng.next_u64() < self.thresholds[d as usize] {
                spins[i] = -spins[i];
                config.bond_sum -= 2 * d as i64;
                config.magnetization -= 2 * s as i64;
            }
        }
    }
}

/// One Metropolis sweep over every site.
pub fn metropolis_sweep<R: RngCore + ?Sized>(graph: &Graph, config: &mut SpinConfig, params: &IsingParams, rng: &mut R) {
    Metropolis::for_graph(params, graph).sweep(graph, config, rng);
}

/// A single Markov chain: graph, state, acceptance table and its own RNG.
#[derive(Debug, Clone)]
pub struct Chain<'g> {
    graph: &'g Graph,
    params: IsingParams,
    config: SpinConfig,
    sampler: Metropolis,
    rng: McRng,
    branch: Branch,
}

impl<'g> Chain<'g> {
    /// Chain for `schedule`, drawing from the stream `(seed, labels)`.
    pub fn new(graph: &'g Graph, params: IsingParams, schedule: &McSchedule, labels: &[u64]) -> Self {
        Self::with_rng(graph, params, schedule, stream(schedule.seed, labels))
    }

    pub fn with_rng(graph: &'g Graph, params: IsingParams, schedule: &McSchedule, mut rng: McRng) -> Self {
        let config = match schedule.init {
            Init::AllUp => SpinConfig::all_up(graph),
            Init::Random => SpinConfig::random(graph, &mut rng),
        };
        Self {
            graph,
            params,
            config,
            sampler: Metropolis::for_graph(&params, graph),
            rng,
            branch: schedule.branch,
        }
    }

    pub fn sweep(&mut self) {
        self.sampler.sweep(self.graph, &mut self.config, &mut self.rng);
    }

    pub fn sweeps(&mut self, n: usize) {
        for _ in 0..n {
            self.sweep();
        }
    }

    /// Advance `thinning` sweeps and return the state to measure, applying
    /// the branch rule.
    pub fn next_sample(&mut self, thinning: usize) -> &SpinConfig {
        self.sweeps(thinning);
        if self.branch == Branch::FlipToPositive && self.config.magnetization < 0 {
            self.config.flip_all();
        }
        &self.config
    }

    pub fn config(&self) -> &SpinConfig {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut SpinConfig {
        &mut self.config
    }

    pub fn params(&self) -> &IsingParams {
        &self.params
    }

    pub fn rng(&mut self) -> &mut McRng {
        &mut self.rng
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }
}
