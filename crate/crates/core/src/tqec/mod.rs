//! Topologically protected MBQC on the RHG lattice with thermal errors.
//!
//! Errors are Z flips on face (primal) and edge (dual) qubits. Their
//! syndrome lives on primal and dual cubes; the decoder matches defects with
//! minimum total periodic taxicab distance, one sector at a time, and the
//! gate succeeds iff actual error and correction differ by a homologically
//! trivial cycle.

mod gauge;
pub mod matching;

pub use gauge::{
    crpgm_energy, crpgm_internal_energy, crpgm_sample_energy, free_energy_decode, integrate_free_energy, CrpgmEnergy,
    FreeEnergyDecision, FreeEnergyOptions, GaugeChain, GaugeConfig, QuenchedDisorder, FE_LADDER_POINTS,
};

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::exact::{fch_error_probability, IsingParams};
use crate::lattice::{Coord, CubicClusterGraph, ErrorChain, RhgComplex, Sector, Syndrome};
use crate::mc::{Chain, McSchedule, McWarning, TAU_WARN_SAMPLES};
use crate::rng::{probability_threshold, McRng};
use crate::stats::{binning, MIN_BINS};
use crate::{Error, Result};
use matching::{min_weight_perfect_matching_complete, Matching};

/// Nearest neighbours per defect in the initial sparse matching graph.
pub const MATCHING_NEIGHBORS: usize = 10;

/// Thermal error sampling model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorModel {
    /// Independent flips with probability `p_βJ` (free cluster Hamiltonian).
    Fch,
    /// Ising-correlated flips on the RHG qubit graph (interacting model).
    Ich,
    /// Ising model on the simple-cubic cluster, restricted to the RHG sites
    /// left after the Z-basis measurements.
    ScReduced,
}

impl ErrorModel {
    pub fn name(self) -> &'static str {
        match self {
            ErrorModel::Fch => "fch",
            ErrorModel::Ich => "ich",
            ErrorModel::ScReduced => "sc",
        }
    }
}

enum Source<'a> {
    Independent { threshold: u64, rng: McRng },
    Ising { chain: Chain<'a>, equilibration: usize, thinning: usize, map: Option<&'a CubicClusterGraph> },
}

/// Stream of thermal error chains on one complex.
///
/// For the correlated models one Markov chain is equilibrated on the first
/// draw and successive chains are `thinning` sweeps apart; down spins (after
/// the branch rule) are the errors.
pub struct ErrorSampler<'a> {
    complex: &'a RhgComplex,
    source: Source<'a>,
    started: bool,
    magnetization: Vec<f64>,
}

impl<'a> ErrorSampler<'a> {
    pub fn fch(complex: &'a RhgComplex, params: &IsingParams, rng: McRng) -> Self {
        Self {
            complex,
            source: Source::Independent {
                threshold: probability_threshold(fch_error_probability(params)),
                rng,
            },
            started: false,
            magnetization: Vec::new(),
        }
    }

    pub fn ich(complex: &'a RhgComplex, params: &IsingParams, schedule: &McSchedule, rng: McRng) -> Result<Self> {
        schedule.validate()?;
        Ok(Self {
            complex,
            source: Source::Ising {
                chain: Chain::with_rng(complex.qubit_graph(), *params, schedule, rng),
                equilibration: schedule.equilibration,
                thinning: schedule.thinning,
                map: None,
            },
            started: false,
            magnetization: Vec::new(),
        })
    }

    pub fn sc_reduced(cubic: &'a CubicClusterGraph, params: &IsingParams, schedule: &McSchedule, rng: McRng) -> Result<Self> {
        schedule.validate()?;
        Ok(Self {
            complex: cubic.complex(),
            source: Source::Ising {
                chain: Chain::with_rng(cubic.graph(), *params, schedule, rng),
                equilibration: schedule.equilibration,
                thinning: schedule.thinning,
                map: Some(cubic),
            },
            started: false,
            magnetization: Vec::new(),
        })
    }

    pub fn complex(&self) -> &'a RhgComplex {
        self.complex
    }

    pub fn next_chain(&mut self) -> ErrorChain {
        let complex = self.complex;
        let mut out = ErrorChain::new(complex);
        match &mut self.source {
            Source::Independent { threshold, rng } => {
                for q in 0..complex.num_qubits() {
                    if rng.next_u64() < *threshold {
                        out.toggle_qubit(q);
                    }
                }
            }
            Source::Ising {
                chain,
                equilibration,
                thinning,
                map,
            } => {
                if !self.started {
                    chain.sweeps(*equilibration);
                }
                let config = chain.next_sample(*thinning);
                self.magnetization
                    .push(config.magnetization() as f64 / config.len() as f64);
                match map {
                    None => {
                        for (q, &s) in config.spins().iter().enumerate() {
                            if s < 0 {
                                out.toggle_qubit(q);
                            }
                        }
                    }
                    Some(cubic) => {
                        for (q, &site) in cubic.retained().iter().enumerate() {
                            if config.spin(site as usize) < 0 {
                                out.toggle_qubit(q);
                            }
                        }
                    }
                }
            }
        }
        self.started = true;
        out
    }

    /// Long-autocorrelation warning for the magnetisation of the chains
    /// drawn so far (needs at least `MIN_BINS` draws).
    pub fn warnings(&self) -> Vec<McWarning> {
        if self.magnetization.len() < MIN_BINS {
            return Vec::new();
        }
        let est = binning(&self.magnetization);
        if est.tau_int > TAU_WARN_SAMPLES {
            alloc::vec![McWarning::LongAutocorrelation {
                index: 0,
                tau_int: est.tau_int
            }]
        } else {
            Vec::new()
        }
    }
}

/// Independent flips with probability `p_βJ` on every face and edge qubit.
pub fn sample_fch_errors<R: RngCore + ?Sized>(complex: &RhgComplex, params: &IsingParams, rng: &mut R) -> ErrorChain {
    let threshold = probability_threshold(fch_error_probability(params));
    let mut out = ErrorChain::new(complex);
    for q in 0..complex.num_qubits() {
        if rng.next_u64() < threshold {
            out.toggle_qubit(q);
        }
    }
    out
}

/// One equilibrated Ising configuration on the qubit graph.
pub fn sample_ich_errors(complex: &RhgComplex, params: &IsingParams, schedule: &McSchedule, rng: McRng) -> Result<ErrorChain> {
    Ok(ErrorSampler::ich(complex, params, schedule, rng)?.next_chain())
}

/// One equilibrated simple-cubic configuration restricted to the RHG sites.
pub fn sample_sc_reduced_errors(
    cubic: &CubicClusterGraph,
    params: &IsingParams,
    schedule: &McSchedule,
    rng: McRng,
) -> Result<ErrorChain> {
    Ok(ErrorSampler::sc_reduced(cubic, params, schedule, rng)?.next_chain())
}

pub fn extract_syndrome(complex: &RhgComplex, chain: &ErrorChain) -> Result<Syndrome> {
    complex.syndrome(chain)
}

/// Minimum-weight perfect matching of one sector's defects under the
/// periodic cube distance. Pairs refer to positions in
/// `syndrome.defects(sector)`.
pub fn mwpm_matching(complex: &RhgComplex, syndrome: &Syndrome, sector: Sector) -> Result<Matching> {
    check_syndrome(complex, syndrome)?;
    let defects = syndrome.defects(sector);
    if defects.len() % 2 == 1 {
        return Err(Error::OddDefectCount {
            sector: sector.name(),
            count: defects.len(),
        });
    }
    let max_dist = 3 * (complex.size() / 2) as i64;
    let dist = |i: usize, j: usize| complex.cube_distance(defects[i], defects[j]) as i64;
    Ok(min_weight_perfect_matching_complete(defects.len(), MATCHING_NEIGHBORS, max_dist, dist)
        .expect("complete graph on an even vertex set has a perfect matching"))
}

fn check_syndrome(complex: &RhgComplex, syndrome: &Syndrome) -> Result<()> {
    for len in [syndrome.primal.len(), syndrome.dual.len()] {
        if len != complex.num_cubes() {
            return Err(Error::SizeMismatch {
                expected: complex.num_cubes(),
                got: len,
            });
        }
    }
    Ok(())
}

/// MWPM correction: every matched pair is joined by the axis-by-axis
/// shortest path (see [`route`]), primal and dual sectors independently.
pub fn mwpm_decode(complex: &RhgComplex, syndrome: &Syndrome) -> Result<ErrorChain> {
    let mut correction = ErrorChain::new(complex);
    for sector in [Sector::Primal, Sector::Dual] {
        let m = mwpm_matching(complex, syndrome, sector)?;
        let defects = syndrome.defects(sector);
        for (i, j) in m.pairs {
            route(complex, sector, defects[i], defects[j], &mut correction);
        }
    }
    Ok(correction)
}

/// Toggle the qubits of the path from cube `a` to cube `b` of `sector`:
/// along x, then y, then z, each the shorter way round (forward on a tie).
/// The path length equals `cube_distance(a, b)`.
pub fn route(complex: &RhgComplex, sector: Sector, a: usize, b: usize, chain: &mut ErrorChain) {
    let n = complex.size();
    let side = complex.side();
    let mut c: Coord = complex.cube_coord(sector, a);
    let target = complex.cube_coord(sector, b);
    for axis in 0..3 {
        let delta = ((target[axis] / 2) + n - (c[axis] / 2)) % n;
        let (steps, forward) = if delta <= n - delta { (delta, true) } else { (n - delta, false) };
        for _ in 0..steps {
            let mid = if forward { (c[axis] + 1) % side } else { (c[axis] + side - 1) % side };
            let mut q = c;
            q[axis] = mid;
            match sector {
                Sector::Primal => chain.primal.toggle(complex.face_index(q)),
                Sector::Dual => chain.dual.toggle(complex.edge_index(q)),
            }
            c[axis] = if forward { (mid + 1) % side } else { (mid + side - 1) % side };
        }
    }
    debug_assert_eq!(c, target);
}

/// `true` iff `actual △ correction` is a homologically trivial cycle.
/// Rejects corrections that leave a nonempty syndrome.
pub fn decode_verdict(complex: &RhgComplex, actual: &ErrorChain, correction: &ErrorChain) -> Result<bool> {
    let residual = actual.symmetric_difference(correction);
    Ok(complex.homology_winding(&residual)?.is_trivial())
}
