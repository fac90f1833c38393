use alloc::vec::Vec;

use super::{Chain, McSchedule, McWarning, TAU_WARN_SAMPLES};
use crate::exact::IsingParams;
use crate::lattice::Graph;
use crate::stats::binning;
use crate::{Error, Result};

/// Monte-Carlo mean with binning error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub error: f64,
    /// Integrated autocorrelation time in samples.
    pub tau_int: f64,
    pub warning: Option<McWarning>,
}

impl McEstimate {
    /// Binning estimate of `series`; `index` labels the warning.
    pub fn from_series(index: usize, series: &[f64]) -> Self {
        let e = binning(series);
        let warning = (e.tau_int > TAU_WARN_SAMPLES).then_some(McWarning::LongAutocorrelation {
            index,
            tau_int: e.tau_int,
        });
        Self {
            mean: e.mean,
            error: e.error,
            tau_int: e.tau_int,
            warning,
        }
    }
}

fn validate_sites(graph: &Graph, sites: &[usize]) -> Result<()> {
    for (k, &s) in sites.iter().enumerate() {
        if s >= graph.num_sites() {
            return Err(Error::InvalidArgument("site index out of range"));
        }
        if sites[..k].contains(&s) {
            return Err(Error::InvalidArgument("correlator sites must be distinct"));
        }
    }
    Ok(())
}

/// `⟨∏_{i∈S} s_i⟩` for several site sets from one chain.
///
/// The chain starts from the schedule's initial state and follows its branch
/// rule, so with the default all-up start and [`super::Branch::FlipToPositive`]
/// the result is the symmetry-broken (positive-branch) expectation.
pub fn sample_correlators(
    graph: &Graph,
    site_sets: &[Vec<usize>],
    params: &IsingParams,
    schedule: &McSchedule,
) -> Result<Vec<McEstimate>> {
    schedule.validate()?;
    if graph.num_sites() == 0 {
        return Err(Error::InvalidArgument("graph has no sites"));
    }
    for sites in site_sets {
        validate_sites(graph, sites)?;
    }
    let mut chain = Chain::new(graph, *params, schedule, &[0]);
    chain.sweeps(schedule.equilibration);
    let mut series: Vec<Vec<f64>> = site_sets
        .iter()
        .map(|_| Vec::with_capacity(schedule.measurement))
        .collect();
    for _ in 0..schedule.measurement {
        let config = chain.next_sample(schedule.thinning);
        for (sites, out) in site_sets.iter().zip(series.iter_mut()) {
            out.push(config.product(sites) as f64);
        }
    }
    Ok(series
        .iter()
        .enumerate()
        .map(|(k, s)| McEstimate::from_series(k, s))
        .collect())
}

pub fn sample_correlator(
    graph: &Graph,
    sites: &[usize],
    params: &IsingParams,
    schedule: &McSchedule,
) -> Result<McEstimate> {
    Ok(sample_correlators(graph, &[sites.to_vec()], params, schedule)?[0])
}

/// Thermal mean of the total energy `-J Σ s_i s_j`.
pub fn sample_energy(graph: &Graph, params: &IsingParams, schedule: &McSchedule) -> Result<McEstimate> {
    schedule.validate()?;
    let mut chain = Chain::new(graph, *params, schedule, &[0]);
    chain.sweeps(schedule.equilibration);
    let series: Vec<f64> = (0..schedule.measurement)
        .map(|_| chain.next_sample(schedule.thinning).energy(params.coupling))
        .collect();
    Ok(McEstimate::from_series(0, &series))
}

#[cfg(test)]
mod tests {
    use super::super::tests::enumerate_moments;
    use super::super::{Branch, Init};
    use super::*;
    use crate::lattice::SquareLattice;
    use alloc::vec;

    #[test]
    fn frozen_chain_gives_unit_correlators() {
        let g = SquareLattice::new(6, 6).unwrap().into_graph();
        let p = IsingParams::new(1.0, f64::INFINITY).unwrap();
        let s = McSchedule::new(5, 100, 1);
        for sites in [vec![0], vec![1, 2, 3], vec![0, 7, 14, 35]] {
            let e = sample_correlator(&g, &sites, &p, &s).unwrap();
            assert_eq!((e.mean, e.error), (1.0, 0.0));
        }
    }

    #[test]
    fn rejects_repeated_sites() {
        let g = SquareLattice::new(4, 4).unwrap().into_graph();
        let p = IsingParams::at_temperature(2.0).unwrap();
        let s = McSchedule::new(5, 100, 1);
        assert!(sample_correlator(&g, &[1, 1], &p, &s).is_err());
        assert!(sample_correlator(&g, &[99], &p, &s).is_err());
        assert!(sample_correlator(&g, &[1], &p, &McSchedule::new(0, 1, 1)).is_err());
    }

    #[test]
    fn symmetric_ensemble_odd_correlators_vanish() {
        let g = SquareLattice::new(6, 6).unwrap().into_graph();
        let s = McSchedule::new(500, 40_000, 3)
            .with_init(Init::Random)
            .with_branch(Branch::InitialOnly);
        for t in [2.2, 3.0] {
            let p = IsingParams::at_temperature(t).unwrap();
            let est = sample_correlators(&g, &[vec![0], vec![0, 1, 2], vec![3, 9, 20]], &p, &s).unwrap();
            for e in est {
                assert!(e.mean.abs() < 3.0 * e.error, "T={t}: {} ± {}", e.mean, e.error);
            }
        }
    }

    #[test]
    fn energy_matches_enumeration() {
        let g = SquareLattice::new(4, 4).unwrap().into_graph();
        let p = IsingParams::at_temperature(2.5).unwrap();
        let exact = enumerate_moments(&g, &p)[0];
        let e = sample_energy(&g, &p, &McSchedule::new(1000, 50_000, 4)).unwrap();
        assert!((e.mean - exact).abs() < 3.0 * e.error, "{} ± {} vs {exact}", e.mean, e.error);
    }
}
