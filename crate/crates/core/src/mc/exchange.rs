use alloc::vec::Vec;

use super::{Chain, McSchedule, McWarning, SWAP_WARN_RATE};
use crate::exact::IsingParams;
use crate::lattice::Graph;
use crate::math::exp;
use crate::rng::{derive_seed, normal, stream, uniform};
use crate::stats::{binning, jackknife, linear_crossings, mean, percentile, Estimate};
use crate::{Error, Result};

/// Blocks used for jackknife errors of the Binder cumulant.
const JACKKNIFE_BLOCKS: usize = 64;
/// Parametric bootstrap replicates for the crossing confidence interval.
const BOOTSTRAP_REPLICATES: usize = 400;

/// Per-temperature averages; `m = M / #sites`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureObservables {
    pub temperature: f64,
    /// Total energy `-J Σ s_i s_j`.
    pub energy: Estimate,
    pub abs_magnetization: Estimate,
    pub m2: Estimate,
    pub m4: Estimate,
    /// `U = 1 − ⟨m⁴⟩ / (3⟨m²⟩²)` and its jackknife error.
    pub binder: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeResult {
    pub observables: Vec<TemperatureObservables>,
    /// Acceptance rate of swaps between ladder slots `k` and `k + 1`.
    pub swap_acceptance: Vec<f64>,
    pub warnings: Vec<McWarning>,
}

fn validate_ladder(temperatures: &[f64]) -> Result<()> {
    if temperatures.is_empty() {
        return Err(Error::InvalidArgument("temperature ladder is empty"));
    }
    if temperatures.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("temperatures must be positive and finite"));
    }
    if temperatures.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("temperature ladder must be strictly increasing"));
    }
    Ok(())
}

/// Replica-exchange Monte Carlo over a temperature ladder.
///
/// Slot `k` holds a chain at `temperatures[k]` with its own stream
/// `(seed, k)`. After every sweep of all slots, neighbouring slots exchange
/// configurations with probability `min(1, e^{(β_a − β_b)(E_a − E_b)})`,
/// alternating between even and odd pairs. A one-temperature ladder is plain
/// Metropolis with the same stream as [`super::sample_energy`].
pub fn exchange_mc(
    graph: &Graph,
    temperatures: &[f64],
    coupling: f64,
    schedule: &McSchedule,
) -> Result<ExchangeResult> {
    schedule.validate()?;
    validate_ladder(temperatures)?;
    let n_sites = graph.num_sites() as f64;
    let mut chains: Vec<Chain<'_>> = temperatures
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let params = IsingParams::new(coupling, 1.0 / t)?;
            Ok(Chain::new(graph, params, schedule, &[k as u64]))
        })
        .collect::<Result<_>>()?;
    let betas: Vec<f64> = temperatures.iter().map(|t| 1.0 / t).collect();
    let pairs = temperatures.len().saturating_sub(1);
    let mut swap_rng = stream(schedule.seed, &[u64::MAX]);
    let mut accepted = alloc::vec![0usize; pairs];
    let mut attempted = alloc::vec![0usize; pairs];
    let mut round = 0usize;

    let mut step = |chains: &mut Vec<Chain<'_>>, count: bool| {
        for c in chains.iter_mut() {
            c.sweep();
        }
        let mut k = round % 2;
        while k < pairs {
            let (lo, hi) = chains.split_at_mut(k + 1);
            let (a, b) = (&mut lo[k], &mut hi[0]);
            let (ea, eb) = (a.config().energy(coupling), b.config().energy(coupling));
            let x = (betas[k] - betas[k + 1]) * (ea - eb);
            let accept = x >= 0.0 || uniform(&mut swap_rng) < exp(x);
            if count {
                attempted[k] += 1;
                accepted[k] += accept as usize;
            }
            if accept {
                core::mem::swap(a.config_mut(), b.config_mut());
            }
            k += 2;
        }
        round += 1;
    };

    for _ in 0..schedule.equilibration {
        step(&mut chains, false);
    }
    let slots = temperatures.len();
    let mut series: Vec<[Vec<f64>; 4]> = (0..slots).map(|_| Default::default()).collect();
    for _ in 0..schedule.measurement {
        for _ in 0..schedule.thinning {
            step(&mut chains, true);
        }
        for (c, s) in chains.iter().zip(series.iter_mut()) {
            let cfg = c.config();
            let m = cfg.magnetization() as f64 / n_sites;
            let m2 = m * m;
            s[0].push(cfg.energy(coupling));
            s[1].push(m.abs());
            s[2].push(m2);
            s[3].push(m2 * m2);
        }
    }

    let mut warnings = Vec::new();
    let swap_acceptance: Vec<f64> = accepted
        .iter()
        .zip(&attempted)
        .map(|(&a, &n)| if n == 0 { 0.0 } else { a as f64 / n as f64 })
        .collect();
    for (pair, &rate) in swap_acceptance.iter().enumerate() {
        if rate < SWAP_WARN_RATE {
            warnings.push(McWarning::LowSwapAcceptance { pair, rate });
        }
    }
    let observables = temperatures
        .iter()
        .zip(&series)
        .map(|(&temperature, s)| TemperatureObservables {
            temperature,
            energy: binning(&s[0]),
            abs_magnetization: binning(&s[1]),
            m2: binning(&s[2]),
            m4: binning(&s[3]),
            binder: binder_jackknife(&s[2], &s[3]),
        })
        .collect();
    Ok(ExchangeResult {
        observables,
        swap_acceptance,
        warnings,
    })
}

fn binder(m: &[f64]) -> f64 {
    if m[0] == 0.0 {
        return 0.0;
    }
    1.0 - m[1] / (3.0 * m[0] * m[0])
}

fn binder_jackknife(m2: &[f64], m4: &[f64]) -> (f64, f64) {
    let nb = JACKKNIFE_BLOCKS.min(m2.len()).max(1);
    let len = m2.len() / nb;
    if len == 0 {
        return (binder(&[mean(m2), mean(m4)]), 0.0);
    }
    let blocks: Vec<Vec<f64>> = (0..nb)
        .map(|b| {
            let r = b * len..(b + 1) * len;
            alloc::vec![mean(&m2[r.clone()]), mean(&m4[r])]
        })
        .collect();
    jackknife(&blocks, binder)
}

/// Binder cumulant against temperature for one system size.
#[derive(Debug, Clone, PartialEq)]
pub struct BinderCurve {
    pub sites: usize,
    pub temperatures: Vec<f64>,
    pub u: Vec<f64>,
    pub error: Vec<f64>,
}

impl BinderCurve {
    pub fn from_exchange(sites: usize, result: &ExchangeResult) -> Self {
        Self {
            sites,
            temperatures: result.observables.iter().map(|o| o.temperature).collect(),
            u: result.observables.iter().map(|o| o.binder.0).collect(),
            error: result.observables.iter().map(|o| o.binder.1).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcEstimate {
    /// Mean of the pairwise crossings.
    pub tc: f64,
    /// 95% parametric-bootstrap interval.
    pub ci: (f64, f64),
    /// Crossing for every size pair, smaller size first.
    pub crossings: Vec<((usize, usize), f64)>,
    pub curves: Vec<BinderCurve>,
    pub warnings: Vec<McWarning>,
}

/// Crossing of curve `b` (larger system) through curve `a`, where `U_b − U_a`
/// changes from positive (ordered side) to negative. Among several sign
/// changes the steepest one is taken.
fn pair_crossing(ts: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for i in 0..ts.len().saturating_sub(1) {
        let d0 = b[i] - a[i];
        let d1 = b[i + 1] - a[i + 1];
        if d0 >= 0.0 && d1 < 0.0 {
            let drop = d0 - d1;
            let x = linear_crossings(&ts[i..i + 2], &b[i..i + 2], &a[i..i + 2])[0];
            if best.map_or(true, |(bd, _)| drop > bd) {
                best = Some((drop, x));
            }
        }
    }
    best.map(|(_, x)| x)
}

/// Pairwise Binder crossings for curves sorted by increasing size.
pub fn binder_crossings(curves: &[BinderCurve]) -> Result<Vec<((usize, usize), f64)>> {
    let mut out = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let (a, b) = (&curves[i], &curves[j]);
            if a.temperatures != b.temperatures {
                return Err(Error::InvalidArgument("Binder curves must share a temperature grid"));
            }
            let x = pair_crossing(&a.temperatures, &a.u, &b.u).ok_or(Error::NoCrossing)?;
            out.push(((a.sites, b.sites), x));
        }
    }
    Ok(out)
}

/// `Tc` as the mean pairwise crossing, with a bootstrap interval from
/// Gaussian resampling of every cumulant within its error.
pub fn tc_from_curves(mut curves: Vec<BinderCurve>, seed: u64) -> Result<TcEstimate> {
    if curves.len() < 2 {
        return Err(Error::InvalidArgument("need at least two system sizes"));
    }
    curves.sort_by_key(|c| c.sites);
    let crossings = binder_crossings(&curves)?;
    let tc = mean(&crossings.iter().map(|c| c.1).collect::<Vec<_>>());
    let mut rng = stream(seed, &[u64::MAX - 1]);
    let mut samples = Vec::with_capacity(BOOTSTRAP_REPLICATES);
    for _ in 0..BOOTSTRAP_REPLICATES {
        let perturbed: Vec<BinderCurve> = curves
            .iter()
            .map(|c| BinderCurve {
                u: c.u.iter().zip(&c.error).map(|(u, e)| u + e * normal(&mut rng)).collect(),
                ..c.clone()
            })
            .collect();
        if let Ok(x) = binder_crossings(&perturbed) {
            samples.push(mean(&x.iter().map(|c| c.1).collect::<Vec<_>>()));
        }
    }
    let ci = if samples.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (percentile(&samples, 0.025), percentile(&samples, 0.975))
    };
    Ok(TcEstimate {
        tc,
        ci,
        crossings,
        curves,
        warnings: Vec::new(),
    })
}

/// Binder-crossing estimate of `Tc` for a family of graphs (any order; they
/// are sorted by site count). Size `k` runs with seed `(seed, k)`.
pub fn estimate_tc(graphs: &[&Graph], temperatures: &[f64], coupling: f64, schedule: &McSchedule) -> Result<TcEstimate> {
    if graphs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two system sizes"));
    }
    let mut curves = Vec::new();
    let mut warnings = Vec::new();
    for (k, g) in graphs.iter().enumerate() {
        let s = schedule.with_seed(derive_seed(schedule.seed, &[k as u64]));
        let r = exchange_mc(g, temperatures, coupling, &s)?;
        warnings.extend(r.warnings.iter().copied());
        curves.push(BinderCurve::from_exchange(g.num_sites(), &r));
    }
    let mut est = tc_from_curves(curves, schedule.seed)?;
    est.warnings = warnings;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::super::tests::enumerate_moments;
    use super::super::{sample_energy, Branch};
    use super::*;
    use crate::exact::critical_temperature_2d;
    use crate::lattice::SquareLattice;
    use alloc::vec;

    #[test]
    fn single_temperature_is_plain_metropolis() {
        let g = SquareLattice::new(5, 5).unwrap().into_graph();
        let s = McSchedule::new(100, 2000, 21).with_branch(Branch::InitialOnly);
        let r = exchange_mc(&g, &[2.5], 1.0, &s).unwrap();
        let e = sample_energy(&g, &IsingParams::at_temperature(2.5).unwrap(), &s).unwrap();
        assert_eq!(r.observables[0].energy.mean, e.mean);
        assert!(r.swap_acceptance.is_empty());
    }

    #[test]
    fn ladder_validation() {
        let g = SquareLattice::new(3, 3).unwrap().into_graph();
        let s = McSchedule::new(1, 1, 0);
        assert!(exchange_mc(&g, &[], 1.0, &s).is_err());
        assert!(exchange_mc(&g, &[2.0, 1.0], 1.0, &s).is_err());
        assert!(exchange_mc(&g, &[0.0, 1.0], 1.0, &s).is_err());
    }

    #[test]
    fn ladder_matches_enumeration() {
        for (w, h) in [(2, 2), (4, 3)] {
            let g = SquareLattice::new(w, h).unwrap().into_graph();
            let temps = [1.5, 2.0, 2.6, 3.4];
            let s = McSchedule::new(2000, 60_000, 22);
            let r = exchange_mc(&g, &temps, 1.0, &s).unwrap();
            for (o, &t) in r.observables.iter().zip(&temps) {
                let ex = enumerate_moments(&g, &IsingParams::at_temperature(t).unwrap());
                let u_exact = 1.0 - ex[4] / (3.0 * ex[3] * ex[3]);
                for (est, exact) in [(o.energy, ex[0]), (o.abs_magnetization, ex[2]), (o.m2, ex[3])] {
                    assert!((est.mean - exact).abs() < 3.0 * est.error + 1e-12, "{w}x{h} T={t}: {est:?} vs {exact}");
                }
                assert!((o.binder.0 - u_exact).abs() < 3.0 * o.binder.1 + 1e-12, "U {:?} vs {u_exact}", o.binder);
                assert!(o.binder.0 > -3.0 * o.binder.1 && o.binder.0 < 2.0 / 3.0 + 3.0 * o.binder.1);
            }
            assert!(r.swap_acceptance.iter().all(|&a| a > 0.05));
        }
    }

    #[test]
    fn synthetic_crossing() {
        let ts: Vec<f64> = (0..9).map(|k| 1.0 + 0.25 * k as f64).collect();
        let small = BinderCurve {
            sites: 16,
            temperatures: ts.clone(),
            u: ts.iter().map(|t| 0.5 - 0.1 * (t - 2.0)).collect(),
            error: vec![1e-4; 9],
        };
        let large = BinderCurve {
            sites: 64,
            u: ts.iter().map(|t| 0.5 - 0.3 * (t - 2.0)).collect(),
            ..small.clone()
        };
        let est = tc_from_curves(vec![large, small], 1).unwrap();
        assert!((est.tc - 2.0).abs() < 1e-12);
        assert!(est.ci.0 <= 2.0 && est.ci.1 >= 2.0 && est.ci.1 - est.ci.0 < 0.01);
        assert_eq!(est.crossings[0].0, (16, 64));
    }

    #[test]
    fn no_crossing_is_an_error() {
        let ts = vec![1.0, 2.0, 3.0];
        let a = BinderCurve {
            sites: 4,
            temperatures: ts.clone(),
            u: vec![0.6, 0.5, 0.4],
            error: vec![0.0; 3],
        };
        let b = BinderCurve {
            sites: 9,
            u: vec![0.5, 0.4, 0.3],
            ..a.clone()
        };
        assert_eq!(tc_from_curves(vec![a, b], 0), Err(Error::NoCrossing));
    }

    #[test]
    fn square_lattice_binder_crossing_near_onsager() {
        let l8 = SquareLattice::new(8, 8).unwrap().into_graph();
        let l16 = SquareLattice::new(16, 16).unwrap().into_graph();
        let temps: Vec<f64> = (0..9).map(|k| 2.05 + 0.05 * k as f64).collect();
        let s = McSchedule::new(2000, 40_000, 23);
        let est = estimate_tc(&[&l16, &l8], &temps, 1.0, &s).unwrap();
        assert!((est.tc - critical_temperature_2d()).abs() < 0.05, "{est:?}");
    }
}
