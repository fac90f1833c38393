//! Identity and Hadamard gate fidelities on thermal cluster states.
//!
//! For a chain of `len` qubits the first `len − 1` are measured in the X
//! basis. A thermal error pattern `e` corrupts the gate unless both byproduct
//! parities `r^X_e` (even positions) and `r^Z_e` (odd positions) vanish, so
//!
//! ```text
//! F = Tr[(I + ∏_{S_X} K)/2 · (I + ∏_{S_Z} K)/2 · ρ]
//!   = ¼ (1 + ⟨∏_{S_X} K⟩ + ⟨∏_{S_Z} K⟩ + ⟨∏_{S_X △ S_Z} K⟩).
//! ```
//!
//! For the free cluster model each stabilizer is independent with
//! `⟨K⟩ = tanh βJ`. For the interacting model a product of stabilizers along
//! one row equals the Ising X-correlator at the same positions.

use alloc::vec::Vec;

use crate::exact::{even_row_correlation, IsingParams, RowCorrelatorSpec};
use crate::lattice::SquareLattice;
use crate::math::powi;
use crate::mc::{sample_correlators, McSchedule, McWarning};
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Identity,
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Free cluster Hamiltonian `-J Σ K_i`.
    Fch,
    /// Interacting cluster Hamiltonian `-J Σ K_i K_j` on the square lattice.
    Ich,
}

/// Which stabilizer sets enter the two projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Reading {
    /// `S_X` = even measured positions, `S_Z` = odd measured positions.
    #[default]
    Resolved,
    /// Both projectors over `K_{2i}`, for `i ≤ ⌈(len−1)/2⌉` and `i ≤ ⌈len/2⌉`
    /// respectively, taken as printed.
    Literal,
}

/// Byproduct parities of a list of outcomes `m_1, m_2, …`:
/// `r^X` sums even positions, `r^Z` odd positions (mod 2).
pub fn compute_byproduct(outcomes: &[bool]) -> (bool, bool) {
    let mut rx = false;
    let mut rz = false;
    for (k, &m) in outcomes.iter().enumerate() {
        if (k + 1) % 2 == 0 {
            rx ^= m;
        } else {
            rz ^= m;
        }
    }
    (rx, rz)
}

/// A one-row MBQC wire of `len` qubits and the two stabilizer sets of its
/// fidelity projector. Positions count from 1 along the row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateSpec {
    pub gate: Gate,
    pub len: usize,
    pub reading: Reading,
    pub s_x: Vec<i64>,
    pub s_z: Vec<i64>,
}

impl GateSpec {
    /// Wire of `len ≥ 2` qubits. An even length gives the identity gate and
    /// an odd length the Hadamard gate.
    pub fn from_len(len: usize, reading: Reading) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidArgument("chain length must be >= 2"));
        }
        let gate = if len % 2 == 0 { Gate::Identity } else { Gate::Hadamard };
        let (s_x, s_z) = match reading {
            Reading::Resolved => (
                (1..len as i64).filter(|p| p % 2 == 0).collect(),
                (1..len as i64).filter(|p| p % 2 == 1).collect(),
            ),
            Reading::Literal => (
                (1..=(len as i64 - 1 + 1) / 2).map(|i| 2 * i).collect(),
                (1..=(len as i64 + 1) / 2).map(|i| 2 * i).collect(),
            ),
        };
        Ok(Self {
            gate,
            len,
            reading,
            s_x,
            s_z,
        })
    }

    /// Identity gate `F(2l)`.
    pub fn identity(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidArgument("distance l must be >= 1"));
        }
        Self::from_len(2 * l, Reading::Resolved)
    }

    /// Hadamard gate `F(2l + 1)`.
    pub fn hadamard(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidArgument("distance l must be >= 1"));
        }
        Self::from_len(2 * l + 1, Reading::Resolved)
    }

    pub fn with_reading(&self, reading: Reading) -> Self {
        Self::from_len(self.len, reading).expect("length already validated")
    }

    /// Measured positions `1..len−1`.
    pub fn measured(&self) -> core::ops::Range<i64> {
        1..self.len as i64
    }

    /// The three stabilizer sets of the expansion: `S_X`, `S_Z`, `S_X △ S_Z`.
    pub fn correlator_sets(&self) -> [Vec<i64>; 3] {
        let mut sym: Vec<i64> = self
            .s_x
            .iter()
            .filter(|p| !self.s_z.contains(p))
            .chain(self.s_z.iter().filter(|p| !self.s_x.contains(p)))
            .copied()
            .collect();
        sym.sort_unstable();
        [self.s_x.clone(), self.s_z.clone(), sym]
    }
}

/// How one stabilizer expectation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Exact,
    MonteCarlo,
    /// Odd correlator at or above `Tc`, zero by spin-flip symmetry.
    SymmetricZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityPoint {
    pub spec: GateSpec,
    pub model: Model,
    pub temperature: f64,
    pub fidelity: f64,
    /// Statistical error, 0 when every correlator is exact.
    pub error: f64,
    /// Expectations of `∏_{S_X} K`, `∏_{S_Z} K`, `∏_{S_X △ S_Z} K`.
    pub correlators: [f64; 3],
    pub provenance: [Provenance; 3],
    pub warnings: Vec<McWarning>,
}

/// Monte-Carlo settings for odd-body correlators of the interacting model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityOptions {
    /// Side of the periodic square lattice.
    pub lattice: usize,
    pub schedule: McSchedule,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        Self {
            lattice: 150,
            schedule: McSchedule::new(1500, 100_000, 0),
        }
    }
}

/// Gate fidelity at temperature `t` (units of `J = 1`).
pub fn fidelity(spec: &GateSpec, t: f64, model: Model, options: &FidelityOptions) -> Result<FidelityPoint> {
    let params = IsingParams::at_temperature(t)?;
    let sets = spec.correlator_sets();
    let mut values = [0.0; 3];
    let mut errors = [0.0; 3];
    let mut provenance = [Provenance::Exact; 3];
    let mut warnings = Vec::new();
    match model {
        Model::Fch => {
            let z = params.z();
            for (k, s) in sets.iter().enumerate() {
                values[k] = powi(z, s.len() as i32);
            }
        }
        Model::Ich => {
            let mut mc_sets = Vec::new();
            for (k, s) in sets.iter().enumerate() {
                if s.is_empty() {
                    values[k] = 1.0;
                } else if s.len() % 2 == 0 {
                    values[k] = even_row_correlation(&RowCorrelatorSpec::new(s.clone())?, &params)?;
                } else if !params.is_ordered() {
                    provenance[k] = Provenance::SymmetricZero;
                } else {
                    provenance[k] = Provenance::MonteCarlo;
                    mc_sets.push(k);
                }
            }
            if !mc_sets.is_empty() {
                options.schedule.validate()?;
                let lattice = SquareLattice::new(options.lattice, options.lattice)?;
                let sites: Vec<Vec<usize>> = mc_sets
                    .iter()
                    .map(|&k| sets[k].iter().map(|&p| lattice.site(0, p as usize)).collect())
                    .collect();
                let est = sample_correlators(lattice.graph(), &sites, &params, &options.schedule)?;
                for (&k, e) in mc_sets.iter().zip(&est) {
                    values[k] = e.mean;
                    errors[k] = e.error;
                    warnings.extend(e.warning);
                }
            }
        }
    }
    let fidelity = 0.25 * (1.0 + values[0] + values[1] + values[2]);
    // The three estimates come from one chain; adding errors linearly bounds
    // the error of their sum for any correlation between them.
    let error = 0.25 * (errors[0] + errors[1] + errors[2]);
    Ok(FidelityPoint {
        spec: spec.clone(),
        model,
        temperature: t,
        fidelity,
        error,
        correlators: values,
        provenance,
        warnings,
    })
}

/// Fidelity on a temperature grid; point `k` uses the schedule seed hashed
/// with `k`.
pub fn fidelity_curve(
    spec: &GateSpec,
    temperatures: &[f64],
    model: Model,
    options: &FidelityOptions,
) -> Result<Vec<FidelityPoint>> {
    if temperatures.is_empty() {
        return Err(Error::InvalidArgument("temperature grid is empty"));
    }
    temperatures
        .iter()
        .enumerate()
        .map(|(k, &t)| fidelity(spec, t, model, &point_options(options, k)))
        .collect()
}

/// Options for grid point `k` of a curve.
pub fn point_options(options: &FidelityOptions, k: usize) -> FidelityOptions {
    FidelityOptions {
        schedule: options
            .schedule
            .with_seed(derive_seed(options.schedule.seed, &[k as u64])),
        ..*options
    }
}

/// `dF/dT` by central differences (one-sided at the ends) on a strictly
/// increasing grid of at least three points.
pub fn fidelity_derivative(temperatures: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = temperatures.len();
    if n < 3 {
        return Err(Error::InvalidArgument("derivative needs at least 3 grid points"));
    }
    if values.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: values.len(),
        });
    }
    if temperatures.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("temperature grid must be strictly increasing"));
    }
    let t = temperatures;
    let f = values;
    Ok((0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (f[b] - f[a]) / (t[b] - t[a])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::fch_hadamard_fidelity;
    use crate::math::tanh;
    use crate::rng::{below, stream};
    use alloc::vec;
    use proptest::prelude::*;

    fn small_options() -> FidelityOptions {
        FidelityOptions {
            lattice: 24,
            schedule: McSchedule::new(200, 4000, 5),
        }
    }

    #[test]
    fn byproduct_examples() {
        assert_eq!(compute_byproduct(&[false; 6]), (false, false));
        assert_eq!(compute_byproduct(&[true, false, false, false]), (false, true));
        assert_eq!(compute_byproduct(&[false, true, false, true, true]), (false, true));
        let mut rng = stream(31, &[]);
        for _ in 0..100 {
            let m: Vec<bool> = (0..9).map(|_| below(&mut rng, 2) == 1).collect();
            let rx = (1..=9).filter(|i| i % 2 == 0).filter(|&i| m[i - 1]).count() % 2 == 1;
            let rz = (1..=9).filter(|i| i % 2 == 1).filter(|&i| m[i - 1]).count() % 2 == 1;
            assert_eq!(compute_byproduct(&m), (rx, rz));
        }
    }

    #[test]
    fn spec_sets() {
        let h = GateSpec::hadamard(2).unwrap();
        assert_eq!(h.len, 5);
        assert_eq!((h.s_x.clone(), h.s_z.clone()), (vec![2, 4], vec![1, 3]));
        assert_eq!(h.correlator_sets()[2], vec![1, 2, 3, 4]);
        let i = GateSpec::identity(3).unwrap();
        assert_eq!(i.gate, Gate::Identity);
        assert_eq!((i.s_x.clone(), i.s_z.clone()), (vec![2, 4], vec![1, 3, 5]));
        let lit = GateSpec::hadamard(2).unwrap().with_reading(Reading::Literal);
        assert_eq!((lit.s_x.clone(), lit.s_z.clone()), (vec![2, 4], vec![2, 4, 6]));
        assert_eq!(lit.correlator_sets()[2], vec![6]);
        assert!(GateSpec::from_len(1, Reading::Resolved).is_err());
        assert!(GateSpec::identity(0).is_err());
    }

    #[test]
    fn resolved_sets_partition_measured_positions() {
        for len in 2..20 {
            let s = GateSpec::from_len(len, Reading::Resolved).unwrap();
            let mut all: Vec<i64> = s.s_x.iter().chain(&s.s_z).copied().collect();
            all.sort();
            assert_eq!(all, s.measured().collect::<Vec<_>>());
            assert!(s.s_x.iter().all(|p| !s.s_z.contains(p)));
        }
    }

    #[test]
    fn fch_hadamard_matches_closed_form() {
        for l in 1..=10 {
            let spec = GateSpec::hadamard(l).unwrap();
            for k in 0..50 {
                let t = 0.1 + 0.1 * k as f64;
                let f = fidelity(&spec, t, Model::Fch, &FidelityOptions::default()).unwrap();
                let closed = fch_hadamard_fidelity(l as u32, &IsingParams::at_temperature(t).unwrap()).unwrap();
                assert!((f.fidelity - closed).abs() < 1e-12);
                assert_eq!(f.error, 0.0);
            }
        }
    }

    /// Dense real matrices on `n ≤ 8` qubits for the literal projector trace.
    struct Dense {
        dim: usize,
        a: Vec<f64>,
    }

    impl Dense {
        fn identity(n: usize) -> Self {
            let dim = 1 << n;
            let mut a = vec![0.0; dim * dim];
            for i in 0..dim {
                a[i * dim + i] = 1.0;
            }
            Self { dim, a }
        }

        /// `Z_{i−1} X_i Z_{i+1}` on an open chain, qubits `0..n`.
        fn stabilizer(n: usize, i: usize) -> Self {
            let dim = 1 << n;
            let mut a = vec![0.0; dim * dim];
            for col in 0..dim {
                let row = col ^ (1 << i);
                let mut sign = 1.0;
                for j in [i.wrapping_sub(1), i + 1] {
                    if j < n && row >> j & 1 == 1 {
                        sign = -sign;
                    }
                }
                a[row * dim + col] = sign;
            }
            Self { dim, a }
        }

        fn mul(&self, o: &Dense) -> Dense {
            let d = self.dim;
            let mut a = vec![0.0; d * d];
            for i in 0..d {
                for k in 0..d {
                    let x = self.a[i * d + k];
                    if x != 0.0 {
                        for j in 0..d {
                            a[i * d + j] += x * o.a[k * d + j];
                        }
                    }
                }
            }
            Dense { dim: d, a }
        }

        fn affine(&self, c0: f64, c1: f64) -> Dense {
            let d = self.dim;
            let mut a: Vec<f64> = self.a.iter().map(|x| c1 * x).collect();
            for i in 0..d {
                a[i * d + i] += c0;
            }
            Dense { dim: d, a }
        }

        fn trace(&self) -> f64 {
            (0..self.dim).map(|i| self.a[i * self.dim + i]).sum()
        }
    }

    /// `Tr[P_X P_Z ρ]` with `ρ = ∏_i (I + t K_i) / 2^n` the free-cluster
    /// thermal state of the open chain, positions `1..=n`.
    fn dense_fch_fidelity(spec: &GateSpec, t: f64) -> f64 {
        let n = spec.len;
        let z = tanh(1.0 / t);
        let mut rho = Dense::identity(n);
        for i in 0..n {
            rho = rho.mul(&Dense::stabilizer(n, i).affine(1.0, z));
        }
        let product = |set: &[i64]| {
            set.iter()
                .fold(Dense::identity(n), |acc, &p| acc.mul(&Dense::stabilizer(n, p as usize - 1)))
        };
        let px = product(&spec.s_x).affine(0.5, 0.5);
        let pz = product(&spec.s_z).affine(0.5, 0.5);
        px.mul(&pz).mul(&rho).trace() / (1u64 << n) as f64
    }

    #[test]
    fn fch_expansion_matches_density_matrix() {
        for len in 2..=8 {
            for reading in [Reading::Resolved, Reading::Literal] {
                let spec = GateSpec::from_len(len, reading).unwrap();
                if spec.s_z.iter().chain(&spec.s_x).any(|&p| p as usize > len) {
                    continue;
                }
                for t in [0.2, 0.7, 1.5, 4.0] {
                    let f = fidelity(&spec, t, Model::Fch, &FidelityOptions::default()).unwrap();
                    let d = dense_fch_fidelity(&spec, t);
                    assert!((f.fidelity - d).abs() < 1e-10, "len={len} {reading:?} T={t}: {} vs {d}", f.fidelity);
                }
            }
        }
    }

    #[test]
    fn ich_limits() {
        let opts = small_options();
        for spec in [GateSpec::identity(3).unwrap(), GateSpec::hadamard(3).unwrap()] {
            let hot = fidelity(&spec, 1e12, Model::Ich, &opts).unwrap();
            assert!((hot.fidelity - 0.25).abs() < 1e-9, "{hot:?}");
            let cold = fidelity(&spec, 0.02, Model::Ich, &opts).unwrap();
            assert!((cold.fidelity - 1.0).abs() < 1e-9, "{cold:?}");
        }
    }

    #[test]
    fn ich_even_hadamard_is_exact() {
        for l in [2, 4] {
            let spec = GateSpec::hadamard(l).unwrap();
            for t in [1.0, 2.0, 2.5] {
                let f = fidelity(&spec, t, Model::Ich, &small_options()).unwrap();
                assert_eq!(f.error, 0.0);
                assert_eq!(f.provenance, [Provenance::Exact; 3]);
                assert!(f.fidelity >= 0.25 - 1e-12 && f.fidelity <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn ich_odd_sets_use_symmetry_above_tc() {
        let spec = GateSpec::identity(2).unwrap();
        let f = fidelity(&spec, 3.0, Model::Ich, &small_options()).unwrap();
        assert_eq!(f.provenance[0], Provenance::SymmetricZero);
        assert_eq!(f.error, 0.0);
        let g = fidelity(&spec, 1.5, Model::Ich, &small_options()).unwrap();
        assert_eq!(g.provenance[0], Provenance::MonteCarlo);
        assert!(g.error > 0.0);
    }

    #[test]
    fn curve_point_equals_single_evaluation() {
        let spec = GateSpec::identity(2).unwrap();
        let opts = small_options();
        let temps = [1.2, 1.8, 2.6];
        let curve = fidelity_curve(&spec, &temps, Model::Ich, &opts).unwrap();
        let single = fidelity(&spec, temps[1], Model::Ich, &point_options(&opts, 1)).unwrap();
        assert_eq!(curve[1], single);
        assert!(fidelity_curve(&spec, &[], Model::Fch, &opts).is_err());
    }

    #[test]
    fn fch_fidelity_falls_with_length() {
        for t in [0.3, 0.8, 2.0] {
            let mut prev = 1.0;
            for len in 2..16 {
                let f = fidelity(&GateSpec::from_len(len, Reading::Resolved).unwrap(), t, Model::Fch, &FidelityOptions::default())
                    .unwrap()
                    .fidelity;
                assert!(f <= prev + 1e-15);
                prev = f;
            }
        }
    }

    #[test]
    fn derivative_cases() {
        let t = [1.0, 1.5, 2.5, 3.0];
        assert_eq!(fidelity_derivative(&t, &[0.7; 4]).unwrap(), vec![0.0; 4]);
        let lin: Vec<f64> = t.iter().map(|x| 3.0 - 0.5 * x).collect();
        for d in fidelity_derivative(&t, &lin).unwrap() {
            assert!((d + 0.5).abs() < 1e-14);
        }
        assert!(fidelity_derivative(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(fidelity_derivative(&[1.0, 3.0, 2.0], &[0.0; 3]).is_err());
        assert!(fidelity_derivative(&[1.0, 1.0, 2.0], &[0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn fch_factorises(len in 2usize..30, t in 0.05f64..8.0) {
            let spec = GateSpec::from_len(len, Reading::Resolved).unwrap();
            let f = fidelity(&spec, t, Model::Fch, &FidelityOptions::default()).unwrap();
            let z = tanh(1.0 / t);
            let closed = (1.0 + powi(z, spec.s_x.len() as i32)) * (1.0 + powi(z, spec.s_z.len() as i32)) / 4.0;
            prop_assert!((f.fidelity - closed).abs() < 1e-12);
            prop_assert!(f.fidelity >= 0.25 - 1e-15 && f.fidelity <= 1.0 + 1e-15);
        }
    }
}
