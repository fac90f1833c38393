//! Correlated random-plaquette gauge model (cRPGM).
//!
//! Gauge variables `σ_e` sit on primal edges and `σ̄_f` on dual edges (one
//! per primal face). With `P_f = ∏_{e ∈ ∂f} σ_e` and `P̄_e = ∏_{f ∋ e} σ̄_f`,
//!
//! ```text
//! H = -J Σ_{⟨f e⟩} u_f u_e P_f P̄_e
//! ```
//!
//! over adjacent face/edge pairs, with quenched signs `u` from an error chain.
//! Writing `a_f = u_f P_f` and `b_e = u_e P̄_e` turns `H` into the Ising
//! energy of `(a, b)` on the qubit graph; flipping `σ_e` flips `a` on the four
//! faces around `e`, flipping `σ̄_f` flips `b` on the four edges of `f`. The
//! chain below works directly on `(a, b)`.

use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::exact::IsingParams;
use crate::lattice::{ErrorChain, HomologyClass, RhgComplex, Sector, Syndrome};
use crate::math::{exp, sqrt};
use crate::mc::{McEstimate, McSchedule, McWarning};
use crate::rng::{probability_threshold, stream, McRng};
use crate::stats::{mean, naive_error};
use crate::{Error, Result};

/// Points of the thermodynamic-integration ladder, `β = 0` included.
pub const FE_LADDER_POINTS: usize = 21;

/// Largest `|Σ_{w ∈ N(v)} s_w Σ_{x ∈ N(w)} s_x|` on the 4-regular qubit graph.
const MAX_LOCAL: usize = 16;

/// Gauge variables indexed like the qubit graph: `sigma[f]` for face `f` is
/// `σ̄_f`, `sigma[F + e]` for edge `e` is `σ_e` (`F` faces).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeConfig {
    pub sigma: Vec<i8>,
}

impl GaugeConfig {
    pub fn all_up(complex: &RhgComplex) -> Self {
        Self {
            sigma: vec![1; complex.num_qubits()],
        }
    }

    pub fn random<R: RngCore + ?Sized>(complex: &RhgComplex, rng: &mut R) -> Self {
        Self {
            sigma: (0..complex.num_qubits())
                .map(|_| if rng.next_u64() >> 63 == 0 { 1 } else { -1 })
                .collect(),
        }
    }

    /// `σ_e` of primal edge `e`.
    pub fn edge(&self, complex: &RhgComplex, e: usize) -> i8 {
        self.sigma[complex.num_faces() + e]
    }

    /// `σ̄_f` of the dual edge crossing face `f`.
    pub fn dual_edge(&self, f: usize) -> i8 {
        self.sigma[f]
    }

    /// `P_f`, product of `σ_e` over the four edges of face `f`.
    pub fn plaquette(&self, complex: &RhgComplex, f: usize) -> i8 {
        complex.face_edges(f).iter().map(|&e| self.edge(complex, e)).product()
    }

    /// `P̄_e`, product of `σ̄_f` over the four faces around edge `e`.
    pub fn dual_plaquette(&self, complex: &RhgComplex, e: usize) -> i8 {
        complex.edge_faces(e).iter().map(|&f| self.dual_edge(f)).product()
    }

    /// Pointwise product (group operation).
    pub fn multiply(&self, other: &GaugeConfig) -> GaugeConfig {
        GaugeConfig {
            sigma: self.sigma.iter().zip(&other.sigma).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Quenched signs `u` (`-1` on the support of the generating chain) per
/// face and edge; the pair coupling is `u_f u_e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuenchedDisorder {
    pub u_face: Vec<i8>,
    pub u_edge: Vec<i8>,
}

impl QuenchedDisorder {
    pub fn from_chain(chain: &ErrorChain) -> Self {
        let sign = |b: bool| if b { -1 } else { 1 };
        Self {
            u_face: (0..chain.primal.len()).map(|f| sign(chain.primal.get(f))).collect(),
            u_edge: (0..chain.dual.len()).map(|e| sign(chain.dual.get(e))).collect(),
        }
    }

    #[inline]
    pub fn pair_sign(&self, f: usize, e: usize) -> i8 {
        self.u_face[f] * self.u_edge[e]
    }

    /// `u_f → u_f P'_f`, `u_e → u_e P̄'_e`: the disorder half of a gauge
    /// transformation by `g`.
    pub fn gauge_transform(&self, complex: &RhgComplex, g: &GaugeConfig) -> QuenchedDisorder {
        QuenchedDisorder {
            u_face: (0..self.u_face.len()).map(|f| self.u_face[f] * g.plaquette(complex, f)).collect(),
            u_edge: (0..self.u_edge.len()).map(|e| self.u_edge[e] * g.dual_plaquette(complex, e)).collect(),
        }
    }

    fn check(&self, complex: &RhgComplex) -> Result<()> {
        for len in [self.u_face.len(), self.u_edge.len()] {
            if len != complex.num_faces() {
                return Err(Error::SizeMismatch {
                    expected: complex.num_faces(),
                    got: len,
                });
            }
        }
        Ok(())
    }
}

/// `Σ_{⟨f e⟩} u_f u_e P_f P̄_e`.
fn crpgm_bond_sum(complex: &RhgComplex, disorder: &QuenchedDisorder, gauge: &GaugeConfig) -> i64 {
    let plaq: Vec<i8> = (0..complex.num_faces()).map(|f| gauge.plaquette(complex, f)).collect();
    let dual: Vec<i8> = (0..complex.num_edges()).map(|e| gauge.dual_plaquette(complex, e)).collect();
    let mut sum = 0i64;
    for f in 0..complex.num_faces() {
        for e in complex.face_edges(f) {
            sum += (disorder.pair_sign(f, e) * plaq[f] * dual[e]) as i64;
        }
    }
    sum
}

/// `H = -J Σ_{⟨f e⟩} u_f u_e P_f P̄_e`.
pub fn crpgm_energy(complex: &RhgComplex, disorder: &QuenchedDisorder, gauge: &GaugeConfig, coupling: f64) -> Result<f64> {
    disorder.check(complex)?;
    if gauge.sigma.len() != complex.num_qubits() {
        return Err(Error::SizeMismatch {
            expected: complex.num_qubits(),
            got: gauge.sigma.len(),
        });
    }
    Ok(-coupling * crpgm_bond_sum(complex, disorder, gauge) as f64)
}

/// Metropolis chain over gauge variables in the `(a, b)` representation.
#[derive(Debug, Clone)]
pub struct GaugeChain<'a> {
    complex: &'a RhgComplex,
    /// `a_f` for faces, then `b_e` for edges.
    s: Vec<i8>,
    gauge: GaugeConfig,
    bond_sum: i64,
    params: IsingParams,
    thresholds: [u64; MAX_LOCAL + 1],
    rng: McRng,
}

impl<'a> GaugeChain<'a> {
    /// All-up gauge start.
    pub fn new(complex: &'a RhgComplex, disorder: &QuenchedDisorder, params: IsingParams, rng: McRng) -> Result<Self> {
        disorder.check(complex)?;
        let s: Vec<i8> = disorder.u_face.iter().chain(&disorder.u_edge).copied().collect();
        let graph = complex.qubit_graph();
        let bond_sum = graph.bonds().map(|(i, j)| (s[i] * s[j]) as i64).sum();
        let mut chain = Self {
            complex,
            s,
            gauge: GaugeConfig::all_up(complex),
            bond_sum,
            params,
            thresholds: [0; MAX_LOCAL + 1],
            rng,
        };
        chain.set_params(params);
        Ok(chain)
    }

    /// Change the temperature, keeping the state.
    pub fn set_params(&mut self, params: IsingParams) {
        self.params = params;
        let bj = params.beta_j();
        self.thresholds[0] = 1 << 63;
        for d in 1..=MAX_LOCAL {
            self.thresholds[d] = probability_threshold(exp(-2.0 * bj * d as f64));
        }
    }

    pub fn params(&self) -> &IsingParams {
        &self.params
    }

    pub fn gauge(&self) -> &GaugeConfig {
        &self.gauge
    }

    /// `Σ_{⟨f e⟩} u_f u_e P_f P̄_e` of the current state.
    pub fn bond_sum(&self) -> i64 {
        self.bond_sum
    }

    pub fn energy(&self) -> f64 {
        -self.params.coupling * self.bond_sum as f64
    }

    /// One update of every gauge variable: primal edges, then dual edges.
    pub fn sweep(&mut self) {
        let faces = self.complex.num_faces();
        let n = self.complex.num_qubits();
        for v in (faces..n).chain(0..faces) {
            self.update(v);
        }
    }

    #[inline]
    fn update(&mut self, v: usize) {
        let graph = self.complex.qubit_graph();
        let mut d: i64 = 0;
        for &w in graph.neighbors(v) {
            let w = w as usize;
            let h: i64 = graph.neighbors(w).iter().map(|&x| self.s[x as usize] as i64).sum();
            d += self.s[w] as i64 * h;
        }
        if d < 0 || self.rng.next_u64() < self.thresholds[d as usize] {
            for &w in graph.neighbors(v) {
                self.s[w as usize] = -self.s[w as usize];
            }
            self.bond_sum -= 2 * d;
            self.gauge.sigma[v] = -self.gauge.sigma[v];
        }
    }

    /// Equilibrate, then measure the energy after every `thinning` sweeps.
    pub fn measure(&mut self, schedule: &McSchedule) -> McEstimate {
        for _ in 0..schedule.equilibration {
            self.sweep();
        }
        let mut samples = Vec::with_capacity(schedule.measurement);
        for _ in 0..schedule.measurement {
            for _ in 0..schedule.thinning {
                self.sweep();
            }
            samples.push(self.energy());
        }
        McEstimate::from_series(0, &samples)
    }
}

/// Thermal mean of the cRPGM energy for one disorder sample; the chain uses
/// the stream `(schedule.seed, labels)`.
pub fn crpgm_sample_energy(
    complex: &RhgComplex,
    params: &IsingParams,
    disorder: &QuenchedDisorder,
    schedule: &McSchedule,
    labels: &[u64],
) -> Result<McEstimate> {
    schedule.validate()?;
    let mut chain = GaugeChain::new(complex, disorder, *params, stream(schedule.seed, labels))?;
    Ok(chain.measure(schedule))
}

/// Thermal-then-disorder averaged cRPGM energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpgmEnergy {
    pub mean: f64,
    /// Standard error over disorder samples (thermal error alone for a
    /// single sample).
    pub error: f64,
    pub samples: Vec<McEstimate>,
    pub warnings: Vec<McWarning>,
}

impl CrpgmEnergy {
    pub fn from_samples(samples: Vec<McEstimate>) -> Self {
        let means: Vec<f64> = samples.iter().map(|e| e.mean).collect();
        let error = if samples.len() == 1 { samples[0].error } else { naive_error(&means) };
        let warnings = samples.iter().filter_map(|e| e.warning).collect();
        Self {
            mean: mean(&means),
            error,
            samples,
            warnings,
        }
    }
}

/// Disorder sample `k` uses labels `[k]`.
pub fn crpgm_internal_energy(
    complex: &RhgComplex,
    params: &IsingParams,
    disorders: &[QuenchedDisorder],
    schedule: &McSchedule,
) -> Result<CrpgmEnergy> {
    if disorders.is_empty() {
        return Err(Error::InvalidArgument("need at least one disorder sample"));
    }
    let samples = disorders
        .iter()
        .enumerate()
        .map(|(k, d)| crpgm_sample_energy(complex, params, d, schedule, &[k as u64]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrpgmEnergy::from_samples(samples))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyOptions {
    /// Ladder points from `β = 0` to the target, inclusive.
    pub ladder: usize,
    /// Sweeps per ladder point; the seed selects the streams.
    pub schedule: McSchedule,
}

impl Default for FreeEnergyOptions {
    fn default() -> Self {
        Self {
            ladder: FE_LADDER_POINTS,
            schedule: McSchedule::new(200, 1000, 0),
        }
    }
}

/// `βF` relative to `β = 0` (where every class has `Z = 2^#gauge`):
/// `βF = ∫_0^β ⟨H⟩ dβ'`, trapezoid rule on an even ladder. One chain is
/// annealed up the ladder; `⟨H⟩ = 0` exactly at `β = 0`.
pub fn integrate_free_energy(
    complex: &RhgComplex,
    disorder: &QuenchedDisorder,
    params: &IsingParams,
    options: &FreeEnergyOptions,
    labels: &[u64],
) -> Result<(f64, f64, Vec<McWarning>)> {
    options.schedule.validate()?;
    if options.ladder < 2 {
        return Err(Error::InvalidArgument("ladder needs at least 2 points"));
    }
    let steps = options.ladder - 1;
    let h = params.beta / steps as f64;
    let mut chain = GaugeChain::new(
        complex,
        disorder,
        IsingParams::new(params.coupling, h)?,
        stream(options.schedule.seed, labels),
    )?;
    let mut total = 0.0;
    let mut var = 0.0;
    let mut warnings = Vec::new();
    for k in 1..=steps {
        chain.set_params(IsingParams::new(params.coupling, h * k as f64)?);
        let est = chain.measure(&options.schedule);
        let w = if k == steps { 0.5 * h } else { h };
        total += w * est.mean;
        var += w * w * est.error * est.error;
        warnings.extend(est.warning);
    }
    Ok((total, sqrt(var), warnings))
}

/// Outcome of free-energy decoding relative to a reference correction `C'`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyDecision {
    /// Scored classes: trivial, primal x/y/z, dual x/y/z.
    pub classes: Vec<HomologyClass>,
    /// `βF_i` up to a class-independent constant.
    pub beta_free_energy: Vec<f64>,
    pub errors: Vec<f64>,
    /// `p_i = exp(-β(F_i - F_tot))` normalised over the scored classes.
    pub probabilities: Vec<f64>,
    /// Class added to `C'`: the primal and dual choices combined.
    pub chosen: HomologyClass,
    /// Best and runner-up of some sector are within their error bars.
    pub inconclusive: bool,
    pub correction: ErrorChain,
    pub warnings: Vec<McWarning>,
}

/// Score `C' + V_i` for the trivial and single-axis classes, pick the
/// lowest free energy per sector. Class `i` uses labels `[i]`.
pub fn free_energy_decode(
    complex: &RhgComplex,
    syndrome: &Syndrome,
    reference: &ErrorChain,
    params: &IsingParams,
    options: &FreeEnergyOptions,
) -> Result<FreeEnergyDecision> {
    if &complex.syndrome(reference)? != syndrome {
        return Err(Error::InvalidArgument("reference chain does not reproduce the syndrome"));
    }
    let mut classes = vec![HomologyClass::TRIVIAL];
    let mut reps = vec![ErrorChain::new(complex)];
    for sector in [Sector::Primal, Sector::Dual] {
        for axis in 0..3 {
            classes.push(HomologyClass::single(sector, axis));
            reps.push(complex.logical(sector, axis));
        }
    }
    let mut f = Vec::with_capacity(classes.len());
    let mut errors = Vec::with_capacity(classes.len());
    let mut warnings = Vec::new();
    for (i, rep) in reps.iter().enumerate() {
        let disorder = QuenchedDisorder::from_chain(&reference.symmetric_difference(rep));
        let (bf, err, w) = integrate_free_energy(complex, &disorder, params, options, &[i as u64])?;
        f.push(bf);
        errors.push(err);
        warnings.extend(w);
    }
    let fmin = f.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = f.iter().map(|x| exp(-(x - fmin))).collect();
    let z: f64 = weights.iter().sum();
    let probabilities = weights.iter().map(|w| w / z).collect();

    let mut chosen = HomologyClass::TRIVIAL;
    let mut inconclusive = false;
    let mut correction = reference.clone();
    for group in [[0, 1, 2, 3], [0, 4, 5, 6]] {
        let mut order = group;
        order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        let (best, second) = (order[0], order[1]);
        if f[second] - f[best] <= errors[best] + errors[second] {
            inconclusive = true;
        }
        chosen = chosen ^ classes[best];
        correction.xor_with(&reps[best]);
    }
    Ok(FreeEnergyDecision {
        classes,
        beta_free_energy: f,
        errors,
        probabilities,
        chosen,
        inconclusive,
        correction,
        warnings,
    })
}
