//! Exact square-lattice Ising quantities in the thermodynamic limit.
//!
//! Even-body correlators on one row are determinants of Fourier coefficients
//! `C_r` of the symbol
//!
//! ```text
//! c(θ) = [2z(1+z²) − z²(1−z²)e^{iθ} − (1−z²)e^{−iθ}]
//!        / sqrt([(1+z²)² − 2z(1−z²)cos θ]² − 4z²(1−z²)²),   z = tanh βJ.
//! ```
//!
//! The symbol is evaluated in a rearranged but algebraically identical form
//! that avoids cancellation near the critical point, where the radicand
//! vanishes at `θ = 0` and `c` jumps by a sign.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{abs, cos, exp, ln, powf, powi, sin, sinh, sqrt, tanh};
use crate::{Error, Result};

/// Convergence target for the Fourier coefficients.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Smallest allowed quadrature grid.
pub const MIN_POINTS: usize = 256;
/// Grid floor when `|sinh 2βJ − 1| < 1e-3`.
pub const NEAR_CRITICAL_POINTS: usize = 1 << 16;
/// Largest grid tried before giving up.
pub const MAX_POINTS: usize = 1 << 24;

/// `Tc / J = 2 / ln(1 + √2)`.
pub fn critical_temperature_2d() -> f64 {
    2.0 / ln(1.0 + core::f64::consts::SQRT_2)
}

/// Ferromagnetic coupling `J` and inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub coupling: f64,
    pub beta: f64,
}

impl IsingParams {
    pub fn new(coupling: f64, beta: f64) -> Result<Self> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidArgument("coupling must be positive and finite"));
        }
        if !(beta >= 0.0) {
            return Err(Error::InvalidArgument("beta must be non-negative"));
        }
        Ok(Self { coupling, beta })
    }

    /// `J = 1` at temperature `t` (in units of `J`); `t = ∞` gives `β = 0`.
    pub fn at_temperature(t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("temperature must be positive"));
        }
        Self::new(1.0, 1.0 / t)
    }

    #[inline]
    pub fn beta_j(&self) -> f64 {
        self.beta * self.coupling
    }

    /// `z = tanh βJ ∈ [0, 1]`.
    #[inline]
    pub fn z(&self) -> f64 {
        tanh(self.beta_j())
    }

    pub fn temperature(&self) -> f64 {
        self.coupling / self.beta
    }

    /// Below the Onsager point (`sinh 2βJ > 1`).
    pub fn is_ordered(&self) -> bool {
        sinh(2.0 * self.beta_j()) > 1.0
    }
}

/// The symbol `c(θ)`.
pub fn symbol_c(theta: f64, params: &IsingParams) -> Result<Complex64> {
    let s2 = sin(0.5 * theta);
    symbol_from_half_angle(s2 * s2, cos(theta), sin(theta), params.z())
}

/// Symbol in terms of `s = sin²(θ/2)`, `cos θ` and `sin θ`.
///
/// With `g = z² + 2z − 1` the radicand factorises as
/// `(g² + 4z(1−z²)s) · ((1+z²)² + 4z(1−z²)s)` and the real part of the
/// numerator is `(1+z²)(g + 2(1−z²)s)`.
fn symbol_from_half_angle(s: f64, cos_t: f64, sin_t: f64, z: f64) -> Result<Complex64> {
    let w = 1.0 - z * z;
    let g = z * z + 2.0 * z - 1.0;
    let q = 4.0 * z * w * s;
    let radicand = (g * g + q) * ((1.0 + z * z) * (1.0 + z * z) + q);
    if !(radicand > 0.0) {
        let theta = libm::atan2(sin_t, cos_t);
        return Err(Error::SingularSymbol { theta, z });
    }
    let re = (1.0 + z * z) * (g + 2.0 * w * s);
    let im = w * w * sin_t;
    Ok(Complex64::new(re, im) / sqrt(radicand))
}

/// `φ − sin φ` without cancellation for small `φ`.
fn phi_minus_sin(phi: f64) -> f64 {
    if abs(phi) < 0.1 {
        let p2 = phi * phi;
        phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
    } else {
        phi - sin(phi)
    }
}

/// Fourier coefficients `C_r` for every `r` in `lo..=hi`, from one fixed
/// quadrature grid of `points` nodes.
///
/// The integral runs over `θ = φ − sin φ`, which clusters nodes at `θ = 0`
/// where the symbol varies fastest; the integrand stays `2π`-periodic in `φ`
/// so the trapezoidal rule keeps its spectral accuracy away from `Tc`. Nodes
/// sit at cell midpoints, so `θ = 0` itself is never sampled. Because
/// `c(−θ) = conj c(θ)` only the half range `φ ∈ (0, π)` is summed and the
/// coefficients are real.
pub fn fourier_coeffs_fixed(lo: i64, hi: i64, params: &IsingParams, points: usize) -> Result<Vec<f64>> {
    if lo > hi {
        return Ok(Vec::new());
    }
    let z = params.z();
    let half = points / 2;
    let h = core::f64::consts::TAU / points as f64;
    let rmax = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
    let mut cos_acc = alloc::vec![0.0; rmax + 1];
    let mut sin_acc = alloc::vec![0.0; rmax + 1];
    for k in 0..half {
        let phi = (k as f64 + 0.5) * h;
        let theta = phi_minus_sin(phi);
        let jac = 1.0 - cos(phi);
        let s = sin(0.5 * theta);
        let (ct, st) = (cos(theta), sin(theta));
        let c = symbol_from_half_angle(s * s, ct, st, z)?;
        let (re, im) = (c.re * jac, c.im * jac);
        // cos(rθ), sin(rθ) by the Chebyshev recurrence.
        let (mut cp, mut sp) = (1.0, 0.0);
        let (mut cc, mut sc) = (ct, st);
        cos_acc[0] += re;
        for r in 1..=rmax {
            cos_acc[r] += cc * re;
            sin_acc[r] += sc * im;
            let (cn, sn) = (2.0 * ct * cc - cp, 2.0 * ct * sc - sp);
            cp = cc;
            sp = sc;
            cc = cn;
            sc = sn;
        }
    }
    // C_r = (1/π) Σ h [cos(rθ) Re c + sin(rθ) Im c] J(φ)
    let scale = h / core::f64::consts::PI;
    Ok((lo..=hi)
        .map(|r| {
            let a = r.unsigned_abs() as usize;
            let sign = if r < 0 { -1.0 } else { 1.0 };
            scale * (cos_acc[a] + sign * sin_acc[a])
        })
        .collect())
}

/// Converged Fourier coefficients for `r ∈ lo..=hi`.
///
/// Starting from `start_points` (a power of two, at least 256) the grid is
/// doubled until two successive grids agree to [`QUADRATURE_TOL`] for every
/// requested `r`. Near the critical point the grid starts at
/// [`NEAR_CRITICAL_POINTS`].
pub fn fourier_coeffs(lo: i64, hi: i64, params: &IsingParams, start_points: usize) -> Result<Vec<f64>> {
    if start_points < MIN_POINTS || !start_points.is_power_of_two() {
        return Err(Error::InvalidArgument("quadrature points must be a power of two >= 256"));
    }
    let mut points = start_points;
    if abs(sinh(2.0 * params.beta_j()) - 1.0) < 1e-3 {
        points = points.max(NEAR_CRITICAL_POINTS);
    }
    let mut prev = fourier_coeffs_fixed(lo, hi, params, points)?;
    loop {
        let next_points = points * 2;
        if next_points > MAX_POINTS {
            let change = max_change(&prev, &fourier_coeffs_fixed(lo, hi, params, points / 2)?);
            return Err(Error::NonConvergence { points, change });
        }
        let next = fourier_coeffs_fixed(lo, hi, params, next_points)?;
        let change = max_change(&prev, &next);
        points = next_points;
        prev = next;
        if change <= QUADRATURE_TOL {
            return Ok(prev);
        }
    }
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| abs(x - y)).fold(0.0, f64::max)
}

/// Single Fourier coefficient `C_r`.
pub fn fourier_coeff(r: i64, params: &IsingParams, quadrature_points: usize) -> Result<f64> {
    Ok(fourier_coeffs(r, r, params, quadrature_points)?[0])
}

/// Strictly increasing, even-cardinality positions `j_1 < … < j_2k` on a row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCorrelatorSpec {
    positions: Vec<i64>,
}

impl RowCorrelatorSpec {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        if positions.len() < 2 || positions.len() % 2 == 1 {
            return Err(Error::InvalidArgument("row correlator needs an even number (>= 2) of positions"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("row positions must be strictly increasing"));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Row labels `l ∈ ⋃[j_{2n−1}, j_{2n} − 1]` and column labels
    /// `⋃{j_{2n−1}+1, …, j_{2n}}` of the determinant.
    pub fn index_sets(&self) -> (Vec<i64>, Vec<i64>) {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        for pair in self.positions.chunks_exact(2) {
            rows.extend(pair[0]..pair[1]);
            cols.extend(pair[0] + 1..=pair[1]);
        }
        (rows, cols)
    }

    /// Dimension `m = Σ (j_{2n} − j_{2n−1})` of the determinant.
    pub fn dimension(&self) -> usize {
        self.positions
            .chunks_exact(2)
            .map(|p| (p[1] - p[0]) as usize)
            .sum()
    }
}

/// Matrix `M[a][b] = C_{col_b − row_a − 1}`.
fn correlator_matrix(spec: &RowCorrelatorSpec, params: &IsingParams) -> Result<Vec<Vec<f64>>> {
    let (rows, cols) = spec.index_sets();
    let lo = cols[0] - rows[rows.len() - 1] - 1;
    let hi = cols[cols.len() - 1] - rows[0] - 1;
    let table = fourier_coeffs(lo, hi, params, MIN_POINTS)?;
    Ok(rows
        .iter()
        .map(|&l| cols.iter().map(|&c| table[(c - l - 1 - lo) as usize]).collect())
        .collect())
}

/// Even-body row correlator `⟨∏ X_{j_n}⟩` as a determinant (LU with
/// partial pivoting).
pub fn even_row_correlation(spec: &RowCorrelatorSpec, params: &IsingParams) -> Result<f64> {
    Ok(determinant(correlator_matrix(spec, params)?))
}

/// Same correlator by the literal signed sum over all permutations of the
/// column set. Limited to dimension 8.
pub fn even_row_correlation_bruteforce(spec: &RowCorrelatorSpec, params: &IsingParams) -> Result<f64> {
    let m = spec.dimension();
    if m > 8 {
        return Err(Error::BruteForceTooLarge(m));
    }
    Ok(permutation_sum(&correlator_matrix(spec, params)?))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| abs(a[i][k]).total_cmp(&abs(a[j][k])))
            .unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k + 1..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    det
}

/// `Σ_σ sign(σ) ∏_a M[a][σ(a)]`, enumerated with Heap's algorithm.
pub fn permutation_sum(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = alloc::vec![0usize; n];
    let mut sign = 1.0;
    let term = |perm: &[usize]| perm.iter().enumerate().map(|(r, &s)| a[r][s]).product::<f64>();
    let mut total = term(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            total += sign * term(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

/// Onsager–Yang spontaneous magnetisation `(1 − sinh⁻⁴ 2βJ)^{1/8}` in the
/// ordered phase, 0 otherwise.
pub fn spontaneous_magnetization(params: &IsingParams) -> f64 {
    let s = sinh(2.0 * params.beta_j());
    if !(s > 1.0) {
        return 0.0;
    }
    if s.is_infinite() {
        return 1.0;
    }
    powf(1.0 - powi(s, -4), 0.125)
}

/// Probability `e^{−2βJ} / (1 + e^{−2βJ})` of an independent thermal Z
/// error on a free-cluster qubit.
pub fn fch_error_probability(params: &IsingParams) -> f64 {
    let e = exp(-2.0 * params.beta_j());
    e / (1.0 + e)
}

/// Free-cluster Hadamard fidelity over `2l + 1` qubits, `(1 + tanh^l βJ)² / 4`.
pub fn fch_hadamard_fidelity(l: u32, params: &IsingParams) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidArgument("distance l must be >= 1"));
    }
    let t = powi(params.z(), l as i32);
    Ok((1.0 + t) * (1.0 + t) / 4.0)
}
