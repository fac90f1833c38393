//! Seeded random streams.
//!
//! Every Markov chain and every trial owns a [`McRng`] (xoshiro256++). Streams
//! are derived from a master seed by hashing the seed together with a path of
//! integer labels (worker, temperature index, trial index, ...) through the
//! SplitMix64 finaliser, so the stream a task receives depends only on its
//! labels and never on how tasks are scheduled across threads.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type McRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a master seed with a sequence of labels into a child seed.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut h = mix64(master.wrapping_add(GOLDEN));
    for &label in labels {
        h = mix64(h ^ mix64(label.wrapping_add(GOLDEN)).wrapping_add(GOLDEN));
    }
    h
}

/// Independent generator for the stream identified by `labels`.
pub fn stream(master: u64, labels: &[u64]) -> McRng {
    McRng::seed_from_u64(derive_seed(master, labels))
}

/// Uniform double in `[0, 1)` built from the top 53 bits.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` (Lemire's multiply-shift, unbiased by rejection).
#[inline]
pub fn below<R: RngCore + ?Sized>(rng: &mut R, n: u64) -> u64 {
    debug_assert!(n > 0);
    loop {
        let x = rng.next_u64();
        let m = (x as u128) * (n as u128);
        let low = m as u64;
        if low >= n.wrapping_neg() % n {
            return (m >> 64) as u64;
        }
    }
}

/// Threshold `t` such that `next_u64() < t` happens with probability `p`.
pub fn probability_threshold(p: f64) -> u64 {
    if !(p > 0.0) {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        // 2^64 * p, saturating just below 2^64.
        let scaled = p * 18_446_744_073_709_551_616.0;
        if scaled >= 18_446_744_073_709_551_615.0 {
            u64::MAX
        } else {
            scaled as u64
        }
    }
}

/// Standard normal deviate (Box-Muller, one value per call).
pub fn normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let mut u1 = uniform(rng);
    while u1 <= 0.0 {
        u1 = uniform(rng);
    }
    let u2 = uniform(rng);
    crate::math::sqrt(-2.0 * crate::math::ln(u1)) * crate::math::cos(core::f64::consts::TAU * u2)
}
