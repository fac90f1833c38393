//! Error analysis for correlated Monte-Carlo time series.

use alloc::vec::Vec;

use crate::math::sqrt;

/// Minimum number of bins a binning level needs before its error estimate is
/// trusted.
pub const MIN_BINS: usize = 64;

/// Mean, binning error and integrated autocorrelation time of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub error: f64,
    /// Integrated autocorrelation time in units of the sample spacing.
    pub tau_int: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean treating samples as independent.
pub fn naive_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    sqrt(var / n as f64)
}

/// Logarithmic binning analysis.
///
/// Samples are averaged pairwise level by level; the reported error is the
/// largest error over all levels that still hold at least [`MIN_BINS`] bins,
/// which is the plateau value for a converged series and a conservative bound
/// otherwise.
pub fn binning(xs: &[f64]) -> Estimate {
    let m = mean(xs);
    let naive = naive_error(xs);
    let mut level: Vec<f64> = xs.to_vec();
    let mut error = naive;
    while level.len() / 2 >= MIN_BINS {
        level = level.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let e = naive_error(&level);
        if e > error {
            error = e;
        }
    }
    let tau_int = if naive > 0.0 {
        0.5 * (error / naive) * (error / naive)
    } else {
        0.5
    };
    Estimate {
        mean: m,
        error,
        tau_int,
    }
}

/// Jackknife estimate of a nonlinear function of several means.
///
/// `blocks[i][k]` is the mean of observable `k` within block `i`. Returns the
/// function of the overall means and the jackknife standard error.
pub fn jackknife(blocks: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let nb = blocks.len();
    if nb == 0 {
        return (f64::NAN, f64::NAN);
    }
    let dim = blocks[0].len();
    let mut total = alloc::vec![0.0; dim];
    for b in blocks {
        for (t, x) in total.iter_mut().zip(b) {
            *t += x;
        }
    }
    let full: Vec<f64> = total.iter().map(|t| t / nb as f64).collect();
    let estimate = f(&full);
    if nb < 2 {
        return (estimate, 0.0);
    }
    let mut leave = alloc::vec![0.0; dim];
    let values: Vec<f64> = blocks
        .iter()
        .map(|b| {
            for k in 0..dim {
                leave[k] = (total[k] - b[k]) / (nb - 1) as f64;
            }
            f(&leave)
        })
        .collect();
    let vm = mean(&values);
    let var = values.iter().map(|v| (v - vm) * (v - vm)).sum::<f64>();
    (estimate, sqrt(var * (nb - 1) as f64 / nb as f64))
}

/// Linear-interpolation percentile (`q` in `[0,1]`) of unsorted data.
pub fn percentile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(v.len() - 1);
    let frac = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * frac
}

/// Location where the piecewise-linear difference `a - b` over grid `xs`
/// changes sign, found by a local linear fit on the bracketing interval.
/// Returns all such crossings in grid order.
pub fn linear_crossings(xs: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let d0 = a[i] - b[i];
        let d1 = a[i + 1] - b[i + 1];
        if d0 == 0.0 {
            out.push(xs[i]);
        } else if d0 * d1 < 0.0 {
            out.push(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
        }
    }
    let n = xs.len();
    if n >= 1 && a[n - 1] == b[n - 1] && (n == 1 || a[n - 2] != b[n - 2]) {
        out.push(xs[n - 1]);
    }
    out
}
