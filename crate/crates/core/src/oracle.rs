//! Slow, independent reference computations used by the test suites.
//!
//! Nothing here calls into the modules it exists to check: the matrix
//! arithmetic, membership sums, and surface sampling are written out locally
//! so that an error in the production path cannot hide behind shared code.
//! These routines are orders of magnitude slower than the analytic paths and
//! are only meant for verification.

use crate::color::RgbAxis;
use crate::perceptual::DiscriminationEllipsoid;
use crate::util::SplitMix64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("interval family is empty")]
    EmptyIntervals,
    #[error("interval has lo {lo} > hi {hi}")]
    InvertedInterval { lo: f64, hi: f64 },
}

/// A feasible channel range [lo, hi] for one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, OracleError> {
        if lo > hi {
            return Err(OracleError::InvertedInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }
}

/// Smallest achievable max−min when each value x_i may be placed anywhere in
/// its interval: `max(0, max(lo) − min(hi))`.
///
/// If the intervals share a common point every x_i can sit on it (range 0);
/// otherwise the pixel with the highest lower bound and the pixel with the
/// lowest upper bound can get no closer than `max(lo) − min(hi)`.
pub fn interval_min_range(intervals: &[Interval]) -> Result<f64, OracleError> {
    if intervals.is_empty() {
        return Err(OracleError::EmptyIntervals);
    }
    let max_lo = intervals.iter().map(|i| i.lo).fold(f64::NEG_INFINITY, f64::max);
    let min_hi = intervals.iter().map(|i| i.hi).fold(f64::INFINITY, f64::min);
    Ok((max_lo - min_hi).max(0.0))
}

/// Brute-force check of [`interval_min_range`]: enumerates assignments where
/// each x_i is the clamp of some interval endpoint into interval i.
///
/// An optimal assignment exists in that grid: take any optimal x*, let v be
/// its maximum value. Replacing every x_i by clamp(v, lo_i, hi_i) keeps each
/// value inside its interval, does not raise the maximum, and does not lower
/// the minimum below max(lo); and v itself can be slid down to the nearest
/// endpoint-derived value without changing the range. Exponential in the
/// number of intervals; intended for small test families only.
pub fn interval_min_range_brute(intervals: &[Interval]) -> Result<f64, OracleError> {
    if intervals.is_empty() {
        return Err(OracleError::EmptyIntervals);
    }
    let mut endpoints: Vec<f64> = Vec::with_capacity(intervals.len() * 2);
    for iv in intervals {
        endpoints.push(iv.lo);
        endpoints.push(iv.hi);
    }
    let candidates: Vec<Vec<f64>> = intervals
        .iter()
        .map(|iv| endpoints.iter().map(|&v| v.clamp(iv.lo, iv.hi)).collect())
        .collect();

    let mut best = f64::INFINITY;
    let k = endpoints.len();
    let n = intervals.len();
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for cands in &candidates {
            let x = cands[c % k];
            c /= k;
            lo = lo.min(x);
            hi = hi.max(x);
        }
        best = best.min(hi - lo);
    }
    Ok(best)
}

/// Multiply a 3×3 matrix by a vector. Local copy so the oracle's arithmetic
/// path stays independent of the production transform code.
pub fn matvec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Normalized ellipsoid distance of a DKL point from an ellipsoid defined by
/// `center` and `axes`: Σ((k_i − κ_i)/axis_i)². A degenerate axis contributes
/// 0 for zero offset and +∞ otherwise. ≤ 1 means inside.
pub fn membership_in_dkl(center: [f64; 3], axes: [f64; 3], k: [f64; 3]) -> f64 {
    let mut sum = 0.0;
    for i in 0..3 {
        let off = k[i] - center[i];
        if axes[i] == 0.0 {
            if off != 0.0 {
                return f64::INFINITY;
            }
        } else {
            let term = off / axes[i];
            sum += term * term;
        }
    }
    sum
}

/// Extreme values of one RGB channel over an ellipsoid surface, found by
/// dense parametric sampling.
///
/// The surface is swept with a (θ, φ) grid of roughly `samples` points
/// (poles included), each DKL surface point mapped to RGB through
/// `dkl_to_rgb` by local matrix arithmetic. Converges to the analytic
/// extrema as the sample count grows; the error falls quadratically in the
/// angular step because the channel value is smooth at its extremum.
pub fn surface_sample_extrema(
    e: &DiscriminationEllipsoid,
    axis: RgbAxis,
    samples: usize,
    dkl_to_rgb: &[[f64; 3]; 3],
) -> (f64, f64) {
    assert!(samples >= 1, "need at least one sample");
    let chan = axis.channel_index();
    let center = e.center.as_array();
    let [a, b, c] = e.semi_axes;

    let side = (samples as f64).sqrt().ceil() as usize;
    let n_theta = side.max(2);
    let n_phi = side.max(3);

    let mut max_v = f64::NEG_INFINITY;
    let mut min_v = f64::INFINITY;
    for it in 0..n_theta {
        let theta = std::f64::consts::PI * it as f64 / (n_theta - 1) as f64;
        let (sin_t, cos_t) = theta.sin_cos();
        for ip in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
            let (sin_p, cos_p) = phi.sin_cos();
            let k = [
                center[0] + a * sin_t * cos_p,
                center[1] + b * sin_t * sin_p,
                center[2] + c * cos_t,
            ];
            let rgb = matvec(dkl_to_rgb, k);
            max_v = max_v.max(rgb[chan]);
            min_v = min_v.min(rgb[chan]);
        }
    }
    (max_v, min_v)
}

/// Randomized check of the convexity inequality
/// f(t·x₁ + (1−t)·x₂) ≤ t·f(x₁) + (1−t)·f(x₂) + slack.
///
/// The inequality is exact in real arithmetic; `slack` (1e-12 in the suites)
/// absorbs floating-point rounding only. Returns true when every trial
/// passes. Deterministic for a fixed seed.
pub fn convexity_probe<F>(f: F, dim: usize, trials: usize, seed: u64, slack: f64) -> bool
where
    F: Fn(&[f64]) -> f64,
{
    assert!(trials >= 1);
    let mut rng = SplitMix64::new(seed);
    let mut x1 = vec![0.0; dim];
    let mut x2 = vec![0.0; dim];
    let mut mix = vec![0.0; dim];
    for _ in 0..trials {
        for i in 0..dim {
            x1[i] = rng.next_range(-10.0, 10.0);
            x2[i] = rng.next_range(-10.0, 10.0);
        }
        let t = rng.next_f64();
        for i in 0..dim {
            mix[i] = t * x1[i] + (1.0 - t) * x2[i];
        }
        if f(&mix) > t * f(&x1) + (1.0 - t) * f(&x2) + slack {
            return false;
        }
    }
    true
}

/// max(x) − min(x); the relaxed per-channel objective the probe targets.
pub fn spread(x: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}
