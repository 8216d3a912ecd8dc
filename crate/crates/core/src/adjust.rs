//! Per-tile color adjustment: shrink a tile's channel range inside each
//! pixel's discrimination ellipsoid before base+delta encoding.
//!
//! Minimizing encoded bits per tile is non-convex in general, but relaxing
//! the objective to the pre-quantization channel spread `max − min` along a
//! single axis (Red or Blue) yields a convex problem with a closed-form
//! optimum. Each pixel's ellipsoid admits a feasible channel interval
//! `[low, high]` between its extrema points; with `HL` the highest of the
//! lows and `LH` the lowest of the highs, two cases cover everything:
//!
//! * `HL > LH` (intervals do not all intersect): pull pixels above `HL` down
//!   to it and pixels below `LH` up to it. The residual spread `HL − LH`
//!   is the optimum for the relaxed objective.
//! * `HL ≤ LH` (a common plane cuts every ellipsoid): move every pixel onto
//!   the plane `(HL + LH)/2`; the spread collapses to zero.
//!
//! All movement happens along each pixel's extrema vector, so adjusted colors
//! stay on the chord between the extrema and never leave their ellipsoid.
//! Both axes are tried independently and the candidate with the smallest
//! encoded size wins; the unadjusted tile is always a candidate, so
//! adjustment never costs bits.

use crate::codec::{encode_tile, EncodedTile, SrgbTile};
use crate::color::{DklTransform, LinearColor, RgbAxis};
use crate::geometry::{extrema_points, ExtremaPair};
use crate::perceptual::DiscriminationEllipsoid;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AdjustError {
    #[error("tile pixel count {got} does not match {n}x{n}")]
    TileSizeMismatch { got: usize, n: usize },
    #[error("{pixels} pixels but {ellipsoids} ellipsoids")]
    LengthMismatch { pixels: usize, ellipsoids: usize },
    #[error("no extrema pairs given")]
    EmptyExtrema,
    #[error("extrema pairs mix axes")]
    MixedAxes,
}

/// An n×n block of linear-RGB pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    n: usize,
    pixels: Vec<LinearColor>,
}

impl Tile {
    pub fn new(n: usize, pixels: Vec<LinearColor>) -> Result<Self, AdjustError> {
        if pixels.len() != n * n {
            return Err(AdjustError::TileSizeMismatch {
                got: pixels.len(),
                n,
            });
        }
        Ok(Self { n, pixels })
    }

    pub fn from_srgb(tile: &SrgbTile) -> Self {
        Self {
            n: tile.size(),
            pixels: tile.pixels().iter().map(|p| p.to_linear()).collect(),
        }
    }

    pub fn to_srgb(&self) -> SrgbTile {
        SrgbTile::new(self.n, self.pixels.iter().map(|p| p.to_srgb()).collect())
            .expect("tile invariant holds")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn pixels(&self) -> &[LinearColor] {
        &self.pixels
    }

    /// max − min of one channel across the tile.
    pub fn channel_spread(&self, axis: RgbAxis) -> f64 {
        let chan = axis.channel_index();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pixels {
            let v = p.channel(chan);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }
}

/// Which of the two closed-form cases applied to a tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdjustCase {
    /// Disjoint feasible intervals: range shrunk to `HL − LH`.
    Shrink,
    /// A common plane existed: range collapsed to zero.
    Collapse,
    /// No adjustment applied (foveal bypass, or the unadjusted tile won).
    Skipped,
}

/// The pair of cut planes for one axis over a tile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePair {
    /// Highest of the per-pixel interval lows (`HL`).
    pub highest_low: f64,
    /// Lowest of the per-pixel interval highs (`LH`).
    pub lowest_high: f64,
    pub axis: RgbAxis,
}

impl PlanePair {
    /// True when no single plane cuts every ellipsoid.
    pub fn is_disjoint(&self) -> bool {
        self.highest_low > self.lowest_high
    }
}

/// Reduces per-pixel extrema to the HL/LH plane pair.
pub fn compute_planes(extrema: &[ExtremaPair]) -> Result<PlanePair, AdjustError> {
    let first = extrema.first().ok_or(AdjustError::EmptyExtrema)?;
    let axis = first.axis;
    if extrema.iter().any(|e| e.axis != axis) {
        return Err(AdjustError::MixedAxes);
    }
    let highest_low = extrema
        .iter()
        .map(|e| e.low_channel())
        .fold(f64::NEG_INFINITY, f64::max);
    let lowest_high = extrema
        .iter()
        .map(|e| e.high_channel())
        .fold(f64::INFINITY, f64::min);
    Ok(PlanePair {
        highest_low,
        lowest_high,
        axis,
    })
}

/// Result of adjusting one tile along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisAdjustment {
    pub pixels: Vec<LinearColor>,
    pub case: AdjustCase,
    pub planes: PlanePair,
    /// True when any move was shortened at the gamut boundary; the optimal
    /// spread is then not guaranteed.
    pub clamped: bool,
}

/// Adjusts every pixel of a tile along one axis using the two-case
/// closed-form solution. `ellipsoids[i]` must be centered on `pixels[i]`.
pub fn adjust_tile_axis(
    tile: &Tile,
    ellipsoids: &[DiscriminationEllipsoid],
    axis: RgbAxis,
    transform: &DklTransform,
) -> Result<AxisAdjustment, AdjustError> {
    if ellipsoids.len() != tile.pixels.len() {
        return Err(AdjustError::LengthMismatch {
            pixels: tile.pixels.len(),
            ellipsoids: ellipsoids.len(),
        });
    }
    #[cfg(debug_assertions)]
    for (p, e) in tile.pixels.iter().zip(ellipsoids) {
        let k = transform.rgb_to_dkl(*p).as_array();
        let c = e.center.as_array();
        let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        debug_assert!(
            (0..3).all(|i| (k[i] - c[i]).abs() <= 1e-9 * scale),
            "ellipsoid center does not match pixel"
        );
    }

    let pairs: Vec<ExtremaPair> = ellipsoids
        .iter()
        .map(|e| extrema_points(e, axis, transform))
        .collect();
    let planes = compute_planes(&pairs)?;
    let chan = axis.channel_index();

    let mut clamped = false;
    let mut pixels = Vec::with_capacity(tile.pixels.len());
    let case = if planes.is_disjoint() {
        for (pixel, pair) in tile.pixels.iter().zip(&pairs) {
            let v = pixel.channel(chan);
            let moved = if v > planes.highest_low {
                move_along_chord(*pixel, pair, planes.highest_low, &mut clamped)
            } else if v < planes.lowest_high {
                move_along_chord(*pixel, pair, planes.lowest_high, &mut clamped)
            } else {
                *pixel
            };
            pixels.push(moved);
        }
        AdjustCase::Shrink
    } else {
        let plane = 0.5 * (planes.highest_low + planes.lowest_high);
        for (pixel, pair) in tile.pixels.iter().zip(&pairs) {
            pixels.push(move_along_chord(*pixel, pair, plane, &mut clamped));
        }
        AdjustCase::Collapse
    };

    Ok(AxisAdjustment {
        pixels,
        case,
        planes,
        clamped,
    })
}

/// Moves a pixel along its extrema chord until the chosen channel reaches
/// `target`, shortening the move at the gamut boundary if needed. The chord
/// parameter is clamped to [−1/2, 1/2], so the result always stays on the
/// segment between the extrema and therefore inside the ellipsoid.
fn move_along_chord(
    pixel: LinearColor,
    pair: &ExtremaPair,
    target: f64,
    clamped: &mut bool,
) -> LinearColor {
    let chan = pair.axis.channel_index();
    let span = pair.high_channel() - pair.low_channel();
    if !(span > 0.0) {
        return pixel;
    }
    let p = pixel.as_array();
    let direction = [
        pair.high[0] - pair.low[0],
        pair.high[1] - pair.low[1],
        pair.high[2] - pair.low[2],
    ];
    let s = ((target - p[chan]) / span).clamp(-0.5, 0.5);

    // Largest sub-interval of chord parameters that keeps the point in
    // [0,1]³; it contains 0 because the pixel itself is in gamut.
    let mut s_lo = f64::NEG_INFINITY;
    let mut s_hi = f64::INFINITY;
    for i in 0..3 {
        let d = direction[i];
        if d > 0.0 {
            s_lo = s_lo.max((0.0 - p[i]) / d);
            s_hi = s_hi.min((1.0 - p[i]) / d);
        } else if d < 0.0 {
            s_lo = s_lo.max((1.0 - p[i]) / d);
            s_hi = s_hi.min((0.0 - p[i]) / d);
        }
    }
    let s_final = s.clamp(s_lo.min(0.0), s_hi.max(0.0));
    if s_final != s {
        *clamped = true;
    }
    LinearColor::new(
        p[0] + s_final * direction[0],
        p[1] + s_final * direction[1],
        p[2] + s_final * direction[2],
    )
}

/// The outcome of full tile adjustment: best of {Blue, Red, unadjusted} by
/// encoded size.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedTile {
    pub pixels: Vec<LinearColor>,
    pub chosen_axis: Option<RgbAxis>,
    pub case: AdjustCase,
    pub clamped: bool,
    /// Encoded form of the winning candidate (after sRGB quantization).
    pub encoded: EncodedTile,
    /// Cost of the winning candidate under the supplied cost function.
    pub cost_bits: u64,
}

/// Runs the adjustment along Blue and Red, converts each candidate (and the
/// unadjusted tile) to sRGB, and keeps the candidate with the smallest
/// encoded cost. Ties resolve Blue, then Red, then unadjusted.
pub fn adjust_tile<F>(
    tile: &Tile,
    ellipsoids: &[DiscriminationEllipsoid],
    transform: &DklTransform,
    cost: F,
) -> Result<AdjustedTile, AdjustError>
where
    F: Fn(&EncodedTile) -> u64,
{
    let blue = adjust_tile_axis(tile, ellipsoids, RgbAxis::Blue, transform)?;
    let red = adjust_tile_axis(tile, ellipsoids, RgbAxis::Red, transform)?;

    let evaluate = |pixels: &[LinearColor]| {
        let srgb = SrgbTile::new(tile.n, pixels.iter().map(|p| p.to_srgb()).collect())
            .expect("candidate preserves tile shape");
        let encoded = encode_tile(&srgb);
        let bits = cost(&encoded);
        (encoded, bits)
    };

    let (blue_encoded, blue_bits) = evaluate(&blue.pixels);
    let (red_encoded, red_bits) = evaluate(&red.pixels);
    let (plain_encoded, plain_bits) = evaluate(&tile.pixels);

    let mut best = AdjustedTile {
        pixels: blue.pixels,
        chosen_axis: Some(RgbAxis::Blue),
        case: blue.case,
        clamped: blue.clamped,
        encoded: blue_encoded,
        cost_bits: blue_bits,
    };
    if red_bits < best.cost_bits {
        best = AdjustedTile {
            pixels: red.pixels,
            chosen_axis: Some(RgbAxis::Red),
            case: red.case,
            clamped: red.clamped,
            encoded: red_encoded,
            cost_bits: red_bits,
        };
    }
    if plain_bits < best.cost_bits {
        best = AdjustedTile {
            pixels: tile.pixels.clone(),
            chosen_axis: None,
            case: AdjustCase::Skipped,
            clamped: false,
            encoded: plain_encoded,
            cost_bits: plain_bits,
        };
    }
    Ok(best)
}
