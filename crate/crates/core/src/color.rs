//! Color representations and conversions: 8-bit sRGB, linear RGB on the unit
//! interval, and the DKL opponent space used by the perceptual model.
//!
//! All arithmetic is double precision; quantization happens exactly once, at
//! the sRGB boundary, with round-half-up. The DKL space is a fixed linear
//! transform away from linear RGB; [`DklTransform`] stores the matrix in one
//! documented orientation (DKL → RGB) together with its precomputed inverse.

use thiserror::Error;

/// Errors from color construction and conversion.
#[derive(Debug, Error, PartialEq)]
pub enum ColorError {
    /// A transfer-function input was outside [0, 1] or not finite.
    #[error("channel value {0} outside [0, 1]")]
    ChannelOutOfRange(f64),
    /// A user-supplied DKL↔RGB matrix could not be inverted.
    #[error("transform matrix is singular or badly conditioned")]
    SingularMatrix,
}

/// One pixel in 8-bit sRGB, the space the codec packs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SrgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl SrgbColor {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub fn channel(&self, index: usize) -> u8 {
        match index {
            0 => self.r,
            1 => self.g,
            2 => self.b,
            _ => panic!("channel index {index} out of range"),
        }
    }

    /// Decode to linear light.
    pub fn to_linear(self) -> LinearColor {
        LinearColor {
            r: srgb_to_linear_channel(self.r),
            g: srgb_to_linear_channel(self.g),
            b: srgb_to_linear_channel(self.b),
        }
    }
}

/// One pixel in linear RGB; channels clamped to [0, 1] at construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearColor {
    r: f64,
    g: f64,
    b: f64,
}

impl LinearColor {
    /// Builds a color, clamping each channel into [0, 1]. NaN becomes 0.
    pub fn new(r: f64, g: f64, b: f64) -> Self {
        let clamp = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
        Self {
            r: clamp(r),
            g: clamp(g),
            b: clamp(b),
        }
    }

    pub fn from_array(c: [f64; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn channel(&self, index: usize) -> f64 {
        match index {
            0 => self.r,
            1 => self.g,
            2 => self.b,
            _ => panic!("channel index {index} out of range"),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    /// Quantize to 8-bit sRGB (round-half-up).
    pub fn to_srgb(self) -> SrgbColor {
        SrgbColor {
            r: quantize_channel(self.r),
            g: quantize_channel(self.g),
            b: quantize_channel(self.b),
        }
    }
}

/// One pixel in DKL coordinates (dimensionless opponent axes).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DklColor {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl DklColor {
    pub const fn new(k1: f64, k2: f64, k3: f64) -> Self {
        Self { k1, k2, k3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn axis(&self, index: usize) -> f64 {
        self.as_array()[index]
    }
}

/// The RGB channel an adjustment pass optimizes along. Discrimination
/// ellipsoids are elongated along Red or Blue, never Green, so those are the
/// two axes worth optimizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RgbAxis {
    Red,
    Blue,
}

impl RgbAxis {
    /// Index of this axis in an `[r, g, b]` triple.
    pub fn channel_index(self) -> usize {
        match self {
            RgbAxis::Red => 0,
            RgbAxis::Blue => 2,
        }
    }
}

impl std::fmt::Display for RgbAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RgbAxis::Red => write!(f, "red"),
            RgbAxis::Blue => write!(f, "blue"),
        }
    }
}

/// DKL → linear-RGB matrix. The inverse (computed at construction) maps
/// RGB → DKL.
pub const DKL_TO_RGB_MATRIX: [[f64; 3]; 3] = [
    [0.14, 0.17, 0.00],
    [-0.21, -0.71, -0.07],
    [0.21, 0.72, 0.07],
];

/// The 3×3 DKL↔RGB transform pair.
///
/// Orientation is fixed and documented here once: `m` maps DKL coordinates to
/// linear RGB, `m_inv` maps linear RGB to DKL. Everything downstream
/// (quadric construction, extrema intersection) is written against this
/// orientation and verified by geometric oracles, so swapping in a different
/// matrix via [`DklTransform::from_dkl_to_rgb_matrix`] keeps the whole
/// pipeline consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct DklTransform {
    m: [[f64; 3]; 3],
    m_inv: [[f64; 3]; 3],
}

impl Default for DklTransform {
    fn default() -> Self {
        Self::from_dkl_to_rgb_matrix(DKL_TO_RGB_MATRIX)
            .expect("built-in DKL matrix is invertible")
    }
}

impl DklTransform {
    /// Builds a transform from a DKL→RGB matrix, computing and validating the
    /// inverse (‖m·m⁻¹ − I‖∞ must be below 1e-9).
    pub fn from_dkl_to_rgb_matrix(m: [[f64; 3]; 3]) -> Result<Self, ColorError> {
        let m_inv = invert3(&m).ok_or(ColorError::SingularMatrix)?;
        let t = Self { m, m_inv };
        if t.roundtrip_error() > 1e-9 {
            return Err(ColorError::SingularMatrix);
        }
        Ok(t)
    }

    /// Max-abs entry of m·m⁻¹ − I.
    pub fn roundtrip_error(&self) -> f64 {
        let prod = matmul3(&self.m, &self.m_inv);
        let mut worst = 0.0f64;
        for (i, row) in prod.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn dkl_to_rgb_matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn rgb_to_dkl_matrix(&self) -> &[[f64; 3]; 3] {
        &self.m_inv
    }

    /// Linear RGB → DKL.
    pub fn rgb_to_dkl(&self, c: LinearColor) -> DklColor {
        let k = matvec3(&self.m_inv, c.as_array());
        DklColor::new(k[0], k[1], k[2])
    }

    /// Raw RGB triple → DKL, without the gamut clamp of [`LinearColor`].
    pub fn rgb_to_dkl_unclamped(&self, c: [f64; 3]) -> [f64; 3] {
        matvec3(&self.m_inv, c)
    }

    /// DKL → linear RGB, clamped into gamut.
    pub fn dkl_to_rgb(&self, k: DklColor) -> LinearColor {
        let c = self.dkl_to_rgb_unclamped(k);
        LinearColor::new(c[0], c[1], c[2])
    }

    /// DKL → RGB triple without clamping; callers that need out-of-gamut
    /// geometry (extrema points) use this.
    pub fn dkl_to_rgb_unclamped(&self, k: DklColor) -> [f64; 3] {
        matvec3(&self.m, k.as_array())
    }
}

const SRGB_LINEAR_KNEE: f64 = 0.003_130_8;
const SRGB_ENCODED_KNEE: f64 = 0.04045;

/// The sRGB opto-electronic transfer function on [0, 1] (no quantization).
fn srgb_oetf(x: f64) -> f64 {
    if x <= SRGB_LINEAR_KNEE {
        12.92 * x
    } else {
        1.055 * x.powf(1.0 / 2.4) - 0.055
    }
}

/// Inverse transfer function on [0, 1].
fn srgb_eotf(s: f64) -> f64 {
    if s <= SRGB_ENCODED_KNEE {
        s / 12.92
    } else {
        ((s + 0.055) / 1.055).powf(2.4)
    }
}

/// Internal quantizer for in-range values: transfer, scale by 255,
/// round-half-up.
pub(crate) fn quantize_channel(x: f64) -> u8 {
    (srgb_oetf(x) * 255.0 + 0.5).floor() as u8
}

/// Encode one linear channel value to 8-bit sRGB.
///
/// Piecewise transfer (linear segment below 0.0031308, power segment above),
/// scaled by 255 and quantized round-half-up; monotone non-decreasing.
/// Out-of-range or non-finite input is a contract violation.
pub fn linear_to_srgb_channel(x: f64) -> Result<u8, ColorError> {
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(ColorError::ChannelOutOfRange(x));
    }
    Ok(quantize_channel(x))
}

/// Decode one 8-bit sRGB channel to linear light: the exact analytic inverse
/// of the unquantized transfer function applied to `v / 255`.
pub fn srgb_to_linear_channel(v: u8) -> f64 {
    srgb_eotf(v as f64 / 255.0)
}

pub(crate) fn matvec3(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Inverse via the adjugate; returns None when the determinant vanishes.
fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    Some(inv)
}
