//! Per-pixel perceptual model: eccentricity from display geometry and gaze,
//! and discrimination-ellipsoid providers.
//!
//! A discrimination ellipsoid is the set of colors indistinguishable from a
//! reference color at a given eccentricity; it is axis-aligned in DKL space
//! and grows as the stimulus moves into peripheral vision. The psychophysical
//! fits behind real deployments are not part of this crate, so the provider
//! is pluggable: a constant model, a linear-in-eccentricity model, and a
//! table model loaded from a JSON grid with multilinear interpolation.

use crate::color::{DklTransform, LinearColor};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty model")]
    EmptyModel,
    #[error("grid axis {axis} is not strictly increasing at index {index}")]
    NonMonotoneAxis { axis: &'static str, index: usize },
    #[error("node count {got} does not match grid size {expected}")]
    NodeCountMismatch { got: usize, expected: usize },
    #[error("negative semi-axis {value} at node {index}")]
    NegativeSemiAxis { index: usize, value: f64 },
    #[error("negative model parameter {0}")]
    NegativeParameter(f64),
    #[error("unknown model spec `{0}`")]
    UnknownSpec(String),
    #[error("model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file {path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
}

/// Axis-aligned ellipsoid in DKL space: all colors within it are perceptually
/// indistinguishable from the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationEllipsoid {
    pub center: crate::color::DklColor,
    /// Semi-axis lengths (a, b, c) along the three DKL axes; non-negative,
    /// zero axes mark a degenerate (point/flat) ellipsoid.
    pub semi_axes: [f64; 3],
}

impl DiscriminationEllipsoid {
    pub fn is_degenerate(&self) -> bool {
        self.semi_axes.iter().any(|&a| a == 0.0)
    }
}

/// Screen resolution and field of view; pixel offsets convert to visual
/// angles through the per-axis degrees-per-pixel ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplayGeometry {
    width_px: u32,
    height_px: u32,
    horizontal_fov_deg: f64,
    vertical_fov_deg: f64,
}

impl DisplayGeometry {
    pub fn new(
        width_px: u32,
        height_px: u32,
        horizontal_fov_deg: f64,
        vertical_fov_deg: f64,
    ) -> Result<Self, ModelError> {
        if width_px == 0 || height_px == 0 {
            return Err(ModelError::NegativeParameter(0.0));
        }
        for fov in [horizontal_fov_deg, vertical_fov_deg] {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(ModelError::NegativeParameter(fov));
            }
        }
        Ok(Self {
            width_px,
            height_px,
            horizontal_fov_deg,
            vertical_fov_deg,
        })
    }

    pub fn width_px(&self) -> u32 {
        self.width_px
    }

    pub fn height_px(&self) -> u32 {
        self.height_px
    }

    pub fn deg_per_px_x(&self) -> f64 {
        self.horizontal_fov_deg / self.width_px as f64
    }

    pub fn deg_per_px_y(&self) -> f64 {
        self.vertical_fov_deg / self.height_px as f64
    }
}

/// Current fixation point in pixel coordinates; may lie off screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazePoint {
    pub x_px: f64,
    pub y_px: f64,
}

impl GazePoint {
    pub const fn new(x_px: f64, y_px: f64) -> Self {
        Self { x_px, y_px }
    }
}

/// Angular distance in degrees between a pixel and the gaze point, under an
/// equiangular screen model (angle proportional to pixel offset per axis),
/// clamped to [0, 90].
pub fn eccentricity_of_pixel(
    pixel_x: f64,
    pixel_y: f64,
    gaze: GazePoint,
    display: &DisplayGeometry,
) -> f64 {
    let dx = (pixel_x - gaze.x_px) * display.deg_per_px_x();
    let dy = (pixel_y - gaze.y_px) * display.deg_per_px_y();
    (dx * dx + dy * dy).sqrt().clamp(0.0, 90.0)
}

/// Source of discrimination-ellipsoid semi-axes per (color, eccentricity).
///
/// Providers are immutable after construction and deterministic, so they can
/// be queried from any number of threads.
#[derive(Debug, Clone, PartialEq)]
pub enum EllipsoidProvider {
    /// Fixed semi-axes for every color and eccentricity.
    Constant { semi_axes: [f64; 3] },
    /// `axes = base + slope · eccentricity`, independent of color.
    LinearEccentricity {
        base: [f64; 3],
        slope_per_deg: [f64; 3],
    },
    /// Interpolated lookup over a (R, G, B, eccentricity) grid.
    Table(TableModel),
}

impl EllipsoidProvider {
    /// A zero-volume provider: every ellipsoid degenerates to a point, so
    /// downstream adjustment is the identity.
    pub fn zero() -> Self {
        EllipsoidProvider::Constant {
            semi_axes: [0.0; 3],
        }
    }

    pub fn constant(semi_axes: [f64; 3]) -> Result<Self, ModelError> {
        check_non_negative(&semi_axes)?;
        Ok(EllipsoidProvider::Constant { semi_axes })
    }

    pub fn linear(base: [f64; 3], slope_per_deg: [f64; 3]) -> Result<Self, ModelError> {
        check_non_negative(&base)?;
        check_non_negative(&slope_per_deg)?;
        Ok(EllipsoidProvider::LinearEccentricity {
            base,
            slope_per_deg,
        })
    }

    /// Desk-scale default: a linear-in-eccentricity model sized so that
    /// mid-gray ellipsoids project to roughly ±2% of a linear-RGB channel at
    /// 25° eccentricity. The magnitudes are working configuration for
    /// experiments on ordinary images, not a fitted perceptual claim.
    pub fn desk_default() -> Self {
        EllipsoidProvider::LinearEccentricity {
            base: [0.001, 0.001, 0.01],
            slope_per_deg: [0.0008, 0.0008, 0.008],
        }
    }

    /// Semi-axes for a color at an eccentricity (degrees, ≥ 0).
    pub fn semi_axes(&self, color: LinearColor, eccentricity_deg: f64) -> [f64; 3] {
        let e = eccentricity_deg.max(0.0);
        match self {
            EllipsoidProvider::Constant { semi_axes } => *semi_axes,
            EllipsoidProvider::LinearEccentricity {
                base,
                slope_per_deg,
            } => [
                base[0] + slope_per_deg[0] * e,
                base[1] + slope_per_deg[1] * e,
                base[2] + slope_per_deg[2] * e,
            ],
            EllipsoidProvider::Table(table) => table.sample(color, e),
        }
    }

    /// Full ellipsoid for a pixel: center at the pixel's DKL coordinates,
    /// semi-axes from this provider.
    pub fn ellipsoid_for(
        &self,
        color: LinearColor,
        eccentricity_deg: f64,
        transform: &DklTransform,
    ) -> DiscriminationEllipsoid {
        DiscriminationEllipsoid {
            center: transform.rgb_to_dkl(color),
            semi_axes: self.semi_axes(color, eccentricity_deg),
        }
    }

    /// Parses a CLI-style spec:
    /// `zero`, `default`, `constant:a,b,c`, `linear:a0,b0,c0:sa,sb,sc`,
    /// or `table:<path>`.
    pub fn parse(spec: &str) -> Result<Self, ModelError> {
        if spec == "zero" {
            return Ok(Self::zero());
        }
        if spec == "default" {
            return Ok(Self::desk_default());
        }
        if let Some(rest) = spec.strip_prefix("constant:") {
            return Self::constant(parse_triple(rest, spec)?);
        }
        if let Some(rest) = spec.strip_prefix("linear:") {
            let (base, slope) = rest
                .split_once(':')
                .ok_or_else(|| ModelError::UnknownSpec(spec.to_string()))?;
            return Self::linear(parse_triple(base, spec)?, parse_triple(slope, spec)?);
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Ok(EllipsoidProvider::Table(TableModel::load(path)?));
        }
        Err(ModelError::UnknownSpec(spec.to_string()))
    }
}

impl fmt::Display for EllipsoidProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllipsoidProvider::Constant { semi_axes: [a, b, c] } => {
                write!(f, "constant:{a},{b},{c}")
            }
            EllipsoidProvider::LinearEccentricity {
                base: [a, b, c],
                slope_per_deg: [sa, sb, sc],
            } => write!(f, "linear:{a},{b},{c}:{sa},{sb},{sc}"),
            EllipsoidProvider::Table(t) => write!(
                f,
                "table[{}x{}x{}x{}]",
                t.r_axis.len(),
                t.g_axis.len(),
                t.b_axis.len(),
                t.ecc_axis.len()
            ),
        }
    }
}

fn check_non_negative(values: &[f64; 3]) -> Result<(), ModelError> {
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(ModelError::NegativeParameter(v));
        }
    }
    Ok(())
}

fn parse_triple(s: &str, full: &str) -> Result<[f64; 3], ModelError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| ModelError::UnknownSpec(full.to_string()))?;
    if parts.len() != 3 {
        return Err(ModelError::UnknownSpec(full.to_string()));
    }
    Ok([parts[0], parts[1], parts[2]])
}

/// Serialized form of a table model; see `docs/FORMATS.md` for the exact
/// schema. Node order is row-major over (r, g, b, ecc), ecc fastest.
#[derive(Debug, Serialize, Deserialize)]
struct TableModelFile {
    format: String,
    r_axis: Vec<f64>,
    g_axis: Vec<f64>,
    b_axis: Vec<f64>,
    ecc_axis: Vec<f64>,
    nodes: Vec<[f64; 3]>,
}

pub const TABLE_MODEL_FORMAT: &str = "ellipsoid-table-v1";

/// Gridded ellipsoid model over (R, G, B, eccentricity) with multilinear
/// interpolation between nodes. Queries outside the grid are clamped to the
/// nearest grid cell (logged as a warning).
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    r_axis: Vec<f64>,
    g_axis: Vec<f64>,
    b_axis: Vec<f64>,
    ecc_axis: Vec<f64>,
    nodes: Vec<[f64; 3]>,
}

impl TableModel {
    pub fn from_parts(
        r_axis: Vec<f64>,
        g_axis: Vec<f64>,
        b_axis: Vec<f64>,
        ecc_axis: Vec<f64>,
        nodes: Vec<[f64; 3]>,
    ) -> Result<Self, ModelError> {
        let axes = [
            ("r", &r_axis),
            ("g", &g_axis),
            ("b", &b_axis),
            ("ecc", &ecc_axis),
        ];
        for (name, axis) in axes {
            if axis.is_empty() {
                return Err(ModelError::EmptyModel);
            }
            for i in 1..axis.len() {
                if !(axis[i] > axis[i - 1]) {
                    return Err(ModelError::NonMonotoneAxis {
                        axis: name,
                        index: i,
                    });
                }
            }
        }
        let expected = r_axis.len() * g_axis.len() * b_axis.len() * ecc_axis.len();
        if nodes.len() != expected {
            return Err(ModelError::NodeCountMismatch {
                got: nodes.len(),
                expected,
            });
        }
        for (index, node) in nodes.iter().enumerate() {
            for &v in node {
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::NegativeSemiAxis { index, value: v });
                }
            }
        }
        Ok(Self {
            r_axis,
            g_axis,
            b_axis,
            ecc_axis,
            nodes,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path_str = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(&path).map_err(|source| ModelError::Io {
            path: path_str.clone(),
            source,
        })?;
        let file: TableModelFile =
            serde_json::from_str(&text).map_err(|e| ModelError::Parse {
                path: path_str.clone(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        if file.format != TABLE_MODEL_FORMAT {
            return Err(ModelError::Parse {
                path: path_str,
                line: 1,
                column: 1,
                message: format!("unsupported format `{}`", file.format),
            });
        }
        Self::from_parts(
            file.r_axis,
            file.g_axis,
            file.b_axis,
            file.ecc_axis,
            file.nodes,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let file = TableModelFile {
            format: TABLE_MODEL_FORMAT.to_string(),
            r_axis: self.r_axis.clone(),
            g_axis: self.g_axis.clone(),
            b_axis: self.b_axis.clone(),
            ecc_axis: self.ecc_axis.clone(),
            nodes: self.nodes.clone(),
        };
        let text = serde_json::to_string_pretty(&file).expect("table model serializes");
        std::fs::write(&path, text).map_err(|source| ModelError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    fn node(&self, ir: usize, ig: usize, ib: usize, ie: usize) -> [f64; 3] {
        let idx = ((ir * self.g_axis.len() + ig) * self.b_axis.len() + ib) * self.ecc_axis.len()
            + ie;
        self.nodes[idx]
    }

    fn sample(&self, color: LinearColor, ecc: f64) -> [f64; 3] {
        let (ir, fr, cr) = locate(&self.r_axis, color.r());
        let (ig, fg, cg) = locate(&self.g_axis, color.g());
        let (ib, fb, cb) = locate(&self.b_axis, color.b());
        let (ie, fe, ce) = locate(&self.ecc_axis, ecc);
        if cr || cg || cb || ce {
            log::warn!(
                "table model query ({}, {}, {}, {ecc}°) outside grid; clamped",
                color.r(),
                color.g(),
                color.b()
            );
        }

        let mut out = [0.0; 3];
        // Multilinear blend over the 16 corners of the containing 4-D cell.
        for (dr, wr) in [(0, 1.0 - fr), (1, fr)] {
            if wr == 0.0 {
                continue;
            }
            for (dg, wg) in [(0, 1.0 - fg), (1, fg)] {
                if wg == 0.0 {
                    continue;
                }
                for (db, wb) in [(0, 1.0 - fb), (1, fb)] {
                    if wb == 0.0 {
                        continue;
                    }
                    for (de, we) in [(0, 1.0 - fe), (1, fe)] {
                        if we == 0.0 {
                            continue;
                        }
                        let w = wr * wg * wb * we;
                        let n = self.node(ir + dr, ig + dg, ib + db, ie + de);
                        for i in 0..3 {
                            out[i] += w * n[i];
                        }
                    }
                }
            }
        }
        out
    }
}

/// Finds the cell index and interpolation fraction for `v` on `axis`.
/// Returns (lower index, fraction in [0,1], clamped?). Single-node axes pin
/// the fraction to 0.
fn locate(axis: &[f64], v: f64) -> (usize, f64, bool) {
    let n = axis.len();
    if n == 1 {
        return (0, 0.0, v != axis[0]);
    }
    if v <= axis[0] {
        return (0, 0.0, v < axis[0]);
    }
    if v >= axis[n - 1] {
        return (n - 2, 1.0, v > axis[n - 1]);
    }
    let mut i = axis.partition_point(|&a| a <= v);
    i = i.clamp(1, n - 1);
    let lo = axis[i - 1];
    let hi = axis[i];
    (i - 1, (v - lo) / (hi - lo), false)
}
