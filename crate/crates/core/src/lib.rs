//! Perceptually constrained base+delta framebuffer compression.
//!
//! Classic base+delta (BD) tile codecs are numerically lossless: each tile
//! stores one base value per channel plus fixed-width deltas, so the bit cost
//! of a tile is driven by the max−min channel range. This crate shrinks those
//! ranges *before* encoding by nudging pixel colors inside their
//! eccentricity-dependent color-discrimination ellipsoids — the set of colors
//! a viewer cannot tell apart from the original at a given angular distance
//! from gaze. The adjusted frame then goes through an ordinary, bit-exact BD
//! encode, and decoding needs no knowledge of the adjustment at all.
//!
//! The pipeline, in order:
//!
//! 1. [`color`] — sRGB ↔ linear RGB ↔ DKL conversions.
//! 2. [`perceptual`] — per-pixel eccentricity and discrimination-ellipsoid
//!    providers (constant, linear-in-eccentricity, or table-driven).
//! 3. [`geometry`] — DKL ellipsoids as linear-RGB quadrics, channel extrema
//!    points, and membership tests.
//! 4. [`adjust`] — the per-tile color adjustment: a relaxed convex problem
//!    with a closed-form two-case solution, run along the Red and Blue axes.
//! 5. [`codec`] — the base+delta tile codec and frame bitstream container.
//! 6. [`pipeline`] — end-to-end runs with foveal bypass, reports, PSNR,
//!    energy estimates, and tile-size sweeps.
//!
//! [`scc`] implements a set-cover palette baseline for comparison, and
//! [`oracle`] holds slow brute-force references that the test suites check
//! the analytic paths against. [`fixtures`] generates the deterministic
//! synthetic frames used by tests and benchmarks.

pub mod adjust;
pub mod codec;
pub mod color;
pub mod fixtures;
pub mod frame;
pub mod geometry;
pub mod oracle;
pub mod perceptual;
pub mod pipeline;
pub mod scc;

mod util;

pub use adjust::{AdjustCase, AdjustedTile, PlanePair, Tile};
pub use codec::{EncodedTile, FrameBitstream, FrameHeader, SrgbTile};
pub use color::{DklColor, DklTransform, LinearColor, RgbAxis, SrgbColor};
pub use frame::SrgbFrame;
pub use geometry::{DiscriminationEllipsoid, ExtremaPair, QuadricSurface};
pub use perceptual::{DisplayGeometry, EllipsoidProvider, GazePoint, TableModel};
pub use pipeline::{CompressionReport, PipelineConfig, PipelineOutput};
pub use scc::ColorCover;
