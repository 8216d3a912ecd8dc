//! Ellipsoid geometry in linear RGB: quadric form, channel extrema, and
//! membership tests.
//!
//! Discrimination ellipsoids are axis-aligned in DKL space but become general
//! quadrics after the linear DKL→RGB map. The adjustment algorithm needs, per
//! ellipsoid, the two surface points with the highest and lowest value of one
//! RGB channel. Those lie on the line through the center along the *extrema
//! vector*: the cross product of the normals of the two tangency planes where
//! the partial derivatives of the quadric vanish. Intersecting that line with
//! the ellipsoid (done back in DKL space, where the metric is diagonal) gives
//! the extrema in closed form.

use crate::color::{DklTransform, LinearColor, RgbAxis};
use crate::perceptual::DiscriminationEllipsoid;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("ellipsoid semi-axis must be positive for the quadric form, got {0}")]
    DegenerateAxis(f64),
    #[error("quadric normalization scalar {0} too close to zero")]
    DegenerateNormalization(f64),
    #[error("quadric coefficients are not finite")]
    NonFiniteCoefficients,
    #[error("extrema vector degenerates (cross product ~ 0)")]
    DegenerateExtremaVector,
}

/// Threshold below which the quadric's constant-term normalization is
/// considered degenerate and extrema fall back to the DKL-space route.
pub const NORMALIZATION_EPS: f64 = 1e-12;

/// General quadric `Ax² + By² + Cz² + Dx + Ey + Fz + Gxy + Hyz + Izx + 1 = 0`
/// over linear RGB (x = R, y = G, z = B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricSurface {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub i: f64,
    /// Sign of `evaluate` strictly inside the ellipsoid. The +1 constant term
    /// fixes the overall scale but not the sign, which flips depending on
    /// whether the RGB origin lies inside the ellipsoid.
    interior_sign: f64,
}

impl QuadricSurface {
    /// Evaluates the quadric polynomial at an RGB point. Zero on the surface.
    pub fn evaluate(&self, p: [f64; 3]) -> f64 {
        let [x, y, z] = p;
        self.a * x * x
            + self.b * y * y
            + self.c * z * z
            + self.d * x
            + self.e * y
            + self.f * z
            + self.g * x * y
            + self.h * y * z
            + self.i * z * x
            + 1.0
    }

    /// True when the point evaluates on the interior side of the surface.
    pub fn classifies_inside(&self, p: [f64; 3]) -> bool {
        self.evaluate(p) * self.interior_sign > 0.0
    }

    pub fn interior_sign(&self) -> f64 {
        self.interior_sign
    }
}

/// The two surface points with extreme values of one RGB channel.
/// Points are unclamped RGB triples; gamut handling belongs to the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaPair {
    pub high: [f64; 3],
    pub low: [f64; 3],
    pub axis: RgbAxis,
}

impl ExtremaPair {
    pub fn high_channel(&self) -> f64 {
        self.high[self.axis.channel_index()]
    }

    pub fn low_channel(&self) -> f64 {
        self.low[self.axis.channel_index()]
    }
}

/// Converts an axis-aligned DKL ellipsoid to its linear-RGB quadric form.
///
/// Writing S for the RGB→DKL matrix and w_i = 1/axis_i², the implicit surface
/// Σ w_i ((S·p)_i − κ_i)² = 1 expands to a quadric whose coefficients are
/// accumulated below and then scaled so the constant term is +1. The scale
/// factor Σ w_i κ_i² − 1 vanishes exactly when the RGB origin lies on the
/// ellipsoid surface; that case (and degenerate axes) must take the DKL-space
/// route instead.
pub fn dkl_to_quadric(
    e: &DiscriminationEllipsoid,
    transform: &DklTransform,
) -> Result<QuadricSurface, GeometryError> {
    for &axis in &e.semi_axes {
        if axis <= 0.0 {
            return Err(GeometryError::DegenerateAxis(axis));
        }
    }
    let s = transform.rgb_to_dkl_matrix();
    let k = e.center.as_array();
    let w = [
        1.0 / (e.semi_axes[0] * e.semi_axes[0]),
        1.0 / (e.semi_axes[1] * e.semi_axes[1]),
        1.0 / (e.semi_axes[2] * e.semi_axes[2]),
    ];

    // Quadratic coefficients: col_j · W · col_l of S.
    let mut quad = [[0.0f64; 3]; 3];
    for j in 0..3 {
        for l in 0..3 {
            quad[j][l] = (0..3).map(|i| w[i] * s[i][j] * s[i][l]).sum();
        }
    }
    // Linear coefficients and constant.
    let mut lin = [0.0f64; 3];
    for j in 0..3 {
        lin[j] = -2.0 * (0..3).map(|i| w[i] * k[i] * s[i][j]).sum::<f64>();
    }
    let constant: f64 = (0..3).map(|i| w[i] * k[i] * k[i]).sum::<f64>() - 1.0;

    if constant.abs() < NORMALIZATION_EPS {
        return Err(GeometryError::DegenerateNormalization(constant));
    }
    let inv = 1.0 / constant;
    let q = QuadricSurface {
        a: quad[0][0] * inv,
        b: quad[1][1] * inv,
        c: quad[2][2] * inv,
        d: lin[0] * inv,
        e: lin[1] * inv,
        f: lin[2] * inv,
        g: 2.0 * quad[0][1] * inv,
        h: 2.0 * quad[1][2] * inv,
        i: 2.0 * quad[0][2] * inv,
        // The center evaluates to −1/constant: its membership sum is 0, so
        // the unscaled polynomial is −1 there.
        interior_sign: -inv.signum(),
    };
    let finite = [q.a, q.b, q.c, q.d, q.e, q.f, q.g, q.h, q.i]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(GeometryError::NonFiniteCoefficients);
    }
    Ok(q)
}

/// Direction of the line through the two channel-extreme points of the
/// quadric: the cross product of the normals of the two planes on which the
/// relevant partial derivatives vanish.
///
/// For Blue (z), the planes are dF/dx = 0 with normal (2A, G, I) and
/// dF/dy = 0 with normal (G, 2B, H). For Red (x), dF/dy and dF/dz give
/// (G, 2B, H) × (I, H, 2C).
pub fn extrema_vector(q: &QuadricSurface, axis: RgbAxis) -> Result<[f64; 3], GeometryError> {
    let (n1, n2) = match axis {
        RgbAxis::Blue => ([2.0 * q.a, q.g, q.i], [q.g, 2.0 * q.b, q.h]),
        RgbAxis::Red => ([q.g, 2.0 * q.b, q.h], [q.i, q.h, 2.0 * q.c]),
    };
    let v = cross(n1, n2);
    let scale = norm(n1) * norm(n2);
    if norm(v) <= 1e-12 * scale || !v.iter().all(|x| x.is_finite()) {
        return Err(GeometryError::DegenerateExtremaVector);
    }
    Ok(v)
}

/// Channel extrema points of an ellipsoid in linear RGB.
///
/// Follows the quadric route (extrema vector, then line–ellipsoid
/// intersection in DKL space) when well conditioned; falls back to computing
/// the extremal direction entirely in DKL space when the quadric form is
/// unavailable (degenerate axes or vanishing normalization). Degenerate
/// ellipsoids collapse to `high = low = center`. Returned points satisfy
/// membership = 1 by construction and `high` always carries the larger
/// channel value.
pub fn extrema_points(
    e: &DiscriminationEllipsoid,
    axis: RgbAxis,
    transform: &DklTransform,
) -> ExtremaPair {
    let quadric_direction = || -> Option<[f64; 3]> {
        let q = dkl_to_quadric(e, transform).ok()?;
        let v = extrema_vector(&q, axis).ok()?;
        // Eq-style intersection works on the DKL image of the direction.
        Some(transform.rgb_to_dkl_unclamped(normalize(v)))
    };

    // DKL-space fallback: the extremal offset is D²·u where u is the RGB
    // channel row pulled back to DKL (u_i = m[chan][i]) and D = diag(a,b,c).
    // Equivalent to the quadric route, but defined for degenerate axes too.
    let dkl_direction = || -> [f64; 3] {
        let m = transform.dkl_to_rgb_matrix();
        let chan = axis.channel_index();
        let u = m[chan];
        [
            e.semi_axes[0] * e.semi_axes[0] * u[0],
            e.semi_axes[1] * e.semi_axes[1] * u[1],
            e.semi_axes[2] * e.semi_axes[2] * u[2],
        ]
    };

    let x = if e.semi_axes.iter().all(|&a| a > 0.0) {
        quadric_direction().unwrap_or_else(dkl_direction)
    } else {
        dkl_direction()
    };

    // Scale the direction onto the surface: t = 1/sqrt(Σ x_i²/axis_i²).
    let mut metric = 0.0;
    for i in 0..3 {
        if e.semi_axes[i] > 0.0 {
            let r = x[i] / e.semi_axes[i];
            metric += r * r;
        } else if x[i] != 0.0 {
            // Direction points along a collapsed axis: no surface extent.
            metric = f64::INFINITY;
        }
    }

    let center_rgb = transform.dkl_to_rgb_unclamped(e.center);
    if metric <= 0.0 || !metric.is_finite() {
        return ExtremaPair {
            high: center_rgb,
            low: center_rgb,
            axis,
        };
    }
    let t = 1.0 / metric.sqrt();
    let k = e.center.as_array();
    let p_plus = transform.dkl_to_rgb_unclamped(crate::color::DklColor::new(
        k[0] + x[0] * t,
        k[1] + x[1] * t,
        k[2] + x[2] * t,
    ));
    let p_minus = transform.dkl_to_rgb_unclamped(crate::color::DklColor::new(
        k[0] - x[0] * t,
        k[1] - x[1] * t,
        k[2] - x[2] * t,
    ));
    let chan = axis.channel_index();
    let (high, low) = if p_plus[chan] >= p_minus[chan] {
        (p_plus, p_minus)
    } else {
        (p_minus, p_plus)
    };
    ExtremaPair { high, low, axis }
}

/// Normalized ellipsoid distance of a color from an ellipsoid, computed in
/// DKL space: Σ((k_i − κ_i)/axis_i)². Values ≤ 1 are perceptually
/// indistinguishable from the center. A degenerate axis contributes 0 when
/// the offset along it is 0 and +∞ otherwise.
pub fn membership(
    e: &DiscriminationEllipsoid,
    color: LinearColor,
    transform: &DklTransform,
) -> f64 {
    membership_rgb(e, color.as_array(), transform)
}

/// [`membership`] for raw (possibly out-of-gamut) RGB triples.
pub fn membership_rgb(
    e: &DiscriminationEllipsoid,
    rgb: [f64; 3],
    transform: &DklTransform,
) -> f64 {
    let k = transform.rgb_to_dkl_unclamped(rgb);
    let c = e.center.as_array();
    let mut sum = 0.0;
    for i in 0..3 {
        let off = k[i] - c[i];
        if e.semi_axes[i] == 0.0 {
            if off != 0.0 {
                return f64::INFINITY;
            }
        } else {
            let r = off / e.semi_axes[i];
            sum += r * r;
        }
    }
    sum
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::{DklColor, DklTransform};
    use crate::oracle;
    use crate::util::SplitMix64;

    fn default_t() -> DklTransform {
        DklTransform::default()
    }

    fn random_ellipsoid(rng: &mut SplitMix64, t: &DklTransform) -> DiscriminationEllipsoid {
        // Centers drawn from in-gamut colors so scales stay realistic.
        let c = LinearColor::new(
            rng.next_range(0.05, 0.95),
            rng.next_range(0.05, 0.95),
            rng.next_range(0.05, 0.95),
        );
        DiscriminationEllipsoid {
            center: t.rgb_to_dkl(c),
            semi_axes: [
                rng.next_range(0.001, 0.08),
                rng.next_range(0.001, 0.08),
                rng.next_range(0.001, 0.5),
            ],
        }
    }

    #[test]
    fn center_classified_inside_exterior_outside() {
        let t = default_t();
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let e = random_ellipsoid(&mut rng, &t);
            let q = dkl_to_quadric(&e, &t).unwrap();
            let center = t.dkl_to_rgb_unclamped(e.center);
            assert!(q.classifies_inside(center));
            // A point far along each RGB axis is well outside.
            for far in [[50.0, 0.0, 0.0], [0.0, -50.0, 0.0], [0.0, 0.0, 80.0]] {
                assert!(!q.classifies_inside(far));
            }
        }
    }

    #[test]
    fn quadric_sign_agrees_with_membership_oracle() {
        let t = default_t();
        let mut rng = SplitMix64::new(23);
        let mut checked = 0usize;
        let mut agreed = 0usize;
        for _ in 0..20 {
            let e = random_ellipsoid(&mut rng, &t);
            let q = dkl_to_quadric(&e, &t).unwrap();
            for _ in 0..1000 {
                // Sample around the ellipsoid at up to ~2x its extent.
                let k = [
                    e.center.k1 + rng.next_range(-2.0, 2.0) * e.semi_axes[0],
                    e.center.k2 + rng.next_range(-2.0, 2.0) * e.semi_axes[1],
                    e.center.k3 + rng.next_range(-2.0, 2.0) * e.semi_axes[2],
                ];
                let member =
                    oracle::membership_in_dkl(e.center.as_array(), e.semi_axes, k);
                if (member - 1.0).abs() < 1e-6 {
                    continue; // boundary band
                }
                let rgb = oracle::matvec(t.dkl_to_rgb_matrix(), k);
                checked += 1;
                if q.classifies_inside(rgb) == (member < 1.0) {
                    agreed += 1;
                }
            }
        }
        assert!(checked > 10_000);
        let rate = agreed as f64 / checked as f64;
        assert!(rate >= 0.9999, "agreement rate {rate}");
    }

    #[test]
    fn surface_points_evaluate_to_zero() {
        let t = default_t();
        let mut rng = SplitMix64::new(37);
        for _ in 0..20 {
            let e = random_ellipsoid(&mut rng, &t);
            let q = dkl_to_quadric(&e, &t).unwrap();
            for _ in 0..200 {
                let theta = rng.next_range(0.0, std::f64::consts::PI);
                let phi = rng.next_range(0.0, 2.0 * std::f64::consts::PI);
                let k = [
                    e.center.k1 + e.semi_axes[0] * theta.sin() * phi.cos(),
                    e.center.k2 + e.semi_axes[1] * theta.sin() * phi.sin(),
                    e.center.k3 + e.semi_axes[2] * theta.cos(),
                ];
                let rgb = oracle::matvec(t.dkl_to_rgb_matrix(), k);
                let v = q.evaluate(rgb);
                assert!(v.abs() < 1e-7, "surface value {v}");
            }
        }
    }

    #[test]
    fn axis_aligned_quadric_blue_vector_is_z() {
        // With an identity DKL↔RGB transform the quadric keeps G=H=I=0 and
        // the Blue extrema vector must align with the z axis.
        let t = DklTransform::from_dkl_to_rgb_matrix([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let e = DiscriminationEllipsoid {
            center: DklColor::new(0.4, 0.5, 0.6),
            semi_axes: [0.1, 0.2, 0.3],
        };
        let q = dkl_to_quadric(&e, &t).unwrap();
        assert!(q.g.abs() < 1e-12 && q.h.abs() < 1e-12 && q.i.abs() < 1e-12);
        let v = extrema_vector(&q, RgbAxis::Blue).unwrap();
        let n = norm(v);
        assert!(v[0].abs() / n < 1e-12);
        assert!(v[1].abs() / n < 1e-12);
        assert!(v[2].abs() / n > 0.999_999);
    }

    #[test]
    fn extrema_vector_has_nonzero_channel_component() {
        let t = default_t();
        let mut rng = SplitMix64::new(41);
        for _ in 0..200 {
            let e = random_ellipsoid(&mut rng, &t);
            let q = dkl_to_quadric(&e, &t).unwrap();
            for axis in [RgbAxis::Red, RgbAxis::Blue] {
                let v = extrema_vector(&q, axis).unwrap();
                let n = norm(v);
                assert!(
                    v[axis.channel_index()].abs() / n > 1e-9,
                    "axis {axis} component vanished for {e:?}"
                );
            }
        }
    }

    #[test]
    fn extrema_vector_matches_oracle_direction() {
        let t = default_t();
        let mut rng = SplitMix64::new(43);
        for _ in 0..25 {
            let e = random_ellipsoid(&mut rng, &t);
            let q = dkl_to_quadric(&e, &t).unwrap();
            for axis in [RgbAxis::Red, RgbAxis::Blue] {
                let v = normalize(extrema_vector(&q, axis).unwrap());
                let pair = extrema_points(&e, axis, &t);
                let d = normalize([
                    pair.high[0] - pair.low[0],
                    pair.high[1] - pair.low[1],
                    pair.high[2] - pair.low[2],
                ]);
                let cosine = (v[0] * d[0] + v[1] * d[1] + v[2] * d[2]).abs();
                assert!(cosine > 1.0 - 1e-9, "axis {axis}: |cos|={cosine}");
            }
        }
    }

    #[test]
    fn extrema_points_agree_with_surface_oracle() {
        let t = default_t();
        let mut rng = SplitMix64::new(53);
        for _ in 0..20 {
            let e = random_ellipsoid(&mut rng, &t);
            for axis in [RgbAxis::Red, RgbAxis::Blue] {
                let pair = extrema_points(&e, axis, &t);
                let (oracle_max, oracle_min) =
                    oracle::surface_sample_extrema(&e, axis, 1_000_000, t.dkl_to_rgb_matrix());
                assert!(
                    (pair.high_channel() - oracle_max).abs() < 1e-4,
                    "high {} vs oracle {}",
                    pair.high_channel(),
                    oracle_max
                );
                assert!(
                    (pair.low_channel() - oracle_min).abs() < 1e-4,
                    "low {} vs oracle {}",
                    pair.low_channel(),
                    oracle_min
                );
                assert!(pair.high_channel() >= pair.low_channel());
            }
        }
    }

    #[test]
    fn extrema_points_lie_on_surface() {
        let t = default_t();
        let mut rng = SplitMix64::new(59);
        for _ in 0..100 {
            let e = random_ellipsoid(&mut rng, &t);
            for axis in [RgbAxis::Red, RgbAxis::Blue] {
                let pair = extrema_points(&e, axis, &t);
                for p in [pair.high, pair.low] {
                    let m = membership_rgb(&e, p, &t);
                    assert!((m - 1.0).abs() < 1e-7, "membership {m}");
                }
            }
        }
    }

    #[test]
    fn extrema_midpoint_is_center() {
        let t = default_t();
        let mut rng = SplitMix64::new(61);
        for _ in 0..100 {
            let e = random_ellipsoid(&mut rng, &t);
            let center = t.dkl_to_rgb_unclamped(e.center);
            let pair = extrema_points(&e, RgbAxis::Blue, &t);
            for i in 0..3 {
                let mid = 0.5 * (pair.high[i] + pair.low[i]);
                assert!((mid - center[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_ellipsoid_extrema_collapse_to_center() {
        let t = default_t();
        let e = DiscriminationEllipsoid {
            center: t.rgb_to_dkl(LinearColor::new(0.3, 0.6, 0.9)),
            semi_axes: [0.0, 0.0, 0.0],
        };
        let pair = extrema_points(&e, RgbAxis::Blue, &t);
        let center = t.dkl_to_rgb_unclamped(e.center);
        assert_eq!(pair.high, center);
        assert_eq!(pair.low, center);
    }

    #[test]
    fn zero_normalization_takes_dkl_route() {
        let t = default_t();
        // Center on the unit quadric critical set: Σ κ²/axis² = 1 exactly.
        let axes = [0.25, 0.5, 1.0];
        let e = DiscriminationEllipsoid {
            center: DklColor::new(0.25, 0.0, 0.0),
            semi_axes: axes,
        };
        assert!(matches!(
            dkl_to_quadric(&e, &t),
            Err(GeometryError::DegenerateNormalization(_))
        ));
        for axis in [RgbAxis::Red, RgbAxis::Blue] {
            let pair = extrema_points(&e, axis, &t);
            let (oracle_max, oracle_min) =
                oracle::surface_sample_extrema(&e, axis, 1_000_000, t.dkl_to_rgb_matrix());
            assert!((pair.high_channel() - oracle_max).abs() < 1e-4);
            assert!((pair.low_channel() - oracle_min).abs() < 1e-4);
        }
    }

    #[test]
    fn chord_stays_inside_ellipsoid() {
        let t = default_t();
        let mut rng = SplitMix64::new(67);
        for _ in 0..50 {
            let e = random_ellipsoid(&mut rng, &t);
            let pair = extrema_points(&e, RgbAxis::Blue, &t);
            for step in 0..=20 {
                let s = step as f64 / 20.0;
                let p = [
                    pair.low[0] + s * (pair.high[0] - pair.low[0]),
                    pair.low[1] + s * (pair.high[1] - pair.low[1]),
                    pair.low[2] + s * (pair.high[2] - pair.low[2]),
                ];
                assert!(membership_rgb(&e, p, &t) <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn membership_basics() {
        let t = default_t();
        let c = LinearColor::new(0.5, 0.5, 0.5);
        let e = DiscriminationEllipsoid {
            center: t.rgb_to_dkl(c),
            semi_axes: [0.1, 0.1, 0.1],
        };
        assert!(membership(&e, c, &t).abs() < 1e-18);
    }

    #[test]
    fn membership_scale_invariant() {
        let t = default_t();
        let center = DklColor::new(1.0, 2.0, 3.0);
        let base = DiscriminationEllipsoid {
            center,
            semi_axes: [0.2, 0.3, 0.4],
        };
        let point = t.dkl_to_rgb_unclamped(DklColor::new(1.1, 2.2, 2.7));
        let m1 = membership_rgb(&base, point, &t);
        // Scale offsets and axes by the same factor.
        let scaled = DiscriminationEllipsoid {
            center,
            semi_axes: [0.6, 0.9, 1.2],
        };
        let scaled_point = t.dkl_to_rgb_unclamped(DklColor::new(1.3, 2.6, 2.1));
        let m2 = membership_rgb(&scaled, scaled_point, &t);
        assert!((m1 - m2).abs() < 1e-9);
    }
}
