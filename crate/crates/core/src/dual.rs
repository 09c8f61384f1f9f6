//! Point/line dual transforms and the dual-space footprints of sectors.
//!
//! Two transforms are provided:
//!
//! * the affine transform, which sends `y = a·x + b` to the point
//!   `(a, -b)` and the point `(x_p, y_p)` to the line `y = x_p·x - y_p`.
//!   Vertical lines have no image, so a second space works in the frame
//!   with swapped axes, where `x = m·y + n` goes to `(m, -n)`;
//! * the polar transform, which sends the normal-form line `(θ, ρ)` to the
//!   point `(θ, ρ)` and a point `(a, b)` to the sinusoid
//!   `ρ(θ) = a cos θ + b sin θ = A cos(θ - α)`.
//!
//! In both spaces a line lies on the dual of a point iff the point lies on
//! the line, so the lines through a sector's apex that stay inside the
//! sector map to a segment (affine) or a sinusoid arc (polar). A query point
//! lies in the bi-sector iff its dual crosses that piece.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AngularSector, NormalLine, Orientation, Point, Rect, SlopeLine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AffineSpace {
    /// Lines written `y = a·x + b`.
    H,
    /// Lines written `x = m·y + n` (axes swapped).
    V,
}

impl AffineSpace {
    pub fn orientation(self) -> Orientation {
        match self {
            AffineSpace::H => Orientation::YOfX,
            AffineSpace::V => Orientation::XOfY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DualSpace {
    AffineH,
    AffineV,
    Polar,
}

impl From<AffineSpace> for DualSpace {
    fn from(s: AffineSpace) -> Self {
        match s {
            AffineSpace::H => DualSpace::AffineH,
            AffineSpace::V => DualSpace::AffineV,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub u: f64,
    pub v: f64,
    pub space: DualSpace,
}

impl DualPoint {
    pub fn as_point(&self) -> Point {
        Point::new(self.u, self.v)
    }
}

/// Affine dual of a line: `y = a·x + b ↦ (a, -b)` in H,
/// `x = m·y + n ↦ (m, -n)` in V.
pub fn affine_dual_line(l: &SlopeLine) -> DualPoint {
    DualPoint {
        u: l.slope,
        v: -l.intercept,
        space: match l.orientation {
            Orientation::YOfX => DualSpace::AffineH,
            Orientation::XOfY => DualSpace::AffineV,
        },
    }
}

/// Affine dual of a point: `y = x_p·x - y_p` in H, `x = y_p·y - x_p` in V.
pub fn affine_dual_point(p: Point, space: AffineSpace) -> SlopeLine {
    match space {
        AffineSpace::H => SlopeLine::y_of_x(p.x, -p.y),
        AffineSpace::V => SlopeLine::x_of_y(p.y, -p.x),
    }
}

/// The locus of a point's dual line inside its dual plane, whose axes are
/// `(slope, -intercept)` of the primal lines: `v = slope·u + intercept`
/// in either space.
pub fn dual_plane_line(l: &SlopeLine) -> NormalLine {
    SlopeLine::y_of_x(l.slope, l.intercept).to_normal()
}

/// Polar dual of a line: its normal-form parameters.
pub fn polar_dual_line(l: &NormalLine) -> DualPoint {
    DualPoint {
        u: l.theta,
        v: l.rho,
        space: DualSpace::Polar,
    }
}

/// Polar dual of a point.
pub fn polar_dual_point(p: Point) -> Sinusoid {
    Sinusoid { a: p.x, b: p.y }
}

/// `ρ(θ) = a cos θ + b sin θ`, the polar dual of the point `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub a: f64,
    pub b: f64,
}

impl Sinusoid {
    #[inline]
    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.a * c + self.b * s
    }

    /// `A` in `ρ = A cos(θ - α)`.
    #[inline]
    pub fn amplitude(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// `α` in `ρ = A cos(θ - α)`, in `(-π, π]`; zero for the null sinusoid.
    #[inline]
    pub fn phase(&self) -> f64 {
        self.b.atan2(self.a)
    }

    /// Whether the curve passes through the closed rectangle, for polar
    /// rectangles with `0 <= min_x <= max_x <= π`.
    pub fn intersects_rect(&self, r: &Rect) -> Result<bool> {
        if !(r.is_valid() && r.min_x >= 0.0 && r.max_x <= PI) {
            return Err(Error::InvalidRect {
                min_x: r.min_x,
                min_y: r.min_y,
                max_x: r.max_x,
                max_y: r.max_y,
            });
        }
        Ok(self.intersects_rect_unchecked(r))
    }

    /// [`Sinusoid::intersects_rect`] without validating the rectangle.
    ///
    /// Images of the θ-bounds are checked first; failing that, the curve can
    /// only enter the ρ-band by crossing one of its bounds, so the inverse
    /// images `α ± acos(bound / A)` (with their 2π shifts) are tested against
    /// the θ-range. Interior extrema are checked last to absorb the rounding
    /// of `acos` near ±1.
    pub fn intersects_rect_unchecked(&self, r: &Rect) -> bool {
        let (t0, t1) = (r.min_x, r.max_x);
        let (lo, hi) = (r.min_y, r.max_y);
        let in_band = |rho: f64| lo <= rho && rho <= hi;

        let i0 = self.eval(t0);
        let i1 = self.eval(t1);
        if in_band(i0) || in_band(i1) {
            return true;
        }
        // endpoints on opposite sides of the band
        if (i0 < lo && i1 > hi) || (i0 > hi && i1 < lo) {
            return true;
        }

        let amp = self.amplitude();
        if amp == 0.0 {
            return false;
        }
        let alpha = self.phase();
        let in_range = |t: f64| t0 <= t && t <= t1;

        for bound in [lo, hi] {
            let ratio = bound / amp;
            if ratio.abs() > 1.0 {
                continue;
            }
            let c = ratio.acos();
            for base in [alpha + c, alpha - c] {
                for k in -1..=1 {
                    if in_range(base + k as f64 * TAU) {
                        return true;
                    }
                }
            }
        }

        for k in -1..=2 {
            let t = alpha + k as f64 * PI;
            if t0 < t && t < t1 && in_band(self.eval(t)) {
                return true;
            }
        }
        false
    }

    /// Range of the curve over `[t0, t1]`, from the endpoints and any
    /// interior extremum (`θ ≡ α mod π`).
    pub fn range_over(&self, t0: f64, t1: f64) -> (f64, f64) {
        let r0 = self.eval(t0);
        let r1 = self.eval(t1);
        let (mut lo, mut hi) = (r0.min(r1), r0.max(r1));
        if self.amplitude() > 0.0 {
            let alpha = self.phase();
            for k in -2..=3 {
                let t = alpha + k as f64 * PI;
                if t0 < t && t < t1 {
                    let v = self.eval(t);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        (lo, hi)
    }
}

/// Checked form of [`Sinusoid::intersects_rect`].
pub fn sinusoid_rect_intersects(s: &Sinusoid, r: &Rect) -> Result<bool> {
    s.intersects_rect(r)
}

/// Bounding rectangles of a sector's dual arc in polar space.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSectorFootprint {
    pub rects: Vec<Rect>,
    /// The arc crosses `θ = π ≡ 0` and is stored as two pieces.
    pub wrapped: bool,
    pub space: DualSpace,
}

/// Polar footprint of a sector.
///
/// The dual arc covers `θ ∈ [θ_lower, θ_lower + angle]` on the apex
/// sinusoid. Within `[0, π]` that is one piece, or two pieces
/// `[θ_lower, π]` and `[0, θ_upper]` when the sector straddles the vertical.
/// Each piece gets the bounding box of its arc, extended to an interior
/// extremum when there is one, and padded in ρ by twice the sector
/// tolerance so boundary points on the primal side are never pruned.
pub fn polar_sector_footprint(s: &AngularSector) -> DualSectorFootprint {
    let apex = polar_dual_point(s.apex());
    let pad = 2.0 * s.eps();
    let start = s.arc_start();
    let end = start + s.angle();
    let piece = |t0: f64, t1: f64| {
        let (lo, hi) = apex.range_over(t0, t1);
        Rect {
            min_x: t0,
            min_y: lo - pad,
            max_x: t1,
            max_y: hi + pad,
        }
    };
    if s.wraps_vertical() {
        DualSectorFootprint {
            rects: vec![piece(start, PI), piece(0.0, (end - PI).min(PI))],
            wrapped: true,
            space: DualSpace::Polar,
        }
    } else {
        DualSectorFootprint {
            rects: vec![piece(start, end)],
            wrapped: false,
            space: DualSpace::Polar,
        }
    }
}

/// The affine representation kept for a sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineChoice {
    pub space: AffineSpace,
    /// Padded bounding rectangle of the dual segment.
    pub rect: Rect,
    /// Duals of the lower and upper lines.
    pub points: [DualPoint; 2],
    /// Length of the dual segment.
    pub length: f64,
}

/// Whether the closed arc of normal angles `[start, start + span]` contains
/// `target` modulo π.
fn arc_hits(start: f64, span: f64, target: f64) -> bool {
    (target - start).rem_euclid(PI) <= span
}

/// The affine segment of `s` in `space`, if the lines of the sector all
/// have a finite slope there.
pub fn affine_segment(s: &AngularSector, space: AffineSpace) -> Option<[DualPoint; 2]> {
    // H cannot hold vertical lines (θ = 0), V cannot hold horizontal ones
    let singular = match space {
        AffineSpace::H => 0.0,
        AffineSpace::V => FRAC_PI_2,
    };
    if arc_hits(s.arc_start(), s.angle(), singular) {
        return None;
    }
    let o = space.orientation();
    let lo = s.lower().to_slope_line(o)?;
    let up = s.upper().to_slope_line(o)?;
    Some([affine_dual_line(&lo), affine_dual_line(&up)])
}

/// Picks the affine space whose dual segment is shortest, preferring H on
/// ties. Spaces in which the sector's lines cross the singular direction
/// are skipped, since there the sector maps to two unbounded rays rather
/// than a segment.
pub fn affine_sector_choice(s: &AngularSector) -> Result<AffineChoice> {
    let eps = s.eps();
    let make = |space: AffineSpace, points: [DualPoint; 2]| {
        let [p, q] = points;
        let length = (p.u - q.u).hypot(p.v - q.v);
        let rect = Rect::bounding([p.as_point(), q.as_point()]).expect("two points");
        // a primal offset δ from a boundary line shows up as a vertical
        // offset δ·sqrt(1 + slope²) in the dual plane
        let pad = 2.0 * eps * (1.0 + p.u.abs().max(q.u.abs()));
        AffineChoice {
            space,
            rect: rect.padded(0.0, pad),
            points,
            length,
        }
    };
    let h = affine_segment(s, AffineSpace::H).map(|pts| make(AffineSpace::H, pts));
    let v = affine_segment(s, AffineSpace::V).map(|pts| make(AffineSpace::V, pts));
    match (h, v) {
        (Some(h), Some(v)) => Ok(if h.length <= v.length { h } else { v }),
        (Some(h), None) => Ok(h),
        (None, Some(v)) => Ok(v),
        (None, None) => Err(Error::NoAffineSegment),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn affine_line_examples() {
        let d = affine_dual_line(&SlopeLine::y_of_x(2.0, 3.0));
        assert_eq!((d.u, d.v, d.space), (2.0, -3.0, DualSpace::AffineH));
        let d = affine_dual_line(&SlopeLine::x_of_y(0.5, 1.0));
        assert_eq!((d.u, d.v, d.space), (0.5, -1.0, DualSpace::AffineV));
        let d = affine_dual_line(&SlopeLine::y_of_x(0.0, 0.0));
        assert_eq!((d.u, d.v), (0.0, 0.0));
    }

    #[test]
    fn affine_point_examples() {
        assert_eq!(
            affine_dual_point(Point::new(1.0, 1.0), AffineSpace::H),
            SlopeLine::y_of_x(1.0, -1.0)
        );
        let origin = affine_dual_point(Point::new(0.0, 0.0), AffineSpace::H);
        assert_eq!((origin.slope, origin.intercept), (0.0, 0.0));
        assert_eq!(
            affine_dual_point(Point::new(1.0, 1.0), AffineSpace::V),
            SlopeLine::x_of_y(1.0, -1.0)
        );
    }

    #[test]
    fn polar_line_examples() {
        let d = polar_dual_line(&NormalLine::new(FRAC_PI_2, 1.0));
        assert_eq!((d.u, d.v, d.space), (FRAC_PI_2, 1.0, DualSpace::Polar));
        let d = polar_dual_line(&NormalLine::new(0.0, 2.0));
        assert_eq!((d.u, d.v), (0.0, 2.0));
        let l = NormalLine::through_points(Point::new(0.0, 1.0), Point::new(1.0, 0.0)).unwrap();
        let d = polar_dual_line(&l);
        assert!((d.u - FRAC_PI_4).abs() < 1e-12 && (d.v - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn polar_point_examples() {
        let s = polar_dual_point(Point::new(3.0, 4.0));
        assert_eq!(s.amplitude(), 5.0);
        assert!((s.phase() - 0.927_295_218_001_612_2).abs() < 1e-12);
        let z = polar_dual_point(Point::new(0.0, 0.0));
        assert_eq!(z.eval(1.234), 0.0);
        let s = polar_dual_point(Point::new(0.0, 1.0));
        assert!((s.eval(FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sinusoid_rect_examples() {
        let zero = Sinusoid { a: 0.0, b: 0.0 };
        assert!(zero
            .intersects_rect(&Rect::new(0.1, -1.0, 0.2, 1.0).unwrap())
            .unwrap());
        assert!(!zero
            .intersects_rect(&Rect::new(0.1, 0.5, 0.2, 1.0).unwrap())
            .unwrap());

        let s = Sinusoid { a: 3.0, b: 4.0 };
        assert!(s
            .intersects_rect(&Rect::new(0.9, 4.9, 1.0, 5.0).unwrap())
            .unwrap());
        assert!(!s
            .intersects_rect(&Rect::new(0.9, 5.1, 1.0, 6.0).unwrap())
            .unwrap());
    }

    #[test]
    fn sinusoid_rect_rejects_out_of_range_theta() {
        let s = Sinusoid { a: 1.0, b: 0.0 };
        let r = Rect {
            min_x: -0.1,
            min_y: 0.0,
            max_x: 1.0,
            max_y: 1.0,
        };
        assert!(matches!(
            s.intersects_rect(&r),
            Err(Error::InvalidRect { .. })
        ));
        let r = Rect {
            min_x: 0.5,
            min_y: 0.0,
            max_x: 0.4,
            max_y: 1.0,
        };
        assert!(s.intersects_rect(&r).is_err());
    }

    #[test]
    fn sinusoid_crossing_through_the_band_interior() {
        // neither image nor extremum inside, only a bound crossing
        let s = Sinusoid { a: 1.0, b: 0.0 };
        let r = Rect::new(0.5, 0.2, 1.5, 0.3).unwrap();
        assert!(s.intersects_rect(&r).unwrap());
        // extremum case: cos peaks at 0, band only reachable near the top
        let s = Sinusoid { a: -1.0, b: 0.0 };
        let r = Rect::new(3.0, 0.999, PI, 2.0).unwrap();
        assert!(s.intersects_rect(&r).unwrap());
    }

    #[test]
    fn footprint_plain_sector() {
        let s = AngularSector::from_pose(Point::new(1.0, 0.0), FRAC_PI_8, FRAC_PI_4).unwrap();
        let f = polar_sector_footprint(&s);
        assert!(!f.wrapped);
        assert_eq!(f.rects.len(), 1);
        let r = f.rects[0];
        let tol = 1e-8;
        assert!((r.min_x - FRAC_PI_2).abs() < tol && (r.max_x - 3.0 * FRAC_PI_4).abs() < tol);
        assert!((r.min_y + FRAC_1_SQRT_2).abs() < tol && r.max_y.abs() < tol);
    }

    #[test]
    fn footprint_wrapped_sector() {
        let s = AngularSector::from_pose(Point::new(0.0, 0.0), FRAC_PI_2, 0.2).unwrap();
        let f = polar_sector_footprint(&s);
        assert!(f.wrapped);
        assert_eq!(f.rects.len(), 2);
        assert!((f.rects[0].min_x - s.lower().theta).abs() < 1e-15);
        assert_eq!(f.rects[0].max_x, PI);
        assert_eq!(f.rects[1].min_x, 0.0);
        assert!((f.rects[1].max_x - s.upper().theta).abs() < 1e-12);
    }

    #[test]
    fn footprint_extended_to_extremum() {
        // apex (0, 2) has sinusoid 2 sin θ, peaking at θ = π/2, which the
        // arc of near-horizontal lines [π/2 - 0.3, π/2 + 0.3] straddles
        let s = AngularSector::from_pose(Point::new(0.0, 2.0), 0.0, 0.6).unwrap();
        let f = polar_sector_footprint(&s);
        let r = f.rects[0];
        assert!(r.min_x < FRAC_PI_2 && FRAC_PI_2 < r.max_x);
        assert!(r.max_y >= 2.0);
    }

    #[test]
    fn affine_choice_near_horizontal() {
        // y = 0.1x - 0.1 and y = 0.2x - 0.4 meet at (3, 0.2)
        let lo = 0.1f64.atan();
        let up = 0.2f64.atan();
        let s = AngularSector::from_pose(Point::new(3.0, 0.2), 0.5 * (lo + up), up - lo).unwrap();
        let c = affine_sector_choice(&s).unwrap();
        assert_eq!(c.space, AffineSpace::H);
        let [p, q] = c.points;
        assert!((p.u - 0.1).abs() < 1e-12 && (p.v - 0.1).abs() < 1e-12);
        assert!((q.u - 0.2).abs() < 1e-12 && (q.v - 0.4).abs() < 1e-12);
        assert!((c.length - 0.1f64.hypot(0.3)).abs() < 1e-12);
        // V space: x = 10y + 1 and x = 5y + 2, i.e. (10, -1) and (5, -2)
        let [pv, qv] = affine_segment(&s, AffineSpace::V).unwrap();
        let dv = (pv.u - qv.u).hypot(pv.v - qv.v);
        assert!((dv - 26f64.sqrt()).abs() < 1e-9, "{dv}");
    }

    #[test]
    fn affine_choice_vertical_boundary() {
        // lower edge exactly vertical
        let s = AngularSector::from_pose(Point::new(1.0, 1.0), FRAC_PI_2 + 0.1, 0.2).unwrap();
        assert!(s.lower().is_vertical() || s.lower().theta < 1e-15 || s.lower().theta > PI - 1e-15);
        let c = affine_sector_choice(&s).unwrap();
        assert_eq!(c.space, AffineSpace::V);
    }

    #[test]
    fn affine_choice_symmetric_slopes() {
        // boundaries y = ±x: equal segment lengths in both spaces, but V
        // would describe the complementary wedge, so H is kept
        let s = AngularSector::from_pose(Point::new(0.0, 0.0), 0.0, FRAC_PI_2).unwrap();
        let c = affine_sector_choice(&s).unwrap();
        assert_eq!(c.space, AffineSpace::H);
        assert!(affine_segment(&s, AffineSpace::V).is_none());
    }

    #[test]
    fn affine_choice_tie_goes_to_h() {
        // slopes 1/2 and 2 through the origin: both segments have length 1.5
        let lo = 0.5f64.atan();
        let up = 2f64.atan();
        let s = AngularSector::from_pose(Point::new(0.0, 0.0), 0.5 * (lo + up), up - lo).unwrap();
        let [a, b] = affine_segment(&s, AffineSpace::H).unwrap();
        let [c, d] = affine_segment(&s, AffineSpace::V).unwrap();
        let dh = (a.u - b.u).hypot(a.v - b.v);
        let dv = (c.u - d.u).hypot(c.v - d.v);
        assert!((dh - 1.5).abs() < 1e-12 && (dv - 1.5).abs() < 1e-12);
        let choice = affine_sector_choice(&s).unwrap();
        assert_eq!(choice.space, AffineSpace::H);
    }

    #[test]
    fn affine_wide_sector_unrepresentable() {
        // spans both the horizontal and the vertical direction
        let s = AngularSector::from_pose(Point::new(0.0, 0.0), FRAC_PI_4, 2.0).unwrap();
        assert!(matches!(
            affine_sector_choice(&s),
            Err(Error::NoAffineSegment)
        ));
        let (a, b) = s.halves();
        assert!(affine_sector_choice(&a).is_ok() && affine_sector_choice(&b).is_ok());
    }
}
