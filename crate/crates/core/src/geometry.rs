//! Primal plane geometry: points, lines, angular sectors and rectangles.
//!
//! Lines are carried in Hesse normal form (`x cos θ + y sin θ = ρ` with
//! `θ ∈ [0, π)`), which represents vertical and horizontal lines alike.
//! The slope-intercept form only appears at the affine dual boundary.
//!
//! All containment predicates are closed: points on a boundary count as
//! inside, up to an absolute tolerance scaled by the magnitude of the
//! coordinates involved (see [`eps_geom`]).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the closed predicates.
pub const EPS_REL: f64 = 1e-9;

/// Absolute tolerance for quantities whose magnitude is about `scale`.
#[inline]
pub fn eps_geom(scale: f64) -> f64 {
    EPS_REL * scale.abs().max(1.0)
}

/// Maps an angle to `[0, π)`.
#[inline]
pub(crate) fn wrap_pi(angle: f64) -> f64 {
    let mut t = angle.rem_euclid(PI);
    if t >= PI {
        t -= PI;
    }
    t
}

/// Maps an angle to `[0, 2π)`.
#[inline]
pub(crate) fn wrap_tau(angle: f64) -> f64 {
    let mut t = angle.rem_euclid(TAU);
    if t >= TAU {
        t -= TAU;
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Point reflection through `center`.
    #[inline]
    pub fn reflect_through(self, center: Point) -> Point {
        Point::new(2.0 * center.x - self.x, 2.0 * center.y - self.y)
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub(crate) fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// `self + t·(cos angle, sin angle)`.
    #[inline]
    pub fn offset_polar(self, angle: f64, t: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(self.x + t * c, self.y + t * s)
    }
}

/// A line `x cos θ + y sin θ = ρ` with `θ ∈ [0, π)` and signed offset `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalLine {
    pub theta: f64,
    pub rho: f64,
}

impl NormalLine {
    /// Builds a line from any normal angle, normalizing it into `[0, π)`.
    pub fn new(normal_angle: f64, rho: f64) -> Self {
        let mut t = normal_angle.rem_euclid(TAU);
        let mut r = rho;
        while t >= PI {
            t -= PI;
            r = -r;
        }
        NormalLine { theta: t, rho: r }
    }

    /// The line through `p` whose direction makes angle `direction` with
    /// the x-axis.
    pub fn through(p: Point, direction: f64) -> Self {
        let theta = wrap_pi(direction + FRAC_PI_2);
        let (s, c) = theta.sin_cos();
        NormalLine {
            theta,
            rho: p.x * c + p.y * s,
        }
    }

    /// The line through two distinct points.
    pub fn through_points(p: Point, q: Point) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::DegenerateInput("non-finite point".into()));
        }
        if p == q {
            return Err(Error::DegenerateInput(format!(
                "coincident points ({}, {})",
                p.x, p.y
            )));
        }
        Ok(NormalLine::through(p, (q.y - p.y).atan2(q.x - p.x)))
    }

    #[inline]
    pub fn normal(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (c, s)
    }

    /// Signed distance of `p` to the line, positive on the side the normal
    /// points to.
    #[inline]
    pub fn signed_distance(&self, p: Point) -> f64 {
        let (c, s) = self.normal();
        p.x * c + p.y * s - self.rho
    }

    /// Angle of the line direction, in `[-π/2, π/2)`.
    #[inline]
    pub fn direction(&self) -> f64 {
        self.theta - FRAC_PI_2
    }

    pub fn is_vertical(&self) -> bool {
        self.theta == 0.0
    }

    pub fn is_horizontal(&self) -> bool {
        self.theta == FRAC_PI_2
    }

    /// Slope-intercept form in the requested orientation, `None` when the
    /// slope is unbounded in that orientation.
    pub fn to_slope_line(&self, orientation: Orientation) -> Option<SlopeLine> {
        let (c, s) = self.normal();
        let (num, den) = match orientation {
            Orientation::YOfX => (c, s),
            Orientation::XOfY => (s, c),
        };
        if self.theta == 0.0 && orientation == Orientation::YOfX
            || self.theta == FRAC_PI_2 && orientation == Orientation::XOfY
            || den == 0.0
        {
            return None;
        }
        let slope = -num / den;
        let intercept = self.rho / den;
        if !slope.is_finite() || !intercept.is_finite() {
            return None;
        }
        Some(SlopeLine {
            orientation,
            slope,
            intercept,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// `y = slope·x + intercept`
    YOfX,
    /// `x = slope·y + intercept`
    XOfY,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeLine {
    pub orientation: Orientation,
    pub slope: f64,
    pub intercept: f64,
}

impl SlopeLine {
    pub fn y_of_x(slope: f64, intercept: f64) -> Self {
        SlopeLine {
            orientation: Orientation::YOfX,
            slope,
            intercept,
        }
    }

    pub fn x_of_y(slope: f64, intercept: f64) -> Self {
        SlopeLine {
            orientation: Orientation::XOfY,
            slope,
            intercept,
        }
    }

    pub fn to_normal(&self) -> NormalLine {
        let k = self.slope.hypot(1.0);
        match self.orientation {
            // -a·x + y = b
            Orientation::YOfX => NormalLine::new((1.0f64).atan2(-self.slope), self.intercept / k),
            // x - m·y = n
            Orientation::XOfY => NormalLine::new((-self.slope).atan2(1.0), self.intercept / k),
        }
    }
}

/// Unbounded wedge with apex `apex` spanning the directions
/// `[direction - angle/2, direction + angle/2]`.
///
/// `lower` and `upper` are the boundary lines at the two edge directions.
/// The mono sector is the wedge itself; the bi sector adds its point
/// reflection through the apex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularSector {
    apex: Point,
    lower: NormalLine,
    upper: NormalLine,
    angle: f64,
    direction: f64,
    // +1/-1 so that `side * signed_distance >= 0` on the wedge side
    lower_side: f64,
    upper_side: f64,
}

impl AngularSector {
    /// Sector from apex, bisector direction and opening angle (radians).
    pub fn from_pose(apex: Point, direction: f64, angle: f64) -> Result<Self> {
        if !apex.is_finite() {
            return Err(Error::DegenerateInput("non-finite apex".into()));
        }
        if !direction.is_finite() {
            return Err(Error::DegenerateInput("non-finite direction".into()));
        }
        if !(angle > 0.0 && angle < PI) {
            return Err(Error::DegenerateInput(format!(
                "sector angle {angle} rad outside (0, π)"
            )));
        }
        let direction = wrap_tau(direction);
        let lower = NormalLine::through(apex, direction - 0.5 * angle);
        let upper = NormalLine::through(apex, direction + 0.5 * angle);
        let (dy, dx) = direction.sin_cos();
        let side = |l: &NormalLine| {
            let (c, s) = l.normal();
            if dx * c + dy * s >= 0.0 {
                1.0
            } else {
                -1.0
            }
        };
        Ok(AngularSector {
            apex,
            lower_side: side(&lower),
            upper_side: side(&upper),
            lower,
            upper,
            angle,
            direction,
        })
    }

    #[inline]
    pub fn apex(&self) -> Point {
        self.apex
    }

    #[inline]
    pub fn lower(&self) -> NormalLine {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> NormalLine {
        self.upper
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Bisector direction in `[0, 2π)`.
    #[inline]
    pub fn direction(&self) -> f64 {
        self.direction
    }

    /// Direction of the lower edge ray.
    #[inline]
    pub fn lower_edge_angle(&self) -> f64 {
        self.direction - 0.5 * self.angle
    }

    #[inline]
    pub fn upper_edge_angle(&self) -> f64 {
        self.direction + 0.5 * self.angle
    }

    /// Absolute tolerance used by this sector's predicates.
    #[inline]
    pub fn eps(&self) -> f64 {
        eps_geom(self.apex.max_abs())
    }

    /// Closed mono-sector membership.
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        let eps = self.eps();
        self.lower_side * self.lower.signed_distance(p) >= -eps
            && self.upper_side * self.upper.signed_distance(p) >= -eps
    }

    /// Closed bi-sector membership: the wedge or its reflection.
    #[inline]
    pub fn contains_bi(&self, p: Point) -> bool {
        self.contains(p) || self.contains(p.reflect_through(self.apex))
    }

    /// Normal angle of the lower line, where the dual arc starts.
    #[inline]
    pub fn arc_start(&self) -> f64 {
        self.lower.theta
    }

    /// True when the wedge's line directions straddle the vertical, so the
    /// polar dual arc passes through `θ = π ≡ 0`.
    #[inline]
    pub fn wraps_vertical(&self) -> bool {
        self.lower.theta + self.angle > PI
    }

    /// Whether `l` passes through the apex with a direction inside the
    /// sector's (bi-directional) span of line directions.
    pub fn contains_line(&self, l: &NormalLine) -> bool {
        if l.signed_distance(self.apex).abs() > self.eps() {
            return false;
        }
        let offset = (l.theta - self.lower.theta).rem_euclid(PI);
        offset <= self.angle + EPS_REL || offset >= PI - EPS_REL
    }

    /// The two halves obtained by cutting along the bisector.
    pub fn halves(&self) -> (AngularSector, AngularSector) {
        let q = 0.25 * self.angle;
        let h = 0.5 * self.angle;
        (
            AngularSector::from_pose(self.apex, self.direction - q, h)
                .expect("half of a valid sector"),
            AngularSector::from_pose(self.apex, self.direction + q, h)
                .expect("half of a valid sector"),
        )
    }

    /// Polygon approximating the wedge cut at distance `radius` from the
    /// apex: a triangle for angles below π/2, a fan of arc points otherwise.
    /// Every vertex lies in the closed wedge within `radius` of the apex.
    pub fn truncated_polygon(&self, radius: f64) -> Vec<Point> {
        let lo = self.lower_edge_angle();
        let segments = if self.angle < FRAC_PI_2 {
            1
        } else {
            ((self.angle / (PI / 8.0)).ceil() as usize).max(2)
        };
        let mut poly = Vec::with_capacity(segments + 2);
        poly.push(self.apex);
        for i in 0..=segments {
            let a = if i == segments {
                self.upper_edge_angle()
            } else {
                lo + self.angle * i as f64 / segments as f64
            };
            poly.push(self.apex.offset_polar(a, radius));
        }
        poly
    }
}

/// Axis-aligned rectangle, closed on all sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let r = Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        if r.is_valid() {
            Ok(r)
        } else {
            Err(Error::InvalidRect {
                min_x,
                min_y,
                max_x,
                max_y,
            })
        }
    }

    #[inline]
    pub fn is_valid(&self) -> bool {
        // rejects NaN as well
        self.min_x <= self.max_x && self.min_y <= self.max_y
    }

    #[inline]
    pub fn from_point(p: Point) -> Self {
        Rect {
            min_x: p.x,
            min_y: p.y,
            max_x: p.x,
            max_y: p.y,
        }
    }

    /// Bounding rectangle of a non-empty point set.
    pub fn bounding<I: IntoIterator<Item = Point>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = Rect::from_point(it.next()?);
        Some(it.fold(first, |r, p| r.union(&Rect::from_point(p))))
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    #[inline]
    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.min_x + self.max_x),
            0.5 * (self.min_y + self.max_y),
        )
    }

    #[inline]
    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            min_x: self.min_x.max(other.min_x),
            min_y: self.min_y.max(other.min_y),
            max_x: self.max_x.min(other.max_x),
            max_y: self.max_y.min(other.max_y),
        };
        r.is_valid().then_some(r)
    }

    #[inline]
    pub fn intersects(&self, other: &Rect) -> bool {
        self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    #[inline]
    pub fn contains_point(&self, p: Point) -> bool {
        self.min_x <= p.x && p.x <= self.max_x && self.min_y <= p.y && p.y <= self.max_y
    }

    #[inline]
    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.min_x <= other.min_x
            && other.max_x <= self.max_x
            && self.min_y <= other.min_y
            && other.max_y <= self.max_y
    }

    /// Area increase needed for `self` to also cover `other`.
    #[inline]
    pub fn enlargement(&self, other: &Rect) -> f64 {
        self.union(other).area() - self.area()
    }

    pub fn padded(&self, dx: f64, dy: f64) -> Rect {
        Rect {
            min_x: self.min_x - dx,
            min_y: self.min_y - dy,
            max_x: self.max_x + dx,
            max_y: self.max_y + dy,
        }
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.min_x, self.min_y),
            Point::new(self.max_x, self.min_y),
            Point::new(self.max_x, self.max_y),
            Point::new(self.min_x, self.max_y),
        ]
    }

    /// Whether the line meets the closed rectangle: the corners are not
    /// all strictly on one side.
    pub fn intersects_line(&self, l: &NormalLine) -> bool {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in self.corners() {
            let d = l.signed_distance(c);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        lo <= 0.0 && hi >= 0.0
    }
}

/// Sum of the areas, counting overlaps multiple times.
pub fn rect_area_sum(rects: &[Rect]) -> f64 {
    rects.iter().map(Rect::area).sum()
}

/// Exact area of the union.
pub fn rect_union_area(rects: &[Rect]) -> f64 {
    area_covered_at_least(rects, 1)
}

/// Exact area of the region covered by at least `depth` of the rectangles,
/// by coordinate compression. Quadratic in the number of rectangles per
/// axis, intended for node-sized inputs.
pub fn area_covered_at_least(rects: &[Rect], depth: usize) -> f64 {
    if rects.len() < depth.max(1) {
        return 0.0;
    }
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.min_x, r.max_x]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.min_y, r.max_y]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut total = 0.0;
    for xw in xs.windows(2) {
        let (x0, x1) = (xw[0], xw[1]);
        let mx = 0.5 * (x0 + x1);
        for yw in ys.windows(2) {
            let (y0, y1) = (yw[0], yw[1]);
            let my = 0.5 * (y0 + y1);
            let count = rects
                .iter()
                .filter(|r| r.min_x <= mx && mx <= r.max_x && r.min_y <= my && my <= r.max_y)
                .count();
            if count >= depth {
                total += (x1 - x0) * (y1 - y0);
            }
        }
    }
    total
}

/// Sum over unordered pairs of their intersection areas.
pub fn pairwise_intersection_area(rects: &[Rect]) -> f64 {
    let mut total = 0.0;
    for (i, a) in rects.iter().enumerate() {
        for b in &rects[i + 1..] {
            if let Some(r) = a.intersection(b) {
                total += r.area();
            }
        }
    }
    total
}
