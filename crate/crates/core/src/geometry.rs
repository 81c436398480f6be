//! Planar geometry kernel shared by map generation and constraint scoring.
//!
//! All map coordinates live in the unit square with `y` increasing
//! northward.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    /// Clamps both coordinates into `[0, 1]`.
    pub fn clamp_unit(self) -> Point {
        Point::new(self.x.clamp(0.0, 1.0), self.y.clamp(0.0, 1.0))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn of(points: &[Point]) -> Bounds {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Bounds { min, max }
    }

    /// Euclidean distance from a point to the box (0 inside).
    pub fn dist_to_point(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }

    /// Lower bound on the distance from any point of segment `ab` to the box.
    pub fn dist_to_segment_lower(&self, a: Point, b: Point) -> f64 {
        let seg = Bounds::of(&[a, b]);
        let dx = (self.min.x - seg.max.x).max(0.0).max(seg.min.x - self.max.x);
        let dy = (self.min.y - seg.max.y).max(0.0).max(seg.min.y - self.max.y);
        dx.hypot(dy)
    }
}

/// Signed area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    acc * 0.5
}

/// Area centroid of a simple polygon. Falls back to the vertex mean for
/// degenerate (zero-area) input.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let area = signed_area(poly);
    if area.abs() < 1e-300 || n < 3 {
        let sum = poly.iter().fold(Point::default(), |acc, &p| acc + p);
        return sum * (1.0 / n.max(1) as f64);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let c = p.cross(q);
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Parameter of the projection of `p` onto segment `ab`, clamped to `[0, 1]`.
pub fn segment_param(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return 0.0;
    }
    ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
}

pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let t = segment_param(p, a, b);
    p.dist(a.lerp(b, t))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection test.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

pub fn segment_segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Whether `p` lies in the closed convex polygon (CCW), with slack `eps`
/// measured as signed distance outside each edge.
pub fn convex_contains(poly: &[Point], p: Point, eps: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let edge = b - a;
        let len = edge.norm();
        if len == 0.0 {
            continue;
        }
        if edge.cross(p - a) / len < -eps {
            return false;
        }
    }
    true
}

/// Distance from `p` to the closed convex polygon (0 inside).
pub fn point_convex_dist(poly: &[Point], p: Point) -> f64 {
    if convex_contains(poly, p, 0.0) {
        return 0.0;
    }
    point_polygon_boundary_dist(poly, p)
}

/// Distance from `p` to the boundary of a polygon.
pub fn point_polygon_boundary_dist(poly: &[Point], p: Point) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_dist(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Parameter interval of segment `ab` lying inside the closed convex polygon
/// (Cyrus-Beck clipping). `None` if the segment misses the polygon.
pub fn clip_segment_convex(poly: &[Point], a: Point, b: Point) -> Option<(f64, f64)> {
    let dir = b - a;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let edge = q - p;
        // Inside is left of each CCW edge: edge x (x - p) >= 0.
        let num = edge.cross(a - p);
        let den = edge.cross(dir);
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let t = -num / den;
        if den > 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Distance between segment `ab` and the closed convex polygon.
pub fn segment_convex_dist(poly: &[Point], a: Point, b: Point) -> f64 {
    if clip_segment_convex(poly, a, b).is_some() {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|i| segment_segment_dist(a, b, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Unsigned angle between two non-zero vectors, in degrees.
pub fn angle_between_deg(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v)).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_area_and_centroid() {
        let sq = unit_square();
        assert_eq!(signed_area(&sq), 1.0);
        assert_eq!(centroid(&sq), Point::new(0.5, 0.5));
    }

    #[test]
    fn point_segment_distance_cases() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert_eq!(point_segment_dist(Point::new(0.5, 0.3), a, b), 0.3);
        assert!((point_segment_dist(Point::new(2.0, 1.0), a, b) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(point_segment_dist(Point::new(0.3, 0.4), a, a), 0.5);
    }

    #[test]
    fn clipping_a_crossing_segment() {
        let sq = unit_square();
        let (t0, t1) = clip_segment_convex(&sq, Point::new(-1.0, 0.5), Point::new(2.0, 0.5)).unwrap();
        assert!((t0 - 1.0 / 3.0).abs() < 1e-12);
        assert!((t1 - 2.0 / 3.0).abs() < 1e-12);
        assert!(clip_segment_convex(&sq, Point::new(-1.0, 2.0), Point::new(2.0, 2.0)).is_none());
    }

    #[test]
    fn segment_polygon_distance() {
        let sq = unit_square();
        let d = segment_convex_dist(&sq, Point::new(1.5, -1.0), Point::new(1.5, 2.0));
        assert!((d - 0.5).abs() < 1e-12);
        assert_eq!(
            segment_convex_dist(&sq, Point::new(0.2, 0.2), Point::new(0.3, 0.3)),
            0.0
        );
    }

    #[test]
    fn angles() {
        let south = Point::new(0.0, -1.0);
        assert_eq!(angle_between_deg(south, Point::new(0.0, -0.2)), 0.0);
        assert!((angle_between_deg(south, Point::new(0.0, 0.2)) - 180.0).abs() < 1e-12);
        assert!((angle_between_deg(south, Point::new(1.0, -1.0)) - 45.0).abs() < 1e-9);
    }

    #[test]
    fn intersection_touching_endpoint() {
        assert!(segments_intersect(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 0.0)
        ));
        assert!(!segments_intersect(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0)
        ));
    }
}
