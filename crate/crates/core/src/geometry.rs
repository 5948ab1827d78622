//! Planar primitives: points, disc footprints, home-anchored tunnels and the
//! intersection tests between them.
//!
//! Frame: origin at the front-left corner of the ground surface, the opening
//! runs along `y = 0`, `+y` points into the workspace and `+x` to the right.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for every equality/contact comparison.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("tunnel target coincides with its anchor at ({x}, {y})")]
    DegenerateTarget { x: f64, y: f64 },
}

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

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Coordinate-wise equality within `tol`.
    pub fn approx_eq(self, other: Point, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
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

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Circular object footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub const fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// Swept volume of one straight-line gripper motion: a rectangle that starts
/// at `anchor`, extends `length` along `angle` and is `width` wide, centred on
/// its spine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tunnel {
    pub anchor: Point,
    pub length: f64,
    pub width: f64,
    /// Heading of the spine in radians, in `(-pi, pi]`.
    pub angle: f64,
}

impl Tunnel {
    /// Unit vector along the spine.
    pub fn direction(&self) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(c, s)
    }

    /// Corners in counter-clockwise order starting at the anchor's right side.
    pub fn corners(&self) -> [Point; 4] {
        let dir = self.direction();
        let side = dir.perp() * (self.width / 2.0);
        let tip = self.anchor + dir * self.length;
        [self.anchor - side, tip - side, tip + side, self.anchor + side]
    }

    /// Far end of the spine.
    pub fn tip(&self) -> Point {
        self.anchor + self.direction() * self.length
    }
}

/// Interior of the confined region's ground surface, `[0, width] x [0, depth]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub width: f64,
    pub depth: f64,
}

impl Workspace {
    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.depth)
    }
}

/// Tunnel from `anchor` aimed at `target`, long enough to reach past the far
/// side of a disc of `object_radius` centred on the target.
pub fn tunnel_to(
    target: Point,
    anchor: Point,
    object_radius: f64,
    tunnel_width: f64,
) -> Result<Tunnel, GeometryError> {
    let offset = target - anchor;
    let dist = offset.norm();
    if dist <= EPS {
        return Err(GeometryError::DegenerateTarget {
            x: target.x,
            y: target.y,
        });
    }
    // arccos gives the unsigned angle to +x; the y component picks the side.
    let unsigned = (offset.x / dist).clamp(-1.0, 1.0).acos();
    let angle = if offset.y < 0.0 { -unsigned } else { unsigned };
    Ok(Tunnel {
        anchor,
        length: dist + object_radius,
        width: tunnel_width,
        angle,
    })
}

fn project(points: &[Point], axis: Point) -> (f64, f64) {
    points
        .iter()
        .map(|p| p.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Separating-axis test between the closed tunnel rectangle and a closed
/// disc. Boundary contact counts as an intersection.
///
/// Candidate axes are the two rectangle edge normals plus the axis from the
/// rectangle corner nearest the disc centre to that centre.
pub fn tunnel_intersects_disc(t: &Tunnel, d: &Disc) -> bool {
    let corners = t.corners();
    let dir = t.direction();
    let nearest = corners
        .iter()
        .copied()
        .min_by(|a, b| {
            a.distance(d.center)
                .partial_cmp(&b.distance(d.center))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(t.anchor);
    let to_center = d.center - nearest;
    let corner_len = to_center.norm();

    let mut axes = [dir, dir.perp(), dir];
    let axis_count = if corner_len > EPS {
        axes[2] = to_center * (1.0 / corner_len);
        3
    } else {
        2
    };

    for axis in &axes[..axis_count] {
        let (lo, hi) = project(&corners, *axis);
        let c = d.center.dot(*axis);
        if c + d.radius < lo - EPS || c - d.radius > hi + EPS {
            return false;
        }
    }
    true
}

/// Strict overlap; tangent discs do not overlap.
pub fn discs_overlap(a: &Disc, b: &Disc) -> bool {
    a.center.distance(b.center) < a.radius + b.radius - EPS
}

/// Whether the disc lies inside `[0, width] x [0, depth]`, touching allowed.
pub fn disc_in_workspace(d: &Disc, w: &Workspace) -> bool {
    let c = d.center;
    c.x - d.radius >= -EPS
        && c.y - d.radius >= -EPS
        && c.x + d.radius <= w.width + EPS
        && c.y + d.radius <= w.depth + EPS
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn vertical() -> Tunnel {
        Tunnel {
            anchor: Point::new(0.0, 0.0),
            length: 6.0,
            width: 4.0,
            angle: FRAC_PI_2,
        }
    }

    #[test]
    fn tunnel_axis_aligned() {
        let t = tunnel_to(Point::new(0.0, 5.0), Point::new(0.0, 0.0), 1.0, 4.0).unwrap();
        assert!((t.length - 6.0).abs() < EPS);
        assert!((t.angle - FRAC_PI_2).abs() < EPS);
        assert_eq!(t.width, 4.0);
    }

    #[test]
    fn tunnel_three_four_five() {
        let t = tunnel_to(Point::new(3.0, 4.0), Point::new(0.0, 0.0), 1.0, 4.0).unwrap();
        assert!((t.length - 6.0).abs() < EPS);
        assert!((t.angle - 0.927_295_218_001_612_2).abs() < EPS);
        assert!((t.angle - (3.0f64 / 5.0).acos()).abs() < EPS);
    }

    #[test]
    fn tunnel_signed_angle_and_tip() {
        let t = tunnel_to(Point::new(-1.0, -1.0), Point::new(0.0, 0.0), 0.0, 1.0).unwrap();
        assert!((t.angle + 3.0 * PI / 4.0).abs() < EPS);
        assert!(t.tip().approx_eq(Point::new(-1.0, -1.0), 1e-12));
        let back = tunnel_to(Point::new(-2.0, 0.0), Point::new(0.0, 0.0), 0.0, 1.0).unwrap();
        assert!((back.angle - PI).abs() < EPS);
    }

    #[test]
    fn tunnel_degenerate_target() {
        let p = Point::new(2.0, 2.0);
        assert!(matches!(
            tunnel_to(p, p, 1.0, 4.0),
            Err(GeometryError::DegenerateTarget { .. })
        ));
    }

    #[test]
    fn disc_on_spine_intersects() {
        assert!(tunnel_intersects_disc(
            &vertical(),
            &Disc::new(Point::new(0.0, 3.0), 1.0)
        ));
    }

    #[test]
    fn disc_far_lateral_misses() {
        assert!(!tunnel_intersects_disc(
            &vertical(),
            &Disc::new(Point::new(10.0, 3.0), 1.0)
        ));
    }

    #[test]
    fn boundary_contact_counts() {
        // Side edge at x = 2, tip edge at y = 6.
        assert!(tunnel_intersects_disc(
            &vertical(),
            &Disc::new(Point::new(3.0, 3.0), 1.0)
        ));
        assert!(tunnel_intersects_disc(
            &vertical(),
            &Disc::new(Point::new(0.0, 7.0), 1.0)
        ));
        assert!(!tunnel_intersects_disc(
            &vertical(),
            &Disc::new(Point::new(3.0 + 1e-6, 3.0), 1.0)
        ));
    }

    #[test]
    fn corner_region_uses_diagonal_axis() {
        // Corner at (2, 6); the disc's bounding box overlaps it but the disc does not.
        let d = Disc::new(Point::new(2.8, 6.8), 1.0);
        assert!(!tunnel_intersects_disc(&vertical(), &d));
        let touching = Disc::new(Point::new(2.7, 6.7), 1.0);
        assert!(tunnel_intersects_disc(&vertical(), &touching));
    }

    #[test]
    fn overlap_cases() {
        let a = Disc::new(Point::new(0.0, 0.0), 1.0);
        assert!(!discs_overlap(&a, &Disc::new(Point::new(2.0, 0.0), 1.0)));
        assert!(discs_overlap(&a, &Disc::new(Point::new(1.9, 0.0), 1.0)));
        assert!(discs_overlap(&a, &Disc::new(Point::new(0.0, 0.0), 1.0)));
    }

    #[test]
    fn workspace_containment() {
        let w = Workspace {
            width: 20.0,
            depth: 20.0,
        };
        assert!(disc_in_workspace(&Disc::new(Point::new(1.0, 1.0), 1.0), &w));
        assert!(!disc_in_workspace(&Disc::new(Point::new(0.5, 1.0), 1.0), &w));
        assert!(!disc_in_workspace(
            &Disc::new(Point::new(19.5, 19.5), 1.0),
            &w
        ));
    }

    #[test]
    fn point_serializes_as_pair() {
        let s = serde_json::to_string(&Point::new(1.5, -3.0)).unwrap();
        assert_eq!(s, "[1.5,-3.0]");
        let p: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, Point::new(1.5, -3.0));
    }
}
