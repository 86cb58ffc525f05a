//! Small 3-D vector type and the point-to-rectangle solid angle.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Axis-aligned rectangle lying in a plane, described by its extent along
/// the two in-plane axes `u` and `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl PlaneRect {
    pub fn area(&self) -> f64 {
        (self.u1 - self.u0).max(0.0) * (self.v1 - self.v0).max(0.0)
    }
}

/// Solid angle of the corner-aligned rectangle `[0,a] x [0,b]` seen from a
/// point at distance `d` on the normal through the origin corner.
///
/// The expression is odd in `a` and in `b`, which lets arbitrary rectangles be
/// assembled by inclusion-exclusion over signed corners.
fn corner_solid_angle(a: f64, b: f64, d: f64) -> f64 {
    (a * b / (d * (a * a + b * b + d * d).sqrt())).atan()
}

/// Exact solid angle (sr) subtended by `rect` at a point whose foot on the
/// rectangle's plane is `(u, v)` and whose distance from the plane is `d`.
pub fn rect_solid_angle(rect: &PlaneRect, u: f64, v: f64, d: f64) -> Result<f64> {
    let d = d.abs();
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Geometry(
            "viewpoint lies in the plane of the rectangle".into(),
        ));
    }
    if rect.area() == 0.0 {
        return Ok(0.0);
    }
    let (a0, a1) = (rect.u0 - u, rect.u1 - u);
    let (b0, b1) = (rect.v0 - v, rect.v1 - v);
    let omega = corner_solid_angle(a1, b1, d) - corner_solid_angle(a0, b1, d)
        - corner_solid_angle(a1, b0, d)
        + corner_solid_angle(a0, b0, d);
    Ok(omega.clamp(0.0, 2.0 * PI))
}

/// Sum of the solid angles of several coplanar, non-overlapping rectangles.
pub fn total_solid_angle<'a>(
    rects: impl IntoIterator<Item = &'a PlaneRect>,
    u: f64,
    v: f64,
    d: f64,
) -> Result<f64> {
    let mut sum = 0.0;
    for r in rects {
        sum += rect_solid_angle(r, u, v, d)?;
    }
    Ok(sum.min(2.0 * PI))
}
