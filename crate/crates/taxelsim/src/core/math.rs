//! Minimal 3D math: vectors, rotation quaternions, and rigid poses.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Norm tolerance for unit vectors and unit quaternions.
pub const UNIT_TOL: f64 = 1e-9;

/// A 3D vector. Meters for positions, m/s² for gravity, unitless for directions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for zero/non-finite input.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if !n.is_finite() || n < 1e-12 {
            return None;
        }
        Some(self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component-wise minimum.
    pub fn min(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.x.min(other.x),
            self.y.min(other.y),
            self.z.min(other.z),
        )
    }

    /// Component-wise maximum.
    pub fn max(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.x.max(other.x),
            self.y.max(other.y),
            self.z.max(other.z),
        )
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

/// Rotation quaternion, scalar-first (w, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    /// Rotation of `angle` radians about a unit `axis`.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let (s, c) = (angle * 0.5).sin_cos();
        Quat::new(c, axis.x * s, axis.y * s, axis.z * s)
    }

    pub fn dot(self, other: Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit quaternion with the same orientation, or `None` for zero/non-finite input.
    pub fn normalized(self) -> Option<Quat> {
        let n = self.norm();
        if !n.is_finite() || n < 1e-12 {
            return None;
        }
        Some(Quat::new(self.w / n, self.x / n, self.y / n, self.z / n))
    }

    pub fn conjugate(self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotate a vector. Assumes `self` is unit length.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        // v' = v + 2 q_v × (q_v × v + w v)
        let qv = Vec3::new(self.x, self.y, self.z);
        let t = qv.cross(v) + v * self.w;
        v + qv.cross(t) * 2.0
    }

    /// Shortest-arc spherical interpolation between unit quaternions.
    ///
    /// Negates the far endpoint when the dot product is negative, so the
    /// interpolation never takes the long way around. Exact at u = 0 and u = 1.
    pub fn slerp(self, other: Quat, u: f64) -> Quat {
        let mut end = other;
        let mut dot = self.dot(other);
        if dot < 0.0 {
            end = -end;
            dot = -dot;
        }
        if u <= 0.0 {
            return self;
        }
        if u >= 1.0 {
            return end;
        }
        if dot > 1.0 - 1e-10 {
            // Nearly identical orientations: normalized lerp avoids sin(θ)≈0.
            let q = Quat::new(
                self.w + (end.w - self.w) * u,
                self.x + (end.x - self.x) * u,
                self.y + (end.y - self.y) * u,
                self.z + (end.z - self.z) * u,
            );
            return q.normalized().unwrap_or(self);
        }
        let theta = dot.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        let a = ((1.0 - u) * theta).sin() / sin_theta;
        let b = (u * theta).sin() / sin_theta;
        Quat::new(
            self.w * a + end.w * b,
            self.x * a + end.x * b,
            self.y * a + end.y * b,
            self.z * a + end.z * b,
        )
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quat {
    type Output = Quat;
    /// Hamilton product; `a * b` rotates by `b` first, then `a`.
    fn mul(self, r: Quat) -> Quat {
        Quat::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

/// A rigid transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// Unit rotation quaternion.
    pub rotation: Quat,
    /// Translation (m).
    pub translation: Vec3,
}

impl Pose {
    pub fn identity() -> Pose {
        Pose {
            rotation: Quat::IDENTITY,
            translation: Vec3::ZERO,
        }
    }

    /// Build a pose, normalizing the rotation. `None` when the quaternion is
    /// zero or any component is non-finite.
    pub fn new(rotation: Quat, translation: Vec3) -> Option<Pose> {
        if !translation.is_finite() {
            return None;
        }
        let rotation = rotation.normalized()?;
        Some(Pose {
            rotation,
            translation,
        })
    }

    pub fn from_translation(translation: Vec3) -> Pose {
        Pose {
            rotation: Quat::IDENTITY,
            translation,
        }
    }

    pub fn from_rotation(rotation: Quat) -> Option<Pose> {
        Pose::new(rotation, Vec3::ZERO)
    }

    /// Map a point through the transform.
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    /// Rotate a direction (no translation).
    pub fn rotate_dir(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    /// Compose transforms: `(a * b)` applies `b` first, then `a`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation.rotate(other.translation) + self.translation,
        }
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}
