//! Camera model, rotations, oriented boxes and planes.
//!
//! Conventions: image axes are x-right, y-down; the camera frame is x-right,
//! y-down, z-forward, so points in front of the camera have positive z.
//! Pixel coordinates are continuous (the center of pixel (0,0) is (0.5,0.5)).

use nalgebra::{Matrix3, Quaternion, Rotation3 as NaRotation, Unit, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Pinhole intrinsics plus image size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let cam = CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            return Err(Error::InvalidInput(format!(
                "cx={} outside [0, {})",
                self.cx, self.width
            )));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(Error::InvalidInput(format!(
                "cy={} outside [0, {})",
                self.cy, self.height
            )));
        }
        Ok(())
    }

    /// Pinhole projection `u = fx·X/Z + cx`, `v = fy·Y/Z + cy`.
    pub fn project(&self, p: &Vec3) -> Result<Vec2> {
        if !(p.z > 0.0) {
            return Err(Error::BehindCamera);
        }
        Ok(Vec2::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    pub fn contains(&self, uv: &Vec2) -> bool {
        uv.x >= 0.0 && uv.y >= 0.0 && uv.x < self.width as f64 && uv.y < self.height as f64
    }
}

/// Free-function form of [`CameraIntrinsics::project`].
pub fn project(cam: &CameraIntrinsics, p: &Vec3) -> Result<Vec2> {
    cam.project(p)
}

/// A 3D rotation stored as a unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(UnitQuaternion<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Rotation3(UnitQuaternion::identity())
    }

    /// Builds a rotation from quaternion components, rejecting inputs whose
    /// norm is further than `tol` from one. The stored value is renormalized.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64, tol: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || (n - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!("quaternion norm {n} is not unit")));
        }
        Ok(Rotation3(UnitQuaternion::new_normalize(q)))
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        Rotation3(UnitQuaternion::from_axis_angle(&Unit::new_normalize(*axis), angle))
    }

    /// Rotation from a matrix that is already (numerically) orthonormal with det +1.
    pub fn from_matrix(m: &Mat3) -> Self {
        let r = NaRotation::from_matrix_unchecked(*m);
        Rotation3(UnitQuaternion::from_rotation_matrix(&r))
    }

    pub fn from_unit_quaternion(q: UnitQuaternion<f64>) -> Self {
        Rotation3(q)
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    /// Components in (w, x, y, z) order.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.0.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn matrix(&self) -> Mat3 {
        self.0.to_rotation_matrix().into_inner()
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn compose(&self, other: &Rotation3) -> Rotation3 {
        Rotation3(self.0 * other.0)
    }

    pub fn inverse(&self) -> Rotation3 {
        Rotation3(self.0.inverse())
    }

    /// Geodesic distance in radians.
    pub fn angle_to(&self, other: &Rotation3) -> f64 {
        self.0.angle_to(&other.0)
    }
}

impl Default for Rotation3 {
    fn default() -> Self {
        Self::identity()
    }
}

/// Sign pattern of box vertex `index`: bit 0 selects +x, bit 1 +y, bit 2 +z.
pub fn vertex_signs(index: usize) -> [f64; 3] {
    debug_assert!(index < 8);
    let s = |bit: usize| if index & (1 << bit) != 0 { 1.0 } else { -1.0 };
    [s(0), s(1), s(2)]
}

/// Oriented 3D box. `size` holds full extents along the object axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox3 {
    pub rotation: Rotation3,
    pub center: Vec3,
    pub size: Vec3,
}

impl OrientedBox3 {
    pub fn new(rotation: Rotation3, center: Vec3, size: Vec3) -> Result<Self> {
        if !size.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("box size must be positive, got {size:?}")));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("box center must be finite".into()));
        }
        Ok(OrientedBox3 { rotation, center, size })
    }

    pub fn axis_aligned(center: Vec3, size: Vec3) -> Result<Self> {
        Self::new(Rotation3::identity(), center, size)
    }

    pub fn volume(&self) -> f64 {
        self.size.x * self.size.y * self.size.z
    }

    pub fn vertices(&self) -> [Vec3; 8] {
        box_vertices(self)
    }

    /// Object-frame coordinates of a world point.
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        self.rotation.quaternion().inverse_transform_vector(&(p - self.center))
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.rotation.rotate(local) + self.center
    }

    /// Point-in-box test with absolute slack `tol` on every face.
    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        let l = self.to_local(p);
        (0..3).all(|k| l[k].abs() <= 0.5 * self.size[k] + tol)
    }

    /// Applies `X -> R·X + t` to the box.
    pub fn transformed(&self, r: &Rotation3, t: &Vec3) -> OrientedBox3 {
        OrientedBox3 {
            rotation: r.compose(&self.rotation),
            center: r.rotate(&self.center) + t,
            size: self.size,
        }
    }

    /// Uniform scaling about the camera center; orientation is unchanged.
    pub fn scaled(&self, s: f64) -> OrientedBox3 {
        OrientedBox3 {
            rotation: self.rotation,
            center: self.center * s,
            size: self.size * s,
        }
    }

    /// Length of the space diagonal.
    pub fn diameter(&self) -> f64 {
        self.size.norm()
    }

    /// Vertices expressed in the object frame (centered, unrotated).
    pub fn local_vertices(&self) -> [Vec3; 8] {
        std::array::from_fn(|i| {
            let s = vertex_signs(i);
            Vec3::new(
                0.5 * s[0] * self.size.x,
                0.5 * s[1] * self.size.y,
                0.5 * s[2] * self.size.z,
            )
        })
    }
}

/// The eight corners `center + R·(σx·sx/2, σy·sy/2, σz·sz/2)` in bit order.
pub fn box_vertices(b: &OrientedBox3) -> [Vec3; 8] {
    let r = b.rotation.matrix();
    b.local_vertices().map(|l| r * l + b.center)
}

/// Plane `{X : normal·X + d = 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3 {
    normal: Vec3,
    pub d: f64,
}

impl Plane3 {
    /// Normalizes `normal` (and scales `d` accordingly).
    pub fn new(normal: Vec3, d: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 1e-12) || !d.is_finite() {
            return Err(Error::InvalidInput("plane normal must be non-zero".into()));
        }
        Ok(Plane3 {
            normal: normal / n,
            d: d / n,
        })
    }

    pub fn normal(&self) -> &Vec3 {
        &self.normal
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) + self.d
    }
}

/// Projects every vertex of `b`.
pub fn project_box(cam: &CameraIntrinsics, b: &OrientedBox3) -> Result<[Vec2; 8]> {
    let v = box_vertices(b);
    let mut out = [Vec2::zeros(); 8];
    for (o, p) in out.iter_mut().zip(v.iter()) {
        *o = cam.project(p)?;
    }
    Ok(out)
}
