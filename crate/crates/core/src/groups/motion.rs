use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix2, Matrix3, Matrix4, Rotation3, Unit, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta - 2.0 * PI * ((theta - PI) / (2.0 * PI)).ceil();
    // ceil can land on -π for values a hair above it after rounding
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Rotation by `angle` about `axis` (right-handed).
pub fn rotation_about(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).into_inner()
}

/// `Rz(α) Rx(β) Rz(γ)`.
pub fn euler_zxz(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    let rz = |a: f64| rotation_about(Vector3::z(), a);
    rz(alpha) * rotation_about(Vector3::x(), beta) * rz(gamma)
}

/// Planar rigid motion `(x, y, θ)` acting as `p ↦ R(θ) p + (x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl RigidMotion2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    pub fn translation(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// The 3×3 homogeneous matrix.
    pub fn to_homogeneous(&self) -> Matrix3<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix3::new(c, -s, self.x, s, c, self.y, 0.0, 0.0, 1.0)
    }

    pub fn compose(&self, other: &Self) -> Self {
        let t = self.rotation() * other.translation() + self.translation();
        Self::new(t.x, t.y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Self {
        let t = -(self.rotation().transpose() * self.translation());
        Self::new(t.x, t.y, -self.theta)
    }

    pub fn apply(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.rotation() * p + self.translation()
    }
}

impl Mul for RigidMotion2D {
    type Output = RigidMotion2D;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

/// Spatial rigid motion `(R, t)` acting as `p ↦ R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion3D {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidMotion3D {
    /// Checks `R Rᵀ = I` and `det R = 1` to 1e-10.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let orth = (rotation * rotation.transpose() - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if orth > 1e-10 || (det - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "not a rotation matrix (|RRᵀ - I| = {orth:e}, det = {det})"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub(crate) fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::from_parts(Matrix3::identity(), Vector3::zeros())
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `(R1, t1) ∘ (R2, t2) = (R1 R2, R1 t2 + t1)`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_parts(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::from_parts(rt, -(rt * self.translation))
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }
}

impl Mul for RigidMotion3D {
    type Output = RigidMotion3D;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

/// A rigid motion of the plane or of space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim")]
pub enum RigidMotion {
    #[serde(rename = "2")]
    Planar(RigidMotion2D),
    #[serde(rename = "3")]
    Spatial(RigidMotion3D),
}

impl RigidMotion {
    pub fn dim(&self) -> usize {
        match self {
            RigidMotion::Planar(_) => 2,
            RigidMotion::Spatial(_) => 3,
        }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(RigidMotion::Planar(RigidMotion2D::identity())),
            3 => Ok(RigidMotion::Spatial(RigidMotion3D::identity())),
            d => Err(Error::invalid(format!("rigid motions exist in 2D or 3D, not {d}D"))),
        }
    }

    pub fn compose(&self, other: &RigidMotion) -> Result<RigidMotion> {
        match (self, other) {
            (RigidMotion::Planar(a), RigidMotion::Planar(b)) => Ok(RigidMotion::Planar(a.compose(b))),
            (RigidMotion::Spatial(a), RigidMotion::Spatial(b)) => {
                Ok(RigidMotion::Spatial(a.compose(b)))
            }
            (a, b) => Err(Error::DimensionMismatch(a.dim(), b.dim())),
        }
    }

    pub fn inverse(&self) -> RigidMotion {
        match self {
            RigidMotion::Planar(g) => RigidMotion::Planar(g.inverse()),
            RigidMotion::Spatial(g) => RigidMotion::Spatial(g.inverse()),
        }
    }

    /// Homogeneous matrix as a dynamically sized matrix (3×3 or 4×4).
    pub fn to_homogeneous(&self) -> nalgebra::DMatrix<f64> {
        match self {
            RigidMotion::Planar(g) => {
                let m = g.to_homogeneous();
                nalgebra::DMatrix::from_iterator(3, 3, m.iter().copied())
            }
            RigidMotion::Spatial(g) => {
                let m = g.to_homogeneous();
                nalgebra::DMatrix::from_iterator(4, 4, m.iter().copied())
            }
        }
    }
}

impl From<RigidMotion2D> for RigidMotion {
    fn from(g: RigidMotion2D) -> Self {
        RigidMotion::Planar(g)
    }
}

impl From<RigidMotion3D> for RigidMotion {
    fn from(g: RigidMotion3D) -> Self {
        RigidMotion::Spatial(g)
    }
}
