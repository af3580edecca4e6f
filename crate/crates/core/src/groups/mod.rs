//! Finite rotation groups and the rigid-motion groups SO(2), SO(3), SE(2), SE(3).

mod finite;
mod haar;
mod motion;

pub use finite::{FiniteGroup, GroupJson, GroupKind};
pub use haar::{
    haar_sample, haar_volume, sample_motion, sample_planar_angle, sample_spatial_rotation,
    HaarDomain, HaarKind,
};
pub use motion::{euler_zxz, rotation_about, wrap_angle, RigidMotion, RigidMotion2D, RigidMotion3D};
