use std::f64::consts::PI;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::motion::{RigidMotion, RigidMotion2D, RigidMotion3D};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HaarKind {
    So2,
    So3,
    Se2,
    Se3,
}

impl HaarKind {
    /// Dimension of the Euclidean space the group acts on.
    pub fn space_dim(self) -> usize {
        match self {
            HaarKind::So2 | HaarKind::Se2 => 2,
            HaarKind::So3 | HaarKind::Se3 => 3,
        }
    }

    /// Volume of the rotation factor under `dθ` (SO(2)) or `sinβ dα dβ dγ` (SO(3)).
    pub fn rotation_volume(self) -> f64 {
        match self {
            HaarKind::So2 | HaarKind::Se2 => 2.0 * PI,
            HaarKind::So3 | HaarKind::Se3 => 8.0 * PI * PI,
        }
    }
}

/// A rotation group, or a motion group restricted to a box of translations.
///
/// The measure is `dθ` on SO(2), `sinβ dα dβ dγ` (ZXZ Euler angles) on SO(3),
/// and the product with Lebesgue measure on the translation box for SE(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HaarDomainRaw", into = "HaarDomainRaw")]
pub struct HaarDomain {
    kind: HaarKind,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HaarDomainRaw {
    kind: HaarKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<Vec<f64>>,
}

impl TryFrom<HaarDomainRaw> for HaarDomain {
    type Error = Error;

    fn try_from(raw: HaarDomainRaw) -> Result<Self> {
        match (raw.kind, raw.lo, raw.hi) {
            (HaarKind::So2, None, None) => Ok(HaarDomain::so2()),
            (HaarKind::So3, None, None) => Ok(HaarDomain::so3()),
            (HaarKind::So2 | HaarKind::So3, _, _) => {
                Err(Error::invalid("rotation groups take no translation bounds"))
            }
            (kind, Some(lo), Some(hi)) => HaarDomain::motion(kind, lo, hi),
            _ => Err(Error::invalid(
                "SE(n) is not compact: translation bounds `lo` and `hi` are required",
            )),
        }
    }
}

impl From<HaarDomain> for HaarDomainRaw {
    fn from(d: HaarDomain) -> Self {
        let bounded = matches!(d.kind, HaarKind::Se2 | HaarKind::Se3);
        HaarDomainRaw {
            kind: d.kind,
            lo: bounded.then_some(d.lo),
            hi: bounded.then_some(d.hi),
        }
    }
}

impl HaarDomain {
    pub fn so2() -> Self {
        HaarDomain {
            kind: HaarKind::So2,
            lo: vec![],
            hi: vec![],
        }
    }

    pub fn so3() -> Self {
        HaarDomain {
            kind: HaarKind::So3,
            lo: vec![],
            hi: vec![],
        }
    }

    pub fn se2(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        HaarDomain::motion(HaarKind::Se2, lo.to_vec(), hi.to_vec())
    }

    pub fn se3(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        HaarDomain::motion(HaarKind::Se3, lo.to_vec(), hi.to_vec())
    }

    fn motion(kind: HaarKind, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = kind.space_dim();
        if lo.len() != n || hi.len() != n {
            return Err(Error::invalid(format!("translation bounds must have {n} entries")));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !l.is_finite() || !h.is_finite() {
                return Err(Error::invalid(
                    "SE(n) is not compact: translation bounds must be finite",
                ));
            }
            if h < l {
                return Err(Error::invalid(format!("empty translation interval [{l}, {h}]")));
            }
        }
        Ok(HaarDomain { kind, lo, hi })
    }

    pub fn kind(&self) -> HaarKind {
        self.kind
    }

    pub fn translation_bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn rotation_volume(&self) -> f64 {
        self.kind.rotation_volume()
    }

    /// Lebesgue volume of the translation box (1 for pure rotation groups).
    pub fn translation_volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// Total measure of the domain.
pub fn haar_volume(domain: &HaarDomain) -> f64 {
    domain.rotation_volume() * domain.translation_volume()
}

/// Uniform angle on `(-π, π]`.
pub fn sample_planar_angle(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    PI - 2.0 * PI * u
}

/// Haar-uniform rotation from a normalized 4D Gaussian quaternion.
pub fn sample_spatial_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    loop {
        let q = Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-12 {
            return UnitQuaternion::from_quaternion(q)
                .to_rotation_matrix()
                .into_inner();
        }
    }
}

fn sample_box(rng: &mut impl Rng, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    for ((o, l), h) in out.iter_mut().zip(lo).zip(hi) {
        let u: f64 = rng.random();
        *o = l + (h - l) * u;
    }
}

/// One Haar-uniform draw from the domain.
pub fn sample_motion(domain: &HaarDomain, rng: &mut impl Rng) -> RigidMotion {
    match domain.kind {
        HaarKind::So2 | HaarKind::Se2 => {
            let theta = sample_planar_angle(rng);
            let mut t = [0.0; 2];
            sample_box(rng, &domain.lo, &domain.hi, &mut t);
            RigidMotion::Planar(RigidMotion2D {
                x: t[0],
                y: t[1],
                theta,
            })
        }
        HaarKind::So3 | HaarKind::Se3 => {
            let r = sample_spatial_rotation(rng);
            let mut t = [0.0; 3];
            sample_box(rng, &domain.lo, &domain.hi, &mut t);
            RigidMotion::Spatial(RigidMotion3D::from_parts(r, Vector3::from(t)))
        }
    }
}

/// `count` Haar-uniform draws. Shard `i` of the sequence uses stream `i` of
/// `seed`, so the output is the same however many threads produce it.
pub fn haar_sample(domain: &HaarDomain, seed: u64, count: usize) -> Result<Vec<RigidMotion>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let chunks: Vec<Vec<RigidMotion>> = rng::shards(count)
        .into_par_iter()
        .map(|(shard, len)| {
            let mut r = rng::stream(seed, shard);
            (0..len).map(|_| sample_motion(domain, &mut r)).collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}
