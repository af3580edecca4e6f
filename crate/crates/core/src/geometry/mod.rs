//! Convex bodies in the plane and in space, their geometric functionals and
//! motion-aware collision and containment predicates.

mod gjk;
mod planar;
mod spatial;

pub use planar::{contains_2d, intersects_2d, ConvexBody2D, Functionals2D, Polygon};
pub(crate) use planar::{contains_placed_2d, intersects_placed_2d, Placement2D};
pub use spatial::{contains_3d, intersects_3d, ConvexBody3D, Functionals3D, Polytope};
pub(crate) use spatial::{contains_placed_3d, intersects_placed_3d, Placement3D};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::groups::RigidMotion;
use crate::{Error, Result};

/// Distance within which bodies count as touching, and boundary points as inside.
pub const CONTACT_TOL: f64 = 1e-9;

/// Either kind of convex body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryJson", into = "GeometryJson")]
pub enum Body {
    Planar(ConvexBody2D),
    Spatial(ConvexBody3D),
}

/// Functionals of either kind of body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyFunctionals {
    Planar(Functionals2D),
    Spatial(Functionals3D),
}

pub fn functionals_2d(c: &ConvexBody2D) -> Functionals2D {
    c.functionals()
}

pub fn functionals_3d(c: &ConvexBody3D) -> Functionals3D {
    c.functionals()
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Planar(_) => 2,
            Body::Spatial(_) => 3,
        }
    }

    pub fn functionals(&self) -> BodyFunctionals {
        match self {
            Body::Planar(c) => BodyFunctionals::Planar(c.functionals()),
            Body::Spatial(c) => BodyFunctionals::Spatial(c.functionals()),
        }
    }

    pub fn circumradius(&self) -> f64 {
        match self {
            Body::Planar(c) => c.circumradius(),
            Body::Spatial(c) => c.circumradius(),
        }
    }

    /// Centroid coordinates (length 2 or 3).
    pub fn centroid(&self) -> Vec<f64> {
        match self {
            Body::Planar(c) => c.centroid().as_slice().to_vec(),
            Body::Spatial(c) => c.centroid().as_slice().to_vec(),
        }
    }

    pub fn as_planar(&self) -> Result<&ConvexBody2D> {
        match self {
            Body::Planar(c) => Ok(c),
            Body::Spatial(_) => Err(Error::DimensionMismatch(3, 2)),
        }
    }

    pub fn as_spatial(&self) -> Result<&ConvexBody3D> {
        match self {
            Body::Spatial(c) => Ok(c),
            Body::Planar(_) => Err(Error::DimensionMismatch(2, 3)),
        }
    }

    pub fn transformed(&self, g: &RigidMotion) -> Result<Body> {
        match (self, g) {
            (Body::Planar(c), RigidMotion::Planar(g)) => Ok(Body::Planar(c.transformed(g))),
            (Body::Spatial(c), RigidMotion::Spatial(g)) => Ok(Body::Spatial(c.transformed(g))),
            _ => Err(Error::DimensionMismatch(self.dim(), g.dim())),
        }
    }

    /// Parse and validate geometry JSON.
    pub fn from_json_str(text: &str) -> Result<Body> {
        let raw: GeometryJson = serde_json::from_str(text)?;
        Body::try_from(raw)
    }

    pub fn to_json(&self) -> GeometryJson {
        GeometryJson::from(self.clone())
    }
}

impl From<ConvexBody2D> for Body {
    fn from(c: ConvexBody2D) -> Self {
        Body::Planar(c)
    }
}

impl From<ConvexBody3D> for Body {
    fn from(c: ConvexBody3D) -> Self {
        Body::Spatial(c)
    }
}

fn check_dims(a: &Body, b: &Body, g: &RigidMotion) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    if a.dim() != g.dim() {
        return Err(Error::DimensionMismatch(a.dim(), g.dim()));
    }
    Ok(())
}

/// Whether `c0 ∩ g·c1 ≠ ∅`.
pub fn intersects(c0: &Body, c1: &Body, g: &RigidMotion) -> Result<bool> {
    check_dims(c0, c1, g)?;
    Ok(match (c0, c1, g) {
        (Body::Planar(a), Body::Planar(b), RigidMotion::Planar(g)) => intersects_2d(a, b, g),
        (Body::Spatial(a), Body::Spatial(b), RigidMotion::Spatial(g)) => intersects_3d(a, b, g),
        _ => unreachable!("dimensions checked"),
    })
}

/// Whether `g·c1 ⊆ c2`.
pub fn contains(c2: &Body, c1: &Body, g: &RigidMotion) -> Result<bool> {
    check_dims(c2, c1, g)?;
    Ok(match (c2, c1, g) {
        (Body::Planar(a), Body::Planar(b), RigidMotion::Planar(g)) => contains_2d(a, b, g),
        (Body::Spatial(a), Body::Spatial(b), RigidMotion::Spatial(g)) => contains_3d(a, b, g),
        _ => unreachable!("dimensions checked"),
    })
}

pub fn circumradius(c: &Body) -> f64 {
    c.circumradius()
}

/// On-disk geometry: `{dim, kind, radius | vertices, faces}`, plus an optional `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryJson {
    pub dim: u8,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<Vec<usize>>>,
}

fn coords<const D: usize>(field: &str, v: &[f64]) -> Result<[f64; D]> {
    <[f64; D]>::try_from(v).map_err(|_| Error::schema(field, format!("expected {D} coordinates, got {}", v.len())))
}

fn require<T: Clone>(field: &str, kind: &str, v: &Option<T>) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::schema(field, format!("required for kind \"{kind}\"")))
}

fn forbid<T>(field: &str, kind: &str, v: &Option<T>) -> Result<()> {
    match v {
        Some(_) => Err(Error::schema(field, format!("not allowed for kind \"{kind}\""))),
        None => Ok(()),
    }
}

impl TryFrom<GeometryJson> for Body {
    type Error = Error;

    fn try_from(j: GeometryJson) -> Result<Body> {
        let kind = j.kind.as_str();
        let relabel = |field: &'static str| move |e: Error| Error::schema(field, e.to_string());
        match (j.dim, kind) {
            (2, "disk") | (3, "ball") => {
                forbid("vertices", kind, &j.vertices)?;
                forbid("faces", kind, &j.faces)?;
                let r = require("radius", kind, &j.radius)?;
                let c = j.center.clone().unwrap_or_else(|| vec![0.0; j.dim as usize]);
                if j.dim == 2 {
                    let [x, y] = coords::<2>("center", &c)?;
                    Ok(Body::Planar(ConvexBody2D::disk_at(Vector2::new(x, y), r).map_err(relabel("radius"))?))
                } else {
                    let [x, y, z] = coords::<3>("center", &c)?;
                    Ok(Body::Spatial(
                        ConvexBody3D::ball_at(Vector3::new(x, y, z), r).map_err(relabel("radius"))?,
                    ))
                }
            }
            (2 | 3, "point") => {
                forbid("radius", kind, &j.radius)?;
                forbid("vertices", kind, &j.vertices)?;
                forbid("faces", kind, &j.faces)?;
                let c = j.center.clone().unwrap_or_else(|| vec![0.0; j.dim as usize]);
                if j.dim == 2 {
                    let [x, y] = coords::<2>("center", &c)?;
                    Ok(Body::Planar(ConvexBody2D::Point(Vector2::new(x, y))))
                } else {
                    let [x, y, z] = coords::<3>("center", &c)?;
                    Ok(Body::Spatial(ConvexBody3D::Point(Vector3::new(x, y, z))))
                }
            }
            (2, "polygon") => {
                forbid("radius", kind, &j.radius)?;
                forbid("center", kind, &j.center)?;
                forbid("faces", kind, &j.faces)?;
                let vs = require("vertices", kind, &j.vertices)?
                    .iter()
                    .enumerate()
                    .map(|(i, v)| coords::<2>(&format!("vertices[{i}]"), v).map(|[x, y]| Vector2::new(x, y)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Body::Planar(ConvexBody2D::Polygon(
                    Polygon::new(vs).map_err(relabel("vertices"))?,
                )))
            }
            (3, "polytope") => {
                forbid("radius", kind, &j.radius)?;
                forbid("center", kind, &j.center)?;
                let vs = require("vertices", kind, &j.vertices)?
                    .iter()
                    .enumerate()
                    .map(|(i, v)| coords::<3>(&format!("vertices[{i}]"), v).map(|[x, y, z]| Vector3::new(x, y, z)))
                    .collect::<Result<Vec<_>>>()?;
                let faces = require("faces", kind, &j.faces)?;
                Ok(Body::Spatial(ConvexBody3D::Polytope(
                    Polytope::new(vs, &faces).map_err(relabel("faces"))?,
                )))
            }
            (2 | 3, _) => Err(Error::schema(
                "kind",
                format!("unknown {}D kind \"{kind}\"", j.dim),
            )),
            (d, _) => Err(Error::schema("dim", format!("must be 2 or 3, got {d}"))),
        }
    }
}

impl From<Body> for GeometryJson {
    fn from(b: Body) -> Self {
        let empty = |dim: u8, kind: &str| GeometryJson {
            dim,
            kind: kind.into(),
            radius: None,
            center: None,
            vertices: None,
            faces: None,
        };
        let nonzero = |c: &[f64]| c.iter().any(|x| *x != 0.0).then(|| c.to_vec());
        match b {
            Body::Planar(ConvexBody2D::Disk { center, radius }) => GeometryJson {
                radius: Some(radius),
                center: nonzero(center.as_slice()),
                ..empty(2, "disk")
            },
            Body::Planar(ConvexBody2D::Point(p)) => GeometryJson {
                center: nonzero(p.as_slice()),
                ..empty(2, "point")
            },
            Body::Planar(ConvexBody2D::Polygon(p)) => GeometryJson {
                vertices: Some(p.vertices().iter().map(|v| vec![v.x, v.y]).collect()),
                ..empty(2, "polygon")
            },
            Body::Spatial(ConvexBody3D::Ball { center, radius }) => GeometryJson {
                radius: Some(radius),
                center: nonzero(center.as_slice()),
                ..empty(3, "ball")
            },
            Body::Spatial(ConvexBody3D::Point(p)) => GeometryJson {
                center: nonzero(p.as_slice()),
                ..empty(3, "point")
            },
            Body::Spatial(ConvexBody3D::Polytope(p)) => GeometryJson {
                vertices: Some(p.vertices().iter().map(|v| vec![v.x, v.y, v.z]).collect()),
                faces: Some(p.faces().iter().map(|f| f.to_vec()).collect()),
                ..empty(3, "polytope")
            },
        }
    }
}

#[cfg(test)]
mod tests;
