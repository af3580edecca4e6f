use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::gjk;
use super::CONTACT_TOL;
use crate::groups::RigidMotion3D;
use crate::{Error, Result};

/// Volume, surface area and integral of mean curvature of a body in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals3D {
    pub volume: f64,
    pub area: f64,
    pub mean_curvature: f64,
}

/// A convex polytope with a closed, outward-wound triangulated boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vector3<f64>>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Vector3<f64>>,
}

impl Polytope {
    /// Faces with more than three vertices are fan-triangulated; each face must
    /// be wound counterclockwise seen from outside.
    pub fn new(vertices: Vec<Vector3<f64>>, faces: &[Vec<usize>]) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::invalid("polytope needs at least 4 vertices"));
        }
        if let Some(i) = vertices.iter().position(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::invalid(format!("vertex {i} is not finite")));
        }
        let mut tris = Vec::new();
        for (f, face) in faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(Error::invalid(format!("face {f} has fewer than 3 vertices")));
            }
            if let Some(&bad) = face.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::invalid(format!("face {f} references missing vertex {bad}")));
            }
            for k in 1..face.len() - 1 {
                tris.push([face[0], face[k], face[k + 1]]);
            }
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let mut normals = Vec::with_capacity(tris.len());
        for (f, t) in tris.iter().enumerate() {
            let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            if n.norm() <= 1e-12 * scale * scale {
                return Err(Error::invalid(format!("triangle {f} {t:?} is degenerate")));
            }
            normals.push(n.normalize());
        }
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &tris {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                *directed.entry(e).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 || directed.get(&(b, a)) != Some(&1) {
                return Err(Error::invalid(format!(
                    "boundary is not watertight and consistently wound at edge ({a}, {b})"
                )));
            }
        }
        for (f, t) in tris.iter().enumerate() {
            let n = normals[f];
            let p = vertices[t[0]];
            if let Some(v) = (0..vertices.len()).find(|&v| n.dot(&(vertices[v] - p)) > 1e-9 * scale) {
                return Err(Error::invalid(format!(
                    "polytope is not convex (or face {f} is wound inward): vertex {v} lies outside its plane"
                )));
            }
        }
        let poly = Polytope {
            vertices,
            faces: tris,
            normals,
        };
        if poly.volume() <= 1e-12 * scale.powi(3) {
            return Err(Error::invalid("polytope has zero volume"));
        }
        Ok(poly)
    }

    /// Axis-aligned box with side lengths `a × b × c`, centered at the origin.
    pub fn cuboid(a: f64, b: f64, c: f64) -> Result<Self> {
        let (x, y, z) = (0.5 * a, 0.5 * b, 0.5 * c);
        let vertices = (0..8)
            .map(|i| {
                Vector3::new(
                    if i & 1 == 0 { -x } else { x },
                    if i & 2 == 0 { -y } else { y },
                    if i & 4 == 0 { -z } else { z },
                )
            })
            .collect();
        let faces = [
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
        ];
        Polytope::new(vertices, &faces)
    }

    /// Cube of side `s` centered at the origin.
    pub fn cube(s: f64) -> Result<Self> {
        Polytope::cuboid(s, s, s)
    }

    /// Regular tetrahedron with vertices at alternate corners of `[-s, s]³`.
    pub fn tetrahedron(s: f64) -> Result<Self> {
        let v = vec![
            Vector3::new(s, s, s),
            Vector3::new(s, -s, -s),
            Vector3::new(-s, s, -s),
            Vector3::new(-s, -s, s),
        ];
        Polytope::new(v, &[vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]])
    }

    /// Regular octahedron with vertices at distance `r` on the axes.
    pub fn octahedron(r: f64) -> Result<Self> {
        let v = vec![
            Vector3::new(r, 0.0, 0.0),
            Vector3::new(-r, 0.0, 0.0),
            Vector3::new(0.0, r, 0.0),
            Vector3::new(0.0, -r, 0.0),
            Vector3::new(0.0, 0.0, r),
            Vector3::new(0.0, 0.0, -r),
        ];
        let faces = [
            vec![0, 2, 4],
            vec![2, 1, 4],
            vec![1, 3, 4],
            vec![3, 0, 4],
            vec![2, 0, 5],
            vec![1, 2, 5],
            vec![3, 1, 5],
            vec![0, 3, 5],
        ];
        Polytope::new(v, &faces)
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    /// Triangulated faces, outward wound.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|t| self.vertices[t[0]].dot(&self.vertices[t[1]].cross(&self.vertices[t[2]])))
            .sum::<f64>()
            / 6.0
    }

    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                (b - a).cross(&(c - a)).norm()
            })
            .sum::<f64>()
            / 2.0
    }

    /// `½ Σ_edges ℓ(e) θ(e)`, `θ` the angle between the outward normals meeting at `e`.
    pub fn mean_curvature(&self) -> f64 {
        let mut face_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (f, t) in self.faces.iter().enumerate() {
            for k in 0..3 {
                face_of.insert((t[k], t[(k + 1) % 3]), f);
            }
        }
        let mut total = 0.0;
        for (&(a, b), &f) in &face_of {
            if a > b {
                continue;
            }
            let g = face_of[&(b, a)];
            let (n0, n1) = (self.normals[f], self.normals[g]);
            let angle = n0.cross(&n1).norm().atan2(n0.dot(&n1));
            total += (self.vertices[b] - self.vertices[a]).norm() * angle;
        }
        0.5 * total
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let mut c = Vector3::zeros();
        for t in &self.faces {
            let [a, b, d] = t.map(|i| self.vertices[i]);
            c += (a + b + d) * a.dot(&b.cross(&d));
        }
        c / (24.0 * self.volume())
    }

    /// Outward unit normals and offsets `(n, h)` with the polytope `{x : n·x ≤ h}`.
    pub fn half_spaces(&self) -> Vec<(Vector3<f64>, f64)> {
        self.faces
            .iter()
            .zip(&self.normals)
            .map(|(t, n)| (*n, n.dot(&self.vertices[t[0]])))
            .collect()
    }

    fn support(&self, d: &Vector3<f64>) -> Vector3<f64> {
        let mut best = self.vertices[0];
        let mut best_dot = best.dot(d);
        for v in &self.vertices[1..] {
            let t = v.dot(d);
            if t > best_dot {
                best = *v;
                best_dot = t;
            }
        }
        best
    }
}

/// A closed convex body in space.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody3D {
    Ball { center: Vector3<f64>, radius: f64 },
    Polytope(Polytope),
    /// Degenerate single-point body.
    Point(Vector3<f64>),
}

impl ConvexBody3D {
    pub fn ball(radius: f64) -> Result<Self> {
        ConvexBody3D::ball_at(Vector3::zeros(), radius)
    }

    pub fn ball_at(center: Vector3<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConvexBody3D::Ball { center, radius })
    }

    pub fn functionals(&self) -> Functionals3D {
        match self {
            ConvexBody3D::Ball { radius: r, .. } => Functionals3D {
                volume: 4.0 * PI * r.powi(3) / 3.0,
                area: 4.0 * PI * r * r,
                mean_curvature: 4.0 * PI * r,
            },
            ConvexBody3D::Polytope(p) => Functionals3D {
                volume: p.volume(),
                area: p.area(),
                mean_curvature: p.mean_curvature(),
            },
            ConvexBody3D::Point(_) => Functionals3D {
                volume: 0.0,
                area: 0.0,
                mean_curvature: 0.0,
            },
        }
    }

    pub fn centroid(&self) -> Vector3<f64> {
        match self {
            ConvexBody3D::Ball { center, .. } => *center,
            ConvexBody3D::Polytope(p) => p.centroid(),
            ConvexBody3D::Point(p) => *p,
        }
    }

    /// Largest distance from the centroid to a point of the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody3D::Ball { radius, .. } => *radius,
            ConvexBody3D::Polytope(p) => {
                let c = p.centroid();
                p.vertices.iter().map(|v| (v - c).norm()).fold(0.0, f64::max)
            }
            ConvexBody3D::Point(_) => 0.0,
        }
    }

    pub fn transformed(&self, g: &RigidMotion3D) -> Self {
        match self {
            ConvexBody3D::Ball { center, radius } => ConvexBody3D::Ball {
                center: g.apply(center),
                radius: *radius,
            },
            ConvexBody3D::Polytope(p) => ConvexBody3D::Polytope(Polytope {
                vertices: p.vertices.iter().map(|v| g.apply(v)).collect(),
                faces: p.faces.clone(),
                normals: p.normals.iter().map(|n| g.rotation() * n).collect(),
            }),
            ConvexBody3D::Point(p) => ConvexBody3D::Point(g.apply(p)),
        }
    }

    pub fn support(&self, d: &Vector3<f64>) -> Vector3<f64> {
        match self {
            ConvexBody3D::Ball { center, radius } => {
                let n = d.norm();
                if n > 0.0 {
                    center + d * (radius / n)
                } else {
                    *center
                }
            }
            ConvexBody3D::Polytope(p) => p.support(d),
            ConvexBody3D::Point(p) => *p,
        }
    }

    fn round(&self) -> Option<(Vector3<f64>, f64)> {
        match self {
            ConvexBody3D::Ball { center, radius } => Some((*center, *radius)),
            ConvexBody3D::Point(p) => Some((*p, 0.0)),
            ConvexBody3D::Polytope(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Placement3D {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl From<&RigidMotion3D> for Placement3D {
    fn from(g: &RigidMotion3D) -> Self {
        Placement3D {
            rotation: *g.rotation(),
            translation: *g.translation(),
        }
    }
}

/// Whether `c0 ∩ g·c1 ≠ ∅` (touching counts).
pub fn intersects_3d(c0: &ConvexBody3D, c1: &ConvexBody3D, g: &RigidMotion3D) -> bool {
    intersects_placed_3d(c0, c1, &Placement3D::from(g))
}

pub(crate) fn intersects_placed_3d(c0: &ConvexBody3D, c1: &ConvexBody3D, g: &Placement3D) -> bool {
    if let (Some((a, ra)), Some((b, rb))) = (c0.round(), c1.round()) {
        let b = g.rotation * b + g.translation;
        return (a - b).norm() <= ra + rb + CONTACT_TOL;
    }
    let rt = g.rotation.transpose();
    gjk::within(
        |d| c0.support(d),
        |d| g.rotation * c1.support(&(rt * d)) + g.translation,
        CONTACT_TOL,
    )
}

/// Whether `g·c1 ⊆ c2` (touching the boundary counts as inside).
pub fn contains_3d(c2: &ConvexBody3D, c1: &ConvexBody3D, g: &RigidMotion3D) -> bool {
    contains_placed_3d(c2, c1, &Placement3D::from(g))
}

pub(crate) fn contains_placed_3d(c2: &ConvexBody3D, c1: &ConvexBody3D, g: &Placement3D) -> bool {
    let place = |p: &Vector3<f64>| g.rotation * p + g.translation;
    match c2 {
        ConvexBody3D::Polytope(outer) => {
            let rt = g.rotation.transpose();
            outer
                .normals
                .iter()
                .zip(&outer.faces)
                .all(|(n, t)| n.dot(&(place(&c1.support(&(rt * n))) - outer.vertices[t[0]])) <= CONTACT_TOL)
        }
        ConvexBody3D::Ball { center, radius } => {
            let reach = match c1 {
                ConvexBody3D::Polytope(p) => p
                    .vertices
                    .iter()
                    .map(|v| (place(v) - center).norm())
                    .fold(0.0, f64::max),
                ConvexBody3D::Ball { center: b, radius: rb } => (place(b) - center).norm() + rb,
                ConvexBody3D::Point(b) => (place(b) - center).norm(),
            };
            reach <= radius + CONTACT_TOL
        }
        ConvexBody3D::Point(c) => match c1 {
            ConvexBody3D::Point(p) => (place(p) - c).norm() <= CONTACT_TOL,
            _ => false,
        },
    }
}
