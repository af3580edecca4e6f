use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::gjk;
use super::CONTACT_TOL;
use crate::groups::RigidMotion2D;
use crate::{Error, Result};

/// Perimeter and area of a planar body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals2D {
    pub perimeter: f64,
    pub area: f64,
}

/// A convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vector2<f64>>,
}

impl Polygon {
    /// Validates counterclockwise order, convexity and positive area.
    pub fn new(vertices: Vec<Vector2<f64>>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::invalid(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if let Some(i) = vertices.iter().position(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::invalid(format!("vertex {i} is not finite")));
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let (e0, e1) = (b - a, c - b);
            if e0.norm() <= 1e-12 * scale {
                return Err(Error::invalid(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
            let cross = e0.perp(&e1);
            if cross < -1e-12 * scale * scale {
                return Err(Error::invalid(format!(
                    "polygon is not convex and counterclockwise: reflex vertex {}",
                    (i + 1) % n
                )));
            }
            turning += cross.atan2(e0.dot(&e1));
        }
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::invalid("polygon winds more than once around its interior"));
        }
        let poly = Polygon { vertices };
        if poly.area() <= 1e-12 * scale * scale {
            return Err(Error::invalid("polygon has zero area"));
        }
        Ok(poly)
    }

    /// Regular `n`-gon with the given circumradius, first vertex on the +x axis.
    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        if !(circumradius > 0.0) {
            return Err(Error::invalid("circumradius must be positive"));
        }
        let vertices = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Vector2::new(circumradius * a.cos(), circumradius * a.sin())
            })
            .collect();
        Polygon::new(vertices)
    }

    /// Axis-aligned `w × h` rectangle centered at the origin.
    pub fn rectangle(w: f64, h: f64) -> Result<Self> {
        let (x, y) = (0.5 * w, 0.5 * h);
        Polygon::new(vec![
            Vector2::new(-x, -y),
            Vector2::new(x, -y),
            Vector2::new(x, y),
            Vector2::new(-x, y),
        ])
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.perp(&b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn centroid(&self) -> Vector2<f64> {
        let mut c = Vector2::zeros();
        for (a, b) in self.edges() {
            c += (a + b) * a.perp(&b);
        }
        c / (6.0 * self.area())
    }

    /// Outward unit normals and offsets `(n, h)` with the polygon `{x : n·x ≤ h}`.
    pub fn half_planes(&self) -> Vec<(Vector2<f64>, f64)> {
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                let n = Vector2::new(e.y, -e.x).normalize();
                (n, n.dot(&a))
            })
            .collect()
    }

    fn support(&self, d: &Vector2<f64>) -> Vector2<f64> {
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

/// A closed convex planar body.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody2D {
    Disk { center: Vector2<f64>, radius: f64 },
    Polygon(Polygon),
    /// Degenerate single-point body.
    Point(Vector2<f64>),
}

impl ConvexBody2D {
    pub fn disk(radius: f64) -> Result<Self> {
        ConvexBody2D::disk_at(Vector2::zeros(), radius)
    }

    pub fn disk_at(center: Vector2<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("disk radius must be positive, got {radius}")));
        }
        Ok(ConvexBody2D::Disk { center, radius })
    }

    pub fn polygon(vertices: Vec<Vector2<f64>>) -> Result<Self> {
        Ok(ConvexBody2D::Polygon(Polygon::new(vertices)?))
    }

    pub fn functionals(&self) -> Functionals2D {
        match self {
            ConvexBody2D::Disk { radius, .. } => Functionals2D {
                perimeter: 2.0 * PI * radius,
                area: PI * radius * radius,
            },
            ConvexBody2D::Polygon(p) => Functionals2D {
                perimeter: p.perimeter(),
                area: p.area(),
            },
            ConvexBody2D::Point(_) => Functionals2D {
                perimeter: 0.0,
                area: 0.0,
            },
        }
    }

    /// Center of mass (the center for disks).
    pub fn centroid(&self) -> Vector2<f64> {
        match self {
            ConvexBody2D::Disk { center, .. } => *center,
            ConvexBody2D::Polygon(p) => p.centroid(),
            ConvexBody2D::Point(p) => *p,
        }
    }

    /// Largest distance from the centroid to a point of the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody2D::Disk { radius, .. } => *radius,
            ConvexBody2D::Polygon(p) => {
                let c = p.centroid();
                p.vertices.iter().map(|v| (v - c).norm()).fold(0.0, f64::max)
            }
            ConvexBody2D::Point(_) => 0.0,
        }
    }

    /// Image of the body under `g`.
    pub fn transformed(&self, g: &RigidMotion2D) -> Self {
        match self {
            ConvexBody2D::Disk { center, radius } => ConvexBody2D::Disk {
                center: g.apply(center),
                radius: *radius,
            },
            ConvexBody2D::Polygon(p) => ConvexBody2D::Polygon(Polygon {
                vertices: p.vertices.iter().map(|v| g.apply(v)).collect(),
            }),
            ConvexBody2D::Point(p) => ConvexBody2D::Point(g.apply(p)),
        }
    }

    /// Support point in direction `d`.
    pub fn support(&self, d: &Vector2<f64>) -> Vector2<f64> {
        match self {
            ConvexBody2D::Disk { center, radius } => {
                let n = d.norm();
                if n > 0.0 {
                    center + d * (radius / n)
                } else {
                    *center
                }
            }
            ConvexBody2D::Polygon(p) => p.support(d),
            ConvexBody2D::Point(p) => *p,
        }
    }

    /// `(center, radius)` for disks and points.
    fn round(&self) -> Option<(Vector2<f64>, f64)> {
        match self {
            ConvexBody2D::Disk { center, radius } => Some((*center, *radius)),
            ConvexBody2D::Point(p) => Some((*p, 0.0)),
            ConvexBody2D::Polygon(_) => None,
        }
    }
}

/// A rigid motion of the plane in matrix form, for repeated application.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Placement2D {
    pub rotation: Matrix2<f64>,
    pub translation: Vector2<f64>,
}

impl From<&RigidMotion2D> for Placement2D {
    fn from(g: &RigidMotion2D) -> Self {
        Placement2D {
            rotation: g.rotation(),
            translation: g.translation(),
        }
    }
}

/// Whether `c0 ∩ g·c1 ≠ ∅` (touching counts).
pub fn intersects_2d(c0: &ConvexBody2D, c1: &ConvexBody2D, g: &RigidMotion2D) -> bool {
    intersects_placed_2d(c0, c1, &Placement2D::from(g))
}

pub(crate) fn intersects_placed_2d(c0: &ConvexBody2D, c1: &ConvexBody2D, g: &Placement2D) -> bool {
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
pub fn contains_2d(c2: &ConvexBody2D, c1: &ConvexBody2D, g: &RigidMotion2D) -> bool {
    contains_placed_2d(c2, c1, &Placement2D::from(g))
}

pub(crate) fn contains_placed_2d(c2: &ConvexBody2D, c1: &ConvexBody2D, g: &Placement2D) -> bool {
    let place = |p: &Vector2<f64>| g.rotation * p + g.translation;
    match c2 {
        ConvexBody2D::Polygon(outer) => {
            let rt = g.rotation.transpose();
            outer.edges().all(|(a, b)| {
                let e = b - a;
                let n = Vector2::new(e.y, -e.x).normalize();
                n.dot(&(place(&c1.support(&(rt * n))) - a)) <= CONTACT_TOL
            })
        }
        ConvexBody2D::Disk { center, radius } => {
            let reach = match c1 {
                ConvexBody2D::Polygon(p) => p
                    .vertices
                    .iter()
                    .map(|v| (place(v) - center).norm())
                    .fold(0.0, f64::max),
                ConvexBody2D::Disk { center: b, radius: rb } => (place(b) - center).norm() + rb,
                ConvexBody2D::Point(b) => (place(b) - center).norm(),
            };
            reach <= radius + CONTACT_TOL
        }
        ConvexBody2D::Point(c) => match c1 {
            ConvexBody2D::Point(p) => (place(p) - c).norm() <= CONTACT_TOL,
            _ => false,
        },
    }
}
