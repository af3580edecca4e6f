use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::groups::{sample_spatial_rotation, RigidMotion2D, RigidMotion3D};
use crate::rng::stream;

fn random_polygon(rng: &mut ChaCha8Rng) -> Polygon {
    loop {
        let n = rng.random_range(3..10);
        let (a, b) = (rng.random_range(0.3..2.0), rng.random_range(0.3..2.0));
        let c = Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let vs = angles.iter().map(|t| c + Vector2::new(a * t.cos(), b * t.sin())).collect();
        if let Ok(p) = Polygon::new(vs) {
            if p.area() > 0.05 {
                return p;
            }
        }
    }
}

fn random_motion_2d(rng: &mut ChaCha8Rng, spread: f64) -> RigidMotion2D {
    RigidMotion2D::new(
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
        rng.random_range(-PI..PI),
    )
}

fn random_motion_3d(rng: &mut ChaCha8Rng, spread: f64) -> RigidMotion3D {
    let t = Vector3::from_fn(|_, _| rng.random_range(-spread..spread));
    RigidMotion3D::new(sample_spatial_rotation(rng), t).unwrap()
}

fn projection<const D: usize>(pts: &[nalgebra::SVector<f64, D>], n: &nalgebra::SVector<f64, D>) -> (f64, f64) {
    pts.iter().map(|p| p.dot(n)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Separating-axis oracle: `Some(gap)` with the largest projected gap over all
/// candidate axes (negative when overlapping).
fn sat_gap<const D: usize>(a: &[nalgebra::SVector<f64, D>], b: &[nalgebra::SVector<f64, D>], axes: &[nalgebra::SVector<f64, D>]) -> f64 {
    axes.iter()
        .filter(|n| n.norm() > 1e-9)
        .map(|n| {
            let n = n.normalize();
            let (alo, ahi) = projection(a, &n);
            let (blo, bhi) = projection(b, &n);
            (blo - ahi).max(alo - bhi)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn planar_functionals() {
    let f = ConvexBody2D::disk(1.0).unwrap().functionals();
    assert!((f.perimeter - 2.0 * PI).abs() < 1e-15 && (f.area - PI).abs() < 1e-15);
    let sq = Polygon::rectangle(1.0, 1.0).unwrap();
    assert!((sq.perimeter() - 4.0).abs() < 1e-15 && (sq.area() - 1.0).abs() < 1e-15);
    let pt = ConvexBody2D::Point(Vector2::zeros()).functionals();
    assert_eq!((pt.perimeter, pt.area), (0.0, 0.0));
}

#[test]
fn polygon_area_matches_rejection_sampling() {
    let mut rng = stream(21, 0);
    for _ in 0..5 {
        let p = random_polygon(&mut rng);
        let (lo, hi) = p.vertices().iter().fold(
            (Vector2::repeat(f64::INFINITY), Vector2::repeat(f64::NEG_INFINITY)),
            |(lo, hi), v| (lo.inf(v), hi.sup(v)),
        );
        let box_area = (hi.x - lo.x) * (hi.y - lo.y);
        let n = 100_000;
        let planes = p.half_planes();
        let hits = (0..n)
            .filter(|_| {
                let x = Vector2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
                planes.iter().all(|(nrm, h)| nrm.dot(&x) <= *h)
            })
            .count() as f64;
        let frac = hits / n as f64;
        let se = box_area * (frac * (1.0 - frac) / n as f64).sqrt();
        assert!((box_area * frac - p.area()).abs() < 3.0 * se, "{} vs {}", box_area * frac, p.area());
    }
}

#[test]
fn isoperimetric_inequality() {
    let mut rng = stream(22, 0);
    for _ in 0..200 {
        let f = ConvexBody2D::Polygon(random_polygon(&mut rng)).functionals();
        assert!(f.perimeter * f.perimeter >= 4.0 * PI * f.area);
    }
}

#[test]
fn spatial_functionals() {
    let r = 1.7;
    let b = ConvexBody3D::ball(r).unwrap().functionals();
    assert!((b.mean_curvature - 4.0 * PI * r).abs() < 1e-14);
    assert!((b.volume - 4.0 * PI * r.powi(3) / 3.0).abs() < 1e-14);
    let c = ConvexBody3D::Polytope(Polytope::cube(1.0).unwrap()).functionals();
    assert!((c.volume - 1.0).abs() < 1e-14);
    assert!((c.area - 6.0).abs() < 1e-14);
    assert!((c.mean_curvature - 3.0 * PI).abs() < 1e-14);
    let p = ConvexBody3D::Point(Vector3::zeros()).functionals();
    assert_eq!((p.volume, p.area, p.mean_curvature), (0.0, 0.0, 0.0));
}

#[test]
fn mean_curvature_scales_linearly() {
    for s in [0.1, 0.5, 2.0, 7.5] {
        let m = Polytope::cube(s).unwrap().mean_curvature();
        assert!((m - 3.0 * PI * s).abs() < 1e-12 * s);
    }
}

#[test]
fn regular_solids_match_dihedral_angle_formula() {
    // M = ½ · (edge count) · a · (π − interior dihedral angle)
    let t = Polytope::tetrahedron(1.0).unwrap();
    let a = 2.0 * 2f64.sqrt();
    let expected = 0.5 * 6.0 * a * (PI - (1.0f64 / 3.0).acos());
    assert!((t.mean_curvature() - expected).abs() < 1e-12);
    assert!((t.volume() - a.powi(3) / (6.0 * 2f64.sqrt())).abs() < 1e-12);
    let o = Polytope::octahedron(1.0).unwrap();
    let a = 2f64.sqrt();
    let expected = 0.5 * 12.0 * a * (PI - (-1.0f64 / 3.0).acos());
    assert!((o.mean_curvature() - expected).abs() < 1e-12);
    assert!((o.area() - 2.0 * 3f64.sqrt() * a * a).abs() < 1e-12);
}

#[test]
fn functionals_are_rigid_invariants() {
    let mut rng = stream(23, 0);
    let poly = ConvexBody2D::Polygon(random_polygon(&mut rng));
    let box3 = ConvexBody3D::Polytope(Polytope::cuboid(1.0, 2.0, 0.5).unwrap());
    let (f2, f3) = (poly.functionals(), box3.functionals());
    for _ in 0..100 {
        let g2 = poly.transformed(&random_motion_2d(&mut rng, 5.0)).functionals();
        assert!((g2.area - f2.area).abs() < 1e-9 && (g2.perimeter - f2.perimeter).abs() < 1e-9);
        let g3 = box3.transformed(&random_motion_3d(&mut rng, 5.0)).functionals();
        assert!((g3.volume - f3.volume).abs() < 1e-9);
        assert!((g3.area - f3.area).abs() < 1e-9);
        assert!((g3.mean_curvature - f3.mean_curvature).abs() < 1e-9);
    }
}

#[test]
fn disk_intersection_examples() {
    let d = ConvexBody2D::disk(1.0).unwrap();
    let d2 = ConvexBody2D::disk(0.5).unwrap();
    assert!(intersects_2d(&d, &d, &RigidMotion2D::identity()));
    assert!(!intersects_2d(&d, &d2, &RigidMotion2D::new(1.5 + 1e-6, 0.0, 0.3)));
    assert!(intersects_2d(&d, &d2, &RigidMotion2D::new(1.5, 0.0, 0.3)));
}

#[test]
fn polygon_intersection_agrees_with_separating_axes() {
    let mut rng = stream(24, 0);
    let mut checked = 0;
    while checked < 500 {
        let (p, q) = (random_polygon(&mut rng), random_polygon(&mut rng));
        let g = random_motion_2d(&mut rng, 2.5);
        let qv: Vec<Vector2<f64>> = q.vertices().iter().map(|v| g.apply(v)).collect();
        let gq = Polygon::new(qv.clone()).unwrap();
        let axes: Vec<Vector2<f64>> = p
            .half_planes()
            .iter()
            .chain(gq.half_planes().iter())
            .map(|(n, _)| *n)
            .collect();
        let gap = sat_gap(p.vertices(), &qv, &axes);
        if gap.abs() < 1e-7 {
            continue;
        }
        let ours = intersects_2d(&ConvexBody2D::Polygon(p), &ConvexBody2D::Polygon(q), &g);
        assert_eq!(ours, gap < 0.0, "gap {gap}");
        checked += 1;
    }
}

#[test]
fn polytope_intersection_agrees_with_separating_axes() {
    let mut rng = stream(25, 0);
    let a = Polytope::cuboid(1.0, 0.6, 1.4).unwrap();
    let b = Polytope::tetrahedron(0.5).unwrap();
    let mut agree = 0;
    for _ in 0..500 {
        let g = random_motion_3d(&mut rng, 1.5);
        let ConvexBody3D::Polytope(gb) = ConvexBody3D::Polytope(b.clone()).transformed(&g) else {
            unreachable!()
        };
        let mut axes: Vec<Vector3<f64>> =
            a.half_spaces().iter().chain(gb.half_spaces().iter()).map(|(n, _)| *n).collect();
        let edges = |p: &Polytope| -> Vec<Vector3<f64>> {
            p.faces()
                .iter()
                .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
                .map(|(i, j)| p.vertices()[j] - p.vertices()[i])
                .collect()
        };
        for ea in edges(&a) {
            for eb in edges(&gb) {
                axes.push(ea.cross(&eb));
            }
        }
        let gap = sat_gap(a.vertices(), gb.vertices(), &axes);
        if gap.abs() < 1e-7 {
            continue;
        }
        let ours = intersects_3d(&ConvexBody3D::Polytope(a.clone()), &ConvexBody3D::Polytope(b.clone()), &g);
        assert_eq!(ours, gap < 0.0, "gap {gap}");
        agree += 1;
    }
    assert!(agree > 450);
}

#[test]
fn intersection_is_symmetric_under_inversion() {
    let mut rng = stream(26, 0);
    let c = ConvexBody3D::Polytope(Polytope::cube(1.0).unwrap());
    let b = ConvexBody3D::ball(0.4).unwrap();
    for _ in 0..300 {
        let p = ConvexBody2D::Polygon(random_polygon(&mut rng));
        let d = ConvexBody2D::disk(0.7).unwrap();
        let g = random_motion_2d(&mut rng, 2.5);
        assert_eq!(intersects_2d(&p, &d, &g), intersects_2d(&d, &p, &g.inverse()));
        let h = random_motion_3d(&mut rng, 1.5);
        assert_eq!(intersects_3d(&c, &b, &h), intersects_3d(&b, &c, &h.inverse()));
    }
}

#[test]
fn containment_examples() {
    let d = ConvexBody2D::disk(1.0).unwrap();
    assert!(contains_2d(&d, &d, &RigidMotion2D::identity()));
    let p = ConvexBody2D::Polygon(Polygon::regular(5, 1.0).unwrap());
    assert!(contains_2d(&p, &p, &RigidMotion2D::identity()));
    let c = ConvexBody3D::Polytope(Polytope::cube(1.0).unwrap());
    assert!(contains_3d(&c, &c, &RigidMotion3D::identity()));
    let (r, big_r, eps) = (0.5, 2.0, 1e-6);
    let small = ConvexBody2D::disk(r).unwrap();
    let big = ConvexBody2D::disk(big_r).unwrap();
    assert!(contains_2d(&big, &small, &RigidMotion2D::new(big_r - r, 0.0, 1.0)));
    assert!(!contains_2d(&big, &small, &RigidMotion2D::new(big_r - r + eps, 0.0, 1.0)));
    let ball = ConvexBody3D::ball(3.0).unwrap();
    assert!(contains_3d(&ball, &c, &RigidMotion3D::identity()));
    assert!(!contains_3d(&c, &ball, &RigidMotion3D::identity()));
}

#[test]
fn containment_matches_boundary_sampling() {
    let mut rng = stream(27, 0);
    let mut decided = 0;
    for _ in 0..400 {
        let inner = random_polygon(&mut rng);
        let c = inner.centroid();
        let scale = rng.random_range(1.2..2.5);
        let outer = Polygon::new(inner.vertices().iter().map(|v| c + (v - c) * scale).collect()).unwrap();
        let g = random_motion_2d(&mut rng, 0.8);
        // rotate about the centroid, then shift a little
        let rc = g.rotation() * c;
        let g = RigidMotion2D::new(g.x + c.x - rc.x, g.y + c.y - rc.y, g.theta);
        let planes = outer.half_planes();
        let placed: Vec<Vector2<f64>> = inner.vertices().iter().map(|v| g.apply(v)).collect();
        let mut margin = f64::INFINITY;
        let mut inside = true;
        for k in 0..placed.len() {
            let (a, b) = (placed[k], placed[(k + 1) % placed.len()]);
            for s in 0..=50 {
                let x = a + (b - a) * (s as f64 / 50.0);
                let worst = planes.iter().map(|(n, h)| n.dot(&x) - h).fold(f64::NEG_INFINITY, f64::max);
                inside &= worst <= 0.0;
                margin = margin.min(worst.abs());
            }
        }
        if margin < 1e-7 {
            continue;
        }
        let ours = contains_2d(&ConvexBody2D::Polygon(outer.clone()), &ConvexBody2D::Polygon(inner.clone()), &g);
        assert_eq!(ours, inside);
        if ours {
            assert!(intersects_2d(&ConvexBody2D::Polygon(outer), &ConvexBody2D::Polygon(inner), &g));
        }
        decided += 1;
    }
    assert!(decided > 300);
}

#[test]
fn containment_implies_intersection() {
    let mut rng = stream(28, 0);
    let outer = ConvexBody3D::Polytope(Polytope::cuboid(3.0, 2.5, 2.0).unwrap());
    let inner = ConvexBody3D::Polytope(Polytope::octahedron(0.6).unwrap());
    let ball = ConvexBody3D::ball(0.5).unwrap();
    let mut contained = 0;
    for _ in 0..500 {
        let g = random_motion_3d(&mut rng, 1.2);
        for body in [&inner, &ball] {
            if contains_3d(&outer, body, &g) {
                contained += 1;
                assert!(intersects_3d(&outer, body, &g));
            }
        }
    }
    assert!(contained > 50);
}

#[test]
fn circumradius_examples() {
    assert_eq!(ConvexBody2D::disk(2.5).unwrap().circumradius(), 2.5);
    let c = ConvexBody3D::Polytope(Polytope::cube(1.0).unwrap());
    assert!((c.circumradius() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    let mut rng = stream(29, 0);
    for _ in 0..100 {
        let p = random_polygon(&mut rng);
        let centroid = p.centroid();
        let direct = p.vertices().iter().map(|v| (v - centroid).norm()).fold(0.0, f64::max);
        assert!(ConvexBody2D::Polygon(p).circumradius() >= direct - 1e-9);
    }
}

#[test]
fn polytope_validation() {
    let cube = Polytope::cube(1.0).unwrap();
    let v = cube.vertices().to_vec();
    let faces: Vec<Vec<usize>> = cube.faces().iter().map(|f| f.to_vec()).collect();
    let err = Polytope::new(v.clone(), &faces[1..]).unwrap_err().to_string();
    assert!(err.contains("watertight"), "{err}");
    let flipped: Vec<Vec<usize>> = faces.iter().map(|f| vec![f[0], f[2], f[1]]).collect();
    assert!(Polytope::new(v.clone(), &flipped).is_err());
    let mut dented = v.clone();
    dented[7] *= 0.2;
    let err = Polytope::new(dented, &faces).unwrap_err().to_string();
    assert!(err.contains("not convex"), "{err}");
}

#[test]
fn polygon_validation_names_reflex_vertex() {
    let vs = vec![
        Vector2::new(0.0, 0.0),
        Vector2::new(2.0, 0.0),
        Vector2::new(1.0, 0.5),
        Vector2::new(2.0, 2.0),
        Vector2::new(0.0, 2.0),
    ];
    let err = Polygon::new(vs).unwrap_err().to_string();
    assert!(err.contains("reflex vertex 2"), "{err}");
    let cw = vec![Vector2::new(0.0, 0.0), Vector2::new(0.0, 1.0), Vector2::new(1.0, 0.0)];
    assert!(Polygon::new(cw).is_err());
    assert!(ConvexBody2D::disk(0.0).is_err());
}

#[test]
fn geometry_json() {
    let d = Body::from_json_str(r#"{"dim":2,"kind":"disk","radius":1.0}"#).unwrap();
    assert_eq!(d, Body::Planar(ConvexBody2D::disk(1.0).unwrap()));
    let err = Body::from_json_str(
        r#"{"dim":2,"kind":"polygon","vertices":[[0,0],[2,0],[1,0.5],[2,2],[0,2]]}"#,
    )
    .unwrap_err();
    assert!(matches!(&err, Error::Schema { field, message } if field == "vertices" && message.contains("reflex vertex 2")), "{err}");
    let err = Body::from_json_str("{\"dim\":2,\n\"kind\":\"disk\",\n\"radius\":1.0,\n\"colour\":1}").unwrap_err();
    assert!(err.to_string().contains("line 4"), "{err}");
    let err = Body::from_json_str(r#"{"dim":3,"kind":"ball"}"#).unwrap_err();
    assert!(matches!(&err, Error::Schema { field, .. } if field == "radius"), "{err}");
    let err = Body::from_json_str(r#"{"dim":4,"kind":"ball","radius":1}"#).unwrap_err();
    assert!(matches!(&err, Error::Schema { field, .. } if field == "dim"), "{err}");
    let cube = Body::from_json_str(
        r#"{"dim":3,"kind":"polytope",
            "vertices":[[0,0,0],[1,0,0],[0,1,0],[1,1,0],[0,0,1],[1,0,1],[0,1,1],[1,1,1]],
            "faces":[[0,2,3,1],[4,5,7,6],[0,1,5,4],[2,6,7,3],[0,4,6,2],[1,3,7,5]]}"#,
    )
    .unwrap();
    let BodyFunctionals::Spatial(f) = cube.functionals() else { panic!() };
    assert!((f.volume - 1.0).abs() < 1e-14 && (f.area - 6.0).abs() < 1e-14);
    assert!((f.mean_curvature - 3.0 * PI).abs() < 1e-14);
    for b in [d, cube, Body::Spatial(ConvexBody3D::ball_at(Vector3::new(1.0, 0.0, 0.0), 2.0).unwrap())] {
        let back: Body = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
    }
}

#[test]
fn body_dispatch_checks_dimensions() {
    let d = Body::Planar(ConvexBody2D::disk(1.0).unwrap());
    let b = Body::Spatial(ConvexBody3D::ball(1.0).unwrap());
    let g2 = RigidMotion::identity(2).unwrap();
    assert!(intersects(&d, &d, &g2).unwrap());
    assert!(matches!(intersects(&d, &b, &g2), Err(Error::DimensionMismatch(2, 3))));
    assert!(contains(&b, &b, &g2).is_err());
}
