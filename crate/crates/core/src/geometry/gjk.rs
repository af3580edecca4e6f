//! Gilbert–Johnson–Keerthi distance between convex sets given by support maps.

use nalgebra::{DMatrix, DVector, SVector};

const MAX_ITERATIONS: usize = 64;

/// Closest point to the origin on the convex hull of `simplex`, and the
/// smallest sub-simplex whose hull contains it.
fn closest_on_simplex<const D: usize>(simplex: &[SVector<f64, D>]) -> (SVector<f64, D>, Vec<SVector<f64, D>>) {
    let m = simplex.len();
    let mut best: Option<(f64, SVector<f64, D>, Vec<SVector<f64, D>>)> = None;
    for mask in 1u32..(1 << m) {
        let pts: Vec<SVector<f64, D>> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| simplex[i]).collect();
        let Some((point, lambdas)) = affine_closest(&pts) else {
            continue;
        };
        if lambdas.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let d = point.norm_squared();
        let better = match &best {
            None => true,
            Some((bd, _, bp)) => d < bd - 1e-15 * bd.max(1e-300) || (d <= *bd && pts.len() < bp.len()),
        };
        if better {
            let kept = pts
                .iter()
                .zip(&lambdas)
                .filter(|(_, &l)| l > 1e-12)
                .map(|(p, _)| *p)
                .collect::<Vec<_>>();
            let kept = if kept.is_empty() { pts } else { kept };
            best = Some((d, point, kept));
        }
    }
    let (_, point, kept) = best.expect("a single vertex is always a candidate");
    (point, kept)
}

/// Point of the affine hull of `pts` nearest the origin, with barycentric weights.
fn affine_closest<const D: usize>(pts: &[SVector<f64, D>]) -> Option<(SVector<f64, D>, Vec<f64>)> {
    let p0 = pts[0];
    if pts.len() == 1 {
        return Some((p0, vec![1.0]));
    }
    let k = pts.len() - 1;
    let e: Vec<SVector<f64, D>> = pts[1..].iter().map(|p| p - p0).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| e[i].dot(&e[j]));
    let rhs = DVector::from_fn(k, |i, _| -p0.dot(&e[i]));
    let scale = gram.diagonal().max();
    if gram.determinant().abs() <= 1e-14 * scale.powi(k as i32) {
        return None;
    }
    let mu = gram.lu().solve(&rhs)?;
    let mut point = p0;
    for (i, ei) in e.iter().enumerate() {
        point += ei * mu[i];
    }
    let mut lambdas = vec![1.0 - mu.sum()];
    lambdas.extend(mu.iter());
    Some((point, lambdas))
}

/// Whether `A` and `B` are within `tol` of each other.
///
/// `support_a(d)` / `support_b(d)` return a point of the set maximizing `d · x`.
pub(crate) fn within<const D: usize>(
    support_a: impl Fn(&SVector<f64, D>) -> SVector<f64, D>,
    support_b: impl Fn(&SVector<f64, D>) -> SVector<f64, D>,
    tol: f64,
) -> bool {
    distance_bound(support_a, support_b, tol) <= tol
}

/// Distance between `A` and `B`; once the sets are known to be farther apart
/// than `early_exit`, a lower bound above it is returned instead.
pub(crate) fn distance_bound<const D: usize>(
    support_a: impl Fn(&SVector<f64, D>) -> SVector<f64, D>,
    support_b: impl Fn(&SVector<f64, D>) -> SVector<f64, D>,
    early_exit: f64,
) -> f64 {
    let minkowski = |d: &SVector<f64, D>| support_a(d) - support_b(&-d);
    let mut v = minkowski(&SVector::<f64, D>::from_fn(|i, _| if i == 0 { 1.0 } else { 0.0 }));
    let mut simplex = vec![v];
    for _ in 0..MAX_ITERATIONS {
        let vn = v.norm();
        if vn <= 1e-12 {
            return 0.0;
        }
        let w = minkowski(&-v);
        let lower = v.dot(&w) / vn;
        if lower > early_exit {
            return lower;
        }
        if vn * vn - v.dot(&w) <= 1e-12 * vn * vn + 1e-24 {
            return vn;
        }
        if simplex.iter().any(|p| (p - w).norm_squared() <= 1e-24 * (1.0 + w.norm_squared())) {
            return vn;
        }
        simplex.push(w);
        let (closest, kept) = closest_on_simplex(&simplex);
        simplex = kept;
        if simplex.len() == D + 1 {
            return 0.0;
        }
        v = closest;
    }
    v.norm()
}
