//! Principal kinematic and containment formulas, Monte Carlo motion volumes
//! and the parts entropy of a body moving among an obstacle inside a container.

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    contains_placed_2d, contains_placed_3d, intersects_placed_2d, intersects_placed_3d, Body, ConvexBody2D,
    ConvexBody3D, Placement2D, Placement3D,
};
use crate::groups::{sample_motion, HaarDomain, RigidMotion};
use crate::numeric::Z95;
use crate::{rng, Error, Result};

/// Smallest sample count accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: usize = 1000;

/// Below this many hits (or misses) the normal interval is replaced by Wilson's.
const WILSON_THRESHOLD: u64 = 30;

/// `2π[A(C0) + A(C1)] + L(C0) L(C1)`: volume of planar motions of `c1` touching `c0`.
pub fn pkf_2d(c0: &ConvexBody2D, c1: &ConvexBody2D) -> f64 {
    let (a, b) = (c0.functionals(), c1.functionals());
    2.0 * PI * (a.area + b.area) + a.perimeter * b.perimeter
}

/// `8π²[V0 + V1] + 2π[A0 M1 + A1 M0]`: volume of spatial motions of `c1` touching `c0`.
pub fn pkf_3d(c0: &ConvexBody3D, c1: &ConvexBody3D) -> f64 {
    let (a, b) = (c0.functionals(), c1.functionals());
    8.0 * PI * PI * (a.volume + b.volume) + 2.0 * PI * (a.area * b.mean_curvature + b.area * a.mean_curvature)
}

pub fn pkf(c0: &Body, c1: &Body) -> Result<f64> {
    match (c0, c1) {
        (Body::Planar(a), Body::Planar(b)) => Ok(pkf_2d(a, b)),
        (Body::Spatial(a), Body::Spatial(b)) => Ok(pkf_3d(a, b)),
        _ => Err(Error::DimensionMismatch(c0.dim(), c1.dim())),
    }
}

/// A containment-formula value with a flag for when it cannot be a motion volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentFormula {
    pub formula_value: f64,
    pub warning: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<String>,
}

impl ContainmentFormula {
    fn new(formula_value: f64) -> Self {
        let mut f = ContainmentFormula {
            formula_value,
            warning: false,
            reasons: Vec::new(),
        };
        if formula_value < 0.0 {
            f.flag(format!("formula value {formula_value} is negative, so it is not a motion volume"));
        }
        f
    }

    fn flag(&mut self, reason: String) {
        self.warning = true;
        self.reasons.push(reason);
    }

    /// Also flag the value if it is more than 5 standard errors from `estimate`.
    pub fn check_against(mut self, estimate: &MotionVolumeEstimate) -> Self {
        let gap = (self.formula_value - estimate.value).abs();
        if gap > 5.0 * estimate.std_error {
            self.flag(format!(
                "formula value {} is {:.1} standard errors from the Monte Carlo estimate {}",
                self.formula_value,
                gap / estimate.std_error.max(f64::MIN_POSITIVE),
                estimate.value
            ));
        }
        self
    }
}

/// `2π[A(C1) + A(C2)] − L(C1) L(C2)` for `c1` moving inside `c2`.
pub fn containment_2d(c1: &ConvexBody2D, c2: &ConvexBody2D) -> ContainmentFormula {
    let (a, b) = (c1.functionals(), c2.functionals());
    ContainmentFormula::new(2.0 * PI * (a.area + b.area) - a.perimeter * b.perimeter)
}

/// `8π²[V1 + V2] − 2π[A1 M2 + A2 M1]` for `c1` moving inside `c2`, reported as written.
///
/// For balls this is negative (for example `-256π³/3` for radii 1 and 3) while
/// the true free-motion volume is `8π² · 4π(R − r)³/3`; the warning flag marks
/// such values.
pub fn containment_3d(c1: &ConvexBody3D, c2: &ConvexBody3D) -> ContainmentFormula {
    let (a, b) = (c1.functionals(), c2.functionals());
    ContainmentFormula::new(
        8.0 * PI * PI * (a.volume + b.volume) - 2.0 * PI * (a.area * b.mean_curvature + b.area * a.mean_curvature),
    )
}

/// Containment formula for `c1` inside container `c2`.
pub fn containment(c1: &Body, c2: &Body) -> Result<ContainmentFormula> {
    match (c1, c2) {
        (Body::Planar(a), Body::Planar(b)) => Ok(containment_2d(a, b)),
        (Body::Spatial(a), Body::Spatial(b)) => Ok(containment_3d(a, b)),
        _ => Err(Error::DimensionMismatch(c1.dim(), c2.dim())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionVolumeMode {
    /// Motions of `b` that touch the fixed body `a`.
    Collision,
    /// Motions of `a` that keep it inside the container `b`.
    Containment,
}

/// Monte Carlo estimate of a motion volume with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionVolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub hit_count: u64,
    /// Haar volume of the sampled motion set.
    pub sampling_volume: f64,
}

impl MotionVolumeEstimate {
    pub fn from_counts(hits: u64, n: usize, seed: u64, sampling_volume: f64) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let se = (p * (1.0 - p) / nf).sqrt();
        let misses = n as u64 - hits;
        let (lo, hi) = if hits < WILSON_THRESHOLD || misses < WILSON_THRESHOLD {
            wilson(p, nf)
        } else {
            (p - Z95 * se, p + Z95 * se)
        };
        MotionVolumeEstimate {
            value: sampling_volume * p,
            std_error: sampling_volume * se,
            ci_low: sampling_volume * lo.clamp(0.0, p),
            ci_high: sampling_volume * hi.clamp(p, 1.0),
            n_samples: n,
            seed,
            hit_count: hits,
            sampling_volume,
        }
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Wilson score interval for a binomial proportion.
fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center - half, center + half)
}

/// Haar-uniform motions of a moving body whose reference point lands uniformly
/// in a cube of half-width `half_width` about `center`.
struct MotionSampler {
    domain: HaarDomain,
    center: Vec<f64>,
    moving_ref: Vec<f64>,
}

impl MotionSampler {
    fn new(dim: usize, center: Vec<f64>, moving_ref: Vec<f64>, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid(format!(
                "sampling box has zero volume (half-width {half_width})"
            )));
        }
        let domain = if dim == 2 {
            HaarDomain::se2([-half_width; 2], [half_width; 2])?
        } else {
            HaarDomain::se3([-half_width; 3], [half_width; 3])?
        };
        Ok(MotionSampler {
            domain,
            center,
            moving_ref,
        })
    }

    fn volume(&self) -> f64 {
        crate::groups::haar_volume(&self.domain)
    }

    /// Count draws, out of `n`, for which `hit` is true; sharded so the count
    /// does not depend on the thread count.
    fn count<H>(&self, n: usize, seed: u64, hit: H) -> Vec<u64>
    where
        H: Fn(&Sample) -> Vec<bool> + Sync,
    {
        let parts: Vec<Vec<u64>> = rng::shards(n)
            .into_par_iter()
            .map(|(shard, len)| {
                let mut r = rng::stream(seed, shard);
                let mut counts: Vec<u64> = Vec::new();
                for _ in 0..len {
                    let s = self.draw(&mut r);
                    let flags = hit(&s);
                    counts.resize(flags.len(), 0);
                    for (c, f) in counts.iter_mut().zip(flags) {
                        *c += f as u64;
                    }
                }
                counts
            })
            .collect();
        let width = parts.iter().map(Vec::len).max().unwrap_or(0);
        (0..width)
            .map(|k| parts.iter().map(|p| p.get(k).copied().unwrap_or(0)).sum())
            .collect()
    }

    fn draw(&self, r: &mut impl rand::Rng) -> Sample {
        match sample_motion(&self.domain, r) {
            RigidMotion::Planar(g) => {
                let rot = g.rotation();
                let c = Vector2::new(self.center[0], self.center[1]);
                let m = Vector2::new(self.moving_ref[0], self.moving_ref[1]);
                Sample::Planar(Placement2D {
                    rotation: rot,
                    translation: g.translation() + c - rot * m,
                })
            }
            RigidMotion::Spatial(g) => {
                let rot = *g.rotation();
                let c = Vector3::from_column_slice(&self.center);
                let m = Vector3::from_column_slice(&self.moving_ref);
                Sample::Spatial(Placement3D {
                    rotation: rot,
                    translation: g.translation() + c - rot * m,
                })
            }
        }
    }
}

enum Sample {
    Planar(Placement2D),
    Spatial(Placement3D),
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

/// Monte Carlo motion volume.
///
/// `Collision`: `a` is fixed, `b` moves; counts motions with `a ∩ g·b ≠ ∅`.
/// `Containment`: `a` moves inside the container `b`; counts `g·a ⊆ b`.
pub fn mc_motion_volume(
    mode: MotionVolumeMode,
    a: &Body,
    b: &Body,
    n_samples: usize,
    seed: u64,
) -> Result<MotionVolumeEstimate> {
    check_samples(n_samples)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (fixed, moving, half_width) = match mode {
        MotionVolumeMode::Collision => (a, b, a.circumradius() + b.circumradius()),
        MotionVolumeMode::Containment => (b, a, b.circumradius()),
    };
    let sampler = MotionSampler::new(a.dim(), fixed.centroid(), moving.centroid(), half_width)?;
    let counts = sampler.count(n_samples, seed, |s| {
        vec![match (s, fixed, moving, mode) {
            (Sample::Planar(g), Body::Planar(f), Body::Planar(m), MotionVolumeMode::Collision) => {
                intersects_placed_2d(f, m, g)
            }
            (Sample::Planar(g), Body::Planar(f), Body::Planar(m), MotionVolumeMode::Containment) => {
                contains_placed_2d(f, m, g)
            }
            (Sample::Spatial(g), Body::Spatial(f), Body::Spatial(m), MotionVolumeMode::Collision) => {
                intersects_placed_3d(f, m, g)
            }
            (Sample::Spatial(g), Body::Spatial(f), Body::Spatial(m), MotionVolumeMode::Containment) => {
                contains_placed_3d(f, m, g)
            }
            _ => unreachable!("dimensions checked"),
        }]
    });
    Ok(MotionVolumeEstimate::from_counts(
        counts.first().copied().unwrap_or(0),
        n_samples,
        seed,
        sampler.volume(),
    ))
}

/// One row of a Monte Carlo convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub estimate: f64,
    pub se: f64,
}

pub fn convergence_table(
    mode: MotionVolumeMode,
    a: &Body,
    b: &Body,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    sizes
        .iter()
        .map(|&n| {
            let e = mc_motion_volume(mode, a, b, n, seed)?;
            Ok(ConvergenceRow {
                n,
                estimate: e.value,
                se: e.std_error,
            })
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,estimate,se\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n, r.estimate, r.se));
    }
    out
}

/// How to evaluate the parts entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PartsEntropyMethod {
    /// `ln(𝓥 − 𝓘)` from the closed forms. Only valid when the part can reach
    /// every position around the obstacle (no jamming); choosing this asserts it.
    AnalyticNoJamming,
    /// Joint estimator: motions of the part that stay inside the container and
    /// do not touch the obstacle.
    MonteCarlo { n_samples: usize, seed: u64 },
}

/// Entropy of the free motions of a part, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartsEntropy {
    pub value: f64,
    pub method: PartsEntropyMethod,
    pub free_volume: f64,
    /// `𝓥(C1, C2)` (formula value, or the Monte Carlo containment estimate).
    pub containment_volume: f64,
    /// `𝓘(C0, C1)` (formula value), or the estimated volume of contained motions touching the obstacle.
    pub collision_volume: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_volume_estimate: Option<MotionVolumeEstimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Parts entropy `ln(𝓥(C1, C2) − 𝓘(C0, C1))` of `part` in `container` around an optional fixed `obstacle`.
pub fn parts_entropy_obstacle(
    part: &Body,
    container: &Body,
    obstacle: Option<&Body>,
    method: PartsEntropyMethod,
) -> Result<PartsEntropy> {
    if part.dim() != container.dim() {
        return Err(Error::DimensionMismatch(part.dim(), container.dim()));
    }
    if let Some(o) = obstacle {
        if o.dim() != part.dim() {
            return Err(Error::DimensionMismatch(o.dim(), part.dim()));
        }
    }
    match method {
        PartsEntropyMethod::AnalyticNoJamming => {
            let v = containment(part, container)?;
            let i = obstacle.map(|o| pkf(o, part)).transpose()?.unwrap_or(0.0);
            let free = v.formula_value - i;
            if !(free > 0.0) {
                return Err(Error::Infeasible {
                    free,
                    containment: v.formula_value,
                    collision: i,
                });
            }
            Ok(PartsEntropy {
                value: free.ln(),
                method,
                free_volume: free,
                containment_volume: v.formula_value,
                collision_volume: i,
                std_error: None,
                ci: None,
                free_volume_estimate: None,
                warnings: v.reasons,
            })
        }
        PartsEntropyMethod::MonteCarlo { n_samples, seed } => {
            check_samples(n_samples)?;
            let sampler = MotionSampler::new(
                part.dim(),
                container.centroid(),
                part.centroid(),
                container.circumradius(),
            )?;
            let counts = sampler.count(n_samples, seed, |s| {
                let (inside, touching) = match (s, part, container) {
                    (Sample::Planar(g), Body::Planar(p), Body::Planar(c)) => {
                        let inside = contains_placed_2d(c, p, g);
                        let touching = inside
                            && matches!(obstacle, Some(Body::Planar(o)) if intersects_placed_2d(o, p, g));
                        (inside, touching)
                    }
                    (Sample::Spatial(g), Body::Spatial(p), Body::Spatial(c)) => {
                        let inside = contains_placed_3d(c, p, g);
                        let touching = inside
                            && matches!(obstacle, Some(Body::Spatial(o)) if intersects_placed_3d(o, p, g));
                        (inside, touching)
                    }
                    _ => unreachable!("dimensions checked"),
                };
                vec![inside, touching]
            });
            let (inside, touching) = (counts[0], counts.get(1).copied().unwrap_or(0));
            let vol = sampler.volume();
            let free = MotionVolumeEstimate::from_counts(inside - touching, n_samples, seed, vol);
            let containment = MotionVolumeEstimate::from_counts(inside, n_samples, seed, vol);
            let collision = MotionVolumeEstimate::from_counts(touching, n_samples, seed, vol);
            if free.hit_count == 0 {
                return Err(Error::Infeasible {
                    free: 0.0,
                    containment: containment.value,
                    collision: collision.value,
                });
            }
            Ok(PartsEntropy {
                value: free.value.ln(),
                method,
                free_volume: free.value,
                containment_volume: containment.value,
                collision_volume: collision.value,
                std_error: Some(free.std_error / free.value),
                ci: Some([free.ci_low.ln(), free.ci_high.ln()]),
                free_volume_estimate: Some(free),
                warnings: Vec::new(),
            })
        }
    }
}
