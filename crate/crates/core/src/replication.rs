//! Degree of self replication, symmetry-based shape correction, and
//! accumulation of manufacturing error over replication generations.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::groups::FiniteGroup;
use crate::numeric::pairwise_sum_by;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// The most complicated input part.
    Max,
    Mean,
}

/// Complexity of a system and of the parts it is assembled from, in any
/// consistent units (part counts, fabrication steps, program length, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityLedger {
    pub system_complexity: f64,
    pub part_complexities: Vec<f64>,
    pub aggregation: Aggregation,
}

impl ComplexityLedger {
    pub fn new(system_complexity: f64, part_complexities: Vec<f64>, aggregation: Aggregation) -> Result<Self> {
        let ledger = ComplexityLedger {
            system_complexity,
            part_complexities,
            aggregation,
        };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.system_complexity) {
            return Err(Error::invalid("system complexity must be finite and nonnegative"));
        }
        if self.part_complexities.is_empty() {
            return Err(Error::invalid("part list is empty"));
        }
        if let Some(i) = self.part_complexities.iter().position(|&c| !ok(c)) {
            return Err(Error::invalid(format!("part complexity {i} must be finite and nonnegative")));
        }
        Ok(())
    }

    pub fn part_complexity(&self) -> f64 {
        let p = &self.part_complexities;
        match self.aggregation {
            Aggregation::Max => p.iter().copied().fold(0.0, f64::max),
            Aggregation::Mean => pairwise_sum_by(p.len(), &|i| p[i]) / p.len() as f64,
        }
    }
}

/// System complexity over (aggregated) part complexity.
pub fn dosr(ledger: &ComplexityLedger) -> Result<f64> {
    ledger.validate()?;
    let part = ledger.part_complexity();
    if !(part > 0.0) {
        return Err(Error::invalid("aggregated part complexity is zero"));
    }
    Ok(ledger.system_complexity / part)
}

/// A part's vertices together with its nominal geometry and symmetry group.
///
/// `perms[k][i]` is the index of the nominal vertex `k · v_i`. Planar shapes
/// use the first two coordinates and `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSample {
    dim: usize,
    nominal: Vec<Vector3<f64>>,
    vertices: Vec<Vector3<f64>>,
    rotations: Vec<Matrix3<f64>>,
    perms: Vec<Vec<usize>>,
}

fn lift(dim: usize, points: &[Vec<f64>]) -> Result<Vec<Vector3<f64>>> {
    if dim != 2 && dim != 3 {
        return Err(Error::invalid(format!("shape dimension must be 2 or 3, got {dim}")));
    }
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.len() != dim || p.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("vertex {i} needs {dim} finite coordinates")));
            }
            Ok(Vector3::new(p[0], p[1], if dim == 3 { p[2] } else { 0.0 }))
        })
        .collect()
}

fn rotations_of(group: &FiniteGroup, dim: usize) -> Result<Vec<Matrix3<f64>>> {
    let mats = group
        .matrices()
        .ok_or_else(|| Error::invalid(format!("group {} has no rotation representation", group.name())))?;
    if dim == 2 {
        if let Some(k) = mats.iter().position(|m| (m[(2, 2)].abs() - 1.0).abs() > 1e-9) {
            return Err(Error::invalid(format!("element {k} of {} does not preserve the plane", group.name())));
        }
    }
    Ok(mats.to_vec())
}

impl ShapeSample {
    /// Derive the vertex correspondence from the symmetry of `nominal`.
    pub fn new(dim: usize, nominal: &[Vec<f64>], group: &FiniteGroup) -> Result<Self> {
        let nominal = lift(dim, nominal)?;
        let rotations = rotations_of(group, dim)?;
        let tol = 1e-9 * nominal.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let mut perms = Vec::with_capacity(rotations.len());
        for (k, r) in rotations.iter().enumerate() {
            let perm = nominal
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let image = r * v;
                    nominal.iter().position(|w| (w - image).norm() <= tol).ok_or_else(|| {
                        Error::invalid(format!("nominal shape is not invariant: element {k} moves vertex {i} off the shape"))
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            perms.push(perm);
        }
        ShapeSample::assemble(dim, nominal, rotations, perms)
    }

    /// Use an explicit vertex correspondence (`perms[k][i]` = index of `k · v_i`).
    pub fn with_permutations(
        dim: usize,
        nominal: &[Vec<f64>],
        group: &FiniteGroup,
        perms: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let nominal = lift(dim, nominal)?;
        let rotations = rotations_of(group, dim)?;
        ShapeSample::assemble(dim, nominal, rotations, perms)
    }

    fn assemble(dim: usize, nominal: Vec<Vector3<f64>>, rotations: Vec<Matrix3<f64>>, perms: Vec<Vec<usize>>) -> Result<Self> {
        let n = nominal.len();
        if n == 0 {
            return Err(Error::invalid("shape has no vertices"));
        }
        if perms.len() != rotations.len() {
            return Err(Error::invalid(format!(
                "inconsistent orbit labeling: {} permutations for {} group elements",
                perms.len(),
                rotations.len()
            )));
        }
        let tol = 1e-9 * nominal.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for (k, perm) in perms.iter().enumerate() {
            let mut seen = vec![false; n];
            if perm.len() != n {
                return Err(Error::invalid(format!("inconsistent orbit labeling: permutation {k} has wrong length")));
            }
            for (i, &j) in perm.iter().enumerate() {
                if j >= n || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::invalid(format!("inconsistent orbit labeling: permutation {k} is not a bijection")));
                }
                if (rotations[k] * nominal[i] - nominal[j]).norm() > tol {
                    return Err(Error::invalid(format!(
                        "inconsistent orbit labeling: element {k} does not map vertex {i} to vertex {j}"
                    )));
                }
            }
        }
        Ok(ShapeSample {
            dim,
            vertices: nominal.clone(),
            nominal,
            rotations,
            perms,
        })
    }

    /// The same part with different (for example noisy) vertex positions.
    pub fn with_vertices(&self, vertices: &[Vec<f64>]) -> Result<Self> {
        let v = lift(self.dim, vertices)?;
        if v.len() != self.nominal.len() {
            return Err(Error::invalid(format!("expected {} vertices, got {}", self.nominal.len(), v.len())));
        }
        Ok(ShapeSample {
            vertices: v,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.as_slice()[..self.dim].to_vec()).collect()
    }

    pub fn nominal(&self) -> Vec<Vec<f64>> {
        self.nominal.iter().map(|v| v.as_slice()[..self.dim].to_vec()).collect()
    }

    /// RMS distance of the vertices from their nominal positions.
    pub fn deviation(&self) -> f64 {
        let n = self.vertices.len();
        (pairwise_sum_by(n, &|i| (self.vertices[i] - self.nominal[i]).norm_squared()) / n as f64).sqrt()
    }

    /// Largest `|k·v_i − v_{k(i)}|` over the group: zero for a symmetric shape.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, perm) in self.rotations.iter().zip(&self.perms) {
            for (i, &j) in perm.iter().enumerate() {
                worst = worst.max((r * self.vertices[i] - self.vertices[j]).norm());
            }
        }
        worst
    }
}

/// Project the vertices onto the symmetric shapes: `v_i ← (1/|K|) Σ_k k⁻¹ · v_{k(i)}`.
pub fn symmetrize_shape(s: &ShapeSample) -> ShapeSample {
    let scale = 1.0 / s.rotations.len() as f64;
    let vertices = (0..s.vertices.len())
        .map(|i| {
            let mut acc = Vector3::zeros();
            for (r, perm) in s.rotations.iter().zip(&s.perms) {
                acc += r.transpose() * s.vertices[perm[i]];
            }
            acc * scale
        })
        .collect();
    ShapeSample {
        vertices,
        ..s.clone()
    }
}

/// Deviation statistics at one generation, over all trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow {
    pub generation: usize,
    /// Mean over trials of the RMS vertex deviation.
    pub mean_deviation: f64,
    pub se: f64,
    /// Mean over trials of the mean squared vertex deviation.
    pub mean_sq_deviation: f64,
    pub msd_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub corrected: bool,
    pub noise_sigma: f64,
    pub trials: usize,
    pub seed: u64,
    /// Rows for generations `0..=generations`.
    pub rows: Vec<GenerationRow>,
}

impl GenerationStats {
    /// Least-squares slope (through the origin) of mean squared deviation against generation.
    pub fn msd_slope(&self) -> f64 {
        let num: f64 = self.rows.iter().map(|r| r.generation as f64 * r.mean_sq_deviation).sum();
        let den: f64 = self.rows.iter().map(|r| (r.generation as f64).powi(2)).sum();
        num / den
    }

    /// Least-squares slope of `ln(mean deviation)` against `ln(generation)` over generations ≥ 1.
    pub fn log_log_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.generation > 0 && r.mean_deviation > 0.0)
            .map(|r| ((r.generation as f64).ln(), r.mean_deviation.ln()))
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,mean_deviation,se,mean_sq_deviation,msd_se,corrected\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.generation, r.mean_deviation, r.se, r.mean_sq_deviation, r.msd_se, self.corrected
            ));
        }
        out
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum_by(xs.len(), &|i| xs[i]) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = pairwise_sum_by(xs.len(), &|i| (xs[i] - mean).powi(2)) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Copy a part generation after generation, adding isotropic Gaussian error of
/// standard deviation `noise_sigma` per coordinate each time, and (if `corrected`)
/// symmetrizing every copy. Trial `t` draws from stream `t` of `seed`.
pub fn simulate_generations(
    s: &ShapeSample,
    noise_sigma: f64,
    generations: usize,
    corrected: bool,
    trials: usize,
    seed: u64,
) -> Result<GenerationStats> {
    if generations == 0 || trials == 0 {
        return Err(Error::invalid("need at least one generation and one trial"));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid("noise sigma must be finite and nonnegative"));
    }
    let start = ShapeSample {
        vertices: s.nominal.clone(),
        ..s.clone()
    };
    // traces[t][g] = (rms, msd)
    let traces: Vec<Vec<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t as u64);
            let mut shape = start.clone();
            let mut trace = Vec::with_capacity(generations + 1);
            trace.push((0.0, 0.0));
            for _ in 0..generations {
                for v in shape.vertices.iter_mut() {
                    for c in 0..shape.dim {
                        v[c] += noise_sigma * r.sample::<f64, _>(StandardNormal);
                    }
                }
                if corrected {
                    shape = symmetrize_shape(&shape);
                }
                let rms = shape.deviation();
                trace.push((rms, rms * rms));
            }
            trace
        })
        .collect();
    let rows = (0..=generations)
        .map(|g| {
            let rms: Vec<f64> = traces.iter().map(|t| t[g].0).collect();
            let msd: Vec<f64> = traces.iter().map(|t| t[g].1).collect();
            let (mean_deviation, se) = mean_and_se(&rms);
            let (mean_sq_deviation, msd_se) = mean_and_se(&msd);
            GenerationRow {
                generation: g,
                mean_deviation,
                se,
                mean_sq_deviation,
                msd_se,
            }
        })
        .collect();
    Ok(GenerationStats {
        corrected,
        noise_sigma,
        trials,
        seed,
        rows,
    })
}
