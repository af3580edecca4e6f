use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discrete::{Density, DiscretePdf};
use super::z;
use crate::groups::{HaarDomain, HaarKind};
use crate::numeric::{gauss_legendre_on, pairwise_sum, pairwise_sum_by};
use crate::{rng, Error, Result};

/// Tolerance on `Σ values · weights = 1` for grid pdfs.
const GRID_NORMALIZATION_TOL: f64 = 1e-6;

/// Where a grid pdf lives: a motion group (in its standard coordinates) or a box in ℝⁿ.
///
/// Group coordinates are `θ` for SO(2), ZXZ Euler angles `(α, β, γ)` on
/// `[0, 2π] × [0, π] × [0, 2π]` for SO(3), followed by the translation
/// coordinates for SE(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDomainRaw", into = "GridDomainRaw")]
pub enum GridDomain {
    Haar(HaarDomain),
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDomainRaw {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<Vec<f64>>,
}

impl TryFrom<GridDomainRaw> for GridDomain {
    type Error = Error;

    fn try_from(raw: GridDomainRaw) -> Result<Self> {
        if raw.kind == "box" {
            return match (raw.lo, raw.hi) {
                (Some(lo), Some(hi)) => {
                    QuadratureGrid::box_grid(&lo, &hi, 1)?;
                    Ok(GridDomain::Box { lo, hi })
                }
                _ => Err(Error::invalid("box domain needs lo and hi")),
            };
        }
        let value = serde_json::to_value(&raw)?;
        Ok(GridDomain::Haar(serde_json::from_value(value)?))
    }
}

impl From<GridDomain> for GridDomainRaw {
    fn from(d: GridDomain) -> Self {
        match d {
            GridDomain::Box { lo, hi } => GridDomainRaw {
                kind: "box".into(),
                lo: Some(lo),
                hi: Some(hi),
            },
            GridDomain::Haar(h) => {
                let value = serde_json::to_value(h).expect("haar domain serializes");
                serde_json::from_value(value).expect("haar domain fields")
            }
        }
    }
}

impl GridDomain {
    pub fn unit_box(dim: usize) -> Self {
        GridDomain::Box {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GridDomain::Haar(h) => match h.kind() {
                HaarKind::So2 => 1,
                HaarKind::So3 => 3,
                HaarKind::Se2 => 3,
                HaarKind::Se3 => 6,
            },
            GridDomain::Box { lo, .. } => lo.len(),
        }
    }

    /// Total measure of the domain.
    pub fn volume(&self) -> f64 {
        match self {
            GridDomain::Haar(h) => crate::groups::haar_volume(h),
            GridDomain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
        }
    }
}

/// Tensor-product Gauss–Legendre nodes and weights carrying the domain measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    domain: GridDomain,
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// `n` nodes per axis over the group coordinates, with the `sin β` factor on SO(3).
    pub fn haar(domain: &HaarDomain, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("grid needs at least one node per axis"));
        }
        let mut axes = match domain.kind() {
            HaarKind::So2 | HaarKind::Se2 => vec![gauss_legendre_on(n, -PI, PI)],
            HaarKind::So3 | HaarKind::Se3 => {
                let (b, mut wb) = gauss_legendre_on(n, 0.0, PI);
                for (w, beta) in wb.iter_mut().zip(&b) {
                    *w *= beta.sin();
                }
                vec![
                    gauss_legendre_on(n, 0.0, 2.0 * PI),
                    (b, wb),
                    gauss_legendre_on(n, 0.0, 2.0 * PI),
                ]
            }
        };
        let (lo, hi) = domain.translation_bounds();
        axes.extend(lo.iter().zip(hi).map(|(&l, &h)| gauss_legendre_on(n, l, h)));
        Ok(QuadratureGrid::tensor(GridDomain::Haar(domain.clone()), &axes))
    }

    /// `n` nodes per axis on `[lo, hi]` with Lebesgue measure.
    pub fn box_grid(lo: &[f64], hi: &[f64], n: usize) -> Result<Self> {
        if n == 0 || lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("box grid needs matching nonempty bounds and n >= 1"));
        }
        if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && h > l)) {
            return Err(Error::invalid("box bounds must be finite with lo < hi"));
        }
        let axes: Vec<_> = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| gauss_legendre_on(n, l, h))
            .collect();
        Ok(QuadratureGrid::tensor(
            GridDomain::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
            &axes,
        ))
    }

    /// Grid with the domain's natural coordinates.
    pub fn on(domain: &GridDomain, n: usize) -> Result<Self> {
        match domain {
            GridDomain::Haar(h) => QuadratureGrid::haar(h, n),
            GridDomain::Box { lo, hi } => QuadratureGrid::box_grid(lo, hi, n),
        }
    }

    /// Arbitrary nodes (row-major, `dim` coordinates each) and weights.
    pub fn from_parts(domain: GridDomain, dim: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || nodes.len() != dim * weights.len() || weights.is_empty() {
            return Err(Error::invalid("node/weight counts do not match"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("quadrature weights must be finite and nonnegative"));
        }
        Ok(QuadratureGrid {
            domain,
            dim,
            nodes,
            weights,
        })
    }

    fn tensor(domain: GridDomain, axes: &[(Vec<f64>, Vec<f64>)]) -> Self {
        let dim = axes.len();
        let total: usize = axes.iter().map(|a| a.0.len()).product();
        let mut nodes = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                nodes.push(axes[d].0[i]);
                w *= axes[d].1[i];
            }
            weights.push(w);
            // last axis varies fastest
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < axes[d].0.len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        QuadratureGrid {
            domain,
            dim,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature estimate of the domain measure.
    pub fn total_measure(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Evaluate `f` at every node (in parallel, order preserved).
    pub fn evaluate(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| f(self.node(i))).collect()
    }

    /// Same nodes, weights multiplied pointwise by `factor`.
    pub(crate) fn reweighted(&self, factor: &[f64]) -> Self {
        QuadratureGrid {
            domain: self.domain.clone(),
            dim: self.dim,
            nodes: self.nodes.clone(),
            weights: self.weights.iter().zip(factor).map(|(w, f)| w * f).collect(),
        }
    }
}

/// A density stored as values at quadrature nodes; the weights carry the measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridPdfRaw", into = "GridPdfRaw")]
pub struct GridPdf {
    grid: QuadratureGrid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridPdfRaw {
    domain: GridDomain,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<GridPdfRaw> for GridPdf {
    type Error = Error;

    fn try_from(raw: GridPdfRaw) -> Result<Self> {
        let dim = raw.nodes.first().map_or(0, Vec::len);
        if raw.nodes.iter().any(|n| n.len() != dim) {
            return Err(Error::invalid("grid nodes have inconsistent dimension"));
        }
        let grid = QuadratureGrid::from_parts(raw.domain, dim, raw.nodes.concat(), raw.weights)?;
        GridPdf::new(grid, raw.values)
    }
}

impl From<GridPdf> for GridPdfRaw {
    fn from(p: GridPdf) -> Self {
        GridPdfRaw {
            nodes: p.grid.nodes.chunks(p.grid.dim).map(<[f64]>::to_vec).collect(),
            domain: p.grid.domain,
            weights: p.grid.weights,
            values: p.values,
        }
    }
}

impl GridPdf {
    pub fn new(grid: QuadratureGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!("density value {v} at node {i}")));
        }
        let pdf = GridPdf { grid, values };
        let mass = pdf.mass();
        if (mass - 1.0).abs() > GRID_NORMALIZATION_TOL {
            return Err(Error::invalid(format!("grid pdf integrates to {mass}, not 1")));
        }
        Ok(pdf)
    }

    /// Sample a normalized density at the nodes.
    pub fn from_density(grid: QuadratureGrid, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let values = grid.evaluate(f);
        GridPdf::new(grid, values)
    }

    /// Sample an unnormalized density and scale it to unit mass on this grid.
    pub fn normalized(grid: QuadratureGrid, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let mut values = grid.evaluate(f);
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("density must be finite and nonnegative"));
        }
        let mass = pairwise_sum_by(values.len(), &|i| values[i] * grid.weights[i]);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid("density has zero mass on the grid"));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        GridPdf::new(grid, values)
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ values · weights`.
    pub fn mass(&self) -> f64 {
        pairwise_sum_by(self.values.len(), &|i| self.values[i] * self.grid.weights[i])
    }

    /// `node coordinates..., value` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.grid.dim).map(|d| format!("q{d}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",value\n");
        for i in 0..self.grid.len() {
            for x in self.grid.node(i) {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{}\n", self.values[i]));
        }
        out
    }
}

impl Density for GridPdf {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    fn weight(&self, i: usize) -> f64 {
        self.grid.weights[i]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid.dim != other.grid.dim
            || self.grid.nodes.len() != other.grid.nodes.len()
            || self
                .grid
                .weights
                .iter()
                .zip(&other.grid.weights)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1e-300))
        {
            return Err(Error::invalid("grid pdfs are defined on different grids"));
        }
        Ok(())
    }
}

/// Quadrature value of `-∫ f ln f dμ`.
pub fn continuous_entropy(f: &GridPdf) -> f64 {
    pairwise_sum_by(f.values.len(), &|i| f.grid.weights[i] * z(f.values[i]))
}

/// Entropy with a grid-refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// `|S(n) - S(n/2)|`.
    pub refinement_error: f64,
    pub nodes_per_axis: usize,
}

/// Continuous entropy of a normalized `density` at `n` nodes per axis,
/// compared with the half-resolution grid.
pub fn continuous_entropy_refined(
    domain: &GridDomain,
    n: usize,
    density: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<EntropyEstimate> {
    let full = GridPdf::from_density(QuadratureGrid::on(domain, n)?, &density)?;
    let coarse_grid = QuadratureGrid::on(domain, (n / 2).max(1))?;
    let coarse_values = coarse_grid.evaluate(&density);
    let coarse = pairwise_sum_by(coarse_values.len(), &|i| {
        coarse_grid.weights[i] * z(coarse_values[i])
    });
    let value = continuous_entropy(&full);
    Ok(EntropyEstimate {
        value,
        refinement_error: (value - coarse).abs(),
        nodes_per_axis: n,
    })
}

/// Monte Carlo entropy estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEntropyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// A point drawn uniformly (with respect to the domain measure) in the domain's coordinates.
pub fn sample_coordinates(domain: &GridDomain, rng: &mut impl Rng) -> Vec<f64> {
    let mut q = Vec::with_capacity(domain.dim());
    let uniform = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    match domain {
        GridDomain::Box { lo, hi } => q.extend(lo.iter().zip(hi).map(|(&l, &h)| uniform(rng, l, h))),
        GridDomain::Haar(h) => {
            match h.kind() {
                HaarKind::So2 | HaarKind::Se2 => q.push(uniform(rng, -PI, PI)),
                HaarKind::So3 | HaarKind::Se3 => {
                    q.push(uniform(rng, 0.0, 2.0 * PI));
                    // β has density sin β / 2 on [0, π]
                    q.push((1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos());
                    q.push(uniform(rng, 0.0, 2.0 * PI));
                }
            }
            let (lo, hi) = h.translation_bounds();
            q.extend(lo.iter().zip(hi).map(|(&l, &h)| uniform(rng, l, h)));
        }
    }
    q
}

/// Monte Carlo estimate of `-∫ f ln f dμ` as `vol · mean z(f(q))` over uniform `q`.
pub fn continuous_entropy_mc(
    domain: &GridDomain,
    density: impl Fn(&[f64]) -> f64 + Sync,
    n: usize,
    seed: u64,
) -> Result<McEntropyEstimate> {
    if n < 2 {
        return Err(Error::invalid("Monte Carlo entropy needs at least 2 samples"));
    }
    let vol = domain.volume();
    let parts: Vec<(f64, f64)> = rng::shards(n)
        .into_par_iter()
        .map(|(shard, len)| {
            let mut r = rng::stream(seed, shard);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..len {
                let t = z(density(&sample_coordinates(domain, &mut r)));
                sum += t;
                sum_sq += t * t;
            }
            (sum, sum_sq)
        })
        .collect();
    let sum = pairwise_sum_by(parts.len(), &|i| parts[i].0);
    let sum_sq = pairwise_sum_by(parts.len(), &|i| parts[i].1);
    let mean = sum / n as f64;
    let var = ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
    if !mean.is_finite() {
        return Err(Error::invalid("density is not finite on the domain"));
    }
    Ok(McEntropyEstimate {
        value: vol * mean,
        std_error: vol * (var / n as f64).sqrt(),
        n_samples: n,
        seed,
    })
}

/// Bin a density on `[lo, hi]` into `bins` equal cells (masses by `order`-point
/// Gauss–Legendre per bin, renormalized).
pub fn discretize_1d(
    density: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    bins: usize,
    order: usize,
) -> Result<DiscretePdf> {
    if bins == 0 || order == 0 || !(hi > lo) {
        return Err(Error::invalid("need bins >= 1, order >= 1 and lo < hi"));
    }
    let width = (hi - lo) / bins as f64;
    let masses: Vec<f64> = (0..bins)
        .map(|b| {
            let a = lo + b as f64 * width;
            let (x, w) = gauss_legendre_on(order, a, a + width);
            x.iter().zip(&w).map(|(x, w)| w * density(*x)).sum()
        })
        .collect();
    DiscretePdf::from_weights(&masses)
}
