use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::z;
use crate::groups::FiniteGroup;
use crate::numeric::{pairwise_sum, pairwise_sum_by};
use crate::{Error, Result};

/// Tolerance on `Σ p_i = 1` for discrete pdfs and density matrices.
pub const NORMALIZATION_TOL: f64 = 1e-12;

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::invalid("empty probability vector"));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::invalid(format!("p[{i}] = {p} is not a probability")));
    }
    let total = pairwise_sum(probs);
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::invalid(format!("weight[{i}] = {w} is negative or not finite")));
    }
    let total = pairwise_sum(weights);
    if total <= 0.0 {
        return Err(Error::invalid("weights sum to zero"));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Probabilities `p_i` of a finite collection of events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscretePdf {
    probs: Vec<f64>,
}

impl DiscretePdf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs)?;
        Ok(DiscretePdf { probs })
    }

    /// Normalize nonnegative weights into a pdf.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        DiscretePdf::new(normalize(weights)?)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("empty probability vector"));
        }
        Ok(DiscretePdf {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn delta(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::invalid(format!("delta index {at} outside 0..{n}")));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(DiscretePdf { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for DiscretePdf {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DiscretePdf::new(v)
    }
}

impl From<DiscretePdf> for Vec<f64> {
    fn from(p: DiscretePdf) -> Self {
        p.probs
    }
}

/// `-ln p`.
pub fn self_information(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("{p} is not a probability in (0, 1]")));
    }
    Ok(-p.ln())
}

/// `-Σ p_i ln p_i`.
pub fn shannon_entropy(p: &DiscretePdf) -> f64 {
    pairwise_sum_by(p.len(), &|i| z(p.probs[i]))
}

/// Real symmetric, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Eigenvalues down to `-1e-12` are accepted and clipped to zero.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::invalid("density matrix must be square and nonempty"));
        }
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::invalid(format!("density matrix is not symmetric ({asym:e})")));
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("trace is {trace}, not 1")));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let min = eig.eigenvalues.min();
        if min < -1e-12 {
            return Err(Error::invalid(format!("negative eigenvalue {min}")));
        }
        let eigenvalues = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        Ok(DensityMatrix {
            matrix,
            eigenvalues,
        })
    }

    pub fn from_diagonal(p: &DiscretePdf) -> Self {
        DensityMatrix {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(p.probs())),
            eigenvalues: p.probs().to_vec(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// `-tr(P ln P) = -Σ λ_i ln λ_i`.
pub fn von_neumann_entropy(p: &DensityMatrix) -> f64 {
    pairwise_sum_by(p.eigenvalues.len(), &|i| z(p.eigenvalues[i]))
}

/// A density sampled on cells with measure weights; discrete pdfs have unit weights.
pub trait Density {
    fn len(&self) -> usize;
    fn value(&self, i: usize) -> f64;
    fn weight(&self, i: usize) -> f64;
    /// Whether two densities live on the same cells.
    fn check_compatible(&self, other: &Self) -> Result<()>;
}

impl Density for DiscretePdf {
    fn len(&self) -> usize {
        self.probs.len()
    }

    fn value(&self, i: usize) -> f64 {
        self.probs[i]
    }

    fn weight(&self, _: usize) -> f64 {
        1.0
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "pdfs have different lengths: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// `Σ w_i p_i ln(p_i / q_i)`; fails on the first cell with `p > 0 = q`.
pub fn kl_divergence<D: Density>(p: &D, q: &D) -> Result<f64> {
    p.check_compatible(q)?;
    for i in 0..p.len() {
        let (pi, qi) = (p.value(i), q.value(i));
        if pi > 0.0 && qi <= 0.0 {
            return Err(Error::NotAbsolutelyContinuous { index: i, p: pi });
        }
    }
    Ok(pairwise_sum_by(p.len(), &|i| {
        let pi = p.value(i);
        if pi == 0.0 {
            0.0
        } else {
            p.weight(i) * pi * (pi / q.value(i)).ln()
        }
    }))
}

/// Joint pmf of two discrete variables, row index `x1`, column index `x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPdf {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointPdf {
    /// Row-major probabilities.
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows * cols != probs.len() {
            return Err(Error::invalid(format!(
                "{} probabilities for a {rows}x{cols} joint",
                probs.len()
            )));
        }
        check_probs(&probs)?;
        Ok(JointPdf { rows, cols, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged joint table"));
        }
        JointPdf::new(rows.len(), cols, rows.concat())
    }

    /// The product `p1 ⊗ p2`.
    pub fn independent(p1: &DiscretePdf, p2: &DiscretePdf) -> Self {
        let probs = p1
            .probs()
            .iter()
            .flat_map(|a| p2.probs().iter().map(move |b| a * b))
            .collect();
        JointPdf {
            rows: p1.len(),
            cols: p2.len(),
            probs,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.cols + j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Marginal of `x1` (row sums).
    pub fn marginal_1(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| pairwise_sum(&self.probs[i * self.cols..(i + 1) * self.cols]))
            .collect()
    }

    /// Marginal of `x2` (column sums).
    pub fn marginal_2(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| pairwise_sum_by(self.rows, &|i| self.get(i, j)))
            .collect()
    }
}

/// Conditional and marginal entropies of a joint pmf.
///
/// `s_cond_2` conditions on `x2`: `-Σ p(x1,x2) ln p(x1|x2)`. `s_cond_1`
/// conditions on `x1`. Both carry the leading minus sign so they are
/// nonnegative, and `s_cond_2 - s_cond_1 = s_marg_1 - s_marg_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEntropies {
    pub s_cond_2: f64,
    pub s_cond_1: f64,
    pub s_marg_1: f64,
    pub s_marg_2: f64,
    pub s_joint: f64,
}

/// Direct summation of every term; no entropy is derived from the others.
pub fn conditional_entropy(joint: &JointPdf) -> ConditionalEntropies {
    let m1 = joint.marginal_1();
    let m2 = joint.marginal_2();
    let n = joint.rows * joint.cols;
    let cell = |k: usize| (k / joint.cols, k % joint.cols, joint.probs[k]);
    let s_cond_2 = pairwise_sum_by(n, &|k| {
        let (_, j, p) = cell(k);
        if p == 0.0 {
            0.0
        } else {
            -p * (p / m2[j]).ln()
        }
    });
    let s_cond_1 = pairwise_sum_by(n, &|k| {
        let (i, _, p) = cell(k);
        if p == 0.0 {
            0.0
        } else {
            -p * (p / m1[i]).ln()
        }
    });
    ConditionalEntropies {
        s_cond_2,
        s_cond_1,
        s_marg_1: pairwise_sum_by(m1.len(), &|i| z(m1[i])),
        s_marg_2: pairwise_sum_by(m2.len(), &|j| z(m2[j])),
        s_joint: pairwise_sum_by(n, &|k| z(joint.probs[k])),
    }
}

/// `(f1 * f2)(g) = Σ_h f1(h) f2(h⁻¹ g)` on a finite group.
pub fn convolve_finite(f1: &DiscretePdf, f2: &DiscretePdf, group: &FiniteGroup) -> Result<DiscretePdf> {
    let n = group.order();
    if f1.len() != n || f2.len() != n {
        return Err(Error::invalid(format!(
            "pdf sizes {} and {} do not match group order {n}",
            f1.len(),
            f2.len()
        )));
    }
    let out = (0..n)
        .map(|g| pairwise_sum_by(n, &|h| f1.probs[h] * f2.probs[group.compose(group.inverse(h), g)]))
        .collect();
    DiscretePdf::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::LN_2;

    fn random_pdf(rng: &mut impl Rng, n: usize) -> DiscretePdf {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                // occasional exact zeros exercise the z(0) = 0 path
                if u < 0.1 {
                    0.0
                } else {
                    -u.ln()
                }
            })
            .collect();
        DiscretePdf::from_weights(&w).unwrap_or_else(|_| DiscretePdf::uniform(n).unwrap())
    }

    #[test]
    fn self_information_examples() {
        assert_eq!(self_information(1.0).unwrap(), 0.0);
        assert!((self_information(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert!((self_information(0.125).unwrap() - 3.0 * LN_2).abs() < 1e-15);
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(self_information(bad).unwrap_err().is_invalid_argument());
        }
    }

    #[test]
    fn shannon_examples() {
        let u4 = DiscretePdf::uniform(4).unwrap();
        assert!((shannon_entropy(&u4) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&DiscretePdf::new(vec![1.0, 0.0, 0.0]).unwrap()), 0.0);
        let p = DiscretePdf::new(vec![0.5, 0.25, 0.25]).unwrap();
        // hand sum: ½ln2 + 2·¼·ln4 = (3/2) ln 2
        assert!((shannon_entropy(&p) - 1.5 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn pdf_validation() {
        assert!(DiscretePdf::new(vec![0.5, 0.6]).is_err());
        assert!(DiscretePdf::new(vec![1.5, -0.5]).is_err());
        assert!(DiscretePdf::new(vec![]).is_err());
        assert!(DiscretePdf::from_weights(&[0.0, 0.0]).is_err());
        assert!(DiscretePdf::delta(3, 3).is_err());
    }

    #[test]
    fn von_neumann_examples() {
        let half = DensityMatrix::new(DMatrix::identity(2, 2) * 0.5).unwrap();
        assert!((von_neumann_entropy(&half) - LN_2).abs() < 1e-15);
        let v = nalgebra::DVector::from_vec(vec![0.6, 0.8]);
        let proj = DensityMatrix::new(&v * v.transpose()).unwrap();
        assert!(von_neumann_entropy(&proj).abs() < 1e-12);
        let p = DiscretePdf::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let dm = DensityMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            p.probs().to_vec(),
        )))
        .unwrap();
        assert!((von_neumann_entropy(&dm) - shannon_entropy(&p)).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, -0.5]);
        assert!(DensityMatrix::new(neg).unwrap_err().to_string().contains("negative"));
        let asym = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.5]);
        assert!(DensityMatrix::new(asym).is_err());
    }

    #[test]
    fn von_neumann_conjugation_invariance() {
        let mut rng = rng::stream(5, 0);
        for _ in 0..50 {
            let n = 4;
            let p = random_pdf(&mut rng, n);
            let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let q = a.qr().q();
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(p.probs().to_vec()));
            let mut m = &q * diag * q.transpose();
            m = (&m + m.transpose()) * 0.5;
            let t = m.trace();
            m /= t;
            let dm = DensityMatrix::new(m).unwrap();
            assert!((von_neumann_entropy(&dm) - shannon_entropy(&p)).abs() < 1e-10);
        }
    }

    #[test]
    fn kl_examples() {
        let p = DiscretePdf::new(vec![0.5, 0.5]).unwrap();
        let q = DiscretePdf::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let expected = 0.5 * LN_2 + 0.5 * (2.0f64 / 3.0).ln();
        assert!((kl_divergence(&p, &q).unwrap() - expected).abs() < 1e-15);
        let r = DiscretePdf::new(vec![1.0, 0.0]).unwrap();
        match kl_divergence(&p, &r) {
            Err(Error::NotAbsolutelyContinuous { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        // zero mass in p is fine
        assert!((kl_divergence(&r, &p).unwrap() - LN_2).abs() < 1e-15);
        assert!(kl_divergence(&p, &DiscretePdf::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn conditional_examples() {
        let p1 = DiscretePdf::new(vec![0.2, 0.3, 0.5]).unwrap();
        let p2 = DiscretePdf::new(vec![0.6, 0.4]).unwrap();
        let c = conditional_entropy(&JointPdf::independent(&p1, &p2));
        assert!((c.s_cond_2 - shannon_entropy(&p1)).abs() < 1e-14);
        assert!((c.s_cond_1 - shannon_entropy(&p2)).abs() < 1e-14);

        let diag = JointPdf::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap();
        let c = conditional_entropy(&diag);
        assert_eq!(c.s_cond_2, 0.0);
        assert_eq!(c.s_cond_1, 0.0);

        assert!(JointPdf::from_rows(&[vec![0.3, 0.1], vec![0.1, 0.1]]).is_err());
    }

    #[test]
    fn conditional_identity_on_random_joints() {
        let mut rng = rng::stream(6, 0);
        for _ in 0..200 {
            let p = random_pdf(&mut rng, 16);
            let j = JointPdf::new(4, 4, p.probs().to_vec()).unwrap();
            let c = conditional_entropy(&j);
            let residual = (c.s_cond_2 - c.s_cond_1) - (c.s_marg_1 - c.s_marg_2);
            assert!(residual.abs() < 1e-12, "{residual}");
            assert!(c.s_cond_2 <= c.s_marg_1 + 1e-12);
            assert!(c.s_cond_1 <= c.s_marg_2 + 1e-12);
            // chain rule as an extra cross-check
            assert!((c.s_joint - c.s_marg_2 - c.s_cond_2).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_identity_and_uniform() {
        let g = FiniteGroup::octahedral().unwrap();
        let mut rng = rng::stream(7, 0);
        let f = random_pdf(&mut rng, 24);
        let delta = DiscretePdf::delta(24, 0).unwrap();
        let fd = convolve_finite(&f, &delta, &g).unwrap();
        let df = convolve_finite(&delta, &f, &g).unwrap();
        for i in 0..24 {
            assert!((fd.probs()[i] - f.probs()[i]).abs() < 1e-15);
            assert!((df.probs()[i] - f.probs()[i]).abs() < 1e-15);
        }
        let u = DiscretePdf::uniform(24).unwrap();
        for h in [convolve_finite(&u, &f, &g).unwrap(), convolve_finite(&f, &u, &g).unwrap()] {
            assert!(h.probs().iter().all(|p| (p - 1.0 / 24.0).abs() < 1e-15));
        }
        assert!(convolve_finite(&DiscretePdf::uniform(3).unwrap(), &f, &g).is_err());
    }

    #[test]
    fn convolution_matches_direct_enumeration() {
        // oracle: push forward (h, k) ↦ h∘k with mass f1(h) f2(k)
        let g = FiniteGroup::dihedral(4).unwrap();
        let mut rng = rng::stream(8, 0);
        let (f1, f2) = (random_pdf(&mut rng, 8), random_pdf(&mut rng, 8));
        let mut oracle = [0.0; 8];
        for h in 0..8 {
            for k in 0..8 {
                oracle[g.compose(h, k)] += f1.probs()[h] * f2.probs()[k];
            }
        }
        let c = convolve_finite(&f1, &f2, &g).unwrap();
        for i in 0..8 {
            assert!((c.probs()[i] - oracle[i]).abs() < 1e-15);
        }
        assert!((c.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn shannon_bounds(w in prop::collection::vec(0.0f64..1.0, 1..40)) {
            prop_assume!(w.iter().sum::<f64>() > 1e-9);
            let p = DiscretePdf::from_weights(&w).unwrap();
            let s = shannon_entropy(&p);
            prop_assert!(s >= -1e-15);
            prop_assert!(s <= (p.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn kl_nonnegative(
            pq in (1usize..20).prop_flat_map(|n| (
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(0.01f64..1.0, n),
            ))
        ) {
            let (a, b) = pq;
            prop_assume!(a.iter().sum::<f64>() > 1e-9);
            let p = DiscretePdf::from_weights(&a).unwrap();
            let q = DiscretePdf::from_weights(&b).unwrap();
            prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
        }
    }
}
