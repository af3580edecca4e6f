//! Coset and double-coset decompositions of finite groups, marginal pdfs on
//! the factors, the subadditivity inequalities and subgroup averaging.

use serde::Serialize;

use crate::entropy::{continuous_entropy, shannon_entropy, DiscretePdf, GridDomain, GridPdf, QuadratureGrid};
use crate::groups::{FiniteGroup, HaarDomain, HaarKind};
use crate::numeric::pairwise_sum_by;
use crate::{Error, Result};

/// Which side the subgroup acts on: `gH` (left cosets) or `Hg` (right cosets).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `G/H` (or `H\G`) as explicit element sets.
///
/// Cosets are ordered by their representative, the smallest element id in the coset.
#[derive(Debug, Clone)]
pub struct CosetDecomposition<'g> {
    group: &'g FiniteGroup,
    subgroup: Vec<usize>,
    side: Side,
    cosets: Vec<Vec<usize>>,
    representatives: Vec<usize>,
    coset_of: Vec<usize>,
}

/// Serializable view of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionDump {
    pub subgroup: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left_subgroup: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub cosets: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
}

impl<'g> CosetDecomposition<'g> {
    pub fn group(&self) -> &'g FiniteGroup {
        self.group
    }

    pub fn subgroup(&self) -> &[usize] {
        &self.subgroup
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn cosets(&self) -> &[Vec<usize>] {
        &self.cosets
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    /// Index of the coset containing `g`.
    pub fn coset_of(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    /// `rep ∘ h` for left cosets, `h ∘ rep` for right cosets.
    fn element(&self, rep: usize, h: usize) -> usize {
        match self.side {
            Side::Left => self.group.compose(rep, h),
            Side::Right => self.group.compose(h, rep),
        }
    }

    pub fn dump(&self) -> DecompositionDump {
        DecompositionDump {
            subgroup: self.subgroup.clone(),
            left_subgroup: None,
            side: Some(self.side),
            cosets: self.cosets.clone(),
            representatives: self.representatives.clone(),
        }
    }
}

/// Group the elements of `g` into sets `{ f(g, ·) }`, smallest id first.
fn orbit_partition(order: usize, orbit: impl Fn(usize) -> Vec<usize>) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut label = vec![usize::MAX; order];
    let mut sets = Vec::new();
    for g in 0..order {
        if label[g] != usize::MAX {
            continue;
        }
        let mut set = orbit(g);
        set.sort_unstable();
        set.dedup();
        for &x in &set {
            label[x] = sets.len();
        }
        sets.push(set);
    }
    (sets, label)
}

pub fn coset_partition<'g>(group: &'g FiniteGroup, subgroup: &[usize], side: Side) -> Result<CosetDecomposition<'g>> {
    let h = group.check_subgroup(subgroup)?;
    let (cosets, coset_of) = orbit_partition(group.order(), |g| {
        h.iter()
            .map(|&x| match side {
                Side::Left => group.compose(g, x),
                Side::Right => group.compose(x, g),
            })
            .collect()
    });
    if cosets.len() * h.len() != group.order() || cosets.iter().any(|c| c.len() != h.len()) {
        return Err(Error::invalid("coset sizes violate Lagrange's theorem"));
    }
    let representatives = cosets.iter().map(|c| c[0]).collect();
    Ok(CosetDecomposition {
        group,
        subgroup: h,
        side,
        cosets,
        representatives,
        coset_of,
    })
}

/// `K\G/H` as explicit element sets `KgH`.
#[derive(Debug, Clone)]
pub struct DoubleCosetDecomposition<'g> {
    group: &'g FiniteGroup,
    left: Vec<usize>,
    right: Vec<usize>,
    double_cosets: Vec<Vec<usize>>,
    representatives: Vec<usize>,
    coset_of: Vec<usize>,
}

impl<'g> DoubleCosetDecomposition<'g> {
    pub fn group(&self) -> &'g FiniteGroup {
        self.group
    }

    /// `K`.
    pub fn left_subgroup(&self) -> &[usize] {
        &self.left
    }

    /// `H`.
    pub fn right_subgroup(&self) -> &[usize] {
        &self.right
    }

    pub fn double_cosets(&self) -> &[Vec<usize>] {
        &self.double_cosets
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn coset_of(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    /// `|KcH| / (|K||H|)`: the measure of a double coset that makes the
    /// factorization `g = k ∘ c ∘ h` integrate `f` exactly once.
    pub fn measure(&self, index: usize) -> f64 {
        self.double_cosets[index].len() as f64 / (self.left.len() * self.right.len()) as f64
    }

    pub fn dump(&self) -> DecompositionDump {
        DecompositionDump {
            subgroup: self.right.clone(),
            left_subgroup: Some(self.left.clone()),
            side: None,
            cosets: self.double_cosets.clone(),
            representatives: self.representatives.clone(),
        }
    }
}

pub fn double_coset_partition<'g>(
    group: &'g FiniteGroup,
    k: &[usize],
    h: &[usize],
) -> Result<DoubleCosetDecomposition<'g>> {
    let k = group.check_subgroup(k)?;
    let h = group.check_subgroup(h)?;
    let (double_cosets, coset_of) = orbit_partition(group.order(), |g| {
        k.iter()
            .flat_map(|&a| h.iter().map(move |&b| group.compose(group.compose(a, g), b)))
            .collect()
    });
    let representatives = double_cosets.iter().map(|c| c[0]).collect();
    Ok(DoubleCosetDecomposition {
        group,
        left: k,
        right: h,
        double_cosets,
        representatives,
        coset_of,
    })
}

/// The two marginals of a pdf on `G` over `G/H` and `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    /// Indexed like `dec.cosets()`.
    pub f_coset: DiscretePdf,
    /// Indexed like `dec.subgroup()`.
    pub f_sub: DiscretePdf,
}

pub fn marginals(f: &DiscretePdf, dec: &CosetDecomposition<'_>) -> Result<Marginals> {
    check_len(f, dec.group)?;
    let p = f.probs();
    let h = &dec.subgroup;
    let reps = &dec.representatives;
    let f_coset: Vec<f64> = reps
        .iter()
        .map(|&r| pairwise_sum_by(h.len(), &|j| p[dec.element(r, h[j])]))
        .collect();
    let f_sub: Vec<f64> = h
        .iter()
        .map(|&x| pairwise_sum_by(reps.len(), &|i| p[dec.element(reps[i], x)]))
        .collect();
    Ok(Marginals {
        f_coset: DiscretePdf::new(f_coset)?,
        f_sub: DiscretePdf::new(f_sub)?,
    })
}

/// Marginals over `K`, `K\G/H` and `H` of a pdf on `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCosetMarginals {
    pub f_left: DiscretePdf,
    pub f_double: DiscretePdf,
    pub f_right: DiscretePdf,
}

/// Marginals of the factorization `g = k ∘ c ∘ h`, `c` a double-coset representative,
/// with each triple weighted by the double-coset measure so every marginal has unit mass.
pub fn double_coset_marginals(f: &DiscretePdf, dec: &DoubleCosetDecomposition<'_>) -> Result<DoubleCosetMarginals> {
    let g = dec.group;
    check_len(f, g)?;
    let p = f.probs();
    let (k, h) = (&dec.left, &dec.right);
    let mut f_left = vec![0.0; k.len()];
    let mut f_right = vec![0.0; h.len()];
    let mut f_double = vec![0.0; dec.double_cosets.len()];
    for (ci, &c) in dec.representatives.iter().enumerate() {
        let mu = dec.measure(ci);
        let mut mass = 0.0;
        for (a, &kk) in k.iter().enumerate() {
            let kc = g.compose(kk, c);
            for (b, &hh) in h.iter().enumerate() {
                let t = mu * p[g.compose(kc, hh)];
                f_left[a] += t;
                f_right[b] += t;
                mass += t;
            }
        }
        f_double[ci] = mass;
    }
    Ok(DoubleCosetMarginals {
        f_left: DiscretePdf::new(f_left)?,
        f_double: DiscretePdf::new(f_double)?,
        f_right: DiscretePdf::new(f_right)?,
    })
}

/// Marginals over `G/K`, `K/H` and `H` for nested subgroups `H < K < G`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedMarginals {
    pub f_outer: DiscretePdf,
    pub f_inner: DiscretePdf,
    pub f_sub: DiscretePdf,
}

/// Uses the unique factorization `g = c_{G/K}(gK) ∘ c_{K/H}(kH) ∘ h`.
pub fn nested_marginals(f: &DiscretePdf, group: &FiniteGroup, k: &[usize], h: &[usize]) -> Result<NestedMarginals> {
    check_len(f, group)?;
    let outer = coset_partition(group, k, Side::Left)?;
    let h_sorted = group.check_subgroup(h)?;
    if let Some(x) = h_sorted.iter().find(|x| outer.subgroup.binary_search(x).is_err()) {
        return Err(Error::invalid(format!("element {x} of H is not in K, so H is not a subgroup of K")));
    }
    // K/H inside K, using K's own composition
    let k_ids = &outer.subgroup;
    let (inner_cosets, _) = orbit_partition(group.order(), |g| {
        if k_ids.binary_search(&g).is_ok() {
            h_sorted.iter().map(|&x| group.compose(g, x)).collect()
        } else {
            vec![g]
        }
    });
    let inner_reps: Vec<usize> = inner_cosets
        .iter()
        .filter(|c| k_ids.binary_search(&c[0]).is_ok())
        .map(|c| c[0])
        .collect();
    let p = f.probs();
    let mut f_outer = vec![0.0; outer.representatives.len()];
    let mut f_inner = vec![0.0; inner_reps.len()];
    let mut f_sub = vec![0.0; h_sorted.len()];
    for (a, &c1) in outer.representatives.iter().enumerate() {
        for (b, &c2) in inner_reps.iter().enumerate() {
            let c = group.compose(c1, c2);
            for (j, &x) in h_sorted.iter().enumerate() {
                let t = p[group.compose(c, x)];
                f_outer[a] += t;
                f_inner[b] += t;
                f_sub[j] += t;
            }
        }
    }
    Ok(NestedMarginals {
        f_outer: DiscretePdf::new(f_outer)?,
        f_inner: DiscretePdf::new(f_inner)?,
        f_sub: DiscretePdf::new(f_sub)?,
    })
}

/// Which subadditivity inequality to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubadditivityVariant {
    /// `S(f) ≤ S(f_{G/H}) + S(f_H)`.
    Coset { h: Vec<usize> },
    /// `S(f) ≤ S(f_K) + S(f_{K\G/H}) + S(f_H)`.
    DoubleCoset { k: Vec<usize>, h: Vec<usize> },
    /// `S(f) ≤ S(f_{G/K}) + S(f_{K/H}) + S(f_H)` for `H < K < G`.
    Nested { k: Vec<usize>, h: Vec<usize> },
}

/// Sum of marginal entropies minus `S(f)`; nonnegative up to round-off.
pub fn subadditivity_slack(f: &DiscretePdf, group: &FiniteGroup, variant: &SubadditivityVariant) -> Result<f64> {
    let marginal_sum = match variant {
        SubadditivityVariant::Coset { h } => {
            let m = marginals(f, &coset_partition(group, h, Side::Left)?)?;
            shannon_entropy(&m.f_coset) + shannon_entropy(&m.f_sub)
        }
        SubadditivityVariant::DoubleCoset { k, h } => {
            let m = double_coset_marginals(f, &double_coset_partition(group, k, h)?)?;
            shannon_entropy(&m.f_left) + shannon_entropy(&m.f_double) + shannon_entropy(&m.f_right)
        }
        SubadditivityVariant::Nested { k, h } => {
            let m = nested_marginals(f, group, k, h)?;
            shannon_entropy(&m.f_outer) + shannon_entropy(&m.f_inner) + shannon_entropy(&m.f_sub)
        }
    };
    Ok(marginal_sum - shannon_entropy(f))
}

/// Average `f` over a subgroup: `(1/|K|) Σ_k f(g ∘ k)` on the right, `f(k ∘ g)` on the left.
pub fn symmetrize_pdf(f: &DiscretePdf, group: &FiniteGroup, k: &[usize], side: Side) -> Result<DiscretePdf> {
    check_len(f, group)?;
    let k = group.check_subgroup(k)?;
    let p = f.probs();
    let scale = 1.0 / k.len() as f64;
    let out = group
        .elements()
        .map(|g| {
            scale
                * pairwise_sum_by(k.len(), &|i| match side {
                    Side::Right => p[group.compose(g, k[i])],
                    Side::Left => p[group.compose(k[i], g)],
                })
        })
        .collect();
    DiscretePdf::new(out)
}

fn check_len(f: &DiscretePdf, group: &FiniteGroup) -> Result<()> {
    if f.len() != group.order() {
        return Err(Error::invalid(format!(
            "pdf has {} entries but the group has order {}",
            f.len(),
            group.order()
        )));
    }
    Ok(())
}

/// Entropies of a pdf on SE(n) and of its rotation and translation marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionSplit {
    pub joint: f64,
    pub rotation: f64,
    pub translation: f64,
    /// `rotation + translation - joint`.
    pub slack: f64,
}

/// Split a pdf on a tensor grid over SE(n) into its SO(n) = SE(n)/ℝⁿ and ℝⁿ marginals.
pub fn motion_group_split(f: &GridPdf) -> Result<MotionSplit> {
    let grid = f.grid();
    let GridDomain::Haar(domain) = grid.domain() else {
        return Err(Error::invalid("pdf is not on a motion group"));
    };
    let (rot_dim, rot_domain) = match domain.kind() {
        HaarKind::Se2 => (1, HaarDomain::so2()),
        HaarKind::Se3 => (3, HaarDomain::so3()),
        _ => return Err(Error::invalid("pdf is not on a motion group")),
    };
    let dim = grid.dim();
    let n = (grid.len() as f64).powf(1.0 / dim as f64).round() as usize;
    if n.pow(dim as u32) != grid.len() {
        return Err(Error::invalid("grid is not a tensor product with equal axis sizes"));
    }
    let rot_n = n.pow(rot_dim as u32);
    let tr_n = grid.len() / rot_n;
    let (lo, hi) = domain.translation_bounds();
    let rot_grid = QuadratureGrid::haar(&rot_domain, n)?;
    let tr_grid = QuadratureGrid::box_grid(lo, hi, n)?;
    let (w, v) = (grid.weights(), f.values());
    let rot_w = rot_grid.weights();
    let tr_w = tr_grid.weights();
    let rot_values: Vec<f64> = (0..rot_n)
        .map(|i| pairwise_sum_by(tr_n, &|j| tr_w[j] * v[i * tr_n + j]))
        .collect();
    let tr_values: Vec<f64> = (0..tr_n)
        .map(|j| pairwise_sum_by(rot_n, &|i| rot_w[i] * v[i * tr_n + j]))
        .collect();
    debug_assert!((w[0] - rot_w[0] * tr_w[0]).abs() <= 1e-12 * w[0].abs().max(1e-300));
    let rotation = continuous_entropy(&GridPdf::new(rot_grid, rot_values)?);
    let translation = continuous_entropy(&GridPdf::new(tr_grid, tr_values)?);
    let joint = continuous_entropy(f);
    Ok(MotionSplit {
        joint,
        rotation,
        translation,
        slack: rotation + translation - joint,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::f64::consts::{LN_2, PI};

    use proptest::prelude::*;
    use rand::Rng;

    use super::*;

    fn random_pdf(rng: &mut impl Rng, n: usize) -> DiscretePdf {
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
        DiscretePdf::from_weights(&w).unwrap()
    }

    #[test]
    fn z6_cosets() {
        let g = FiniteGroup::cyclic(6).unwrap();
        let d = coset_partition(&g, &[0, 2, 4], Side::Left).unwrap();
        assert_eq!(d.cosets(), &[vec![0, 2, 4], vec![1, 3, 5]]);
        assert_eq!(d.representatives(), &[0, 1]);
        let whole: Vec<usize> = g.elements().collect();
        assert_eq!(coset_partition(&g, &whole, Side::Right).unwrap().cosets().len(), 1);
        assert_eq!(coset_partition(&g, &[0], Side::Left).unwrap().cosets().len(), 6);
    }

    #[test]
    fn rejects_non_subgroups() {
        let g = FiniteGroup::cyclic(6).unwrap();
        let err = coset_partition(&g, &[0, 1, 5], Side::Left).unwrap_err();
        assert!(matches!(err, Error::NotClosed { .. }), "{err}");
        assert!(double_coset_partition(&g, &[0, 2, 4], &[0, 5]).is_err());
    }

    #[test]
    fn lagrange_and_partition_on_all_named_subgroups() {
        let g = FiniteGroup::octahedral().unwrap();
        for name in ["e", "c2", "c3", "c4", "g"] {
            let h = g.named_subgroup(name).unwrap();
            for side in [Side::Left, Side::Right] {
                let d = coset_partition(&g, &h, side).unwrap();
                assert_eq!(d.cosets().len() * h.len(), g.order());
                let all: BTreeSet<usize> = d.cosets().iter().flatten().copied().collect();
                assert_eq!(all.len(), g.order());
                for (i, c) in d.cosets().iter().enumerate() {
                    assert!(c.iter().all(|&x| d.coset_of(x) == i));
                    assert_eq!(d.representatives()[i], *c.iter().min().unwrap());
                }
            }
        }
    }

    #[test]
    fn double_coset_examples() {
        let g = FiniteGroup::octahedral().unwrap();
        let d = double_coset_partition(&g, &[0], &[0]).unwrap();
        assert!(d.double_cosets().iter().all(|c| c.len() == 1));
        let whole: Vec<usize> = g.elements().collect();
        let c3 = g.named_subgroup("c3").unwrap();
        assert_eq!(double_coset_partition(&g, &whole, &c3).unwrap().double_cosets().len(), 1);
    }

    #[test]
    fn octahedral_double_cosets_match_brute_force() {
        let g = FiniteGroup::octahedral().unwrap();
        let k = g.named_subgroup("c4").unwrap();
        let h = g.named_subgroup("c3").unwrap();
        let d = double_coset_partition(&g, &k, &h).unwrap();
        let mut oracle: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for x in g.elements() {
            let mut set = BTreeSet::new();
            for &a in &k {
                for &b in &h {
                    set.insert(g.compose(g.compose(a, x), b));
                }
            }
            oracle.insert(set);
        }
        let ours: BTreeSet<BTreeSet<usize>> = d
            .double_cosets()
            .iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        assert_eq!(ours, oracle);
        assert_eq!(d.double_cosets().iter().map(Vec::len).sum::<usize>(), 24);
        // sizes differ: |K||H| / |K ∩ cHc⁻¹|
        let sizes: BTreeSet<usize> = d.double_cosets().iter().map(Vec::len).collect();
        assert!(sizes.iter().all(|s| *s == 12 || *s == 4), "{sizes:?}");
        let total: f64 = (0..d.double_cosets().len()).map(|i| d.measure(i)).sum();
        assert!((total - 24.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_examples() {
        let g = FiniteGroup::cyclic(6).unwrap();
        let d = coset_partition(&g, &[0, 3], Side::Left).unwrap();
        let u = marginals(&DiscretePdf::uniform(6).unwrap(), &d).unwrap();
        assert!(u.f_coset.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        assert!(u.f_sub.probs().iter().all(|p| (p - 0.5).abs() < 1e-15));
        let delta = marginals(&DiscretePdf::delta(6, 0).unwrap(), &d).unwrap();
        assert_eq!(delta.f_coset.probs(), &[1.0, 0.0, 0.0]);
        assert_eq!(delta.f_sub.probs(), &[1.0, 0.0]);

        let mut rng = crate::rng::stream(1, 0);
        let f = random_pdf(&mut rng, 6);
        let m = marginals(&f, &d).unwrap();
        let p = f.probs();
        // reps 0,1,2 with cosets {r, r+3}
        for r in 0..3 {
            assert!((m.f_coset.probs()[r] - (p[r] + p[(r + 3) % 6])).abs() < 1e-15);
        }
        assert!((m.f_sub.probs()[0] - (p[0] + p[1] + p[2])).abs() < 1e-15);
        assert!((m.f_sub.probs()[1] - (p[3] + p[4] + p[5])).abs() < 1e-15);
    }

    #[test]
    fn slack_examples() {
        let g = FiniteGroup::octahedral().unwrap();
        let h = g.named_subgroup("c4").unwrap();
        let k = g.named_subgroup("c3").unwrap();
        let variants = [
            SubadditivityVariant::Coset { h: h.clone() },
            SubadditivityVariant::DoubleCoset { k: k.clone(), h: h.clone() },
        ];
        for v in &variants {
            let s = subadditivity_slack(&DiscretePdf::delta(24, 0).unwrap(), &g, v).unwrap();
            assert!(s.abs() < 1e-12, "{v:?} {s}");
        }
        let u = subadditivity_slack(&DiscretePdf::uniform(24).unwrap(), &g, &variants[0]).unwrap();
        assert!(u.abs() < 1e-12);
    }

    #[test]
    fn nested_requires_containment() {
        let g = FiniteGroup::octahedral().unwrap();
        let c4 = g.named_subgroup("c4").unwrap();
        let c2 = g.generate(&[g.compose(c4[1], c4[1])]);
        let c3 = g.named_subgroup("c3").unwrap();
        let f = DiscretePdf::uniform(24).unwrap();
        let ok = subadditivity_slack(&f, &g, &SubadditivityVariant::Nested { k: c4.clone(), h: c2 }).unwrap();
        assert!(ok.abs() < 1e-12);
        let err = subadditivity_slack(&f, &g, &SubadditivityVariant::Nested { k: c4, h: c3 });
        assert!(err.unwrap_err().is_invalid_argument());
    }

    #[test]
    fn nested_marginals_match_direct_factorization() {
        let g = FiniteGroup::cyclic(8).unwrap();
        let f = random_pdf(&mut crate::rng::stream(2, 0), 8);
        let m = nested_marginals(&f, &g, &[0, 2, 4, 6], &[0, 4]).unwrap();
        let p = f.probs();
        assert!((m.f_outer.probs()[0] - (p[0] + p[2] + p[4] + p[6])).abs() < 1e-15);
        assert!((m.f_inner.probs()[1] - (p[2] + p[6] + p[3] + p[7])).abs() < 1e-15);
        assert!((m.f_sub.probs()[1] - (p[4] + p[5] + p[6] + p[7])).abs() < 1e-15);
    }

    #[test]
    fn symmetrize_examples() {
        let g = FiniteGroup::cyclic(4).unwrap();
        let s = symmetrize_pdf(&DiscretePdf::delta(4, 0).unwrap(), &g, &[0, 2], Side::Right).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.0, 0.5, 0.0]);
        assert!((shannon_entropy(&s) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn symmetrization_leaves_coset_marginal_and_flattens_subgroup_marginal() {
        let g = FiniteGroup::octahedral().unwrap();
        let h = g.named_subgroup("c3").unwrap();
        let d = coset_partition(&g, &h, Side::Left).unwrap();
        let f = random_pdf(&mut crate::rng::stream(3, 0), 24);
        let s = symmetrize_pdf(&f, &g, &h, Side::Right).unwrap();
        let (a, b) = (marginals(&f, &d).unwrap(), marginals(&s, &d).unwrap());
        for (x, y) in a.f_coset.probs().iter().zip(b.f_coset.probs()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(b.f_sub.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn dump_json() {
        let g = FiniteGroup::cyclic(4).unwrap();
        let d = coset_partition(&g, &[0, 2], Side::Left).unwrap();
        let v = serde_json::to_value(d.dump()).unwrap();
        assert_eq!(v["cosets"], serde_json::json!([[0, 2], [1, 3]]));
        assert_eq!(v["representatives"], serde_json::json!([0, 1]));
        assert_eq!(v["subgroup"], serde_json::json!([0, 2]));
    }

    #[test]
    fn motion_group_split_of_product_density_has_zero_slack() {
        let d = HaarDomain::se2([0.0, 0.0], [1.0, 2.0]).unwrap();
        let grid = QuadratureGrid::haar(&d, 10).unwrap();
        let f = |q: &[f64]| (1.0 + 0.5 * q[0].cos()) / (2.0 * PI) * (0.5 + q[1]) / 2.0;
        let pdf = GridPdf::normalized(grid.clone(), f).unwrap();
        let split = motion_group_split(&pdf).unwrap();
        assert!(split.slack.abs() < 1e-9, "{split:?}");
        let coupled = GridPdf::normalized(grid, |q| 1.0 + 0.9 * (q[0] - 3.0 * q[1]).cos()).unwrap();
        assert!(motion_group_split(&coupled).unwrap().slack > 1e-3);
    }

    fn octahedral() -> &'static FiniteGroup {
        use std::sync::OnceLock;
        static G: OnceLock<FiniteGroup> = OnceLock::new();
        G.get_or_init(|| FiniteGroup::octahedral().unwrap())
    }

    fn pdf_strategy() -> impl Strategy<Value = DiscretePdf> {
        prop::collection::vec(0.0f64..1.0, 24).prop_filter_map("zero mass", |w| {
            let w: Vec<f64> = w.iter().map(|x| x * x * x).collect();
            DiscretePdf::from_weights(&w).ok()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn slack_is_nonnegative(f in pdf_strategy()) {
            let g = octahedral();
            let c4 = g.named_subgroup("c4").unwrap();
            let c3 = g.named_subgroup("c3").unwrap();
            let c2 = g.generate(&[g.compose(c4[1], c4[1])]);
            for v in [
                SubadditivityVariant::Coset { h: c4.clone() },
                SubadditivityVariant::DoubleCoset { k: c4.clone(), h: c3.clone() },
                SubadditivityVariant::Nested { k: c4.clone(), h: c2 },
            ] {
                prop_assert!(subadditivity_slack(&f, g, &v).unwrap() >= -1e-12);
            }
        }

        #[test]
        fn symmetrization_raises_entropy_and_is_idempotent(f in pdf_strategy(), q in pdf_strategy(), t in 0.0f64..1.0) {
            let g = octahedral();
            let k = g.named_subgroup("c4").unwrap();
            let s = symmetrize_pdf(&f, g, &k, Side::Right).unwrap();
            prop_assert!(shannon_entropy(&s) >= shannon_entropy(&f) - 1e-12);
            let again = symmetrize_pdf(&s, g, &k, Side::Right).unwrap();
            for (a, b) in s.probs().iter().zip(again.probs()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
            for x in g.elements() {
                for &y in &k {
                    prop_assert!((s.probs()[g.compose(x, y)] - s.probs()[x]).abs() < 1e-15);
                }
            }
            let mix = DiscretePdf::new(
                f.probs().iter().zip(q.probs()).map(|(a, b)| t * a + (1.0 - t) * b).collect(),
            ).unwrap();
            let sq = symmetrize_pdf(&q, g, &k, Side::Right).unwrap();
            let lhs = symmetrize_pdf(&mix, g, &k, Side::Right).unwrap();
            for i in g.elements() {
                let rhs = t * s.probs()[i] + (1.0 - t) * sq.probs()[i];
                prop_assert!((lhs.probs()[i] - rhs).abs() < 1e-14);
            }
        }
    }
}
