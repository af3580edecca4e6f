use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::motion::rotation_about;
use crate::{Error, Result};

const MATRIX_TOL: f64 = 1e-9;

/// Families of finite rotation groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Cyclic,
    Dihedral,
    Tetrahedral,
    Octahedral,
    Icosahedral,
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cyclic" => Ok(GroupKind::Cyclic),
            "dihedral" => Ok(GroupKind::Dihedral),
            "tetrahedral" => Ok(GroupKind::Tetrahedral),
            "octahedral" => Ok(GroupKind::Octahedral),
            "icosahedral" => Ok(GroupKind::Icosahedral),
            other => Err(Error::invalid(format!("unknown group kind `{other}`"))),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupKind::Cyclic => "cyclic",
            GroupKind::Dihedral => "dihedral",
            GroupKind::Tetrahedral => "tetrahedral",
            GroupKind::Octahedral => "octahedral",
            GroupKind::Icosahedral => "icosahedral",
        };
        f.write_str(s)
    }
}

/// A finite group given by its full composition table.
///
/// Elements are the indices `0..order`, with `0` the identity. When the group
/// is a rotation group each element also carries its 3×3 matrix, and the
/// table agrees with matrix multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<usize>,
    inverses: Vec<usize>,
    matrices: Option<Vec<Matrix3<f64>>>,
}

/// Wire format of a [`FiniteGroup`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupJson {
    pub name: String,
    pub order: usize,
    /// Row-major: `table[a * order + b] = a ∘ b`.
    pub table: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<[[f64; 3]; 3]>>,
}

impl FiniteGroup {
    /// Build from a row-major table and check every group axiom.
    pub fn from_table(
        name: impl Into<String>,
        order: usize,
        table: Vec<usize>,
        matrices: Option<Vec<Matrix3<f64>>>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("a group has at least one element"));
        }
        if table.len() != order * order {
            return Err(Error::invalid(format!(
                "table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if let Some((i, &x)) = table.iter().enumerate().find(|(_, &x)| x >= order) {
            return Err(Error::invalid(format!(
                "closure: table entry ({}, {}) = {x} is not an element",
                i / order,
                i % order
            )));
        }
        let mut g = FiniteGroup {
            name: name.into(),
            order,
            table,
            inverses: vec![0; order],
            matrices: None,
        };
        for a in 0..order {
            if g.compose(0, a) != a || g.compose(a, 0) != a {
                return Err(Error::invalid(format!("identity: 0 does not fix element {a}")));
            }
        }
        for a in 0..order {
            g.inverses[a] = (0..order)
                .find(|&b| g.compose(a, b) == 0 && g.compose(b, a) == 0)
                .ok_or_else(|| Error::invalid(format!("inverses: element {a} has no inverse")))?;
        }
        g.check_associativity()?;
        if let Some(ms) = matrices {
            g.attach_matrices(ms)?;
        }
        Ok(g)
    }

    /// Build from a list of rotation matrices (identity first) closed under products.
    pub fn from_matrices(name: impl Into<String>, matrices: Vec<Matrix3<f64>>) -> Result<Self> {
        let n = matrices.len();
        if n == 0 || !matrices_close(&matrices[0], &Matrix3::identity()) {
            return Err(Error::invalid("first matrix must be the identity"));
        }
        let mut table = Vec::with_capacity(n * n);
        for a in &matrices {
            for b in &matrices {
                let p = a * b;
                let idx = matrices
                    .iter()
                    .position(|m| matrices_close(m, &p))
                    .ok_or_else(|| Error::invalid("matrix set is not closed under products"))?;
                table.push(idx);
            }
        }
        FiniteGroup::from_table(name, n, table, Some(matrices))
    }

    /// The closure of a set of rotation generators, identity first then BFS order.
    pub fn generated_by(name: impl Into<String>, generators: &[Matrix3<f64>]) -> Result<Self> {
        const LIMIT: usize = 10_000;
        let mut elems = vec![Matrix3::identity()];
        let mut frontier = 0;
        while frontier < elems.len() {
            let a = elems[frontier];
            frontier += 1;
            for g in generators {
                let p = a * g;
                if !elems.iter().any(|m| matrices_close(m, &p)) {
                    elems.push(p);
                    if elems.len() > LIMIT {
                        return Err(Error::invalid("generators do not produce a finite group"));
                    }
                }
            }
        }
        FiniteGroup::from_matrices(name, elems)
    }

    /// Cyclic group `C_n` of rotations about the z axis; element `k` is rotation by `2πk/n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("cyclic group needs n >= 1"));
        }
        let mats = (0..n)
            .map(|k| rotation_about(Vector3::z(), 2.0 * PI * k as f64 / n as f64))
            .collect();
        FiniteGroup::from_matrices(format!("C{n}"), mats)
    }

    /// Dihedral group `D_n` realized in SO(3): elements `0..n` are the z rotations
    /// `r^k`, elements `n..2n` are `r^k s` with `s` the half turn about x.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dihedral group needs n >= 1"));
        }
        let s = rotation_about(Vector3::x(), PI);
        let rots: Vec<_> = (0..n)
            .map(|k| rotation_about(Vector3::z(), 2.0 * PI * k as f64 / n as f64))
            .collect();
        let mut mats = rots.clone();
        mats.extend(rots.iter().map(|r| r * s));
        FiniteGroup::from_matrices(format!("D{n}"), mats)
    }

    /// Rotation group of the tetrahedron (order 12).
    pub fn tetrahedral() -> Result<Self> {
        FiniteGroup::generated_by(
            "T",
            &[
                rotation_about(Vector3::new(1.0, 1.0, 1.0), 2.0 * PI / 3.0),
                rotation_about(Vector3::z(), PI),
            ],
        )
    }

    /// Rotation group of the cube (order 24).
    pub fn octahedral() -> Result<Self> {
        FiniteGroup::generated_by(
            "O",
            &[
                rotation_about(Vector3::z(), PI / 2.0),
                rotation_about(Vector3::new(1.0, 1.0, 1.0), 2.0 * PI / 3.0),
            ],
        )
    }

    /// Rotation group of the icosahedron (order 60), with a five-fold axis
    /// through the vertex `(0, 1, φ)`.
    pub fn icosahedral() -> Result<Self> {
        FiniteGroup::generated_by(
            "I",
            &[
                rotation_about(five_fold_axis(), 2.0 * PI / 5.0),
                rotation_about(Vector3::z(), PI),
            ],
        )
    }

    /// Construct by family. `n` is used only by the cyclic and dihedral kinds.
    pub fn construct(kind: GroupKind, n: usize) -> Result<Self> {
        match kind {
            GroupKind::Cyclic => FiniteGroup::cyclic(n),
            GroupKind::Dihedral => FiniteGroup::dihedral(n),
            GroupKind::Tetrahedral => FiniteGroup::tetrahedral(),
            GroupKind::Octahedral => FiniteGroup::octahedral(),
            GroupKind::Icosahedral => FiniteGroup::icosahedral(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// `a ∘ b`.
    #[inline]
    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn matrices(&self) -> Option<&[Matrix3<f64>]> {
        self.matrices.as_deref()
    }

    pub fn matrix(&self, a: usize) -> Option<&Matrix3<f64>> {
        self.matrices.as_ref().map(|m| &m[a])
    }

    /// Re-check every axiom: closure, identity, inverses and associativity.
    ///
    /// Associativity is exhaustive for groups of order ≤ 60; larger groups
    /// check every triple whose first two entries come from an evenly strided
    /// sample of 60 elements.
    pub fn validate(&self) -> Result<()> {
        let again = FiniteGroup::from_table(
            self.name.clone(),
            self.order,
            self.table.clone(),
            self.matrices.clone(),
        )?;
        debug_assert_eq!(again.inverses, self.inverses);
        Ok(())
    }

    fn check_associativity(&self) -> Result<()> {
        let n = self.order;
        let sample: Vec<usize> = if n <= 60 {
            (0..n).collect()
        } else {
            (0..60).map(|i| i * n / 60).collect()
        };
        for &a in &sample {
            for &b in &sample {
                let ab = self.compose(a, b);
                for c in 0..n {
                    if self.compose(ab, c) != self.compose(a, self.compose(b, c)) {
                        return Err(Error::invalid(format!(
                            "associativity fails for ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn attach_matrices(&mut self, ms: Vec<Matrix3<f64>>) -> Result<()> {
        if ms.len() != self.order {
            return Err(Error::invalid(format!(
                "{} matrices for a group of order {}",
                ms.len(),
                self.order
            )));
        }
        for (i, m) in ms.iter().enumerate() {
            let orth = (m * m.transpose() - Matrix3::identity()).abs().max();
            if orth > 1e-10 || (m.determinant() - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(format!("matrix {i} is not a rotation")));
            }
        }
        for a in 0..self.order {
            for b in 0..self.order {
                if !matrices_close(&(ms[a] * ms[b]), &ms[self.compose(a, b)]) {
                    return Err(Error::invalid(format!(
                        "matrix product of {a} and {b} disagrees with the table"
                    )));
                }
            }
        }
        self.matrices = Some(ms);
        Ok(())
    }

    /// Check that `ids` form a subgroup; returns them sorted and deduplicated.
    pub fn check_subgroup(&self, ids: &[usize]) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = ids.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= self.order) {
            return Err(Error::invalid(format!("{bad} is not an element of {}", self.name)));
        }
        if !set.contains(&0) {
            return Err(Error::invalid("subset does not contain the identity"));
        }
        for &a in &set {
            if !set.contains(&self.inverse(a)) {
                return Err(Error::invalid(format!(
                    "not a subgroup: inverse {} of {a} is outside the subset",
                    self.inverse(a)
                )));
            }
            for &b in &set {
                let product = self.compose(a, b);
                if !set.contains(&product) {
                    return Err(Error::NotClosed { a, b, product });
                }
            }
        }
        Ok(set.into_iter().collect())
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn generate(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = BTreeSet::from([0]);
        let mut stack = vec![0];
        while let Some(a) = stack.pop() {
            for &g in gens {
                let p = self.compose(a, g);
                if set.insert(p) {
                    stack.push(p);
                }
            }
        }
        set.into_iter().collect()
    }

    /// The element acting as rotation by `angle` about `axis`, if present.
    pub fn find_rotation(&self, axis: Vector3<f64>, angle: f64) -> Option<usize> {
        let target = rotation_about(axis, angle);
        self.matrices
            .as_ref()?
            .iter()
            .position(|m| matrices_close(m, &target))
    }

    /// Cyclic subgroup of `fold`-fold rotations about `axis`, if it lies in the group.
    pub fn axis_subgroup(&self, axis: Vector3<f64>, fold: usize) -> Option<Vec<usize>> {
        if fold == 0 {
            return None;
        }
        let g = self.find_rotation(axis, 2.0 * PI / fold as f64)?;
        Some(self.generate(&[g]))
    }

    /// Resolve a subgroup by name.
    ///
    /// `trivial` (or `e`), `whole` (or `g`), and `cN` for an N-fold cyclic
    /// subgroup. `cN` looks for the axis in the order z, (1,1,1), the
    /// icosahedral five-fold axis, and x.
    pub fn named_subgroup(&self, name: &str) -> Result<Vec<usize>> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "trivial" | "e" => return Ok(vec![0]),
            "whole" | "g" => return Ok(self.elements().collect()),
            _ => {}
        }
        let fold: usize = lower
            .strip_prefix('c')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::invalid(format!("unknown subgroup name `{name}`")))?;
        if fold == 1 {
            return Ok(vec![0]);
        }
        let axes = [
            Vector3::z(),
            Vector3::new(1.0, 1.0, 1.0),
            five_fold_axis(),
            Vector3::x(),
        ];
        axes.iter()
            .find_map(|a| self.axis_subgroup(*a, fold))
            .ok_or_else(|| {
                Error::invalid(format!("{} has no {fold}-fold subgroup on a standard axis", self.name))
            })
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            name: self.name.clone(),
            order: self.order,
            table: self.table.clone(),
            matrices: self.matrices.as_ref().map(|ms| {
                ms.iter()
                    .map(|m| std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
                    .collect()
            }),
        }
    }

    pub fn from_json(json: GroupJson) -> Result<Self> {
        let mats = json.matrices.map(|ms| {
            ms.iter()
                .map(|rows| Matrix3::from_fn(|i, j| rows[i][j]))
                .collect()
        });
        FiniteGroup::from_table(json.name, json.order, json.table, mats)
    }
}

impl Serialize for FiniteGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = GroupJson::deserialize(d)?;
        FiniteGroup::from_json(json).map_err(serde::de::Error::custom)
    }
}

fn five_fold_axis() -> Vector3<f64> {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    Vector3::new(0.0, 1.0, phi)
}

fn matrices_close(a: &Matrix3<f64>, b: &Matrix3<f64>) -> bool {
    (a - b).abs().max() < MATRIX_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_groups() -> Vec<FiniteGroup> {
        let mut gs = vec![
            FiniteGroup::tetrahedral().unwrap(),
            FiniteGroup::octahedral().unwrap(),
            FiniteGroup::icosahedral().unwrap(),
        ];
        for n in 1..=7 {
            gs.push(FiniteGroup::cyclic(n).unwrap());
            gs.push(FiniteGroup::dihedral(n).unwrap());
        }
        gs
    }

    #[test]
    fn orders() {
        assert_eq!(FiniteGroup::octahedral().unwrap().order(), 24);
        assert_eq!(FiniteGroup::icosahedral().unwrap().order(), 60);
        assert_eq!(FiniteGroup::tetrahedral().unwrap().order(), 12);
        assert_eq!(FiniteGroup::cyclic(5).unwrap().order(), 5);
        assert_eq!(FiniteGroup::dihedral(5).unwrap().order(), 10);
        let trivial = FiniteGroup::cyclic(1).unwrap();
        assert_eq!(trivial.order(), 1);
        assert_eq!(trivial.compose(0, 0), 0);
    }

    #[test]
    fn every_group_satisfies_axioms_and_matrix_table() {
        for g in all_groups() {
            g.validate().unwrap();
            let ms = g.matrices().expect("rotation groups carry matrices");
            for m in ms {
                assert!((m * m.transpose() - Matrix3::identity()).abs().max() < 1e-10);
                assert!((m.determinant() - 1.0).abs() < 1e-10);
            }
            for a in g.elements() {
                for b in g.elements() {
                    assert!(matrices_close(&(ms[a] * ms[b]), &ms[g.compose(a, b)]));
                }
            }
        }
    }

    #[test]
    fn cyclic_ids_follow_addition() {
        let g = FiniteGroup::cyclic(6).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(g.compose(a, b), (a + b) % 6);
            }
        }
    }

    #[test]
    fn unknown_kind_is_invalid_argument() {
        let err = "pentagonal".parse::<GroupKind>().unwrap_err();
        assert!(err.is_invalid_argument());
        assert_eq!("Octahedral".parse::<GroupKind>().unwrap(), GroupKind::Octahedral);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(FiniteGroup::cyclic(0).is_err());
        assert!(FiniteGroup::dihedral(0).is_err());
    }

    #[test]
    fn bad_tables_rejected() {
        // entry out of range
        assert!(FiniteGroup::from_table("x", 2, vec![0, 1, 1, 2], None).is_err());
        // no identity at 0
        assert!(FiniteGroup::from_table("x", 2, vec![1, 0, 0, 1], None).is_err());
        // not associative: a latin square with identity 0 that is not a group
        let n = 5;
        #[rustfmt::skip]
        let t = vec![
            0, 1, 2, 3, 4,
            1, 0, 3, 4, 2,
            2, 4, 0, 1, 3,
            3, 2, 4, 0, 1,
            4, 3, 1, 2, 0,
        ];
        let err = FiniteGroup::from_table("loop", n, t, None).unwrap_err();
        assert!(err.to_string().contains("associativity"), "{err}");
    }

    #[test]
    fn named_subgroups_of_octahedral() {
        let g = FiniteGroup::octahedral().unwrap();
        let c4 = g.named_subgroup("c4").unwrap();
        let c3 = g.named_subgroup("c3").unwrap();
        let c2 = g.named_subgroup("c2").unwrap();
        assert_eq!(c4.len(), 4);
        assert_eq!(c3.len(), 3);
        assert_eq!(c2.len(), 2);
        assert!(c2.iter().all(|x| c4.contains(x)));
        for h in [&c4, &c3, &c2] {
            g.check_subgroup(h).unwrap();
        }
        assert!(g.named_subgroup("c5").is_err());
        assert_eq!(
            FiniteGroup::icosahedral().unwrap().named_subgroup("c5").unwrap().len(),
            5
        );
    }

    #[test]
    fn subgroup_check_names_violating_pair() {
        let g = FiniteGroup::cyclic(6).unwrap();
        match g.check_subgroup(&[0, 1, 5]) {
            Err(Error::NotClosed { a, b, product }) => {
                assert_eq!(g.compose(a, b), product);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(g.check_subgroup(&[1, 2]).is_err());
        assert_eq!(g.check_subgroup(&[4, 0, 2]).unwrap(), vec![0, 2, 4]);
    }

    #[test]
    fn json_round_trip() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: FiniteGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back.order(), 6);
        assert_eq!(back.to_json().table, g.to_json().table);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["order"], 6);
        assert!(v["matrices"].is_array());
    }
}
