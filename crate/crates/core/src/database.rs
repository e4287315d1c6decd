// Copyright 2026 The boqc Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! Databases up to bit permutation and complementation.
//!
//! Bit positions are counted from the most significant bit: position 0 is qubit 0. The
//! one-based bit labels used in prose ("bit 1", "bit 3") map to positions through
//! [`label_to_position`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Database {
    pub n: usize,
    members: Vec<usize>,
}

impl Database {
    pub fn new(n: usize, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::InvalidInstance("empty database".into()));
        }
        if let Some(&bad) = members.iter().find(|&&m| m >= 1 << n) {
            return Err(Error::BasisOutOfRange { index: bad, dim: 1 << n });
        }
        Ok(Database { n, members })
    }

    /// Parses the digit-string notation, e.g. `"01234"`.
    pub fn parse(n: usize, digits: &str) -> Result<Self> {
        let members = digits
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Format(format!("bad database string {digits:?}")))?;
        Self::new(n, members)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn full(n: usize) -> Self {
        Database { n, members: (0..1 << n).collect() }
    }
}

impl std::fmt::Display for Database {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sep = if self.n > 3 { "," } else { "" };
        let parts: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(sep))
    }
}

/// Moves the bit at position `i` to position `perm[i]`, then XORs with `mask`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymmetryOp {
    pub perm: Vec<usize>,
    pub mask: usize,
}

impl SymmetryOp {
    pub fn new(perm: Vec<usize>, mask: usize) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidInstance(format!("not a permutation: {perm:?}")));
            }
            seen[p] = true;
        }
        if mask >> perm.len() != 0 {
            return Err(Error::InvalidInstance(format!("mask {mask} wider than {} bits", perm.len())));
        }
        Ok(SymmetryOp { perm, mask })
    }

    pub fn identity(n: usize) -> Self {
        SymmetryOp { perm: (0..n).collect(), mask: 0 }
    }

    pub fn apply_index(&self, x: usize) -> usize {
        let n = self.perm.len();
        let mut y = 0;
        for (i, &p) in self.perm.iter().enumerate() {
            if x >> (n - 1 - i) & 1 == 1 {
                y |= 1 << (n - 1 - p);
            }
        }
        y ^ self.mask
    }

    pub fn inverse(&self) -> Self {
        let n = self.perm.len();
        let mut inv = vec![0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        let inv_op = SymmetryOp { perm: inv, mask: 0 };
        // (x ↦ P x ⊕ m)⁻¹ = (y ↦ P⁻¹ y ⊕ P⁻¹ m)
        let mask = inv_op.apply_index(self.mask);
        SymmetryOp { perm: inv_op.perm, mask }
    }
}

/// Position of the one-based, most-significant-first bit label.
pub fn label_to_position(label: usize) -> usize {
    label - 1
}

/// Mask with the bits at the given positions set.
pub fn mask_of(n: usize, positions: &[usize]) -> usize {
    positions.iter().fold(0, |m, &p| m | 1 << (n - 1 - p))
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k.is_multiple_of(2) {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// All `n!·2^n` operations.
pub fn symmetry_group(n: usize) -> Vec<SymmetryOp> {
    let perms = all_permutations(n);
    let mut ops = Vec::with_capacity(perms.len() << n);
    for p in perms {
        for mask in 0..1 << n {
            ops.push(SymmetryOp { perm: p.clone(), mask });
        }
    }
    ops
}

pub fn apply_symmetry(db: &Database, op: &SymmetryOp) -> Database {
    let mut members: Vec<usize> = db.members.iter().map(|&x| op.apply_index(x)).collect();
    members.sort_unstable();
    Database { n: db.n, members }
}

pub fn canonical_form(db: &Database) -> Database {
    symmetry_group(db.n)
        .iter()
        .map(|op| apply_symmetry(db, op))
        .min_by(|a, b| a.members.cmp(&b.members))
        .expect("group is nonempty")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    pub representative: Database,
    pub members: Vec<Database>,
}

/// Partition of all size-`big_n` subsets of `{0..2^n}` by canonical form, sorted by
/// representative.
pub fn equivalence_classes(n: usize, big_n: usize) -> Vec<EquivalenceClass> {
    let dim = 1usize << n;
    let ops = symmetry_group(n);
    let mut classes: BTreeMap<Vec<usize>, Vec<Database>> = BTreeMap::new();
    for members in combinations(dim, big_n) {
        let db = Database { n, members };
        let rep = ops.iter().map(|op| apply_symmetry(&db, op).members).min().expect("group is nonempty");
        classes.entry(rep).or_default().push(db);
    }
    classes
        .into_iter()
        .map(|(rep, members)| EquivalenceClass { representative: Database { n, members: rep }, members })
        .collect()
}

fn combinations(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > dim {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == dim - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn stabilizer_perms(db: &Database) -> Vec<Vec<usize>> {
    all_permutations(db.n)
        .into_iter()
        .filter(|p| apply_symmetry(db, &SymmetryOp { perm: p.clone(), mask: 0 }) == *db)
        .collect()
}

/// Canonical databases for three bits and `N = 5..8`.
pub fn representative_set() -> Vec<Database> {
    ["01234", "01247", "01256", "012345", "012347", "012567", "0123456", "01234567"]
        .iter()
        .map(|s| Database::parse(3, s).expect("literal"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn db(s: &str) -> Database {
        Database::parse(3, s).unwrap()
    }

    #[test]
    fn worked_example() {
        // Swap bits 1 and 2, complement bit 3.
        let op = SymmetryOp::new(vec![1, 0, 2], mask_of(3, &[label_to_position(3)])).unwrap();
        let images: Vec<usize> = db("01234").members().iter().map(|&x| op.apply_index(x)).collect();
        assert_eq!(images, vec![1, 0, 5, 4, 3]);
        assert_eq!(canonical_form(&db("01345")), db("01234"));
    }

    #[test]
    fn identity_and_inverse() {
        let d = db("01256");
        assert_eq!(apply_symmetry(&d, &SymmetryOp::identity(3)), d);
        for op in symmetry_group(3) {
            assert_eq!(apply_symmetry(&apply_symmetry(&d, &op), &op.inverse()), d);
        }
    }

    #[test]
    fn representatives_are_orbit_minimal() {
        for d in representative_set() {
            // Brute force over the 48 operations.
            for op in symmetry_group(3) {
                assert!(apply_symmetry(&d, &op).members() >= d.members(), "{d}");
            }
            assert_eq!(canonical_form(&d), d);
        }
    }

    fn sizes(n: usize, big_n: usize) -> Vec<usize> {
        equivalence_classes(n, big_n).iter().map(|c| c.members.len()).collect()
    }

    #[test]
    fn class_sizes() {
        assert_eq!(sizes(3, 5), vec![24, 8, 24]);
        // 012567 misses the antipodal pair 3, 4; there are four such pairs.
        assert_eq!(sizes(3, 6), vec![12, 12, 4]);
        assert_eq!(sizes(3, 7), vec![8]);
        assert_eq!(sizes(3, 8), vec![1]);
        let reps: Vec<Database> =
            (5..=8).flat_map(|k| equivalence_classes(3, k).into_iter().map(|c| c.representative)).collect();
        assert_eq!(reps, representative_set());
    }

    #[test]
    fn class_sizes_sum_to_binomial() {
        for n in 1..=3 {
            let dim = 1usize << n;
            let mut binom = 1usize;
            for k in 0..=dim {
                if k > 0 {
                    binom = binom * (dim - k + 1) / k;
                    assert_eq!(sizes(n, k).iter().sum::<usize>(), binom);
                }
            }
        }
    }

    #[test]
    fn stabilizers() {
        assert_eq!(stabilizer_perms(&db("01247")).len(), 6);
        // Identity plus the swap of bits 2 and 3.
        assert_eq!(stabilizer_perms(&db("01234")), vec![vec![0, 1, 2], vec![0, 2, 1]]);
        assert_eq!(stabilizer_perms(&db("012345")), vec![vec![0, 1, 2], vec![1, 0, 2]]);
        assert_eq!(stabilizer_perms(&Database::full(3)).len(), 6);
    }

    proptest! {
        #[test]
        fn canonical_is_orbit_constant(bits in 1u8..=255, op_idx in 0usize..48) {
            let members: Vec<usize> = (0..8).filter(|i| bits >> i & 1 == 1).collect();
            let d = Database::new(3, members).unwrap();
            let op = &symmetry_group(3)[op_idx];
            let c = canonical_form(&d);
            prop_assert_eq!(&c, &canonical_form(&apply_symmetry(&d, op)));
            prop_assert_eq!(canonical_form(&c), c);
        }
    }
}
