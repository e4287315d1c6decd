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

//! Two-qubit gate network topologies and their parametrized instances.
//!
//! On three wires a topology is a string over `{1, 2, 3}`: each label names the wire a gate
//! leaves untouched, so `3` acts on wires 0 and 1. The lower wire of the pair is the CNOT
//! control. On two wires the only label is `1`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{hadamard, phase, u_matrix, Matrix, StateVector, C64};

/// Longest run of gates on one pair that cannot be shortened.
pub const MAX_RUN: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Topology {
    pub wires: usize,
    pub slots: Vec<u8>,
}

impl Topology {
    pub fn new(wires: usize, slots: Vec<u8>) -> Result<Self> {
        let max_label = match wires {
            2 => 1,
            3 => 3,
            _ => return Err(Error::Format(format!("topologies need 2 or 3 wires, got {wires}"))),
        };
        if let Some(bad) = slots.iter().find(|&&l| l == 0 || l > max_label) {
            return Err(Error::Format(format!("label {bad} invalid on {wires} wires")));
        }
        Ok(Topology { wires, slots })
    }

    /// Inverse of `Display`; `"()"` is the empty topology.
    pub fn parse(wires: usize, s: &str) -> Result<Self> {
        if s == "()" {
            return Self::new(wires, Vec::new());
        }
        let slots = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Format(format!("bad topology string {s:?}")))?;
        Self::new(wires, slots)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// `(control, target)` wires of the gate at `slot`.
    pub fn pair(&self, slot: usize) -> (usize, usize) {
        label_pair(self.wires, self.slots[slot])
    }

    pub fn max_run(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        for (i, &l) in self.slots.iter().enumerate() {
            run = if i > 0 && self.slots[i - 1] == l { run + 1 } else { 1 };
            best = best.max(run);
        }
        best
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slots.is_empty() {
            return write!(f, "()");
        }
        for l in &self.slots {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

pub fn label_pair(wires: usize, label: u8) -> (usize, usize) {
    if wires == 2 {
        return (0, 1);
    }
    match label {
        1 => (1, 2),
        2 => (0, 2),
        _ => (0, 1),
    }
}

fn relabel(wires: usize, label: u8, perm: &[usize]) -> u8 {
    if wires == 2 {
        return label;
    }
    perm[label as usize - 1] as u8 + 1
}

/// Which equivalences may merge two topologies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reductions {
    /// Wire permutations; the identity is implied.
    pub perms: Vec<Vec<usize>>,
    pub time_reversal: bool,
    pub swap_conjugation: bool,
}

impl Reductions {
    pub fn all(perms: Vec<Vec<usize>>) -> Self {
        Reductions { perms, time_reversal: true, swap_conjugation: true }
    }
}

fn neighbors(t: &Topology, red: &Reductions) -> Vec<Vec<u8>> {
    let s = &t.slots;
    let mut out = Vec::new();
    if red.time_reversal {
        out.push(s.iter().rev().copied().collect());
    }
    for p in &red.perms {
        out.push(s.iter().map(|&l| relabel(t.wires, l, p)).collect());
    }
    if red.swap_conjugation && t.wires == 3 {
        // Swapping the wires of a pair between two gates on that pair.
        for i in 0..s.len() {
            for j in i + 2..s.len() {
                if s[i] != s[j] {
                    continue;
                }
                let pivot = s[i];
                let mut v = s.clone();
                for l in v.iter_mut().take(j).skip(i + 1) {
                    if *l != pivot {
                        *l = 6 - pivot - *l;
                    }
                }
                out.push(v);
            }
        }
    }
    out
}

fn orbit(t: &Topology, red: &Reductions) -> BTreeSet<Vec<u8>> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(t.slots.clone());
    queue.push_back(t.slots.clone());
    while let Some(s) = queue.pop_front() {
        let cur = Topology { wires: t.wires, slots: s };
        for nb in neighbors(&cur, red) {
            if seen.insert(nb.clone()) {
                queue.push_back(nb);
            }
        }
    }
    seen
}

pub fn canonical_with(t: &Topology, red: &Reductions) -> Topology {
    let slots = orbit(t, red).into_iter().next().expect("orbit contains t");
    Topology { wires: t.wires, slots }
}

/// Lexicographically smallest string equivalent to `t` under all reductions.
pub fn canonical_topology(t: &Topology, preserved_perms: &[Vec<usize>]) -> Topology {
    canonical_with(t, &Reductions::all(preserved_perms.to_vec()))
}

/// One representative per class of length-`l` topologies. Classes containing a run longer
/// than [`MAX_RUN`] are dropped, since such a network shortens to a smaller `l`.
pub fn enumerate_with(wires: usize, l: usize, red: &Reductions) -> Vec<Topology> {
    let max_label: u8 = if wires == 2 { 1 } else { 3 };
    let mut reps = BTreeSet::new();
    let mut visited = BTreeSet::new();
    let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == l {
            if visited.contains(&prefix) {
                continue;
            }
            let class = orbit(&Topology { wires, slots: prefix }, red);
            let reducible = class.iter().any(|s| Topology { wires, slots: s.clone() }.max_run() > MAX_RUN);
            if !reducible {
                reps.insert(class.iter().next().expect("nonempty").clone());
            }
            visited.extend(class);
            continue;
        }
        for label in (1..=max_label).rev() {
            let n = prefix.len();
            if n >= MAX_RUN && prefix[n - MAX_RUN..].iter().all(|&x| x == label) {
                continue;
            }
            let mut next = prefix.clone();
            next.push(label);
            stack.push(next);
        }
    }
    reps.into_iter().map(|slots| Topology { wires, slots }).collect()
}

/// Three-wire enumeration under all reductions.
pub fn enumerate_topologies(l: usize, preserved_perms: &[Vec<usize>]) -> Vec<Topology> {
    enumerate_with(3, l, &Reductions::all(preserved_perms.to_vec()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateFamily {
    /// CNOT gates dressed with `U(α,β,γ)`.
    Cnot,
    /// CPHASE gates dressed with `J(γ)J(β)J(α)`, where `J(x) = H·diag(1, e^{ix})`.
    CphaseRz,
}

/// A topology plus its single-qubit slots: one per wire up front, then one on each wire of
/// every two-qubit gate, right after it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateNetwork {
    pub topology: Topology,
    pub family: GateFamily,
}

/// Where a single-qubit slot acts and where its parameters start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Single { wire: usize, offset: usize },
    Entangle { control: usize, target: usize },
}

impl GateNetwork {
    pub fn new(topology: Topology, family: GateFamily) -> Self {
        GateNetwork { topology, family }
    }

    pub fn wires(&self) -> usize {
        self.topology.wires
    }

    /// `6l + 9` on three wires, `6l + 6` on two.
    pub fn param_count(&self) -> usize {
        3 * (self.wires() + 2 * self.topology.len())
    }

    pub fn steps(&self) -> Vec<Step> {
        let mut steps = Vec::with_capacity(self.wires() + 3 * self.topology.len());
        let mut offset = 0;
        for wire in 0..self.wires() {
            steps.push(Step::Single { wire, offset });
            offset += 3;
        }
        for slot in 0..self.topology.len() {
            let (control, target) = self.topology.pair(slot);
            steps.push(Step::Entangle { control, target });
            for wire in [control, target] {
                steps.push(Step::Single { wire, offset });
                offset += 3;
            }
        }
        steps
    }

    pub fn single_matrix(&self, p: &[f64]) -> [[C64; 2]; 2] {
        match self.family {
            GateFamily::Cnot => u_matrix(p[0], p[1], p[2]),
            GateFamily::CphaseRz => {
                let j = |x: f64| mul2(&hadamard(), &phase(x));
                mul2(&j(p[2]), &mul2(&j(p[1]), &j(p[0])))
            }
        }
    }

    pub fn apply(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ParamCount { expected: self.param_count(), got: params.len() });
        }
        for step in self.steps() {
            match step {
                Step::Single { wire, offset } => {
                    state.apply_matrix_mut(wire, &self.single_matrix(&params[offset..offset + 3]))?
                }
                Step::Entangle { control, target } => match self.family {
                    GateFamily::Cnot => state.apply_cnot_mut(control, target)?,
                    GateFamily::CphaseRz => state.apply_cphase_mut(control, target)?,
                },
            }
        }
        Ok(())
    }
}

pub fn mul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn instantiate(net: &GateNetwork, params: &[f64]) -> Result<Matrix> {
    if params.len() != net.param_count() {
        return Err(Error::ParamCount { expected: net.param_count(), got: params.len() });
    }
    crate::quantum::unitary_of(net.wires(), |s| net.apply(params, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::unitarity_error;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn s3() -> Vec<Vec<usize>> {
        crate::database::all_permutations(3)
    }

    fn t(s: &str) -> Topology {
        Topology::parse(3, s).unwrap()
    }

    #[test]
    fn worked_equalities() {
        let full = s3();
        let c = canonical_topology(&t("12123"), &full);
        for s in ["32121", "13123", "12323", "12313"] {
            assert_eq!(canonical_topology(&t(s), &full), c, "{s}");
        }
        // Time reversal alone relates the first pair.
        let rev = Reductions { perms: vec![], time_reversal: true, swap_conjugation: false };
        assert_eq!(canonical_with(&t("32121"), &rev), canonical_with(&t("12123"), &rev));
        assert_eq!(canonical_topology(&t("2"), &[]), t("2"));
    }

    #[test]
    fn single_gate_classes() {
        assert_eq!(enumerate_topologies(1, &[]).len(), 3);
        assert_eq!(enumerate_topologies(1, &s3()).len(), 1);
        assert_eq!(enumerate_topologies(0, &s3()), vec![Topology { wires: 3, slots: vec![] }]);
    }

    /// Union-find over every raw string, merging along each generator.
    fn brute_force_count(l: usize, red: &Reductions) -> usize {
        let strings: Vec<Vec<u8>> = (0..3usize.pow(l as u32))
            .map(|mut k| {
                let mut v = vec![0u8; l];
                for x in v.iter_mut().rev() {
                    *x = (k % 3) as u8 + 1;
                    k /= 3;
                }
                v
            })
            .collect();
        let index: HashMap<Vec<u8>, usize> = strings.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut parent: Vec<usize> = (0..strings.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (i, s) in strings.iter().enumerate() {
            for nb in neighbors(&Topology { wires: 3, slots: s.clone() }, red) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, index[&nb]));
                parent[a] = b;
            }
        }
        let mut bad = BTreeSet::new();
        for (i, s) in strings.iter().enumerate() {
            if (Topology { wires: 3, slots: s.clone() }).max_run() > MAX_RUN {
                bad.insert(find(&mut parent, i));
            }
        }
        let roots: BTreeSet<usize> = (0..strings.len()).map(|i| find(&mut parent, i)).collect();
        roots.difference(&bad).count()
    }

    #[test]
    fn counts_match_brute_force() {
        let perm_sets = [s3(), vec![vec![1, 0, 2]], vec![]];
        for perms in perm_sets {
            for l in 0..=5 {
                let red = Reductions::all(perms.clone());
                assert_eq!(enumerate_with(3, l, &red).len(), brute_force_count(l, &red), "l={l}");
            }
        }
        let two = vec![vec![0, 1, 2], vec![1, 0, 2]];
        assert_eq!(brute_force_count(2, &Reductions::all(two)), enumerate_topologies(2, &[vec![1, 0, 2]]).len());
    }

    #[test]
    fn fewer_perms_never_fewer_classes() {
        for l in 1..=5 {
            let full = enumerate_topologies(l, &s3()).len();
            let one = enumerate_topologies(l, &[vec![1, 0, 2]]).len();
            let none = enumerate_topologies(l, &[]).len();
            assert!(full <= one && one <= none, "l={l}");
        }
    }

    #[test]
    fn representatives_are_canonical() {
        for l in 0..=5 {
            for rep in enumerate_topologies(l, &s3()) {
                assert_eq!(canonical_topology(&rep, &s3()), rep);
                assert!(rep.max_run() <= MAX_RUN);
            }
        }
    }

    #[test]
    fn long_runs_are_pruned() {
        let reps = enumerate_with(3, 4, &Reductions { perms: vec![], time_reversal: false, swap_conjugation: false });
        assert_eq!(reps.len(), 81 - 3);
    }

    #[test]
    fn parameter_layout() {
        for l in 0..5 {
            let net = GateNetwork::new(Topology { wires: 3, slots: vec![1; l] }, GateFamily::Cnot);
            assert_eq!(net.param_count(), 6 * l + 9);
        }
        let net = GateNetwork::new(t("3"), GateFamily::Cnot);
        assert!(matches!(instantiate(&net, &[0.0; 3]), Err(Error::ParamCount { .. })));
    }

    #[test]
    fn identity_network() {
        let net = GateNetwork::new(t(""), GateFamily::Cnot);
        let m = instantiate(&net, &[0.0; 9]).unwrap();
        assert!((m - Matrix::identity(8, 8)).norm() < 1e-15);
    }

    #[test]
    fn hadamard_conjugated_cnot_is_cphase() {
        use std::f64::consts::FRAC_PI_2;
        use std::f64::consts::FRAC_PI_4;
        // U(π/4, π/2, π/2) = i·H on the target, before and after the CNOT.
        let net = GateNetwork::new(t("3"), GateFamily::Cnot);
        let mut p = vec![0.0; 15];
        p[3..6].copy_from_slice(&[FRAC_PI_4, FRAC_PI_2, FRAC_PI_2]);
        p[12..15].copy_from_slice(&[FRAC_PI_4, FRAC_PI_2, FRAC_PI_2]);
        let m = instantiate(&net, &p).unwrap();
        let cz = crate::quantum::unitary_of(3, |s| s.apply_cphase_mut(0, 1)).unwrap();
        assert!((m + cz).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_networks_are_unitary(labels in prop::collection::vec(1u8..=3, 0..5), seed in 0u64..1000, cphase: bool) {
            use rand::{Rng, SeedableRng};
            let family = if cphase { GateFamily::CphaseRz } else { GateFamily::Cnot };
            let net = GateNetwork::new(Topology::new(3, labels).unwrap(), family);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p: Vec<f64> = (0..net.param_count()).map(|_| rng.random_range(0.0..6.3)).collect();
            prop_assert!(unitarity_error(&instantiate(&net, &p).unwrap()) < 1e-10);
        }

        #[test]
        fn canonical_is_idempotent(labels in prop::collection::vec(1u8..=3, 0..7)) {
            let top = Topology::new(3, labels).unwrap();
            let c = canonical_topology(&top, &s3());
            prop_assert_eq!(canonical_topology(&c, &s3()), c.clone());
            prop_assert!(c <= top);
        }
    }
}
