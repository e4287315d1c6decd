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

//! Objective functions for network synthesis.
//!
//! Network matrices are evaluated here on flat row-major buffers rather than through
//! [`crate::topology::instantiate`], because the search calls them millions of times.

use crate::quantum::{hadamard, phase, Matrix, StateVector, C64};
use crate::topology::{mul2, GateFamily, GateNetwork, Step};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
/// Target entries below this modulus are treated as zero.
const NONZERO: f64 = 1e-12;

type M2 = [[C64; 2]; 2];

fn derivs(family: GateFamily, p: &[f64]) -> (M2, [M2; 3]) {
    match family {
        GateFamily::Cnot => {
            let (s, c) = p[0].sin_cos();
            let eb = C64::from_polar(1.0, p[1]);
            let eg = C64::from_polar(1.0, p[2]);
            let i = C64::new(0.0, 1.0);
            let g = [[eb * c, eg * s], [-eg.conj() * s, eb.conj() * c]];
            let da = [[-eb * s, eg * c], [-eg.conj() * c, -eb.conj() * s]];
            let db = [[i * eb * c, ZERO], [ZERO, -i * eb.conj() * c]];
            let dg = [[ZERO, i * eg * s], [i * eg.conj() * s, ZERO]];
            (g, [da, db, dg])
        }
        GateFamily::CphaseRz => {
            let h = hadamard();
            let j = |x: f64| mul2(&h, &phase(x));
            let dj = |x: f64| mul2(&h, &[[ZERO, ZERO], [ZERO, C64::new(0.0, 1.0) * C64::from_polar(1.0, x)]]);
            let (ja, jb, jc) = (j(p[0]), j(p[1]), j(p[2]));
            let g = mul2(&jc, &mul2(&jb, &ja));
            let da = mul2(&jc, &mul2(&jb, &dj(p[0])));
            let db = mul2(&jc, &mul2(&dj(p[1]), &ja));
            let dg = mul2(&dj(p[2]), &mul2(&jb, &ja));
            (g, [da, db, dg])
        }
    }
}

/// Square matrix on a flat row-major buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Flat {
    pub wires: usize,
    pub dim: usize,
    pub data: Vec<C64>,
}

impl Flat {
    pub fn identity(wires: usize) -> Self {
        let dim = 1 << wires;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Flat { wires, dim, data }
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        let dim = m.nrows();
        let wires = dim.trailing_zeros() as usize;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = m[(i, j)];
            }
        }
        Flat { wires, dim, data }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.data[i * self.dim + j])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    fn bit(&self, wire: usize) -> usize {
        1 << (self.wires - 1 - wire)
    }

    /// `self ← (g on wire) · self`.
    pub fn left_single(&mut self, wire: usize, g: &M2) {
        let b = self.bit(wire);
        let dim = self.dim;
        for r0 in (0..dim).filter(|r| r & b == 0) {
            let r1 = r0 | b;
            for c in 0..dim {
                let x = self.data[r0 * dim + c];
                let y = self.data[r1 * dim + c];
                self.data[r0 * dim + c] = g[0][0] * x + g[0][1] * y;
                self.data[r1 * dim + c] = g[1][0] * x + g[1][1] * y;
            }
        }
    }

    pub fn left_entangle(&mut self, family: GateFamily, control: usize, target: usize) {
        let (bc, bt) = (self.bit(control), self.bit(target));
        let dim = self.dim;
        for r in 0..dim {
            match family {
                GateFamily::Cnot if r & bc != 0 && r & bt == 0 => {
                    let s = r | bt;
                    for c in 0..dim {
                        self.data.swap(r * dim + c, s * dim + c);
                    }
                }
                GateFamily::CphaseRz if r & bc != 0 && r & bt != 0 => {
                    for c in 0..dim {
                        self.data[r * dim + c] = -self.data[r * dim + c];
                    }
                }
                _ => {}
            }
        }
    }

    /// `Σ_ij conj(y_ij)·((g on wire)·self)_ij`.
    fn pair_with(&self, y: &Flat, wire: usize, g: &M2) -> C64 {
        let b = self.bit(wire);
        let dim = self.dim;
        let mut acc = ZERO;
        for r0 in (0..dim).filter(|r| r & b == 0) {
            let r1 = r0 | b;
            for c in 0..dim {
                let x = self.data[r0 * dim + c];
                let z = self.data[r1 * dim + c];
                acc += y.data[r0 * dim + c].conj() * (g[0][0] * x + g[0][1] * z);
                acc += y.data[r1 * dim + c].conj() * (g[1][0] * x + g[1][1] * z);
            }
        }
        acc
    }
}

fn adjoint(g: &M2) -> M2 {
    [[g[0][0].conj(), g[1][0].conj()], [g[0][1].conj(), g[1][1].conj()]]
}

/// Network matrix on a flat buffer. Panics on a parameter-count mismatch.
pub fn network_flat(net: &GateNetwork, params: &[f64]) -> Flat {
    assert_eq!(params.len(), net.param_count());
    let mut u = Flat::identity(net.wires());
    for step in net.steps() {
        match step {
            Step::Single { wire, offset } => u.left_single(wire, &net.single_matrix(&params[offset..offset + 3])),
            Step::Entangle { control, target } => u.left_entangle(net.family, control, target),
        }
    }
    u
}

/// Target entries entering a fitting objective.
#[derive(Clone, Debug, PartialEq)]
pub struct FitTarget {
    pub wires: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl FitTarget {
    /// Column 0 rows in `w` where the target is nonzero.
    pub fn preparation(target: &Matrix, w: &[usize]) -> Self {
        let entries = w.iter().filter(|&&i| target[(i, 0)].norm() > NONZERO).map(|&i| (i, 0, target[(i, 0)])).collect();
        FitTarget { wires: target.nrows().trailing_zeros() as usize, entries }
    }

    /// All `(i, j) ∈ w × w` where the target is nonzero.
    pub fn block(target: &Matrix, w: &[usize]) -> Self {
        let mut entries = Vec::new();
        for &i in w {
            for &j in w {
                if target[(i, j)].norm() > NONZERO {
                    entries.push((i, j, target[(i, j)]));
                }
            }
        }
        FitTarget { wires: target.nrows().trailing_zeros() as usize, entries }
    }

    pub fn value(&self, s: &Flat, global: C64) -> f64 {
        self.entries.iter().map(|&(i, j, m)| (global * m - s.get(i, j)).norm_sqr()).sum()
    }

    /// Value and analytic gradient. With `free_phase`, the last parameter is a global phase
    /// multiplying the target.
    pub fn value_grad(&self, net: &GateNetwork, params: &[f64], free_phase: bool) -> (f64, Vec<f64>) {
        let np = net.param_count();
        let global = if free_phase { C64::from_polar(1.0, params[np]) } else { C64::new(1.0, 0.0) };
        let p = &params[..np];
        let steps = net.steps();
        let mut prefixes = Vec::with_capacity(steps.len());
        let mut gates = Vec::with_capacity(steps.len());
        let mut u = Flat::identity(net.wires());
        for step in &steps {
            prefixes.push(u.clone());
            match *step {
                Step::Single { wire, offset } => {
                    let (g, d) = derivs(net.family, &p[offset..offset + 3]);
                    u.left_single(wire, &g);
                    gates.push(Some((g, d)));
                }
                Step::Entangle { control, target } => {
                    u.left_entangle(net.family, control, target);
                    gates.push(None);
                }
            }
        }
        let mut y = Flat { wires: u.wires, dim: u.dim, data: vec![ZERO; u.data.len()] };
        let mut value = 0.0;
        let mut phase_grad = 0.0;
        for &(i, j, m) in &self.entries {
            let e = global * m - u.get(i, j);
            value += e.norm_sqr();
            y.data[i * u.dim + j] = e;
            phase_grad += 2.0 * (e.conj() * C64::new(0.0, 1.0) * global * m).re;
        }
        let mut grad = vec![0.0; params.len()];
        for (k, step) in steps.iter().enumerate().rev() {
            match (*step, &gates[k]) {
                (Step::Single { wire, offset }, Some((g, d))) => {
                    for (t, dk) in d.iter().enumerate() {
                        grad[offset + t] = -2.0 * prefixes[k].pair_with(&y, wire, dk).re;
                    }
                    y.left_single(wire, &adjoint(g));
                }
                (Step::Entangle { control, target }, _) => {
                    // Both entanglers are self-inverse.
                    y.left_entangle(net.family, control, target);
                }
                _ => unreachable!("gate cache matches steps"),
            }
        }
        if free_phase {
            grad[np] = phase_grad;
        }
        (value, grad)
    }
}

/// `Σ_{i ∈ w, M_{i0} ≠ 0} |M_{i0} − S_{i0}|²`.
pub fn objective_fp(net: &GateNetwork, params: &[f64], a_target: &Matrix, w: &[usize]) -> f64 {
    FitTarget::preparation(a_target, w).value(&network_flat(net, params), C64::new(1.0, 0.0))
}

/// `Σ_{i,j ∈ w, M_{ij} ≠ 0} |M_{ij} − S_{ij}|²`.
pub fn objective_fb(net: &GateNetwork, params: &[f64], m_target: &Matrix, w: &[usize]) -> f64 {
    FitTarget::block(m_target, w).value(&network_flat(net, params), C64::new(1.0, 0.0))
}

/// `Σ_{i∈w, j∉w} |S_{ij}| + Σ_{i∉w, j∈w} |S_{ij}|`.
pub fn objective_fobd(s: &Matrix, w: &[usize], n: usize) -> f64 {
    fobd_flat(&Flat::from_matrix(s), w, n)
}

fn fobd_flat(s: &Flat, w: &[usize], n: usize) -> f64 {
    let dim = 1usize << n;
    let mut inside = vec![false; dim];
    w.iter().for_each(|&i| inside[i] = true);
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if inside[i] != inside[j] {
                total += s.get(i, j).norm();
            }
        }
    }
    total
}

/// The fixed parts of the blind search pipeline around a shared oracle network.
#[derive(Clone, Debug)]
pub struct PovmProblem {
    pub n: usize,
    pub w: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
    /// Legitimate marked items.
    pub q: Vec<usize>,
    pub a: Matrix,
    pub d_pi: Matrix,
    pub d_psi: Matrix,
    /// Plain rounds before the final one.
    pub m: usize,
    /// Whether the final `D(ψ)` round runs (false when the plain rounds are already exact).
    pub final_round: bool,
}

impl PovmProblem {
    /// State after the pipeline with oracle matrix `s`.
    pub fn final_state(&self, s: &Matrix) -> StateVector {
        use crate::quantum::apply_matrix;
        let mut psi = apply_matrix(&self.a, &StateVector::zero(self.n));
        for _ in 0..self.m {
            psi = apply_matrix(&self.d_pi, &apply_matrix(s, &psi));
        }
        if self.final_round {
            psi = apply_matrix(&self.d_psi, &apply_matrix(s, &psi));
        }
        psi
    }

    pub fn group_of(&self, tau: usize) -> &[usize] {
        self.groups.iter().find(|g| g.contains(&tau)).map(|g| g.as_slice()).unwrap_or(&[])
    }

    /// Probability of the group containing `tau`.
    pub fn success(&self, s: &Matrix, tau: usize) -> f64 {
        let psi = self.final_state(s);
        self.group_of(tau).iter().map(|&j| psi.amplitudes()[j].norm_sqr()).sum()
    }

    /// `1 − ‖M_POVM(τ)Ψ‖ + f_obd(S)` for one marked item.
    pub fn term(&self, s: &Matrix, tau: usize) -> f64 {
        1.0 - self.success(s, tau).sqrt() + objective_fobd(s, &self.w, self.n)
    }
}

/// Sums the per-item terms over `q`; `params[k]` configures the oracle for `q[k]`.
pub fn obj_povm(net: &GateNetwork, params: &[Vec<f64>], problem: &PovmProblem) -> f64 {
    problem.q.iter().zip(params).map(|(&tau, p)| problem.term(&network_flat(net, p).to_matrix(), tau)).sum()
}
