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

//! Dense statevector simulation.
//!
//! Qubit ordering is big-endian: qubit 0 is the most significant bit of a basis index, so on
//! three qubits `|q0 q1 q2⟩` has index `4·q0 + 2·q1 + q2`. Every other module (gate networks,
//! pattern outputs, database labels) follows this convention.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::MeasurementAngle;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// Branches with probability below this are never sampled or renormalized.
pub const BRANCH_CUTOFF: f64 = 1e-14;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = C64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::BadLength(len));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { num_qubits: len.trailing_zeros() as usize, amps })
    }

    /// Normalizes the given amplitudes first.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < BRANCH_CUTOFF {
            return Err(Error::NotNormalized(0.0));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ other`; the new qubits are appended after the existing ones.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { num_qubits: self.num_qubits + other.num_qubits, amps }
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<C64>().norm()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits })
        } else {
            Ok(())
        }
    }

    fn stride(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    pub fn apply_matrix_mut(&mut self, q: usize, m: &[[C64; 2]; 2]) -> Result<()> {
        self.check(q)?;
        let s = self.stride(q);
        for i in 0..self.amps.len() {
            if i & s == 0 {
                let a = self.amps[i];
                let b = self.amps[i | s];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | s] = m[1][0] * a + m[1][1] * b;
            }
        }
        Ok(())
    }

    pub fn apply_cnot_mut(&mut self, control: usize, target: usize) -> Result<()> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        let (c, t) = (self.stride(control), self.stride(target));
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
        Ok(())
    }

    pub fn apply_cphase_mut(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        let mask = self.stride(a) | self.stride(b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Probabilities of outcomes 0 and 1 when measuring `q` in the `|±_φ⟩` basis.
    pub fn branch_probabilities(&self, q: usize, phi: f64) -> Result<[f64; 2]> {
        let p0 = self.project(q, phi, 0)?.0;
        Ok([p0, (1.0 - p0).max(0.0)])
    }

    /// Projects `q` onto `|±_φ⟩` (outcome 0 is `+`) and removes it. Returns the branch
    /// probability and the unnormalized remainder.
    fn project(&self, q: usize, phi: f64, outcome: u8) -> Result<(f64, Vec<C64>)> {
        self.check(q)?;
        let s = self.stride(q);
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        // ⟨±_φ| = (⟨0| ± e^{-iφ}⟨1|)/√2
        let c1 = C64::from_polar(sign * FRAC_1_SQRT_2, -phi);
        let mut out = Vec::with_capacity(self.amps.len() / 2);
        for i in 0..self.amps.len() {
            if i & s == 0 {
                out.push(FRAC_1_SQRT_2 * self.amps[i] + c1 * self.amps[i | s]);
            }
        }
        // Indices with bit `s` clear, taken in increasing order, are exactly the basis of the
        // remaining qubits in order.
        let p = out.iter().map(|a| a.norm_sqr()).sum();
        Ok((p, out))
    }

    /// Post-measurement state for a chosen outcome, renormalized. `None` if the branch is
    /// below the cutoff.
    pub fn collapse(&self, q: usize, phi: f64, outcome: u8) -> Result<Option<(f64, StateVector)>> {
        let (p, mut amps) = self.project(q, phi, outcome)?;
        if p < BRANCH_CUTOFF {
            return Ok(None);
        }
        let n = p.sqrt();
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(Some((p, StateVector { num_qubits: self.num_qubits - 1, amps })))
    }

    /// Moves qubit `q` to the last position, keeping the others in order.
    pub fn move_to_end(&self, q: usize) -> Result<StateVector> {
        self.check(q)?;
        let n = self.num_qubits;
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let bit = (i >> (n - 1 - q)) & 1;
            let high = i >> (n - q);
            let low = i & ((1 << (n - 1 - q)) - 1);
            let rest = (high << (n - 1 - q)) | low;
            amps[(rest << 1) | bit] = *a;
        }
        Ok(StateVector { num_qubits: n, amps })
    }
}

/// `U(α,β,γ) = [[e^{iβ}cos α, e^{iγ}sin α], [−e^{−iγ}sin α, e^{−iβ}cos α]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitGate {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SingleQubitGate {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        SingleQubitGate { alpha, beta, gamma }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        u_matrix(self.alpha, self.beta, self.gamma)
    }
}

pub fn u_matrix(alpha: f64, beta: f64, gamma: f64) -> [[C64; 2]; 2] {
    let (s, c) = alpha.sin_cos();
    [[C64::from_polar(c, beta), C64::from_polar(s, gamma)], [-C64::from_polar(s, -gamma), C64::from_polar(c, -beta)]]
}

pub fn hadamard() -> [[C64; 2]; 2] {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `diag(1, e^{iα})`, i.e. `R_z(α)` up to global phase.
pub fn phase(alpha: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    [[C64::new(1.0, 0.0), z], [z, C64::from_polar(1.0, alpha)]]
}

pub fn apply_single(state: &StateVector, qubit: usize, gate: &SingleQubitGate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_matrix_mut(qubit, &gate.matrix())?;
    Ok(out)
}

pub fn apply_cnot(state: &StateVector, control: usize, target: usize) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_cnot_mut(control, target)?;
    Ok(out)
}

pub fn apply_cphase(state: &StateVector, a: usize, b: usize) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_cphase_mut(a, b)?;
    Ok(out)
}

/// `(|0⟩ + e^{iθ}|1⟩)/√2`.
pub fn plus_theta(theta: &MeasurementAngle) -> StateVector {
    StateVector {
        num_qubits: 1,
        amps: vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, theta.radians())],
    }
}

/// Measures `qubit` in the `|±_φ⟩` basis and removes it from the register.
pub fn measure_phi<R: Rng + ?Sized>(
    state: &StateVector,
    qubit: usize,
    phi: &MeasurementAngle,
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    if state.num_qubits == 0 {
        return Err(Error::EmptyRegister);
    }
    let [p0, _] = state.branch_probabilities(qubit, phi.radians())?;
    let outcome = if p0 < BRANCH_CUTOFF {
        1
    } else if 1.0 - p0 < BRANCH_CUTOFF {
        0
    } else if rng.random::<f64>() < p0 {
        0
    } else {
        1
    };
    let (_, post) = state.collapse(qubit, phi.radians(), outcome)?.expect("sampled branch is above the cutoff");
    Ok((outcome, post))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupDistribution {
    pub groups: Vec<f64>,
    pub ungrouped: f64,
}

pub fn outcome_distribution(state: &StateVector, groups: &[Vec<usize>]) -> Result<GroupDistribution> {
    let dim = state.amps.len();
    let mut seen = vec![false; dim];
    let mut probs = Vec::with_capacity(groups.len());
    for g in groups {
        let mut p = 0.0;
        for &i in g {
            if i >= dim {
                return Err(Error::BasisOutOfRange { index: i, dim });
            }
            if seen[i] {
                return Err(Error::OverlappingGroups(i));
            }
            seen[i] = true;
            p += state.amps[i].norm_sqr();
        }
        probs.push(p);
    }
    let ungrouped = (0..dim).filter(|&i| !seen[i]).map(|i| state.amps[i].norm_sqr()).sum();
    Ok(GroupDistribution { groups: probs, ungrouped })
}

/// Dense matrix of a linear map on `k` qubits, built column by column from basis states.
pub fn unitary_of<F>(k: usize, mut f: F) -> Result<Matrix>
where
    F: FnMut(&mut StateVector) -> Result<()>,
{
    let dim = 1 << k;
    let mut m = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let mut s = StateVector::basis(k, j);
        f(&mut s)?;
        for i in 0..dim {
            m[(i, j)] = s.amps[i];
        }
    }
    Ok(m)
}

pub fn apply_matrix(m: &Matrix, state: &StateVector) -> StateVector {
    let v = nalgebra::DVector::from_column_slice(&state.amps);
    let out = m * v;
    StateVector { num_qubits: state.num_qubits, amps: out.as_slice().to_vec() }
}

/// Largest entry of `|U·U† − I|`.
pub fn unitarity_error(m: &Matrix) -> f64 {
    let p = m * m.adjoint();
    let mut err: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            err = err.max((p[(i, j)] - want).norm());
        }
    }
    err
}
