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

//! Exhaustive search over topologies of growing size, with random restarts per topology.
//!
//! Topologies of a given size are tried in lexicographic order of their canonical strings, and
//! restarts in index order; the first success in that order is returned whatever the thread
//! count, so parallel and serial runs agree.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bfgs::{bfgs_minimize, bfgs_minimize_with, BfgsOptions};
use super::objective::{network_flat, FitTarget, PovmProblem};
use super::{ObjectiveKind, OptimizationConfig, SynthesisResult};
use crate::database::{stabilizer_perms, Database};
use crate::error::{Error, Result};
use crate::grover::{hoyer_angles, BlockSet, SearchInstance};
use crate::quantum::{Matrix, C64};
use crate::topology::{enumerate_with, GateFamily, GateNetwork, Reductions};

fn wire_permutation_matrix(perm: &[usize]) -> Matrix {
    let n = perm.len();
    let dim = 1 << n;
    let mut m = Matrix::zeros(dim, dim);
    for x in 0..dim {
        let mut y = 0;
        for (i, &p) in perm.iter().enumerate() {
            if x >> (n - 1 - i) & 1 == 1 {
                y |= 1 << (n - 1 - p);
            }
        }
        m[(y, x)] = C64::new(1.0, 0.0);
    }
    m
}

/// Equivalences that provably preserve solvability for this target.
///
/// Relabeling by a wire permutation `P` maps solutions for `M` to solutions for `PMP†`, so only
/// permutations fixing the target qualify. Reversing the gate order transposes the network, so
/// reversal qualifies only when the fitted entries are transpose-symmetric. Swap conjugation is
/// never used: a CNOT cannot absorb a SWAP.
pub fn valid_reductions(target: &Matrix, w: &[usize], kind: ObjectiveKind) -> Result<Reductions> {
    let wires = target.nrows().trailing_zeros() as usize;
    let db = Database::new(wires, w.to_vec())?;
    let fit = match kind {
        ObjectiveKind::Preparation => FitTarget::preparation(target, w),
        ObjectiveKind::Block => FitTarget::block(target, w),
    };
    let perms = stabilizer_perms(&db)
        .into_iter()
        .filter(|p| {
            let pm = wire_permutation_matrix(p);
            (&pm * target * pm.adjoint() - target).norm() < 1e-12
        })
        .collect();
    let time_reversal =
        kind == ObjectiveKind::Block && fit.entries.iter().all(|&(i, j, m)| (target[(j, i)] - m).norm() < 1e-12);
    Ok(Reductions { perms, time_reversal, swap_conjugation: false })
}

fn task_rng(seed: u64, stream: [u64; 4]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = stream.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &x| (h ^ x).wrapping_mul(0x0100_0000_01b3));
    rng.set_stream(id);
    rng
}

/// Per constrained column `j`: `|⟨M e_j, S e_j⟩|² / ‖M e_j‖²` over the fitted rows.
pub fn column_fidelities(fit: &FitTarget, s: &Matrix) -> Vec<f64> {
    let mut cols: Vec<usize> = fit.entries.iter().map(|e| e.1).collect();
    cols.sort_unstable();
    cols.dedup();
    cols.iter()
        .map(|&j| {
            let mut ov = C64::new(0.0, 0.0);
            let mut norm = 0.0;
            for &(i, jj, m) in &fit.entries {
                if jj == j {
                    ov += m.conj() * s[(i, j)];
                    norm += m.norm_sqr();
                }
            }
            ov.norm_sqr() / (norm * norm)
        })
        .collect()
}

struct Attempt {
    restart: usize,
    params: Vec<f64>,
    value: f64,
    probs: Vec<f64>,
}

/// Runs `restarts` tries in index order, in parallel chunks, and returns the first success.
fn first_success<F>(restarts: usize, try_one: F) -> Option<Attempt>
where
    F: Fn(usize) -> Option<Attempt> + Sync,
{
    let chunk = rayon::current_num_threads().max(1);
    let mut start = 0;
    while start < restarts {
        let end = (start + chunk).min(restarts);
        let found = (start..end).into_par_iter().filter_map(&try_one).min_by_key(|a| a.restart);
        if found.is_some() {
            return found;
        }
        start = end;
    }
    None
}

/// Finds a network fitting `target` with the fewest two-qubit gates.
pub fn circuit_search(
    target: &Matrix,
    w: &[usize],
    kind: ObjectiveKind,
    cfg: &OptimizationConfig,
) -> Result<SynthesisResult> {
    let wires = target.nrows().trailing_zeros() as usize;
    let fit = match kind {
        ObjectiveKind::Preparation => FitTarget::preparation(target, w),
        ObjectiveKind::Block => FitTarget::block(target, w),
    };
    let red = valid_reductions(target, w, kind)?;
    let eps = cfg.epsilon(kind);
    let opts = BfgsOptions {
        max_iterations: cfg.max_iterations,
        value_target: eps,
        gradient_step: cfg.gradient_step,
        ..Default::default()
    };
    for l in 0..=cfg.max_gates {
        for (ti, top) in enumerate_with(wires, l, &red).into_iter().enumerate() {
            let net = GateNetwork::new(top, GateFamily::Cnot);
            let k = net.param_count() + usize::from(cfg.free_phase);
            let try_one = |r: usize| -> Option<Attempt> {
                let mut rng = task_rng(cfg.seed, [0, l as u64, ti as u64, r as u64]);
                // A non-finite objective restarts from a fresh point.
                for _ in 0..3 {
                    let x0: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
                    let Ok(min) = bfgs_minimize_with(|x| fit.value_grad(&net, x, cfg.free_phase), &x0, &opts) else {
                        continue;
                    };
                    if !(min.value <= eps) {
                        return None;
                    }
                    let probs = verify_block(&net, &fit, &min.x, cfg.free_phase);
                    return probs.iter().all(|&p| p >= 1.0 - cfg.delta).then_some(Attempt {
                        restart: r,
                        params: min.x,
                        value: min.value,
                        probs,
                    });
                }
                None
            };
            if let Some(a) = first_success(cfg.restarts, try_one) {
                return Ok(SynthesisResult {
                    network: net,
                    params: a.params,
                    per_tau: Vec::new(),
                    objective_value: a.value,
                    success_probs: a.probs,
                    cnot_count: l,
                    restart: a.restart,
                });
            }
        }
    }
    Err(Error::NotFound(cfg.max_gates))
}

fn verify_block(net: &GateNetwork, fit: &FitTarget, x: &[f64], free_phase: bool) -> Vec<f64> {
    let mut s = network_flat(net, &x[..net.param_count()]).to_matrix();
    if free_phase {
        s *= C64::from_polar(1.0, -x[net.param_count()]);
    }
    column_fidelities(fit, &s)
}

/// Matrix realized by a search result, with any fitted global phase removed.
pub fn realized_matrix(res: &SynthesisResult) -> Matrix {
    let np = res.network.param_count();
    let mut s = network_flat(&res.network, &res.params[..np]).to_matrix();
    if res.params.len() > np {
        s *= C64::from_polar(1.0, -res.params[np]);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeqsResult {
    pub a: SynthesisResult,
    pub d_pi: SynthesisResult,
    pub d_psi: Option<SynthesisResult>,
    /// Shared network with per-item parameters.
    pub oracle: SynthesisResult,
    /// Plain rounds before the final one.
    pub m: usize,
}

impl BeqsResult {
    /// Two-qubit gates across the whole pipeline.
    pub fn total_cnots(&self) -> usize {
        let calls = self.m + usize::from(self.d_psi.is_some());
        self.a.cnot_count
            + self.m * self.d_pi.cnot_count
            + self.d_psi.as_ref().map_or(0, |d| d.cnot_count)
            + calls * self.oracle.cnot_count
    }
}

/// Blind exact search: Alice's blocks individually, then one oracle topology shared by every
/// marked item in `q`, each with its own parameters.
pub fn beqs_synthesize(
    n: usize,
    w: &[usize],
    povm: &[Vec<usize>],
    q: &[usize],
    cfg: &OptimizationConfig,
) -> Result<BeqsResult> {
    let first = *q.first().ok_or_else(|| Error::InvalidInstance("no legitimate marked items".into()))?;
    let inst = SearchInstance::new(n, w.to_vec(), first, Some(povm.to_vec()))?;
    if let Some(g) = povm.iter().find(|g| !g.iter().any(|j| q.contains(j))) {
        return Err(Error::InvalidInstance(format!("group {g:?} has no legitimate marked item")));
    }
    if let Some(t) = q.iter().find(|t| !w.contains(t)) {
        return Err(Error::InvalidInstance(format!("marked item {t} not in database")));
    }
    let h = hoyer_angles(w.len())?;
    let blocks = BlockSet::new(&inst)?;
    let a = circuit_search(&blocks.a, w, ObjectiveKind::Preparation, cfg)?;
    let d_pi = circuit_search(&blocks.d_pi, w, ObjectiveKind::Block, cfg)?;
    let final_round = h.psi > 0.0;
    let d_psi = if final_round { Some(circuit_search(&blocks.d_psi, w, ObjectiveKind::Block, cfg)?) } else { None };
    let problem = PovmProblem {
        n,
        w: w.to_vec(),
        groups: povm.to_vec(),
        q: q.to_vec(),
        a: realized_matrix(&a),
        d_pi: realized_matrix(&d_pi),
        d_psi: d_psi.as_ref().map_or_else(|| blocks.d_psi.clone(), realized_matrix),
        m: h.m,
        final_round,
    };
    let oracle = oracle_search(&problem, cfg)?;
    Ok(BeqsResult { a, d_pi, d_psi, oracle, m: h.m })
}

fn oracle_search(problem: &PovmProblem, cfg: &OptimizationConfig) -> Result<SynthesisResult> {
    let eps = cfg.epsilon(ObjectiveKind::Block);
    let opts = BfgsOptions {
        max_iterations: cfg.max_iterations,
        value_target: eps,
        gradient_step: cfg.gradient_step,
        ..Default::default()
    };
    let db = Database::new(problem.n, problem.w.clone())?;
    let perms = stabilizer_perms(&db)
        .into_iter()
        .filter(|p| {
            let op = crate::database::SymmetryOp { perm: p.clone(), mask: 0 };
            let mut q: Vec<usize> = problem.q.iter().map(|&t| op.apply_index(t)).collect();
            q.sort_unstable();
            let mut q0 = problem.q.clone();
            q0.sort_unstable();
            let groups_fixed = problem.groups.iter().all(|g| {
                let mut img: Vec<usize> = g.iter().map(|&j| op.apply_index(j)).collect();
                img.sort_unstable();
                problem.groups.iter().any(|h| {
                    let mut hs = h.clone();
                    hs.sort_unstable();
                    hs == img
                })
            });
            q == q0 && groups_fixed
        })
        .collect();
    let red = Reductions { perms, time_reversal: false, swap_conjugation: false };
    for l in 0..=cfg.max_gates {
        'topology: for (ti, top) in enumerate_with(problem.n, l, &red).into_iter().enumerate() {
            let net = GateNetwork::new(top.clone(), GateFamily::Cnot);
            let k = net.param_count();
            let mut per_tau = Vec::new();
            let mut probs = Vec::new();
            let mut total = 0.0;
            for (qi, &tau) in problem.q.iter().enumerate() {
                let f = |x: &[f64]| problem.term(&network_flat(&net, x).to_matrix(), tau);
                let try_one = |r: usize| -> Option<Attempt> {
                    let mut rng = task_rng(cfg.seed, [1 + qi as u64, l as u64, ti as u64, r as u64]);
                    let x0: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
                    let min = bfgs_minimize(f, &x0, &opts).ok()?;
                    let p = problem.success(&network_flat(&net, &min.x).to_matrix(), tau);
                    (min.value <= eps && p >= 1.0 - cfg.delta).then_some(Attempt {
                        restart: r,
                        params: min.x,
                        value: min.value,
                        probs: vec![p],
                    })
                };
                let Some(a) = first_success(cfg.restarts, try_one) else {
                    continue 'topology;
                };
                total += a.value;
                probs.push(a.probs[0]);
                per_tau.push((tau, a.params));
            }
            return Ok(SynthesisResult {
                network: net,
                params: Vec::new(),
                per_tau,
                objective_value: total,
                success_probs: probs,
                cnot_count: top.len(),
                restart: 0,
            });
        }
    }
    Err(Error::NotFound(cfg.max_gates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::diffusion_matrix;
    use std::f64::consts::PI;

    fn quick() -> OptimizationConfig {
        OptimizationConfig { restarts: 16, max_gates: 4, ..Default::default() }
    }

    #[test]
    fn identity_needs_no_gates() {
        let w: Vec<usize> = (0..8).collect();
        let r = circuit_search(&Matrix::identity(8, 8), &w, ObjectiveKind::Block, &quick()).unwrap();
        assert_eq!(r.cnot_count, 0);
        assert!(r.objective_value <= 1e-8);
    }

    #[test]
    fn two_qubit_uniform_preparation_is_local() {
        let inst = SearchInstance::new(2, vec![0, 1, 2, 3], 0, None).unwrap();
        let b = BlockSet::new(&inst).unwrap();
        let r = circuit_search(&b.a, &inst.w, ObjectiveKind::Preparation, &quick()).unwrap();
        assert_eq!(r.cnot_count, 0);
        assert!(r.success_probs[0] > 1.0 - 1e-9);
    }

    #[test]
    fn reductions_respect_target() {
        let w: Vec<usize> = (0..6).collect();
        let inst = SearchInstance::new(3, w.clone(), 0, None).unwrap();
        let red = valid_reductions(&diffusion_matrix(&inst, PI), &w, ObjectiveKind::Block).unwrap();
        assert_eq!(red.perms, vec![vec![0, 1, 2], vec![1, 0, 2]]);
        assert!(red.time_reversal && !red.swap_conjugation);
        let red_a = valid_reductions(&BlockSet::new(&inst).unwrap().a, &w, ObjectiveKind::Preparation).unwrap();
        assert!(!red_a.time_reversal);
    }

    #[test]
    fn deterministic_per_seed() {
        let inst = SearchInstance::new(2, vec![0, 1, 2, 3], 1, None).unwrap();
        let d = diffusion_matrix(&inst, PI);
        let cfg = OptimizationConfig { free_phase: true, ..quick() };
        let r1 = circuit_search(&d, &inst.w, ObjectiveKind::Block, &cfg).unwrap();
        let r2 = circuit_search(&d, &inst.w, ObjectiveKind::Block, &cfg).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn two_qubit_blind_search_is_exact() {
        let w = vec![0, 1, 2, 3];
        let povm: Vec<Vec<usize>> = w.iter().map(|&j| vec![j]).collect();
        let cfg = OptimizationConfig { free_phase: true, ..quick() };
        let r = beqs_synthesize(2, &w, &povm, &w, &cfg).unwrap();
        assert_eq!(r.oracle.per_tau.len(), 4);
        assert!(r.oracle.success_probs.iter().all(|&p| p >= 1.0 - 1e-4));
        assert_eq!(r.d_psi, None);
    }
}
