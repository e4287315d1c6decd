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

//! Gate-network synthesis: objectives, the quasi-Newton optimizer and the search drivers.

pub mod bfgs;
pub mod objective;
pub mod search;

use serde::{Deserialize, Serialize};

pub use bfgs::{bfgs_minimize, bfgs_minimize_with, BfgsOptions, Minimum};
pub use objective::{obj_povm, objective_fb, objective_fobd, objective_fp, PovmProblem};
pub use search::{beqs_synthesize, circuit_search, BeqsResult};

use crate::topology::GateNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// Fit the first column only.
    Preparation,
    /// Fit the whole block on the database subspace.
    Block,
}

impl ObjectiveKind {
    pub fn default_epsilon(self) -> f64 {
        match self {
            ObjectiveKind::Preparation => 1e-10,
            ObjectiveKind::Block => 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_step: f64,
    /// `None` picks the per-objective default.
    pub success_epsilon: Option<f64>,
    pub delta: f64,
    pub seed: u64,
    /// Largest two-qubit gate count tried before giving up.
    pub max_gates: usize,
    /// Fit the target only up to a global phase.
    pub free_phase: bool,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            restarts: 64,
            max_iterations: 2000,
            gradient_step: 1e-7,
            success_epsilon: None,
            delta: 1e-4,
            seed: 0,
            max_gates: 10,
            free_phase: false,
        }
    }
}

impl OptimizationConfig {
    pub fn epsilon(&self, kind: ObjectiveKind) -> f64 {
        self.success_epsilon.unwrap_or_else(|| kind.default_epsilon())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub network: GateNetwork,
    /// Shared parameters; the global phase is appended in free-phase mode.
    pub params: Vec<f64>,
    /// Per marked item parameters for oracle networks.
    pub per_tau: Vec<(usize, Vec<f64>)>,
    pub objective_value: f64,
    /// Per constrained column for blocks, per marked item for oracles.
    pub success_probs: Vec<f64>,
    pub cnot_count: usize,
    pub restart: usize,
}
