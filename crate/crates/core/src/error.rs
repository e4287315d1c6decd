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

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("basis index {0} appears in more than one group")]
    OverlappingGroups(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisOutOfRange { index: usize, dim: usize },
    #[error("cannot measure an empty register")]
    EmptyRegister,
    #[error("amplitude vector has length {0}, expected a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("invalid search instance: {0}")]
    InvalidInstance(String),
    #[error("angle consistency check failed: {0}")]
    AngleCheck(String),
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("unsupported gate family for this operation")]
    UnsupportedFamily,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("measurement order violates the flow at node {0}")]
    OrderViolatesFlow(usize),
    #[error("pattern has no flow")]
    MissingFlow,
    #[error("node {0} has no owner")]
    OwnershipGap(usize),
    #[error("register of {0} qubits is too large to simulate densely")]
    TooManyQubits(usize),
    #[error("angle denominator {0} is not a power of two")]
    BadDenominator(u32),
    #[error("no network found up to {0} two-qubit gates")]
    NotFound(usize),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
