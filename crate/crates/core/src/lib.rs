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

//! Blind oracular quantum computation at desk scale.
//!
//! Qubit order is big-endian throughout: qubit 0 is the most significant bit of a basis index.

pub mod angle;
pub mod cli;
pub mod database;
pub mod error;
pub mod grover;
pub mod io;
pub mod mbqc;
pub mod nv;
pub mod protocol;
pub mod quantum;
pub mod synthesis;
pub mod topology;

pub use error::{Error, Result};
