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

//! File formats for synthesized networks and measurement patterns.
//!
//! Both are JSON documents tagged with `format` and `schema`. Pattern angles are exact `[p, q]`
//! pairs meaning `p·π/q`. Output is canonical (objects one key per line, scalar arrays inline),
//! so write → read → write is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::angle::{MeasurementAngle, PiFraction, MAX_DENOMINATOR};
use crate::database::Database;
use crate::error::{Error, Result};
use crate::grover::{hoyer_angles, BlockSet, SearchInstance};
use crate::mbqc::{branch_readout, simulate_pattern, MeasurementPattern, OpenGraph, Party};
use crate::quantum::{Matrix, StateVector, C64};
use crate::synthesis::objective::{network_flat, FitTarget, PovmProblem};
use crate::synthesis::search::column_fidelities;
use crate::synthesis::{BeqsResult, OptimizationConfig, SynthesisResult};
use crate::topology::{GateFamily, GateNetwork, Topology};

pub const SCHEMA_VERSION: u32 = 1;
pub const NETWORK_FORMAT: &str = "boqc-network";
pub const PATTERN_FORMAT: &str = "boqc-pattern";

/// Success threshold used by verification, `1 − δ`.
pub const VERIFY_THRESHOLD: f64 = 1.0 - 1e-4;

#[derive(Deserialize)]
struct Header {
    format: String,
    schema: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    Network,
    Pattern,
}

fn malformed(e: serde_json::Error) -> Error {
    Error::Format(format!("malformed file: {e}"))
}

/// Reads the `format`/`schema` header and rejects unknown versions.
pub fn detect(text: &str) -> Result<FileKind> {
    let h: Header = serde_json::from_str(text).map_err(malformed)?;
    if h.schema != SCHEMA_VERSION {
        return Err(Error::Format(format!("schema version {} not supported (expected {SCHEMA_VERSION})", h.schema)));
    }
    match h.format.as_str() {
        NETWORK_FORMAT => Ok(FileKind::Network),
        PATTERN_FORMAT => Ok(FileKind::Pattern),
        other => Err(Error::Format(format!("unknown format {other:?}"))),
    }
}

fn expect_kind(text: &str, kind: FileKind) -> Result<()> {
    let got = detect(text)?;
    if got != kind {
        return Err(Error::Format(format!("expected a {kind:?} file, got a {got:?} file")));
    }
    Ok(())
}

/// Canonical text: objects one key per line, arrays of scalars or of arrays inline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn has_object(v: &Value) -> bool {
    match v {
        Value::Object(_) => true,
        Value::Array(items) => items.iter().any(has_object),
        _ => false,
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(depth + 1), Value::String(k.clone()));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(depth));
        }
        Value::Array(items) if has_object(v) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", pad(depth));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, depth);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// An angle as written in a pattern file, kept unreduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(i64, u32)", into = "(i64, u32)")]
pub struct AnglePair {
    pub p: i64,
    pub q: u32,
}

impl AnglePair {
    pub fn angle(&self) -> PiFraction {
        PiFraction::new(self.p, self.q).expect("checked on construction")
    }
}

impl TryFrom<(i64, u32)> for AnglePair {
    type Error = Error;
    fn try_from((p, q): (i64, u32)) -> Result<Self> {
        if q == 0 || !q.is_power_of_two() || q > MAX_DENOMINATOR {
            return Err(Error::Format(format!("angle denominator {q} is not a power of two ≤ {MAX_DENOMINATOR}")));
        }
        Ok(AnglePair { p, q })
    }
}

impl From<AnglePair> for (i64, u32) {
    fn from(a: AnglePair) -> Self {
        (a.p, a.q)
    }
}

impl From<PiFraction> for AnglePair {
    fn from(f: PiFraction) -> Self {
        AnglePair { p: f.num(), q: f.den() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRole {
    Preparation,
    Oracle,
    DiffusionPi,
    DiffusionPsi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    pub role: BlockRole,
    pub family: GateFamily,
    pub topology: String,
    /// Shared parameters, three per single-qubit slot.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    /// Global phase fitted alongside, removed when the block is realized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_phase: Option<f64>,
    /// Per marked item parameters (oracle blocks).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_tau: Vec<(usize, Vec<f64>)>,
}

impl NetworkBlock {
    pub fn from_result(role: BlockRole, res: &SynthesisResult) -> Self {
        let np = res.network.param_count();
        let (params, global_phase) = if res.params.len() > np {
            (res.params[..np].to_vec(), Some(res.params[np]))
        } else {
            (res.params.clone(), None)
        };
        NetworkBlock {
            role,
            family: res.network.family,
            topology: res.network.topology.to_string(),
            params,
            global_phase,
            per_tau: res.per_tau.clone(),
        }
    }

    pub fn network(&self, wires: usize) -> Result<GateNetwork> {
        Ok(GateNetwork::new(Topology::parse(wires, &self.topology)?, self.family))
    }

    /// Realized matrix for the given parameter vector.
    pub fn matrix(&self, wires: usize, params: &[f64]) -> Result<Matrix> {
        let net = self.network(wires)?;
        if params.len() != net.param_count() {
            return Err(Error::ParamCount { expected: net.param_count(), got: params.len() });
        }
        let mut m = network_flat(&net, params).to_matrix();
        if let Some(g) = self.global_phase {
            m *= C64::from_polar(1.0, -g);
        }
        Ok(m)
    }

    fn validate(&self, wires: usize) -> Result<()> {
        let net = self.network(wires)?;
        let k = net.param_count();
        let check = |p: &[f64]| {
            if p.len() != k {
                return Err(Error::ParamCount { expected: k, got: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Format("non-finite parameter".into()));
            }
            Ok(())
        };
        if self.role == BlockRole::Oracle {
            if !self.params.is_empty() || self.per_tau.is_empty() {
                return Err(Error::Format("oracle blocks carry per-item parameters only".into()));
            }
            self.per_tau.iter().try_for_each(|(_, p)| check(p))
        } else {
            if !self.per_tau.is_empty() {
                return Err(Error::Format(format!("{:?} block cannot have per-item parameters", self.role)));
            }
            check(&self.params)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<OptimizationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_value: Option<f64>,
}

/// A synthesized block, or a whole search pipeline when an oracle block is present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub format: String,
    pub schema: u32,
    pub n: usize,
    pub w: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<Vec<usize>>>,
    pub blocks: Vec<NetworkBlock>,
    pub provenance: Provenance,
}

impl NetworkFile {
    pub fn new(
        n: usize,
        w: Vec<usize>,
        povm: Option<Vec<Vec<usize>>>,
        blocks: Vec<NetworkBlock>,
        provenance: Provenance,
    ) -> Self {
        NetworkFile { format: NETWORK_FORMAT.into(), schema: SCHEMA_VERSION, n, w, povm, blocks, provenance }
    }

    pub fn from_synthesis(
        n: usize,
        w: Vec<usize>,
        role: BlockRole,
        res: &SynthesisResult,
        cfg: &OptimizationConfig,
    ) -> Self {
        let prov = Provenance {
            source: "circuit search".into(),
            seed: Some(cfg.seed),
            config: Some(cfg.clone()),
            objective_value: Some(res.objective_value),
        };
        Self::new(n, w, None, vec![NetworkBlock::from_result(role, res)], prov)
    }

    pub fn from_beqs(
        n: usize,
        w: Vec<usize>,
        povm: Vec<Vec<usize>>,
        res: &BeqsResult,
        cfg: &OptimizationConfig,
    ) -> Self {
        let mut blocks = vec![
            NetworkBlock::from_result(BlockRole::Preparation, &res.a),
            NetworkBlock::from_result(BlockRole::Oracle, &res.oracle),
            NetworkBlock::from_result(BlockRole::DiffusionPi, &res.d_pi),
        ];
        if let Some(d) = &res.d_psi {
            blocks.push(NetworkBlock::from_result(BlockRole::DiffusionPsi, d));
        }
        let prov = Provenance {
            source: "blind search".into(),
            seed: Some(cfg.seed),
            config: Some(cfg.clone()),
            objective_value: Some(res.oracle.objective_value),
        };
        Self::new(n, w, Some(povm), blocks, prov)
    }

    pub fn block(&self, role: BlockRole) -> Option<&NetworkBlock> {
        self.blocks.iter().find(|b| b.role == role)
    }

    pub fn validate(&self) -> Result<()> {
        let db = Database::new(self.n, self.w.clone())?;
        if db.members() != self.w.as_slice() {
            return Err(Error::Format("database must be sorted without repeats".into()));
        }
        if self.blocks.is_empty() {
            return Err(Error::Format("no blocks".into()));
        }
        let mut roles: Vec<BlockRole> = self.blocks.iter().map(|b| b.role).collect();
        roles.sort_unstable();
        if roles.windows(2).any(|r| r[0] == r[1]) {
            return Err(Error::Format("each role may appear once".into()));
        }
        for b in &self.blocks {
            b.validate(self.n)?;
        }
        if let Some(o) = self.block(BlockRole::Oracle) {
            if let Some((t, _)) = o.per_tau.iter().find(|(t, _)| !self.w.contains(t)) {
                return Err(Error::Format(format!("oracle item {t} not in database")));
            }
            let h = hoyer_angles(self.w.len())?;
            let need = [
                (BlockRole::Preparation, true),
                (BlockRole::DiffusionPi, h.m > 0),
                (BlockRole::DiffusionPsi, h.psi > 0.0),
            ];
            if let Some((r, _)) = need.iter().find(|(r, needed)| *needed && self.block(*r).is_none()) {
                return Err(Error::Format(format!("pipeline is missing its {r:?} block")));
            }
        } else if self.blocks.len() != 1 {
            return Err(Error::Format("without an oracle a file holds a single block".into()));
        }
        if let Some(groups) = &self.povm {
            SearchInstance::new(self.n, self.w.clone(), self.w[0], Some(groups.clone()))?;
        }
        Ok(())
    }
}

pub fn read_network(text: &str) -> Result<NetworkFile> {
    expect_kind(text, FileKind::Network)?;
    let f: NetworkFile = serde_json::from_str(text).map_err(malformed)?;
    f.validate()?;
    Ok(f)
}

pub fn write_network(f: &NetworkFile) -> Result<String> {
    canonical_json(f)
}

/// A pattern with Alice's angles and per-item overlays for Oscar's nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub format: String,
    pub schema: u32,
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub angles: BTreeMap<usize, AnglePair>,
    pub owners: BTreeMap<usize, Party>,
    pub order: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overlays: BTreeMap<usize, BTreeMap<usize, AnglePair>>,
    /// Readout groups counted as success; singletons when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
}

impl PatternFile {
    pub fn graph(&self) -> Result<OpenGraph> {
        OpenGraph::new(self.nodes.clone(), self.edges.clone(), self.inputs.clone(), self.outputs.clone())
    }

    /// Items with an overlay; empty for a single fixed computation.
    pub fn taus(&self) -> Vec<usize> {
        self.overlays.keys().copied().collect()
    }

    /// The concrete pattern for item `tau` (base angles alone when `None`).
    pub fn pattern(&self, tau: Option<usize>) -> Result<MeasurementPattern> {
        let mut angles: BTreeMap<usize, MeasurementAngle> =
            self.angles.iter().map(|(&v, a)| (v, MeasurementAngle::Exact(a.angle()))).collect();
        if let Some(t) = tau {
            let overlay = self.overlays.get(&t).ok_or_else(|| Error::Format(format!("no overlay for item {t}")))?;
            for (&v, a) in overlay {
                angles.insert(v, MeasurementAngle::Exact(a.angle()));
            }
        }
        MeasurementPattern::new(self.graph()?, angles, self.owners.clone(), Some(self.order.clone()))
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.graph()?;
        let known = |v: &usize| g.nodes.contains(v);
        if let Some(v) = self.angles.keys().chain(self.owners.keys()).find(|v| !known(v)) {
            return Err(Error::Format(format!("angle or owner given for unknown node {v}")));
        }
        for (t, overlay) in &self.overlays {
            if let Some(v) = overlay.keys().find(|v| !known(v)) {
                return Err(Error::Format(format!("overlay for item {t} names unknown node {v}")));
            }
        }
        if let Some(v) = g.nodes.iter().find(|v| !self.owners.contains_key(v)) {
            return Err(Error::OwnershipGap(*v));
        }
        if self.overlays.is_empty() {
            self.pattern(None)?;
        }
        for t in self.taus() {
            self.pattern(Some(t))?;
        }
        Ok(())
    }

    pub fn from_pattern(
        p: &MeasurementPattern,
        overlays: BTreeMap<usize, BTreeMap<usize, PiFraction>>,
    ) -> Result<Self> {
        let exact = |v: usize, a: &MeasurementAngle| {
            a.exact().map(AnglePair::from).ok_or_else(|| Error::Format(format!("angle at node {v} is not exact")))
        };
        Ok(PatternFile {
            format: PATTERN_FORMAT.into(),
            schema: SCHEMA_VERSION,
            nodes: p.graph.nodes.clone(),
            edges: p.graph.edges.clone(),
            inputs: p.graph.inputs.clone(),
            outputs: p.graph.outputs.clone(),
            angles: p.angles.iter().map(|(&v, a)| Ok((v, exact(v, a)?))).collect::<Result<_>>()?,
            owners: p.owner.clone(),
            order: p.total_order.clone(),
            overlays: overlays
                .into_iter()
                .map(|(t, o)| (t, o.into_iter().map(|(v, a)| (v, a.into())).collect()))
                .collect(),
            groups: None,
        })
    }

    /// Readout values counted as success for item `tau`.
    pub fn group_of(&self, tau: usize) -> Vec<usize> {
        match &self.groups {
            Some(gs) => gs.iter().find(|g| g.contains(&tau)).cloned().unwrap_or_default(),
            None => vec![tau],
        }
    }
}

pub fn read_pattern(text: &str) -> Result<PatternFile> {
    expect_kind(text, FileKind::Pattern)?;
    let f: PatternFile = serde_json::from_str(text).map_err(malformed)?;
    f.validate()?;
    Ok(f)
}

pub fn write_pattern(f: &PatternFile) -> Result<String> {
    canonical_json(f)
}

/// Per-item success probabilities against a threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// What the entries are indexed by: `τ` or `column`.
    pub label: &'static str,
    pub entries: Vec<(usize, f64)>,
    pub threshold: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|&(_, p)| p >= self.threshold)
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min)
    }

    /// One line, e.g. `p_s ≥ 0.9999 for τ=0..5: PASS`.
    pub fn summary(&self) -> String {
        let keys: Vec<usize> = self.entries.iter().map(|e| e.0).collect();
        let range = match (keys.first(), keys.last()) {
            (Some(a), Some(b)) if keys.windows(2).all(|w| w[1] == w[0] + 1) && a != b => format!("{a}..{b}"),
            (Some(a), _) if keys.len() == 1 => a.to_string(),
            _ => format!("{{{}}}", keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")),
        };
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        format!("p_s ≥ {} for {}={range}: {verdict}", self.threshold, self.label)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, p) in &self.entries {
            let _ = writeln!(out, "{}={k}  p_s={p:.8}", self.label);
        }
        out.push_str(&self.summary());
        out
    }
}

/// Group success per marked item for a pipeline file; column fidelity for a single block.
pub fn verify_network(f: &NetworkFile) -> Result<VerifyReport> {
    f.validate()?;
    let inst = SearchInstance::new(f.n, f.w.clone(), f.w[0], f.povm.clone())?;
    let ideal = BlockSet::new(&inst)?;
    let Some(oracle) = f.block(BlockRole::Oracle) else {
        let b = &f.blocks[0];
        let s = b.matrix(f.n, &b.params)?;
        let fit = match b.role {
            BlockRole::Preparation => FitTarget::preparation(&ideal.a, &f.w),
            BlockRole::DiffusionPi => FitTarget::block(&ideal.d_pi, &f.w),
            BlockRole::DiffusionPsi => FitTarget::block(&ideal.d_psi, &f.w),
            BlockRole::Oracle => unreachable!("handled above"),
        };
        let entries = column_fidelities(&fit, &s).into_iter().enumerate().collect();
        return Ok(VerifyReport { label: "column", entries, threshold: VERIFY_THRESHOLD });
    };
    let h = hoyer_angles(f.w.len())?;
    let realized = |role: BlockRole, fallback: &Matrix| -> Result<Matrix> {
        match f.block(role) {
            Some(b) => b.matrix(f.n, &b.params),
            None => Ok(fallback.clone()),
        }
    };
    let problem = PovmProblem {
        n: f.n,
        w: f.w.clone(),
        groups: inst.groups(),
        q: oracle.per_tau.iter().map(|e| e.0).collect(),
        a: realized(BlockRole::Preparation, &ideal.a)?,
        d_pi: realized(BlockRole::DiffusionPi, &ideal.d_pi)?,
        d_psi: realized(BlockRole::DiffusionPsi, &ideal.d_psi)?,
        m: h.m,
        final_round: h.psi > 0.0,
    };
    let entries = oracle
        .per_tau
        .iter()
        .map(|(t, p)| Ok((*t, problem.success(&oracle.matrix(f.n, p)?, *t))))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { label: "τ", entries, threshold: VERIFY_THRESHOLD })
}

/// Histories sampled per item when verifying a pattern.
pub const PATTERN_HISTORIES: usize = 8;

/// Per item: the exact probability that the readout lands in the item's group, averaged over
/// outcome histories sampled with their Born weights. Also returns the peak live width.
pub fn verify_pattern(f: &PatternFile, seed: u64) -> Result<(VerifyReport, usize)> {
    f.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = StateVector::zero(f.inputs.len());
    let mut entries = Vec::new();
    let mut peak = 0;
    let taus = f.taus();
    for &tau in &taus {
        let p = f.pattern(Some(tau))?;
        if p.readout_nodes().len() != p.graph.outputs.len() {
            return Err(Error::InvalidPattern("verification needs a readout angle on every output".into()));
        }
        let deps = p.dependencies();
        let group = f.group_of(tau);
        let mut total = 0.0;
        for _ in 0..PATTERN_HISTORIES {
            let run = simulate_pattern(&p, &input, &mut rng)?;
            peak = peak.max(run.peak_width);
            let (probs, _, _) = branch_readout(&p, &deps, &input, &run.outcomes)?.expect("sampled history is possible");
            total += group.iter().map(|&j| probs.get(j).copied().unwrap_or(0.0)).sum::<f64>();
        }
        entries.push((tau, total / PATTERN_HISTORIES as f64));
    }
    Ok((VerifyReport { label: "τ", entries, threshold: VERIFY_THRESHOLD }, peak))
}

/// Shipped fixtures by name.
pub mod fixtures {
    pub const FIG3: &str = include_str!("../fixtures/fig3_network.json");
    pub const FIG4: &str = include_str!("../fixtures/fig4_pattern.json");
    pub const FIG5: &str = include_str!("../fixtures/fig5_pattern.json");

    pub const NAMES: [&str; 3] = ["fig3", "fig4", "fig5"];

    pub fn get(name: &str) -> Option<&'static str> {
        match name {
            "fig3" => Some(FIG3),
            "fig4" => Some(FIG4),
            "fig5" => Some(FIG5),
            _ => None,
        }
    }
}
