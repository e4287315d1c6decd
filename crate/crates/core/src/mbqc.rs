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

//! Measurement patterns on open graphs: flow, translation from gate networks, and adaptive
//! simulation.
//!
//! Measuring a node in angle `φ` with outcome 0 applies `H·diag(1, e^{−iφ})` to its flow
//! successor, so a gate-model phase `α` becomes the measurement angle `−α`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::MeasurementAngle;
use crate::error::{Error, Result};
use crate::quantum::{StateVector, BRANCH_CUTOFF, C64};
use crate::topology::{GateFamily, GateNetwork, Step};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenGraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    #[serde(skip)]
    adjacency: BTreeMap<usize, BTreeSet<usize>>,
}

impl OpenGraph {
    pub fn new(nodes: Vec<usize>, edges: Vec<(usize, usize)>, inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        if set.len() != nodes.len() {
            return Err(Error::InvalidPattern("duplicate node".into()));
        }
        let mut adjacency: BTreeMap<usize, BTreeSet<usize>> = nodes.iter().map(|&v| (v, BTreeSet::new())).collect();
        for &(a, b) in &edges {
            if !set.contains(&a) || !set.contains(&b) || a == b {
                return Err(Error::InvalidPattern(format!("bad edge ({a}, {b})")));
            }
            adjacency.get_mut(&a).expect("checked").insert(b);
            adjacency.get_mut(&b).expect("checked").insert(a);
        }
        if let Some(v) = inputs.iter().chain(&outputs).find(|v| !set.contains(v)) {
            return Err(Error::InvalidPattern(format!("terminal {v} is not a node")));
        }
        Ok(OpenGraph { nodes, edges, inputs, outputs, adjacency })
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[&v]
    }

    pub fn is_output(&self, v: usize) -> bool {
        self.outputs.contains(&v)
    }

    pub fn non_outputs(&self) -> Vec<usize> {
        self.nodes.iter().copied().filter(|v| !self.is_output(*v)).collect()
    }
}

/// A causal flow: successor map plus the layer of every node (outputs are layer 0, and a node
/// must be measured before every node in a lower layer).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub f: BTreeMap<usize, usize>,
    pub layer: BTreeMap<usize, usize>,
}

impl Flow {
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.layer[&a] > self.layer[&b]
    }

    /// Checks the three flow conditions against the layering.
    pub fn verify(&self, g: &OpenGraph) -> bool {
        let domain: BTreeSet<usize> = g.non_outputs().into_iter().collect();
        if self.f.keys().copied().collect::<BTreeSet<_>>() != domain {
            return false;
        }
        self.f.iter().all(|(&j, &fj)| {
            g.neighbors(j).contains(&fj)
                && !g.inputs.contains(&fj)
                && self.precedes(j, fj)
                && g.neighbors(fj).iter().all(|&k| k == j || self.precedes(j, k))
        })
    }

    /// Checks the flow conditions against a measurement sequence (outputs come last).
    pub fn respects_order(&self, g: &OpenGraph, order: &[usize]) -> Result<()> {
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let at = |v: usize| pos.get(&v).copied().unwrap_or(usize::MAX);
        for (&j, &fj) in &self.f {
            if !pos.contains_key(&j) {
                return Err(Error::OrderViolatesFlow(j));
            }
            if at(j) >= at(fj) || g.neighbors(fj).iter().any(|&k| k != j && at(j) >= at(k)) {
                return Err(Error::OrderViolatesFlow(j));
            }
        }
        Ok(())
    }

    /// Non-outputs by decreasing layer, smallest id first within a layer.
    pub fn default_order(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.f.keys().copied().collect();
        v.sort_by_key(|&x| (std::cmp::Reverse(self.layer[&x]), x));
        v
    }
}

/// Layer-by-layer causal flow construction, working back from the outputs.
pub fn find_flow(g: &OpenGraph) -> Option<Flow> {
    let mut f = BTreeMap::new();
    let mut layer: BTreeMap<usize, usize> = g.outputs.iter().map(|&v| (v, 0)).collect();
    let mut processed: BTreeSet<usize> = g.outputs.iter().copied().collect();
    let mut correctors: BTreeSet<usize> = processed.iter().copied().filter(|v| !g.inputs.contains(v)).collect();
    let mut k = 1;
    loop {
        let mut new_nodes = BTreeSet::new();
        let mut used = BTreeSet::new();
        for &v in &correctors {
            let outside: Vec<usize> = g.neighbors(v).iter().copied().filter(|u| !processed.contains(u)).collect();
            if let [u] = outside[..] {
                if new_nodes.insert(u) {
                    f.insert(u, v);
                    layer.insert(u, k);
                    used.insert(v);
                }
            }
        }
        if new_nodes.is_empty() {
            if processed.len() == g.nodes.len() {
                let flow = Flow { f, layer };
                return flow.verify(g).then_some(flow);
            }
            return None;
        }
        processed.extend(new_nodes.iter().copied());
        correctors = correctors.difference(&used).copied().collect();
        correctors.extend(new_nodes.into_iter().filter(|u| !g.inputs.contains(u)));
        k += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Oscar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPattern {
    pub graph: OpenGraph,
    /// Every non-output has an angle; outputs with an angle are measured as readout.
    pub angles: BTreeMap<usize, MeasurementAngle>,
    pub owner: BTreeMap<usize, Party>,
    pub total_order: Vec<usize>,
    pub flow: Flow,
}

impl MeasurementPattern {
    pub fn new(
        graph: OpenGraph,
        angles: BTreeMap<usize, MeasurementAngle>,
        owner: BTreeMap<usize, Party>,
        total_order: Option<Vec<usize>>,
    ) -> Result<Self> {
        let flow = find_flow(&graph).ok_or(Error::MissingFlow)?;
        let total_order = total_order.unwrap_or_else(|| flow.default_order());
        let pattern = MeasurementPattern { graph, angles, owner, total_order, flow };
        pattern.validate()?;
        Ok(pattern)
    }

    pub fn validate(&self) -> Result<()> {
        let non_out = self.graph.non_outputs();
        let mut sorted = self.total_order.clone();
        sorted.sort_unstable();
        let mut want = non_out.clone();
        want.sort_unstable();
        if sorted != want {
            return Err(Error::InvalidPattern("total order must list every non-output once".into()));
        }
        if let Some(v) = non_out.iter().find(|v| !self.angles.contains_key(v)) {
            return Err(Error::InvalidPattern(format!("node {v} has no angle")));
        }
        self.flow.respects_order(&self.graph, &self.total_order)
    }

    /// Outputs that carry an angle, in output order.
    pub fn readout_nodes(&self) -> Vec<usize> {
        self.graph.outputs.iter().copied().filter(|v| self.angles.contains_key(v)).collect()
    }

    /// Full measurement sequence: the total order, then the readout outputs.
    pub fn measurement_sequence(&self) -> Vec<usize> {
        let mut seq = self.total_order.clone();
        seq.extend(self.readout_nodes());
        seq
    }

    pub fn dependencies(&self) -> Dependencies {
        let mut x: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut z: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&i, &fi) in &self.flow.f {
            x.entry(fi).or_default().push(i);
            for &k in self.graph.neighbors(fi) {
                if k != i {
                    z.entry(k).or_default().push(i);
                }
            }
        }
        Dependencies { x, z }
    }

    /// Replaces angles at the listed nodes.
    pub fn with_overlay(&self, overlay: &BTreeMap<usize, MeasurementAngle>) -> Self {
        let mut p = self.clone();
        for (&k, &v) in overlay {
            p.angles.insert(k, v);
        }
        p
    }
}

/// Which earlier outcomes flip the sign (`x`) or add π (`z`) to each node's angle.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Dependencies {
    pub x: BTreeMap<usize, Vec<usize>>,
    pub z: BTreeMap<usize, Vec<usize>>,
}

impl Dependencies {
    fn parity(map: &BTreeMap<usize, Vec<usize>>, v: usize, s: &BTreeMap<usize, u8>) -> bool {
        map.get(&v).map(|deps| deps.iter().fold(0, |acc, d| acc ^ s.get(d).copied().unwrap_or(0)) == 1).unwrap_or(false)
    }

    /// `(s_X, s_Z)` for node `v` given the outcomes so far.
    pub fn signals(&self, v: usize, s: &BTreeMap<usize, u8>) -> (bool, bool) {
        (Self::parity(&self.x, v, s), Self::parity(&self.z, v, s))
    }
}

/// Live qubits of a lazily built graph state, indexed by node.
#[derive(Clone, Debug)]
pub struct LazyRegister {
    pub state: StateVector,
    pub live: Vec<usize>,
    created: BTreeSet<usize>,
    pub peak: usize,
}

impl LazyRegister {
    pub fn new(inputs: &[usize], input_state: &StateVector) -> Result<Self> {
        if input_state.num_qubits() != inputs.len() {
            return Err(Error::InvalidPattern(format!(
                "input state has {} qubits for {} inputs",
                input_state.num_qubits(),
                inputs.len()
            )));
        }
        Ok(LazyRegister {
            state: input_state.clone(),
            live: inputs.to_vec(),
            created: inputs.iter().copied().collect(),
            peak: inputs.len(),
        })
    }

    pub fn is_created(&self, v: usize) -> bool {
        self.created.contains(&v)
    }

    fn index(&self, v: usize) -> Result<usize> {
        self.live.iter().position(|&x| x == v).ok_or_else(|| Error::InvalidPattern(format!("node {v} is not live")))
    }

    /// Adds `v` in `init` and entangles it with its live neighbors.
    pub fn create(&mut self, g: &OpenGraph, v: usize, init: &StateVector) -> Result<()> {
        if self.created.contains(&v) {
            return Ok(());
        }
        self.state = self.state.tensor(init);
        self.live.push(v);
        self.created.insert(v);
        self.peak = self.peak.max(self.live.len());
        let me = self.live.len() - 1;
        for &k in g.neighbors(v) {
            if let Some(pos) = self.live.iter().position(|&x| x == k) {
                if pos != me {
                    self.state.apply_cphase_mut(pos, me)?;
                }
            }
        }
        Ok(())
    }

    pub fn probabilities(&self, v: usize, phi: f64) -> Result<[f64; 2]> {
        self.state.branch_probabilities(self.index(v)?, phi)
    }

    /// Measures `v` with the outcome chosen by `pick` from `p0`. Returns `None` when the chosen
    /// branch is below the cutoff.
    pub fn measure<F: FnOnce(f64) -> u8>(&mut self, v: usize, phi: f64, pick: F) -> Result<Option<(u8, f64)>> {
        let q = self.index(v)?;
        let [p0, _] = self.state.branch_probabilities(q, phi)?;
        let outcome = pick(p0);
        match self.state.collapse(q, phi, outcome)? {
            Some((p, post)) => {
                self.state = post;
                self.live.remove(q);
                Ok(Some((outcome, p)))
            }
            None => Ok(None),
        }
    }

    pub fn apply_single(&mut self, v: usize, m: &[[C64; 2]; 2]) -> Result<()> {
        let q = self.index(v)?;
        self.state.apply_matrix_mut(q, m)
    }

    /// The register restricted to `order`, which must list exactly the live nodes.
    pub fn into_ordered(self, order: &[usize]) -> Result<StateVector> {
        let mut state = self.state;
        let mut live = self.live;
        for &v in order {
            let q = live.iter().position(|&x| x == v).ok_or(Error::InvalidPattern(format!("{v} not live")))?;
            state = state.move_to_end(q)?;
            let x = live.remove(q);
            live.push(x);
        }
        Ok(state)
    }
}

/// How to pick each measurement outcome.
pub enum Outcomes<'a, R: Rng + ?Sized> {
    Sample(&'a mut R),
    /// Outcome per node; unlisted nodes get 0.
    Forced(&'a BTreeMap<usize, u8>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternRun {
    pub outcomes: BTreeMap<usize, u8>,
    /// Readout bits of measured outputs, first output most significant.
    pub readout: Option<usize>,
    /// Remaining outputs, corrected, in output order.
    pub output: StateVector,
    /// Probability of the realized outcome history.
    pub probability: f64,
    pub peak_width: usize,
}

fn plus() -> StateVector {
    crate::quantum::plus_theta(&MeasurementAngle::Real(0.0))
}

/// Runs measurements up to, but excluding, the readout outputs.
fn run_prefix<R: Rng + ?Sized>(
    p: &MeasurementPattern,
    deps: &Dependencies,
    input: &StateVector,
    outcomes: &mut Outcomes<'_, R>,
) -> Result<Option<(LazyRegister, BTreeMap<usize, u8>, f64)>> {
    p.validate()?;
    let g = &p.graph;
    let mut reg = LazyRegister::new(&g.inputs, input)?;
    let mut s = BTreeMap::new();
    let mut prob = 1.0;
    for &j in &p.total_order {
        reg.create(g, j, &plus())?;
        for &k in g.neighbors(j) {
            reg.create(g, k, &plus())?;
        }
        let (sx, sz) = deps.signals(j, &s);
        let phi = p.angles[&j].corrected(sx, sz).radians();
        let res =
            match outcomes {
                Outcomes::Sample(rng) => {
                    let r: f64 = rng.random();
                    reg.measure(j, phi, |p0| {
                        if p0 < BRANCH_CUTOFF || (r >= p0 && 1.0 - p0 >= BRANCH_CUTOFF) {
                            1
                        } else {
                            0
                        }
                    })?
                }
                Outcomes::Forced(map) => {
                    let b = map.get(&j).copied().unwrap_or(0);
                    reg.measure(j, phi, |_| b)?
                }
            };
        let Some((b, pb)) = res else {
            return Ok(None);
        };
        prob *= pb;
        s.insert(j, b);
    }
    for &o in &g.outputs {
        reg.create(g, o, &plus())?;
    }
    Ok(Some((reg, s, prob)))
}

/// Readout distribution (indexed as in [`PatternRun::readout`]) after the prefix.
fn readout_probs(
    p: &MeasurementPattern,
    deps: &Dependencies,
    reg: &LazyRegister,
    s: &BTreeMap<usize, u8>,
) -> Result<Vec<f64>> {
    let nodes = p.readout_nodes();
    let mut out = vec![0.0; 1 << nodes.len()];
    readout_rec(p, deps, reg, s, &nodes, 0, 0, 1.0, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn readout_rec(
    p: &MeasurementPattern,
    deps: &Dependencies,
    reg: &LazyRegister,
    s: &BTreeMap<usize, u8>,
    nodes: &[usize],
    k: usize,
    bits: usize,
    prob: f64,
    out: &mut [f64],
) -> Result<()> {
    if k == nodes.len() {
        out[bits] += prob;
        return Ok(());
    }
    let v = nodes[k];
    let (sx, sz) = deps.signals(v, s);
    let phi = p.angles[&v].corrected(sx, sz).radians();
    for b in 0..2u8 {
        let mut r = reg.clone();
        if let Some((_, pb)) = r.measure(v, phi, |_| b)? {
            let mut s2 = s.clone();
            s2.insert(v, b);
            readout_rec(p, deps, &r, &s2, nodes, k + 1, bits << 1 | b as usize, prob * pb, out)?;
        }
    }
    Ok(())
}

fn finish(
    p: &MeasurementPattern,
    deps: &Dependencies,
    mut reg: LazyRegister,
    s: &BTreeMap<usize, u8>,
) -> Result<StateVector> {
    let rest: Vec<usize> = p.graph.outputs.iter().copied().filter(|v| !p.angles.contains_key(v)).collect();
    for &o in &rest {
        let (sx, sz) = deps.signals(o, s);
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        if sz {
            reg.apply_single(o, &[[one, z], [z, -one]])?;
        }
        if sx {
            reg.apply_single(o, &[[z, one], [one, z]])?;
        }
    }
    reg.into_ordered(&rest)
}

pub fn simulate_with<R: Rng + ?Sized>(
    p: &MeasurementPattern,
    deps: &Dependencies,
    input: &StateVector,
    mut outcomes: Outcomes<'_, R>,
) -> Result<Option<PatternRun>> {
    let Some((mut reg, mut s, mut prob)) = run_prefix(p, deps, input, &mut outcomes)? else {
        return Ok(None);
    };
    let mut peak = reg.peak;
    let mut readout = None;
    let nodes = p.readout_nodes();
    if !nodes.is_empty() {
        let mut bits = 0;
        for &v in &nodes {
            let (sx, sz) = deps.signals(v, &s);
            let phi = p.angles[&v].corrected(sx, sz).radians();
            let res = match &mut outcomes {
                Outcomes::Sample(rng) => {
                    let r: f64 = rng.random();
                    reg.measure(v, phi, |p0| u8::from(!(p0 >= BRANCH_CUTOFF && (r < p0 || 1.0 - p0 < BRANCH_CUTOFF))))?
                }
                Outcomes::Forced(map) => {
                    let b = map.get(&v).copied().unwrap_or(0);
                    reg.measure(v, phi, |_| b)?
                }
            };
            let Some((b, pb)) = res else {
                return Ok(None);
            };
            prob *= pb;
            s.insert(v, b);
            bits = bits << 1 | b as usize;
        }
        readout = Some(bits);
    }
    peak = peak.max(reg.peak);
    let output = finish(p, deps, reg, &s)?;
    Ok(Some(PatternRun { outcomes: s, readout, output, probability: prob, peak_width: peak }))
}

/// Samples one run of the pattern with its flow-derived corrections.
pub fn simulate_pattern<R: Rng + ?Sized>(
    p: &MeasurementPattern,
    input: &StateVector,
    rng: &mut R,
) -> Result<PatternRun> {
    let run = simulate_with(p, &p.dependencies(), input, Outcomes::Sample(rng))?;
    Ok(run.expect("sampled branches have positive probability"))
}

/// Exact readout distribution and corrected remaining outputs for one outcome history of the
/// measured non-outputs. `None` if that history has zero probability.
pub fn branch_readout(
    p: &MeasurementPattern,
    deps: &Dependencies,
    input: &StateVector,
    history: &BTreeMap<usize, u8>,
) -> Result<Option<(Vec<f64>, StateVector, usize)>> {
    let mut forced = Outcomes::<rand_chacha::ChaCha8Rng>::Forced(history);
    let Some((reg, s, _)) = run_prefix(p, deps, input, &mut forced)? else {
        return Ok(None);
    };
    let probs = readout_probs(p, deps, &reg, &s)?;
    let peak = reg.peak;
    if p.readout_nodes().is_empty() {
        return Ok(Some((probs, finish(p, deps, reg, &s)?, peak)));
    }
    Ok(Some((probs, StateVector::zero(0), peak)))
}

/// Samples `shots` histories and checks that each gives the same readout distribution (or the
/// same remaining output state up to phase) within 1e-9.
pub fn determinism_check_with<R: Rng + ?Sized>(
    p: &MeasurementPattern,
    deps: &Dependencies,
    input: &StateVector,
    shots: usize,
    rng: &mut R,
) -> Result<bool> {
    let mut reference: Option<(Vec<f64>, StateVector)> = None;
    for _ in 0..shots {
        let history: BTreeMap<usize, u8> = p.total_order.iter().map(|&v| (v, rng.random_range(0..2u8))).collect();
        let Some((probs, out, _)) = branch_readout(p, deps, input, &history)? else {
            continue;
        };
        match &reference {
            None => reference = Some((probs, out)),
            Some((rp, ro)) => {
                let same_probs = rp.iter().zip(&probs).all(|(a, b)| (a - b).abs() < 1e-9);
                let same_state = (ro.overlap(&out) - 1.0).abs() < 1e-9;
                if !same_probs || !same_state {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn determinism_check<R: Rng + ?Sized>(
    p: &MeasurementPattern,
    input: &StateVector,
    shots: usize,
    rng: &mut R,
) -> Result<bool> {
    determinism_check_with(p, &p.dependencies(), input, shots, rng)
}

/// Translates a CPHASE-family network: each single-qubit slot becomes three measured nodes on
/// its wire and each CPHASE an edge between the wires' current nodes. Inputs are nodes
/// `1..=wires`, the rest numbered by creation.
pub fn circuit_to_pattern(net: &GateNetwork, params: &[f64]) -> Result<MeasurementPattern> {
    if net.family != GateFamily::CphaseRz {
        return Err(Error::UnsupportedFamily);
    }
    if params.len() != net.param_count() {
        return Err(Error::ParamCount { expected: net.param_count(), got: params.len() });
    }
    let wires = net.wires();
    let mut current: Vec<usize> = (1..=wires).collect();
    let mut next = wires + 1;
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut angles = BTreeMap::new();
    let toggle = |edges: &mut BTreeSet<(usize, usize)>, a: usize, b: usize| {
        let e = (a.min(b), a.max(b));
        if !edges.remove(&e) {
            edges.insert(e);
        }
    };
    for step in net.steps() {
        match step {
            Step::Single { wire, offset } => {
                for &x in &params[offset..offset + 3] {
                    let v = next;
                    next += 1;
                    toggle(&mut edges, current[wire], v);
                    angles.insert(current[wire], MeasurementAngle::Real(-x));
                    current[wire] = v;
                }
            }
            Step::Entangle { control, target } => toggle(&mut edges, current[control], current[target]),
        }
    }
    let graph = OpenGraph::new((1..next).collect(), edges.into_iter().collect(), (1..=wires).collect(), current)?;
    let owner = graph.nodes.iter().map(|&v| (v, Party::Alice)).collect();
    MeasurementPattern::new(graph, angles, owner, None)
}
