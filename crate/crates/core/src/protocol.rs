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

//! Three-party blind execution of a measurement pattern.
//!
//! Alice (client) and Oscar (oracle) own disjoint sets of nodes. They share a seed `ξ`, expand
//! it into flip bits `r`, and hide each node's angle behind a random offset `θ` on the `π/512`
//! grid. Bob (server) only sees the graph, the announced angles `δ = φ' + θ + rπ` and his own
//! outcomes `b`; the owners recover `s = b ⊕ r`.
//!
//! Input nodes are sent as `|0⟩`. Rotating `|0⟩` about Z is trivial, so any offset is consistent
//! with it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angle::{MeasurementAngle, PiFraction, MAX_DENOMINATOR};
use crate::error::{Error, Result};
use crate::mbqc::{Dependencies, LazyRegister, MeasurementPattern, Party};
use crate::quantum::{plus_theta, StateVector, BRANCH_CUTOFF};

/// Largest register `run_boqc` will build densely.
pub const MAX_DENSE_QUBITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Alice,
    Oscar,
    Bob,
}

impl From<Party> for Role {
    fn from(p: Party) -> Self {
        match p {
            Party::Alice => Role::Alice,
            Party::Oscar => Role::Oscar,
        }
    }
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::Alice => "alice",
            Role::Oscar => "oscar",
            Role::Bob => "bob",
        }
    }
}

/// Expands `ξ` into `length` bits. Deterministic and not cryptographic: anyone guessing `ξ`
/// (probability `2^{−|ξ|}`) learns `r`.
pub fn prng_expand(xi: &[bool], length: usize) -> Vec<bool> {
    let mut seed = [0u8; 32];
    for (i, &b) in xi.iter().take(256).enumerate() {
        seed[i / 8] |= u8::from(b) << (i % 8);
    }
    // The length of ξ is folded in so that prefixes of one another differ.
    seed[31] ^= xi.len() as u8;
    let mut rng = ChaCha8Rng::from_seed(seed);
    (0..length).map(|_| rng.random()).collect()
}

/// Remote state preparation of `|+_θ⟩`: the server ends up with `|+_{θ+sπ}⟩` for a uniform
/// bit `s` that only the client learns.
pub fn rsp_channel<R: Rng + ?Sized>(theta: &MeasurementAngle, rng: &mut R) -> (StateVector, bool) {
    let s: bool = rng.random();
    let delivered = theta.corrected(false, s);
    (plus_theta(&delivered), s)
}

/// Grid the blinding offsets are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleGrid {
    /// `kπ/512`.
    Fine,
    /// `kπ/4`, the eight-angle set.
    Eighths,
}

impl AngleGrid {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> PiFraction {
        match self {
            AngleGrid::Fine => PiFraction::grid(rng.random_range(0..2 * MAX_DENOMINATOR as i64)),
            AngleGrid::Eighths => PiFraction::new(rng.random_range(0..8), 4).expect("power of two"),
        }
    }
}

/// Secrets held by one client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClientState {
    pub role: Role,
    /// Offsets for the nodes this client owns.
    pub theta: BTreeMap<usize, PiFraction>,
    /// Flip bits, indexed by position in the measurement sequence; identical at both clients.
    pub r: Vec<bool>,
    /// RSP bits received for owned nodes.
    pub rsp: BTreeMap<usize, bool>,
}

/// Bob's state holds quantum data and public information only.
#[derive(Clone, Debug)]
pub struct BobState {
    pub register: LazyRegister,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MessageKind {
    Seed(Vec<bool>),
    /// A qubit for `node`; its state goes straight into Bob's register.
    Qubit(usize),
    Angle(usize, MeasurementAngle),
    Outcome(usize, u8),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub step: usize,
    pub sender: Role,
    pub receivers: Vec<Role>,
    pub kind: MessageKind,
}

/// What Bob sees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BobEvent {
    Qubit { step: usize, sender: Role, node: usize },
    Angle { step: usize, sender: Role, node: usize, value: MeasurementAngle },
    Outcome { step: usize, node: usize, bit: u8 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub events: Vec<BobEvent>,
}

fn angle_text(a: &MeasurementAngle) -> String {
    match a.exact().and_then(|p| p.grid_index()) {
        Some(k) => format!("{k}/{MAX_DENOMINATOR}"),
        None => format!("{}", a.radians()),
    }
}

impl Transcript {
    fn from_log(p: &MeasurementPattern, log: &[Message]) -> Self {
        let events = log
            .iter()
            .filter(|m| m.receivers.contains(&Role::Bob) || m.sender == Role::Bob)
            .filter_map(|m| match &m.kind {
                MessageKind::Seed(_) => None,
                MessageKind::Qubit(v) => Some(BobEvent::Qubit { step: m.step, sender: m.sender, node: *v }),
                MessageKind::Angle(v, a) => {
                    Some(BobEvent::Angle { step: m.step, sender: m.sender, node: *v, value: *a })
                }
                MessageKind::Outcome(v, b) => Some(BobEvent::Outcome { step: m.step, node: *v, bit: *b }),
            })
            .collect();
        Transcript { nodes: p.graph.nodes.clone(), edges: p.graph.edges.clone(), events }
    }

    /// One event per line: `step sender kind node value`, angles as `k/512` (units of π).
    pub fn to_event_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            match e {
                BobEvent::Qubit { step, sender, node } => writeln!(out, "{step} {} qubit {node} -", sender.name()),
                BobEvent::Angle { step, sender, node, value } => {
                    writeln!(out, "{step} {} angle {node} {}", sender.name(), angle_text(value))
                }
                BobEvent::Outcome { step, node, bit } => writeln!(out, "{step} bob outcome {node} {bit}"),
            }
            .expect("writing to a string");
        }
        out
    }

    pub fn angles(&self) -> Vec<(usize, MeasurementAngle)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                BobEvent::Angle { node, value, .. } => Some((*node, *value)),
                _ => None,
            })
            .collect()
    }

    pub fn outcomes(&self) -> Vec<(usize, u8)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                BobEvent::Outcome { node, bit, .. } => Some((*node, *bit)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlindingConfig {
    pub grid: AngleGrid,
    pub seed_bits: usize,
    /// Off gives the broken variant that announces the corrected angles in the clear.
    pub blind: bool,
}

impl Default for BlindingConfig {
    fn default() -> Self {
        BlindingConfig { grid: AngleGrid::Fine, seed_bits: 64, blind: true }
    }
}

/// Secrets for one run, drawn up front so runs can be replayed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSecrets {
    pub xi: Vec<bool>,
    pub alice: ClientState,
    pub oscar: ClientState,
}

impl RunSecrets {
    pub fn draw<R: Rng + ?Sized>(p: &MeasurementPattern, cfg: &BlindingConfig, rng: &mut R) -> Result<Self> {
        let seq = p.measurement_sequence();
        let xi: Vec<bool> = (0..cfg.seed_bits).map(|_| rng.random()).collect();
        let r = if cfg.blind { prng_expand(&xi, seq.len().max(cfg.seed_bits)) } else { vec![false; seq.len()] };
        let mut alice = ClientState { role: Role::Alice, theta: BTreeMap::new(), r: r.clone(), rsp: BTreeMap::new() };
        let mut oscar = ClientState { role: Role::Oscar, theta: BTreeMap::new(), r, rsp: BTreeMap::new() };
        for &v in &p.graph.nodes {
            let theta = if cfg.blind && !p.graph.inputs.contains(&v) { cfg.grid.draw(rng) } else { PiFraction::ZERO };
            match owner(p, v)? {
                Party::Alice => alice.theta.insert(v, theta),
                Party::Oscar => oscar.theta.insert(v, theta),
            };
        }
        Ok(RunSecrets { xi, alice, oscar })
    }

    /// No blinding at all.
    pub fn zero(p: &MeasurementPattern) -> Result<Self> {
        let cfg = BlindingConfig { blind: false, seed_bits: 0, ..Default::default() };
        Self::draw(p, &cfg, &mut ChaCha8Rng::seed_from_u64(0))
    }

    fn client(&self, party: Party) -> &ClientState {
        match party {
            Party::Alice => &self.alice,
            Party::Oscar => &self.oscar,
        }
    }

    fn client_mut(&mut self, party: Party) -> &mut ClientState {
        match party {
            Party::Alice => &mut self.alice,
            Party::Oscar => &mut self.oscar,
        }
    }
}

fn owner(p: &MeasurementPattern, v: usize) -> Result<Party> {
    p.owner.get(&v).copied().ok_or(Error::OwnershipGap(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoqcResult {
    /// Recovered readout, first output most significant.
    pub readout: usize,
    /// Recovered outcome per measured node.
    pub outcomes: BTreeMap<usize, u8>,
    pub peak_width: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every qubit delivered directly and entangled up front.
    Dense,
    /// RSP delivery just in time, lazy edges, measured qubits freed.
    Optimized,
}

/// Bob's choice of outcome for each measurement.
pub enum BobOutcomes<'a> {
    Sample(&'a mut ChaCha8Rng),
    Forced(&'a BTreeMap<usize, u8>),
}

/// Runs the protocol with fixed secrets. Returns `None` when a forced outcome has zero
/// probability; otherwise the result, transcript, message log and history probability.
pub fn execute(
    p: &MeasurementPattern,
    secrets: &RunSecrets,
    schedule: Schedule,
    bob: BobOutcomes<'_>,
    rsp_rng: &mut ChaCha8Rng,
) -> Result<Option<(BoqcResult, Transcript, Vec<Message>, f64)>> {
    p.validate()?;
    let g = &p.graph;
    for &v in &g.nodes {
        owner(p, v)?;
    }
    if let Some(o) = g.outputs.iter().find(|o| !p.angles.contains_key(o)) {
        return Err(Error::InvalidPattern(format!("output {o} has no readout angle")));
    }
    if schedule == Schedule::Dense && g.nodes.len() > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits(g.nodes.len()));
    }
    let mut secrets = secrets.clone();
    let deps: Dependencies = p.dependencies();
    let seq = p.measurement_sequence();
    let mut log = Vec::new();
    let mut step = 0;
    let mut send = |log: &mut Vec<Message>, sender: Role, receivers: Vec<Role>, kind: MessageKind| {
        log.push(Message { step, sender, receivers, kind });
        step += 1;
    };
    send(&mut log, Role::Alice, vec![Role::Oscar], MessageKind::Seed(secrets.xi.clone()));

    let inputs_state = StateVector::zero(g.inputs.len());
    let mut bob_state = BobState { register: LazyRegister::new(&g.inputs, &inputs_state)? };
    for &v in &g.inputs {
        send(&mut log, owner(p, v)?.into(), vec![Role::Bob], MessageKind::Qubit(v));
    }

    let mut deliver = |v: usize,
                       bob_state: &mut BobState,
                       secrets: &mut RunSecrets,
                       log: &mut Vec<Message>,
                       send: &mut dyn FnMut(&mut Vec<Message>, Role, Vec<Role>, MessageKind)|
     -> Result<()> {
        if bob_state.register.is_created(v) {
            return Ok(());
        }
        let party = owner(p, v)?;
        let theta = MeasurementAngle::Exact(secrets.client(party).theta[&v]);
        let state = match schedule {
            Schedule::Dense => plus_theta(&theta),
            Schedule::Optimized => {
                let (st, s) = rsp_channel(&theta, rsp_rng);
                secrets.client_mut(party).rsp.insert(v, s);
                st
            }
        };
        send(log, party.into(), vec![Role::Bob], MessageKind::Qubit(v));
        bob_state.register.create(g, v, &state)
    };

    if schedule == Schedule::Dense {
        let mut order: Vec<usize> = g.nodes.iter().copied().filter(|v| !g.inputs.contains(v)).collect();
        order.sort_unstable();
        for v in order {
            deliver(v, &mut bob_state, &mut secrets, &mut log, &mut send)?;
        }
    }

    let mut bob = bob;
    let mut s: BTreeMap<usize, u8> = BTreeMap::new();
    let mut prob = 1.0;
    let mut readout = 0usize;
    for (pos, &j) in seq.iter().enumerate() {
        if schedule == Schedule::Optimized {
            for &k in g.neighbors(j) {
                deliver(k, &mut bob_state, &mut secrets, &mut log, &mut send)?;
            }
            deliver(j, &mut bob_state, &mut secrets, &mut log, &mut send)?;
        }
        let party = owner(p, j)?;
        let client = secrets.client(party);
        let (sx, sz) = deps.signals(j, &s);
        let r = client.r.get(pos).copied().unwrap_or(false);
        let rsp = client.rsp.get(&j).copied().unwrap_or(false);
        let theta = MeasurementAngle::Exact(client.theta[&j]);
        let announced = p.angles[&j].corrected(sx, sz).plus(&theta).corrected(false, r ^ rsp);
        send(&mut log, party.into(), vec![Role::Bob], MessageKind::Angle(j, announced));
        let res = match &mut bob {
            BobOutcomes::Sample(rng) => {
                let u: f64 = rng.random();
                bob_state.register.measure(j, announced.radians(), |p0| {
                    u8::from(!(p0 >= BRANCH_CUTOFF && (u < p0 || 1.0 - p0 < BRANCH_CUTOFF)))
                })?
            }
            BobOutcomes::Forced(map) => {
                let b = map.get(&j).copied().unwrap_or(0);
                bob_state.register.measure(j, announced.radians(), |_| b)?
            }
        };
        let Some((b, pb)) = res else {
            return Ok(None);
        };
        prob *= pb;
        send(&mut log, Role::Bob, vec![Role::Alice, Role::Oscar], MessageKind::Outcome(j, b));
        let truth = b ^ u8::from(r);
        s.insert(j, truth);
        if g.is_output(j) {
            readout = readout << 1 | truth as usize;
        }
    }
    let transcript = Transcript::from_log(p, &log);
    let result = BoqcResult { readout, outcomes: s, peak_width: bob_state.register.peak };
    Ok(Some((result, transcript, log, prob)))
}

fn rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng, ChaCha8Rng) {
    let mut secret = ChaCha8Rng::seed_from_u64(seed);
    secret.set_stream(1);
    let mut bob = ChaCha8Rng::seed_from_u64(seed);
    bob.set_stream(2);
    let mut rsp = ChaCha8Rng::seed_from_u64(seed);
    rsp.set_stream(3);
    (secret, bob, rsp)
}

fn run(
    p: &MeasurementPattern,
    cfg: &BlindingConfig,
    seed: u64,
    schedule: Schedule,
) -> Result<(BoqcResult, Transcript)> {
    let (mut secret_rng, mut bob_rng, mut rsp_rng) = rngs(seed);
    let secrets = RunSecrets::draw(p, cfg, &mut secret_rng)?;
    let (res, tr, _, _) = execute(p, &secrets, schedule, BobOutcomes::Sample(&mut bob_rng), &mut rsp_rng)?
        .expect("sampled branches have positive probability");
    Ok((res, tr))
}

/// Plain protocol: all qubits sent and entangled before any measurement.
pub fn run_boqc(p: &MeasurementPattern, cfg: &BlindingConfig, seed: u64) -> Result<(BoqcResult, Transcript)> {
    run(p, cfg, seed, Schedule::Dense)
}

/// Optimized protocol: RSP delivery and lazy entangling along the measurement sequence.
/// Returns the peak number of live node qubits as well.
pub fn run_boqc_optimized(
    p: &MeasurementPattern,
    cfg: &BlindingConfig,
    seed: u64,
) -> Result<(BoqcResult, Transcript, usize)> {
    let (res, tr) = run(p, cfg, seed, Schedule::Optimized)?;
    let width = res.peak_width;
    Ok((res, tr, width))
}

/// Exact recovered-readout distribution for fixed secrets, by enumerating Bob's outcomes.
pub fn exact_readout_distribution(
    p: &MeasurementPattern,
    secrets: &RunSecrets,
    schedule: Schedule,
) -> Result<Vec<f64>> {
    let seq = p.measurement_sequence();
    if seq.len() > 16 {
        return Err(Error::TooManyQubits(seq.len()));
    }
    let mut dist = vec![0.0; 1 << p.graph.outputs.len()];
    for bits in 0..1usize << seq.len() {
        let forced: BTreeMap<usize, u8> = seq.iter().enumerate().map(|(i, &v)| (v, (bits >> i & 1) as u8)).collect();
        let mut rsp_rng = ChaCha8Rng::seed_from_u64(0);
        if let Some((res, _, _, prob)) = execute(p, secrets, schedule, BobOutcomes::Forced(&forced), &mut rsp_rng)? {
            dist[res.readout] += prob;
        }
    }
    Ok(dist)
}

/// Per-node marginals of Bob's view: announced-angle quadrant (four bins) and outcome bit.
fn marginals(tr: &Transcript) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (_, a) in tr.angles() {
        let q = (a.radians().rem_euclid(std::f64::consts::TAU) / std::f64::consts::FRAC_PI_2).floor() as usize;
        out.push((0, q.min(3)));
    }
    for (_, b) in tr.outcomes() {
        out.push((1, b as usize));
    }
    out
}

/// Largest total-variation distance between the two computations over Bob's per-event
/// marginals: the quadrant of each announced angle and each outcome bit, with fresh secrets per
/// sample. Near zero for a blind protocol.
pub fn blindness_test(
    a: &MeasurementPattern,
    b: &MeasurementPattern,
    cfg: &BlindingConfig,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if a.graph != b.graph || a.owner != b.owner {
        return Err(Error::InvalidPattern("computations must share graph and ownership".into()));
    }
    let histogram = |p: &MeasurementPattern, stream: u64| -> Result<Vec<[usize; 4]>> {
        let mut counts: Vec<[usize; 4]> = Vec::new();
        for k in 0..samples {
            let (_, tr) = run_boqc(p, cfg, seed ^ (stream << 40) ^ k as u64)?;
            let m = marginals(&tr);
            if counts.is_empty() {
                counts = vec![[0; 4]; m.len()];
            }
            for (slot, (_, bin)) in counts.iter_mut().zip(m) {
                slot[bin] += 1;
            }
        }
        Ok(counts)
    };
    let ha = histogram(a, 1)?;
    let hb = histogram(b, 2)?;
    let n = samples as f64;
    Ok(ha
        .iter()
        .zip(&hb)
        .map(|(x, y)| 0.5 * x.iter().zip(y).map(|(&i, &j)| (i as f64 - j as f64).abs() / n).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Chi-square p-value per announced angle against the uniform law on the eight-angle grid.
pub fn announcement_uniformity(p: &MeasurementPattern, samples: usize, seed: u64) -> Result<Vec<(usize, f64)>> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let cfg = BlindingConfig { grid: AngleGrid::Eighths, ..Default::default() };
    let mut counts: BTreeMap<usize, [usize; 8]> = BTreeMap::new();
    for k in 0..samples {
        let (_, tr) = run_boqc(p, &cfg, seed.wrapping_add(k as u64))?;
        for (v, a) in tr.angles() {
            let e = a.exact().ok_or_else(|| Error::InvalidPattern("pattern angles must be exact".into()))?;
            if e.den() > 4 {
                return Err(Error::InvalidPattern(format!("angle at {v} is off the eight-angle grid")));
            }
            let idx = (e.num() * (4 / e.den()) as i64) as usize;
            counts.entry(v).or_insert([0; 8])[idx] += 1;
        }
    }
    let chi = ChiSquared::new(7.0).expect("valid dof");
    let expected = samples as f64 / 8.0;
    Ok(counts
        .into_iter()
        .map(|(v, c)| {
            let stat: f64 = c.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            (v, 1.0 - chi.cdf(stat))
        })
        .collect())
}
