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

//! Wall-clock estimate of a delegated run on a three-node NV-center network.
//!
//! The server walks the measurement sequence. Before measuring a node it receives, by remote
//! state preparation, every neighbor not yet delivered and then the node itself. Each delivery
//! costs `t1 + t2`; on arrival each edge to a qubit already present costs `t3`; each
//! measurement costs `t4`. Steps are serial. A node idles from its delivery to its
//! measurement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mbqc::MeasurementPattern;

/// Durations in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    /// Remote state preparation (heralded entanglement).
    pub t1: f64,
    /// Swap of the electron state to a nuclear memory.
    pub t2: f64,
    /// One CPHASE between memories, electron-mediated.
    pub t3: f64,
    /// One measurement.
    pub t4: f64,
    /// Elementary two-qubit operation; `t3` is built from these and kept for reporting.
    pub two_bit_op: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel { t1: 25.0, t2: 0.0015, t3: 3.5, t4: 0.5, two_bit_op: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTiming {
    pub node: usize,
    pub delivered: f64,
    pub measured: f64,
    pub idle: f64,
    /// Deliveries of other nodes while this one waits.
    pub rsps_during_idle: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub nodes: Vec<NodeTiming>,
    pub total: f64,
    pub rsp_count: usize,
    pub entangling_count: usize,
    pub measurement_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdleSummary {
    pub mean_idle: f64,
    pub worst_node: Option<usize>,
    pub worst_idle: f64,
    pub worst_rsps: usize,
}

/// Estimates the schedule for measuring non-outputs in `ordering`, followed by the readout
/// outputs. Outputs left unmeasured idle until the end.
pub fn estimate(pattern: &MeasurementPattern, ordering: &[usize], timing: &TimingModel) -> Result<ScheduleTrace> {
    let g = &pattern.graph;
    pattern.flow.respects_order(g, ordering)?;
    let mut sequence = ordering.to_vec();
    sequence.extend(pattern.readout_nodes());

    let mut t = 0.0;
    let mut delivered: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut measured: BTreeMap<usize, f64> = BTreeMap::new();
    let mut present: BTreeSet<usize> = BTreeSet::new();
    let mut rsp_times = Vec::new();
    let mut entangling = 0;
    let mut deliver =
        |v: usize, t: &mut f64, present: &mut BTreeSet<usize>, delivered: &mut BTreeMap<usize, (f64, usize)>| {
            *t += timing.t1 + timing.t2;
            delivered.insert(v, (*t, rsp_times.len()));
            rsp_times.push(*t);
            for k in g.neighbors(v) {
                if present.contains(k) {
                    *t += timing.t3;
                    entangling += 1;
                }
            }
            present.insert(v);
        };
    for &j in &sequence {
        for &k in g.neighbors(j) {
            if !delivered.contains_key(&k) {
                deliver(k, &mut t, &mut present, &mut delivered);
            }
        }
        if !delivered.contains_key(&j) {
            deliver(j, &mut t, &mut present, &mut delivered);
        }
        t += timing.t4;
        measured.insert(j, t);
    }
    for &v in &g.nodes {
        if !delivered.contains_key(&v) {
            deliver(v, &mut t, &mut present, &mut delivered);
        }
    }
    let rsp_count = delivered.len();
    let nodes = g
        .nodes
        .iter()
        .map(|&v| {
            let (d, idx) = delivered[&v];
            let m = measured.get(&v).copied().unwrap_or(t);
            let during = delivered.values().filter(|&&(dt, i)| i > idx && dt < m).count();
            NodeTiming { node: v, delivered: d, measured: m, idle: m - d, rsps_during_idle: during }
        })
        .collect();
    Ok(ScheduleTrace { nodes, total: t, rsp_count, entangling_count: entangling, measurement_count: sequence.len() })
}

/// Idle times closer than this count as tied; sums of the same durations in a different order
/// differ by rounding.
const IDLE_TIE: f64 = 1e-9;

/// Mean idle time and the worst node (smallest id on ties).
pub fn idle_report(trace: &ScheduleTrace) -> IdleSummary {
    if trace.nodes.is_empty() {
        return IdleSummary { mean_idle: 0.0, worst_node: None, worst_idle: 0.0, worst_rsps: 0 };
    }
    let mean = trace.nodes.iter().map(|n| n.idle).sum::<f64>() / trace.nodes.len() as f64;
    let worst = trace
        .nodes
        .iter()
        .fold(None::<&NodeTiming>, |best, n| match best {
            Some(b) if b.idle > n.idle + IDLE_TIE || ((b.idle - n.idle).abs() <= IDLE_TIE && b.node < n.node) => {
                Some(b)
            }
            _ => Some(n),
        })
        .expect("nonempty");
    IdleSummary {
        mean_idle: mean,
        worst_node: Some(worst.node),
        worst_idle: worst.idle,
        worst_rsps: worst.rsps_during_idle,
    }
}

pub fn render_table(trace: &ScheduleTrace) -> String {
    let mut out = String::from("node  delivered_ms  measured_ms  idle_ms  rsps\n");
    for n in &trace.nodes {
        out.push_str(&format!(
            "{:>4}  {:>12.3}  {:>11.3}  {:>7.3}  {:>4}\n",
            n.node, n.delivered, n.measured, n.idle, n.rsps_during_idle
        ));
    }
    let s = idle_report(trace);
    out.push_str(&format!("total_ms {:.3}\nrsps {}\nmean_idle_ms {:.3}\n", trace.total, trace.rsp_count, s.mean_idle));
    if let Some(w) = s.worst_node {
        out.push_str(&format!("worst_node {w} idle_ms {:.3} rsps {}\n", s.worst_idle, s.worst_rsps));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::MeasurementAngle;
    use crate::mbqc::OpenGraph;

    fn path(n: usize) -> MeasurementPattern {
        let g = OpenGraph::new((1..=n).collect(), (1..n).map(|i| (i, i + 1)).collect(), vec![1], vec![n]).unwrap();
        let angles = (1..n).map(|v| (v, MeasurementAngle::Real(0.0))).collect();
        MeasurementPattern::new(g, angles, BTreeMap::new(), None).unwrap()
    }

    #[test]
    fn path_schedule_by_hand() {
        let p = path(3);
        let tm = TimingModel::default();
        let tr = estimate(&p, &p.total_order, &tm).unwrap();
        // Node 1: deliver 2, then 1 (one edge), measure. Node 2: deliver 3 (one edge), measure.
        let want = 3.0 * (tm.t1 + tm.t2) + 2.0 * tm.t3 + 2.0 * tm.t4;
        assert!((tr.total - want).abs() < 1e-12);
        assert_eq!(tr.rsp_count, 3);
        let n1 = &tr.nodes[0];
        // Node 1 waits for its CZ with node 2 and its own measurement.
        assert!((n1.idle - tm.t3 - tm.t4).abs() < 1e-12);
    }

    #[test]
    fn linear_in_each_field() {
        let p = path(6);
        let base = estimate(&p, &p.total_order, &TimingModel::default()).unwrap();
        let doubled = TimingModel { t1: 50.0, ..Default::default() };
        let tr = estimate(&p, &p.total_order, &doubled).unwrap();
        assert!((tr.total - base.total - base.rsp_count as f64 * 25.0).abs() < 1e-9);
        let t3 = TimingModel { t3: 7.0, ..Default::default() };
        let tr = estimate(&p, &p.total_order, &t3).unwrap();
        assert!((tr.total - base.total - base.entangling_count as f64 * 3.5).abs() < 1e-9);
    }

    #[test]
    fn no_idle_is_negative() {
        let p = path(7);
        let tr = estimate(&p, &p.total_order, &TimingModel::default()).unwrap();
        assert!(tr.nodes.iter().all(|n| n.idle >= 0.0 && n.measured >= n.delivered));
    }

    #[test]
    fn single_node_has_no_idle() {
        let g = OpenGraph::new(vec![1], vec![], vec![1], vec![1]).unwrap();
        let p = MeasurementPattern::new(g, BTreeMap::new(), BTreeMap::new(), None).unwrap();
        let tr = estimate(&p, &[], &TimingModel::default()).unwrap();
        assert_eq!(idle_report(&tr).worst_idle, 0.0);
    }

    #[test]
    fn empty_order_on_empty_pattern() {
        let tr = ScheduleTrace { nodes: vec![], total: 0.0, rsp_count: 0, entangling_count: 0, measurement_count: 0 };
        assert_eq!(idle_report(&tr).worst_node, None);
    }

    #[test]
    fn bad_order_is_rejected() {
        let p = path(4);
        assert!(estimate(&p, &[2, 1, 3], &TimingModel::default()).is_err());
    }
}
