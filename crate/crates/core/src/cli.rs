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

//! Command implementations behind the `boqc` binary. Each returns its report as text so the
//! binary only parses arguments and maps errors to exit codes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::database::equivalence_classes;
use crate::error::{Error, Result};
use crate::grover::{BlockSet, SearchInstance};
use crate::io::{self, BlockRole, FileKind, NetworkFile, PatternFile, VerifyReport};
use crate::mbqc::simulate_pattern;
use crate::nv::{estimate, idle_report, render_table, IdleSummary, ScheduleTrace, TimingModel};
use crate::protocol::{blindness_test, run_boqc_optimized, BlindingConfig};
use crate::quantum::StateVector;
use crate::synthesis::{beqs_synthesize, circuit_search, ObjectiveKind, OptimizationConfig};

/// Exit status for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotFound(_) => 1,
        _ => 2,
    }
}

pub fn cmd_classes(n: usize, big_n: usize) -> Result<String> {
    if n == 0 || n > 4 || big_n == 0 || big_n > 1 << n {
        return Err(Error::InvalidInstance(format!("need 1 ≤ n ≤ 4 and 1 ≤ N ≤ 2^n, got n={n} N={big_n}")));
    }
    let classes = equivalence_classes(n, big_n);
    let mut out = String::from("representative  size  members\n");
    for c in &classes {
        let members: Vec<String> = c.members.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "{:<14}  {:>4}  {}", c.representative.to_string(), c.members.len(), members.join(" "));
    }
    let _ = write!(out, "{} classes", classes.len());
    Ok(out)
}

/// What `cmd_synth` synthesizes.
#[derive(Clone, Debug, PartialEq)]
pub enum SynthTarget {
    Preparation,
    DiffusionPi,
    DiffusionPsi,
    /// The whole pipeline; `q` lists the marked items the shared oracle must serve.
    Search {
        q: Vec<usize>,
    },
}

/// Parses `"01,2,3"` into groups `[[0,1],[2],[3]]`.
pub fn parse_groups(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split(',')
        .map(|g| {
            g.trim()
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<Vec<_>>>()
                .filter(|v| !v.is_empty())
                .ok_or_else(|| Error::Format(format!("bad group {g:?}")))
        })
        .collect()
}

pub fn cmd_synth(
    n: usize,
    w: &[usize],
    povm: Option<Vec<Vec<usize>>>,
    target: &SynthTarget,
    cfg: &OptimizationConfig,
) -> Result<NetworkFile> {
    let inst = SearchInstance::new(n, w.to_vec(), w[0], povm.clone())?;
    let blocks = BlockSet::new(&inst)?;
    let single = |m, kind, role| -> Result<NetworkFile> {
        let res = circuit_search(m, &inst.w, kind, cfg)?;
        Ok(NetworkFile::from_synthesis(n, inst.w.clone(), role, &res, cfg))
    };
    match target {
        SynthTarget::Preparation => single(&blocks.a, ObjectiveKind::Preparation, BlockRole::Preparation),
        SynthTarget::DiffusionPi => single(&blocks.d_pi, ObjectiveKind::Block, BlockRole::DiffusionPi),
        SynthTarget::DiffusionPsi => single(&blocks.d_psi, ObjectiveKind::Block, BlockRole::DiffusionPsi),
        SynthTarget::Search { q } => {
            let groups = inst.groups();
            let res = beqs_synthesize(n, &inst.w, &groups, q, cfg)?;
            Ok(NetworkFile::from_beqs(n, inst.w.clone(), groups, &res, cfg))
        }
    }
}

/// Verifies a network or pattern file; the report says whether it passed.
pub fn cmd_verify(text: &str, seed: u64) -> Result<(VerifyReport, String)> {
    match io::detect(text)? {
        FileKind::Network => {
            let f = io::read_network(text)?;
            let r = io::verify_network(&f)?;
            let s = r.render();
            Ok((r, s))
        }
        FileKind::Pattern => {
            let f = io::read_pattern(text)?;
            let (r, width) = io::verify_pattern(&f, seed)?;
            let s = format!("{}\nlive width {width}", r.render());
            Ok((r, s))
        }
    }
}

fn checked_tau(f: &PatternFile, tau: Option<usize>) -> Result<Option<usize>> {
    match tau {
        Some(t) if !f.overlays.contains_key(&t) => Err(Error::Format(format!("pattern has no overlay for item {t}"))),
        Some(t) => Ok(Some(t)),
        None if f.overlays.is_empty() => Ok(None),
        None => Err(Error::Format(format!("pattern needs an item, one of {:?}", f.taus()))),
    }
}

/// Readout histogram over `shots` sampled runs.
pub fn cmd_run(f: &PatternFile, tau: Option<usize>, shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
    let p = f.pattern(checked_tau(f, tau)?)?;
    if p.readout_nodes().is_empty() {
        return Err(Error::InvalidPattern("pattern has no readout outputs".into()));
    }
    let input = StateVector::zero(p.graph.inputs.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        let run = simulate_pattern(&p, &input, &mut rng)?;
        *hist.entry(run.readout.expect("readout nodes present")).or_insert(0) += 1;
    }
    Ok(hist)
}

pub fn render_histogram(hist: &BTreeMap<usize, usize>) -> String {
    let items: Vec<String> = hist.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("{{{}}}", items.join(", "))
}

/// One blinded run: Bob's event log, then the clients' recovered result.
pub fn cmd_boqc(f: &PatternFile, tau: Option<usize>, seed: u64) -> Result<String> {
    let p = f.pattern(checked_tau(f, tau)?)?;
    let (res, tr, width) = run_boqc_optimized(&p, &BlindingConfig::default(), seed)?;
    let mut out = tr.to_event_log();
    let _ = write!(out, "readout {}\nlive width {width}", res.readout);
    Ok(out)
}

/// Blindness statistic for two items, next to the unblinded variant for contrast.
pub fn cmd_blindness(
    f: &PatternFile,
    tau_a: usize,
    tau_b: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64, String)> {
    let a = f.pattern(checked_tau(f, Some(tau_a))?)?;
    let b = f.pattern(checked_tau(f, Some(tau_b))?)?;
    let blind = blindness_test(&a, &b, &BlindingConfig::default(), samples, seed)?;
    let open = BlindingConfig { blind: false, ..Default::default() };
    let mutant = blindness_test(&a, &b, &open, samples, seed)?;
    let s = format!("tv blinded {blind:.4}\ntv unblinded {mutant:.4}\nsamples {samples}");
    Ok((blind, mutant, s))
}

/// Machine-readable form of an estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub timing: TimingModel,
    pub idle: IdleSummary,
    pub trace: ScheduleTrace,
}

/// NV timing of the pattern's measurement order, as a text table and a report.
pub fn cmd_estimate(f: &PatternFile, timing: &TimingModel) -> Result<(String, EstimateReport)> {
    let tau = f.taus().first().copied();
    let p = f.pattern(tau)?;
    let trace = estimate(&p, &p.total_order, timing)?;
    let table = render_table(&trace);
    Ok((table, EstimateReport { timing: *timing, idle: idle_report(&trace), trace }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_parse() {
        assert_eq!(parse_groups("01,2, 3").unwrap(), vec![vec![0, 1], vec![2], vec![3]]);
        assert!(parse_groups("0,,1").is_err());
        assert!(parse_groups("0a").is_err());
    }

    #[test]
    fn seven_of_eight_is_one_class() {
        let s = cmd_classes(3, 7).unwrap();
        assert!(s.ends_with("1 classes"));
        assert!(s.lines().nth(1).unwrap().contains("   8  "));
        assert!(cmd_classes(3, 9).is_err());
    }

    #[test]
    fn items_must_exist() {
        let f = io::read_pattern(io::fixtures::FIG4).unwrap();
        assert!(cmd_run(&f, Some(9), 1, 0).is_err());
        assert!(cmd_run(&f, None, 1, 0).is_err());
    }
}
