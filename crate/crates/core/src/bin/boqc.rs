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

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use boqc::cli::{self, SynthTarget};
use boqc::database::Database;
use boqc::io;
use boqc::nv::TimingModel;
use boqc::synthesis::OptimizationConfig;
use boqc::Error;

/// Blind oracular quantum computation toolkit.
#[derive(Parser)]
#[command(name = "boqc", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// Preparation block A.
    Prep,
    /// Diffusion D(π).
    Dpi,
    /// Diffusion D(ψ).
    Dpsi,
    /// Whole search pipeline with a shared oracle.
    Search,
}

#[derive(Subcommand)]
enum Command {
    /// Equivalence classes of size-N databases on n bits.
    Classes { n: usize, size: usize },
    /// Synthesize a block or a search pipeline and write a network file.
    Synth {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Database as a digit string, e.g. 012345.
        #[arg(long)]
        w: String,
        #[arg(long, value_enum)]
        target: Target,
        /// Marked item for a search pipeline.
        #[arg(long, conflicts_with = "blind")]
        tau: Option<usize>,
        /// Serve every database item with one oracle topology.
        #[arg(long)]
        blind: bool,
        /// Readout groups, e.g. 01,2,3,4,5.
        #[arg(long)]
        povm: Option<String>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 10)]
        max_gates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fit blocks only up to a global phase.
        #[arg(long)]
        free_phase: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a network or pattern file against the success threshold.
    Verify {
        /// Path, or fixture:NAME for a shipped fixture.
        file: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample readouts of a pattern.
    Run {
        file: String,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One blinded protocol run; prints Bob's view and the result.
    Boqc {
        file: String,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Total-variation distance between Bob's views of two items.
    Blindness {
        file: String,
        #[arg(long)]
        tau_a: usize,
        #[arg(long)]
        tau_b: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// NV-center timing estimate.
    Estimate {
        file: String,
        /// Also write the schedule as JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn load(file: &str) -> Result<String, Error> {
    if let Some(name) = file.strip_prefix("fixture:") {
        return io::fixtures::get(name).map(str::to_owned).ok_or_else(|| {
            Error::Format(format!("unknown fixture {name:?}, expected one of {:?}", io::fixtures::NAMES))
        });
    }
    std::fs::read_to_string(file).map_err(|e| Error::Format(format!("{file}: {e}")))
}

fn pattern(file: &str) -> Result<io::PatternFile, Error> {
    io::read_pattern(&load(file)?)
}

fn run(args: Args) -> Result<u8, Error> {
    match args.command {
        Command::Classes { n, size } => println!("{}", cli::cmd_classes(n, size)?),
        Command::Synth { n, w, target, tau, blind, povm, restarts, max_gates, seed, free_phase, output } => {
            let db = Database::parse(n, &w)?;
            let povm = povm.as_deref().map(cli::parse_groups).transpose()?;
            let target = match target {
                Target::Prep => SynthTarget::Preparation,
                Target::Dpi => SynthTarget::DiffusionPi,
                Target::Dpsi => SynthTarget::DiffusionPsi,
                Target::Search => {
                    let q = match (tau, blind) {
                        (Some(t), _) => vec![t],
                        (None, true) => db.members().to_vec(),
                        (None, false) => return Err(Error::Format("search needs --tau or --blind".into())),
                    };
                    SynthTarget::Search { q }
                }
            };
            let cfg = OptimizationConfig { restarts, max_gates, seed, free_phase, ..Default::default() };
            let f = cli::cmd_synth(n, db.members(), povm, &target, &cfg)?;
            let text = io::write_network(&f)?;
            match output {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
                }
                None => print!("{text}"),
            }
        }
        Command::Verify { file, seed } => {
            let (report, text) = cli::cmd_verify(&load(&file)?, seed)?;
            println!("{text}");
            return Ok(if report.passed() { 0 } else { 1 });
        }
        Command::Run { file, tau, shots, seed } => {
            let hist = cli::cmd_run(&pattern(&file)?, tau, shots, seed)?;
            println!("{}", cli::render_histogram(&hist));
        }
        Command::Boqc { file, tau, seed } => println!("{}", cli::cmd_boqc(&pattern(&file)?, tau, seed)?),
        Command::Blindness { file, tau_a, tau_b, samples, seed } => {
            let (_, _, text) = cli::cmd_blindness(&pattern(&file)?, tau_a, tau_b, samples, seed)?;
            println!("{text}");
        }
        Command::Estimate { file, output } => {
            let (table, report) = cli::cmd_estimate(&pattern(&file)?, &TimingModel::default())?;
            print!("{table}");
            if let Some(path) = output {
                let text = io::canonical_json(&report)?;
                std::fs::write(&path, text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
