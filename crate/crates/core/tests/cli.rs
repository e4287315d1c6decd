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

use std::process::{Command, Output};

fn boqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boqc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classes_table() {
    let o = boqc(&["classes", "3", "6"]);
    assert!(o.status.success());
    assert!(stdout(&o).trim_end().ends_with("3 classes"));
}

#[test]
fn run_fig4() {
    let o = boqc(&["run", "fixture:fig4", "--tau", "2", "--shots", "50"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "{2: 50}");
}

#[test]
fn verify_exit_codes() {
    let ok = boqc(&["verify", "fixture:fig4"]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("PASS"));
    let missing = boqc(&["verify", "/nonexistent/file.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn boqc_reports_readout() {
    let o = boqc(&["boqc", "fixture:fig4", "--tau", "1", "--seed", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("readout 1"), "{s}");
    assert!(s.contains("live width 3"), "{s}");
}

#[test]
fn estimate_table_and_report() {
    let path = std::env::temp_dir().join(format!("boqc_estimate_{}.json", std::process::id()));
    let o = boqc(&["estimate", "fixture:fig4", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("node"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let _ = std::fs::remove_file(&path);
    assert_eq!(report["idle"]["worst_node"], 4);
    assert!(report["trace"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn synth_writes_network() {
    let path = std::env::temp_dir().join(format!("boqc_cli_{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let o = boqc(&["synth", "--n", "3", "--w", "01234", "--target", "prep", "--max-gates", "3", "-o", p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = boqc(&["verify", p]);
    let _ = std::fs::remove_file(&path);
    assert!(v.status.success(), "{}", stdout(&v));
}
