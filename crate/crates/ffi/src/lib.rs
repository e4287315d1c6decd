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

//! C ABI over the boqc core: opaque handles for pattern and network files, status codes, and a
//! thread-local last-error message.
//!
//! Every function returns a [`BoqcStatus`]; results come back through out-pointers. Handles are
//! created by `*_from_json` or `*_fixture` and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use boqc::cli;
use boqc::grover::hoyer_angles;
use boqc::io::{self, NetworkFile, PatternFile};
use boqc::nv::{estimate, idle_report, TimingModel};
use boqc::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoqcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed file, schema mismatch or failed validation.
    ParseError = 3,
    InvalidArgument = 4,
    /// Ran, but the success threshold was missed.
    VerificationFailed = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

/// A parsed pattern file.
pub struct BoqcPattern {
    file: PatternFile,
}

/// A parsed network file.
pub struct BoqcNetwork {
    file: NetworkFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> BoqcStatus {
    match e {
        Error::Format(_)
        | Error::InvalidPattern(_)
        | Error::MissingFlow
        | Error::OrderViolatesFlow(_)
        | Error::OwnershipGap(_) => BoqcStatus::ParseError,
        _ => BoqcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<BoqcStatus, (BoqcStatus, String)>) -> BoqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            BoqcStatus::Internal
        }
    }
}

fn fail(e: Error) -> (BoqcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BoqcStatus, String) {
    (BoqcStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BoqcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (BoqcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn item(tau: i64) -> Option<usize> {
    usize::try_from(tau).ok()
}

/// Message for the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn boqc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn boqc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Final-round diffusion phase ψ for a database of `n_items` entries.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn boqc_hoyer_psi(n_items: usize, out: *mut f64) -> BoqcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = hoyer_angles(n_items).map_err(fail)?;
        *out = h.psi;
        Ok(BoqcStatus::Ok)
    })
}

/// Parses a pattern file.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_from_json(json: *const c_char, out: *mut *mut BoqcPattern) -> BoqcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let file = io::read_pattern(text(json, "json")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(BoqcPattern { file }));
        Ok(BoqcStatus::Ok)
    })
}

/// Loads a shipped pattern fixture by name (`fig4`, `fig5`).
///
/// # Safety
/// As for [`boqc_pattern_from_json`].
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_fixture(name: *const c_char, out: *mut *mut BoqcPattern) -> BoqcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = text(name, "name")?;
        let json = io::fixtures::get(name).ok_or((BoqcStatus::InvalidArgument, format!("unknown fixture {name:?}")))?;
        let file = io::read_pattern(json).map_err(fail)?;
        *out = Box::into_raw(Box::new(BoqcPattern { file }));
        Ok(BoqcStatus::Ok)
    })
}

/// Releases a pattern handle; null is ignored.
///
/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_free(p: *mut BoqcPattern) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of output qubits; readout values lie in `[0, 2^outputs)`.
///
/// # Safety
/// `p` must be a live handle; `out` must point to writable memory for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_outputs(p: *const BoqcPattern, out: *mut usize) -> BoqcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pattern"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.file.outputs.len();
        Ok(BoqcStatus::Ok)
    })
}

/// Samples `shots` readouts for item `tau` (negative for a pattern without overlays) and writes
/// the histogram into `counts[0..2^outputs]`.
///
/// # Safety
/// `p` must be a live handle; `counts` must point to `counts_len` writable `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_run(
    p: *const BoqcPattern,
    tau: i64,
    shots: usize,
    seed: u64,
    counts: *mut u64,
    counts_len: usize,
) -> BoqcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pattern"))?;
        if counts.is_null() {
            return Err(null("counts"));
        }
        let need = 1usize << p.file.outputs.len();
        if counts_len < need {
            return Err((BoqcStatus::BufferTooSmall, format!("counts needs {need} entries")));
        }
        let hist = cli::cmd_run(&p.file, item(tau), shots, seed).map_err(fail)?;
        let slots = std::slice::from_raw_parts_mut(counts, counts_len);
        slots.fill(0);
        for (k, v) in hist {
            slots[k] = v as u64;
        }
        Ok(BoqcStatus::Ok)
    })
}

/// Smallest per-item success probability; `VerificationFailed` below the threshold.
///
/// # Safety
/// `p` must be a live handle; `min_success` null or writable for one `double`.
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_verify(p: *const BoqcPattern, seed: u64, min_success: *mut f64) -> BoqcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pattern"))?;
        let (report, _) = io::verify_pattern(&p.file, seed).map_err(fail)?;
        if !min_success.is_null() {
            *min_success = report.min();
        }
        if report.passed() {
            Ok(BoqcStatus::Ok)
        } else {
            Err((BoqcStatus::VerificationFailed, report.summary()))
        }
    })
}

/// NV-center timing estimate of the pattern's measurement order, in milliseconds.
///
/// # Safety
/// `p` must be a live handle; each out-pointer null or writable for one `double`.
#[no_mangle]
pub unsafe extern "C" fn boqc_pattern_estimate(
    p: *const BoqcPattern,
    total_ms: *mut f64,
    mean_idle_ms: *mut f64,
) -> BoqcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("pattern"))?;
        let pattern = p.file.pattern(p.file.taus().first().copied()).map_err(fail)?;
        let trace = estimate(&pattern, &pattern.total_order, &TimingModel::default()).map_err(fail)?;
        if !total_ms.is_null() {
            *total_ms = trace.total;
        }
        if !mean_idle_ms.is_null() {
            *mean_idle_ms = idle_report(&trace).mean_idle;
        }
        Ok(BoqcStatus::Ok)
    })
}

/// Parses a network file.
///
/// # Safety
/// As for [`boqc_pattern_from_json`].
#[no_mangle]
pub unsafe extern "C" fn boqc_network_from_json(json: *const c_char, out: *mut *mut BoqcNetwork) -> BoqcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let file = io::read_network(text(json, "json")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(BoqcNetwork { file }));
        Ok(BoqcStatus::Ok)
    })
}

/// Releases a network handle; null is ignored.
///
/// # Safety
/// `n` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn boqc_network_free(n: *mut BoqcNetwork) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// Smallest success probability over items (pipelines) or columns (single blocks).
///
/// # Safety
/// `n` must be a live handle; `min_success` null or writable for one `double`.
#[no_mangle]
pub unsafe extern "C" fn boqc_network_verify(n: *const BoqcNetwork, min_success: *mut f64) -> BoqcStatus {
    guard(|| {
        let n = n.as_ref().ok_or_else(|| null("network"))?;
        let report = io::verify_network(&n.file).map_err(fail)?;
        if !min_success.is_null() {
            *min_success = report.min();
        }
        if report.passed() {
            Ok(BoqcStatus::Ok)
        } else {
            Err((BoqcStatus::VerificationFailed, report.summary()))
        }
    })
}
