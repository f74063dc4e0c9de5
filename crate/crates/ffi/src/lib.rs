//! C ABI for the belief-updating engines: opaque handles, status codes, and
//! a JSON convenience driver mirroring the CLI run verbs.
//!
//! Conventions:
//! - Every fallible function returns a [`DpkStatus`]; outputs go through
//!   out-parameters. `DPK_STATUS_OK` is zero.
//! - On failure, a thread-local message is retrievable with
//!   [`dpk_last_error_message`].
//! - Handles are created and released in pairs (`*_new` / `*_free`); `free`
//!   functions accept null.
//! - Atoms and symbols are addressed by index (the order they were supplied
//!   in). Schedules are flattened symbol-index arrays with batch offsets,
//!   `offsets[0] = 0`, `offsets[n_batches]` = total length.
//!
//! The generated header lives at `include/dpk.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::sync::Arc;

use dpk_core::config::SessionConfig;
use dpk_core::runner::{self, RunOptions};
use dpk_core::{
    dipk_run, dpk_run, CredalSet, DipkTrace, DpkError, DpkTrace, Event, ObservationModel,
    ProbMeasure, StateSpace, StopReason, StopRule,
};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownSymbol = 3,
    DuplicateObservation = 4,
    NullBlock = 5,
    BudgetExceeded = 6,
    SpaceMismatch = 7,
    InvalidConfig = 8,
    EngineError = 9,
}

fn status_of(error: &DpkError) -> DpkStatus {
    match error {
        DpkError::UnknownSymbol(_) => DpkStatus::UnknownSymbol,
        DpkError::DuplicateObservation(_) => DpkStatus::DuplicateObservation,
        DpkError::PriorNullBlock { .. } | DpkError::NullNonemptyConditioner => {
            DpkStatus::NullBlock
        }
        DpkError::BudgetExceeded(_) => DpkStatus::BudgetExceeded,
        DpkError::SpaceMismatch => DpkStatus::SpaceMismatch,
        DpkError::InvalidConfig(_) | DpkError::InvalidStream(_) => DpkStatus::InvalidConfig,
        DpkError::InvalidEvent { .. }
        | DpkError::InvalidMeasure(_)
        | DpkError::InvalidModel(_)
        | DpkError::InvalidWeights(_)
        | DpkError::InvalidSpace(_)
        | DpkError::ShapeMismatch(_)
        | DpkError::InvalidWitness { .. }
        | DpkError::InvalidCoarsening(_) => DpkStatus::InvalidArgument,
        _ => DpkStatus::EngineError,
    }
}

fn fail(error: DpkError) -> DpkStatus {
    let status = status_of(&error);
    set_error(error.to_string());
    status
}

fn fail_msg(status: DpkStatus, message: &str) -> DpkStatus {
    set_error(message.to_string());
    status
}

/// Observation model handle: an indexed state space plus the symbol range,
/// pmf, and preimages.
pub struct DpkModel {
    space: Arc<StateSpace>,
    model: ObservationModel,
}

/// Probability measure handle, bound to the space of the model that built it.
pub struct DpkMeasure {
    measure: ProbMeasure,
}

/// Completed precise run.
pub struct DpkRun {
    trace: DpkTrace,
}

/// Completed credal run, with the distance-to-final column precomputed.
pub struct DipkRun {
    trace: DipkTrace,
    to_final: Vec<f64>,
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Copies the message of the last failing call on this thread into `buf`
/// (truncated, always NUL-terminated) and returns the full message length in
/// bytes, or 0 when no error is recorded.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null (then only the
/// length is reported).
#[no_mangle]
pub unsafe extern "C" fn dpk_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(message) = slot.as_ref() else { return 0 };
        let bytes = message.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Builds an observation model over `n_atoms` indexed atoms.
///
/// `pmf` has one strictly positive entry per symbol and sums to one.
/// Preimages are supplied flattened: `preimage_offsets` has `n_symbols + 1`
/// entries delimiting each symbol's atom indices inside `preimage_atoms`.
///
/// # Safety
/// The array arguments must match the advertised lengths, and `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dpk_model_new(
    n_atoms: usize,
    n_symbols: usize,
    pmf: *const f64,
    preimage_offsets: *const usize,
    preimage_atoms: *const u32,
    out: *mut *mut DpkModel,
) -> DpkStatus {
    if out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "out pointer is null");
    }
    let Some(pmf) = slice_arg(pmf, n_symbols) else {
        return fail_msg(DpkStatus::NullPointer, "pmf pointer is null");
    };
    let Some(offsets) = slice_arg(preimage_offsets, n_symbols + 1) else {
        return fail_msg(DpkStatus::NullPointer, "preimage offsets pointer is null");
    };
    if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[1] < w[0]) {
        return fail_msg(DpkStatus::InvalidArgument, "preimage offsets must start at 0 and be nondecreasing");
    }
    let total = *offsets.last().unwrap_or(&0);
    let Some(atoms) = slice_arg(preimage_atoms, total) else {
        return fail_msg(DpkStatus::NullPointer, "preimage atoms pointer is null");
    };
    if n_atoms == 0 {
        return fail_msg(DpkStatus::InvalidArgument, "state space needs at least one atom");
    }

    let space = StateSpace::indexed(n_atoms);
    let preimages: Vec<Event> = (0..n_symbols)
        .map(|s| Event::new(atoms[offsets[s]..offsets[s + 1]].iter().map(|&a| a as usize)))
        .collect();
    let symbols: Vec<String> = (0..n_symbols).map(|s| s.to_string()).collect();
    let model = match ObservationModel::new(space.clone(), symbols, pmf.to_vec(), preimages) {
        Ok(model) => model,
        Err(e) => return fail(e),
    };
    let violations = model.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return fail_msg(DpkStatus::InvalidArgument, &list.join("; "));
    }
    *out = Box::into_raw(Box::new(DpkModel { space, model }));
    DpkStatus::Ok
}

/// # Safety
/// `model` must be a pointer from [`dpk_model_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpk_model_free(model: *mut DpkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Builds a measure on the model's space from `n` masses.
///
/// # Safety
/// `model` must be a live model handle, `masses` must hold `n` doubles, and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dpk_measure_new(
    model: *const DpkModel,
    masses: *const f64,
    n: usize,
    out: *mut *mut DpkMeasure,
) -> DpkStatus {
    if model.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "model or out pointer is null");
    }
    let Some(masses) = slice_arg(masses, n) else {
        return fail_msg(DpkStatus::NullPointer, "masses pointer is null");
    };
    match ProbMeasure::new((*model).space.clone(), masses.to_vec()) {
        Ok(measure) => {
            *out = Box::into_raw(Box::new(DpkMeasure { measure }));
            DpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `measure` must be a pointer from a `*_new`/accessor call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpk_measure_free(measure: *mut DpkMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Probability of the event spanned by `atoms`.
///
/// # Safety
/// `measure` must be live, `atoms` must hold `n` indices, `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn dpk_measure_prob(
    measure: *const DpkMeasure,
    atoms: *const u32,
    n: usize,
    out: *mut f64,
) -> DpkStatus {
    if measure.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "measure or out pointer is null");
    }
    let Some(atoms) = slice_arg(atoms, n) else {
        return fail_msg(DpkStatus::NullPointer, "atoms pointer is null");
    };
    let event = Event::new(atoms.iter().map(|&a| a as usize));
    match (*measure).measure.prob(&event) {
        Ok(value) => {
            *out = value;
            DpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

unsafe fn schedule_arg(
    model: &ObservationModel,
    symbols: *const u32,
    batch_offsets: *const usize,
    n_batches: usize,
) -> Result<Vec<Vec<String>>, DpkStatus> {
    let Some(offsets) = slice_arg(batch_offsets, n_batches + 1) else {
        return Err(fail_msg(DpkStatus::NullPointer, "batch offsets pointer is null"));
    };
    if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[1] < w[0]) {
        return Err(fail_msg(
            DpkStatus::InvalidArgument,
            "batch offsets must start at 0 and be nondecreasing",
        ));
    }
    let total = *offsets.last().unwrap_or(&0);
    let Some(flat) = slice_arg(symbols, total) else {
        return Err(fail_msg(DpkStatus::NullPointer, "symbols pointer is null"));
    };
    let mut schedule = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let mut batch = Vec::with_capacity(offsets[b + 1] - offsets[b]);
        for &s in &flat[offsets[b]..offsets[b + 1]] {
            let s = s as usize;
            if s >= model.range_len() {
                return Err(fail_msg(
                    DpkStatus::UnknownSymbol,
                    &format!("symbol index {s} out of range"),
                ));
            }
            batch.push(model.symbols()[s].clone());
        }
        schedule.push(batch);
    }
    Ok(schedule)
}

fn stop_rule(tolerance: f64) -> StopRule {
    if tolerance > 0.0 {
        StopRule::with_tolerance(tolerance)
    } else {
        StopRule::default()
    }
}

fn stop_code(reason: StopReason) -> i32 {
    match reason {
        StopReason::Terminal => 0,
        StopReason::Tolerance => 1,
        StopReason::Budget => 2,
    }
}

/// Runs a precise update over a schedule of symbol-index batches.
/// Nonpositive `tolerance` selects the default (1e-10).
///
/// # Safety
/// `model`, `prior`, and `out` must be live pointers; the schedule arrays
/// must match the offsets contract described at the top of the header.
#[no_mangle]
pub unsafe extern "C" fn dpk_run_new(
    model: *const DpkModel,
    prior: *const DpkMeasure,
    symbols: *const u32,
    batch_offsets: *const usize,
    n_batches: usize,
    tolerance: f64,
    out: *mut *mut DpkRun,
) -> DpkStatus {
    if model.is_null() || prior.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "model, prior, or out pointer is null");
    }
    let model = &*model;
    let schedule = match schedule_arg(&model.model, symbols, batch_offsets, n_batches) {
        Ok(schedule) => schedule,
        Err(status) => return status,
    };
    match dpk_run(
        (*prior).measure.clone(),
        &model.model,
        &schedule,
        &stop_rule(tolerance),
    ) {
        Ok(trace) => {
            *out = Box::into_raw(Box::new(DpkRun { trace }));
            DpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Number of recorded states (the prior counts as state 0).
///
/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn dpk_run_len(run: *const DpkRun) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).trace.states.len()
}

/// Stop reason: 0 terminal, 1 tolerance, 2 budget; -1 on null handle.
///
/// # Safety
/// `run` must be a live run handle or null.
#[no_mangle]
pub unsafe extern "C" fn dpk_run_stop_reason(run: *const DpkRun) -> i32 {
    if run.is_null() {
        return -1;
    }
    stop_code((*run).trace.stop_reason)
}

/// Total-variation distance of step `step` (1-based, up to `len - 1`).
///
/// # Safety
/// `run` and `out` must be live pointers.
#[no_mangle]
pub unsafe extern "C" fn dpk_run_tv_step(
    run: *const DpkRun,
    step: usize,
    out: *mut f64,
) -> DpkStatus {
    if run.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "run or out pointer is null");
    }
    let trace = &(*run).trace;
    if step == 0 || step > trace.tv_steps.len() {
        return fail_msg(DpkStatus::InvalidArgument, "step out of range");
    }
    *out = trace.tv_steps[step - 1];
    DpkStatus::Ok
}

/// Copies the measure recorded at `step` (0 = prior) into a fresh handle.
///
/// # Safety
/// `run` and `out` must be live pointers; the result must be released with
/// [`dpk_measure_free`].
#[no_mangle]
pub unsafe extern "C" fn dpk_run_measure(
    run: *const DpkRun,
    step: usize,
    out: *mut *mut DpkMeasure,
) -> DpkStatus {
    if run.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "run or out pointer is null");
    }
    let trace = &(*run).trace;
    if step >= trace.states.len() {
        return fail_msg(DpkStatus::InvalidArgument, "step out of range");
    }
    *out = Box::into_raw(Box::new(DpkMeasure { measure: trace.states[step].measure.clone() }));
    DpkStatus::Ok
}

/// # Safety
/// `run` must be a pointer from [`dpk_run_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpk_run_free(run: *mut DpkRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Runs a credal update over a schedule. `generators` is row-major,
/// `k` rows of `n_atoms` masses each.
///
/// # Safety
/// Pointer arguments must be live and sized as documented.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_new(
    model: *const DpkModel,
    generators: *const f64,
    k: usize,
    symbols: *const u32,
    batch_offsets: *const usize,
    n_batches: usize,
    tolerance: f64,
    out: *mut *mut DipkRun,
) -> DpkStatus {
    if model.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "model or out pointer is null");
    }
    let model = &*model;
    let m = model.space.len();
    let Some(rows) = slice_arg(generators, k * m) else {
        return fail_msg(DpkStatus::NullPointer, "generators pointer is null");
    };
    let mut gens = Vec::with_capacity(k);
    for row in rows.chunks(m) {
        match ProbMeasure::new(model.space.clone(), row.to_vec()) {
            Ok(g) => gens.push(g),
            Err(e) => return fail(e),
        }
    }
    let set = match CredalSet::new(gens) {
        Ok(set) => set,
        Err(e) => return fail(e),
    };
    let schedule = match schedule_arg(&model.model, symbols, batch_offsets, n_batches) {
        Ok(schedule) => schedule,
        Err(status) => return status,
    };
    match dipk_run(set, &model.model, &schedule, &stop_rule(tolerance)) {
        Ok(trace) => {
            let to_final = match trace.hausdorff_to_final() {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            *out = Box::into_raw(Box::new(DipkRun { trace, to_final }));
            DpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `run` must be a live credal run handle.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_len(run: *const DipkRun) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).trace.states.len()
}

/// Stop reason: 0 terminal, 1 tolerance, 2 budget; -1 on null handle.
///
/// # Safety
/// `run` must be a live credal run handle or null.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_stop_reason(run: *const DipkRun) -> i32 {
    if run.is_null() {
        return -1;
    }
    stop_code((*run).trace.stop_reason)
}

unsafe fn dipk_envelope(
    run: *const DipkRun,
    step: usize,
    atoms: *const u32,
    n: usize,
    out: *mut f64,
    upper: bool,
) -> DpkStatus {
    if run.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "run or out pointer is null");
    }
    let Some(atoms) = slice_arg(atoms, n) else {
        return fail_msg(DpkStatus::NullPointer, "atoms pointer is null");
    };
    let trace = &(*run).trace;
    if step >= trace.states.len() {
        return fail_msg(DpkStatus::InvalidArgument, "step out of range");
    }
    let event = Event::new(atoms.iter().map(|&a| a as usize));
    let set = &trace.states[step].set;
    let result = if upper { set.upper_prob(&event) } else { set.lower_prob(&event) };
    match result {
        Ok(value) => {
            *out = value;
            DpkStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Lower envelope of the event spanned by `atoms` at `step`.
///
/// # Safety
/// Pointer arguments must be live and sized as documented.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_lower(
    run: *const DipkRun,
    step: usize,
    atoms: *const u32,
    n: usize,
    out: *mut f64,
) -> DpkStatus {
    dipk_envelope(run, step, atoms, n, out, false)
}

/// Upper envelope of the event spanned by `atoms` at `step`.
///
/// # Safety
/// Pointer arguments must be live and sized as documented.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_upper(
    run: *const DipkRun,
    step: usize,
    atoms: *const u32,
    n: usize,
    out: *mut f64,
) -> DpkStatus {
    dipk_envelope(run, step, atoms, n, out, true)
}

/// Hausdorff distance from the set at `step` to the final set.
///
/// # Safety
/// `run` and `out` must be live pointers.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_hausdorff_to_final(
    run: *const DipkRun,
    step: usize,
    out: *mut f64,
) -> DpkStatus {
    if run.is_null() || out.is_null() {
        return fail_msg(DpkStatus::NullPointer, "run or out pointer is null");
    }
    let distances = &(*run).to_final;
    if step >= distances.len() {
        return fail_msg(DpkStatus::InvalidArgument, "step out of range");
    }
    *out = distances[step];
    DpkStatus::Ok
}

/// # Safety
/// `run` must be a pointer from [`dipk_run_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dipk_run_free(run: *mut DipkRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// One-call driver: parses a session config (JSON) and a stream (one batch
/// of symbol tokens per line), runs the precise (`credal == 0`) or credal
/// engine, and returns the JSON report as a fresh string to be released
/// with [`dpk_string_free`]. `seed < 0` disables the self-checks.
///
/// # Safety
/// `config_json` and `stream_text` must be NUL-terminated strings; `out_json`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dpk_run_report_json(
    config_json: *const c_char,
    stream_text: *const c_char,
    credal: i32,
    seed: i64,
    out_json: *mut *mut c_char,
) -> DpkStatus {
    if config_json.is_null() || stream_text.is_null() || out_json.is_null() {
        return fail_msg(DpkStatus::NullPointer, "string or out pointer is null");
    }
    let Ok(config_text) = CStr::from_ptr(config_json).to_str() else {
        return fail_msg(DpkStatus::InvalidArgument, "config is not valid UTF-8");
    };
    let Ok(stream) = CStr::from_ptr(stream_text).to_str() else {
        return fail_msg(DpkStatus::InvalidArgument, "stream is not valid UTF-8");
    };
    let config = match SessionConfig::from_json(config_text) {
        Ok(config) => config,
        Err(e) => return fail(e),
    };
    let opts = RunOptions {
        seed: if seed >= 0 { Some(seed as u64) } else { None },
        ..RunOptions::default()
    };
    let report = if credal != 0 {
        runner::run_dipk(&config, stream, &opts)
    } else {
        runner::run_dpk(&config, stream, &opts)
    };
    match report {
        Ok(report) => match CString::new(report.to_json()) {
            Ok(json) => {
                *out_json = json.into_raw();
                DpkStatus::Ok
            }
            Err(_) => fail_msg(DpkStatus::EngineError, "report contained a NUL byte"),
        },
        Err(e) => fail(e),
    }
}

/// Releases a string returned by [`dpk_run_report_json`].
///
/// # Safety
/// `s` must be a pointer previously returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
