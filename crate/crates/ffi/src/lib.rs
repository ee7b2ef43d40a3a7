//! C ABI for `renyi-sim`.
//!
//! Conventions:
//! * Every fallible function returns an [`RsStatus`]; results go through out-pointers.
//! * On failure, [`rs_last_error_message`] describes the error for the calling thread.
//! * [`RsState`] is opaque; create it with `rs_state_*` constructors and release
//!   it with [`rs_state_free`]. Handles must not be shared across threads
//!   without external synchronisation.
//! * Panics never cross the boundary; they are reported as [`RsStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use renyi_sim::adiabatic::{prepare_state, Method, TrotterSchedule};
use renyi_sim::compiler::{lower_circuit, lower_gate, verify_lowering, SignParams};
use renyi_sim::hubbard::{exact_r2, ground_energy, subsystem_purity, HubbardParams};
use renyi_sim::renyi::{build_swap_test_circuit, estimate_r2_from_weights, SWAP_TEST_QUBITS};
use renyi_sim::{Circuit, Gate, GateKind, SimError, StateVector};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    InvalidState = 4,
    Parse = 5,
    Internal = 6,
}

/// Gate selector for [`rs_state_apply_gate`] and [`rs_lower_gate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsGateKind {
    /// Angles: theta, phi.
    R = 0,
    Rz = 1,
    XX = 2,
    H = 3,
    Cnot = 4,
    Swap = 5,
    CSwap = 6,
    Rx = 7,
    Ry = 8,
    Rzz = 9,
}

impl From<RsGateKind> for GateKind {
    fn from(k: RsGateKind) -> Self {
        match k {
            RsGateKind::R => GateKind::R,
            RsGateKind::Rz => GateKind::Rz,
            RsGateKind::XX => GateKind::XX,
            RsGateKind::H => GateKind::H,
            RsGateKind::Cnot => GateKind::CNOT,
            RsGateKind::Swap => GateKind::Swap,
            RsGateKind::CSwap => GateKind::CSwap,
            RsGateKind::Rx => GateKind::Rx,
            RsGateKind::Ry => GateKind::Ry,
            RsGateKind::Rzz => GateKind::Rzz,
        }
    }
}

/// Schedule family: 1 = fixed δ and τ, 2 = fixed five steps.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsMethod {
    I = 1,
    II = 2,
}

impl From<RsMethod> for Method {
    fn from(m: RsMethod) -> Self {
        match m {
            RsMethod::I => Method::I,
            RsMethod::II => Method::II,
        }
    }
}

/// Opaque state-vector handle.
pub struct RsState {
    inner: StateVector,
}

/// Counts of a lowered gate or circuit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsLoweringInfo {
    pub entangling_count: usize,
    /// Single-qubit native gates, Rz included.
    pub single_qubit_count: usize,
    /// Parallel depth with Rz excluded.
    pub depth: usize,
    /// `1 − |Tr(U†V)|/dim` between the logical and lowered unitaries.
    pub residual: f64,
}

/// Swap-test purity estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsR2Estimate {
    /// False when post-selection discarded every shot; `r2` and `std_err` are then 0.
    pub defined: bool,
    pub r2: f64,
    pub std_err: f64,
    pub p0: f64,
    pub p1: f64,
    pub yield_fraction: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &SimError) -> RsStatus {
    match err {
        SimError::QubitOutOfRange { .. } | SimError::InvalidRegisterSize { .. } => RsStatus::OutOfRange,
        SimError::NormDrift { .. } | SimError::DegenerateGround { .. } | SimError::SingularMatrix { .. } => {
            RsStatus::InvalidState
        }
        SimError::Parse(_) | SimError::MalformedPauli(_) => RsStatus::Parse,
        SimError::Io(_) => RsStatus::Internal,
        _ => RsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (RsStatus, String)>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RsStatus::Internal
        }
    }
}

fn sim<T>(r: renyi_sim::Result<T>) -> Result<T, (RsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RsStatus, String) {
    (RsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable elements.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (RsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn signs(alpha: i32, beta: i32, gamma: i32) -> Result<SignParams, (RsStatus, String)> {
    sim(SignParams::new(alpha, beta, gamma))
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Creates `|0…0⟩` on `num_qubits` qubits.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_state_new_zero(num_qubits: usize, out: *mut *mut RsState) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = sim(StateVector::zero(num_qubits))?;
        *out = Box::into_raw(Box::new(RsState { inner }));
        Ok(())
    })
}

/// Prepares the adiabatic two-qubit state with the experiment preset of
/// `method` (δ = τ = 0.1 for method I, δ = 0.25 for method II).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_state_new_prepared(method: RsMethod, u: f64, out: *mut *mut RsState) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let schedule = sim(TrotterSchedule::preset(method.into(), u))?;
        let inner = sim(prepare_state(&schedule))?;
        *out = Box::into_raw(Box::new(RsState { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_state_free(state: *mut RsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_state_num_qubits(state: *const RsState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.num_qubits())
}

/// Applies one gate. `qubits` and `angles` hold the operands in the order
/// documented on [`RsGateKind`].
///
/// # Safety
/// `state` must be a live handle; `qubits`/`angles` must hold `num_qubits`/`num_angles` elements.
#[no_mangle]
pub unsafe extern "C" fn rs_state_apply_gate(
    state: *mut RsState,
    kind: RsGateKind,
    qubits: *const usize,
    num_qubits: usize,
    angles: *const f64,
    num_angles: usize,
) -> RsStatus {
    guard(|| {
        let state = state.as_mut().ok_or_else(|| null("state"))?;
        let qubits = slice(qubits, num_qubits, "qubits")?;
        let angles = slice(angles, num_angles, "angles")?;
        let gate = sim(Gate::from_parts(kind.into(), qubits, angles))?;
        sim(state.inner.apply(&gate))
    })
}

/// Writes the `2^n` outcome probabilities (MSB-first indexing) into `out`.
///
/// # Safety
/// `state` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rs_state_probabilities(state: *const RsState, out: *mut f64, len: usize) -> RsStatus {
    guard(|| {
        let state = state.as_ref().ok_or_else(|| null("state"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let probs = state.inner.probabilities();
        if len != probs.len() {
            return Err((RsStatus::InvalidArgument, format!("buffer holds {len} values, need {}", probs.len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&probs);
        Ok(())
    })
}

/// Purity `Tr(ρ_A²)` with A the first qubit and B the rest.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_state_purity(state: *const RsState, out: *mut f64) -> RsStatus {
    guard(|| {
        let state = state.as_ref().ok_or_else(|| null("state"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = subsystem_purity(&state.inner);
        Ok(())
    })
}

/// Exact ground-state purity of the dimer at interaction `u` (hopping 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_exact_r2(u: f64, out: *mut f64) -> RsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sim(exact_r2(HubbardParams::new(u)))?;
        Ok(())
    })
}

/// Ground energy `−√(U² + 16)/2` of the two-qubit Hamiltonian.
#[no_mangle]
pub extern "C" fn rs_ground_energy(u: f64) -> f64 {
    ground_energy(u)
}

fn lowering_info(circuit: &Circuit, signs: SignParams) -> Result<RsLoweringInfo, (RsStatus, String)> {
    let lowered = sim(lower_circuit(circuit, signs))?;
    Ok(RsLoweringInfo {
        entangling_count: lowered.entangling_count,
        single_qubit_count: lowered.single_qubit_count,
        depth: lowered.depth,
        residual: sim(verify_lowering(circuit, &lowered))?,
    })
}

/// Lowers one gate on qubits `0, 1, …` onto native gates with the given
/// XX signs (each ±1) and reports counts and the verification residual.
///
/// # Safety
/// `angles` must hold `num_angles` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_lower_gate(
    kind: RsGateKind,
    angles: *const f64,
    num_angles: usize,
    alpha: i32,
    beta: i32,
    gamma: i32,
    out: *mut RsLoweringInfo,
) -> RsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let kind: GateKind = kind.into();
        let qubits: Vec<usize> = (0..kind.arity()).collect();
        let gate = sim(Gate::from_parts(kind, &qubits, slice(angles, num_angles, "angles")?))?;
        let signs = signs(alpha, beta, gamma)?;
        let width = sim(lower_gate(&gate, signs))?.native_circuit.num_qubits();
        *out = lowering_info(&sim(Circuit::from_gates(width, [gate]))?, signs)?;
        Ok(())
    })
}

/// Lowers the full five-qubit swap-test circuit for the preset of `method` at `u`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_lower_swap_test(
    method: RsMethod,
    u: f64,
    final_hadamards: bool,
    out: *mut RsLoweringInfo,
) -> RsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let schedule = sim(TrotterSchedule::preset(method.into(), u))?;
        let circuit = sim(build_swap_test_circuit(&schedule, final_hadamards))?;
        *out = lowering_info(&circuit, SignParams::default())?;
        Ok(())
    })
}

/// Purity estimate from 32 swap-test outcome counts (ancilla = most
/// significant bit), optionally discarding the zero-weight outcomes.
///
/// # Safety
/// `counts` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate_r2(
    counts: *const u64,
    len: usize,
    post_select: bool,
    out: *mut RsR2Estimate,
) -> RsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if len != 1 << SWAP_TEST_QUBITS {
            return Err((RsStatus::InvalidArgument, format!("expected {} counts, got {len}", 1 << SWAP_TEST_QUBITS)));
        }
        let weights: Vec<f64> = slice(counts, len, "counts")?.iter().map(|&c| c as f64).collect();
        let e = sim(estimate_r2_from_weights(&weights, post_select))?;
        *out = RsR2Estimate {
            defined: e.r2.is_some(),
            r2: e.r2.unwrap_or(0.0),
            std_err: e.std_err.unwrap_or(0.0),
            p0: e.p0,
            p1: e.p1,
            yield_fraction: e.yield_fraction,
        };
        Ok(())
    })
}
