//! C ABI for `skc`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every call returns an [`SkcStatus`]; on failure
//! [`skc_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use skc::gates::Order;
use skc::linalg::{project_su, Tolerances};
use skc::net::NetConfig;
use skc::{BasicNet, Compiler, DepthMode, EngineConfig, Error, GateSequence, InstructionSet, Unitary};

/// Result codes shared by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GateSet = 3,
    Net = 4,
    Numerical = 5,
    Io = 6,
    Parse = 7,
    Panic = 8,
}

/// Depth-admission mode for [`skc_compile`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkcMode {
    Calibrated = 0,
    Strict = 1,
}

/// Instruction set handle.
pub struct SkcGateSet(Arc<InstructionSet>);

/// Basic approximation net handle.
pub struct SkcNet(Arc<BasicNet>);

/// Gate indices produced by [`skc_compile`] in product order: the
/// approximation is `gates[0] * gates[1] * ...`.
/// Release with [`skc_sequence_free`].
#[repr(C)]
pub struct SkcSequence {
    pub gates: *mut u32,
    pub len: usize,
    pub measured_eps: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> SkcStatus {
    match err {
        Error::Io(_) => SkcStatus::Io,
        Error::Json(_) => SkcStatus::Parse,
        Error::InstructionSet(_) | Error::UnknownGate(_) => SkcStatus::GateSet,
        Error::NetFormat(_) | Error::FingerprintMismatch { .. } => SkcStatus::Net,
        e if e.is_numerical() => SkcStatus::Numerical,
        _ => SkcStatus::InvalidArgument,
    }
}

struct Fail(SkcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SkcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SkcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SkcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SkcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SkcStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn skc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn skc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Built-in Clifford+T set.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_clifford_t(out: *mut *mut SkcGateSet) -> SkcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(SkcGateSet(Arc::new(InstructionSet::clifford_t()))));
        Ok(())
    })
}

/// Parses a gate-set JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_from_json(json: *const c_char, out: *mut *mut SkcGateSet) -> SkcStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        let set = InstructionSet::parse(text)?;
        *out = Box::into_raw(Box::new(SkcGateSet(Arc::new(set))));
        Ok(())
    })
}

/// Loads a gate-set JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_load(path: *const c_char, out: *mut *mut SkcGateSet) -> SkcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let set = InstructionSet::load(path, &Tolerances::default())?;
        *out = Box::into_raw(Box::new(SkcGateSet(Arc::new(set))));
        Ok(())
    })
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_dim(set: *const SkcGateSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dim())
}

/// Number of gates including added inverses, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_len(set: *const SkcGateSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Name of gate `index`, to be released with [`skc_string_free`].
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_gate_name(
    set: *const SkcGateSet,
    index: usize,
    out: *mut *mut c_char,
) -> SkcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out = out_arg(out, "out")?;
        let gate = set.0.gate(index)?;
        *out = CString::new(gate.name.clone())
            .map_err(|_| Fail(SkcStatus::GateSet, "gate name contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skc_gateset_free(set: *mut SkcGateSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Enumerates the net of all reduced words up to length `l0`. The net is
/// unaudited; call [`skc_net_audit`] before compiling.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_net_build(set: *const SkcGateSet, l0: usize, out: *mut *mut SkcNet) -> SkcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out = out_arg(out, "out")?;
        let net = BasicNet::build(set.0.clone(), l0, &NetConfig::default())?;
        *out = Box::into_raw(Box::new(SkcNet(Arc::new(net))));
        Ok(())
    })
}

/// Measures the covering radius over `samples` Haar-random targets and
/// stores it on the net. `eps0` may be null.
///
/// # Safety
/// `net` must be a live handle; `eps0` null or valid.
#[no_mangle]
pub unsafe extern "C" fn skc_net_audit(net: *mut SkcNet, samples: usize, seed: u64, eps0: *mut f64) -> SkcStatus {
    guard(|| {
        let net = net.as_mut().ok_or_else(|| null("net"))?;
        let (max, _) = Arc::make_mut(&mut net.0).audit(samples, seed)?;
        if let Some(e) = eps0.as_mut() {
            *e = max;
        }
        Ok(())
    })
}

/// Measured eps0, or NaN if the net is unaudited or null.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_net_eps0(net: *const SkcNet) -> f64 {
    net.as_ref().and_then(|n| n.0.measured_eps0()).unwrap_or(f64::NAN)
}

/// Number of net entries, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skc_net_len(net: *const SkcNet) -> usize {
    net.as_ref().map_or(0, |n| n.0.len())
}

/// Copy of the instruction set the net was built over.
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_net_gateset(net: *const SkcNet, out: *mut *mut SkcGateSet) -> SkcStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(SkcGateSet(net.0.set().clone())));
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn skc_net_save(net: *const SkcNet, path: *const c_char) -> SkcStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        net.0.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Loads a net file, including the gate set embedded in it.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skc_net_load(path: *const c_char, out: *mut *mut SkcNet) -> SkcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let net = BasicNet::load_standalone(path, &NetConfig::default())?;
        *out = Box::into_raw(Box::new(SkcNet(Arc::new(net))));
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skc_net_free(net: *mut SkcNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Compiles the `dim x dim` unitary `matrix` (row-major, real and imaginary
/// parts interleaved, `2 * dim * dim` doubles) at recursion depth `depth`.
/// The target is projected into the special unitary group first.
/// `threshold <= 0` keeps the default calibrated eps0 threshold.
///
/// # Safety
/// `net` must be a live handle, `matrix` must point to `2 * dim * dim`
/// doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skc_compile(
    net: *const SkcNet,
    matrix: *const f64,
    dim: usize,
    depth: usize,
    mode: SkcMode,
    threshold: f64,
    out: *mut SkcSequence,
) -> SkcStatus {
    guard(|| {
        let net = net.as_ref().ok_or_else(|| null("net"))?;
        if matrix.is_null() {
            return Err(null("matrix"));
        }
        let out = out_arg(out, "out")?;
        if dim != net.0.dim() {
            return Err(Error::DimensionMismatch(dim, net.0.dim()).into());
        }
        let raw = std::slice::from_raw_parts(matrix, 2 * dim * dim);
        let m = skc::linalg::CMatrix::from_fn(dim, dim, |r, c| {
            let k = 2 * (r * dim + c);
            skc::linalg::c(raw[k], raw[k + 1])
        });
        let target = project_su(&Unitary::new(m)?)?;
        let mode = match mode {
            SkcMode::Calibrated => DepthMode::Calibrated,
            SkcMode::Strict => DepthMode::Strict,
        };
        let mut config = EngineConfig::for_dim(dim).with_mode(mode);
        if threshold > 0.0 {
            config.calibrated_threshold = threshold;
        }
        let compiler = Compiler::new(net.0.clone(), config)?;
        let report = compiler.compile(&target, depth)?;
        let gates = report.sequence.0.into_boxed_slice();
        out.len = gates.len();
        out.measured_eps = report.measured_eps;
        out.gates = Box::into_raw(gates) as *mut u32;
        Ok(())
    })
}

/// # Safety
/// `seq` must be null or filled by [`skc_compile`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skc_sequence_free(seq: *mut SkcSequence) {
    if let Some(seq) = seq.as_mut() {
        if !seq.gates.is_null() {
            drop(Box::from_raw(ptr::slice_from_raw_parts_mut(seq.gates, seq.len)));
        }
        seq.gates = ptr::null_mut();
        seq.len = 0;
    }
}

/// Gate names of `seq` separated by spaces, in product order, or in
/// application order when `circuit_order != 0`. Release with [`skc_string_free`].
///
/// # Safety
/// `set` must be a live handle, `seq` a filled sequence and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn skc_format_sequence(
    set: *const SkcGateSet,
    seq: *const SkcSequence,
    circuit_order: c_int,
    out: *mut *mut c_char,
) -> SkcStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        let out = out_arg(out, "out")?;
        let gates = if seq.len == 0 {
            Vec::new()
        } else if seq.gates.is_null() {
            return Err(null("seq.gates"));
        } else {
            std::slice::from_raw_parts(seq.gates, seq.len).to_vec()
        };
        if let Some(&g) = gates.iter().find(|&&g| g as usize >= set.0.len()) {
            return Err(Error::UnknownGate(g as usize).into());
        }
        let order = if circuit_order != 0 { Order::Circuit } else { Order::Product };
        let text = set.0.format_sequence(&GateSequence(gates), order);
        *out = CString::new(text)
            .map_err(|_| Fail(SkcStatus::GateSet, "gate name contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
