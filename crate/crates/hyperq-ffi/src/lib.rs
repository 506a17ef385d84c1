//! C interface to `hyperq`.
//!
//! Every entry point returns a [`HyperqStatus`]; on anything but `Ok` the
//! message is available from [`hyperq_last_error`] on the same thread.
//! Objects handed out by the library are released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperq::cli_reporting::{self, Command, InputSpec};
use hyperq::HyperqError;

/// Result codes. The first four mirror the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperqStatus {
    Ok = 0,
    /// The call succeeded but the report holds at least one failing check.
    CheckFailed = 1,
    InvalidInput = 2,
    Unsupported = 3,
    NullPointer = 4,
    UnknownCommand = 5,
    Internal = 6,
}

impl HyperqStatus {
    fn from_error(e: &HyperqError) -> Self {
        match e.exit_code() {
            2 => HyperqStatus::InvalidInput,
            3 => HyperqStatus::Unsupported,
            _ => HyperqStatus::Internal,
        }
    }
}

/// A parsed input instance.
pub struct HyperqInstance {
    spec: InputSpec,
    sha: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> HyperqStatus) -> HyperqStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal: {}", msg));
            HyperqStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, HyperqStatus> {
    if p.is_null() {
        set_error("null pointer");
        return Err(HyperqStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        HyperqStatus::InvalidInput
    })
}

fn parse_command(name: &str) -> Option<Command> {
    Some(match name {
        "analyze" => Command::Analyze,
        "stab" => Command::Stab,
        "steinberg" => Command::Steinberg,
        "verify" => Command::Verify,
        "layers" => Command::Layers,
        "nested" => Command::Nested,
        "chart" => Command::Chart,
        "extend" => Command::Extend,
        "fan" => Command::Fan,
        _ => return None,
    })
}

/// Parses an instance from JSON text (the same format the CLI reads).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hyperq_instance_new(json: *const c_char, out: *mut *mut HyperqInstance) -> HyperqStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return HyperqStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match InputSpec::parse(text) {
            Ok((spec, sha)) => {
                *out = Box::into_raw(Box::new(HyperqInstance { spec, sha }));
                HyperqStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                HyperqStatus::from_error(&e)
            }
        }
    })
}

/// # Safety
/// `inst` must come from [`hyperq_instance_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn hyperq_instance_free(inst: *mut HyperqInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of columns `n` and rank `d` of the instance matrix.
///
/// # Safety
/// `inst` must be a live instance; `n` and `d` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hyperq_instance_shape(inst: *const HyperqInstance, n: *mut usize, d: *mut usize) -> HyperqStatus {
    guard(|| {
        if inst.is_null() || n.is_null() || d.is_null() {
            set_error("null pointer");
            return HyperqStatus::NullPointer;
        }
        let spec = &(*inst).spec;
        *d = spec.a.len();
        *n = spec.a[0].len();
        HyperqStatus::Ok
    })
}

/// Runs a subcommand and returns the report as JSON in `*out`
/// (release it with [`hyperq_string_free`]). A report is produced even
/// when checks fail; the status is then `CheckFailed`.
///
/// # Safety
/// `inst` must be a live instance, `command` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hyperq_run(
    inst: *const HyperqInstance,
    command: *const c_char,
    exact: bool,
    out: *mut *mut c_char,
) -> HyperqStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            set_error("null pointer");
            return HyperqStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let name = match read_str(command) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let Some(cmd) = parse_command(name) else {
            set_error(format!("unknown command '{}'", name));
            return HyperqStatus::UnknownCommand;
        };
        let inst = &*inst;
        match cli_reporting::run(cmd, &inst.spec, &inst.sha, exact) {
            Ok(rep) => {
                let text = cli_reporting::to_canonical_string(&rep.to_json());
                *out = CString::new(text).expect("json has no NUL").into_raw();
                if rep.exit_code() == 0 {
                    HyperqStatus::Ok
                } else {
                    set_error("report has failing checks");
                    HyperqStatus::CheckFailed
                }
            }
            Err(e) => {
                set_error(e.to_string());
                HyperqStatus::from_error(&e)
            }
        }
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn hyperq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failing call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn hyperq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn hyperq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
