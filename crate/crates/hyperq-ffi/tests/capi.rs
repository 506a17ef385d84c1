use std::ffi::{CStr, CString};
use std::ptr;

use hyperq_ffi::*;

fn new_instance(json: &str) -> (HyperqStatus, *mut HyperqInstance) {
    let text = CString::new(json).unwrap();
    let mut inst = ptr::null_mut();
    let st = unsafe { hyperq_instance_new(text.as_ptr(), &mut inst) };
    (st, inst)
}

fn last_error() -> String {
    let p = hyperq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn run(inst: *const HyperqInstance, cmd: &str) -> (HyperqStatus, Option<serde_json::Value>) {
    let c = CString::new(cmd).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { hyperq_run(inst, c.as_ptr(), false, &mut out) };
    if out.is_null() {
        return (st, None);
    }
    let v = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { hyperq_string_free(out) };
    (st, Some(v))
}

const EXAMPLE: &str = r#"{"name":"ex","a":[[1,0,0,-1],[0,1,-1,-1]]}"#;

#[test]
fn analyze_round_trip() {
    let (st, inst) = new_instance(EXAMPLE);
    assert_eq!(st, HyperqStatus::Ok);
    let (mut n, mut d) = (0usize, 0usize);
    assert_eq!(unsafe { hyperq_instance_shape(inst, &mut n, &mut d) }, HyperqStatus::Ok);
    assert_eq!((n, d), (4, 2));
    let (st, rep) = run(inst, "analyze");
    assert_eq!(st, HyperqStatus::Ok);
    let rep = rep.unwrap();
    assert_eq!(rep["command"], "analyze");
    assert_eq!(rep["results"]["circuits"].as_array().unwrap().len(), 3);
    assert!(hyperq_last_error().is_null());
    unsafe { hyperq_instance_free(inst) };
}

#[test]
fn same_report_as_library() {
    let (_, inst) = new_instance(EXAMPLE);
    let (_, rep) = run(inst, "steinberg");
    let (spec, sha) = hyperq::cli_reporting::InputSpec::parse(EXAMPLE).unwrap();
    let lib = hyperq::cli_reporting::run(hyperq::cli_reporting::Command::Steinberg, &spec, &sha, false).unwrap();
    assert_eq!(rep.unwrap()["results"], lib.to_json()["results"]);
    unsafe { hyperq_instance_free(inst) };
}

#[test]
fn bad_input_codes() {
    let (st, inst) = new_instance("{not json");
    assert_eq!(st, HyperqStatus::InvalidInput);
    assert!(inst.is_null());
    assert!(!last_error().is_empty());

    let (st, inst) = new_instance(r#"{"name":"bad","a":[[1,0,2]]}"#);
    assert_eq!(st, HyperqStatus::Ok);
    let (st, rep) = run(inst, "analyze");
    assert_eq!(st, HyperqStatus::InvalidInput);
    assert!(rep.is_none());
    assert!(last_error().contains("smooth"), "{}", last_error());
    unsafe { hyperq_instance_free(inst) };
}

#[test]
fn unknown_command_and_nulls() {
    let (_, inst) = new_instance(EXAMPLE);
    let (st, _) = run(inst, "frobnicate");
    assert_eq!(st, HyperqStatus::UnknownCommand);
    assert!(last_error().contains("frobnicate"));
    let mut out = ptr::null_mut();
    let st = unsafe { hyperq_run(inst, ptr::null(), false, &mut out) };
    assert_eq!(st, HyperqStatus::NullPointer);
    let st = unsafe { hyperq_instance_new(ptr::null(), ptr::null_mut()) };
    assert_eq!(st, HyperqStatus::NullPointer);
    unsafe {
        hyperq_instance_free(inst);
        hyperq_instance_free(ptr::null_mut());
        hyperq_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hyperq_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hyperq.h")).unwrap();
    for f in [
        "hyperq_instance_new",
        "hyperq_instance_free",
        "hyperq_instance_shape",
        "hyperq_run",
        "hyperq_string_free",
        "hyperq_last_error",
        "hyperq_version",
        "typedef struct HyperqInstance HyperqInstance",
        "HYPERQ_STATUS_CHECK_FAILED = 1",
    ] {
        assert!(h.contains(f), "missing {}", f);
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{}/include", dir))
        .arg(format!("{}/tests/c/smoke.c", dir))
        .status();
    match status {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("no C compiler, skipped"),
    }
}
