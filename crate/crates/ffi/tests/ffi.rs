use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use renyi_sim_ffi::*;

fn last_error() -> String {
    let p = rs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn exact_r2_and_energy() {
    let mut r2 = 0.0;
    assert_eq!(unsafe { rs_exact_r2(0.0, &mut r2) }, RsStatus::Ok);
    assert!((r2 - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { rs_exact_r2(1000.0, &mut r2) }, RsStatus::Ok);
    assert!((r2 - 0.5).abs() < 1e-4);
    assert!((rs_ground_energy(0.0) + 2.0).abs() < 1e-15);
    assert_eq!(unsafe { rs_exact_r2(1.0, ptr::null_mut()) }, RsStatus::NullPointer);
}

#[test]
fn state_handle_lifecycle() {
    let mut s: *mut RsState = ptr::null_mut();
    unsafe {
        assert_eq!(rs_state_new_zero(2, &mut s), RsStatus::Ok);
        assert_eq!(rs_state_num_qubits(s), 2);
        let q = [0usize, 1];
        assert_eq!(rs_state_apply_gate(s, RsGateKind::H, q.as_ptr(), 1, ptr::null(), 0), RsStatus::Ok);
        assert_eq!(rs_state_apply_gate(s, RsGateKind::Cnot, q.as_ptr(), 2, ptr::null(), 0), RsStatus::Ok);
        let mut probs = [0.0; 4];
        assert_eq!(rs_state_probabilities(s, probs.as_mut_ptr(), 4), RsStatus::Ok);
        assert!((probs[0] - 0.5).abs() < 1e-12 && (probs[3] - 0.5).abs() < 1e-12);
        assert_eq!(rs_state_probabilities(s, probs.as_mut_ptr(), 3), RsStatus::InvalidArgument);
        let mut purity = 0.0;
        assert_eq!(rs_state_purity(s, &mut purity), RsStatus::Ok);
        assert!((purity - 0.5).abs() < 1e-12);

        let bad = [0usize, 9];
        assert_eq!(rs_state_apply_gate(s, RsGateKind::Cnot, bad.as_ptr(), 2, ptr::null(), 0), RsStatus::OutOfRange);
        assert!(last_error().contains('9'));
        let theta = [0.3];
        assert_eq!(rs_state_apply_gate(s, RsGateKind::Rx, q.as_ptr(), 1, ptr::null(), 0), RsStatus::Parse);
        assert_eq!(rs_state_apply_gate(s, RsGateKind::Rx, q.as_ptr(), 1, theta.as_ptr(), 1), RsStatus::Ok);
        rs_state_free(s);
        rs_state_free(ptr::null_mut());
        assert_eq!(rs_state_num_qubits(ptr::null()), 0);
        assert_eq!(rs_state_new_zero(0, &mut s), RsStatus::OutOfRange);
    }
}

#[test]
fn prepared_state_matches_preset() {
    let mut s: *mut RsState = ptr::null_mut();
    unsafe {
        assert_eq!(rs_state_new_prepared(RsMethod::I, 0.0, &mut s), RsStatus::Ok);
        let mut probs = [0.0; 4];
        rs_state_probabilities(s, probs.as_mut_ptr(), 4);
        assert!(probs.iter().all(|p| (p - 0.25).abs() < 1e-12));
        rs_state_free(s);
        assert_eq!(rs_state_new_prepared(RsMethod::II, 0.0, &mut s), RsStatus::InvalidArgument);
        assert!(last_error().contains("U > 0"));
    }
}

#[test]
fn lowering_counts() {
    let mut info = RsLoweringInfo::default();
    unsafe {
        assert_eq!(rs_lower_gate(RsGateKind::CSwap, ptr::null(), 0, 1, -1, 1, &mut info), RsStatus::Ok);
        assert_eq!((info.entangling_count, info.single_qubit_count), (7, 14));
        assert!(info.residual < 1e-10);
        assert_eq!(rs_lower_gate(RsGateKind::CSwap, ptr::null(), 0, 2, 1, 1, &mut info), RsStatus::InvalidArgument);
        assert_eq!(rs_lower_swap_test(RsMethod::II, 5.0, true, &mut info), RsStatus::Ok);
        assert_eq!(info.entangling_count, 27);
    }
}

#[test]
fn r2_from_counts() {
    let mut counts = [0u64; 32];
    counts[0] = 90;
    counts[19] = 10;
    counts[16] = 25;
    let mut est = RsR2Estimate::default();
    unsafe {
        assert_eq!(rs_estimate_r2(counts.as_ptr(), 32, true, &mut est), RsStatus::Ok);
        assert!(est.defined);
        assert!((est.r2 - 0.8).abs() < 1e-12);
        assert!((est.yield_fraction - 0.8).abs() < 1e-12);
        assert_eq!(rs_estimate_r2(counts.as_ptr(), 32, false, &mut est), RsStatus::Ok);
        assert!((est.r2 - (90.0 - 35.0) / 125.0).abs() < 1e-12);

        let only_discarded = {
            let mut c = [0u64; 32];
            c[16] = 7;
            c
        };
        assert_eq!(rs_estimate_r2(only_discarded.as_ptr(), 32, true, &mut est), RsStatus::Ok);
        assert!(!est.defined);
        assert_eq!(est.yield_fraction, 0.0);
        assert_eq!(rs_estimate_r2(counts.as_ptr(), 31, true, &mut est), RsStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/renyi_sim.h")).unwrap();
    for name in [
        "rs_state_new_zero",
        "rs_state_free",
        "rs_estimate_r2",
        "rs_lower_gate",
        "rs_last_error_message",
        "typedef struct RsState RsState",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Directory holding the built shared library (`target/<profile>`).
fn library_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header_and_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib_dir = library_dir();
    if !lib_dir.join("librenyi_sim_ffi.so").exists() {
        eprintln!("shared library not found in {}; skipping", lib_dir.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lrenyi_sim_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&exe).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
