use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use curvelab_ffi::*;

fn last_error() -> String {
    let p = curvelab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn curve_handles() {
    let name = CString::new("moment-3").unwrap();
    let mut curve = ptr::null_mut();
    unsafe {
        assert_eq!(curvelab_curve_from_corpus(name.as_ptr(), &mut curve), CurvelabStatus::Ok);
        assert_eq!(curvelab_curve_dim(curve), 3);
        let mut tau = 0.0;
        assert_eq!(curvelab_curve_torsion(curve, 0.3, &mut tau), CurvelabStatus::Ok);
        assert_eq!(tau, 12.0);
        let mut p = [0.0; 3];
        assert_eq!(curvelab_curve_eval(curve, 2.0, p.as_mut_ptr(), 3), CurvelabStatus::Ok);
        assert_eq!(p, [2.0, 4.0, 8.0]);
        assert_eq!(curvelab_curve_eval(curve, 2.0, p.as_mut_ptr(), 2), CurvelabStatus::Config);
        curvelab_curve_free(curve);
    }
}

#[test]
fn bad_inputs_set_error() {
    let mut curve = ptr::null_mut();
    unsafe {
        assert_eq!(curvelab_curve_from_corpus(ptr::null(), &mut curve), CurvelabStatus::NullPointer);
        let bad = CString::new("dim = 1\ncoeffs = [[\"1/0\"]]\n").unwrap();
        assert_eq!(curvelab_curve_from_toml(bad.as_ptr(), &mut curve), CurvelabStatus::Config);
        assert!(last_error().contains("coeffs"), "{}", last_error());
        assert!(curve.is_null());
        assert_eq!(curvelab_curve_dim(ptr::null()), 0);
        curvelab_curve_free(ptr::null_mut());
        curvelab_report_free(ptr::null_mut());
        curvelab_string_free(ptr::null_mut());
    }
}

#[test]
fn run_and_emit() {
    let cmd = CString::new("decompose").unwrap();
    let cfg = CString::new("curve = { corpus = \"moment-2\" }\n").unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(curvelab_run(cmd.as_ptr(), cfg.as_ptr(), &mut report), CurvelabStatus::Ok);
        assert_eq!(curvelab_report_status(report), CurvelabCheckStatus::Pass);
        let mut text = ptr::null_mut();
        assert_eq!(curvelab_report_emit(report, false, &mut text), CurvelabStatus::Ok);
        let body = CStr::from_ptr(text).to_str().unwrap().to_owned();
        curvelab_string_free(text);
        assert!(body.contains("command = decompose"));
        assert!(!body.contains("wall_time"));
        let which = CString::new("leaves").unwrap();
        assert_eq!(curvelab_report_plot_data(report, which.as_ptr(), &mut text), CurvelabStatus::Ok);
        assert!(CStr::from_ptr(text).to_str().unwrap().starts_with("index,lo,hi"));
        curvelab_string_free(text);
        let missing = CString::new("nope").unwrap();
        assert_eq!(curvelab_report_plot_data(report, missing.as_ptr(), &mut text), CurvelabStatus::Config);
        curvelab_report_free(report);

        let unknown = CString::new("frobnicate").unwrap();
        assert_eq!(curvelab_run(unknown.as_ptr(), cfg.as_ptr(), &mut report), CurvelabStatus::Config);
        let needs_seed = CString::new("verify-geometric").unwrap();
        assert_eq!(curvelab_run(needs_seed.as_ptr(), cfg.as_ptr(), &mut report), CurvelabStatus::Config);
        assert!(last_error().contains("seed"));
    }
}

#[test]
fn version_matches() {
    let v = unsafe { CStr::from_ptr(curvelab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("header_check.c");
    std::fs::write(
        &src,
        "#include \"curvelab.h\"\nint main(void) { CurvelabCurve *c = 0; return curvelab_curve_dim(c) == 0 ? CURVELAB_STATUS_OK : 1; }\n",
    )
    .unwrap();
    let status = match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(format!("{dir}/include")).arg(&src).status() {
        Ok(s) => s,
        Err(_) => return, // no C compiler available
    };
    assert!(status.success());
}
