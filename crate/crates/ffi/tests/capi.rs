use std::ffi::{CStr, CString};
use std::ptr;

use qgamebound_ffi::*;

const CHSH_JSON: &str = include_str!("../../core/data/chsh_classical.json");

fn last_error() -> String {
    let p = qgb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn classical_chsh_through_json() {
    let json = CString::new(CHSH_JSON).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { qgb_game_from_json(json.as_ptr(), &mut g) }, QgbStatus::QgbOk);
    let mut v = 0.0;
    assert_eq!(unsafe { qgb_classical_value(g, &mut v) }, QgbStatus::QgbOk);
    assert_eq!(v, 0.75);
    let mut up = 0.0;
    assert_eq!(unsafe { qgb_upper_bound(g, 2, ptr::null(), 1e-8, &mut up) }, QgbStatus::QgbOk);
    assert!((up - 0.75).abs() < 1e-6);
    unsafe { qgb_game_free(g) };
}

#[test]
fn chsh_bounds_sandwich_tsirelson() {
    let g = qgb_game_chsh(2);
    assert!(!g.is_null());
    let (mut up, mut lo) = (0.0, 0.0);
    let method = CString::new("sym").unwrap();
    assert_eq!(unsafe { qgb_bounds(g, 2, method.as_ptr(), 20, 0, &mut up, &mut lo) }, QgbStatus::QgbOk);
    assert!(lo >= 0.8535 && lo <= up + 1e-7, "lower {lo} upper {up}");
    let mut n = 0u64;
    assert_eq!(unsafe { qgb_level_for_epsilon(g, 0.1, false, &mut n) }, QgbStatus::QgbOk);
    assert!((212_000..214_000).contains(&n));
    unsafe { qgb_game_free(g) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new(r#"{"num_answers":2,"num_questions":2,"assist_dim":1,"pi1":[0.5,0.4],"pi2":[0.5,0.5],"win":[]}"#).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { qgb_game_from_json(bad.as_ptr(), &mut g) }, QgbStatus::QgbErrInvalid);
    assert!(g.is_null());
    assert!(last_error().contains("pi1"));

    assert_eq!(unsafe { qgb_game_from_json(ptr::null(), &mut g) }, QgbStatus::QgbErrInvalid);
    assert_eq!(unsafe { qgb_game_from_json(bad.as_ptr(), ptr::null_mut()) }, QgbStatus::QgbErrNullPointer);
    assert!(qgb_game_chsh(0).is_null());

    let g = qgb_game_chsh(2);
    let mut v = 0.0;
    let dense = CString::new("dense").unwrap();
    assert_eq!(unsafe { qgb_upper_bound(g, 6, dense.as_ptr(), 1e-8, &mut v) }, QgbStatus::QgbErrCap);
    let nope = CString::new("nope").unwrap();
    assert_eq!(unsafe { qgb_upper_bound(g, 1, nope.as_ptr(), 1e-8, &mut v) }, QgbStatus::QgbErrInvalid);
    assert_eq!(unsafe { qgb_upper_bound(ptr::null(), 1, ptr::null(), 1e-8, &mut v) }, QgbStatus::QgbErrInvalid);
    unsafe { qgb_game_free(g) };
    unsafe { qgb_game_free(ptr::null_mut()) };
}

#[test]
fn export_writes_sdpa() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chsh.dat-s");
    let g = qgb_game_chsh(1);
    let p = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { qgb_export_sdpa(g, 1, ptr::null(), p.as_ptr()) }, QgbStatus::QgbOk);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() > 4);
    unsafe { qgb_game_free(g) };
}

#[test]
fn header_declares_the_api() {
    let h = include_str!("../include/qgamebound.h");
    for name in [
        "qgb_last_error",
        "qgb_game_from_json",
        "qgb_game_chsh",
        "qgb_game_free",
        "qgb_classical_value",
        "qgb_upper_bound",
        "qgb_bounds",
        "qgb_level_for_epsilon",
        "qgb_export_sdpa",
        "QGB_ERR_CAP = 2",
        "typedef struct QgbGame QgbGame",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(&src, "#include \"qgamebound.h\"\nint main(void) { return qgb_game_chsh(1) == 0; }\n").unwrap();
    let inc = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let st = std::process::Command::new(cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", inc]).arg(&src).status().unwrap();
    assert!(st.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
