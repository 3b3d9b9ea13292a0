use std::ffi::{CStr, CString};
use std::ptr;

use gridshift_ffi::*;

fn last_error() -> String {
    let len = unsafe { gs_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; len + 1];
    unsafe { gs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn grid_roundtrip_row_major() {
    let data: Vec<f64> = (0..12).map(f64::from).collect();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gs_grid_new(3, 4, data.as_ptr(), &mut g) }, GsStatus::Ok);
    assert_eq!(unsafe { (gs_grid_rows(g), gs_grid_cols(g)) }, (3, 4));
    let mut back = vec![0.0; 12];
    assert_eq!(unsafe { gs_grid_copy(g, back.as_mut_ptr(), 12) }, GsStatus::Ok);
    assert_eq!(back, data);
    assert_eq!(unsafe { gs_grid_copy(g, back.as_mut_ptr(), 11) }, GsStatus::DimensionMismatch);
    unsafe { gs_grid_free(g) };
    unsafe { gs_grid_free(ptr::null_mut()) };
}

#[test]
fn test_matches_library() {
    let mut g = ptr::null_mut();
    let st = unsafe {
        gs_generate_field(20, 20, GsSurface::A2, 0.5, GsDependence::Iid, 0, 0.0, GsNoise::Normal, 7, 0.6, &mut g)
    };
    assert_eq!(st, GsStatus::Ok);
    let mut r = std::mem::MaybeUninit::<GsTestResult>::uninit();
    assert_eq!(unsafe { gs_run_test(g, GsTestKind::Var, 0.6, GsDecorrelate::None, r.as_mut_ptr()) }, GsStatus::Ok);
    let r = unsafe { r.assume_init() };

    let n = 20;
    let p = gridshift::make_partition(n, n, 0.6).unwrap();
    let field = gridshift::fieldgen::gen_field(
        n,
        n,
        &gridshift::MeanSurface::new(gridshift::SurfaceKind::A2, 0.5),
        &gridshift::DependenceSpec::iid(),
        gridshift::NoiseSpec::new(gridshift::NoiseDist::StdNormal, 7),
        &p,
    )
    .unwrap();
    let want = gridshift::run_test(&field, gridshift::TestKind::Var, 0.6, None).unwrap();
    assert_eq!(r.statistic, want.statistic);
    assert_eq!(r.p_value, want.p_value);
    assert_eq!((r.l_n, r.b_n, r.l_m, r.b_m), (5, 4, 5, 4));
    unsafe { gs_grid_free(g) };
}

#[test]
fn error_codes_and_messages() {
    let mut g = ptr::null_mut();
    let ones = [1.0; 16];
    assert_eq!(unsafe { gs_grid_new(4, 4, ones.as_ptr(), &mut g) }, GsStatus::Ok);
    let mut r = std::mem::MaybeUninit::<GsTestResult>::uninit();
    let st = unsafe { gs_run_test(g, GsTestKind::Gmd, 0.6, GsDecorrelate::None, r.as_mut_ptr()) };
    assert_eq!(st, GsStatus::ZeroVariance);
    assert!(last_error().contains("zero variance"), "{}", last_error());
    unsafe { gs_grid_free(g) };

    assert_eq!(unsafe { gs_grid_new(2, 2, ptr::null(), &mut g) }, GsStatus::NullPointer);
    let nan = [f64::NAN; 4];
    assert_eq!(unsafe { gs_grid_new(2, 2, nan.as_ptr(), &mut g) }, GsStatus::NonFinite);
    let st = unsafe { gs_run_test(ptr::null(), GsTestKind::Gmd, 0.6, GsDecorrelate::None, r.as_mut_ptr()) };
    assert_eq!(st, GsStatus::NullPointer);

    let seven = [0.5; 49];
    assert_eq!(unsafe { gs_grid_new(7, 7, seven.as_ptr(), &mut g) }, GsStatus::Ok);
    let st = unsafe { gs_run_test(g, GsTestKind::Var, 0.6, GsDecorrelate::None, r.as_mut_ptr()) };
    assert_eq!(st, GsStatus::NoValidPartition);
    unsafe { gs_grid_free(g) };

    let missing = CString::new("/nonexistent/grid.csv").unwrap();
    assert_eq!(unsafe { gs_grid_read_csv(missing.as_ptr(), &mut g) }, GsStatus::Io);

    // a successful call clears the message
    assert_eq!(unsafe { gs_holm([0.5].as_ptr(), 1, 0.05, ptr::null_mut(), ptr::null_mut()) }, GsStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn holm_through_abi() {
    let ps = [0.01, 0.04, 0.03];
    let mut rej = [false; 3];
    let mut adj = [0.0; 3];
    assert_eq!(unsafe { gs_holm(ps.as_ptr(), 3, 0.05, rej.as_mut_ptr(), adj.as_mut_ptr()) }, GsStatus::Ok);
    assert_eq!(rej, [true, false, false]);
    assert!((adj[0] - 0.03).abs() < 1e-15 && (adj[1] - 0.06).abs() < 1e-15);
    assert_eq!(unsafe { gs_holm(ps.as_ptr(), 3, 0.0, rej.as_mut_ptr(), adj.as_mut_ptr()) }, GsStatus::InvalidArgument);
    assert_eq!(unsafe { gs_holm(ptr::null(), 0, 0.05, ptr::null_mut(), ptr::null_mut()) }, GsStatus::Ok);
}

#[test]
fn csv_through_abi() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.csv").to_str().unwrap()).unwrap();
    let data = [0.1, -2.5, 3.0, 1e-300, 7.0, 8.0];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { gs_grid_new(2, 3, data.as_ptr(), &mut g) }, GsStatus::Ok);
    assert_eq!(unsafe { gs_grid_write_csv(g, path.as_ptr()) }, GsStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { gs_grid_read_csv(path.as_ptr(), &mut h) }, GsStatus::Ok);
    let mut back = [0.0; 6];
    assert_eq!(unsafe { gs_grid_copy(h, back.as_mut_ptr(), 6) }, GsStatus::Ok);
    assert_eq!(back, data);
    unsafe {
        gs_grid_free(g);
        gs_grid_free(h);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gridshift.h")).unwrap();
    for name in [
        "gs_grid_new",
        "gs_grid_read_csv",
        "gs_grid_write_csv",
        "gs_grid_free",
        "gs_grid_rows",
        "gs_grid_cols",
        "gs_grid_copy",
        "gs_generate_field",
        "gs_run_test",
        "gs_holm",
        "gs_last_error_message",
        "gs_version",
        "typedef struct GsGrid GsGrid",
        "GS_STATUS_ZERO_VARIANCE = 5",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    let v = unsafe { CStr::from_ptr(gs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
