use std::ffi::{CStr, CString};
use std::ptr;

use topofeat_ffi::*;

unsafe fn triangle() -> *mut TfPointCloud {
    let xy = [0.0, 0.0, 1.0, 2.0, 3.0, 0.0];
    let mut pc = ptr::null_mut();
    assert_eq!(tf_pointcloud_new(xy.as_ptr(), 3, &mut pc), TfStatus::Ok);
    pc
}

unsafe fn pairs(d: *const TfDiagram) -> Vec<(usize, f64, f64)> {
    (0..tf_diagram_len(d))
        .map(|i| {
            let (mut k, mut b, mut e) = (0, 0.0, 0.0);
            assert_eq!(tf_diagram_get(d, i, &mut k, &mut b, &mut e), TfStatus::Ok);
            (k, b, e)
        })
        .collect()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(tf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn triangle_alpha_and_squared_cech_agree() {
    unsafe {
        let pc = triangle();
        assert_eq!(tf_pointcloud_len(pc), 3);
        let (mut x, mut y) = (0.0, 0.0);
        assert_eq!(tf_pointcloud_get(pc, 1, &mut x, &mut y), TfStatus::Ok);
        assert_eq!((x, y), (1.0, 2.0));
        assert_eq!(tf_pointcloud_get(pc, 3, &mut x, &mut y), TfStatus::InvalidArgument);

        let mut alpha = ptr::null_mut();
        let mut cech = ptr::null_mut();
        assert_eq!(tf_diagram_compute(pc, TfComplex::Alpha, false, &mut alpha), TfStatus::Ok);
        assert_eq!(tf_diagram_compute(pc, TfComplex::Cech, true, &mut cech), TfStatus::Ok);
        let a = pairs(alpha);
        let c = pairs(cech);
        assert_eq!(a.len(), 4);
        assert_eq!(a.len(), c.len());
        for (p, q) in a.iter().zip(&c) {
            assert_eq!(p.0, q.0);
            assert!((p.1 - q.1).abs() < 1e-9);
            assert!(p.2 == q.2 || (p.2 - q.2).abs() < 1e-9);
        }
        assert!(a.contains(&(1, 2.25, 2.5)));

        let mut dist = -1.0;
        assert_eq!(tf_bottleneck(alpha, cech, 1, &mut dist), TfStatus::Ok);
        assert!(dist < 1e-9);

        let mut sil = vec![0.0; 400];
        assert_eq!(tf_silhouette_feature(alpha, 200, sil.as_mut_ptr(), sil.len()), TfStatus::Ok);
        assert!(sil.iter().any(|v| *v > 0.0));
        assert_eq!(tf_silhouette_feature(alpha, 200, sil.as_mut_ptr(), 10), TfStatus::BufferTooSmall);
        assert!(!tf_last_error_message().is_null());

        let mut sig = vec![0.0; tf_signature_feature_len()];
        assert_eq!(sig.len(), 310);
        assert_eq!(tf_signature_feature(alpha, sig.as_mut_ptr(), sig.len()), TfStatus::Ok);

        tf_diagram_free(alpha);
        tf_diagram_free(cech);
        tf_pointcloud_free(pc);
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(tf_diagram_compute(ptr::null(), TfComplex::Rips, false, &mut out), TfStatus::NullPointer);
        assert!(out.is_null());
        assert_eq!(tf_pointcloud_len(ptr::null()), 0);
        assert_eq!(tf_diagram_len(ptr::null()), 0);
        tf_pointcloud_free(ptr::null_mut());
        tf_diagram_free(ptr::null_mut());
        let msg = CStr::from_ptr(tf_last_error_message()).to_str().unwrap();
        assert!(msg.contains("null"));
    }
}

#[test]
fn collinear_alpha_is_degenerate() {
    unsafe {
        let xy = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        let mut pc = ptr::null_mut();
        assert_eq!(tf_pointcloud_new(xy.as_ptr(), 3, &mut pc), TfStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(tf_diagram_compute(pc, TfComplex::Alpha, false, &mut d), TfStatus::Degenerate);
        tf_pointcloud_free(pc);
    }
}

#[test]
fn annulus_sampling_and_cech_cap() {
    unsafe {
        let mut pc = ptr::null_mut();
        assert_eq!(tf_sample_annulus(100, 0.5, 1.0, 3, &mut pc), TfStatus::Ok);
        assert_eq!(tf_pointcloud_len(pc), 100);
        let mut d = ptr::null_mut();
        assert_eq!(tf_diagram_compute(pc, TfComplex::Cech, false, &mut d), TfStatus::SizeCap);
        tf_pointcloud_free(pc);

        assert_eq!(tf_sample_annulus(10, 1.0, 0.5, 3, &mut pc), TfStatus::InvalidArgument);
        assert_eq!(tf_sample_disc(20, 3, &mut pc), TfStatus::Ok);
        assert_eq!(tf_pointcloud_len(pc), 20);
        tf_pointcloud_free(pc);
    }
}

#[test]
fn read_missing_file_is_io() {
    let path = CString::new("/nonexistent/points.txt").unwrap();
    let mut pc = ptr::null_mut();
    let s = unsafe { tf_pointcloud_read(path.as_ptr(), &mut pc) };
    assert_eq!(s, TfStatus::Io);
}

#[test]
fn iou_of_reference_masks() {
    // 4x4 masks, class 1 overlaps in 6 pixels with 3 extra on each side.
    let truth: Vec<u16> = vec![1, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 0, 0, 0, 0, 0];
    let pred: Vec<u16> = vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0];
    let mut per = [0.0; 2];
    let mut total = 0.0;
    let s = unsafe { tf_iou(pred.as_ptr(), truth.as_ptr(), 4, 4, 2, per.as_mut_ptr(), &mut total) };
    assert_eq!(s, TfStatus::Ok);
    assert_eq!(per[1], 0.5);
    assert!((total - (per[0] + per[1]) / 2.0).abs() < 1e-15);
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/topofeat.h")).unwrap();
    for name in [
        "tf_version",
        "tf_last_error_message",
        "tf_pointcloud_new",
        "tf_pointcloud_read",
        "tf_pointcloud_len",
        "tf_pointcloud_get",
        "tf_pointcloud_free",
        "tf_sample_disc",
        "tf_sample_annulus",
        "tf_diagram_compute",
        "tf_diagram_len",
        "tf_diagram_get",
        "tf_diagram_free",
        "tf_bottleneck",
        "tf_silhouette_feature",
        "tf_signature_feature",
        "tf_signature_feature_len",
        "tf_iou",
        "typedef struct TfPointCloud TfPointCloud",
        "TF_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
