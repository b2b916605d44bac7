use std::ffi::{CStr, CString};
use std::ptr;

use stereo_decorr_ffi::*;

fn last_error() -> String {
    let p = sd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

#[test]
fn scal_handle_roundtrip() {
    let params = sd_scal_default_params();
    assert_eq!(params.n_max, 10);
    let mut h: *mut SdDecorrelator = ptr::null_mut();
    let st = unsafe { sd_decorrelator_new_scal(&params, 16_000, 7, 0, &mut h) };
    assert_eq!(st, SdStatus::Ok);
    assert!(!h.is_null());
    assert!(unsafe { sd_decorrelator_latency(h) } > 0);

    let x: Vec<f32> = noise(8000, 1).iter().map(|&v| v as f32 * 0.3).collect();
    let mut y = vec![0f32; x.len()];
    for (xi, yi) in x.chunks(333).zip(y.chunks_mut(333)) {
        let st = unsafe { sd_decorrelator_process(h, xi.as_ptr(), yi.as_mut_ptr(), xi.len()) };
        assert_eq!(st, SdStatus::Ok);
    }
    assert!(y.iter().all(|v| v.is_finite()));
    assert!(y.iter().any(|&v| v != 0.0));
    unsafe { sd_decorrelator_free(h) };
}

#[test]
fn in_place_processing_matches_separate_buffers() {
    let params = sd_scal_default_params();
    let mut a: *mut SdDecorrelator = ptr::null_mut();
    let mut b: *mut SdDecorrelator = ptr::null_mut();
    unsafe {
        assert_eq!(sd_decorrelator_new_scal(&params, 16_000, 3, 1, &mut a), SdStatus::Ok);
        assert_eq!(sd_decorrelator_new_scal(&params, 16_000, 3, 1, &mut b), SdStatus::Ok);
    }
    let x: Vec<f32> = noise(4096, 2).iter().map(|&v| v as f32).collect();
    let mut y = vec![0f32; x.len()];
    let mut z = x.clone();
    unsafe {
        assert_eq!(sd_decorrelator_process(a, x.as_ptr(), y.as_mut_ptr(), x.len()), SdStatus::Ok);
        assert_eq!(sd_decorrelator_process(b, z.as_ptr(), z.as_mut_ptr(), z.len()), SdStatus::Ok);
        sd_decorrelator_free(a);
        sd_decorrelator_free(b);
    }
    assert_eq!(y, z);
}

#[test]
fn json_config_and_errors() {
    let good = CString::new(r#"{"method":"first_order_allpass"}"#).unwrap();
    let mut h: *mut SdDecorrelator = ptr::null_mut();
    assert_eq!(unsafe { sd_decorrelator_new_from_json(good.as_ptr(), 16_000, 0, 0, &mut h) }, SdStatus::Ok);
    unsafe { sd_decorrelator_free(h) };

    let bad = CString::new(r#"{"method":"scal","scal":{"beta":1.5}}"#).unwrap();
    let mut h: *mut SdDecorrelator = ptr::null_mut();
    let st = unsafe { sd_decorrelator_new_from_json(bad.as_ptr(), 16_000, 0, 0, &mut h) };
    assert_eq!(st, SdStatus::InvalidConfig);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    let junk = CString::new("{not json").unwrap();
    let st = unsafe { sd_decorrelator_new_from_json(junk.as_ptr(), 16_000, 0, 0, &mut h) };
    assert_eq!(st, SdStatus::InvalidConfig);
}

#[test]
fn invalid_params_rejected() {
    let mut params = sd_scal_default_params();
    params.beta = 1.2;
    let mut h: *mut SdDecorrelator = ptr::null_mut();
    assert_eq!(unsafe { sd_decorrelator_new_scal(&params, 16_000, 0, 0, &mut h) }, SdStatus::InvalidConfig);
    params = sd_scal_default_params();
    params.window_length = 501;
    assert_eq!(unsafe { sd_decorrelator_new_scal(&params, 16_000, 0, 0, &mut h) }, SdStatus::InvalidConfig);
    assert!(h.is_null());
}

#[test]
fn null_pointers_are_reported() {
    let params = sd_scal_default_params();
    assert_eq!(unsafe { sd_decorrelator_new_scal(ptr::null(), 16_000, 0, 0, &mut ptr::null_mut()) }, SdStatus::NullPointer);
    assert_eq!(unsafe { sd_decorrelator_new_scal(&params, 16_000, 0, 0, ptr::null_mut()) }, SdStatus::NullPointer);
    let x = [0f32; 4];
    let mut y = [0f32; 4];
    assert_eq!(unsafe { sd_decorrelator_process(ptr::null_mut(), x.as_ptr(), y.as_mut_ptr(), 4) }, SdStatus::NullPointer);
    assert!(last_error().contains("null"));
    unsafe { sd_decorrelator_free(ptr::null_mut()) };
    assert_eq!(unsafe { sd_decorrelator_latency(ptr::null()) }, 0);
}

#[test]
fn error_cleared_on_success() {
    let mut out = 0.0;
    assert_eq!(unsafe { sd_misalignment_db(ptr::null(), ptr::null(), 0, &mut out) }, SdStatus::NullPointer);
    let h = [1.0, 0.5];
    let e = [0.9, 0.5];
    assert_eq!(unsafe { sd_misalignment_db(h.as_ptr(), e.as_ptr(), 2, &mut out) }, SdStatus::Ok);
    assert!(sd_last_error().is_null());
    let expected = 10.0 * (0.01f64 / 1.25).log10();
    assert!((out - expected).abs() < 1e-12);
}

#[test]
fn coherence_of_identical_and_independent_signals() {
    let a = noise(32_768, 11);
    let b = noise(32_768, 12);
    let mut g = vec![0.0; 257];
    let mut blocks = 0u32;
    let st = unsafe { sd_coherence(a.as_ptr(), a.as_ptr(), a.len(), 16_000, 512, g.as_mut_ptr(), g.len(), &mut blocks) };
    assert_eq!(st, SdStatus::Ok);
    assert!(blocks > 100);
    assert!(g.iter().all(|&v| (v - 1.0).abs() < 1e-9));

    let mut band = 0.0;
    let st = unsafe { sd_band_coherence(a.as_ptr(), b.as_ptr(), a.len(), 16_000, 512, 100.0, 7000.0, &mut band) };
    assert_eq!(st, SdStatus::Ok);
    assert!(band < 0.05, "{band}");

    let mut short = vec![0.0; 10];
    let st = unsafe { sd_coherence(a.as_ptr(), b.as_ptr(), a.len(), 16_000, 512, short.as_mut_ptr(), short.len(), ptr::null_mut()) };
    assert_eq!(st, SdStatus::InvalidConfig);

    let st = unsafe { sd_coherence(a.as_ptr(), b.as_ptr(), 100, 16_000, 512, g.as_mut_ptr(), g.len(), ptr::null_mut()) };
    assert_eq!(st, SdStatus::InsufficientData);
}

#[test]
fn stability_predicate() {
    assert_eq!(sd_check_stability(0.6, 0.43), 1);
    assert_eq!(sd_check_stability(0.7, 0.43), 0);
    let v = unsafe { CStr::from_ptr(sd_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stereo_decorr.h")).unwrap();
    for sym in ["sd_decorrelator_new_scal", "sd_decorrelator_free", "sd_coherence", "SD_STATUS_OK", "typedef struct SdDecorrelator SdDecorrelator"] {
        assert!(header.contains(sym), "{sym}");
    }
}
