//! The C interface exercised from Rust through its exported symbols.

use std::ffi::{CStr, CString};
use std::ptr;

use uavcov_ffi::*;

fn last_error() -> String {
    let p = uavcov_last_error();
    assert!(!p.is_null(), "an error message was recorded");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Handle(*mut UavcovParams);

impl Handle {
    fn default() -> Self {
        Handle(uavcov_params_new_default())
    }

    fn set(&self, key: &str, value: &str) -> UavcovStatus {
        let (k, v) = (CString::new(key).unwrap(), CString::new(value).unwrap());
        unsafe { uavcov_params_set(self.0, k.as_ptr(), v.as_ptr()) }
    }

    fn get(&self, key: &str) -> f64 {
        let k = CString::new(key).unwrap();
        let mut v = f64::NAN;
        assert_eq!(unsafe { uavcov_params_get(self.0, k.as_ptr(), &mut v) }, UavcovStatus::Ok);
        v
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { uavcov_params_free(self.0) };
    }
}

#[test]
fn coverage_matches_the_library() {
    let h = Handle::default();
    let mut c = UavcovCoverage::default();
    let status = unsafe { uavcov_conditional_coverage(h.0, UAVCOV_SCHEME_PROPOSED, 200.0, &mut c) };
    assert_eq!(status, UavcovStatus::Ok);
    assert!(uavcov_last_error().is_null());
    let direct = uavcov::coverage::conditional_coverage(&uavcov::SystemParams::default(), 200.0).unwrap();
    assert_eq!(c.total, direct.total);
    assert_eq!(c.pc1 + c.pc2 + c.pc3, c.total);

    let mut g = UavcovCoverage::default();
    unsafe { uavcov_conditional_coverage(h.0, UAVCOV_SCHEME_GROUND_ONLY, 200.0, &mut g) };
    assert_eq!(g.pc1, g.total);
    assert!(g.total < c.total);
}

#[test]
fn setters_and_getters_round_trip() {
    let h = Handle::default();
    assert_eq!(h.set("delta", "0.8"), UavcovStatus::Ok);
    assert_eq!(h.get("delta"), 0.8);
    assert_eq!(h.get("m_los"), 4.0);
    assert_eq!(h.set("delta", "lots"), UavcovStatus::Parse);
    assert!(last_error().contains("delta"));
    assert_eq!(h.set("colour", "1"), UavcovStatus::Parse);

    assert_eq!(h.set("delta", "3"), UavcovStatus::Ok);
    assert_eq!(unsafe { uavcov_params_validate(h.0) }, UavcovStatus::InvalidParams);
    assert!(last_error().contains("delta"));
    let mut f = UavcovAreaFractions::default();
    assert_eq!(unsafe { uavcov_area_fractions(h.0, &mut f) }, UavcovStatus::InvalidParams);
}

#[test]
fn toml_handles() {
    let doc = CString::new("delta = 0.0\nuav_height = 250.0\n").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { uavcov_params_from_toml(doc.as_ptr(), &mut p) }, UavcovStatus::Ok);
    let h = Handle(p);
    assert_eq!(h.get("uav_height"), 250.0);
    let mut f = UavcovAreaFractions::default();
    assert_eq!(unsafe { uavcov_area_fractions(h.0, &mut f) }, UavcovStatus::Ok);
    assert_eq!((f.f1, f.f3), (0.0, 0.0));
    assert!((f.f2 - 1.0).abs() < 1e-9);

    let bad = CString::new("delta = [").unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { uavcov_params_from_toml(bad.as_ptr(), &mut q) }, UavcovStatus::Parse);
    assert!(q.is_null());
}

#[test]
fn distance_law_and_laplace() {
    let h = Handle::default();
    let (mut cdf, mut pdf, mut l) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(uavcov_nearest_bs_cdf(h.0, 300.0, 200.0, &mut cdf), UavcovStatus::Ok);
        assert_eq!(uavcov_nearest_bs_pdf(h.0, 300.0, 400.0, &mut pdf), UavcovStatus::Ok);
        assert_eq!(uavcov_laplace_i2(h.0, 300.0, 400.0, 0.0, &mut l), UavcovStatus::Ok);
    }
    assert_eq!(cdf, 0.0);
    assert!(pdf > 0.0);
    assert_eq!(l, 1.0);
    let status = unsafe { uavcov_laplace_i2(h.0, 300.0, 100.0, 1.0, &mut l) };
    assert_eq!(status, UavcovStatus::Domain);
}

#[test]
fn simulation_is_seeded() {
    let h = Handle::default();
    assert_eq!(h.set("sim_radius", "4000"), UavcovStatus::Ok);
    let (mut a, mut b) = (UavcovEstimate::default(), UavcovEstimate::default());
    unsafe {
        assert_eq!(uavcov_estimate_coverage(h.0, UAVCOV_SCHEME_PROPOSED, 100.0, 200, 4, &mut a), UavcovStatus::Ok);
        uavcov_estimate_coverage(h.0, UAVCOV_SCHEME_PROPOSED, 100.0, 200, 4, &mut b);
    }
    assert_eq!(a, b);
    assert_eq!(a.samples, 200);
    assert!(a.estimate > 0.9);
}

#[test]
fn nse_of_all_schemes() {
    let h = Handle::default();
    let mut v = [0.0; 3];
    for (code, slot) in [UAVCOV_SCHEME_PROPOSED, UAVCOV_SCHEME_UAV_ONLY, UAVCOV_SCHEME_GROUND_ONLY].into_iter().zip(&mut v) {
        assert_eq!(unsafe { uavcov_nse(h.0, code, slot) }, UavcovStatus::Ok);
    }
    assert!(v[0] >= v[1] && v[0] >= v[2]);
}

#[test]
fn bad_pointers_and_codes() {
    let mut c = UavcovCoverage::default();
    assert_eq!(
        unsafe { uavcov_conditional_coverage(ptr::null(), UAVCOV_SCHEME_PROPOSED, 0.0, &mut c) },
        UavcovStatus::NullPointer
    );
    assert!(last_error().contains("params"));
    let h = Handle::default();
    assert_eq!(
        unsafe { uavcov_conditional_coverage(h.0, UAVCOV_SCHEME_PROPOSED, 0.0, ptr::null_mut()) },
        UavcovStatus::NullPointer
    );
    assert_eq!(unsafe { uavcov_conditional_coverage(h.0, 9, 0.0, &mut c) }, UavcovStatus::Domain);
    assert_eq!(unsafe { uavcov_conditional_coverage(h.0, UAVCOV_SCHEME_PROPOSED, 900.0, &mut c) }, UavcovStatus::Domain);
    assert_eq!(unsafe { uavcov_params_set(h.0, ptr::null(), ptr::null()) }, UavcovStatus::NullPointer);
    unsafe { uavcov_params_free(ptr::null_mut()) };
    let v = unsafe { CStr::from_ptr(uavcov_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
