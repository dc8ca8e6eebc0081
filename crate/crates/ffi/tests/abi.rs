use std::ffi::{CStr, CString};
use std::ptr;

use clausius_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cl_last_error()) }.to_string_lossy().into_owned()
}

fn system(t: f64, g: f64, w: f64) -> *mut ClSystem {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cl_system_from_ratios(t, g, w, &mut s) }, ClStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn routes_agree_through_the_abi() {
    let s = system(1.0, 1.0, 50.0);
    let (mut a, mut b) = (ClMoments::default(), ClMoments::default());
    unsafe {
        assert_eq!(cl_moments(s, ClRoute::Matsubara, &mut a), ClStatus::Ok);
        assert_eq!(cl_moments(s, ClRoute::Spectral, &mut b), ClStatus::Ok);
        cl_system_free(s);
    }
    assert!(((a.f1 - b.f1) / a.f1).abs() < 1e-8 && ((a.f2 - b.f2) / a.f2).abs() < 1e-8);
    assert_eq!(a.cross, 0.0);
    let mut s_vn = 0.0;
    assert_eq!(unsafe { cl_gaussian_entropy(&a, &mut s_vn) }, ClStatus::Ok);
    assert!(s_vn > 0.0);
}

#[test]
fn oracle_moments_are_close_to_the_continuum() {
    let s = system(0.2, 1.0, 50.0);
    let (mut exact, mut cont) = (ClMoments::default(), ClMoments::default());
    unsafe {
        assert_eq!(cl_oracle_moments(s, 256, 0.0, &mut exact), ClStatus::Ok);
        assert_eq!(cl_moments(s, ClRoute::Auto, &mut cont), ClStatus::Ok);
        cl_system_free(s);
    }
    assert!(((exact.f1 - cont.f1) / cont.f1).abs() < 1e-2);
}

#[test]
fn composed_process_restores_clausius() {
    let s = system(0.05, 5.0, 100.0);
    let mut mass = ClThermoReport::default();
    let mut r = ClComposedReport::default();
    unsafe {
        assert_eq!(cl_mass_process(s, 2.0, 17, &mut mass), ClStatus::Ok);
        assert_eq!(cl_composed_process(s, 2.0, 17, &mut r), ClStatus::Ok);
        cl_system_free(s);
    }
    assert!(mass.delta_entropy < 0.0 && mass.heat > 0.0 && !mass.clausius_satisfied);
    assert!(r.total.clausius_satisfied && r.total.heat < 0.0);
    assert_eq!(r.mass.heat, mass.heat);
}

#[test]
fn errors_carry_status_and_message() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cl_system_new(1.0, 1.0, -1.0, 1.0, 50.0, &mut s) }, ClStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("temperature"), "{}", last_error());

    let mut m = ClMoments::default();
    assert_eq!(unsafe { cl_moments(ptr::null(), ClRoute::Auto, &mut m) }, ClStatus::NullPointer);
    assert!(last_error().contains("system"));

    let sys = system(1.0, 1.0, 50.0);
    let mut r = ClThermoReport::default();
    assert_eq!(unsafe { cl_mass_process(sys, 2.0, 8, &mut r) }, ClStatus::InvalidArgument);
    unsafe { cl_system_free(sys) };

    let bad = ClMoments { f1: 0.1, f2: 0.1, cross: 0.0 };
    let mut x = 0.0;
    assert_eq!(unsafe { cl_gaussian_entropy(&bad, &mut x) }, ClStatus::Numerical);

    // A successful call clears the message.
    assert_eq!(unsafe { cl_landauer_bound(std::f64::consts::LN_2, 1.0, &mut x) }, ClStatus::Ok);
    assert!((x - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(last_error().is_empty());
    unsafe { cl_system_free(ptr::null_mut()) };
}

#[test]
fn ensembles_from_arrays_and_text_agree() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let p = [0.5, 0.5];
    let re = [1.0, 0.0, 0.0, 0.0, r * r, r * r, r * r, r * r];
    let im = [0.0; 8];
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { cl_ensemble_new(2, 2, p.as_ptr(), re.as_ptr(), im.as_ptr(), &mut a) }, ClStatus::Ok);

    let text = CString::new("2 2\n0.5\n1+0j 0+0j\n0+0j 0+0j\n0.5\n0.5+0j 0.5+0j\n0.5+0j 0.5+0j\n").unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { cl_ensemble_parse(text.as_ptr(), &mut b) }, ClStatus::Ok);

    let (mut chi_a, mut chi_b, mut acc) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(cl_holevo_chi(a, &mut chi_a), ClStatus::Ok);
        assert_eq!(cl_holevo_chi(b, &mut chi_b), ClStatus::Ok);
        assert_eq!(cl_accessible_info_lower(b, 32, &mut acc), ClStatus::Ok);
        cl_ensemble_free(a);
        cl_ensemble_free(b);
    }
    assert!((chi_a - 0.4165).abs() < 1e-4);
    assert!((chi_a - chi_b).abs() < 1e-12);
    assert!(acc > 0.27 && acc < chi_a);

    let bad = CString::new("2 2\n0.7\n1+0j 0+0j\n0+0j 0+0j\n0.2\n0+0j 0+0j\n0+0j 1+0j\n").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { cl_ensemble_parse(bad.as_ptr(), &mut c) }, ClStatus::Parse);
    assert!(last_error().contains("probabilities sum 0.9"), "{}", last_error());
    assert!(c.is_null());
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(cl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
