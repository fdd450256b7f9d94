use std::ffi::CStr;
use std::ptr;

use hermite_decay::oscillator::TestFunction;
use hermite_decay::{direct_sum, envelope, find_nmax, hermite_exact, SumParams};
use hermite_decay_ffi::*;

fn params(kappa: f64, beta: f64, y: f64) -> *mut HdSumParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { hd_sum_params_new(kappa, beta, y, &mut p) }, HdStatus::Ok);
    p
}

fn last_error() -> String {
    let p = hd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn hermite_matches_closed_forms() {
    // h_1(x) = sqrt(2) x h_0(x), h_0(x) = pi^{-1/4} e^{-x^2/2}.
    let x = 1.7f64;
    let mut out = HdSignedLog { sign: 0, log_abs: 0.0 };
    assert_eq!(unsafe { hd_hermite(1, -x, &mut out) }, HdStatus::Ok);
    let expect = (2f64.sqrt() * x).ln() - 0.25 * std::f64::consts::PI.ln() - x * x / 2.0;
    assert_eq!(out.sign, -1);
    assert!((out.log_abs - expect).abs() < 1e-14);

    // Far outside f64 range the log survives.
    assert_eq!(unsafe { hd_hermite(5, 60.0, &mut out) }, HdStatus::Ok);
    assert_eq!(out.log_abs, hermite_exact(5, 60.0).logmag());
    assert!(out.log_abs < -1700.0);

    assert_eq!(unsafe { hd_hermite(5, f64::NAN, &mut out) }, HdStatus::Domain);
}

#[test]
fn phi_and_domain_errors() {
    let mut phi = 0.0;
    assert_eq!(unsafe { hd_phi(3.0, 10.0, &mut phi) }, HdStatus::Ok);
    assert!((phi.cosh() - 10.0 / 8f64.sqrt()).abs() < 1e-14);
    assert_ne!(unsafe { hd_phi(30.0, 2.0, &mut phi) }, HdStatus::Ok);
    assert!(!last_error().is_empty());
}

#[test]
fn sums_agree_with_library() {
    let p = params(1.0, 0.25, 0.5);
    let core = SumParams::new(1.0, 0.25, 0.5).unwrap();
    for x in [0.0, 3.0, 25.0, 80.0] {
        let mut s = HdSignedLog { sign: 0, log_abs: 0.0 };
        assert_eq!(unsafe { hd_sum(p, x, &mut s) }, HdStatus::Ok);
        let want = direct_sum(x, &core);
        assert_eq!((s.sign, s.log_abs), (want.sign() as i32, want.logmag()));
    }
    let mut e = HdSignedLog { sign: 0, log_abs: 0.0 };
    assert_eq!(unsafe { hd_envelope(p, 20.0, &mut e) }, HdStatus::Ok);
    assert_eq!(e.log_abs, envelope(20.0, &core).unwrap().logmag());
    assert_eq!(unsafe { hd_envelope(p, -1.0, &mut e) }, HdStatus::Domain);

    // Head plus certified tail brackets the full sum; index 0 is not part of it.
    let (mut head, mut tail, mut full) = ([HdSignedLog { sign: 0, log_abs: 0.0 }; 3]).into();
    unsafe {
        assert_eq!(hd_sum_range(p, 10.0, 0, 30, &mut head), HdStatus::Ok);
        assert_eq!(hd_tail_bound(p, 31, 10.0, &mut tail), HdStatus::Ok);
        assert_eq!(hd_sum(p, 10.0, &mut full), HdStatus::Ok);
    }
    let (h, t, f) = (head.log_abs.exp(), tail.log_abs.exp(), full.log_abs.exp());
    assert!(f >= h * (1.0 - 1e-14) && f - h <= t * (1.0 + 1e-12), "{h} {t} {f}");
    unsafe { hd_sum_params_free(p) };
}

#[test]
fn nmax_and_sharpness() {
    let mut r = HdNmax {
        n_max: 0.0,
        n_max_asymptotic: 0.0,
        a_max: 0.0,
        peak_deviation: 0.0,
        lambda: 0.0,
        phi_max: 0.0,
        truncation_n: 0,
        iterations: 0,
    };
    assert_eq!(unsafe { hd_find_nmax(40.0, 1.0, &mut r) }, HdStatus::Ok);
    let core = find_nmax(40.0, 1.0).unwrap();
    assert_eq!(r.n_max, core.n_max);
    assert_eq!(r.peak_deviation, core.peak_deviation());

    let p = params(1.0, 0.25, 1.0);
    let grid: Vec<f64> = (0..6).map(|i| 15.0 + 5.0 * i as f64).collect();
    let mut cert = ptr::null_mut();
    assert_eq!(
        unsafe { hd_sharpness_new(p, grid.as_ptr(), grid.len(), &mut cert) },
        HdStatus::Ok
    );
    let mut s = HdSharpnessSummary {
        ratio_min: 0.0,
        ratio_max: 0.0,
        slope: 0.0,
        window_ratio_min: 0.0,
        points: 0,
    };
    assert_eq!(unsafe { hd_sharpness_summary(cert, &mut s) }, HdStatus::Ok);
    assert_eq!(s.points, 6);
    assert_eq!(unsafe { hd_sharpness_ratios(cert, ptr::null_mut(), 0) }, 6);
    let mut ratios = [0.0; 4];
    assert_eq!(unsafe { hd_sharpness_ratios(cert, ratios.as_mut_ptr(), 4) }, 6);
    assert!(ratios.iter().all(|r| *r >= s.ratio_min && *r <= s.ratio_max));
    assert!(s.ratio_min > 0.1 && s.ratio_max < 10.0);
    unsafe {
        hd_sharpness_free(cert);
        hd_sum_params_free(p);
    }

    let p = params(1.0, 0.25, 1.0);
    let mut cert = ptr::null_mut();
    assert_eq!(
        unsafe { hd_sharpness_new(p, grid.as_ptr(), 1, &mut cert) },
        HdStatus::InvalidParams
    );
    assert!(cert.is_null());
    unsafe { hd_sum_params_free(p) };
}

#[test]
fn coefficients_round_trip() {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { hd_coefficients_gaussian(0.5, 60, &mut c) }, HdStatus::Ok);
    assert_eq!(unsafe { hd_coefficients_len(c) }, 60);
    let core = TestFunction::hardy_gaussian(0.5).expand(60).unwrap();
    let mut c4 = 0.0;
    assert_eq!(unsafe { hd_coefficients_get(c, 4, &mut c4) }, HdStatus::Ok);
    assert_eq!(c4, core.coeffs()[4]);
    assert_eq!(unsafe { hd_coefficients_get(c, 60, &mut c4) }, HdStatus::OutOfRange);
    let mut qe = vec![0.0; 60];
    assert_eq!(unsafe { hd_coefficients_quad_error(c, qe.as_mut_ptr(), qe.len()) }, 60);
    assert_eq!(qe, core.quad_error());

    let mut v = HdVemuri {
        constant: 0.0,
        retained: 0,
        refused: 0,
    };
    assert_eq!(unsafe { hd_vemuri_check(c, 0.5, &mut v) }, HdStatus::Ok);
    // The bound at n = 0 alone forces C >= |c_0|.
    assert!(v.constant.is_finite() && v.constant >= core.coeffs()[0].abs() && v.retained > 10);

    let mut certified = ptr::null_mut();
    assert_eq!(unsafe { hd_coefficients_certify(c, 0.5, &mut certified) }, HdStatus::Ok);
    assert_eq!(unsafe { hd_coefficients_len(certified) } as u64, v.retained);

    // Phi at t = 0 is f itself.
    let mut e = HdEvolution {
        re: 0.0,
        im: 0.0,
        log_scale: 0.0,
        log_abs: 0.0,
        tail_radius: 0.0,
    };
    assert_eq!(unsafe { hd_evolve(certified, 0.3, 0.0, &mut e) }, HdStatus::Ok);
    let f = TestFunction::hardy_gaussian(0.5).eval(0.3);
    let got = e.re * e.log_scale.exp();
    assert!((got - f).abs() <= e.tail_radius + 1e-9, "{got} vs {f}");
    assert!((e.im * e.log_scale.exp()).abs() <= e.tail_radius + 1e-9);
    assert!(e.tail_radius.is_finite());
    unsafe {
        hd_coefficients_free(certified);
        hd_coefficients_free(c);
    }
}

#[test]
fn coefficients_from_array() {
    let mut c = ptr::null_mut();
    let unit = [1.0];
    assert_eq!(
        unsafe { hd_coefficients_from_array(unit.as_ptr(), 1, &mut c) },
        HdStatus::Ok
    );
    let mut v = HdVemuri {
        constant: 0.0,
        retained: 0,
        refused: 0,
    };
    assert_eq!(unsafe { hd_vemuri_check(c, 1.0, &mut v) }, HdStatus::Ok);
    assert!((v.constant - 1.0).abs() < 1e-15);
    // Evolution only rotates e_0, and e_0(0) = 2^{1/4}.
    let mut e = HdEvolution {
        re: 0.0,
        im: 0.0,
        log_scale: 0.0,
        log_abs: 0.0,
        tail_radius: 0.0,
    };
    assert_eq!(unsafe { hd_evolve(c, 0.0, 0.125, &mut e) }, HdStatus::Ok);
    assert!((e.log_abs - 0.25 * std::f64::consts::LN_2).abs() < 1e-14);
    assert_eq!(e.tail_radius, 0.0);
    unsafe { hd_coefficients_free(c) };

    let bad = [1.0, f64::INFINITY];
    assert_eq!(
        unsafe { hd_coefficients_from_array(bad.as_ptr(), 2, &mut c) },
        HdStatus::Domain
    );
    assert_eq!(
        unsafe { hd_coefficients_from_array(ptr::null(), 3, &mut c) },
        HdStatus::NullPointer
    );
    assert!(last_error().contains("coeffs"));
}

#[test]
fn errors_are_thread_local() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { hd_sum_params_new(f64::NAN, 0.25, 1.0, &mut p) },
        HdStatus::InvalidParams
    );
    std::thread::spawn(|| assert!(hd_last_error().is_null()))
        .join()
        .unwrap();
    assert!(last_error().contains("kappa"));
}
