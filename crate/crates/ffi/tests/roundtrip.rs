use std::ffi::{CStr, CString};
use std::ptr;

use lpiso_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    lpiso_string_free(p);
    s
}

#[test]
fn step_json_roundtrip_and_norm() {
    unsafe {
        let mut f = ptr::null_mut();
        let json = cstr(r#"{"dim":1,"breaks":[0.0,0.25,1.0],"values":[[2.0],[0.0]]}"#);
        assert_eq!(lpiso_step_from_json(json.as_ptr(), &mut f), LpisoStatus::Ok);
        assert_eq!(lpiso_step_num_cells(f), 2);
        let mut n = 0.0;
        assert_eq!(lpiso_step_norm(f, 1.0, 1.0, &mut n), LpisoStatus::Ok);
        assert_eq!(n, 0.5);
        assert_eq!(
            lpiso_step_norm(f, 0.5, 1.0, &mut n),
            LpisoStatus::InvalidInput
        );
        let mut s = ptr::null_mut();
        assert_eq!(lpiso_step_to_json(f, &mut s), LpisoStatus::Ok);
        assert_eq!(
            take_string(s),
            r#"{"dim":1,"breaks":[0.0,0.25,1.0],"values":[[2.0],[0.0]]}"#
        );
        lpiso_step_free(f);
    }
}

#[test]
fn errors_carry_messages() {
    unsafe {
        let mut f = ptr::null_mut();
        let breaks = [0.0, 0.7, 0.5, 1.0];
        let values = [1.0, 2.0, 3.0];
        let status = lpiso_step_new(1, breaks.as_ptr(), 4, values.as_ptr(), &mut f);
        assert_eq!(status, LpisoStatus::InvalidInput);
        assert!(f.is_null());
        let msg = CStr::from_ptr(lpiso_last_error()).to_str().unwrap();
        assert!(msg.contains("monotone"), "{msg}");
        let status = lpiso_step_new(1, breaks.as_ptr(), 4, ptr::null(), &mut f);
        assert_eq!(status, LpisoStatus::NullPointer);
    }
}

#[test]
fn orbit_operations() {
    unsafe {
        let p = 2.0_f64;
        let c = 2f64.powf(1.0 / p);
        let make = |b: [f64; 3], v: [f64; 2]| {
            let mut h = ptr::null_mut();
            assert_eq!(
                lpiso_step_new(1, b.as_ptr(), 3, v.as_ptr(), &mut h),
                LpisoStatus::Ok
            );
            h
        };
        let f = make([0.0, 0.5, 1.0], [c, 0.0]);
        let g = make([0.0, 0.5, 1.0], [0.0, -c]);
        let one = make([0.0, 0.5, 1.0], [1.0, 1.0]);
        let mut class = LpisoOrbitClass::FullSupport;
        assert_eq!(lpiso_orbit_class(f, p, &mut class), LpisoStatus::Ok);
        assert_eq!(class, LpisoOrbitClass::PartialSupport);

        let mut t = ptr::null_mut();
        assert_eq!(
            lpiso_rearrangement_isometry(f, g, p, &mut t),
            LpisoStatus::Ok
        );
        let mut tf = ptr::null_mut();
        assert_eq!(lpiso_lamperti_apply(t, f, &mut tf), LpisoStatus::Ok);
        let mut v = [0.0];
        assert_eq!(
            lpiso_step_eval(tf, 0.75, v.as_mut_ptr(), 1),
            LpisoStatus::Ok
        );
        assert_eq!(v[0], -c);

        let mut bad = ptr::null_mut();
        assert_eq!(
            lpiso_rearrangement_isometry(f, one, p, &mut bad),
            LpisoStatus::OrbitMismatch
        );

        let mut value = 1.0;
        assert_eq!(
            lpiso_lamperti_functional(f, g, 1.0, 1.0, &mut value),
            LpisoStatus::Ok
        );
        assert_eq!(value, 0.0);

        for h in [f, g, one, tf] {
            lpiso_step_free(h);
        }
        lpiso_lamperti_free(t);
    }
}

#[test]
fn homotopy_endpoints_through_abi() {
    unsafe {
        let op = cstr(r#"{"word":[{"kind":"swap","ids":[0,1]}]}"#);
        let f = cstr(
            r#"{"components":[
                {"id":0,"xspec":{"dim":1,"q":2.0},"f":{"dim":1,"breaks":[0.0,1.0],"values":[[1.0]]}},
                {"id":1,"xspec":{"dim":1,"q":2.0},"f":{"dim":1,"breaks":[0.0,1.0],"values":[[2.0]]}}
            ]}"#,
        );
        let mut t = ptr::null_mut();
        assert_eq!(
            lpiso_sum_isometry_from_json(op.as_ptr(), &mut t),
            LpisoStatus::Ok
        );
        let mut x = ptr::null_mut();
        assert_eq!(lpiso_sum_from_json(f.as_ptr(), &mut x), LpisoStatus::Ok);
        let mut n = 0.0;
        assert_eq!(lpiso_sum_norm(x, 2.0, &mut n), LpisoStatus::Ok);
        assert!((n - 5f64.sqrt()).abs() < 1e-15);

        let mut h0 = ptr::null_mut();
        let mut tx = ptr::null_mut();
        assert_eq!(
            lpiso_homotopy_apply(0.0, t, x, 2.0, &mut h0),
            LpisoStatus::Ok
        );
        assert_eq!(lpiso_sum_isometry_apply(t, x, &mut tx), LpisoStatus::Ok);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        lpiso_sum_to_json(h0, &mut a);
        lpiso_sum_to_json(tx, &mut b);
        assert_eq!(take_string(a), take_string(b));

        let mut h1 = ptr::null_mut();
        assert_eq!(
            lpiso_homotopy_apply(1.5, t, x, 2.0, &mut h1),
            LpisoStatus::InvalidInput
        );

        for h in [x, h0, tx] {
            lpiso_sum_free(h);
        }
        lpiso_sum_isometry_free(t);
    }
}
