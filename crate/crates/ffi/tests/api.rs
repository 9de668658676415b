use std::ffi::{CStr, CString};
use std::ptr;

use trainrec_ffi::*;

fn last_error() -> String {
    let p = trainrec_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn sample_reconstruct_evaluate() {
    unsafe {
        let mut signal = ptr::null_mut();
        assert_eq!(trainrec_signal_sine(1.0, 2.0, &mut signal), TrainrecStatus::Ok);
        let mut cloud = ptr::null_mut();
        let status = trainrec_cloud_sample(signal, 0.39, 3, 3000, 0.01, TrainrecNoise::Gaussian, 0.0, 5, &mut cloud);
        assert_eq!(status, TrainrecStatus::Ok);
        let (mut n, mut d) = (0, 0);
        assert_eq!(trainrec_cloud_shape(cloud, &mut n, &mut d), TrainrecStatus::Ok);
        assert_eq!((n, d), (3000, 3));

        let mut result = ptr::null_mut();
        assert_eq!(trainrec_reconstruct(cloud, 0.05, ptr::null(), &mut result), TrainrecStatus::Ok);
        assert!(trainrec_last_error().is_null());
        let mut period = 0.0;
        assert_eq!(trainrec_result_period(result, &mut period), TrainrecStatus::Ok);
        assert!((period - 1.0).abs() < 1e-2, "{period}");
        let mut orientation = TrainrecOrientation::Forward;
        assert_eq!(trainrec_result_orientation(result, &mut orientation), TrainrecStatus::Ok);

        let mut estimate = ptr::null_mut();
        assert_eq!(trainrec_result_signal(result, &mut estimate), TrainrecStatus::Ok);
        let mut report = TrainrecErrorReport::default();
        assert_eq!(trainrec_evaluate(signal, estimate, 2048, &mut report), TrainrecStatus::Ok);
        assert!(report.eps_2 < 0.05, "{report:?}");
        assert_eq!(report.eps_t, (period - 1.0).abs());

        let mut json = ptr::null_mut();
        assert_eq!(trainrec_result_to_json(result, &mut json), TrainrecStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap();
        assert!(text.contains("\"period_estimate\""));
        trainrec_string_free(json);

        trainrec_signal_free(estimate);
        trainrec_result_free(result);
        trainrec_cloud_free(cloud);
        trainrec_signal_free(signal);
    }
}

#[test]
fn signal_json_round_trip() {
    unsafe {
        let mut chirp = ptr::null_mut();
        assert_eq!(trainrec_signal_chirp(2.0, &mut chirp), TrainrecStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(trainrec_signal_to_json(chirp, &mut json), TrainrecStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(trainrec_signal_from_json(json, &mut back), TrainrecStatus::Ok);
        let (mut a, mut b, mut period) = (0.0, 0.0, 0.0);
        trainrec_signal_evaluate(chirp, 0.3, &mut a);
        trainrec_signal_evaluate(back, 0.3, &mut b);
        trainrec_signal_period(back, &mut period);
        assert_eq!(a, b);
        assert_eq!(period, 2.0);
        trainrec_string_free(json);
        trainrec_signal_free(back);
        trainrec_signal_free(chirp);
    }
}

#[test]
fn table_signal_and_cloud_from_points() {
    unsafe {
        let samples = [0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0];
        let mut signal = ptr::null_mut();
        assert_eq!(trainrec_signal_table(1.0, samples.as_ptr(), 3, &mut signal), TrainrecStatus::InvalidArgument);
        assert!(last_error().contains('8'));
        assert_eq!(trainrec_signal_table(1.0, samples.as_ptr(), 8, &mut signal), TrainrecStatus::Ok);
        let mut v = 0.0;
        trainrec_signal_evaluate(signal, 0.0625, &mut v);
        assert!((v - 0.5).abs() < 1e-15);
        trainrec_signal_free(signal);

        let coords = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let mut cloud = ptr::null_mut();
        assert_eq!(trainrec_cloud_from_points(coords.as_ptr(), 3, 2, 0.3, &mut cloud), TrainrecStatus::Ok);
        let mut buf = [0.0; 6];
        assert_eq!(trainrec_cloud_coords(cloud, buf.as_mut_ptr(), 6), TrainrecStatus::Ok);
        assert_eq!(buf, coords);
        assert_eq!(trainrec_cloud_coords(cloud, buf.as_mut_ptr(), 5), TrainrecStatus::BufferTooSmall);

        // Three points are far too few for a curve.
        let mut result = ptr::null_mut();
        assert_eq!(trainrec_reconstruct(cloud, 0.1, ptr::null(), &mut result), TrainrecStatus::CurveFailed);
        assert!(result.is_null());
        assert!(last_error().contains("curve stage failed"));
        trainrec_cloud_free(cloud);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut signal = ptr::null_mut();
        assert_eq!(trainrec_signal_sine(-1.0, 1.0, &mut signal), TrainrecStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        let bad = CString::new("{\"type\": \"fourier\"}").unwrap();
        assert_eq!(trainrec_signal_from_json(bad.as_ptr(), &mut signal), TrainrecStatus::Parse);
        assert_eq!(trainrec_signal_from_json(ptr::null(), &mut signal), TrainrecStatus::NullPointer);
        assert_eq!(trainrec_signal_sine(1.0, 1.0, ptr::null_mut()), TrainrecStatus::NullPointer);

        let mut v = 0.0;
        assert_eq!(trainrec_signal_evaluate(ptr::null(), 0.0, &mut v), TrainrecStatus::NullPointer);
        assert_eq!(last_error(), "signal is null");

        let invalid = [0xffu8, 0];
        assert_eq!(
            trainrec_signal_from_json(invalid.as_ptr().cast(), &mut signal),
            TrainrecStatus::InvalidUtf8
        );

        // Freeing NULL is a no-op.
        trainrec_signal_free(ptr::null_mut());
        trainrec_cloud_free(ptr::null_mut());
        trainrec_result_free(ptr::null_mut());
        trainrec_string_free(ptr::null_mut());
    }
}

#[test]
fn options_and_version() {
    let o = trainrec_options_default();
    assert_eq!(o.scan_points, 2048);
    assert_eq!(o.output_resolution, 2048);
    let v = unsafe { CStr::from_ptr(trainrec_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
