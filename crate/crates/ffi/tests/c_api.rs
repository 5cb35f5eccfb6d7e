use std::ffi::{CStr, CString};
use std::ptr;

use moo_rank_ffi::*;

fn last_error() -> String {
    let p = moo_last_error_message();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn zdt1(n: usize) -> *mut MooProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { moo_problem_zdt1(n, &mut p) }, MooStatus::Ok);
    p
}

#[test]
fn zdt1_evaluation() {
    let p = zdt1(3);
    unsafe {
        assert_eq!(moo_problem_num_variables(p), 3);
        assert_eq!(moo_problem_num_objectives(p), 2);
        let x = [0.25, 0.0, 0.0];
        let mut f = [0.0; 2];
        let mut v = -1.0;
        assert_eq!(moo_problem_evaluate(p, x.as_ptr(), 3, f.as_mut_ptr(), 2, &mut v), MooStatus::Ok);
        assert_eq!(f, [0.25, 0.5]);
        assert_eq!(v, 0.0);

        assert_eq!(
            moo_problem_evaluate(p, x.as_ptr(), 2, f.as_mut_ptr(), 2, &mut v),
            MooStatus::InvalidArgument
        );
        assert!(last_error().contains("design"));
        moo_problem_free(p);
    }
}

#[test]
fn nsga2_run_and_accessors() {
    let p = zdt1(5);
    let mut params = moo_run_params_default();
    params.population_size = 24;
    params.generations = 30;
    params.seed = 4;
    params.parallel = false;
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(moo_run_nsga2(p, &params, &mut r), MooStatus::Ok);
        let size = moo_result_front_size(r);
        assert!(size > 0 && size <= 24);
        assert!(moo_result_feasible(r));
        assert_eq!(moo_result_num_variables(r), 5);
        assert_eq!(moo_result_evaluations(r), 24 * 31);

        let mut pts = Vec::new();
        for i in 0..size {
            let mut x = [0.0; 5];
            let mut f = [0.0; 2];
            let mut v = 1.0;
            assert_eq!(moo_result_solution(r, i, x.as_mut_ptr(), 5, f.as_mut_ptr(), 2, &mut v), MooStatus::Ok);
            assert!(x.iter().all(|xi| (0.0..=1.0).contains(xi)));
            assert_eq!(v, 0.0);
            pts.extend_from_slice(&f);
        }
        let mut x = [0.0; 5];
        let mut f = [0.0; 2];
        let mut v = 0.0;
        assert_eq!(
            moo_result_solution(r, size, x.as_mut_ptr(), 5, f.as_mut_ptr(), 2, &mut v),
            MooStatus::OutOfRange
        );

        let len = moo_result_history_len(r);
        assert_eq!(len, 30);
        let mut trace = vec![0.0; len];
        assert_eq!(moo_result_history(r, trace.as_mut_ptr(), len), MooStatus::Ok);
        let mut hv = 0.0;
        assert_eq!(moo_hypervolume_2d(pts.as_ptr(), size, 2.0, 2.0, &mut hv), MooStatus::Ok);
        assert_eq!(hv, trace[len - 1]);

        moo_result_free(r);
        moo_problem_free(p);
    }
}

#[test]
fn grid_search_cardinality() {
    let p = zdt1(3);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(moo_run_grid_search(p, 25.0, &mut r), MooStatus::Ok);
        assert_eq!(moo_result_evaluations(r), 125);
        assert_eq!(moo_result_history_len(r), 0);
        moo_result_free(r);
        assert_eq!(moo_run_grid_search(p, 0.5, &mut r), MooStatus::Ok);
        moo_result_free(r);

        let big = zdt1(30);
        assert_eq!(moo_run_grid_search(big, 10.0, &mut r), MooStatus::GridTooLarge);
        assert!(last_error().contains("exceeds"));
        moo_problem_free(big);
        moo_problem_free(p);
    }
}

#[test]
fn synthetic_article_with_constraint() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(moo_problem_synthetic_article(5, 2000, 5, &mut p), MooStatus::Ok);
        assert_eq!(moo_problem_num_variables(p), 4);
        let clicks = CString::new("clicks").unwrap();
        assert_eq!(
            moo_problem_add_threshold(p, clicks.as_ptr(), MooComparison::Greater, 99.0, true),
            MooStatus::Ok
        );
        let unknown = CString::new("shares").unwrap();
        assert_eq!(
            moo_problem_add_threshold(p, unknown.as_ptr(), MooComparison::Greater, 1.0, true),
            MooStatus::InvalidArgument
        );
        let mut params = moo_run_params_default();
        params.population_size = 16;
        params.generations = 5;
        let mut r = ptr::null_mut();
        assert_eq!(moo_run_nsga2(p, &params, &mut r), MooStatus::Ok);
        assert!(!moo_result_feasible(r));
        assert!(moo_result_front_size(r) > 0);
        moo_result_free(r);
        moo_problem_free(p);
    }
}

#[test]
fn dataset_loading_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    std::fs::write(&path, "freshness,views,likes,comments,clicks\n1,2,3,4,5\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(moo_problem_from_dataset(c.as_ptr(), 3, &mut p), MooStatus::DataError);
        assert!(last_error().contains("dwell_ms"));
        assert_eq!(moo_problem_from_dataset(ptr::null(), 3, &mut p), MooStatus::NullPointer);
    }
}

#[test]
fn null_handles() {
    unsafe {
        assert_eq!(moo_problem_num_variables(ptr::null()), 0);
        assert_eq!(moo_result_front_size(ptr::null()), 0);
        moo_problem_free(ptr::null_mut());
        moo_result_free(ptr::null_mut());
        assert_eq!(moo_problem_zdt1(3, ptr::null_mut()), MooStatus::NullPointer);
        assert_eq!(moo_problem_zdt1(1, &mut ptr::null_mut()), MooStatus::InvalidArgument);
        let mut out = ptr::null_mut();
        assert_eq!(moo_run_nsga2(ptr::null(), ptr::null(), &mut out), MooStatus::NullPointer);
        let pts = [0.0, 1.0, 1.0, 0.0];
        let mut hv = 0.0;
        assert_eq!(moo_hypervolume_2d(pts.as_ptr(), 2, 2.0, 2.0, &mut hv), MooStatus::Ok);
        assert_eq!(hv, 3.0);
    }
}
