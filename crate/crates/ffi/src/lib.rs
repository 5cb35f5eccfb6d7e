//! C ABI over the `moo-rank` optimizer.
//!
//! Problems and results are opaque handles created and released through
//! this interface. Every fallible call returns a [`MooStatus`]; on failure
//! [`moo_last_error_message`] describes what went wrong on the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use moo_rank::algorithms::{run_do_nsga2, run_grid_search, GridParams, HypermutationConfig, RunParams};
use moo_rank::metrics::hypervolume_2d;
use moo_rank::operators::OperatorParams;
use moo_rank::problems::{zdt1_problem, Comparison, DynamicSchedule, ProblemSpec, ValueScale};
use moo_rank::surrogate::{generate_synthetic, load_dataset, ArticleSurrogate, Dataset};
use moo_rank::{Error, Solution};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MooStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EvaluationFailed = 3,
    GridTooLarge = 4,
    DataError = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MooComparison {
    Greater = 0,
    GreaterEq = 1,
    Less = 2,
    LessEq = 3,
    Equal = 4,
}

impl From<MooComparison> for Comparison {
    fn from(op: MooComparison) -> Self {
        match op {
            MooComparison::Greater => Comparison::Greater,
            MooComparison::GreaterEq => Comparison::GreaterEq,
            MooComparison::Less => Comparison::Less,
            MooComparison::LessEq => Comparison::LessEq,
            MooComparison::Equal => Comparison::Equal,
        }
    }
}

/// Parameters of a DO-NSGA-II run. A negative `p_m` selects `1/n`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MooRunParams {
    pub population_size: usize,
    pub generations: usize,
    pub p_c: f64,
    pub eta_c: f64,
    pub p_m: f64,
    pub eta_m: f64,
    pub boosted_p_m: f64,
    pub epoch: usize,
    pub seed: u64,
    pub change_tol: f64,
    pub parallel: bool,
}

/// A constrained multi-objective problem.
pub struct MooProblem {
    spec: ProblemSpec,
}

/// A reported Pareto front with its run trace.
pub struct MooResult {
    front: Vec<Solution>,
    hypervolume_trace: Vec<f64>,
    feasible: bool,
    evaluations: usize,
    n: usize,
    m: usize,
}

struct Failure {
    status: MooStatus,
    message: String,
}

impl Failure {
    fn new(status: MooStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn null(name: &str) -> Self {
        Self::new(MooStatus::NullPointer, format!("`{name}` is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Contract(_) | Error::Config { .. } => MooStatus::InvalidArgument,
            Error::Objective(_) | Error::Evaluation { .. } | Error::NonFiniteConstraint { .. } => {
                MooStatus::EvaluationFailed
            }
            Error::GridTooLarge { .. } => MooStatus::GridTooLarge,
            _ => MooStatus::DataError,
        };
        Self::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MooStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            MooStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(Some(failure.message));
            failure.status
        }
        Err(_) => {
            set_last_error(Some("internal panic".into()));
            MooStatus::Panic
        }
    }
}

unsafe fn slice_in<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_out<'a>(ptr: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn str_in<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::new(MooStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

fn expect_len(name: &str, got: usize, want: usize) -> Result<(), Failure> {
    if got == want {
        Ok(())
    } else {
        Err(Failure::new(
            MooStatus::InvalidArgument,
            format!("`{name}` has length {got}, expected {want}"),
        ))
    }
}

unsafe fn store<T>(out: *mut *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(name));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null after a
/// successful call. The pointer stays valid until the next call into this
/// library on the same thread.
#[no_mangle]
pub extern "C" fn moo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates the ZDT1 benchmark with `n` variables.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_zdt1(n: usize, out: *mut *mut MooProblem) -> MooStatus {
    guard(|| store(out, MooProblem { spec: zdt1_problem(n)? }, "out"))
}

fn article_problem(data: &Dataset, knn_k: usize) -> Result<MooProblem, Failure> {
    let model = ArticleSurrogate::fit(data, knn_k)?;
    Ok(MooProblem { spec: model.problem()? })
}

/// Creates the article problem over a KNN surrogate of `rows` synthetic
/// observations generated from `data_seed`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_synthetic_article(
    data_seed: u64,
    rows: usize,
    knn_k: usize,
    out: *mut *mut MooProblem,
) -> MooStatus {
    guard(|| {
        if rows == 0 {
            return Err(Failure::new(MooStatus::InvalidArgument, "`rows` must be positive"));
        }
        let problem = article_problem(&generate_synthetic(data_seed, &[rows]), knn_k)?;
        store(out, problem, "out")
    })
}

/// Creates the article problem over a KNN surrogate fitted on a dataset CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_from_dataset(
    path: *const c_char,
    knn_k: usize,
    out: *mut *mut MooProblem,
) -> MooStatus {
    guard(|| {
        let path = str_in(path, "path")?;
        let file = File::open(path).map_err(Error::from)?;
        let problem = article_problem(&load_dataset(file, path)?, knn_k)?;
        store(out, problem, "out")
    })
}

/// Adds `objective <op> threshold` as a constraint. With `log10_scale` the
/// threshold is compared against `log10` of the objective's natural units.
///
/// # Safety
/// `problem` must be a live handle and `objective` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_add_threshold(
    problem: *mut MooProblem,
    objective: *const c_char,
    op: MooComparison,
    threshold: f64,
    log10_scale: bool,
) -> MooStatus {
    guard(|| {
        let problem = problem.as_mut().ok_or_else(|| Failure::null("problem"))?;
        let objective = str_in(objective, "objective")?;
        let scale = if log10_scale { ValueScale::Log10 } else { ValueScale::Linear };
        let constraint = problem.spec.threshold_constraint(objective, op.into(), threshold, scale)?;
        let mut constraints = problem.spec.constraints.clone();
        constraints.push(constraint);
        problem.spec = problem.spec.clone().with_constraints(constraints);
        Ok(())
    })
}

/// Number of design variables, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_num_variables(problem: *const MooProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.spec.n())
}

/// Number of objectives, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_num_objectives(problem: *const MooProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.spec.m())
}

/// Evaluates one design. Objectives are written in their natural sense.
///
/// # Safety
/// `design` must point to `n` readable values, `objectives_out` to `m`
/// writable values and `violation_out` to one writable value.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_evaluate(
    problem: *const MooProblem,
    design: *const f64,
    n: usize,
    objectives_out: *mut f64,
    m: usize,
    violation_out: *mut f64,
) -> MooStatus {
    guard(|| {
        let problem = problem.as_ref().ok_or_else(|| Failure::null("problem"))?;
        expect_len("design", n, problem.spec.n())?;
        expect_len("objectives_out", m, problem.spec.m())?;
        let design = slice_in(design, n, "design")?;
        let objectives = slice_out(objectives_out, m, "objectives_out")?;
        let violation = violation_out.as_mut().ok_or_else(|| Failure::null("violation_out"))?;
        let s = problem.spec.evaluate(design.to_vec().into())?;
        objectives.copy_from_slice(&s.raw_objectives);
        *violation = s.violation;
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn moo_problem_free(problem: *mut MooProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Method defaults: K = 500, E = 500, P_c = 0.9, eta_c = 15, P_m = 1/n,
/// eta_m = 1, boosted P_m = 1.0 for 10 generations.
#[no_mangle]
pub extern "C" fn moo_run_params_default() -> MooRunParams {
    MooRunParams {
        population_size: 500,
        generations: 500,
        p_c: 0.9,
        eta_c: 15.0,
        p_m: -1.0,
        eta_m: 1.0,
        boosted_p_m: 1.0,
        epoch: 10,
        seed: 0,
        change_tol: 1e-9,
        parallel: true,
    }
}

fn run_params(params: &MooRunParams, n: usize) -> RunParams {
    RunParams {
        population_size: params.population_size,
        generations: params.generations,
        operators: OperatorParams {
            p_c: params.p_c,
            eta_c: params.eta_c,
            p_m: if params.p_m < 0.0 { 1.0 / n as f64 } else { params.p_m },
            eta_m: params.eta_m,
        },
        hypermutation: HypermutationConfig {
            boosted_p_m: params.boosted_p_m,
            epoch: params.epoch,
        },
        seed: params.seed,
        change_tol: params.change_tol,
        reference: vec![2.0, 2.0],
        trace_scaling: None,
        parallel: params.parallel,
    }
}

/// Runs DO-NSGA-II on a static problem. The hypervolume trace is measured
/// on raw minimization-sense objectives against (2, 2).
///
/// # Safety
/// `problem` must be a live handle, `params` null or valid, and `out` a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn moo_run_nsga2(
    problem: *const MooProblem,
    params: *const MooRunParams,
    out: *mut *mut MooResult,
) -> MooStatus {
    guard(|| {
        let problem = problem.as_ref().ok_or_else(|| Failure::null("problem"))?;
        let params = params.as_ref().copied().unwrap_or_else(|| moo_run_params_default());
        let rp = run_params(&params, problem.spec.n());
        let result = run_do_nsga2(&DynamicSchedule::fixed(problem.spec.clone()), &rp)?;
        let evaluations = params.population_size * (params.generations + 1);
        store(
            out,
            MooResult {
                hypervolume_trace: result.history.iter().map(|r| r.hypervolume).collect(),
                feasible: result.feasible,
                evaluations,
                n: problem.spec.n(),
                m: problem.spec.m(),
                front: result.final_pareto,
            },
            "out",
        )
    })
}

/// Exhaustive grid search with `inc` percent steps over the problem bounds.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer to writable
/// storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn moo_run_grid_search(
    problem: *const MooProblem,
    inc: f64,
    out: *mut *mut MooResult,
) -> MooStatus {
    guard(|| {
        let problem = problem.as_ref().ok_or_else(|| Failure::null("problem"))?;
        let result = run_grid_search(&problem.spec.bounds, &problem.spec, &GridParams::new(inc))?;
        store(
            out,
            MooResult {
                front: result.pareto,
                hypervolume_trace: Vec::new(),
                feasible: result.feasible,
                evaluations: result.evaluations,
                n: problem.spec.n(),
                m: problem.spec.m(),
            },
            "out",
        )
    })
}

/// Number of front members, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_result_front_size(result: *const MooResult) -> usize {
    result.as_ref().map_or(0, |r| r.front.len())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_result_num_variables(result: *const MooResult) -> usize {
    result.as_ref().map_or(0, |r| r.n)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_result_num_objectives(result: *const MooResult) -> usize {
    result.as_ref().map_or(0, |r| r.m)
}

/// False when no feasible solution was found and the front is a
/// best-effort set of infeasible solutions.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_result_feasible(result: *const MooResult) -> bool {
    result.as_ref().is_some_and(|r| r.feasible)
}

/// Objective evaluations performed by the run.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_result_evaluations(result: *const MooResult) -> usize {
    result.as_ref().map_or(0, |r| r.evaluations)
}

/// Copies front member `index`: its design (`n` values), natural-sense
/// objectives (`m` values) and total violation.
///
/// # Safety
/// `result` must be a live handle and the output pointers must address
/// `n`, `m` and one writable values respectively.
#[no_mangle]
pub unsafe extern "C" fn moo_result_solution(
    result: *const MooResult,
    index: usize,
    design_out: *mut f64,
    n: usize,
    objectives_out: *mut f64,
    m: usize,
    violation_out: *mut f64,
) -> MooStatus {
    guard(|| {
        let result = result.as_ref().ok_or_else(|| Failure::null("result"))?;
        let s = result.front.get(index).ok_or_else(|| {
            Failure::new(
                MooStatus::OutOfRange,
                format!("index {index} is outside a front of {}", result.front.len()),
            )
        })?;
        expect_len("design_out", n, result.n)?;
        expect_len("objectives_out", m, result.m)?;
        slice_out(design_out, n, "design_out")?.copy_from_slice(&s.design);
        slice_out(objectives_out, m, "objectives_out")?.copy_from_slice(&s.raw_objectives);
        *violation_out.as_mut().ok_or_else(|| Failure::null("violation_out"))? = s.violation;
        Ok(())
    })
}

/// Length of the per-generation hypervolume trace (0 for grid search).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn moo_result_history_len(result: *const MooResult) -> usize {
    result.as_ref().map_or(0, |r| r.hypervolume_trace.len())
}

/// Copies the hypervolume trace into `out`, which must hold exactly
/// `moo_result_history_len` values.
///
/// # Safety
/// `result` must be a live handle and `out` must address `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn moo_result_history(result: *const MooResult, out: *mut f64, len: usize) -> MooStatus {
    guard(|| {
        let result = result.as_ref().ok_or_else(|| Failure::null("result"))?;
        expect_len("out", len, result.hypervolume_trace.len())?;
        slice_out(out, len, "out")?.copy_from_slice(&result.hypervolume_trace);
        Ok(())
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn moo_result_free(result: *mut MooResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Exact hypervolume of `count` minimization points (row-major pairs)
/// against `(ref_x, ref_y)`.
///
/// # Safety
/// `points` must address `2 * count` readable values and `out` one
/// writable value.
#[no_mangle]
pub unsafe extern "C" fn moo_hypervolume_2d(
    points: *const f64,
    count: usize,
    ref_x: f64,
    ref_y: f64,
    out: *mut f64,
) -> MooStatus {
    guard(|| {
        let len = count
            .checked_mul(2)
            .ok_or_else(|| Failure::new(MooStatus::InvalidArgument, "`count` overflows"))?;
        let flat = slice_in(points, len, "points")?;
        let out = out.as_mut().ok_or_else(|| Failure::null("out"))?;
        let pairs: Vec<&[f64]> = flat.chunks_exact(2).collect();
        *out = hypervolume_2d(&pairs, &[ref_x, ref_y])?.value;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(Failure::from(Error::Contract("x".into())).status, MooStatus::InvalidArgument);
        assert_eq!(Failure::from(Error::EmptyDataset).status, MooStatus::DataError);
        assert_eq!(Failure::from(Error::GridTooLarge { size: 2, cap: 1 }).status, MooStatus::GridTooLarge);
        assert_eq!(Failure::from(Error::Objective("nan".into())).status, MooStatus::EvaluationFailed);
    }

    #[test]
    fn guard_records_and_clears_messages() {
        assert_eq!(guard(|| Err(Failure::null("thing"))), MooStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(moo_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "`thing` is null");
        assert_eq!(guard(|| Ok(())), MooStatus::Ok);
        assert!(moo_last_error_message().is_null());
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), MooStatus::Panic);
    }

    #[test]
    fn default_mutation_is_one_over_n() {
        let rp = run_params(&moo_run_params_default(), 8);
        assert_eq!(rp.operators.p_m, 0.125);
        assert_eq!(rp.population_size, 500);
    }
}
