//! C ABI over the `fairstrat` solvers.
//!
//! Every function returns an [`FsStatus`]. On failure the message is kept in
//! a thread-local slot readable with [`fs_last_error_message`]. Datasets and
//! trained models are opaque handles created and freed by this library.
//! Array arguments are caller-owned and must hold the documented number of
//! elements.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fairstrat::constrained::{solve_constrained, ConstrainedRunConfig};
use fairstrat::cost::{best_response_linear, L2BudgetCost, ScaledSeparableCost};
use fairstrat::domain::{Agent, Dataset, ExtReal, LinearClassifier, RandomizedClassifier};
use fairstrat::eval::randomized_errors;
use fairstrat::minimax::{solve_minimax, MinimaxRunConfig};
use fairstrat::oracle::OracleConfig;
use fairstrat::separable::{solve_objective_1, SeparableConfig};
use fairstrat::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    EmptyGroup = 4,
    IterationCap = 5,
    GridTooLarge = 6,
    Io = 7,
    Parse = 8,
    Config = 9,
    Panic = 10,
}

/// Opaque dataset handle.
pub struct FsDataset(Dataset);

/// Opaque handle to a randomized halfspace classifier.
pub struct FsModel(RandomizedClassifier<LinearClassifier>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::InvalidInput(_) => FsStatus::InvalidInput,
        Error::DimensionMismatch { .. } => FsStatus::DimensionMismatch,
        Error::EmptyGroup(_) => FsStatus::EmptyGroup,
        Error::IterationCap { .. } => FsStatus::IterationCap,
        Error::GridTooLarge { .. } => FsStatus::GridTooLarge,
        Error::Io { .. } => FsStatus::Io,
        Error::MalformedRows(_) | Error::UnknownCategory { .. } | Error::Csv(_) | Error::Json(_) => FsStatus::Parse,
        Error::Config(_) => FsStatus::Config,
    }
}

struct Failure(FsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FsStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            FsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            FsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn dataset<'a>(p: *const FsDataset) -> Result<&'a Dataset, Failure> {
    p.as_ref().map(|d| &d.0).ok_or_else(|| null("dataset"))
}

unsafe fn budgets(p: *const f64, num_groups: usize) -> Result<L2BudgetCost, Failure> {
    Ok(L2BudgetCost::new(slice(p, num_groups, "budgets")?.to_vec())?)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a dataset from row-major `features` (`n * dim`), `groups` and
/// `labels` (`n` each, labels 0 or 1).
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_dataset_new(
    features: *const f64,
    n: usize,
    dim: usize,
    groups: *const u32,
    labels: *const u8,
    num_groups: usize,
    out: *mut *mut FsDataset,
) -> FsStatus {
    guard(|| {
        let total = n
            .checked_mul(dim)
            .ok_or_else(|| Failure(FsStatus::InvalidInput, "n * dim overflows".into()))?;
        let x = slice(features, total, "features")?;
        let g = slice(groups, n, "groups")?;
        let y = slice(labels, n, "labels")?;
        if dim == 0 {
            return Err(Failure(FsStatus::InvalidInput, "dim must be positive".into()));
        }
        let agents = (0..n)
            .map(|i| Agent::new(x[i * dim..(i + 1) * dim].to_vec(), g[i] as usize, y[i] != 0))
            .collect();
        let data = Dataset::new(agents, num_groups)?;
        write_out(out, Box::into_raw(Box::new(FsDataset(data))), "out")
    })
}

/// # Safety
/// `data` must come from [`fs_dataset_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_dataset_free(data: *mut FsDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of agents and per-group counts (`out_counts` holds `num_groups`).
///
/// # Safety
/// Pointers must be valid; `out_counts` may be null when `num_groups` is 0.
#[no_mangle]
pub unsafe extern "C" fn fs_dataset_shape(
    data: *const FsDataset,
    out_len: *mut usize,
    out_dim: *mut usize,
    out_counts: *mut usize,
    num_groups: usize,
) -> FsStatus {
    guard(|| {
        let d = dataset(data)?;
        if num_groups != 0 && num_groups != d.num_groups() {
            return Err(Error::DimensionMismatch {
                expected: d.num_groups(),
                found: num_groups,
            }
            .into());
        }
        write_out(out_len, d.len(), "out_len")?;
        write_out(out_dim, d.dim(), "out_dim")?;
        slice_mut(out_counts, num_groups, "out_counts")?.copy_from_slice(&d.group_counts()[..num_groups]);
        Ok(())
    })
}

/// Best response of an agent at `x` with budget `tau` to
/// `1[w·x + b >= 0]`. Writes the destination (`dim` values) and the label
/// it receives.
///
/// # Safety
/// `x`, `w` and `out_z` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn fs_best_response(
    x: *const f64,
    w: *const f64,
    dim: usize,
    bias: f64,
    tau: f64,
    out_z: *mut f64,
    out_label: *mut u8,
) -> FsStatus {
    guard(|| {
        let x = slice(x, dim, "x")?;
        let w = slice(w, dim, "w")?;
        let h = LinearClassifier {
            weights: w.to_vec(),
            bias,
        };
        let cost = L2BudgetCost::new(vec![tau])?;
        let (z, label) = best_response_linear(x, fairstrat::GroupId(0), &h, &cost)?;
        slice_mut(out_z, dim, "out_z")?.copy_from_slice(&z);
        write_out(out_label, u8::from(label), "out_label")
    })
}

/// Euclidean projection of `z` onto `{l >= 0, sum l <= bound}`.
///
/// # Safety
/// `z` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fs_project_capped_simplex(z: *const f64, len: usize, bound: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let z = slice(z, len, "z")?;
        let p = fairstrat::constrained::project_capped_simplex(z, bound)?;
        slice_mut(out, len, "out")?.copy_from_slice(p.as_slice());
        Ok(())
    })
}

/// Minimax-fair training by exponential weights. `iterations == 0` uses the
/// derived round count for `gamma`.
///
/// # Safety
/// `budgets` must hold `num_groups` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_solve_minimax(
    data: *const FsDataset,
    budgets_ptr: *const f64,
    num_groups: usize,
    gamma: f64,
    iterations: usize,
    out: *mut *mut FsModel,
) -> FsStatus {
    guard(|| {
        let d = dataset(data)?;
        let cost = budgets(budgets_ptr, num_groups)?;
        let cfg = MinimaxRunConfig {
            iterations: (iterations > 0).then_some(iterations),
            ..MinimaxRunConfig::with_gamma(gamma)
        };
        let run = solve_minimax(d, &cost, &OracleConfig::default(), &cfg)?;
        write_out(out, Box::into_raw(Box::new(FsModel(run.model))), "out")
    })
}

/// Error minimization under a minimax-fairness constraint. Zero
/// `iterations` / `estimate_iterations` use the derived schedules.
///
/// # Safety
/// `budgets` must hold `num_groups` values; `out` and `out_gamma_hat` must
/// be writable (`out_gamma_hat` may be null).
#[no_mangle]
pub unsafe extern "C" fn fs_solve_constrained(
    data: *const FsDataset,
    budgets_ptr: *const f64,
    num_groups: usize,
    gamma: f64,
    epsilon: f64,
    iterations: usize,
    estimate_iterations: usize,
    out: *mut *mut FsModel,
    out_gamma_hat: *mut f64,
) -> FsStatus {
    guard(|| {
        let d = dataset(data)?;
        let cost = budgets(budgets_ptr, num_groups)?;
        let cfg = ConstrainedRunConfig {
            gamma,
            epsilon,
            iterations: (iterations > 0).then_some(iterations),
            estimate_iterations: (estimate_iterations > 0).then_some(estimate_iterations),
            ..Default::default()
        };
        let run = solve_constrained(d, &cost, &OracleConfig::default(), &cfg)?;
        if !out_gamma_hat.is_null() {
            out_gamma_hat.write(run.gamma_hat);
        }
        write_out(out, Box::into_raw(Box::new(FsModel(run.model))), "out")
    })
}

/// # Safety
/// `model` must come from a solver call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free(model: *mut FsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of support classifiers and their dimension.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_model_shape(model: *const FsModel, out_support: *mut usize, out_dim: *mut usize) -> FsStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.0;
        write_out(out_support, m.support().len(), "out_support")?;
        write_out(out_dim, m.support()[0].dim(), "out_dim")
    })
}

/// Support classifier `index`: weights (`dim` values), bias and probability.
///
/// # Safety
/// `out_weights` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn fs_model_component(
    model: *const FsModel,
    index: usize,
    out_weights: *mut f64,
    dim: usize,
    out_bias: *mut f64,
    out_prob: *mut f64,
) -> FsStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let h = m
            .support()
            .get(index)
            .ok_or_else(|| Failure(FsStatus::InvalidInput, format!("component {index} out of range")))?;
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: dim,
            }
            .into());
        }
        slice_mut(out_weights, dim, "out_weights")?.copy_from_slice(&h.weights);
        write_out(out_bias, h.bias, "out_bias")?;
        write_out(out_prob, m.weights()[index], "out_prob")
    })
}

/// Strategic errors of `model` on `data` when group `g` has budget
/// `budgets[g]`. `out_per_group` holds `num_groups` values.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fs_model_errors(
    model: *const FsModel,
    data: *const FsDataset,
    budgets_ptr: *const f64,
    num_groups: usize,
    out_overall: *mut f64,
    out_per_group: *mut f64,
    out_max_group: *mut f64,
) -> FsStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let d = dataset(data)?;
        let cost = budgets(budgets_ptr, num_groups)?;
        let report = randomized_errors(m, d, &cost)?;
        write_out(out_overall, report.overall, "out_overall")?;
        slice_mut(out_per_group, num_groups, "out_per_group")?.copy_from_slice(&report.per_group);
        write_out(out_max_group, report.max_group, "out_max_group")
    })
}

/// Exact minmax thresholds for one-dimensional data under the cost
/// `k_g * max(z - x, 0)`. Thresholds that reject everyone are written as
/// `INFINITY`.
///
/// # Safety
/// `scales` and `out_thresholds` must hold `num_groups` values.
#[no_mangle]
pub unsafe extern "C" fn fs_separable_minmax(
    data: *const FsDataset,
    scales: *const f64,
    num_groups: usize,
    out_thresholds: *mut f64,
    out_minmax: *mut f64,
) -> FsStatus {
    guard(|| {
        let d = dataset(data)?;
        let cost = ScaledSeparableCost::identity(slice(scales, num_groups, "scales")?.to_vec())?;
        let solution = solve_objective_1(d, &cost, &SeparableConfig::default())?;
        let out = slice_mut(out_thresholds, num_groups, "out_thresholds")?;
        if solution.t_hat.thresholds.len() != num_groups {
            return Err(Error::DimensionMismatch {
                expected: solution.t_hat.thresholds.len(),
                found: num_groups,
            }
            .into());
        }
        for (slot, t) in out.iter_mut().zip(&solution.t_hat.thresholds) {
            *slot = match t {
                ExtReal::Finite(v) => *v,
                ExtReal::PosInfinity => f64::INFINITY,
            };
        }
        write_out(out_minmax, solution.minmax_value, "out_minmax")
    })
}
