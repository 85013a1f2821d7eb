//! C ABI for `ufl-core`.
//!
//! Every fallible entry point returns a [`UflStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and read
//! back with [`ufl_last_error`]. Handles are opaque, owned by the caller and
//! released with the matching `*_free` function. Panics never cross the
//! boundary; they surface as [`UflStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};

use ufl_core::game::{self, FrontierResult, GameGrid};
use ufl_core::instance::{self, Format, UflInstance as Instance};
use ufl_core::relaxation::FractionalSolution;
use ufl_core::{charfn, jms, relaxation, rounding, Error};

pub const UFL_FORMAT_NATIVE: i32 = 0;
pub const UFL_FORMAT_ORLIB: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    /// The LP layer failed or could not certify a result.
    Solver = 5,
    Panic = 6,
}

/// A facility location instance.
pub struct UflInstance(Instance);

/// An optimal solution of the LP relaxation.
pub struct UflFractional(FractionalSolution);

/// The approachability frontier of a discretized game.
pub struct UflFrontier(FrontierResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UflCostSplit {
    pub facility: f64,
    pub connection: f64,
    pub total: f64,
}

/// Monte Carlo summary of the randomized rounding. Standard errors are NaN
/// for a single trial.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UflEstimate {
    pub trials: usize,
    pub facility_mean: f64,
    pub facility_std_error: f64,
    pub split_facility_mean: f64,
    pub split_facility_std_error: f64,
    pub connection_mean: f64,
    pub connection_std_error: f64,
    /// Analytic bound on the expected connection cost for this `gamma`.
    pub connection_bound: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UflFrontierSummary {
    pub beta_star: f64,
    pub phi_star: f64,
    pub witness_mass_at_smallest_q: f64,
    pub witness_max_other_weight: f64,
    /// Number of threshold grid points, the length `ufl_frontier_witness` fills.
    pub grid_len: usize,
}

struct Failure {
    status: UflStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension(_) | Error::InvalidArgument(_) => UflStatus::InvalidArgument,
            Error::Parse { .. } | Error::Json(_) => UflStatus::Parse,
            Error::Io { .. } => UflStatus::Io,
            Error::Solver(_) | Error::Infeasible | Error::Unbounded => UflStatus::Solver,
        };
        Failure { status, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { status: UflStatus::InvalidArgument, message: message.into() }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UflStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UflStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {text}"));
            UflStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure { status: UflStatus::NullPointer, message: format!("{name} is null") })
}

unsafe fn put<T>(p: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure { status: UflStatus::NullPointer, message: format!("{name} is null") });
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    get(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    get(p, name)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ufl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ufl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds an instance from `opening_cost[facilities]` and the row-major
/// `distances[clients * facilities]`.
#[no_mangle]
pub unsafe extern "C" fn ufl_instance_new(
    facilities: usize,
    clients: usize,
    opening_cost: *const f64,
    distances: *const f64,
    out: *mut *mut UflInstance,
) -> UflStatus {
    guard(|| {
        let cells = facilities
            .checked_mul(clients)
            .ok_or_else(|| invalid("instance size overflows"))?;
        let open = slice(opening_cost, facilities, "opening_cost")?.to_vec();
        let flat = slice(distances, cells, "distances")?;
        let rows = if facilities == 0 {
            vec![Vec::new(); clients]
        } else {
            flat.chunks(facilities).map(<[f64]>::to_vec).collect()
        };
        let inst = Instance::new(open, rows)?;
        put(out, "out", boxed(UflInstance(inst)))
    })
}

/// Reads an instance file; `format` is `UFL_FORMAT_NATIVE` or `UFL_FORMAT_ORLIB`.
#[no_mangle]
pub unsafe extern "C" fn ufl_instance_read(path: *const c_char, format: i32, out: *mut *mut UflInstance) -> UflStatus {
    guard(|| {
        get(path, "path")?;
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let format = match format {
            UFL_FORMAT_NATIVE => Format::Native,
            UFL_FORMAT_ORLIB => Format::Orlib,
            other => return Err(invalid(format!("unknown format code {other}"))),
        };
        let inst = instance::read_instance(path, format)?;
        put(out, "out", boxed(UflInstance(inst)))
    })
}

/// Random Euclidean instance, identical to `ufl gen` for the same arguments.
#[no_mangle]
pub unsafe extern "C" fn ufl_instance_generate(
    facilities: usize,
    clients: usize,
    seed: u64,
    out: *mut *mut UflInstance,
) -> UflStatus {
    guard(|| {
        let inst = instance::generate_euclidean(facilities, clients, seed)?;
        put(out, "out", boxed(UflInstance(inst)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn ufl_instance_dimensions(
    inst: *const UflInstance,
    facilities: *mut usize,
    clients: *mut usize,
) -> UflStatus {
    guard(|| {
        let inst = &get(inst, "inst")?.0;
        put(facilities, "facilities", inst.facility_count())?;
        put(clients, "clients", inst.client_count())
    })
}

/// Whether the distances satisfy the triangle inequality within tolerance.
#[no_mangle]
pub unsafe extern "C" fn ufl_instance_is_metric(inst: *const UflInstance, out: *mut bool) -> UflStatus {
    guard(|| {
        let report = instance::validate(&get(inst, "inst")?.0);
        put(out, "out", report.is_valid)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ufl_instance_free(inst: *mut UflInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Solves the LP relaxation. The result keeps its own copy of the instance.
#[no_mangle]
pub unsafe extern "C" fn ufl_relaxation_solve(inst: *const UflInstance, out: *mut *mut UflFractional) -> UflStatus {
    guard(|| {
        let frac = relaxation::solve_relaxation(&get(inst, "inst")?.0)?;
        put(out, "out", boxed(UflFractional(frac)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn ufl_fractional_costs(frac: *const UflFractional, out: *mut UflCostSplit) -> UflStatus {
    guard(|| {
        let frac = &get(frac, "frac")?.0;
        let split = UflCostSplit {
            facility: frac.facility_cost(),
            connection: frac.connection_cost(),
            total: frac.objective(),
        };
        put(out, "out", split)
    })
}

/// Copies the fractional opening values into `out[len]`; `len` must be at
/// least the facility count.
#[no_mangle]
pub unsafe extern "C" fn ufl_fractional_opening(frac: *const UflFractional, out: *mut f64, len: usize) -> UflStatus {
    guard(|| {
        let y = get(frac, "frac")?.0.y();
        if len < y.len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", y.len())));
        }
        slice_mut(out, len, "out")?[..y.len()].copy_from_slice(y);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ufl_fractional_free(frac: *mut UflFractional) {
    if !frac.is_null() {
        drop(Box::from_raw(frac));
    }
}

/// Filters with `gamma`, clusters, and averages `trials` independent
/// roundings. Deterministic in `seed`.
#[no_mangle]
pub unsafe extern "C" fn ufl_round_estimate(
    frac: *const UflFractional,
    gamma: f64,
    trials: usize,
    seed: u64,
    out: *mut UflEstimate,
) -> UflStatus {
    guard(|| {
        let frac = &get(frac, "frac")?.0;
        let fs = rounding::filter(frac, gamma)?;
        let cs = rounding::cluster(&fs)?;
        let est = rounding::estimate_cost(&fs, &cs, trials, seed)?;
        let bound = charfn::bound_lemma20(gamma, &charfn::characteristic_of_instance(frac)?)?;
        let se = |s: &rounding::Statistic| s.std_error.unwrap_or(f64::NAN);
        let summary = UflEstimate {
            trials,
            facility_mean: est.facility_cost.mean,
            facility_std_error: se(&est.facility_cost),
            split_facility_mean: est.split_facility_cost.mean,
            split_facility_std_error: se(&est.split_facility_cost),
            connection_mean: est.connection_cost.mean,
            connection_std_error: se(&est.connection_cost),
            connection_bound: bound,
        };
        put(out, "out", summary)
    })
}

/// Cost of the greedy dual-ascent solution.
#[no_mangle]
pub unsafe extern "C" fn ufl_jms_solve(inst: *const UflInstance, out: *mut UflCostSplit) -> UflStatus {
    guard(|| {
        let sol = jms::jms_solve(&get(inst, "inst")?.0)?;
        let split = UflCostSplit {
            facility: sol.facility_cost,
            connection: sol.connection_cost,
            total: sol.cost(),
        };
        put(out, "out", split)
    })
}

/// Frontier of the game on uniform grids with `k_gamma` rounding parameters
/// in `[1, gamma_max]`, `k_p` thresholds and `k_phi` supporting lines, solved
/// on `jobs` threads (0 runs on one).
#[no_mangle]
pub unsafe extern "C" fn ufl_frontier_compute(
    k_gamma: usize,
    k_p: usize,
    k_phi: usize,
    gamma_max: f64,
    include_jms: bool,
    jobs: usize,
    out: *mut *mut UflFrontier,
) -> UflStatus {
    guard(|| {
        let grid = GameGrid::uniform(k_gamma, k_p, k_phi, gamma_max, include_jms)?;
        let result = game::frontier(&grid, jobs)?;
        put(out, "out", boxed(UflFrontier(result)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn ufl_frontier_summary(fr: *const UflFrontier, out: *mut UflFrontierSummary) -> UflStatus {
    guard(|| {
        let fr = &get(fr, "fr")?.0;
        let w = game::witness_profile(fr);
        let summary = UflFrontierSummary {
            beta_star: fr.beta_star,
            phi_star: fr.phi_star,
            witness_mass_at_smallest_q: w.mass_at_smallest_q,
            witness_max_other_weight: w.max_other_weight,
            grid_len: fr.ps.len(),
        };
        put(out, "out", summary)
    })
}

/// Copies the adversary's threshold grid and its weights at the optimal
/// supporting line into `q[len]` and `weight[len]`, in grid order.
#[no_mangle]
pub unsafe extern "C" fn ufl_frontier_witness(
    fr: *const UflFrontier,
    q: *mut f64,
    weight: *mut f64,
    len: usize,
) -> UflStatus {
    guard(|| {
        let fr = &get(fr, "fr")?.0;
        let n = fr.ps.len();
        if len < n {
            return Err(invalid(format!("buffers hold {len} values, need {n}")));
        }
        slice_mut(q, len, "q")?[..n].copy_from_slice(&fr.ps);
        slice_mut(weight, len, "weight")?[..n].copy_from_slice(&fr.witness.b_mix);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ufl_frontier_free(fr: *mut UflFrontier) {
    if !fr.is_null() {
        drop(Box::from_raw(fr));
    }
}

/// The bifactor hardness curve `1 + 2 e^{-gamma_f}` for `gamma_f >= 1`.
#[no_mangle]
pub unsafe extern "C" fn ufl_hardness_curve(gamma_f: f64, out: *mut f64) -> UflStatus {
    guard(|| put(out, "out", game::hardness_curve(gamma_f)?))
}

