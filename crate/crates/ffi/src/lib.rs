//! C ABI for the non-coherent Rayleigh MIMO capacity library.
//!
//! Every function returns an [`NcStatus`] code; results come back through
//! out-pointers. Discrete inputs are passed around as opaque handles that
//! must be released with [`nc_input_free`].

use std::os::raw::c_double;

use ncmimo::channel::{AntennaConfig, DiscreteInput};
use ncmimo::discrete::{kt_check, optimize_discrete_input, OptimizerOptions};
use ncmimo::error::Error;
use ncmimo::numerics::QuadratureSpec;
use ncmimo::{asymptotics, channel, reference, supremum};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    DomainError = 1,
    NoConvergence = 2,
    NoSolution = 3,
    InvalidInput = 4,
    NullPointer = 5,
    InternalError = 6,
}

fn status_of(err: &Error) -> NcStatus {
    match err {
        Error::Domain(_) => NcStatus::DomainError,
        Error::NoConvergence { .. } | Error::NonFinite { .. } => NcStatus::NoConvergence,
        Error::NoSolution(_) => NcStatus::NoSolution,
        Error::BracketInvalid { .. } | Error::InvalidInput(_) => NcStatus::InvalidInput,
        _ => NcStatus::InternalError,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn nc_status_message(status: NcStatus) -> *const u8 {
    let msg: &'static [u8] = match status {
        NcStatus::Ok => b"ok\0",
        NcStatus::DomainError => b"argument outside the function domain\0",
        NcStatus::NoConvergence => b"solver failed to converge\0",
        NcStatus::NoSolution => b"no solution exists for these parameters\0",
        NcStatus::InvalidInput => b"invalid input\0",
        NcStatus::NullPointer => b"null pointer argument\0",
        NcStatus::InternalError => b"internal error\0",
    };
    msg.as_ptr()
}

macro_rules! write_out {
    ($ptr:expr, $value:expr) => {{
        if $ptr.is_null() {
            return NcStatus::NullPointer;
        }
        unsafe { *$ptr = $value };
    }};
}

/// ζ_s solving Ψ(ζ) − ln ζ = Ψ(n_r) − ln(n_r(1+P)).
#[no_mangle]
pub extern "C" fn nc_solve_zeta_s(n_r: u32, p: c_double, out: *mut c_double) -> NcStatus {
    match supremum::solve_zeta_s(n_r, p) {
        Ok(v) => {
            write_out!(out, v);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Capacity supremum C_sup = G(ζ_s) − G(n_r) in nats.
#[no_mangle]
pub extern "C" fn nc_capacity_supremum(n_r: u32, p: c_double, out: *mut c_double) -> NcStatus {
    match supremum::capacity_supremum(n_r, p) {
        Ok(r) => {
            write_out!(out, r.nats);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// β>0 branch capacity; `NC_STATUS_NO_SOLUTION` where the branch is empty.
#[no_mangle]
pub extern "C" fn nc_capacity_beta_positive(
    n_r: u32,
    p: c_double,
    out_nats: *mut c_double,
    out_alpha: *mut c_double,
) -> NcStatus {
    match supremum::capacity_beta_positive(n_r, p) {
        Ok(r) => {
            write_out!(out_nats, r.nats);
            write_out!(out_alpha, r.zeta_or_alpha);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// High-SNR approximation ln(ln(n_r(1+P))).
#[no_mangle]
pub extern "C" fn nc_asymptotic_capacity(n_r: u32, p: c_double, out: *mut c_double) -> NcStatus {
    match asymptotics::asymptotic_capacity(n_r, p) {
        Ok(v) => {
            write_out!(out, v);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Double-log reference curve ln(1 + ln(1 + SNR)).
#[no_mangle]
pub extern "C" fn nc_double_log_reference(snr: c_double, out: *mut c_double) -> NcStatus {
    match asymptotics::double_log_reference(snr) {
        Ok(v) => {
            write_out!(out, v);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Coherent (receiver-CSI) Monte Carlo capacity estimate.
#[no_mangle]
pub extern "C" fn nc_coherent_capacity_mc(
    n_r: u32,
    n_t: u32,
    p: c_double,
    samples: u64,
    seed: u64,
    out_mean: *mut c_double,
    out_stderr: *mut c_double,
) -> NcStatus {
    let config = match AntennaConfig::new(n_r, n_t) {
        Ok(c) => c,
        Err(e) => return status_of(&e),
    };
    match reference::coherent_capacity_mc(config, p, samples, seed) {
        Ok(est) => {
            write_out!(out_mean, est.mean);
            write_out!(out_stderr, est.stderr);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Sengupta-Mitra large-n_r capacity.
#[no_mangle]
pub extern "C" fn nc_sengupta_capacity(
    n_r: u32,
    n_t: u32,
    p: c_double,
    out: *mut c_double,
) -> NcStatus {
    let config = match AntennaConfig::new(n_r, n_t) {
        Ok(c) => c,
        Err(e) => return status_of(&e),
    };
    match reference::sengupta_capacity(config, p) {
        Ok(r) => {
            write_out!(out, r.nats);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Opaque discrete input handle.
pub struct NcInput {
    inner: DiscreteInput,
}

/// Build a discrete input from parallel magnitude/probability arrays.
/// The handle must be released with `nc_input_free`.
#[no_mangle]
pub extern "C" fn nc_input_new(
    magnitudes: *const c_double,
    probabilities: *const c_double,
    len: usize,
    out: *mut *mut NcInput,
) -> NcStatus {
    if magnitudes.is_null() || probabilities.is_null() || out.is_null() {
        return NcStatus::NullPointer;
    }
    let xs = unsafe { std::slice::from_raw_parts(magnitudes, len) };
    let ps = unsafe { std::slice::from_raw_parts(probabilities, len) };
    let points: Vec<(f64, f64)> = xs.iter().copied().zip(ps.iter().copied()).collect();
    match DiscreteInput::new(points) {
        Ok(inner) => {
            let handle = Box::into_raw(Box::new(NcInput { inner }));
            unsafe { *out = handle };
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a discrete input handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn nc_input_free(input: *mut NcInput) {
    if !input.is_null() {
        drop(unsafe { Box::from_raw(input) });
    }
}

/// Number of mass points in the handle.
#[no_mangle]
pub extern "C" fn nc_input_len(input: *const NcInput, out: *mut usize) -> NcStatus {
    if input.is_null() {
        return NcStatus::NullPointer;
    }
    let len = unsafe { &*input }.inner.points().len();
    write_out!(out, len);
    NcStatus::Ok
}

/// Copy the mass points into caller-provided arrays of length `len`.
#[no_mangle]
pub extern "C" fn nc_input_points(
    input: *const NcInput,
    magnitudes: *mut c_double,
    probabilities: *mut c_double,
    len: usize,
) -> NcStatus {
    if input.is_null() || magnitudes.is_null() || probabilities.is_null() {
        return NcStatus::NullPointer;
    }
    let points = unsafe { &*input }.inner.points();
    if len < points.len() {
        return NcStatus::InvalidInput;
    }
    for (i, &(x, p)) in points.iter().enumerate() {
        unsafe {
            *magnitudes.add(i) = x;
            *probabilities.add(i) = p;
        }
    }
    NcStatus::Ok
}

/// Mutual information of a discrete input through the magnitude channel.
#[no_mangle]
pub extern "C" fn nc_mutual_information(
    input: *const NcInput,
    n_r: u32,
    out: *mut c_double,
) -> NcStatus {
    if input.is_null() {
        return NcStatus::NullPointer;
    }
    let inner = &unsafe { &*input }.inner;
    match channel::mutual_information(inner, n_r, &QuadratureSpec::default()) {
        Ok(v) => {
            write_out!(out, v);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Optimize a discrete input for the given (n_r, P); returns the optimized
/// input as a fresh handle plus the attained capacity.
#[no_mangle]
pub extern "C" fn nc_optimize_discrete_input(
    n_r: u32,
    p: c_double,
    max_points: usize,
    seed: u64,
    out_input: *mut *mut NcInput,
    out_nats: *mut c_double,
) -> NcStatus {
    if out_input.is_null() {
        return NcStatus::NullPointer;
    }
    let opts = OptimizerOptions {
        max_points: max_points.max(2),
        seed,
        ..OptimizerOptions::default()
    };
    match optimize_discrete_input(n_r, p, &opts) {
        Ok((input, result)) => {
            write_out!(out_nats, result.nats);
            let handle = Box::into_raw(Box::new(NcInput { inner: input }));
            unsafe { *out_input = handle };
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Kuhn-Tucker check of a candidate input at the given capacity value.
#[no_mangle]
pub extern "C" fn nc_kt_check(
    input: *const NcInput,
    n_r: u32,
    p: c_double,
    capacity_nats: c_double,
    out_violation: *mut c_double,
    out_multiplier: *mut c_double,
) -> NcStatus {
    if input.is_null() {
        return NcStatus::NullPointer;
    }
    let inner = &unsafe { &*input }.inner;
    match kt_check(inner, n_r, p, capacity_nats) {
        Ok(report) => {
            write_out!(out_violation, report.violation);
            write_out!(out_multiplier, report.power_multiplier);
            NcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
