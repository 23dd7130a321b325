//! High-SNR approximations of the capacity supremum and limiting quantities.

use crate::error::{Error, Result};
use crate::numerics::{find_root_monotone, Bracket};
use crate::specfun::{digamma, AccuracySpec};

const LN_2: f64 = std::f64::consts::LN_2;

/// Approximate and exact values side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticReport {
    pub zeta_approx: f64,
    pub capacity_approx: f64,
    pub exact_capacity: f64,
    pub gap: f64,
}

impl AsymptoticReport {
    pub fn compute(n_r: u32, p: f64) -> Result<Self> {
        let zeta_approx = asymptotic_zeta(n_r, p)?;
        let capacity_approx = asymptotic_capacity(n_r, p)?;
        let exact = crate::supremum::capacity_supremum(n_r, p)?.nats;
        Ok(Self {
            zeta_approx,
            capacity_approx,
            exact_capacity: exact,
            gap: exact - capacity_approx,
        })
    }
}

/// High-SNR shape approximation ζ_s ≈ 1/ln(n_r(1+P)).
pub fn asymptotic_zeta(n_r: u32, p: f64) -> Result<f64> {
    let arg = n_r as f64 * (1.0 + p);
    if arg.ln() <= 0.0 {
        return Err(Error::domain(format!(
            "asymptotic ζ needs ln(n_r(1+P)) > 0, got argument {arg}"
        )));
    }
    Ok(arg.ln().recip())
}

/// High-SNR capacity approximation C_sup ≈ ln(ln(n_r(1+P))).
pub fn asymptotic_capacity(n_r: u32, p: f64) -> Result<f64> {
    let arg = n_r as f64 * (1.0 + p);
    let inner = arg.ln();
    if inner <= 1.0 {
        return Err(Error::domain(format!(
            "asymptotic capacity needs ln(n_r(1+P)) > 1, got {inner}"
        )));
    }
    Ok(inner.ln())
}

/// The fading-number reference curve ln(1 + ln(1 + SNR)).
pub fn double_log_reference(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::domain(format!("SNR must be ≥ 0, got {snr}")));
    }
    Ok((1.0 + (1.0 + snr).ln()).ln())
}

/// α→∞ limit of the β>0 power curve: (1/2n_r)·exp(2(Ψ(n_r)+ln2)) − 1.
pub fn min_power_beta_positive(n_r: u32) -> Result<f64> {
    if n_r < 1 {
        return Err(Error::InvalidInput("n_r must be ≥ 1".into()));
    }
    let n = n_r as f64;
    Ok((2.0 * n).recip() * (2.0 * (digamma(n)? + LN_2)).exp() - 1.0)
}

/// Root of ln ζ − Ψ(ζ) = ln n_r − Ψ(n_r), which is n_r itself; resolved via
/// the generic root finder as a self-test of the zero-power collapse.
pub fn zero_power_zeta(n_r: u32) -> Result<f64> {
    if n_r < 1 {
        return Err(Error::InvalidInput("n_r must be ≥ 1".into()));
    }
    let n = n_r as f64;
    let rhs = n.ln() - digamma(n)?;
    let f = |z: f64| match digamma(z) {
        Ok(psi) => z.ln() - psi - rhs,
        Err(_) => f64::NAN,
    };
    // ln x − Ψ(x) is strictly decreasing, so the root sits in (n/2, 2n+1).
    find_root_monotone(
        f,
        Bracket::new(0.4 * n, 2.0 * n + 1.0)?,
        AccuracySpec::new(1e-12, 1e-12)?,
    )
}
