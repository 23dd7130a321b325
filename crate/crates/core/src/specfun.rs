//! Gamma-family special functions: ln Γ, digamma Ψ, trigamma Ψ₁.
//!
//! Real positive arguments only. Small arguments are shifted up with the
//! recurrence relations until the Bernoulli asymptotic series applies.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Argument threshold above which the asymptotic series is applied directly.
const ASYMPTOTIC_THRESHOLD: f64 = 8.0;

/// Absolute and relative tolerance pair used by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracySpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl AccuracySpec {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0) || !(rel_tol >= 0.0) {
            return Err(Error::InvalidInput(
                "tolerances must be finite and non-negative".into(),
            ));
        }
        if abs_tol == 0.0 && rel_tol == 0.0 {
            return Err(Error::InvalidInput(
                "at least one tolerance must be strictly positive".into(),
            ));
        }
        Ok(Self { abs_tol, rel_tol })
    }
}

impl Default for AccuracySpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

fn check_positive(x: f64, name: &str) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::domain(format!("{name}: non-finite argument {x}")));
    }
    if x <= 0.0 {
        return Err(Error::domain(format!("{name}: argument {x} must be > 0")));
    }
    Ok(())
}

/// B_{2k} / (2k (2k-1)) for the Stirling series of ln Γ, k = 1..8.
const LGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    // Shift into the asymptotic region, accumulating ln of the factors.
    let mut shift = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        shift -= z.ln();
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = 1.0 / z;
    for c in LGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    let half_ln_2pi = 0.918_938_533_204_672_7;
    Ok(shift + (z - 0.5) * z.ln() - z + half_ln_2pi + series)
}

/// B_{2k} / (2k) for the digamma asymptotic series, k = 1..7.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma Ψ(x) for x > 0, via Ψ(x) = Ψ(x+1) − 1/x and the asymptotic series.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    let mut acc = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    Ok(acc + z.ln() - 0.5 / z - series)
}

/// B_{2k} for the trigamma asymptotic series, k = 1..7.
const TRIGAMMA_SERIES: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Trigamma Ψ₁(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive(x, "trigamma")?;
    let mut acc = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv2 * inv;
    for c in TRIGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    Ok(acc + inv + 0.5 * inv2 + series)
}
