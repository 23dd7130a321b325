//! Lagrange-optimised capacity supremum of the non-coherent magnitude
//! channel: the G-function, the ζ_s solver, the optimal output law, the
//! β>0 branch, and the SISO (Taricco-form) reduction.

use crate::error::{Error, Result};
use crate::numerics::{find_root_monotone, integrate_finite, integrate_from, Bracket, QuadratureSpec};
use crate::specfun::{digamma, log_gamma, AccuracySpec};

const LN_2: f64 = std::f64::consts::LN_2;

/// Which solver produced a capacity value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Supremum,
    BetaPositive,
    Asymptotic,
    Discrete,
    CoherentMc,
    Sengupta,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Supremum => "supremum",
            Method::BetaPositive => "beta_positive",
            Method::Asymptotic => "asymptotic",
            Method::Discrete => "discrete",
            Method::CoherentMc => "coherent_mc",
            Method::Sengupta => "sengupta",
        }
    }
}

/// Capacity value plus solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub nats: f64,
    pub method: Method,
    /// ζ_s for the supremum branch, α for the β>0 branch.
    pub zeta_or_alpha: f64,
    /// The log-moment constraint level E_x{ln(1+x²)} the branch fixes.
    pub beta: f64,
    /// Residual of the defining root/fixed-point equation.
    pub residual: f64,
}

/// Lagrange multiplier triple with the associated shape parameter ζ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub zeta: f64,
}

/// The optimal output magnitude law: a generalized-gamma density with shape
/// ζ, weight y^{2ζ−1}, and exponential rate ζ/(2 n_r (1+P)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalOutputDensity {
    pub zeta: f64,
    pub n_r: u32,
    pub p: f64,
}

impl OptimalOutputDensity {
    pub fn new(zeta: f64, n_r: u32, p: f64) -> Result<Self> {
        if !(zeta > 0.0) {
            return Err(Error::domain(format!("ζ must be > 0, got {zeta}")));
        }
        if !(p >= 0.0) || n_r < 1 {
            return Err(Error::InvalidInput(format!("invalid n_r={n_r} or P={p}")));
        }
        Ok(Self { zeta, n_r, p })
    }

    /// Exponential rate c = ζ / (2 n_r (1+P)).
    fn rate(&self) -> f64 {
        self.zeta / (2.0 * self.n_r as f64 * (1.0 + self.p))
    }

    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        if y < 0.0 || !y.is_finite() {
            return Err(Error::domain(format!("density argument y={y} must be ≥ 0")));
        }
        if y == 0.0 {
            return Ok(if self.zeta < 0.5 {
                f64::INFINITY
            } else if self.zeta == 0.5 {
                (2.0 * self.rate().sqrt() / std::f64::consts::PI.sqrt()).ln()
            } else {
                f64::NEG_INFINITY
            });
        }
        let c = self.rate();
        Ok(LN_2 + self.zeta * c.ln() - log_gamma(self.zeta)? + (2.0 * self.zeta - 1.0) * y.ln()
            - c * y * y)
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.log_pdf(y)?.exp())
    }

    /// Mean square E[Y²] = 2 n_r (1+P).
    pub fn second_moment(&self) -> f64 {
        2.0 * self.n_r as f64 * (1.0 + self.p)
    }

    /// E[ln Y] = ½(Ψ(ζ) − ln c).
    pub fn log_moment(&self) -> Result<f64> {
        Ok(0.5 * (digamma(self.zeta)? - self.rate().ln()))
    }

    /// Differential entropy of the law, in closed form.
    pub fn entropy(&self) -> Result<f64> {
        let z = self.zeta;
        let c = self.rate();
        Ok(log_gamma(z)? - LN_2 - 0.5 * c.ln() - (z - 0.5) * digamma(z)? + z)
    }

    /// Integrate g(y, p_Y(y)) over [0, ∞), splitting at the mode.
    pub fn integrate<F>(&self, spec: &QuadratureSpec, g: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mode = ((2.0 * self.zeta).max(1.0) / (2.0 * self.rate())).sqrt();
        let eval = |y: f64| match self.pdf(y) {
            Ok(p) => g(y, p),
            Err(_) => f64::NAN,
        };
        Ok(integrate_finite(eval, 0.0, mode, spec)? + integrate_from(eval, mode, spec)?)
    }
}

fn check_params(n_r: u32, p: f64) -> Result<()> {
    if n_r < 1 {
        return Err(Error::InvalidInput("n_r must be ≥ 1".into()));
    }
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("P must be finite and ≥ 0, got {p}")));
    }
    Ok(())
}

/// G(τ) = ln Γ(τ) + τ(1 − Ψ(τ)); strictly decreasing in τ.
pub fn g_function(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!("G(τ) needs τ > 0, got {tau}")));
    }
    Ok(log_gamma(tau)? + tau * (1.0 - digamma(tau)?))
}

/// β(ζ) = ln(n_r(1+P)/ζ) + Ψ(ζ) − Ψ(n_r); strictly increasing in ζ.
pub fn beta_of_zeta(zeta: f64, n_r: u32, p: f64) -> Result<f64> {
    check_params(n_r, p)?;
    if !(zeta > 0.0) {
        return Err(Error::domain(format!("ζ must be > 0, got {zeta}")));
    }
    let n = n_r as f64;
    Ok((n * (1.0 + p) / zeta).ln() + digamma(zeta)? - digamma(n)?)
}

/// Unique root ζ_s ∈ (0, n_r] of Ψ(ζ) − ln ζ = Ψ(n_r) − ln(n_r(1+P)).
pub fn solve_zeta_s(n_r: u32, p: f64) -> Result<f64> {
    check_params(n_r, p)?;
    let n = n_r as f64;
    if p == 0.0 {
        return Ok(n);
    }
    let rhs = digamma(n)? - (n * (1.0 + p)).ln();
    let f = |z: f64| -> f64 {
        match digamma(z) {
            Ok(psi) => psi - z.ln() - rhs,
            Err(_) => f64::NAN,
        }
    };
    // ζ_s ≤ n_r since Ψ(ζ)−ln ζ is increasing; shrink the left endpoint
    // geometrically until it straddles the sign change.
    let mut lo = n.min(0.5);
    while f(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NoConvergence {
                iterations: 1000,
                context: "solve_zeta_s bracket search".into(),
            });
        }
    }
    find_root_monotone(
        f,
        Bracket::new(lo, n)?,
        AccuracySpec::new(1e-13, 1e-13)?,
    )
}

/// Capacity supremum C_sup = G(ζ_s) − G(n_r) at β = 0.
pub fn capacity_supremum(n_r: u32, p: f64) -> Result<CapacityResult> {
    let zeta_s = solve_zeta_s(n_r, p)?;
    let n = n_r as f64;
    let nats = g_function(zeta_s)? - g_function(n)?;
    let residual = (digamma(zeta_s)? - zeta_s.ln() - digamma(n)? + (n * (1.0 + p)).ln()).abs();
    Ok(CapacityResult {
        nats,
        method: Method::Supremum,
        zeta_or_alpha: zeta_s,
        beta: 0.0,
        residual,
    })
}

/// Lagrange multipliers at a given ζ: λ₂ = −ζ/(2n_r(1+P)), λ₃ = 2ζ−1, and
/// λ₁ from the normalization constant of the output law.
pub fn lagrange_solution(zeta: f64, n_r: u32, p: f64) -> Result<LagrangeSolution> {
    check_params(n_r, p)?;
    if !(zeta > 0.0) {
        return Err(Error::domain(format!("ζ must be > 0, got {zeta}")));
    }
    let n = n_r as f64;
    let scale = 2.0 * n * (1.0 + p);
    let lambda2 = -zeta / scale;
    let lambda3 = 2.0 * zeta - 1.0;
    // e^{λ₁−1} is the normalizing constant 2 c^ζ / Γ(ζ) with c = ζ/scale.
    let log_const = LN_2 + zeta * (zeta / scale).ln() - log_gamma(zeta)?;
    let lambda1 = 1.0 + log_const;
    Ok(LagrangeSolution {
        lambda1,
        lambda2,
        lambda3,
        zeta,
    })
}

/// Optimal output density value at y.
pub fn optimal_output_density(y: f64, zeta: f64, n_r: u32, p: f64) -> Result<f64> {
    OptimalOutputDensity::new(zeta, n_r, p)?.pdf(y)
}

/// C(ζ) = G(ζ) − G(n_r); strictly decreasing in ζ.
pub fn capacity_of_zeta(zeta: f64, n_r: u32) -> Result<f64> {
    if n_r < 1 {
        return Err(Error::InvalidInput("n_r must be ≥ 1".into()));
    }
    Ok(g_function(zeta)? - g_function(n_r as f64)?)
}

/// Consistency bridge: h(Y) of the optimal law by quadrature minus the
/// closed-form h(Y|X) at β = β(ζ). Must equal `capacity_of_zeta`.
pub fn capacity_via_entropies(
    zeta: f64,
    n_r: u32,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let density = OptimalOutputDensity::new(zeta, n_r, p)?;
    let h_y = density.integrate(spec, |_, q| if q > 0.0 { -q * q.ln() } else { 0.0 })?;
    let beta = beta_of_zeta(zeta, n_r, p)?;
    let n = n_r as f64;
    let h_y_given_x = 0.5 * beta + log_gamma(n)? - 0.5 * LN_2 - (n - 0.5) * digamma(n)? + n;
    Ok(h_y - h_y_given_x)
}

/// Input power attained by the β>0 branch at shape α:
/// P(α) = (α/2n_r)·exp(2(Ψ(n_r)+ln2) − Ψ(α)) − 1. Strictly decreasing in α.
pub fn beta_positive_power(alpha: f64, n_r: u32) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("α must be > 0, got {alpha}")));
    }
    let n = n_r as f64;
    let exponent = 2.0 * (digamma(n)? + LN_2) - digamma(alpha)?;
    Ok(alpha / (2.0 * n) * exponent.exp() - 1.0)
}

/// Capacity on the β = Ψ(n_r)+ln2 branch, when the requested power is
/// attainable; `Error::NoSolution` otherwise (expected for n_r ≥ 2 at
/// small P, where the α→∞ limit of P(α) stays positive).
pub fn capacity_beta_positive(n_r: u32, p: f64) -> Result<CapacityResult> {
    check_params(n_r, p)?;
    let n = n_r as f64;
    let beta = digamma(n)? + LN_2;
    // α→∞ asymptote of P(α).
    let p_asy = (2.0 * n).recip() * (2.0 * beta).exp() - 1.0;
    if p <= p_asy {
        return Err(Error::NoSolution(format!(
            "β>0 branch needs P > {p_asy:.4}, got P = {p}"
        )));
    }
    // Solve in log form, ln(α/2n) + 2(Ψ(n_r)+ln2) − Ψ(α) = ln(1+P), which
    // stays finite for tiny α where P(α) itself overflows.
    let target = (1.0 + p).ln();
    let f = |a: f64| match digamma(a) {
        Ok(psi) => (a / (2.0 * n)).ln() + 2.0 * beta - psi - target,
        Err(_) => f64::NAN,
    };
    // The left side decreases from +∞ (α→0); expand the bracket until it
    // straddles the target.
    let mut lo = 1e-3;
    while f(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NoSolution("β>0 branch bracket search failed".into()));
        }
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoSolution(
                "β>0 branch: no α attains the requested power".into(),
            ));
        }
    }
    let alpha = find_root_monotone(f, Bracket::new(lo, hi)?, AccuracySpec::new(1e-12, 1e-13)?)?;
    let nats = g_function(alpha)? - g_function(n)?;
    Ok(CapacityResult {
        nats,
        method: Method::BetaPositive,
        zeta_or_alpha: alpha,
        beta,
        residual: f(alpha).abs(),
    })
}

/// SISO closed form: C = (ζ_s − γ − 1) + ln Γ(ζ_s) − ζ_s Ψ(ζ_s) and
/// P = ζ_s e^{−γ−Ψ(ζ_s)} − 1. Identically equal to G(ζ_s) − G(1).
pub fn taricco_siso_form(zeta_s: f64) -> Result<(f64, f64)> {
    if !(zeta_s > 0.0) {
        return Err(Error::domain(format!("ζ_s must be > 0, got {zeta_s}")));
    }
    let gamma = crate::specfun::EULER_GAMMA;
    let capacity = (zeta_s - gamma - 1.0) + log_gamma(zeta_s)? - zeta_s * digamma(zeta_s)?;
    let power = zeta_s * (-gamma - digamma(zeta_s)?).exp() - 1.0;
    Ok((capacity, power))
}
