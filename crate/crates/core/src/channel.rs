//! Scalar magnitude channel for non-coherent Rayleigh fading: conditional
//! density, entropies, mixture output law, mutual information, and the
//! log-moment identity used as an optimisation constraint.
//!
//! All densities are evaluated in log space; Γ(n_r) and (1+x²)^{n_r}
//! overflow in direct form once n_r grows past a few hundred.

use crate::error::{Error, Result};
use crate::numerics::{integrate_finite, integrate_from, QuadratureSpec};
use crate::specfun::{digamma, log_gamma};

const LN_2: f64 = std::f64::consts::LN_2;

/// Receive/transmit antenna counts. Only `n_r` enters the supremum branch;
/// `n_t` is carried for the reference formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntennaConfig {
    pub n_r: u32,
    pub n_t: u32,
}

impl AntennaConfig {
    pub fn new(n_r: u32, n_t: u32) -> Result<Self> {
        if n_r < 1 || n_t < 1 {
            return Err(Error::InvalidInput(format!(
                "antenna counts must be ≥ 1, got n_r={n_r}, n_t={n_t}"
            )));
        }
        Ok(Self { n_r, n_t })
    }
}

/// Average input power constraint P, with the dB convention
/// SNR_dB = 10·log10(P).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    p_linear: f64,
}

impl PowerBudget {
    pub fn from_linear(p_linear: f64) -> Result<Self> {
        if !p_linear.is_finite() || p_linear < 0.0 {
            return Err(Error::InvalidInput(format!(
                "power must be finite and ≥ 0, got {p_linear}"
            )));
        }
        Ok(Self { p_linear })
    }

    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::from_linear(10f64.powf(snr_db / 10.0))
    }

    pub fn linear(&self) -> f64 {
        self.p_linear
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.p_linear.log10()
    }
}

/// Finite set of input-magnitude mass points with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInput {
    points: Vec<(f64, f64)>,
}

impl DiscreteInput {
    /// Build a validated input; magnitudes must be strictly increasing and
    /// probabilities must sum to 1 within 1e-12.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("input needs at least one mass point".into()));
        }
        let mut total = 0.0;
        for (i, &(x, p)) in points.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidInput(format!("magnitude {x} invalid")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidInput(format!("probability {p} not in (0,1]")));
            }
            if i > 0 && x <= points[i - 1].0 {
                return Err(Error::InvalidInput(
                    "magnitudes must be strictly increasing".into(),
                ));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { points })
    }

    /// Single deterministic magnitude.
    pub fn delta(x: f64) -> Result<Self> {
        Self::new(vec![(x, 1.0)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Average power Σ pᵢ xᵢ².
    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|&(x, p)| p * x * x).sum()
    }
}

/// ln p_{Y|X}(y|x) for the 2n_r-dimensional magnitude law.
pub fn log_conditional_magnitude_pdf(y: f64, x: f64, n_r: u32) -> Result<f64> {
    if y < 0.0 || x < 0.0 || !y.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!(
            "conditional pdf needs y ≥ 0, x ≥ 0, got y={y}, x={x}"
        )));
    }
    let n = n_r as f64;
    let s = 1.0 + x * x;
    if y == 0.0 {
        // y^{2n_r−1} vanishes for every n_r ≥ 1.
        return Ok(f64::NEG_INFINITY);
    }
    Ok((2.0 * n - 1.0) * y.ln() - y * y / (2.0 * s)
        - (n - 1.0) * LN_2
        - log_gamma(n)?
        - n * s.ln())
}

/// p_{Y|X}(y|x), the magnitude conditional density.
pub fn conditional_magnitude_pdf(y: f64, x: f64, n_r: u32) -> Result<f64> {
    Ok(log_conditional_magnitude_pdf(y, x, n_r)?.exp())
}

/// β = E_x{ln(1+x²)}.
pub fn log_moment_beta(input: &DiscreteInput) -> f64 {
    input
        .points()
        .iter()
        .map(|&(x, p)| p * (1.0 + x * x).ln())
        .sum()
}

/// Conditional entropy h(Y|X) in closed form.
pub fn conditional_entropy(input: &DiscreteInput, n_r: u32) -> Result<f64> {
    let n = n_r as f64;
    let beta = log_moment_beta(input);
    Ok(0.5 * beta + log_gamma(n)? - 0.5 * LN_2 - (n - 0.5) * digamma(n)? + n)
}

/// Output density p_Y(y) = Σᵢ pᵢ p_{Y|X}(y|xᵢ).
pub fn output_pdf(y: f64, input: &DiscreteInput, n_r: u32) -> Result<f64> {
    let mut acc = 0.0;
    for &(x, p) in input.points() {
        acc += p * conditional_magnitude_pdf(y, x, n_r)?;
    }
    Ok(acc)
}

/// ln p_Y(y) via log-sum-exp over the mixture components.
pub fn log_output_pdf(y: f64, input: &DiscreteInput, n_r: u32) -> Result<f64> {
    let mut logs = Vec::with_capacity(input.points().len());
    let mut max = f64::NEG_INFINITY;
    for &(x, p) in input.points() {
        let l = log_conditional_magnitude_pdf(y, x, n_r)? + p.ln();
        if l > max {
            max = l;
        }
        logs.push(l);
    }
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Mode of the conditional magnitude law given x: √((2n_r−1)(1+x²)).
fn conditional_mode(x: f64, n_r: u32) -> f64 {
    ((2.0 * n_r as f64 - 1.0) * (1.0 + x * x)).sqrt()
}

/// Integrate `g` weighted against the output mixture over [0, ∞), splitting
/// the domain at the largest mixture mode so the adaptive rule does not have
/// to discover well-separated peaks on its own.
pub fn integrate_against_output<F>(
    input: &DiscreteInput,
    n_r: u32,
    spec: &QuadratureSpec,
    g: F,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let split = input
        .points()
        .iter()
        .map(|&(x, _)| conditional_mode(x, n_r))
        .fold(0.0f64, f64::max);
    let eval = |y: f64| -> f64 {
        match output_pdf(y, input, n_r) {
            Ok(p) => g(y, p),
            Err(_) => f64::NAN,
        }
    };
    let head = integrate_finite(eval, 0.0, split, spec)?;
    let tail = integrate_from(eval, split, spec)?;
    Ok(head + tail)
}

/// Output differential entropy h(Y) = −∫ p_Y ln p_Y by quadrature.
pub fn output_entropy(input: &DiscreteInput, n_r: u32, spec: &QuadratureSpec) -> Result<f64> {
    let v = integrate_against_output(input, n_r, spec, |_, p| {
        if p > 0.0 {
            -p * p.ln()
        } else {
            0.0
        }
    })?;
    Ok(v)
}

/// Mutual information I(X;Y) = h(Y) − h(Y|X) in nats.
pub fn mutual_information(input: &DiscreteInput, n_r: u32, spec: &QuadratureSpec) -> Result<f64> {
    let h_y = output_entropy(input, n_r, spec)?;
    let h_y_given_x = conditional_entropy(input, n_r)?;
    Ok(h_y - h_y_given_x)
}

/// Residual of the output log-moment identity
/// ∫ p_Y(y) ln y dy = ½(β + Ψ(n_r) + ln 2).
pub fn verify_log_output_moment(
    input: &DiscreteInput,
    n_r: u32,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let lhs = integrate_against_output(input, n_r, spec, |y, p| {
        if y > 0.0 {
            p * y.ln()
        } else {
            0.0
        }
    })?;
    let rhs = 0.5 * (log_moment_beta(input) + digamma(n_r as f64)? + LN_2);
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_semi_infinite;
    use crate::specfun::EULER_GAMMA;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn conditional_pdf_anchor() {
        let v = conditional_magnitude_pdf(1.0, 0.0, 1).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn conditional_pdf_normalizes() {
        for &x in &[0.0, 1.0, 3.0] {
            for &n_r in &[1u32, 2, 8] {
                let v = integrate_semi_infinite(
                    |y| conditional_magnitude_pdf(y, x, n_r).unwrap(),
                    &spec(),
                )
                .unwrap();
                assert!((v - 1.0).abs() < 1e-8, "x={x}, n_r={n_r}: ∫ = {v}");
            }
        }
    }

    #[test]
    fn conditional_pdf_second_moment() {
        for &x in &[0.0, 1.0, 3.0] {
            for &n_r in &[1u32, 2, 8] {
                let v = integrate_semi_infinite(
                    |y| y * y * conditional_magnitude_pdf(y, x, n_r).unwrap(),
                    &spec(),
                )
                .unwrap();
                let expected = 2.0 * n_r as f64 * (1.0 + x * x);
                assert!((v - expected).abs() < 1e-7 * expected, "x={x}, n_r={n_r}");
            }
        }
    }

    #[test]
    fn conditional_pdf_large_nr_stays_finite() {
        let v = conditional_magnitude_pdf(25.0, 2.0, 400).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn conditional_pdf_rejects_negative() {
        assert!(conditional_magnitude_pdf(-1.0, 0.0, 1).is_err());
        assert!(conditional_magnitude_pdf(1.0, -2.0, 1).is_err());
    }

    #[test]
    fn conditional_entropy_rayleigh_anchor() {
        // δ at x=0, n_r=1: Rayleigh entropy 1 − ½ln2 + γ/2.
        let input = DiscreteInput::delta(0.0).unwrap();
        let expected = 1.0 - 0.5 * LN_2 + EULER_GAMMA / 2.0;
        let v = conditional_entropy(&input, 1).unwrap();
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_power_shift() {
        let base = conditional_entropy(&DiscreteInput::delta(0.0).unwrap(), 1).unwrap();
        let shifted = conditional_entropy(&DiscreteInput::delta(3f64.sqrt()).unwrap(), 1).unwrap();
        assert!((shifted - base - 0.5 * 4f64.ln()).abs() < 1e-12);
    }

    /// Quadrature oracle for h(Y|X): −E_x ∫ p ln p.
    fn conditional_entropy_oracle(input: &DiscreteInput, n_r: u32) -> f64 {
        input
            .points()
            .iter()
            .map(|&(x, p)| {
                p * integrate_semi_infinite(
                    |y| {
                        let lp = log_conditional_magnitude_pdf(y, x, n_r).unwrap();
                        if lp.is_finite() {
                            -lp.exp() * lp
                        } else {
                            0.0
                        }
                    },
                    &spec(),
                )
                .unwrap()
            })
            .sum()
    }

    #[test]
    fn conditional_entropy_matches_quadrature() {
        let inputs = [
            DiscreteInput::delta(1.5).unwrap(),
            DiscreteInput::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap(),
            DiscreteInput::new(vec![(0.3, 0.2), (1.0, 0.5), (4.0, 0.3)]).unwrap(),
        ];
        for input in &inputs {
            for &n_r in &[1u32, 2, 8] {
                let closed = conditional_entropy(input, n_r).unwrap();
                let oracle = conditional_entropy_oracle(input, n_r);
                assert!(
                    (closed - oracle).abs() < 1e-8,
                    "n_r={n_r}: closed {closed} vs quadrature {oracle}"
                );
            }
        }
    }

    #[test]
    fn output_pdf_mixture_basics() {
        let single = DiscreteInput::delta(1.0).unwrap();
        let y = 1.7;
        assert!(
            (output_pdf(y, &single, 2).unwrap() - conditional_magnitude_pdf(y, 1.0, 2).unwrap())
                .abs()
                < 1e-15
        );
        let two = DiscreteInput::new(vec![(0.0, 0.25), (2.0, 0.75)]).unwrap();
        let v = integrate_against_output(&two, 3, &spec(), |_, p| p).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mutual_information_zero_input() {
        for &n_r in &[1u32, 4] {
            let mi =
                mutual_information(&DiscreteInput::delta(0.0).unwrap(), n_r, &spec()).unwrap();
            assert!(mi.abs() < 1e-9, "n_r={n_r}: {mi}");
        }
    }

    #[test]
    fn mutual_information_two_point_positive() {
        let input = DiscreteInput::new(vec![(0.0, 0.5), (2f64.sqrt(), 0.5)]).unwrap();
        let mi = mutual_information(&input, 1, &spec()).unwrap();
        assert!(mi > 0.0 && mi < 0.4769043, "mi = {mi}");
    }

    #[test]
    fn log_moment_beta_anchors() {
        assert!(log_moment_beta(&DiscreteInput::delta(0.0).unwrap()).abs() < 1e-15);
        let e1 = DiscreteInput::delta((std::f64::consts::E - 1.0).sqrt()).unwrap();
        assert!((log_moment_beta(&e1) - 1.0).abs() < 1e-12);
        let jensen = DiscreteInput::new(vec![
            (0.0, 0.5),
            ((std::f64::consts::E.powi(2) - 1.0).sqrt(), 0.5),
        ])
        .unwrap();
        let beta = log_moment_beta(&jensen);
        assert!((beta - 1.0).abs() < 1e-12);
        assert!(beta <= (1.0 + jensen.average_power()).ln());
    }

    #[test]
    fn log_output_moment_identity() {
        let input = DiscreteInput::delta(0.0).unwrap();
        let lhs = integrate_against_output(&input, 1, &spec(), |y, p| {
            if y > 0.0 {
                p * y.ln()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((lhs - (LN_2 - EULER_GAMMA) / 2.0).abs() < 1e-8);
        assert!(verify_log_output_moment(&input, 1, &spec()).unwrap() < 1e-8);

        let three = DiscreteInput::new(vec![(0.2, 0.3), (1.1, 0.4), (2.7, 0.3)]).unwrap();
        assert!(verify_log_output_moment(&three, 2, &spec()).unwrap() < 1e-7);
        for &n_r in &[1u32, 2, 4, 16] {
            assert!(verify_log_output_moment(&three, n_r, &spec()).unwrap() < 1e-7);
        }
    }

    #[test]
    fn discrete_input_validation() {
        assert!(DiscreteInput::new(vec![]).is_err());
        assert!(DiscreteInput::new(vec![(0.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(DiscreteInput::new(vec![(0.0, 0.5), (1.0, 0.6)]).is_err());
        assert!(DiscreteInput::new(vec![(1.0, 0.5), (0.5, 0.5)]).is_err());
        assert!(DiscreteInput::new(vec![(0.0, 0.4), (1.0, 0.6)]).is_ok());
    }

    #[test]
    fn power_budget_db_mapping() {
        let p = PowerBudget::from_snr_db(10.0).unwrap();
        assert!((p.linear() - 10.0).abs() < 1e-12);
        assert!((p.snr_db() - 10.0).abs() < 1e-12);
        assert!(PowerBudget::from_linear(-1.0).is_err());
    }
}
