//! Reference capacities and the vector-channel simulator: coherent Monte
//! Carlo capacity, the Sengupta-Mitra large-n_r formula, and empirical
//! sampling of the output magnitude law.
//!
//! Variance convention: channel and noise entries are circular complex
//! Gaussian with **unit variance per real dimension** (E|h|² = 2). Much of
//! the literature uses unit total variance instead, which shifts the
//! coherent numbers by a factor-2 in SNR.
//!
//! Reproducibility: every sample draws from its own ChaCha stream keyed by
//! (seed, sample index), and the reduction uses pairwise summation, so the
//! result is bit-identical for a fixed seed at any worker count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{AntennaConfig, DiscreteInput};
use crate::error::{Error, Result};
use crate::numerics::{fixed_point_solve, integrate_semi_infinite, QuadratureSpec, DEFAULT_DAMPING};
use crate::specfun::AccuracySpec;
use crate::supremum::{CapacityResult, Method};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// μ and the capacity it produces in the Sengupta-Mitra formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenguptaSolution {
    pub mu: f64,
    pub capacity: f64,
}

fn per_sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Pairwise (cascade) summation; order-independent of how the values were
/// produced, deterministic for a fixed value sequence.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

fn draw_complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Unit variance per real dimension.
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Coherent (receiver-CSI) ergodic capacity E ln det(I + (P/n_t) H H*) by
/// Monte Carlo over channel realizations.
pub fn coherent_capacity_mc(
    config: AntennaConfig,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    if !(p >= 0.0) {
        return Err(Error::InvalidInput(format!("power must be ≥ 0, got {p}")));
    }
    let n_r = config.n_r as usize;
    let n_t = config.n_t as usize;
    let scale = p / config.n_t as f64;

    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = per_sample_rng(seed, i);
            let h = DMatrix::from_fn(n_r, n_t, |_, _| draw_complex_gaussian(&mut rng));
            // I + (P/n_t) H H* is Hermitian positive definite; ln det via
            // its Cholesky factor.
            let mut a = &h * h.adjoint();
            a *= Complex64::new(scale, 0.0);
            for k in 0..n_r {
                a[(k, k)] += Complex64::new(1.0, 0.0);
            }
            let chol = a.cholesky().expect("I + c·HH* is positive definite");
            let l = chol.l();
            2.0 * (0..n_r).map(|k| l[(k, k)].re.ln()).sum::<f64>()
        })
        .collect();

    let mean = pairwise_sum(&values) / samples as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (samples as f64 - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / samples as f64).sqrt(),
        samples,
        seed,
    })
}

/// μ solving μ = ∫₀^∞ (1+y)^{-1} exp(−y/(μ(1+P/n_t))) dy.
pub fn sengupta_mu(n_t: u32, p: f64, accuracy: AccuracySpec) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidInput(format!("Sengupta μ needs P > 0, got {p}")));
    }
    let p_eff = p / n_t as f64;
    let spec = QuadratureSpec::default();
    let map = |mu: f64| {
        if mu <= 0.0 {
            return Err(Error::NonFinite { at: mu });
        }
        integrate_semi_infinite(
            |y| (1.0 + y).recip() * (-y / (mu * (1.0 + p_eff))).exp(),
            &spec,
        )
    };
    fixed_point_solve(map, (1.0 + p_eff).ln().max(0.1), accuracy, 500, DEFAULT_DAMPING)
}

/// Sengupta-Mitra large-n_r capacity
/// ½ln(n_r/2π) + ln μ + P/(μ n_t (1+P/n_t)).
pub fn sengupta_capacity(config: AntennaConfig, p: f64) -> Result<CapacityResult> {
    let mu = sengupta_mu(config.n_t, p, AccuracySpec::new(1e-10, 0.0)?)?;
    let n_r = config.n_r as f64;
    let n_t = config.n_t as f64;
    let nats = 0.5 * (n_r / (2.0 * std::f64::consts::PI)).ln()
        + mu.ln()
        + p / (mu * n_t * (1.0 + p / n_t));
    // Residual of the fixed-point equation at the returned μ.
    let p_eff = p / n_t;
    let rhs = integrate_semi_infinite(
        |y| (1.0 + y).recip() * (-y / (mu * (1.0 + p_eff))).exp(),
        &QuadratureSpec::default(),
    )?;
    Ok(CapacityResult {
        nats,
        method: Method::Sengupta,
        zeta_or_alpha: mu,
        beta: f64::NAN,
        residual: (mu - rhs).abs(),
    })
}

/// Simulate |Y| = |H x + N| for x drawn from a discrete magnitude law placed
/// on a single transmit antenna, T = 1.
pub fn simulate_output_magnitude(
    input: &DiscreteInput,
    n_r: u32,
    n_samples: u64,
    seed: u64,
) -> Vec<f64> {
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = per_sample_rng(seed, i);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut x = input.points().last().unwrap().0;
            for &(xi, pi) in input.points() {
                acc += pi;
                if u < acc {
                    x = xi;
                    break;
                }
            }
            let mut norm_sq = 0.0;
            for _ in 0..n_r {
                let h = draw_complex_gaussian(&mut rng);
                let n = draw_complex_gaussian(&mut rng);
                let y = h * Complex64::new(x, 0.0) + n;
                norm_sq += y.norm_sqr();
            }
            norm_sq.sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::conditional_magnitude_pdf;
    use crate::numerics::integrate_finite;

    fn cfg(n_r: u32, n_t: u32) -> AntennaConfig {
        AntennaConfig::new(n_r, n_t).unwrap()
    }

    #[test]
    fn coherent_zero_power_is_zero() {
        let est = coherent_capacity_mc(cfg(2, 2), 0.0, 1000, 7).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    /// Quadrature oracle: E ln(1+P z) with z exponential of mean 2.
    fn siso_coherent_oracle(p: f64) -> f64 {
        integrate_semi_infinite(
            |z| (1.0 + p * z).ln() * 0.5 * (-z / 2.0).exp(),
            &QuadratureSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn coherent_siso_matches_quadrature() {
        let p = 1.0;
        let oracle = siso_coherent_oracle(p);
        assert!((oracle - 0.9230).abs() < 1e-4, "oracle {oracle}");
        let est = coherent_capacity_mc(cfg(1, 1), p, 100_000, 42).unwrap();
        assert!(
            (est.mean - oracle).abs() < 3.0 * est.stderr,
            "mean {} vs oracle {oracle}, stderr {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn coherent_grows_with_receive_antennas() {
        let a = coherent_capacity_mc(cfg(1, 1), 1.0, 20_000, 3).unwrap();
        let b = coherent_capacity_mc(cfg(2, 1), 1.0, 20_000, 3).unwrap();
        assert!(b.mean - a.mean > 3.0 * (a.stderr + b.stderr));
    }

    #[test]
    fn coherent_seed_determinism() {
        let a = coherent_capacity_mc(cfg(2, 2), 3.0, 5_000, 11).unwrap();
        let b = coherent_capacity_mc(cfg(2, 2), 3.0, 5_000, 11).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn sengupta_mu_large_power() {
        let mu = sengupta_mu(1, 1e6, AccuracySpec::new(1e-10, 0.0).unwrap()).unwrap();
        // μ solves μ = e^{1/s}E₁(1/s) with s = μ(1+P), which for large P is
        // ln(μ(1+P)) − γ; the relative gap to the leading term ln(1+P)
        // decays only logarithmically, so compare self-consistently.
        let self_consistent = (mu * (1.0 + 1e6)).ln() - crate::specfun::EULER_GAMMA;
        assert!((mu - self_consistent).abs() / mu < 1e-3, "μ = {mu}");
        let leading = (1.0 + 1e6f64).ln();
        assert!(mu > leading && mu / leading < 1.35, "μ = {mu}");
    }

    #[test]
    fn sengupta_mu_small_power_residual() {
        let mu = sengupta_mu(1, 1.0, AccuracySpec::new(1e-10, 0.0).unwrap()).unwrap();
        let rhs = integrate_semi_infinite(
            |y| (1.0 + y).recip() * (-y / (mu * 2.0)).exp(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((mu - rhs).abs() < 1e-8);

        // Independent oracle: bisection on μ − F(μ).
        let g = |m: f64| {
            m - integrate_semi_infinite(
                |y| (1.0 + y).recip() * (-y / (m * 2.0)).exp(),
                &QuadratureSpec::default(),
            )
            .unwrap()
        };
        let (mut lo, mut hi) = (0.01, 5.0);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if g(m).signum() == g(lo).signum() {
                lo = m;
            } else {
                hi = m;
            }
        }
        assert!((mu - 0.5 * (lo + hi)).abs() < 1e-7);
    }

    #[test]
    fn sengupta_mu_scaling_in_nt() {
        let tol = AccuracySpec::new(1e-11, 0.0).unwrap();
        let a = sengupta_mu(2, 10.0, tol).unwrap();
        let b = sengupta_mu(1, 5.0, tol).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn sengupta_capacity_behaviour() {
        let v = sengupta_capacity(cfg(10, 1), 1e4).unwrap();
        assert!(v.nats.is_finite() && v.nats > 0.0);
        assert!(v.residual < 1e-8);
        let v50 = sengupta_capacity(cfg(50, 1), 1e4).unwrap();
        assert!(v50.nats > v.nats);
    }

    #[test]
    fn sengupta_gap_shrinks_with_power() {
        let gap = |db: f64| {
            let p = 10f64.powf(db / 10.0);
            let sup = crate::supremum::capacity_supremum(10, p).unwrap().nats;
            let sm = sengupta_capacity(cfg(10, 1), p).unwrap().nats;
            (sup - sm).abs()
        };
        assert!(gap(60.0) < gap(20.0));
    }

    #[test]
    fn simulated_second_moment() {
        let input = DiscreteInput::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap();
        let n_r = 2u32;
        let samples = simulate_output_magnitude(&input, n_r, 100_000, 99);
        let mean_sq: f64 = samples.iter().map(|y| y * y).sum::<f64>() / samples.len() as f64;
        let expected = 2.0 * n_r as f64 * (1.0 + input.average_power());
        let var: f64 = samples
            .iter()
            .map(|y| (y * y - mean_sq).powi(2))
            .sum::<f64>()
            / samples.len() as f64;
        let se = (var / samples.len() as f64).sqrt();
        assert!(
            (mean_sq - expected).abs() < 3.0 * se,
            "E[y²] = {mean_sq} vs {expected} (se {se})"
        );
    }

    /// Mixture CDF for n_r = 1: each component is Rayleigh with scale 1+x².
    fn mixture_cdf(y: f64, input: &DiscreteInput) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        input
            .points()
            .iter()
            .map(|&(x, p)| p * (1.0 - (-y * y / (2.0 * (1.0 + x * x))).exp()))
            .sum()
    }

    #[test]
    fn mixture_cdf_matches_quadrature() {
        let input = DiscreteInput::new(vec![(0.0, 0.5), (3.0, 0.5)]).unwrap();
        for &y in &[0.7, 2.0, 5.5] {
            let by_quadrature = integrate_finite(
                |t| {
                    input
                        .points()
                        .iter()
                        .map(|&(x, p)| p * conditional_magnitude_pdf(t, x, 1).unwrap())
                        .sum()
                },
                0.0,
                y,
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert!((mixture_cdf(y, &input) - by_quadrature).abs() < 1e-9);
        }
    }

    fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        samples
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let f = cdf(y);
                let d1 = ((i + 1) as f64 / n - f).abs();
                let d2 = (f - i as f64 / n).abs();
                d1.max(d2)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn simulated_noise_only_is_rayleigh() {
        let input = DiscreteInput::delta(0.0).unwrap();
        let mut samples = simulate_output_magnitude(&input, 1, 100_000, 5);
        let ks = ks_statistic(&mut samples, |y| 1.0 - (-y * y / 2.0).exp());
        // 1% critical value ≈ 1.63 / √n
        let critical = 1.63 / (samples.len() as f64).sqrt();
        assert!(ks < critical, "KS = {ks}, critical {critical}");
    }

    #[test]
    fn simulated_two_point_matches_mixture() {
        let input = DiscreteInput::new(vec![(0.0, 0.5), (3.0, 0.5)]).unwrap();
        let mut samples = simulate_output_magnitude(&input, 1, 100_000, 6);
        let ks = ks_statistic(&mut samples, |y| mixture_cdf(y, &input));
        let critical = 1.63 / (samples.len() as f64).sqrt();
        assert!(ks < critical, "KS = {ks}, critical {critical}");
    }

    #[test]
    fn simulation_deterministic_per_seed() {
        let input = DiscreteInput::delta(1.0).unwrap();
        let a = simulate_output_magnitude(&input, 2, 2_000, 123);
        let b = simulate_output_magnitude(&input, 2, 2_000, 123);
        assert_eq!(a, b);
    }
}
