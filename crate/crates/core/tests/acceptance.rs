//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`).

use std::time::Instant;

use ncmimo::channel::{mutual_information, DiscreteInput};
use ncmimo::cli::{self, SweepConfig, SweepMethod, Units};
use ncmimo::discrete::{kt_check, optimize_discrete_input, OptimizerOptions};
use ncmimo::numerics::{integrate_semi_infinite, QuadratureSpec};
use ncmimo::reference::{coherent_capacity_mc, sengupta_capacity};
use ncmimo::supremum::{
    capacity_beta_positive, capacity_of_zeta, capacity_supremum, capacity_via_entropies,
    solve_zeta_s, taricco_siso_form,
};
use ncmimo::{AntennaConfig, Error};

fn criterion(number: u32, name: &str, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    match body() {
        Ok(()) => {
            println!(
                "criterion {number:2} ({name}): pass [{:.1}s]",
                start.elapsed().as_secs_f64()
            );
        }
        Err(msg) => {
            println!(
                "criterion {number:2} ({name}): FAIL — {msg} [{:.1}s]",
                start.elapsed().as_secs_f64()
            );
            panic!("criterion {number} ({name}) failed: {msg}");
        }
    }
}

const GRID_NR: [u32; 4] = [1, 2, 4, 16];
const GRID_SNR_DB: [f64; 4] = [-10.0, 0.0, 10.0, 30.0];

fn p_of_db(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Small deterministic generator for random test inputs.
struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random discrete input with average power exactly ≤ budget.
fn random_feasible_input(rng: &mut XorShift, p_budget: f64) -> DiscreteInput {
    loop {
        let n = 2 + (rng.next_f64() * 3.0) as usize;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| rng.next_f64() * 2.0 * (1.0 + p_budget).sqrt())
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let mut ps: Vec<f64> = xs.iter().map(|_| rng.next_f64() + 1e-3).collect();
        let total: f64 = ps.iter().sum();
        for p in &mut ps {
            *p /= total;
        }
        let power: f64 = xs.iter().zip(&ps).map(|(&x, &p)| p * x * x).sum();
        if power > p_budget {
            let scale = (p_budget / power).sqrt() * 0.999;
            for x in &mut xs {
                *x *= scale;
            }
        }
        if let Ok(input) = DiscreteInput::new(xs.into_iter().zip(ps).collect()) {
            return input;
        }
    }
}

#[test]
fn criterion_01_exact_anchors() {
    criterion(1, "exact anchors", || {
        let zeta = solve_zeta_s(1, 1.0).map_err(|e| e.to_string())?;
        if (zeta - 0.5).abs() > 1e-10 {
            return Err(format!("ζ_s(1,1) = {zeta}, expected 0.5"));
        }
        let c = capacity_supremum(1, 1.0).map_err(|e| e.to_string())?.nats;
        if (c - 0.47690).abs() > 1e-4 {
            return Err(format!("C_sup(1,1) = {c}, expected 0.47690"));
        }
        Ok(())
    });
}

#[test]
fn criterion_02_zero_power_collapse() {
    criterion(2, "zero-power collapse", || {
        for n_r in 1..=32u32 {
            let zeta = solve_zeta_s(n_r, 0.0).map_err(|e| e.to_string())?;
            if (zeta - n_r as f64).abs() > 1e-9 {
                return Err(format!("ζ_s({n_r},0) = {zeta}"));
            }
            let c = capacity_supremum(n_r, 0.0).map_err(|e| e.to_string())?.nats;
            if c.abs() > 1e-9 {
                return Err(format!("C_sup({n_r},0) = {c}"));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_03_constraint_suite() {
    criterion(3, "constraint suite", || {
        for &n_r in &GRID_NR {
            for &snr_db in &GRID_SNR_DB {
                let report =
                    cli::verify_point(n_r, snr_db, 20, 7).map_err(|e| e.to_string())?;
                if report.max_residual() > 1e-7 {
                    return Err(format!(
                        "n_r={n_r}, {snr_db} dB: max residual {:.3e}",
                        report.max_residual()
                    ));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_04_bridge_identity() {
    criterion(4, "entropy-bridge identity", || {
        let spec = QuadratureSpec::default();
        for &n_r in &GRID_NR {
            for &snr_db in &GRID_SNR_DB {
                let p = p_of_db(snr_db);
                let zeta = solve_zeta_s(n_r, p).map_err(|e| e.to_string())?;
                let via = capacity_via_entropies(zeta, n_r, p, &spec)
                    .map_err(|e| e.to_string())?;
                let closed = capacity_of_zeta(zeta, n_r).map_err(|e| e.to_string())?;
                if (via - closed).abs() > 1e-8 {
                    return Err(format!(
                        "n_r={n_r}, {snr_db} dB: entropies give {via}, closed form {closed}"
                    ));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_05_upper_bound_property() {
    criterion(5, "upper bound over random inputs", || {
        let spec = QuadratureSpec::default();
        let mut rng = XorShift(0x9e3779b97f4a7c15);
        for &n_r in &GRID_NR {
            for &snr_db in &GRID_SNR_DB {
                let p = p_of_db(snr_db);
                let c_sup = capacity_supremum(n_r, p).map_err(|e| e.to_string())?.nats;
                for _ in 0..100 {
                    let input = random_feasible_input(&mut rng, p);
                    let mi = mutual_information(&input, n_r, &spec)
                        .map_err(|e| e.to_string())?;
                    if mi > c_sup + 1e-6 {
                        return Err(format!(
                            "n_r={n_r}, {snr_db} dB: MI {mi} exceeds C_sup {c_sup} for {:?}",
                            input.points()
                        ));
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_06_siso_reduction() {
    criterion(6, "single-antenna closed form", || {
        let mut rng = XorShift(0x2545f4914f6cdd1d);
        for _ in 0..50 {
            let zeta = 0.02 + 0.98 * rng.next_f64();
            let (c_closed, _) = taricco_siso_form(zeta).map_err(|e| e.to_string())?;
            let c_generic = capacity_of_zeta(zeta, 1).map_err(|e| e.to_string())?;
            if (c_closed - c_generic).abs() > 1e-12 {
                return Err(format!(
                    "ζ={zeta}: closed {c_closed} vs generic {c_generic}"
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_07_beta_positive_branch() {
    criterion(7, "positive-log-moment branch", || {
        match capacity_beta_positive(2, 0.0) {
            Err(Error::NoSolution(_)) => {}
            other => {
                return Err(format!(
                    "(n_r=2, P=0) should be NoSolution, got {other:?}"
                ))
            }
        }
        let mut p = 0.0;
        while p <= 1e4 {
            capacity_beta_positive(1, p)
                .map_err(|e| format!("n_r=1, P={p}: {e}"))?;
            p = if p == 0.0 { 0.1 } else { p * 10.0 };
        }
        let mut p = 10.0;
        while p <= 1e4 {
            let c_pos = capacity_beta_positive(1, p).map_err(|e| e.to_string())?.nats;
            let c_sup = capacity_supremum(1, p).map_err(|e| e.to_string())?.nats;
            let rel = (c_pos - c_sup).abs() / c_sup;
            if rel > 0.1 {
                return Err(format!(
                    "P={p}: C' {c_pos} vs C_sup {c_sup}, relative gap {rel:.3}"
                ));
            }
            p *= 10f64.powf(0.5);
        }
        Ok(())
    });
}

#[test]
fn criterion_08_asymptotics() {
    criterion(8, "high-power asymptotics", || {
        let p100 = p_of_db(100.0);
        for &n_r in &[1u32, 2, 4] {
            let zeta = solve_zeta_s(n_r, p100).map_err(|e| e.to_string())?;
            let product = zeta * (n_r as f64 * (1.0 + p100)).ln();
            if !(0.85..=1.15).contains(&product) {
                return Err(format!("n_r={n_r}: ζ_s·ln(n_r(1+P)) = {product:.4}"));
            }
        }
        let c: Vec<f64> = [40.0, 60.0, 80.0]
            .iter()
            .map(|&db| capacity_supremum(1, p_of_db(db)).map(|r| r.nats))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let d1 = c[1] - c[0];
        let d2 = c[2] - c[1];
        if !(d1 < 0.45 && d2 < 0.45 && d2 < d1 && d1 > 0.0 && d2 > 0.0) {
            return Err(format!(
                "increments over 40→60→80 dB: {d1:.4}, {d2:.4} (need positive, < 0.45, decreasing)"
            ));
        }
        Ok(())
    });
}

#[test]
fn criterion_09_large_array_reference() {
    criterion(9, "large-array reference gap", || {
        for &n_r in &[10u32, 20, 30, 50] {
            let config = AntennaConfig::new(n_r, 1).map_err(|e| e.to_string())?;
            let gaps: Vec<f64> = [20.0, 40.0, 60.0]
                .iter()
                .map(|&db| -> Result<f64, String> {
                    let p = p_of_db(db);
                    let sup = capacity_supremum(n_r, p).map_err(|e| e.to_string())?.nats;
                    let sen = sengupta_capacity(config, p).map_err(|e| e.to_string())?.nats;
                    Ok((sup - sen).abs())
                })
                .collect::<Result<_, _>>()?;
            if !(gaps[1] < gaps[0] && gaps[2] < gaps[1]) {
                return Err(format!("n_r={n_r}: gaps {gaps:?} not strictly decreasing"));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_10_coherent_reference() {
    criterion(10, "coherent reference", || {
        let spec = QuadratureSpec::default();
        // Quadrature oracle: E ln(1 + 2u) with u ~ Exp(1) (per-branch channel
        // energy has mean 2 under the unit-variance-per-dimension convention).
        let oracle =
            integrate_semi_infinite(|u| (1.0 + 2.0 * u).ln() * (-u).exp(), &spec)
                .map_err(|e| e.to_string())?;
        if (oracle - 0.9230).abs() > 1e-4 {
            return Err(format!("quadrature oracle {oracle}, expected ≈ 0.9230"));
        }
        let config = AntennaConfig::new(1, 1).map_err(|e| e.to_string())?;
        let est = coherent_capacity_mc(config, 1.0, 100_000, 42).map_err(|e| e.to_string())?;
        if (est.mean - oracle).abs() > 3.0 * est.stderr {
            return Err(format!(
                "MC {} ± {} vs oracle {oracle}",
                est.mean, est.stderr
            ));
        }
        for &n_r in &[1u32, 2, 4] {
            for &snr_db in &[0.0, 10.0, 20.0, 30.0] {
                let p = p_of_db(snr_db);
                let sup = capacity_supremum(n_r, p).map_err(|e| e.to_string())?.nats;
                let config = AntennaConfig::new(n_r, 1).map_err(|e| e.to_string())?;
                let coh = coherent_capacity_mc(config, p, 20_000, 42)
                    .map_err(|e| e.to_string())?;
                if sup >= coh.mean {
                    return Err(format!(
                        "n_r={n_r}, {snr_db} dB: C_sup {sup} not below coherent {}",
                        coh.mean
                    ));
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_11_discrete_optimizer() {
    criterion(11, "discrete-input optimizer", || {
        let p = 10.0;
        let (input, result) =
            optimize_discrete_input(1, p, &OptimizerOptions::default()).map_err(|e| e.to_string())?;
        let report = kt_check(&input, 1, p, result.nats).map_err(|e| e.to_string())?;
        if report.violation > 1e-4 {
            return Err(format!("stationarity violation {:.3e}", report.violation));
        }
        let c_sup = capacity_supremum(1, p).map_err(|e| e.to_string())?.nats;
        if result.nats > c_sup {
            return Err(format!("C_dis {} exceeds C_sup {c_sup}", result.nats));
        }
        let ratio = result.nats / c_sup;
        if !(0.35..=0.75).contains(&ratio) {
            return Err(format!("C_dis/C_sup = {ratio:.3}"));
        }
        Ok(())
    });
}

#[test]
fn criterion_12_determinism() {
    criterion(12, "deterministic parallel sweeps", || {
        let config = SweepConfig {
            nr_list: vec![1, 2],
            nt: 1,
            snr_db_grid: (0.0, 10.0, 10.0),
            methods: [
                SweepMethod::Sup,
                SweepMethod::BetaPos,
                SweepMethod::Asym,
                SweepMethod::Coherent,
                SweepMethod::Sengupta,
                SweepMethod::Verify,
            ]
            .into_iter()
            .collect(),
            samples: 5_000,
            seed: 1234,
        };
        let mut outputs = Vec::new();
        for workers in ["1", "2", "8"] {
            std::env::set_var(cli::THREADS_ENV_VAR, workers);
            let rows = cli::run_sweep(&config).map_err(|e| e.to_string())?;
            outputs.push(cli::render_csv(&rows, Units::Nats));
        }
        std::env::remove_var(cli::THREADS_ENV_VAR);
        if outputs[0] != outputs[1] || outputs[0] != outputs[2] {
            return Err("CSV output differs across worker counts".into());
        }
        Ok(())
    });
}
