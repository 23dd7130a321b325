//! Batch front end: grid sweeps over (n_r, SNR), constraint verification,
//! CSV/JSON emission, and static plot-script output.
//!
//! Worker count is taken from the `NCMIMO_THREADS` environment variable
//! (default: available parallelism). Output is deterministic for a fixed
//! seed at any worker count.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics;
use crate::channel::{AntennaConfig, DiscreteInput};
use crate::discrete::{self, OptimizerOptions};
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::reference;
use crate::specfun::digamma;
use crate::supremum::{self, OptimalOutputDensity};

pub const THREADS_ENV_VAR: &str = "NCMIMO_THREADS";
const LN_2: f64 = std::f64::consts::LN_2;

/// Which computations a sweep runs per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepMethod {
    Sup,
    BetaPos,
    Asym,
    Coherent,
    Sengupta,
    Discrete,
    Verify,
}

impl SweepMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sup" => Ok(Self::Sup),
            "beta_pos" => Ok(Self::BetaPos),
            "asym" => Ok(Self::Asym),
            "coherent" => Ok(Self::Coherent),
            "sengupta" => Ok(Self::Sengupta),
            "discrete" => Ok(Self::Discrete),
            "verify" => Ok(Self::Verify),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected sup, beta_pos, asym, coherent, sengupta, discrete, verify)"
            ))),
        }
    }
}

/// Capacity unit selection at emission time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub nr_list: Vec<u32>,
    pub nt: u32,
    /// (start, stop, step) in dB.
    pub snr_db_grid: (f64, f64, f64),
    pub methods: BTreeSet<SweepMethod>,
    pub samples: u64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nr_list.is_empty() {
            return Err(Error::InvalidInput("nr_list must be nonempty".into()));
        }
        if self.nr_list.iter().any(|&n| n < 1) || self.nt < 1 {
            return Err(Error::InvalidInput("antenna counts must be ≥ 1".into()));
        }
        let (start, stop, step) = self.snr_db_grid;
        if !(step > 0.0) || start > stop {
            return Err(Error::InvalidInput(format!(
                "SNR grid needs step > 0 and start ≤ stop, got ({start}, {stop}, {step})"
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("at least one method required".into()));
        }
        Ok(())
    }

    fn snr_points(&self) -> Vec<f64> {
        let (start, stop, step) = self.snr_db_grid;
        let mut points = Vec::new();
        let mut i = 0u64;
        loop {
            let v = start + step * i as f64;
            if v > stop + 1e-9 {
                break;
            }
            points.push(v);
            i += 1;
        }
        points
    }
}

/// One output row of a sweep. Optionals stay `None` when the owning method
/// was not requested or reported no solution.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub p_linear: f64,
    pub n_r: u32,
    pub n_t: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_sup_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_beta_pos_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_asym_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_coherent_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_coherent_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_sengupta_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_discrete_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kt_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_residual_max: Option<f64>,
    /// Per-row method failures; not part of the file schema.
    #[serde(skip)]
    pub notes: Vec<String>,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "snr_db",
    "p_linear",
    "n_r",
    "n_t",
    "zeta_s",
    "beta",
    "c_sup_nats",
    "c_beta_pos_nats",
    "c_asym_nats",
    "c_coherent_nats",
    "c_coherent_stderr",
    "c_sengupta_nats",
    "c_discrete_nats",
    "kt_violation",
    "constraint_residual_max",
];

/// Residuals of the three output constraints at the supremum law plus the
/// log-moment identity over randomized discrete inputs.
#[derive(Debug, Clone)]
pub struct VerifyPoint {
    pub n_r: u32,
    pub snr_db: f64,
    pub normalization_residual: f64,
    pub power_residual: f64,
    pub log_moment_residual: f64,
    pub appendix_residual_max: f64,
}

impl VerifyPoint {
    pub fn max_residual(&self) -> f64 {
        self.normalization_residual
            .max(self.power_residual)
            .max(self.log_moment_residual)
            .max(self.appendix_residual_max)
    }
}

/// Verify Eqs. of the constraint system at ζ_s for one grid point.
///
/// The power residual is relative (the raw moment scales with n_r(1+P)),
/// the other two are absolute.
pub fn verify_constraints_at(n_r: u32, p: f64, zeta: f64) -> Result<(f64, f64, f64)> {
    let spec = QuadratureSpec::default();
    let density = OptimalOutputDensity::new(zeta, n_r, p)?;
    let norm = density.integrate(&spec, |_, q| q)?;
    let m2 = density.integrate(&spec, |y, q| y * y * q)?;
    let logm = density.integrate(&spec, |y, q| if y > 0.0 { q * y.ln() } else { 0.0 })?;
    // At the optimum the input log-moment vanishes, so the output log moment
    // must equal its channel-side value E[ln Y] = ½(Ψ(n_r) + ln 2).  Away
    // from the solution ζ this residual is |β(ζ)|/2 > 0, which is what makes
    // the check discriminating.
    let expected_logm = 0.5 * (digamma(n_r as f64)? + LN_2);
    Ok((
        (norm - 1.0).abs(),
        (m2 / density.second_moment() - 1.0).abs(),
        (logm - expected_logm).abs(),
    ))
}

fn random_discrete_input(state: &mut u64, p_scale: f64) -> DiscreteInput {
    let next = |state: &mut u64| {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64
    };
    loop {
        let n = 2 + (next(state) * 3.0) as usize;
        let mut xs: Vec<f64> = (0..n).map(|_| next(state) * p_scale.sqrt() * 2.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let mut ps: Vec<f64> = xs.iter().map(|_| next(state) + 1e-3).collect();
        let total: f64 = ps.iter().sum();
        for p in &mut ps {
            *p /= total;
        }
        if let Ok(input) = DiscreteInput::new(xs.into_iter().zip(ps).collect()) {
            return input;
        }
    }
}

/// Full verification for one grid point: constraint suite at ζ_s plus the
/// log-output-moment identity for `n_random` random discrete inputs.
pub fn verify_point(n_r: u32, snr_db: f64, n_random: usize, seed: u64) -> Result<VerifyPoint> {
    let p = 10f64.powf(snr_db / 10.0);
    let zeta = supremum::solve_zeta_s(n_r, p)?;
    let (r_norm, r_pow, r_logm) = verify_constraints_at(n_r, p, zeta)?;
    let spec = QuadratureSpec::default();
    let mut state = seed | 1;
    let mut appendix_max = 0.0f64;
    for _ in 0..n_random {
        let input = random_discrete_input(&mut state, p.max(1.0));
        let r = crate::channel::verify_log_output_moment(&input, n_r, &spec)?;
        appendix_max = appendix_max.max(r);
    }
    Ok(VerifyPoint {
        n_r,
        snr_db,
        normalization_residual: r_norm,
        power_residual: r_pow,
        log_moment_residual: r_logm,
        appendix_residual_max: appendix_max,
    })
}

fn evaluate_row(config: &SweepConfig, n_r: u32, snr_db: f64) -> SweepRow {
    let p = 10f64.powf(snr_db / 10.0);
    let mut row = SweepRow {
        snr_db,
        p_linear: p,
        n_r,
        n_t: config.nt,
        zeta_s: None,
        beta: None,
        c_sup_nats: None,
        c_beta_pos_nats: None,
        c_asym_nats: None,
        c_coherent_nats: None,
        c_coherent_stderr: None,
        c_sengupta_nats: None,
        c_discrete_nats: None,
        kt_violation: None,
        constraint_residual_max: None,
        notes: Vec::new(),
    };
    let m = &config.methods;
    if m.contains(&SweepMethod::Sup) {
        match supremum::capacity_supremum(n_r, p) {
            Ok(r) => {
                row.zeta_s = Some(r.zeta_or_alpha);
                row.beta = Some(r.beta);
                row.c_sup_nats = Some(r.nats);
            }
            Err(e) => row.notes.push(format!("sup: {e}")),
        }
    }
    if m.contains(&SweepMethod::BetaPos) {
        match supremum::capacity_beta_positive(n_r, p) {
            Ok(r) => row.c_beta_pos_nats = Some(r.nats),
            Err(Error::NoSolution(_)) => {} // expected region, empty cell
            Err(e) => row.notes.push(format!("beta_pos: {e}")),
        }
    }
    if m.contains(&SweepMethod::Asym) {
        match asymptotics::asymptotic_capacity(n_r, p) {
            Ok(v) => row.c_asym_nats = Some(v),
            Err(e) => row.notes.push(format!("asym: {e}")),
        }
    }
    if m.contains(&SweepMethod::Coherent) {
        match AntennaConfig::new(n_r, config.nt)
            .and_then(|cfg| reference::coherent_capacity_mc(cfg, p, config.samples, config.seed))
        {
            Ok(est) => {
                row.c_coherent_nats = Some(est.mean);
                row.c_coherent_stderr = Some(est.stderr);
            }
            Err(e) => row.notes.push(format!("coherent: {e}")),
        }
    }
    if m.contains(&SweepMethod::Sengupta) {
        match AntennaConfig::new(n_r, config.nt)
            .and_then(|cfg| reference::sengupta_capacity(cfg, p))
        {
            Ok(r) => row.c_sengupta_nats = Some(r.nats),
            Err(e) => row.notes.push(format!("sengupta: {e}")),
        }
    }
    if m.contains(&SweepMethod::Discrete) {
        let opts = OptimizerOptions {
            seed: config.seed,
            ..OptimizerOptions::default()
        };
        match discrete::optimize_discrete_input(n_r, p, &opts) {
            Ok((input, r)) => {
                row.c_discrete_nats = Some(r.nats);
                match discrete::kt_check(&input, n_r, p, r.nats) {
                    Ok(report) => row.kt_violation = Some(report.violation),
                    Err(e) => row.notes.push(format!("kt_check: {e}")),
                }
            }
            Err(e) => row.notes.push(format!("discrete: {e}")),
        }
    }
    if m.contains(&SweepMethod::Verify) {
        match verify_point(n_r, snr_db, 20, config.seed) {
            Ok(v) => row.constraint_residual_max = Some(v.max_residual()),
            Err(e) => row.notes.push(format!("verify: {e}")),
        }
    }
    row
}

fn thread_count() -> usize {
    std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run a sweep; rows are ordered by (n_r ascending, SNR ascending) and the
/// values are deterministic for a fixed seed at any worker count.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let mut grid = Vec::new();
    let mut nr_sorted = config.nr_list.clone();
    nr_sorted.sort_unstable();
    nr_sorted.dedup();
    for &n_r in &nr_sorted {
        for snr in config.snr_points() {
            grid.push((n_r, snr));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|&(n_r, snr)| evaluate_row(config, n_r, snr))
            .collect()
    });
    Ok(rows)
}

fn fmt_float(v: f64) -> String {
    // Scientific notation with 9 significant digits.
    format!("{v:.8e}")
}

fn fmt_opt(v: Option<f64>, scale: f64) -> String {
    v.map(|x| fmt_float(x * scale)).unwrap_or_default()
}

fn capacity_scale(units: Units) -> f64 {
    match units {
        Units::Nats => 1.0,
        Units::Bits => 1.0 / LN_2,
    }
}

/// Render the fixed-schema CSV body.
pub fn render_csv(rows: &[SweepRow], units: Units) -> String {
    let s = capacity_scale(units);
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let fields = [
            fmt_float(r.snr_db),
            fmt_float(r.p_linear),
            r.n_r.to_string(),
            r.n_t.to_string(),
            fmt_opt(r.zeta_s, 1.0),
            fmt_opt(r.beta, 1.0),
            fmt_opt(r.c_sup_nats, s),
            fmt_opt(r.c_beta_pos_nats, s),
            fmt_opt(r.c_asym_nats, s),
            fmt_opt(r.c_coherent_nats, s),
            fmt_opt(r.c_coherent_stderr, s),
            fmt_opt(r.c_sengupta_nats, s),
            fmt_opt(r.c_discrete_nats, s),
            fmt_opt(r.kt_violation, 1.0),
            fmt_opt(r.constraint_residual_max, 1.0),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn write_file(path: &str, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })
}

pub fn emit_csv(rows: &[SweepRow], path: &str, units: Units) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows to emit".into()));
    }
    write_file(path, &render_csv(rows, units))
}

/// Render rows as a JSON array; absent optionals are omitted.
pub fn render_json(rows: &[SweepRow], units: Units) -> String {
    let s = capacity_scale(units);
    let scaled: Vec<SweepRow> = rows
        .iter()
        .map(|r| SweepRow {
            c_sup_nats: r.c_sup_nats.map(|v| v * s),
            c_beta_pos_nats: r.c_beta_pos_nats.map(|v| v * s),
            c_asym_nats: r.c_asym_nats.map(|v| v * s),
            c_coherent_nats: r.c_coherent_nats.map(|v| v * s),
            c_coherent_stderr: r.c_coherent_stderr.map(|v| v * s),
            c_sengupta_nats: r.c_sengupta_nats.map(|v| v * s),
            c_discrete_nats: r.c_discrete_nats.map(|v| v * s),
            notes: Vec::new(),
            ..r.clone()
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&scaled).expect("rows serialize");
    text.push('\n');
    text
}

pub fn emit_json(rows: &[SweepRow], path: &str, units: Units) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows to emit".into()));
    }
    write_file(path, &render_json(rows, units))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig4,
    Fig6,
    Fig7,
}

impl Figure {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(Self::Fig4),
            "fig6" => Ok(Self::Fig6),
            "fig7" => Ok(Self::Fig7),
            other => Err(Error::InvalidInput(format!(
                "unknown figure '{other}' (expected fig4, fig6, fig7)"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Fig4 => "fig4",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
        }
    }
}

fn require_column(
    rows: &[SweepRow],
    figure: Figure,
    column: &str,
    get: impl Fn(&SweepRow) -> Option<f64>,
) -> Result<()> {
    if rows.iter().any(|r| get(r).is_some()) {
        Ok(())
    } else {
        Err(Error::MissingColumn {
            figure: figure.name().to_string(),
            column: column.to_string(),
        })
    }
}

fn curve_block(
    out: &mut String,
    rows: &[SweepRow],
    n_r: u32,
    label: &str,
    style: &str,
    get: impl Fn(&SweepRow) -> Option<f64>,
) {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n_r == n_r)
        .filter_map(|r| get(r).map(|v| (r.snr_db, v)))
        .collect();
    if pts.is_empty() {
        return;
    }
    let xs: Vec<String> = pts.iter().map(|p| format!("{:.6}", p.0)).collect();
    let ys: Vec<String> = pts.iter().map(|p| format!("{:.9e}", p.1)).collect();
    let _ = writeln!(
        out,
        "plt.plot([{}], [{}], '{}', label='{}')",
        xs.join(", "),
        ys.join(", "),
        style,
        label
    );
}

/// Write a self-contained matplotlib script with the sweep data inlined.
pub fn emit_plot_script(rows: &[SweepRow], path: &str, figure: Figure) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows to plot".into()));
    }
    let mut nr_values: Vec<u32> = rows.iter().map(|r| r.n_r).collect();
    nr_values.sort_unstable();
    nr_values.dedup();

    let mut out = String::new();
    out.push_str("#!/usr/bin/env python3\n");
    out.push_str("import matplotlib\nmatplotlib.use('Agg')\n");
    out.push_str("import matplotlib.pyplot as plt\n\n");

    match figure {
        Figure::Fig4 => {
            require_column(rows, figure, "c_sup_nats", |r| r.c_sup_nats)?;
            for &n_r in &nr_values {
                curve_block(&mut out, rows, n_r, &format!("C_sup, n_r={n_r}"), "-o", |r| {
                    r.c_sup_nats
                });
            }
            out.push_str("plt.title('Capacity supremum vs input power')\n");
        }
        Figure::Fig6 => {
            require_column(rows, figure, "c_sup_nats", |r| r.c_sup_nats)?;
            require_column(rows, figure, "c_sengupta_nats", |r| r.c_sengupta_nats)?;
            for &n_r in &nr_values {
                curve_block(&mut out, rows, n_r, &format!("C_sup, n_r={n_r}"), "-o", |r| {
                    r.c_sup_nats
                });
                curve_block(
                    &mut out,
                    rows,
                    n_r,
                    &format!("large-n_r formula, n_r={n_r}"),
                    "--*",
                    |r| r.c_sengupta_nats,
                );
                curve_block(
                    &mut out,
                    rows,
                    n_r,
                    &format!("asymptote, n_r={n_r}"),
                    ":",
                    |r| r.c_asym_nats,
                );
            }
            out.push_str("plt.title('Capacity supremum vs large-n_r capacity')\n");
        }
        Figure::Fig7 => {
            require_column(rows, figure, "c_sup_nats", |r| r.c_sup_nats)?;
            require_column(rows, figure, "c_beta_pos_nats", |r| r.c_beta_pos_nats)?;
            require_column(rows, figure, "c_discrete_nats", |r| r.c_discrete_nats)?;
            for &n_r in &nr_values {
                curve_block(&mut out, rows, n_r, "C_sup (beta=0)", "-", |r| r.c_sup_nats);
                curve_block(&mut out, rows, n_r, "C'_sup (beta>0)", "--", |r| {
                    r.c_beta_pos_nats
                });
                curve_block(&mut out, rows, n_r, "discrete input", "-.", |r| {
                    r.c_discrete_nats
                });
            }
            out.push_str("plt.title('Capacity comparison, discrete input vs suprema')\n");
        }
    }
    out.push_str("plt.xlabel('SNR (dB)')\nplt.ylabel('capacity (nats)')\n");
    out.push_str("plt.grid(True)\nplt.legend()\n");
    let _ = writeln!(out, "plt.savefig('{}.png', dpi=150)", figure.name());
    write_file(path, &out)
}
