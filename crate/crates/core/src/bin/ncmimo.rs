//! Batch CLI for the non-coherent Rayleigh MIMO capacity toolkit.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ncmimo::cli::{
    self, Figure, OutputFormat, SweepConfig, SweepMethod, Units,
};

#[derive(Parser)]
#[command(name = "ncmimo", version, about = "Capacity bounds for the non-coherent Rayleigh-fading MIMO channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Receive antenna counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    nr: Vec<u32>,
    /// Transmit antenna count (reference formulas only).
    #[arg(long, default_value_t = 1)]
    nt: u32,
    /// SNR grid in dB: single value, or start:stop:step.
    #[arg(long, default_value = "0")]
    snr_db: String,
    /// Methods to run, comma separated:
    /// sup, beta_pos, asym, coherent, sengupta, discrete, verify.
    #[arg(long, value_delimiter = ',', default_value = "sup")]
    methods: Vec<String>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Capacity units at emission: nats or bits.
    #[arg(long, default_value = "nats")]
    units: String,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all requested methods at a single (n_r, SNR) point.
    Point(GridArgs),
    /// Sweep the (n_r, SNR) grid and write CSV or JSON.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Output file path.
        #[arg(long)]
        out: String,
        /// Output format: csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Run the output-constraint residual suite; nonzero exit on failure.
    Verify(GridArgs),
    /// Sweep and write a self-contained plot script.
    Plot {
        #[command(flatten)]
        grid: GridArgs,
        /// Output script path.
        #[arg(long)]
        out: String,
        /// Figure layout: fig4, fig6, or fig7.
        #[arg(long)]
        figure: String,
    },
}

fn parse_snr_grid(text: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = text.split(':').collect();
    let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("bad SNR value '{s}': {e}"));
    match parts.as_slice() {
        [single] => {
            let v = parse(single)?;
            Ok((v, v, 1.0))
        }
        [start, stop, step] => Ok((parse(start)?, parse(stop)?, parse(step)?)),
        _ => Err(format!("expected SNR as 'value' or 'start:stop:step', got '{text}'")),
    }
}

fn parse_units(text: &str) -> Result<Units, String> {
    match text {
        "nats" => Ok(Units::Nats),
        "bits" => Ok(Units::Bits),
        other => Err(format!("unknown units '{other}' (expected nats or bits)")),
    }
}

fn build_config(grid: &GridArgs) -> Result<SweepConfig, String> {
    let methods: BTreeSet<SweepMethod> = grid
        .methods
        .iter()
        .map(|m| SweepMethod::parse(m).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let config = SweepConfig {
        nr_list: grid.nr.clone(),
        nt: grid.nt,
        snr_db_grid: parse_snr_grid(&grid.snr_db)?,
        methods,
        samples: grid.samples,
        seed: grid.seed,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn print_notes(rows: &[cli::SweepRow]) {
    for row in rows {
        for note in &row.notes {
            eprintln!("warning: n_r={}, {} dB: {}", row.n_r, row.snr_db, note);
        }
    }
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Point(grid) => {
            let units = parse_units(&grid.units)?;
            let config = build_config(&grid)?;
            let rows = cli::run_sweep(&config).map_err(|e| e.to_string())?;
            print_notes(&rows);
            print!("{}", cli::render_csv(&rows, units));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { grid, out, format } => {
            let units = parse_units(&grid.units)?;
            let format = match format.as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => return Err(format!("unknown format '{other}' (expected csv or json)")),
            };
            let config = build_config(&grid)?;
            let rows = cli::run_sweep(&config).map_err(|e| e.to_string())?;
            print_notes(&rows);
            match format {
                OutputFormat::Csv => cli::emit_csv(&rows, &out, units),
                OutputFormat::Json => cli::emit_json(&rows, &out, units),
            }
            .map_err(|e| e.to_string())?;
            eprintln!("wrote {} rows to {out}", rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(grid) => {
            let config = build_config(&grid)?;
            let mut worst = 0.0f64;
            for &n_r in &config.nr_list {
                let (start, stop, step) = config.snr_db_grid;
                let mut snr = start;
                while snr <= stop + 1e-9 {
                    let v = cli::verify_point(n_r, snr, 20, config.seed)
                        .map_err(|e| e.to_string())?;
                    println!(
                        "n_r={:3} snr={:7.2} dB  norm={:.3e}  power={:.3e}  log-moment={:.3e}  appendix={:.3e}",
                        v.n_r,
                        v.snr_db,
                        v.normalization_residual,
                        v.power_residual,
                        v.log_moment_residual,
                        v.appendix_residual_max,
                    );
                    worst = worst.max(v.max_residual());
                    snr += step;
                }
            }
            if worst > 1e-7 {
                eprintln!("FAIL: max residual {worst:.3e} exceeds 1e-7");
                Ok(ExitCode::FAILURE)
            } else {
                println!("OK: max residual {worst:.3e}");
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Plot { grid, out, figure } => {
            let figure = Figure::parse(&figure).map_err(|e| e.to_string())?;
            let config = build_config(&grid)?;
            let rows = cli::run_sweep(&config).map_err(|e| e.to_string())?;
            print_notes(&rows);
            cli::emit_plot_script(&rows, &out, figure).map_err(|e| e.to_string())?;
            eprintln!("wrote plot script to {out}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
