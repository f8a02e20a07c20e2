use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use casimir_cli::commands::{
    cmd_analyze, cmd_convergence, cmd_predict, cmd_run, cmd_sweep, emit_json, AnalyzeArgs,
    ConfigSource, PredictArgs, SweepArgs, SweepValues, WeightKind,
};
use casimir_cli::CliError;

/// Semiclassical cavity/vibration/electron dynamics: runs, sweeps and analyses.
#[derive(Debug, Parser)]
#[command(name = "casimir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML configuration; omitted keys take their default values.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Replace one configuration value: `key=value` or `section.key=value`.
    #[arg(short = 'o', long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn source(&self) -> ConfigSource {
        ConfigSource {
            path: self.config.clone(),
            overrides: self.overrides.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate once; writes trajectory.csv and manifest.json.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Scan one parameter; writes sweep.csv and manifest.json.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// lambda_c, n_e, E0, delta_d, omega_c, n_v, gamma_e, gamma_c or gamma_v_total.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(
            long,
            value_delimiter = ',',
            required_unless_present = "log_range",
            conflicts_with = "log_range"
        )]
        values: Vec<f64>,
        /// LO HI N: N log-spaced values.
        #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"])]
        log_range: Option<Vec<String>>,
        /// Time at which E_D and P_e are read, ps.
        #[arg(long, default_value_t = 5.0)]
        observable_time_ps: f64,
        /// Fit a power law of E_D against the swept value over all rows.
        #[arg(long)]
        fit: bool,
        /// Restrict the fit to rows START..END (end exclusive).
        #[arg(long, value_name = "START:END")]
        fit_window: Option<String>,
        #[arg(long, env = "CASIMIR_WORKERS")]
        workers: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Analyse a trajectory.csv; writes analysis.json.
    Analyze {
        trajectory: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        fit_lifetime: bool,
        #[arg(long)]
        spectrum: bool,
        #[arg(long)]
        rabi: bool,
        #[arg(long, default_value = "P_e")]
        lifetime_column: String,
        #[arg(long, default_value = "q_B")]
        spectrum_column: String,
        /// Spectral peaks to report.
        #[arg(long, default_value_t = 6)]
        peaks: usize,
        /// Defaults to analysis.json next to the trajectory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form photon and vibrational energy gains.
    Predict {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        pe: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        coherence: f64,
        #[arg(long, value_enum, default_value_t = Weight::Lorentzian)]
        weight: Weight,
        /// a.u.; defaults to half the polariton splitting.
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a terminal observable at dt and dt/2.
    Convergence {
        #[command(flatten)]
        config: ConfigArgs,
        /// E_e, E_c, E_B, E_D, E_total, P_e or q_c.
        #[arg(long, default_value = "E_D")]
        observable: String,
        /// Also run dt/4 and report the observed order.
        #[arg(long)]
        order: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Weight {
    Lorentzian,
    Indicator,
    Constant,
}

fn parse_window(s: &str) -> Result<std::ops::Range<usize>, CliError> {
    let bad = || CliError::Validation(format!("fit window `{s}` is not START:END"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok(a.trim().parse().map_err(|_| bad())?..b.trim().parse().map_err(|_| bad())?)
}

fn parse_log_range(v: &[String]) -> Result<SweepValues, CliError> {
    let bad = |what: &str| CliError::Validation(format!("--log-range: bad {what}"));
    Ok(SweepValues::LogRange {
        lo: v[0].parse().map_err(|_| bad("LO"))?,
        hi: v[1].parse().map_err(|_| bad("HI"))?,
        n: v[2].parse().map_err(|_| bad("N"))?,
    })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let m = cmd_run(&config.source(), &out)?;
            let d = m.diagnostics.expect("successful run has diagnostics");
            println!(
                "wrote {} ({} steps, {:.1} s)",
                out.join("trajectory.csv").display(),
                d.steps,
                m.wall_clock_seconds
            );
        }
        Command::Sweep {
            config,
            param,
            values,
            log_range,
            observable_time_ps,
            fit,
            fit_window,
            workers,
            out,
        } => {
            let values = match log_range {
                Some(v) => parse_log_range(&v)?,
                None => SweepValues::List(values),
            };
            let fit = match (fit, fit_window) {
                (_, Some(w)) => Some(Some(parse_window(&w)?)),
                (true, None) => Some(None),
                (false, None) => None,
            };
            let args = SweepArgs {
                param,
                values,
                observable_time_ps,
                fit,
                workers: workers.unwrap_or_else(default_workers),
            };
            let m = cmd_sweep(&config.source(), &args, &out)?;
            let s = m.sweep.expect("sweep manifest");
            println!(
                "wrote {} ({} rows, {} failed, {:.1} s)",
                out.join("sweep.csv").display(),
                s.values.len(),
                s.failed_rows,
                m.wall_clock_seconds
            );
            if let Some(f) = s.fit {
                println!(
                    "E_D ∝ {}^{:.4} (R² = {:.5})",
                    s.param, f.exponent, f.r_squared
                );
            } else if let Some(e) = s.fit_error {
                eprintln!("fit skipped: {e}");
            }
        }
        Command::Analyze {
            trajectory,
            config,
            fit_lifetime,
            spectrum,
            rabi,
            lifetime_column,
            spectrum_column,
            peaks,
            out,
        } => {
            let out = out.unwrap_or_else(|| trajectory.with_file_name("analysis.json"));
            let args = AnalyzeArgs {
                fit_lifetime,
                spectrum,
                rabi,
                lifetime_column,
                spectrum_column,
                peaks,
            };
            let report = cmd_analyze(&trajectory, &config.source(), &args, &out)?;
            print!("{}", emit_json(&report, None)?);
        }
        Command::Predict {
            config,
            pe,
            coherence,
            weight,
            half_width,
            out,
        } => {
            let args = PredictArgs {
                p_e: pe,
                coherence,
                weight: match weight {
                    Weight::Lorentzian => WeightKind::Lorentzian,
                    Weight::Indicator => WeightKind::Indicator,
                    Weight::Constant => WeightKind::Constant,
                },
                half_width,
            };
            let v = cmd_predict(&config.source(), &args)?;
            print!("{}", emit_json(&v, out.as_deref())?);
        }
        Command::Convergence {
            config,
            observable,
            order,
            out,
        } => {
            let v = cmd_convergence(&config.source(), &observable, order)?;
            print!("{}", emit_json(&v, out.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
