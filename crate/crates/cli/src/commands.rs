//! Subcommand bodies. Each returns the JSON it printed or the paths it
//! wrote so integration tests can drive them without spawning a process.

use std::path::{Path, PathBuf};
use std::time::Instant;

use casimir_core::analytics::{
    predicted_photon_gain, predicted_photon_gain_longtime, predicted_vibrational_gain,
    ResonanceWeight,
};
use casimir_core::dynamics::{convergence_check, convergence_order, integrate, Observable};
use casimir_core::observables::{
    amplitude_spectrum, fit_exponential_lifetime, rabi_splitting_from_series,
};
use casimir_core::sweep::{detuning_scan, log_range, run_sweep, SweepParam, SweepSpec};
use casimir_core::units::{au_to_cm1, au_to_ps, ps_to_au};
use casimir_core::{Error as CoreError, Params};
use serde_json::{json, Value};

use crate::config::parse_config;
use crate::io::{read_trajectory_csv, sweep_csv, trajectory_csv, write_atomic};
use crate::manifest::{RunManifest, SweepManifest};
use crate::CliError;

/// Where parameters come from: an optional TOML file plus `key=value` edits.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub path: Option<PathBuf>,
    pub overrides: Vec<String>,
}

impl ConfigSource {
    fn resolve(&self) -> Result<(Params, String), CliError> {
        parse_config(self.path.as_deref(), &self.overrides)
    }

    fn display_path(&self) -> Option<String> {
        self.path.as_ref().map(|p| p.display().to_string())
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("json serializes");
    b.push(b'\n');
    b
}

/// `run`: integrates once and writes `trajectory.csv` and `manifest.json`.
pub fn cmd_run(src: &ConfigSource, out_dir: &Path) -> Result<RunManifest, CliError> {
    let (params, text) = src.resolve()?;
    ensure_dir(out_dir)?;
    let mut manifest = RunManifest::new("run", src.display_path(), &text, &src.overrides, &params);
    let start = Instant::now();
    let result = integrate(&params);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let manifest_path = out_dir.join("manifest.json");
    match result {
        Ok(traj) => {
            let csv_path = out_dir.join("trajectory.csv");
            write_atomic(&csv_path, &trajectory_csv(&traj))?;
            manifest.diagnostics = Some(traj.diagnostics);
            manifest.outputs = vec!["trajectory.csv".into(), "manifest.json".into()];
            write_atomic(&manifest_path, &manifest.to_json())?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = "failed".into();
            manifest.error = Some(e.to_string());
            if let CoreError::NonFinite { last_valid_t, .. } = e {
                manifest.last_valid_t = Some(last_valid_t);
            }
            manifest.outputs = vec!["manifest.json".into()];
            write_atomic(&manifest_path, &manifest.to_json())?;
            Err(e.into())
        }
    }
}

#[derive(Debug, Clone)]
pub enum SweepValues {
    List(Vec<f64>),
    LogRange { lo: f64, hi: f64, n: usize },
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub param: String,
    pub values: SweepValues,
    pub observable_time_ps: f64,
    /// Fit `E_D` over these rows; `Some(None)` means all rows.
    pub fit: Option<Option<std::ops::Range<usize>>>,
    pub workers: usize,
}

/// `sweep`: runs one row per value and writes `sweep.csv` and
/// `manifest.json`. Failed rows are recorded, not fatal.
pub fn cmd_sweep(
    src: &ConfigSource,
    args: &SweepArgs,
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let (params, text) = src.resolve()?;
    let param: SweepParam = args.param.parse()?;
    let values = match &args.values {
        SweepValues::List(v) => v.clone(),
        SweepValues::LogRange { lo, hi, n } => log_range(*lo, *hi, *n)?,
    };
    if !(args.observable_time_ps.is_finite() && args.observable_time_ps > 0.0) {
        return Err(CliError::Validation("observable time must be > 0".into()));
    }
    let n = values.len();
    let mut spec = SweepSpec {
        observable_time: ps_to_au(args.observable_time_ps),
        ..SweepSpec::new(params.clone(), param, values)
    };
    spec.fit_window = args.fit.clone().map(|w| w.unwrap_or(0..n));
    spec.validate()?;
    ensure_dir(out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.max(1))
        .build()
        .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))?;
    let brackets = {
        let lo = spec.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = spec
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        lo <= params.omega_v && params.omega_v <= hi
    };
    let start = Instant::now();
    let (table, resonance) = pool.install(|| -> Result<_, CliError> {
        if param == SweepParam::OmegaC && brackets {
            let (t, r) = detuning_scan(&spec)?;
            Ok((t, Some(r)))
        } else {
            Ok((run_sweep(&spec)?, None))
        }
    })?;

    let mut manifest =
        RunManifest::new("sweep", src.display_path(), &text, &src.overrides, &params);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let failed = table.rows.iter().filter(|r| !r.status.is_ok()).count();
    if failed == table.rows.len() {
        manifest.status = "failed".into();
        manifest.error = Some("every row failed".into());
    }
    manifest.sweep = Some(SweepManifest {
        param,
        values: table.values(),
        observable_time_au: table.observable_time,
        workers: args.workers.max(1),
        failed_rows: failed,
        fit_window: table.fit_window.clone(),
        fit: table.fit,
        fit_error: table.fit_error.clone(),
        resonance,
    });
    manifest.outputs = vec!["sweep.csv".into(), "manifest.json".into()];
    write_atomic(&out_dir.join("sweep.csv"), &sweep_csv(&table))?;
    write_atomic(&out_dir.join("manifest.json"), &manifest.to_json())?;
    if failed == table.rows.len() {
        return Err(CliError::Runtime(format!(
            "all {failed} sweep rows failed; first: {}",
            table.rows[0].status
        )));
    }
    Ok(manifest)
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeArgs {
    pub fit_lifetime: bool,
    pub spectrum: bool,
    pub rabi: bool,
    /// Column for the lifetime fit.
    pub lifetime_column: String,
    /// Column for the spectrum.
    pub spectrum_column: String,
    pub peaks: usize,
}

/// Parameters that produced a trajectory: the `manifest.json` beside it if
/// present, otherwise the given config.
fn analysis_params(csv: &Path, src: &ConfigSource) -> Result<(Params, &'static str), CliError> {
    if src.path.is_none() && src.overrides.is_empty() {
        let candidate = csv.with_file_name("manifest.json");
        if let Ok(bytes) = std::fs::read(&candidate) {
            let m: RunManifest = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Validation(format!("{}: {e}", candidate.display())))?;
            return Ok((m.params, "manifest"));
        }
    }
    Ok((src.resolve()?.0, "config"))
}

/// `analyze`: lifetime fit, spectrum and/or Rabi splitting of a recorded
/// trajectory; writes `analysis.json` to `out`.
pub fn cmd_analyze(
    csv: &Path,
    src: &ConfigSource,
    args: &AnalyzeArgs,
    out: &Path,
) -> Result<Value, CliError> {
    if !(args.fit_lifetime || args.spectrum || args.rabi) {
        return Err(CliError::Validation(
            "nothing to do: pass --fit-lifetime, --spectrum and/or --rabi".into(),
        ));
    }
    let table = read_trajectory_csv(csv)?;
    let (params, params_source) = analysis_params(csv, src)?;
    let window_start = params.pulse.t_start + 5.0 * params.pulse.sigma;
    let times = table.column("t_au").expect("t_au column");
    let column = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| CliError::Validation(format!("unknown column `{name}`")))
    };
    let mut report = json!({
        "source": csv.display().to_string(),
        "params_from": params_source,
        "window_start_au": window_start,
    });

    if args.fit_lifetime {
        let values = column(&args.lifetime_column)?;
        let (t, v): (Vec<f64>, Vec<f64>) = times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t > window_start)
            .map(|(t, v)| (*t, *v))
            .unzip();
        let fit = fit_exponential_lifetime(&t, &v)?;
        report["lifetime"] = json!({
            "column": args.lifetime_column,
            "points": t.len(),
            "tau_au": finite_or_null(fit.tau),
            "tau_ps": finite_or_null(au_to_ps(fit.tau)),
            "r_squared": fit.r_squared,
            "low_confidence": fit.low_confidence,
        });
    }

    if args.spectrum {
        let values = column(&args.spectrum_column)?;
        let start = times
            .iter()
            .position(|&t| t > window_start)
            .unwrap_or(times.len());
        if times.len() < start + 4 {
            return Err(CliError::Runtime(
                "too few frames after the pulse for a spectrum".into(),
            ));
        }
        let dt = times[start + 1] - times[start];
        let spec = amplitude_spectrum(&values[start..], dt);
        let peaks: Vec<Value> = spec
            .peaks(1)
            .into_iter()
            .take(args.peaks)
            .map(|p| json!({"omega_au": p.omega, "omega_cm1": au_to_cm1(p.omega), "amplitude": p.amplitude}))
            .collect();
        report["spectrum"] = json!({
            "column": args.spectrum_column,
            "frame_spacing_au": dt,
            "bin_width_au": spec.bin_width,
            "bin_width_cm1": au_to_cm1(spec.bin_width),
            "peaks": peaks,
        });
    }

    if args.rabi {
        let est =
            rabi_splitting_from_series(times, column("q_B")?, column("E_B_cm1")?, window_start)?;
        report["rabi"] = serde_json::to_value(est).expect("estimate serializes");
        report["rabi"]["bin_width_cm1"] = json!(au_to_cm1(est.bin_width_au));
    }

    write_atomic(out, &json_bytes(&report))?;
    Ok(report)
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    Lorentzian,
    Indicator,
    Constant,
}

#[derive(Debug, Clone)]
pub struct PredictArgs {
    pub p_e: f64,
    pub coherence: f64,
    pub weight: WeightKind,
    /// Defaults to half the polariton splitting.
    pub half_width: Option<f64>,
}

/// `predict`: closed-form photon and vibrational gains.
pub fn cmd_predict(src: &ConfigSource, args: &PredictArgs) -> Result<Value, CliError> {
    let (params, _) = src.resolve()?;
    if !(0.0..=1.0).contains(&args.p_e) {
        return Err(CliError::Validation("pe must be in [0, 1]".into()));
    }
    if !(args.coherence.abs() <= 0.5) {
        return Err(CliError::Validation(
            "coherence must be in [-0.5, 0.5]".into(),
        ));
    }
    let half_width = match args.half_width {
        Some(w) => w,
        None if args.weight == WeightKind::Constant => 0.0,
        None => match ResonanceWeight::from_splitting(&params)? {
            ResonanceWeight::Lorentzian { half_width } => half_width,
            _ => unreachable!("from_splitting builds a Lorentzian"),
        },
    };
    let weight = match args.weight {
        WeightKind::Lorentzian => ResonanceWeight::Lorentzian { half_width },
        WeightKind::Indicator => ResonanceWeight::Indicator { half_width },
        WeightKind::Constant => ResonanceWeight::Constant,
    };
    weight.validate()?;
    let photon = predicted_photon_gain(&params, args.p_e, args.coherence);
    let longtime = predicted_photon_gain_longtime(&params, args.p_e);
    let vib = predicted_vibrational_gain(&params, args.p_e, &weight);
    let energy = |au: f64| json!({"au": au, "cm1": au_to_cm1(au)});
    Ok(json!({
        "P_e": args.p_e,
        "re_rho_eg": args.coherence,
        "photon_gain": energy(photon),
        "photon_gain_longtime": energy(longtime),
        "vibrational_gain_total": energy(vib.total),
        "vibrational_gain_per_oscillator": energy(vib.per_oscillator),
        "resonance_weight": {
            "weight": weight,
            "detuning_au": params.omega_v - params.omega_c,
            "value": vib.weight,
        },
    }))
}

/// `convergence`: terminal observable at `dt` and `dt/2` (and `dt/4` with
/// `order`).
pub fn cmd_convergence(
    src: &ConfigSource,
    observable: &str,
    order: bool,
) -> Result<Value, CliError> {
    let (params, _) = src.resolve()?;
    let obs: Observable = observable.parse()?;
    let report = if order {
        convergence_order(&params, obs)?
    } else {
        convergence_check(&params, obs)?
    };
    Ok(serde_json::to_value(report).expect("report serializes"))
}

/// Writes `value` to `out` if given; always returns the pretty text.
pub fn emit_json(value: &Value, out: Option<&Path>) -> Result<String, CliError> {
    let bytes = json_bytes(value);
    if let Some(path) = out {
        write_atomic(path, &bytes)?;
    }
    Ok(String::from_utf8(bytes).expect("json is utf-8"))
}
