//! One-parameter families of runs and their terminal observables.
//!
//! Rows are independent: each clones the base parameters, overrides one
//! field and integrates on the current rayon pool. Results come back in the
//! requested order regardless of scheduling.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{fit_power_law, PowerLawFit};
use crate::dynamics::integrate;
use crate::params::Params;
use crate::units::{au_to_cm1, ps_to_au};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "lambda_c")]
    LambdaC,
    #[serde(rename = "n_e")]
    NE,
    #[serde(rename = "E0")]
    E0,
    /// Moves `d_ee` to `d_gg + value`, keeping `d_gg`.
    #[serde(rename = "delta_d")]
    DeltaD,
    /// Moves the cavity frequency; `omega_v` is left alone.
    #[serde(rename = "omega_c")]
    OmegaC,
    #[serde(rename = "n_v")]
    NV,
    #[serde(rename = "gamma_e")]
    GammaE,
    #[serde(rename = "gamma_c")]
    GammaC,
    #[serde(rename = "gamma_v_total")]
    GammaVTotal,
}

impl SweepParam {
    pub const ALL: [SweepParam; 9] = [
        SweepParam::LambdaC,
        SweepParam::NE,
        SweepParam::E0,
        SweepParam::DeltaD,
        SweepParam::OmegaC,
        SweepParam::NV,
        SweepParam::GammaE,
        SweepParam::GammaC,
        SweepParam::GammaVTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::LambdaC => "lambda_c",
            SweepParam::NE => "n_e",
            SweepParam::E0 => "E0",
            SweepParam::DeltaD => "delta_d",
            SweepParam::OmegaC => "omega_c",
            SweepParam::NV => "n_v",
            SweepParam::GammaE => "gamma_e",
            SweepParam::GammaC => "gamma_c",
            SweepParam::GammaVTotal => "gamma_v_total",
        }
    }

    pub fn apply(self, params: &mut Params, value: f64) {
        match self {
            SweepParam::LambdaC => params.lambda_c = value,
            SweepParam::NE => params.n_e = value,
            SweepParam::E0 => params.pulse.e0 = value,
            SweepParam::DeltaD => params.d_ee = params.d_gg + value,
            SweepParam::OmegaC => params.omega_c = value,
            SweepParam::NV => params.n_v = value,
            SweepParam::GammaE => params.gamma_e = value,
            SweepParam::GammaC => params.gamma_c = value,
            SweepParam::GammaVTotal => params.gamma_v_total = value,
        }
    }

    pub fn get(self, params: &Params) -> f64 {
        match self {
            SweepParam::LambdaC => params.lambda_c,
            SweepParam::NE => params.n_e,
            SweepParam::E0 => params.pulse.e0,
            SweepParam::DeltaD => params.delta_d(),
            SweepParam::OmegaC => params.omega_c,
            SweepParam::NV => params.n_v,
            SweepParam::GammaE => params.gamma_e,
            SweepParam::GammaC => params.gamma_c,
            SweepParam::GammaVTotal => params.gamma_v_total,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "sweep parameter",
                name: s.to_owned(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Params,
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// Time at which terminal observables are read; replaces `t_final`.
    pub observable_time: f64,
    /// Rows used for the power-law fit of `E_D` against the swept value.
    pub fit_window: Option<Range<usize>>,
}

impl SweepSpec {
    /// Spec with the observable read at 5 ps and no fit.
    pub fn new(base: Params, param: SweepParam, values: Vec<f64>) -> Self {
        SweepSpec {
            base,
            param,
            values,
            observable_time: ps_to_au(5.0),
            fit_window: None,
        }
    }

    pub fn with_fit(mut self, window: Range<usize>) -> Self {
        self.fit_window = Some(window);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "non-empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "finite"));
        }
        if !(self.observable_time.is_finite() && self.observable_time > 0.0) {
            return Err(Error::invalid("observable_time", "> 0"));
        }
        if let Some(w) = &self.fit_window {
            if w.start >= w.end || w.end > self.values.len() {
                return Err(Error::invalid(
                    "fit_window",
                    format!("a non-empty index range within 0..{}", self.values.len()),
                ));
            }
        }
        Ok(())
    }

    /// Parameters of row `i`.
    pub fn row_params(&self, i: usize) -> Params {
        let mut p = self.base.clone();
        self.param.apply(&mut p, self.values[i]);
        p.t_final = self.observable_time;
        p
    }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_range(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("log-range bounds", "positive and finite"));
    }
    match n {
        0 => Err(Error::invalid("log-range count", "≥ 1")),
        1 => Ok(vec![lo]),
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => f.write_str("ok"),
            RowStatus::Failed(why) => write!(f, "failed:{why}"),
        }
    }
}

/// Terminal observables of one run. Energies in cm⁻¹; NaN when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub e_d_cm1: f64,
    pub e_c_peak_cm1: f64,
    pub e_e_max_cm1: f64,
    pub p_e_max: f64,
    pub p_e_final: f64,
    pub status: RowStatus,
}

impl SweepRow {
    fn failed(value: f64, err: &Error) -> Self {
        SweepRow {
            value,
            e_d_cm1: f64::NAN,
            e_c_peak_cm1: f64::NAN,
            e_e_max_cm1: f64::NAN,
            p_e_max: f64::NAN,
            p_e_final: f64::NAN,
            status: RowStatus::Failed(err.to_string()),
        }
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Runs a single row.
pub fn run_row(params: &Params, value: f64) -> SweepRow {
    match integrate(params) {
        Ok(traj) => SweepRow {
            value,
            e_d_cm1: au_to_cm1(*traj.e_d.last().expect("trajectory has frames")),
            e_c_peak_cm1: au_to_cm1(max_of(&traj.e_c)),
            e_e_max_cm1: au_to_cm1(max_of(&traj.e_e)),
            p_e_max: max_of(&traj.p_e),
            p_e_final: *traj.p_e.last().expect("trajectory has frames"),
            status: RowStatus::Ok,
        },
        Err(e) => SweepRow::failed(value, &e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub param: SweepParam,
    pub observable_time: f64,
    pub rows: Vec<SweepRow>,
    pub fit_window: Option<Range<usize>>,
    /// Power-law fit of `E_D` against the swept value over `fit_window`.
    pub fit: Option<PowerLawFit>,
    /// Why a requested fit was not produced.
    pub fit_error: Option<String>,
}

impl SweepTable {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn e_d(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.e_d_cm1).collect()
    }
}

/// Runs every row on the current rayon pool (use `ThreadPool::install` to
/// bound the worker count). Individual run failures are reported per row.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let rows: Vec<SweepRow> = (0..spec.values.len())
        .into_par_iter()
        .map(|i| run_row(&spec.row_params(i), spec.values[i]))
        .collect();
    let (fit, fit_error) = match &spec.fit_window {
        None => (None, None),
        Some(w) => match fit_rows(&rows[w.clone()]) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    Ok(SweepTable {
        param: spec.param,
        observable_time: spec.observable_time,
        rows,
        fit_window: spec.fit_window.clone(),
        fit,
        fit_error,
    })
}

fn fit_rows(rows: &[SweepRow]) -> Result<PowerLawFit> {
    if let Some(r) = rows.iter().find(|r| !r.status.is_ok()) {
        return Err(Error::Fit(format!(
            "row with value {} failed ({}); fit skipped",
            r.value, r.status
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.e_d_cm1).collect();
    fit_power_law(&xs, &ys)
}

/// Where `E_D` peaks in a cavity-frequency scan and how sharply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSummary {
    /// False when no successful row has a positive `E_D`.
    pub defined: bool,
    pub peak_omega_c: f64,
    /// `ω_c − ω_v` at the peak.
    pub peak_detuning: f64,
    pub peak_e_d_cm1: f64,
    /// `E_D` at the most-detuned row; with one row at each end equally far
    /// out, the larger of the two.
    pub edge_e_d_cm1: f64,
    /// `peak_e_d_cm1 / edge_e_d_cm1` (infinite when the edge is zero).
    pub contrast: f64,
}

/// Runs a cavity-frequency scan and locates the resonance.
pub fn detuning_scan(spec: &SweepSpec) -> Result<(SweepTable, ResonanceSummary)> {
    if spec.param != SweepParam::OmegaC {
        return Err(Error::invalid("param", "omega_c for a detuning scan"));
    }
    spec.validate()?;
    let wv = spec.base.omega_v;
    let lo = spec.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spec
        .values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lo <= wv && wv <= hi) {
        return Err(Error::invalid("values", "a range bracketing omega_v"));
    }
    let table = run_sweep(spec)?;
    let summary = resonance_summary(&table.rows, wv);
    Ok((table, summary))
}

/// Summarizes already computed scan rows against the bright-mode frequency.
pub fn resonance_summary(rows: &[SweepRow], omega_v: f64) -> ResonanceSummary {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.status.is_ok()).collect();
    let undefined = ResonanceSummary {
        defined: false,
        peak_omega_c: f64::NAN,
        peak_detuning: f64::NAN,
        peak_e_d_cm1: f64::NAN,
        edge_e_d_cm1: f64::NAN,
        contrast: f64::NAN,
    };
    let Some(peak) = ok
        .iter()
        .copied()
        .filter(|r| r.e_d_cm1 > 0.0)
        .max_by(|a, b| a.e_d_cm1.total_cmp(&b.e_d_cm1))
    else {
        return undefined;
    };
    let far = ok
        .iter()
        .map(|r| (r.value - omega_v).abs())
        .fold(0.0, f64::max);
    let tol = 1e-9 * far.max(omega_v.abs());
    let edge = ok
        .iter()
        .filter(|r| (r.value - omega_v).abs() >= far - tol)
        .map(|r| r.e_d_cm1)
        .fold(f64::NEG_INFINITY, f64::max);
    ResonanceSummary {
        defined: true,
        peak_omega_c: peak.value,
        peak_detuning: peak.value - omega_v,
        peak_e_d_cm1: peak.e_d_cm1,
        edge_e_d_cm1: edge,
        contrast: if edge > 0.0 {
            peak.e_d_cm1 / edge
        } else {
            f64::INFINITY
        },
    }
}
