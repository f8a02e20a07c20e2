//! TOML configuration: one table per physical subsystem, every key optional.
//!
//! ```toml
//! [cavity]
//! lambda_c = 1e-6
//!
//! [pulse]
//! E0 = 0.02
//! ```

use std::path::Path;

use casimir_core::{DarkSampling, Params, Pulse, TermFactor};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub system: System,
    pub electronic: Electronic,
    pub vibrational: Vibrational,
    pub cavity: Cavity,
    pub relaxation: Relaxation,
    pub pulse: PulseSection,
    pub integrator: Integrator,
    pub dark_bath: DarkBath,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct System {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_v: Option<f64>,
    /// 1 or 2; multiplier of the `½λ²·μ_v·μ̂` term.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_term_factor: Option<u8>,
    /// 1 or 2; multiplier of the `½λ²·(n_e−1)·⟨μ̂⟩·μ̂` term.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collective_term_factor: Option<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Electronic {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_eg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_gg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_ee: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Vibrational {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_v: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cavity {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_c: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Relaxation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_v_total: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    #[serde(rename = "E0", skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integrator {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// a.u.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    MidpointGrid,
    SeededUniform,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DarkBath {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_dark: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    /// Only used by `seeded-uniform`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn factor(key: &'static str, v: Option<u8>, default: TermFactor) -> Result<TermFactor, CliError> {
    match v {
        None => Ok(default),
        Some(x) => TermFactor::try_from(x)
            .map_err(|_| CliError::Validation(format!("{key} must be 1 or 2"))),
    }
}

fn count(key: &'static str, v: Option<u64>, default: usize) -> Result<usize, CliError> {
    match v {
        None => Ok(default),
        Some(x) => {
            usize::try_from(x).map_err(|_| CliError::Validation(format!("{key} must fit in usize")))
        }
    }
}

impl ConfigFile {
    /// Fills missing keys from [`Params::default`] and validates.
    pub fn to_params(&self) -> Result<Params, CliError> {
        let d = Params::default();
        let dark_sampling = match self.dark_bath.sampling {
            None if self.dark_bath.seed.is_some() => {
                return Err(CliError::Validation(
                    "dark_bath.seed requires sampling = \"seeded-uniform\"".into(),
                ))
            }
            None => d.dark_sampling,
            Some(Sampling::MidpointGrid) => DarkSampling::MidpointGrid,
            Some(Sampling::SeededUniform) => DarkSampling::SeededUniform {
                seed: self.dark_bath.seed.unwrap_or(0),
            },
        };
        let p = Params {
            omega_e: self.electronic.omega_e.unwrap_or(d.omega_e),
            omega_v: self.vibrational.omega_v.unwrap_or(d.omega_v),
            omega_c: self.cavity.omega_c.unwrap_or(d.omega_c),
            lambda_c: self.cavity.lambda_c.unwrap_or(d.lambda_c),
            d_eg: self.electronic.d_eg.unwrap_or(d.d_eg),
            d_gg: self.electronic.d_gg.unwrap_or(d.d_gg),
            d_ee: self.electronic.d_ee.unwrap_or(d.d_ee),
            d_v: self.vibrational.d_v.unwrap_or(d.d_v),
            n_e: self.system.n_e.unwrap_or(d.n_e),
            n_v: self.system.n_v.unwrap_or(d.n_v),
            gamma_e: self.relaxation.gamma_e.unwrap_or(d.gamma_e),
            gamma_c: self.relaxation.gamma_c.unwrap_or(d.gamma_c),
            gamma_v_total: self.relaxation.gamma_v_total.unwrap_or(d.gamma_v_total),
            n_dark: count("n_dark", self.dark_bath.n_dark, d.n_dark)?,
            dark_omega_min: self.dark_bath.omega_min.unwrap_or(d.dark_omega_min),
            dark_omega_max: self.dark_bath.omega_max.unwrap_or(d.dark_omega_max),
            dark_sampling,
            pulse: Pulse {
                e0: self.pulse.e0.unwrap_or(d.pulse.e0),
                t_start: self.pulse.t_start.unwrap_or(d.pulse.t_start),
                sigma: self.pulse.sigma.unwrap_or(d.pulse.sigma),
            },
            cross_term: factor(
                "cross_term_factor",
                self.system.cross_term_factor,
                d.cross_term,
            )?,
            collective_term: factor(
                "collective_term_factor",
                self.system.collective_term_factor,
                d.collective_term,
            )?,
            dt: self.integrator.dt.unwrap_or(d.dt),
            t_final: self.integrator.t_final.unwrap_or(d.t_final),
            record_stride: count(
                "record_stride",
                self.integrator.record_stride,
                d.record_stride,
            )?,
        };
        p.validate()?;
        Ok(p)
    }

    /// Fully populated config describing `p`.
    pub fn from_params(p: &Params) -> Self {
        let (sampling, seed) = match p.dark_sampling {
            DarkSampling::MidpointGrid => (Sampling::MidpointGrid, None),
            DarkSampling::SeededUniform { seed } => (Sampling::SeededUniform, Some(seed)),
        };
        ConfigFile {
            system: System {
                n_e: Some(p.n_e),
                n_v: Some(p.n_v),
                cross_term_factor: Some(p.cross_term.into()),
                collective_term_factor: Some(p.collective_term.into()),
            },
            electronic: Electronic {
                omega_e: Some(p.omega_e),
                d_eg: Some(p.d_eg),
                d_gg: Some(p.d_gg),
                d_ee: Some(p.d_ee),
            },
            vibrational: Vibrational {
                omega_v: Some(p.omega_v),
                d_v: Some(p.d_v),
            },
            cavity: Cavity {
                omega_c: Some(p.omega_c),
                lambda_c: Some(p.lambda_c),
            },
            relaxation: Relaxation {
                gamma_e: Some(p.gamma_e),
                gamma_c: Some(p.gamma_c),
                gamma_v_total: Some(p.gamma_v_total),
            },
            pulse: PulseSection {
                e0: Some(p.pulse.e0),
                t_start: Some(p.pulse.t_start),
                sigma: Some(p.pulse.sigma),
            },
            integrator: Integrator {
                dt: Some(p.dt),
                t_final: Some(p.t_final),
                record_stride: Some(p.record_stride as u64),
            },
            dark_bath: DarkBath {
                n_dark: Some(p.n_dark as u64),
                omega_min: Some(p.dark_omega_min),
                omega_max: Some(p.dark_omega_max),
                sampling: Some(sampling),
                seed,
            },
        }
    }
}

/// Section owning each bare key, for `--override key=value`.
const SECTIONS: &[(&str, &[&str])] = &[
    (
        "system",
        &["n_e", "n_v", "cross_term_factor", "collective_term_factor"],
    ),
    ("electronic", &["omega_e", "d_eg", "d_gg", "d_ee"]),
    ("vibrational", &["omega_v", "d_v"]),
    ("cavity", &["omega_c", "lambda_c"]),
    ("relaxation", &["gamma_e", "gamma_c", "gamma_v_total"]),
    ("pulse", &["E0", "t_start", "sigma"]),
    ("integrator", &["dt", "t_final", "record_stride"]),
    (
        "dark_bath",
        &["n_dark", "omega_min", "omega_max", "sampling", "seed"],
    ),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS
        .iter()
        .find(|(_, keys)| keys.contains(&key))
        .map(|(s, _)| *s)
}

fn override_value(raw: &str) -> Value {
    if let Ok(i) = raw.parse::<i64>() {
        Value::Integer(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        Value::Float(f)
    } else if let Ok(b) = raw.parse::<bool>() {
        Value::Boolean(b)
    } else {
        Value::String(raw.to_owned())
    }
}

/// Applies `key=value` or `section.key=value` to a parsed document.
pub fn apply_override(doc: &mut Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{spec}` is not key=value")))?;
    let path = path.trim();
    let (section, key) = match path.split_once('.') {
        Some((s, k)) => (s.to_owned(), k.to_owned()),
        None => {
            let s = section_of(path).ok_or_else(|| {
                CliError::Validation(format!("unknown configuration key `{path}`"))
            })?;
            (s.to_owned(), path.to_owned())
        }
    };
    let table = doc
        .entry(section.clone())
        .or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(table) = table else {
        return Err(CliError::Validation(format!(
            "`{section}` is not a section"
        )));
    };
    table.insert(key, override_value(raw.trim()));
    Ok(())
}

pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<Params, CliError> {
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("config parse error: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: ConfigFile = Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("config error: {e}")))?;
    cfg.to_params()
}

/// Reads and resolves a config file; `None` means all defaults.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &[String],
) -> Result<(Params, String), CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => String::new(),
    };
    let params = parse_config_str(&text, overrides)?;
    Ok((params, text))
}

/// TOML text that parses back to exactly `p`.
pub fn write_config(p: &Params) -> String {
    toml::to_string(&ConfigFile::from_params(p)).expect("config serializes")
}
