use serde::{Deserialize, Serialize};

use crate::units;
use crate::{Error, Result};

/// Gaussian-enveloped carrier at the bare electronic frequency:
/// `E(t) = e0 · sin(ω_e t) · exp(-(t - t_start)² / σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub e0: f64,
    pub t_start: f64,
    pub sigma: f64,
}

impl Default for Pulse {
    fn default() -> Self {
        Pulse {
            e0: 0.01,
            t_start: 500.0,
            sigma: 100.0,
        }
    }
}

/// How the explicit dark-mode frequencies are laid out in their window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
#[derive(Default)]
pub enum DarkSampling {
    #[default]
    MidpointGrid,
    SeededUniform {
        seed: u64,
    },
}

/// Multiplier on one of the mean-field terms of the single-TLS Hamiltonian.
///
/// `Single` keeps the reduced Hamiltonian's printed `½λ²` prefactor on the
/// term; `Double` gives `λ²`, the coefficient obtained by differentiating the
/// mean-field energy `½ω_c²(q_c + λ⟨μ⟩/ω_c)²` with respect to ρ. Only
/// `Double` on both terms conserves that energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[derive(Default)]
pub enum TermFactor {
    Single,
    #[default]
    Double,
}

impl TermFactor {
    pub fn factor(self) -> f64 {
        match self {
            TermFactor::Single => 1.0,
            TermFactor::Double => 2.0,
        }
    }
}

impl From<TermFactor> for u8 {
    fn from(c: TermFactor) -> u8 {
        match c {
            TermFactor::Single => 1,
            TermFactor::Double => 2,
        }
    }
}

impl TryFrom<u8> for TermFactor {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(TermFactor::Single),
            2 => Ok(TermFactor::Double),
            _ => Err(Error::invalid("term factor", "1 or 2")),
        }
    }
}

/// Physical and numerical parameters of the coupled system, in atomic units.
///
/// `n_e` and `n_v` are real-valued: only `n_e` and `√n_v` enter the
/// equations of motion and sweeps cover many decades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub omega_e: f64,
    pub omega_v: f64,
    pub omega_c: f64,
    pub lambda_c: f64,
    pub d_eg: f64,
    pub d_gg: f64,
    pub d_ee: f64,
    pub d_v: f64,
    pub n_e: f64,
    pub n_v: f64,
    pub gamma_e: f64,
    pub gamma_c: f64,
    /// Bright–dark coupling before the `1/√n_dark` normalization.
    pub gamma_v_total: f64,
    pub n_dark: usize,
    pub dark_omega_min: f64,
    pub dark_omega_max: f64,
    pub dark_sampling: DarkSampling,
    pub pulse: Pulse,
    /// Multiplier of `½λ²·μ_v·μ̂_e,s`.
    pub cross_term: TermFactor,
    /// Multiplier of `½λ²·(n_e - 1)·⟨μ̂_e,s⟩·μ̂_e,s`.
    pub collective_term: TermFactor,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            omega_e: 0.1,
            omega_v: 0.01,
            omega_c: 0.01,
            lambda_c: 2.0e-6,
            d_eg: 0.5,
            d_gg: 0.0,
            d_ee: 1.0,
            d_v: 0.01,
            n_e: 1.0e10,
            n_v: 1.0e10,
            gamma_e: 1.0e-5,
            gamma_c: 2.0e-5,
            gamma_v_total: 2.0e-6,
            n_dark: 500,
            dark_omega_min: 0.007,
            dark_omega_max: 0.013,
            dark_sampling: DarkSampling::MidpointGrid,
            pulse: Pulse::default(),
            cross_term: TermFactor::Double,
            collective_term: TermFactor::Double,
            dt: 0.5,
            t_final: units::ps_to_au(5.0),
            record_stride: 50,
        }
    }
}

impl Params {
    /// Mean permanent dipole `(d_gg + d_ee) / 2`.
    pub fn d_bar(&self) -> f64 {
        0.5 * (self.d_gg + self.d_ee)
    }

    /// Permanent-dipole change on excitation, `d_ee - d_gg`.
    pub fn delta_d(&self) -> f64 {
        self.d_ee - self.d_gg
    }

    /// Per-mode bright–dark coupling `γ_v = gamma_v_total / √n_dark`.
    pub fn gamma_v(&self) -> f64 {
        if self.n_dark == 0 {
            0.0
        } else {
            self.gamma_v_total / (self.n_dark as f64).sqrt()
        }
    }

    /// `∂⟨μ⟩/∂q_B = √n_v · d_v`.
    pub fn bright_dipole_slope(&self) -> f64 {
        self.n_v.sqrt() * self.d_v
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(key, "> 0"))
            }
        }
        fn non_negative(key: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(key, "≥ 0"))
            }
        }
        fn finite(key: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(key, "finite"))
            }
        }

        positive("omega_e", self.omega_e)?;
        positive("omega_v", self.omega_v)?;
        positive("omega_c", self.omega_c)?;
        non_negative("lambda_c", self.lambda_c)?;
        finite("d_eg", self.d_eg)?;
        finite("d_gg", self.d_gg)?;
        finite("d_ee", self.d_ee)?;
        finite("d_v", self.d_v)?;
        if !(self.n_e.is_finite() && self.n_e >= 1.0) {
            return Err(Error::invalid("n_e", "≥ 1"));
        }
        if !(self.n_v.is_finite() && self.n_v >= 1.0) {
            return Err(Error::invalid("n_v", "≥ 1"));
        }
        non_negative("gamma_e", self.gamma_e)?;
        non_negative("gamma_c", self.gamma_c)?;
        non_negative("gamma_v_total", self.gamma_v_total)?;
        if self.n_dark > 0 {
            positive("dark_omega_min", self.dark_omega_min)?;
            positive("dark_omega_max", self.dark_omega_max)?;
            if self.dark_omega_min >= self.dark_omega_max {
                return Err(Error::invalid(
                    "dark_omega_max",
                    "greater than dark_omega_min",
                ));
            }
        }
        non_negative("E0", self.pulse.e0)?;
        finite("t_start", self.pulse.t_start)?;
        positive("sigma", self.pulse.sigma)?;
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride", "≥ 1"));
        }
        Ok(())
    }
}
