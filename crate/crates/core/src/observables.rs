//! Component energies, populations, polariton frequencies, the Rabi
//! splitting measured from a trajectory, and lifetime fits.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::fit::linear_fit;
use crate::model::total_dipole;
use crate::params::Params;
use crate::state::{ElectronicDensityMatrix, SystemState};
use crate::units;
use crate::{Error, Result};

/// Component energies in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Bare electronic energy `n_e·ω_e·P_e`.
    pub e_e: f64,
    /// Photonic energy about the polarization-displaced minimum.
    pub e_c: f64,
    pub e_b: f64,
    /// Summed over all explicit dark oscillators.
    pub e_d: f64,
}

impl EnergyReport {
    /// Mean-field `⟨H_PF⟩` evaluated with `⟨μ⟩²` in the self-energy.
    pub fn total(&self) -> f64 {
        self.e_e + self.e_c + self.e_b + self.e_d
    }
}

pub fn energies(state: &SystemState, params: &Params) -> EnergyReport {
    let mu = total_dipole(&state.rho.0, state.q_b, params);
    let wc = params.omega_c;
    let displaced = state.q_c + params.lambda_c * mu / wc;
    let wv2 = params.omega_v * params.omega_v;
    let e_d = state
        .q_d
        .iter()
        .zip(&state.p_d)
        .zip(&state.omega_d)
        .map(|((q, p), w)| 0.5 * p * p + 0.5 * w * w * q * q)
        .sum();
    EnergyReport {
        e_e: params.n_e * params.omega_e * state.rho.excited_population(),
        e_c: 0.5 * state.p_c * state.p_c + 0.5 * wc * wc * displaced * displaced,
        e_b: 0.5 * state.p_b * state.p_b + 0.5 * wv2 * state.q_b * state.q_b,
        e_d,
    }
}

pub fn excited_population(rho: &ElectronicDensityMatrix) -> f64 {
    rho.excited_population()
}

/// Normal modes of the coupled cavity / bright-mode oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonPair {
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub splitting: f64,
    /// Photonic content angle of the lower polariton: its eigenvector is
    /// `(sin θ, cos θ)` in the `(q_c, q_B)` basis, so θ → 0 when the lower
    /// mode is purely vibrational.
    pub mixing_angle: f64,
}

/// Force-constant matrix of `(q_c, q_B)` with the electrons frozen in the
/// ground configuration.
pub fn polariton_hessian(params: &Params) -> [[f64; 2]; 2] {
    let s = params.bright_dipole_slope();
    let off = params.omega_c * params.lambda_c * s;
    [
        [params.omega_c * params.omega_c, off],
        [
            off,
            params.omega_v * params.omega_v + params.lambda_c * params.lambda_c * s * s,
        ],
    ]
}

pub fn polariton_frequencies(params: &Params) -> Result<PolaritonPair> {
    if !(params.lambda_c >= 0.0) {
        return Err(Error::invalid("lambda_c", "≥ 0"));
    }
    let [[a, b], [_, d]] = polariton_hessian(params);
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let lo = mean - half_gap;
    // det / hi is the cancellation-free form of the smaller root
    let hi = mean + half_gap;
    let lo = if lo.abs() < 1e-8 * hi {
        (a * d - b * b) / hi
    } else {
        lo
    };
    if !(lo > 0.0) {
        return Err(Error::Unphysical(format!(
            "non-positive normal-mode eigenvalue {lo:e}"
        )));
    }
    // Lower eigenvector (x_c, x_B) of [[a, b], [b, d]] for eigenvalue lo.
    let (x_c, x_b) = if b == 0.0 {
        if a <= d {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        (b, lo - a)
    };
    let mixing_angle = x_c.abs().atan2(x_b.abs());
    let (omega_minus, omega_plus) = (lo.sqrt(), hi.sqrt());
    Ok(PolaritonPair {
        omega_minus,
        omega_plus,
        splitting: omega_plus - omega_minus,
        mixing_angle,
    })
}

/// How [`rabi_splitting_from_trajectory`] obtained its estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RabiMethod {
    Spectral,
    PeakTiming,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiEstimate {
    pub period_fs: f64,
    pub splitting_cm1: f64,
    pub splitting_au: f64,
    /// Lower and upper line positions, a.u. (spectral method only).
    pub lines_au: Option<(f64, f64)>,
    /// Frequency resolution of the spectrum, a.u.
    pub bin_width_au: f64,
    pub method: RabiMethod,
}

/// One-sided amplitude spectrum of a uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Angular frequencies, a.u.
    pub omega: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub bin_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub omega: f64,
    pub amplitude: f64,
}

/// Rectangular-window DFT of `values` (mean removed) sampled every `dt`.
pub fn amplitude_spectrum(values: &[f64], dt: f64) -> Spectrum {
    let n = values.len();
    if n < 2 {
        return Spectrum {
            omega: Vec::new(),
            amplitude: Vec::new(),
            bin_width: f64::INFINITY,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin_width = 2.0 * PI / (n as f64 * dt);
    let half = n / 2;
    let scale = 2.0 / n as f64;
    Spectrum {
        omega: (0..=half).map(|k| k as f64 * bin_width).collect(),
        amplitude: buf[..=half].iter().map(|z| z.norm() * scale).collect(),
        bin_width,
    }
}

impl Spectrum {
    /// Local maxima, strongest first, refined by parabolic interpolation on
    /// the amplitude. Peaks closer than `min_separation` bins to a stronger
    /// one are dropped.
    pub fn peaks(&self, min_separation: usize) -> Vec<SpectralPeak> {
        let a = &self.amplitude;
        if a.len() < 3 {
            return Vec::new();
        }
        let mut idx: Vec<usize> = (1..a.len() - 1)
            .filter(|&k| a[k] > 0.0 && a[k] > a[k - 1] && a[k] >= a[k + 1])
            .collect();
        idx.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
        let mut kept: Vec<usize> = Vec::new();
        for k in idx {
            if kept.iter().all(|&s| s.abs_diff(k) >= min_separation) {
                kept.push(k);
            }
        }
        kept.into_iter()
            .map(|k| {
                let (l, c, r) = (a[k - 1], a[k], a[k + 1]);
                let denom = l - 2.0 * c + r;
                let shift = if denom != 0.0 {
                    0.5 * (l - r) / denom
                } else {
                    0.0
                };
                SpectralPeak {
                    omega: (k as f64 + shift) * self.bin_width,
                    amplitude: c - 0.25 * (l - r) * shift,
                }
            })
            .collect()
    }
}

/// Secondary lines weaker than this fraction of the strongest are treated as
/// leakage rather than a resolved polariton branch.
const MIN_PEAK_RATIO: f64 = 0.02;
const MIN_PEAK_SEPARATION_BINS: usize = 5;

/// Extracts the polariton beating from the post-pulse bright-mode signal.
///
/// The two strongest lines of the `q_B` spectrum give the splitting; when
/// only one line resolves, the spacing of successive `E_B` maxima is used.
pub fn rabi_splitting_from_trajectory(traj: &Trajectory) -> Result<RabiEstimate> {
    let pulse = &traj.params.pulse;
    rabi_splitting_from_series(
        &traj.times,
        &traj.q_b,
        &traj.e_b,
        pulse.t_start + 5.0 * pulse.sigma,
    )
}

/// As [`rabi_splitting_from_trajectory`] for bare recorded series. Frames
/// after `window_start` are analysed; their spacing is taken from the first
/// two frames, and a final off-grid frame is dropped.
pub fn rabi_splitting_from_series(
    times: &[f64],
    q_b: &[f64],
    e_b: &[f64],
    window_start: f64,
) -> Result<RabiEstimate> {
    if times.len() < 2 || q_b.len() != times.len() || e_b.len() != times.len() {
        return Err(Error::NoBeating);
    }
    let dt = times[1] - times[0];
    let start = times
        .iter()
        .position(|&t| t > window_start)
        .unwrap_or(times.len());
    let mut end = times.len();
    if end > start + 2 {
        let last_gap = times[end - 1] - times[end - 2];
        if (last_gap - dt).abs() > 1e-9 * dt {
            end -= 1;
        }
    }
    if end <= start + 3 {
        return Err(Error::NoBeating);
    }
    let q_b = &q_b[start..end];
    if q_b.iter().all(|&q| q == 0.0) {
        return Err(Error::NoBeating);
    }
    let spec = amplitude_spectrum(q_b, dt);
    let peaks = spec.peaks(MIN_PEAK_SEPARATION_BINS);
    if peaks.len() >= 2 && peaks[1].amplitude >= MIN_PEAK_RATIO * peaks[0].amplitude {
        let (lo, hi) = if peaks[0].omega < peaks[1].omega {
            (peaks[0].omega, peaks[1].omega)
        } else {
            (peaks[1].omega, peaks[0].omega)
        };
        let splitting = hi - lo;
        return Ok(RabiEstimate {
            period_fs: units::au_to_fs(2.0 * PI / splitting),
            splitting_cm1: units::au_to_cm1(splitting),
            splitting_au: splitting,
            lines_au: Some((lo, hi)),
            bin_width_au: spec.bin_width,
            method: RabiMethod::Spectral,
        });
    }
    let period = beating_period(&times[start..end], &e_b[start..end]).ok_or(Error::NoBeating)?;
    let splitting = 2.0 * PI / period;
    Ok(RabiEstimate {
        period_fs: units::au_to_fs(period),
        splitting_cm1: units::au_to_cm1(splitting),
        splitting_au: splitting,
        lines_au: None,
        bin_width_au: spec.bin_width,
        method: RabiMethod::PeakTiming,
    })
}

/// Mean spacing of the maxima of a beating envelope. The fast carrier is
/// removed by a moving average over the strongest spectral component.
fn beating_period(times: &[f64], values: &[f64]) -> Option<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) || values.len() < 8 {
        return None;
    }
    let dt = times[1] - times[0];
    let spec = amplitude_spectrum(values, dt);
    let carrier = spec.peaks(1).first().map(|p| p.omega)?;
    let window = ((2.0 * PI / carrier) / dt).round().max(1.0) as usize;
    let smooth: Vec<f64> = values
        .windows(window.min(values.len()))
        .map(|w| w.iter().sum::<f64>() / w.len() as f64)
        .collect();
    let maxima: Vec<usize> = (1..smooth.len().saturating_sub(1))
        .filter(|&k| smooth[k] > smooth[k - 1] && smooth[k] >= smooth[k + 1])
        .filter(|&k| smooth[k] > 0.05 * max)
        .collect();
    if maxima.len() < 3 {
        return None;
    }
    let span = (maxima[maxima.len() - 1] - maxima[0]) as f64 * dt;
    Some(span / (maxima.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    /// Decay time, a.u.; `f64::INFINITY` when the signal does not decay.
    pub tau: f64,
    pub r_squared: f64,
    pub low_confidence: bool,
}

/// Fits `ln(values)` against `times` and returns `τ = -1/slope`.
pub fn fit_exponential_lifetime(times: &[f64], values: &[f64]) -> Result<LifetimeFit> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::Fit(format!(
            "non-positive value {v:e} at index {i} in lifetime window"
        )));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = linear_fit(times, &logs)?;
    let scale = times.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(1.0);
    // below this the signal changes by less than 1e-12 over the window
    let tau = if line.slope < -1e-12 / scale {
        -1.0 / line.slope
    } else {
        f64::INFINITY
    };
    Ok(LifetimeFit {
        tau,
        r_squared: line.r_squared,
        low_confidence: line.r_squared < 0.9 || !tau.is_finite(),
    })
}
