//! Closed-form predictions of the photon and vibrational energy gained from a
//! sudden change of the collective permanent dipole, an oracle that checks
//! them through [`energies`](crate::observables::energies), and log-log
//! power-law fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fit::linear_fit;
use crate::observables::{energies, polariton_frequencies};
use crate::params::Params;
use crate::state::{ElectronicDensityMatrix, SystemState};
use crate::{Error, Result};

/// Spectral overlap factor `ρ(ω_v − ω_c)` between the cavity and the
/// vibrational bright mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResonanceWeight {
    /// 1 inside `|δ| ≤ half_width`, 0 outside.
    Indicator { half_width: f64 },
    /// `1 / (1 + (δ / half_width)²)`.
    Lorentzian { half_width: f64 },
    /// Always 1.
    Constant,
}

impl ResonanceWeight {
    /// Lorentzian whose half-width is half the polariton splitting.
    pub fn from_splitting(params: &Params) -> Result<Self> {
        let pair = polariton_frequencies(params)?;
        let half_width = 0.5 * pair.splitting;
        let w = ResonanceWeight::Lorentzian { half_width };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResonanceWeight::Indicator { half_width }
            | ResonanceWeight::Lorentzian { half_width } => {
                if half_width.is_finite() && half_width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("half_width", "> 0"))
                }
            }
            ResonanceWeight::Constant => Ok(()),
        }
    }

    pub fn weight(&self, detuning: f64) -> f64 {
        match *self {
            ResonanceWeight::Indicator { half_width } => {
                if detuning.abs() <= half_width {
                    1.0
                } else {
                    0.0
                }
            }
            ResonanceWeight::Lorentzian { half_width } => {
                let x = detuning / half_width;
                1.0 / (1.0 + x * x)
            }
            ResonanceWeight::Constant => 1.0,
        }
    }
}

/// `½ λ² n_e² (P_e Δd + 2 d_eg Re ρ_eg)²`: photon energy released when the
/// electronic state is switched from the ground state to one with the given
/// population and real coherence.
pub fn predicted_photon_gain(params: &Params, p_e: f64, re_rho_eg: f64) -> f64 {
    let lam = params.lambda_c;
    let shift = p_e * params.delta_d() + 2.0 * params.d_eg * re_rho_eg;
    let collective = params.n_e * shift;
    0.5 * lam * lam * collective * collective
}

/// Long-time form with the coherence dephased: `½ λ² n_e² P_e² Δd²`.
pub fn predicted_photon_gain_longtime(params: &Params, p_e: f64) -> f64 {
    predicted_photon_gain(params, p_e, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibrationalGain {
    /// Collective gain in atomic units.
    pub total: f64,
    /// `total / n_v`.
    pub per_oscillator: f64,
    pub weight: f64,
}

/// `½ · ΔE_c(long time) · ρ(ω_v − ω_c)`.
pub fn predicted_vibrational_gain(
    params: &Params,
    p_e: f64,
    weight: &ResonanceWeight,
) -> VibrationalGain {
    let w = weight.weight(params.omega_v - params.omega_c);
    let total = 0.5 * predicted_photon_gain_longtime(params, p_e) * w;
    VibrationalGain {
        total,
        per_oscillator: total / params.n_v,
        weight: w,
    }
}

/// Photon energy gained by a sudden quench, evaluated through the energy
/// function rather than the closed form.
///
/// Before the quench every TLS is in its ground state and the cavity sits
/// at its displaced equilibrium. The density matrix is then replaced by
/// `[[1 − P_e, c], [c, P_e]]` while `q_c` and `q_B` are held fixed.
pub fn quench_oracle(params: &Params, p_e: f64, re_rho_eg: f64) -> f64 {
    let mut state = SystemState::at_rest(Vec::new());
    let mu_before = crate::model::mean_total_dipole(&state, params);
    state.q_c = -params.lambda_c * mu_before / params.omega_c;
    let before = energies(&state, params).e_c;
    state.rho = ElectronicDensityMatrix::from_population(p_e, Complex64::new(re_rho_eg, 0.0));
    let after = energies(&state, params).e_c;
    after - before
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `y = prefactor · x^exponent` on `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!(
            "length mismatch: {} x values, {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::Fit(
            "power-law fit needs at least three points".into(),
        ));
    }
    if let Some((i, _)) = xs
        .iter()
        .zip(ys)
        .enumerate()
        .find(|(_, (x, y))| !(x.is_finite() && **x > 0.0 && y.is_finite() && **y > 0.0))
    {
        return Err(Error::Fit(format!(
            "point {i} ({}, {}) is not strictly positive",
            xs[i], ys[i]
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let f = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit {
        exponent: f.slope,
        prefactor: f.intercept.exp(),
        r_squared: f.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn photon_gain_examples() {
        let p = Params::default();
        assert_eq!(predicted_photon_gain(&p, 0.0, 0.0), 0.0);
        assert_relative_eq!(
            predicted_photon_gain(&p, 1.0, 0.0),
            2.0e8,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            predicted_photon_gain_longtime(&p, 0.01),
            2.0e4,
            max_relative = 1e-12
        );
        let flat = Params {
            d_ee: 0.0,
            ..Params::default()
        };
        assert_eq!(predicted_photon_gain(&flat, 0.7, 0.0), 0.0);
    }

    #[test]
    fn vibrational_gain_examples() {
        let p = Params::default();
        for w in [
            ResonanceWeight::Constant,
            ResonanceWeight::Indicator { half_width: 1e-3 },
            ResonanceWeight::Lorentzian { half_width: 1e-3 },
            ResonanceWeight::from_splitting(&p).unwrap(),
        ] {
            let g = predicted_vibrational_gain(&p, 0.3, &w);
            assert_eq!(g.total, 0.5 * predicted_photon_gain_longtime(&p, 0.3));
        }
        let g = predicted_vibrational_gain(&p, 0.01, &ResonanceWeight::from_splitting(&p).unwrap());
        assert_relative_eq!(g.total, 1.0e4, max_relative = 1e-12);
        assert_relative_eq!(g.per_oscillator, 1.0e-6, max_relative = 1e-12);
        assert!((crate::units::au_to_cm1(g.per_oscillator) - 0.22).abs() < 0.01);

        let detuned = Params {
            omega_c: 0.02,
            ..Params::default()
        };
        let ind = ResonanceWeight::Indicator { half_width: 1e-3 };
        assert_eq!(predicted_vibrational_gain(&detuned, 0.5, &ind).total, 0.0);
    }

    #[test]
    fn default_weight_half_width() {
        match ResonanceWeight::from_splitting(&Params::default()).unwrap() {
            ResonanceWeight::Lorentzian { half_width } => {
                assert!((half_width - 1.0e-3).abs() < 2e-5, "{half_width}")
            }
            other => panic!("{other:?}"),
        }
        assert!(ResonanceWeight::Lorentzian { half_width: 0.0 }
            .validate()
            .is_err());
    }

    #[test]
    fn quench_examples() {
        let p = Params::default();
        assert_eq!(quench_oracle(&p, 0.0, 0.0), 0.0);
        assert_relative_eq!(quench_oracle(&p, 0.5, 0.0), 5.0e7, max_relative = 1e-10);
    }

    #[test]
    fn quench_matches_closed_form_on_grid() {
        for params in [
            Params::default(),
            Params {
                d_gg: -0.3,
                d_ee: 0.8,
                n_e: 3.0e7,
                ..Params::default()
            },
        ] {
            for i in 0..=10 {
                for j in -4..=4 {
                    let (pe, c) = (i as f64 / 10.0, j as f64 / 10.0);
                    let oracle = quench_oracle(&params, pe, c);
                    let closed = predicted_photon_gain(&params, pe, c);
                    if closed == 0.0 {
                        assert!(oracle.abs() < 1e-10, "{pe} {c}: {oracle}");
                    } else {
                        assert_relative_eq!(oracle, closed, max_relative = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn power_law_examples() {
        let xs = [1.0, 2.0, 5.0, 10.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-6);
        assert!((f.prefactor - 3.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let f = fit_power_law(&xs, &[4.0; 4]).unwrap();
        assert!(f.exponent.abs() < 1e-6);
        assert!(fit_power_law(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_power_law(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(fit_power_law(&xs[..2], &ys[..2]).is_err());
    }

    proptest! {
        #[test]
        fn power_law_recovers_exponent(c in 1e-6f64..1e6, k in -5.0f64..5.0) {
            let xs: Vec<f64> = (0..8).map(|i| 10f64.powf(-1.0 + 0.3 * i as f64)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(k)).collect();
            let f = fit_power_law(&xs, &ys).unwrap();
            prop_assert!((f.exponent - k).abs() < 1e-6);
        }

        #[test]
        fn gains_are_homogeneous(s in 0.1f64..10.0, pe in 0.0f64..1.0) {
            let base = Params::default();
            let g0 = predicted_photon_gain(&base, pe, 0.0);
            let scaled = [
                Params { lambda_c: base.lambda_c * s, ..base.clone() },
                Params { n_e: base.n_e * s, ..base.clone() },
                Params { d_ee: base.d_ee * s, ..base.clone() },
            ];
            for p in &scaled {
                let g = predicted_photon_gain(p, pe, 0.0);
                prop_assert!((g - s * s * g0).abs() <= 1e-12 * g.abs().max(1e-300));
            }
            let g = predicted_photon_gain(&base, (pe * s).min(1.0), 0.0);
            let expected = g0 * ((pe * s).min(1.0) / pe.max(1e-300)).powi(2);
            if pe > 0.0 {
                prop_assert!((g - expected).abs() <= 1e-12 * g.abs().max(1e-300));
            }
        }

        #[test]
        fn vibrational_gain_even_in_detuning(d in 0.0f64..5e-3, hw in 1e-4f64..5e-3) {
            let w = ResonanceWeight::Lorentzian { half_width: hw };
            let plus = Params { omega_c: 0.01 + d, omega_v: 0.01, ..Params::default() };
            let minus = Params { omega_c: 0.01 - d, ..plus.clone() };
            let a = predicted_vibrational_gain(&plus, 0.2, &w).total;
            let b = predicted_vibrational_gain(&minus, 0.2, &w).total;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }
}
