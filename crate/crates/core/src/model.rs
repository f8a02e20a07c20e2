//! Dipole operators, the reduced single-TLS Hamiltonian, the driving pulse
//! and initial-state construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{Matrix2, E, G};
use crate::params::{DarkSampling, Params, Pulse};
use crate::state::{ElectronicDensityMatrix, SystemState};

/// Single-molecule electronic dipole operator.
///
/// Diagonal is `(d_gg, d_ee)` and the off-diagonal is `d_eg`, which is
/// `d̄·1 + (Δd/2)·(|e⟩⟨e| - |g⟩⟨g|) + d_eg·σ_x`.
pub fn electronic_dipole_matrix(params: &Params) -> [[f64; 2]; 2] {
    [[params.d_gg, params.d_eg], [params.d_eg, params.d_ee]]
}

/// `Re Tr(ρ μ̂_e,s)` for the real symmetric dipole operator.
pub fn single_dipole_expectation(rho: &Matrix2, params: &Params) -> f64 {
    let mu = electronic_dipole_matrix(params);
    let tr = rho[(G, G)] * mu[G][G]
        + rho[(G, E)] * mu[E][G]
        + rho[(E, G)] * mu[G][E]
        + rho[(E, E)] * mu[E][E];
    debug_assert!(
        tr.im.abs() < 1e-10 * (1.0 + tr.re.abs()),
        "Tr(ρμ) has imaginary part {}",
        tr.im
    );
    tr.re
}

/// Mean-field total dipole `√n_v d_v q_B + n_e Re Tr(ρ μ̂_e,s)`.
pub fn mean_total_dipole(state: &SystemState, params: &Params) -> f64 {
    total_dipole(&state.rho.0, state.q_b, params)
}

pub(crate) fn total_dipole(rho: &Matrix2, q_b: f64, params: &Params) -> f64 {
    params.bright_dipole_slope() * q_b + params.n_e * single_dipole_expectation(rho, params)
}

/// `E(t) = E0 · sin(ω_e t) · exp(-(t - t_start)² / σ²)`
pub fn pulse_field(t: f64, pulse: &Pulse, omega_e: f64) -> f64 {
    if pulse.e0 == 0.0 {
        return 0.0;
    }
    let x = (t - pulse.t_start) / pulse.sigma;
    pulse.e0 * (omega_e * t).sin() * (-x * x).exp()
}

/// Reduced Hamiltonian acting on the representative TLS at time `t`:
///
/// `ω_e|e⟩⟨e| + ω_c λ_c q_c μ̂ + ½λ_c²[μ̂² + a(n_e - 1)⟨μ̂⟩μ̂ + b μ_v μ̂] + d_eg E(t) σ_x`
///
/// with `a`, `b` the [`TermFactor`](crate::TermFactor)s of `params`. The
/// pulse enters as a Hamiltonian term.
pub fn effective_hamiltonian(state: &SystemState, params: &Params, t: f64) -> Matrix2 {
    effective_hamiltonian_parts(&state.rho.0, state.q_c, state.q_b, params, t)
}

pub(crate) fn effective_hamiltonian_parts(
    rho: &Matrix2,
    q_c: f64,
    q_b: f64,
    params: &Params,
    t: f64,
) -> Matrix2 {
    let [[mu_gg, mu_ge], [mu_eg, mu_ee]] = electronic_dipole_matrix(params);
    // μ̂² of the real symmetric operator
    let sq_gg = mu_gg * mu_gg + mu_ge * mu_eg;
    let sq_ge = mu_gg * mu_ge + mu_ge * mu_ee;
    let sq_ee = mu_eg * mu_ge + mu_ee * mu_ee;

    let lam = params.lambda_c;
    let mu_avg = single_dipole_expectation(rho, params);
    let mu_v = params.bright_dipole_slope() * q_b;

    // Coefficient multiplying μ̂ (linear terms) and μ̂² (self-energy).
    let collective = params.collective_term.factor() * (params.n_e - 1.0) * mu_avg;
    let cross = params.cross_term.factor() * mu_v;
    let linear = params.omega_c * lam * q_c + 0.5 * lam * lam * (collective + cross);
    let quad = 0.5 * lam * lam;
    let drive = params.d_eg * pulse_field(t, &params.pulse, params.omega_e);

    let h_gg = linear * mu_gg + quad * sq_gg;
    let h_ee = params.omega_e + linear * mu_ee + quad * sq_ee;
    let h_ge = linear * mu_ge + quad * sq_ge + drive;
    Matrix2::from_real([[h_gg, h_ge], [h_ge, h_ee]])
}

/// Dark-mode frequencies for the configured sampling scheme.
pub fn dark_frequencies(params: &Params) -> Vec<f64> {
    let n = params.n_dark;
    let (lo, hi) = (params.dark_omega_min, params.dark_omega_max);
    match params.dark_sampling {
        DarkSampling::MidpointGrid => {
            let width = (hi - lo) / n as f64;
            (1..=n).map(|k| lo + (k as f64 - 0.5) * width).collect()
        }
        DarkSampling::SeededUniform { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
            w.sort_by(f64::total_cmp);
            w
        }
    }
}

/// Global ground state with the cavity displaced by the ground-state
/// molecular polarization, `q_c = -(λ_c/ω_c)·n_e·d_gg`.
pub fn initial_state(params: &Params) -> SystemState {
    let mut s = SystemState::at_rest(dark_frequencies(params));
    s.rho = ElectronicDensityMatrix::ground();
    s.q_c = -(params.lambda_c / params.omega_c) * params.n_e * params.d_gg;
    s
}
