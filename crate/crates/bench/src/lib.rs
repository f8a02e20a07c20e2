//! Shared fixtures for the benchmarks.

use casimir_core::model::initial_state;
use casimir_core::{Params, SystemState};

/// Default parameters stopped at `t_final` a.u.
pub fn params_until(t_final: f64) -> Params {
    Params {
        t_final,
        ..Params::default()
    }
}

/// A state just after the pulse with every degree of freedom displaced, so
/// no term in the right-hand side is trivially zero.
pub fn busy_state(params: &Params) -> SystemState {
    let mut s = initial_state(params);
    s.rho = casimir_core::ElectronicDensityMatrix::from_population(
        0.1,
        casimir_core::Complex64::new(0.2, -0.05),
    );
    s.q_c = -5.0;
    s.q_b = 0.3;
    for (k, q) in s.q_d.iter_mut().enumerate() {
        *q = 1e-3 * (k as f64).sin();
    }
    s.t = 1000.0;
    s
}
