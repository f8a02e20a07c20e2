use casimir_core::dynamics::{integrate, integrate_from};
use casimir_core::model::initial_state;
use casimir_core::units::ps_to_au;
use casimir_core::{ElectronicDensityMatrix, Params, Pulse};
use num_complex::Complex64;
use proptest::prelude::*;

fn conservative(n_dark: usize) -> Params {
    Params {
        gamma_e: 0.0,
        gamma_c: 0.0,
        gamma_v_total: 0.0,
        n_dark,
        pulse: Pulse {
            e0: 0.0,
            ..Pulse::default()
        },
        t_final: ps_to_au(1.0),
        record_stride: 200,
        ..Params::default()
    }
}

fn max_relative_drift(energy: &[f64]) -> f64 {
    let e0 = energy[0];
    energy
        .iter()
        .map(|e| ((e - e0) / e0).abs())
        .fold(0.0, f64::max)
}

#[test]
fn conservative_energy_held_over_one_picosecond() {
    let p = conservative(8);
    let mut s = initial_state(&p);
    s.rho = ElectronicDensityMatrix::from_population(0.4, Complex64::new(0.3, 0.1));
    s.q_c = 50.0;
    s.q_b = -2.0;
    s.p_b = 0.01;
    let traj = integrate_from(s, &p).unwrap();
    let drift = max_relative_drift(&traj.total_energy());
    assert!(drift < 1e-6, "relative drift {drift:e}");
}

#[test]
fn decoupled_bath_stays_at_rest() {
    let p = Params {
        gamma_v_total: 0.0,
        n_dark: 16,
        t_final: 3000.0,
        ..Params::default()
    };
    let traj = integrate(&p).unwrap();
    assert!(traj.final_state.q_d.iter().all(|&q| q == 0.0));
    assert!(traj.final_state.p_d.iter().all(|&q| q == 0.0));
    assert!(traj.e_d.iter().all(|&e| e == 0.0));
}

#[test]
fn no_coupling_no_field_energy() {
    let p = Params {
        lambda_c: 0.0,
        n_dark: 16,
        t_final: 3000.0,
        ..Params::default()
    };
    let traj = integrate(&p).unwrap();
    assert!(traj.p_e.iter().cloned().fold(0.0, f64::max) > 0.01);
    for series in [&traj.e_c, &traj.e_b, &traj.e_d, &traj.q_c] {
        assert!(series.iter().all(|&x| x == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn conservation_for_random_excited_states(
        pe in 0.0f64..1.0,
        phase in 0.0f64..std::f64::consts::TAU,
        qc in -100.0f64..100.0,
        qb in -5.0f64..5.0,
    ) {
        let p = Params { t_final: ps_to_au(0.2), ..conservative(0) };
        let mut s = initial_state(&p);
        let c = (pe * (1.0 - pe)).sqrt() * 0.9;
        s.rho = ElectronicDensityMatrix::from_population(pe, Complex64::from_polar(c, phase));
        s.q_c = qc;
        s.q_b = qb;
        let traj = integrate_from(s, &p).unwrap();
        let drift = max_relative_drift(&traj.total_energy());
        prop_assert!(drift < 1e-6, "drift {:e}", drift);
        prop_assert!(traj.diagnostics.max_trace_error < 1e-12);
        prop_assert!(traj.diagnostics.min_eigenvalue > -1e-9);
    }
}
