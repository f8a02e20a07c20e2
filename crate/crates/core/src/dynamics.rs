//! Equations of motion for the coupled electron / cavity / vibration system
//! and their fixed-step RK4 integration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix2, E, G};
use crate::model::{effective_hamiltonian_parts, initial_state, total_dipole};
use crate::observables::energies;
use crate::params::Params;
use crate::state::{read_rho, write_rho, SystemState, HEAD_LEN, IDX_PB, IDX_PC, IDX_QB, IDX_QC};
use crate::{Error, Result};

/// Time derivative of every component of a [`SystemState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub drho: Matrix2,
    pub dq_c: f64,
    pub dp_c: f64,
    pub dq_b: f64,
    pub dp_b: f64,
    pub dq_d: Vec<f64>,
    pub dp_d: Vec<f64>,
}

/// Amplitude damping with jump operator σ₋ = |g⟩⟨e|:
/// `γ_e (σ₋ρσ₊ - ½{σ₊σ₋, ρ})`.
pub fn lindblad_dissipator(rho: &Matrix2, gamma_e: f64) -> Matrix2 {
    let p_e = rho[(E, E)];
    let half = 0.5 * gamma_e;
    Matrix2::new(
        p_e * gamma_e,
        rho[(G, E)] * -half,
        rho[(E, G)] * -half,
        p_e * -gamma_e,
    )
}

/// Right-hand side evaluator over the flat state layout.
struct Rhs<'a> {
    params: &'a Params,
    omega_d_sq: Vec<f64>,
    gamma_v: f64,
    slope: f64,
}

impl<'a> Rhs<'a> {
    fn new(params: &'a Params, omega_d: &[f64]) -> Self {
        Rhs {
            params,
            omega_d_sq: omega_d.iter().map(|w| w * w).collect(),
            gamma_v: params.gamma_v(),
            slope: params.bright_dipole_slope(),
        }
    }

    fn eval(&self, y: &[f64], t: f64, dy: &mut [f64]) {
        let p = self.params;
        let n = self.omega_d_sq.len();
        let rho = read_rho(y);
        let (q_c, p_c, q_b, p_b) = (y[IDX_QC], y[IDX_PC], y[IDX_QB], y[IDX_PB]);

        let h = effective_hamiltonian_parts(&rho, q_c, q_b, p, t);
        let drho = h.commutator(&rho).scale_c(Complex64::new(0.0, -1.0))
            + lindblad_dissipator(&rho, p.gamma_e);
        write_rho(&drho, dy);

        let mu = total_dipole(&rho, q_b, p);
        let lam = p.lambda_c;
        let wc = p.omega_c;

        dy[IDX_QC] = p_c;
        dy[IDX_PC] = -wc * wc * q_c - wc * lam * mu - p.gamma_c * p_c;

        let (q_d, p_d) = y[HEAD_LEN..].split_at(n);
        let dark_sum: f64 = q_d.iter().sum();
        dy[IDX_QB] = p_b;
        dy[IDX_PB] = -p.omega_v * p.omega_v * q_b
            - wc * lam * q_c * self.slope
            - lam * lam * mu * self.slope
            - self.gamma_v * dark_sum;

        let (dq_d, dp_d) = dy[HEAD_LEN..].split_at_mut(n);
        dq_d.copy_from_slice(p_d);
        let g_qb = self.gamma_v * q_b;
        for ((dp, &q), &w2) in dp_d.iter_mut().zip(q_d).zip(&self.omega_d_sq) {
            *dp = -w2 * q - g_qb;
        }
    }
}

/// Full time derivative at time `t`.
pub fn rhs(state: &SystemState, params: &Params, t: f64) -> Result<StateDerivative> {
    let n = state.n_dark();
    let mut y = vec![0.0; state.flat_len()];
    state.write_flat(&mut y);
    let mut dy = vec![0.0; y.len()];
    Rhs::new(params, &state.omega_d).eval(&y, t, &mut dy);
    if dy.iter().find(|x| !x.is_finite()).is_some() {
        return Err(Error::NonFinite {
            what: "derivative",
            t,
            last_valid_t: state.t,
        });
    }
    Ok(StateDerivative {
        drho: read_rho(&dy),
        dq_c: dy[IDX_QC],
        dp_c: dy[IDX_PC],
        dq_b: dy[IDX_QB],
        dp_b: dy[IDX_PB],
        dq_d: dy[HEAD_LEN..HEAD_LEN + n].to_vec(),
        dp_d: dy[HEAD_LEN + n..].to_vec(),
    })
}

/// Classical RK4 with preallocated stage buffers.
struct Stepper<'a> {
    rhs: Rhs<'a>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a Params, omega_d: &[f64]) -> Self {
        let len = HEAD_LEN + 2 * omega_d.len();
        Stepper {
            rhs: Rhs::new(params, omega_d),
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    /// Advances `y` from `t` to `t + dt`, then re-hermitizes ρ. Returns the
    /// Hermiticity drift the step produced before the correction.
    fn step(&mut self, y: &mut [f64], t: f64, dt: f64) -> f64 {
        let h2 = 0.5 * dt;
        self.rhs.eval(y, t, &mut self.k1);
        axpy(&mut self.tmp, y, h2, &self.k1);
        self.rhs.eval(&self.tmp, t + h2, &mut self.k2);
        axpy(&mut self.tmp, y, h2, &self.k2);
        self.rhs.eval(&self.tmp, t + h2, &mut self.k3);
        axpy(&mut self.tmp, y, dt, &self.k3);
        self.rhs.eval(&self.tmp, t + dt, &mut self.k4);
        let s = dt / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += s * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
        hermitize(y)
    }
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, &yi), &ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + a * ki;
    }
}

/// Replaces the flat ρ block by `(ρ + ρ†)/2`; returns `‖ρ - ρ†‖_F` before.
fn hermitize(y: &mut [f64]) -> f64 {
    let drift = read_rho(y).hermiticity_error();
    y[1] = 0.0;
    y[7] = 0.0;
    let re = 0.5 * (y[2] + y[4]);
    let im = 0.5 * (y[3] - y[5]);
    y[2] = re;
    y[3] = im;
    y[4] = re;
    y[5] = -im;
    drift
}

/// One RK4 step of length `dt` from `state.t`.
pub fn rk4_step(state: &SystemState, params: &Params, dt: f64) -> Result<SystemState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "> 0"));
    }
    let mut y = vec![0.0; state.flat_len()];
    state.write_flat(&mut y);
    Stepper::new(params, &state.omega_d).step(&mut y, state.t, dt);
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "state",
            t: state.t + dt,
            last_valid_t: state.t,
        });
    }
    let mut next = state.clone();
    next.read_flat(&y);
    next.t = state.t + dt;
    Ok(next)
}

/// Worst-case density-matrix diagnostics over every integration step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    /// `‖ρ - ρ†‖` after the post-step correction.
    pub max_hermiticity_error: f64,
    /// Largest Hermiticity drift produced by a single RK4 step.
    pub max_hermiticity_drift: f64,
    pub min_eigenvalue: f64,
    pub steps: u64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            max_hermiticity_drift: 0.0,
            min_eigenvalue: f64::INFINITY,
            steps: 0,
        }
    }
}

impl Diagnostics {
    fn observe(&mut self, rho: &Matrix2, drift: f64) {
        let tr = rho.trace();
        self.max_trace_error = self
            .max_trace_error
            .max((tr - Complex64::new(1.0, 0.0)).norm());
        self.max_hermiticity_error = self.max_hermiticity_error.max(rho.hermiticity_error());
        self.max_hermiticity_drift = self.max_hermiticity_drift.max(drift);
        self.min_eigenvalue = self.min_eigenvalue.min(rho.hermitian_eigenvalues()[0]);
    }
}

/// Recorded observables of one run. Frames are spaced by
/// `dt·record_stride`, except that the final step is always recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub p_e: Vec<f64>,
    pub re_rho_eg: Vec<f64>,
    pub im_rho_eg: Vec<f64>,
    pub e_e: Vec<f64>,
    pub e_c: Vec<f64>,
    pub e_b: Vec<f64>,
    pub e_d: Vec<f64>,
    pub q_c: Vec<f64>,
    pub p_c: Vec<f64>,
    pub q_b: Vec<f64>,
    pub p_b: Vec<f64>,
    pub params: Params,
    pub diagnostics: Diagnostics,
    pub final_state: SystemState,
}

impl Trajectory {
    fn new(params: &Params, initial: &SystemState, capacity: usize) -> Self {
        let v = || Vec::with_capacity(capacity);
        Trajectory {
            times: v(),
            p_e: v(),
            re_rho_eg: v(),
            im_rho_eg: v(),
            e_e: v(),
            e_c: v(),
            e_b: v(),
            e_d: v(),
            q_c: v(),
            p_c: v(),
            q_b: v(),
            p_b: v(),
            params: params.clone(),
            diagnostics: Diagnostics::default(),
            final_state: initial.clone(),
        }
    }

    fn record(&mut self, state: &SystemState, params: &Params) {
        let e = energies(state, params);
        let c = state.rho.coherence();
        self.times.push(state.t);
        self.p_e.push(state.rho.excited_population());
        self.re_rho_eg.push(c.re);
        self.im_rho_eg.push(c.im);
        self.e_e.push(e.e_e);
        self.e_c.push(e.e_c);
        self.e_b.push(e.e_b);
        self.e_d.push(e.e_d);
        self.q_c.push(state.q_c);
        self.p_c.push(state.p_c);
        self.q_b.push(state.q_b);
        self.p_b.push(state.p_b);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Nominal frame spacing `dt·record_stride`.
    pub fn frame_spacing(&self) -> f64 {
        self.params.dt * self.params.record_stride as f64
    }

    /// Mean-field total energy per frame.
    pub fn total_energy(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.e_e[i] + self.e_c[i] + self.e_b[i] + self.e_d[i])
            .collect()
    }
}

/// Number of steps needed to reach `t ≥ t_final`.
pub fn step_count(params: &Params) -> u64 {
    let n = params.t_final / params.dt;
    // tolerate t_final being an exact multiple of dt up to rounding
    let rounded = n.round();
    if (n - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded as u64
    } else {
        n.ceil() as u64
    }
}

/// Integrates from [`initial_state`] to `t_final`.
pub fn integrate(params: &Params) -> Result<Trajectory> {
    params.validate()?;
    integrate_from(initial_state(params), params)
}

/// Integrates an arbitrary starting state for `t_final` (measured from
/// `state.t`).
pub fn integrate_from(mut state: SystemState, params: &Params) -> Result<Trajectory> {
    params.validate()?;
    if !state.is_finite() {
        return Err(Error::NonFinite {
            what: "initial state",
            t: state.t,
            last_valid_t: state.t,
        });
    }
    let n_steps = step_count(params);
    let stride = params.record_stride as u64;
    let t0 = state.t;
    let mut traj = Trajectory::new(params, &state, (n_steps / stride + 2) as usize);
    let mut y = vec![0.0; state.flat_len()];
    state.write_flat(&mut y);
    let mut stepper = Stepper::new(params, &state.omega_d);

    traj.diagnostics.observe(&state.rho.0, 0.0);
    traj.record(&state, params);
    let mut t = t0;
    for k in 1..=n_steps {
        let drift = stepper.step(&mut y, t, params.dt);
        let t_next = t0 + k as f64 * params.dt;
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "state",
                t: t_next,
                last_valid_t: t,
            });
        }
        t = t_next;
        traj.diagnostics.observe(&read_rho(&y), drift);
        traj.diagnostics.steps = k;
        if k % stride == 0 || k == n_steps {
            state.read_flat(&y);
            state.t = t;
            traj.record(&state, params);
        }
    }
    state.read_flat(&y);
    state.t = t;
    traj.final_state = state;
    Ok(traj)
}

/// Terminal observables compared by [`convergence_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "E_e")]
    ElectronicEnergy,
    #[serde(rename = "E_c")]
    PhotonEnergy,
    #[serde(rename = "E_B")]
    BrightEnergy,
    #[serde(rename = "E_D")]
    DarkEnergy,
    #[serde(rename = "E_total")]
    TotalEnergy,
    #[serde(rename = "P_e")]
    ExcitedPopulation,
    #[serde(rename = "q_c")]
    CavityPosition,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::ElectronicEnergy,
        Observable::PhotonEnergy,
        Observable::BrightEnergy,
        Observable::DarkEnergy,
        Observable::TotalEnergy,
        Observable::ExcitedPopulation,
        Observable::CavityPosition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::ElectronicEnergy => "E_e",
            Observable::PhotonEnergy => "E_c",
            Observable::BrightEnergy => "E_B",
            Observable::DarkEnergy => "E_D",
            Observable::TotalEnergy => "E_total",
            Observable::ExcitedPopulation => "P_e",
            Observable::CavityPosition => "q_c",
        }
    }

    pub fn terminal(self, traj: &Trajectory) -> f64 {
        let s = &traj.final_state;
        let e = energies(s, &traj.params);
        match self {
            Observable::ElectronicEnergy => e.e_e,
            Observable::PhotonEnergy => e.e_c,
            Observable::BrightEnergy => e.e_b,
            Observable::DarkEnergy => e.e_d,
            Observable::TotalEnergy => e.total(),
            Observable::ExcitedPopulation => s.rho.excited_population(),
            Observable::CavityPosition => s.q_c,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "observable",
                name: s.to_owned(),
            })
    }
}

/// Values below this magnitude are compared absolutely.
pub const CONVERGENCE_ABS_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub observable: Observable,
    pub dt: f64,
    pub value_dt: f64,
    pub value_dt_half: f64,
    /// `|a - b| / max(|a|, |b|)`, or `|a - b|` when `absolute` is set.
    pub relative_difference: f64,
    pub absolute: bool,
    /// Observed order `log2(|v(dt) - v(dt/2)| / |v(dt/2) - v(dt/4)|)`, when
    /// a third run was requested.
    pub observed_order: Option<f64>,
}

fn difference(a: f64, b: f64) -> (f64, bool) {
    let scale = a.abs().max(b.abs());
    if scale < CONVERGENCE_ABS_FLOOR {
        ((a - b).abs(), true)
    } else {
        ((a - b).abs() / scale, false)
    }
}

/// Runs at `dt` and `dt/2` and compares the terminal `observable`.
pub fn convergence_check(params: &Params, observable: Observable) -> Result<ConvergenceReport> {
    convergence_report(params, observable, false)
}

/// As [`convergence_check`], plus a `dt/4` run to estimate the order.
pub fn convergence_order(params: &Params, observable: Observable) -> Result<ConvergenceReport> {
    convergence_report(params, observable, true)
}

fn convergence_report(
    params: &Params,
    observable: Observable,
    with_order: bool,
) -> Result<ConvergenceReport> {
    let run = |div: f64| -> Result<f64> {
        let p = Params {
            dt: params.dt / div,
            ..params.clone()
        };
        Ok(observable.terminal(&integrate(&p)?))
    };
    let a = run(1.0)?;
    let b = run(2.0)?;
    let (relative_difference, absolute) = difference(a, b);
    let observed_order = if with_order {
        let c = run(4.0)?;
        Some(((a - b).abs() / (b - c).abs()).log2())
    } else {
        None
    };
    Ok(ConvergenceReport {
        observable,
        dt: params.dt,
        value_dt: a,
        value_dt_half: b,
        relative_difference,
        absolute,
        observed_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Pulse;
    use crate::state::ElectronicDensityMatrix;
    use approx::assert_relative_eq;

    fn quiet() -> Params {
        Params {
            lambda_c: 0.0,
            gamma_e: 0.0,
            gamma_c: 0.0,
            gamma_v_total: 0.0,
            pulse: Pulse {
                e0: 0.0,
                ..Pulse::default()
            },
            ..Params::default()
        }
    }

    #[test]
    fn dissipator_examples() {
        let g = 1e-5;
        let d = lindblad_dissipator(&Matrix2::diag(0.0, 1.0), g);
        assert_eq!(d, Matrix2::diag(g, -g));
        assert_eq!(
            lindblad_dissipator(&Matrix2::diag(1.0, 0.0), g),
            Matrix2::ZERO
        );
        let c = Complex64::new(0.3, -0.1);
        let rho = Matrix2::new(Complex64::default(), c.conj(), c, Complex64::default());
        let d = lindblad_dissipator(&rho, g);
        assert_eq!(d[(E, G)], c * (-g / 2.0));
        assert_eq!(d.trace(), Complex64::default());
    }

    #[test]
    fn fixed_point_has_zero_derivative() {
        let p = Params {
            d_eg: 0.0,
            ..quiet()
        };
        let s = initial_state(&p);
        let d = rhs(&s, &p, 123.0).unwrap();
        assert_eq!(d.drho, Matrix2::ZERO);
        assert_eq!((d.dq_c, d.dp_c, d.dq_b, d.dp_b), (0.0, 0.0, 0.0, 0.0));
        assert!(d.dq_d.iter().chain(&d.dp_d).all(|&x| x == 0.0));
    }

    #[test]
    fn free_cavity_restoring_force() {
        let p = quiet();
        let mut s = initial_state(&p);
        s.q_c = 1.0;
        let d = rhs(&s, &p, 0.0).unwrap();
        assert_relative_eq!(d.dp_c, -1e-4, max_relative = 1e-15);
        assert_eq!(d.dq_c, 0.0);
    }

    #[test]
    fn casimir_force_on_photon() {
        let p = Params::default();
        let mut s = initial_state(&p);
        s.rho = ElectronicDensityMatrix::excited();
        let d = rhs(&s, &p, 1.0e5).unwrap();
        assert_relative_eq!(d.dp_c, -200.0, max_relative = 1e-12);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let p = Params::default();
        let mut s = initial_state(&p);
        s.rho = ElectronicDensityMatrix::from_population(0.3, Complex64::new(0.2, -0.35));
        s.q_c = 4.0e4;
        s.q_b = -2.0;
        let d = rhs(&s, &p, 480.0).unwrap();
        assert!(d.drho.trace().re.abs() < 1e-10);
        assert!(d.drho.hermiticity_error() < 1e-12);
    }

    #[test]
    fn nan_derivative_reported() {
        let p = Params::default();
        let mut s = initial_state(&p);
        s.q_c = f64::NAN;
        assert!(matches!(rhs(&s, &p, 0.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn single_step_matches_harmonic_solution() {
        let p = quiet();
        let mut s = initial_state(&p);
        s.q_c = 1.0;
        let next = rk4_step(&s, &p, 0.5).unwrap();
        assert!((next.q_c - 0.005f64.cos()).abs() < 3e-12);
        assert_eq!(next.t, 0.5);
    }

    #[test]
    fn step_at_fixed_point_is_identity() {
        let p = Params {
            d_eg: 0.0,
            ..quiet()
        };
        let s = initial_state(&p);
        let next = rk4_step(&s, &p, 0.5).unwrap();
        assert_eq!(next.q_d, s.q_d);
        assert_eq!(next.rho, s.rho);
        assert_eq!(
            (next.q_c, next.p_c, next.q_b, next.p_b),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn fourth_order_global_convergence() {
        // q_c(T) against cos(ω T) at a zero crossing, where the phase error
        // (O(dt⁴)) dominates the amplitude error (O(dt⁵))
        let base = Params {
            n_dark: 0,
            ..quiet()
        };
        let t_end = 2.5 * std::f64::consts::PI / base.omega_c;
        let err = |dt: f64| {
            let p = Params {
                dt,
                t_final: t_end,
                record_stride: 1000,
                ..base.clone()
            };
            let mut s = initial_state(&p);
            s.q_c = 1.0;
            let traj = integrate_from(s, &p).unwrap();
            let n = step_count(&p) as f64;
            (traj.final_state.q_c - (p.omega_c * n * dt).cos()).abs()
        };
        let steps = 80.0;
        let ratio = err(t_end / steps) / err(t_end / (2.0 * steps));
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn step_count_rounding() {
        let p = Params {
            dt: 0.5,
            t_final: 10.0,
            ..Params::default()
        };
        assert_eq!(step_count(&p), 20);
        let p = Params { t_final: 10.1, ..p };
        assert_eq!(step_count(&p), 21);
    }

    #[test]
    fn recording_includes_first_and_last_step() {
        let p = Params {
            t_final: 1010.0,
            dt: 0.5,
            record_stride: 50,
            ..Params::default()
        };
        let traj = integrate(&p).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(*traj.times.last().unwrap(), 1010.0);
        // 2020 steps: frames 0, 50, ..., 2000 and the final one
        assert_eq!(traj.len(), 42);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.times[1] - traj.times[0], 25.0);
    }

    #[test]
    fn observable_names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
        assert!("E_x".parse::<Observable>().is_err());
    }
}
