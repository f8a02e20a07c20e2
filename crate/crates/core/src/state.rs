use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::{Matrix2, E, G};

/// Number of reals before the dark-mode blocks in the flat state vector:
/// ρ as 8 raw reals, then `q_c, p_c, q_B, p_B`.
pub const HEAD_LEN: usize = 12;
pub(crate) const IDX_QC: usize = 8;
pub(crate) const IDX_PC: usize = 9;
pub(crate) const IDX_QB: usize = 10;
pub(crate) const IDX_PB: usize = 11;

/// Density matrix of the representative two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronicDensityMatrix(pub Matrix2);

impl ElectronicDensityMatrix {
    pub fn ground() -> Self {
        ElectronicDensityMatrix(Matrix2::diag(1.0, 0.0))
    }

    pub fn excited() -> Self {
        ElectronicDensityMatrix(Matrix2::diag(0.0, 1.0))
    }

    /// `[[1 - P_e, conj(c)], [c, P_e]]` with `c = ρ_eg`.
    pub fn from_population(p_e: f64, rho_eg: Complex64) -> Self {
        ElectronicDensityMatrix(Matrix2::new(
            Complex64::new(1.0 - p_e, 0.0),
            rho_eg.conj(),
            rho_eg,
            Complex64::new(p_e, 0.0),
        ))
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    /// `P_e = ⟨e|ρ|e⟩`
    pub fn excited_population(&self) -> f64 {
        self.0[(E, E)].re
    }

    /// `ρ_eg = ⟨e|ρ|g⟩`
    pub fn coherence(&self) -> Complex64 {
        self.0[(E, G)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.0.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.hermitian_eigenvalues()[0]
    }
}

/// Electronic density matrix plus the classical cavity, bright-mode and
/// dark-mode phase-space variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub rho: ElectronicDensityMatrix,
    pub q_c: f64,
    pub p_c: f64,
    pub q_b: f64,
    pub p_b: f64,
    pub q_d: Vec<f64>,
    pub p_d: Vec<f64>,
    pub omega_d: Vec<f64>,
    pub t: f64,
}

impl SystemState {
    /// Ground electronic state with every oscillator at rest at the origin.
    pub fn at_rest(omega_d: Vec<f64>) -> Self {
        let n = omega_d.len();
        SystemState {
            rho: ElectronicDensityMatrix::ground(),
            q_c: 0.0,
            p_c: 0.0,
            q_b: 0.0,
            p_b: 0.0,
            q_d: vec![0.0; n],
            p_d: vec![0.0; n],
            omega_d,
            t: 0.0,
        }
    }

    pub fn n_dark(&self) -> usize {
        self.omega_d.len()
    }

    pub fn flat_len(&self) -> usize {
        HEAD_LEN + 2 * self.n_dark()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.0.is_finite()
            && [self.q_c, self.p_c, self.q_b, self.p_b]
                .iter()
                .chain(&self.q_d)
                .chain(&self.p_d)
                .all(|x| x.is_finite())
    }

    pub(crate) fn write_flat(&self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.flat_len());
        write_rho(&self.rho.0, out);
        out[IDX_QC] = self.q_c;
        out[IDX_PC] = self.p_c;
        out[IDX_QB] = self.q_b;
        out[IDX_PB] = self.p_b;
        let n = self.n_dark();
        out[HEAD_LEN..HEAD_LEN + n].copy_from_slice(&self.q_d);
        out[HEAD_LEN + n..].copy_from_slice(&self.p_d);
    }

    pub(crate) fn read_flat(&mut self, y: &[f64]) {
        debug_assert_eq!(y.len(), self.flat_len());
        self.rho = ElectronicDensityMatrix(read_rho(y));
        self.q_c = y[IDX_QC];
        self.p_c = y[IDX_PC];
        self.q_b = y[IDX_QB];
        self.p_b = y[IDX_PB];
        let n = self.n_dark();
        self.q_d.copy_from_slice(&y[HEAD_LEN..HEAD_LEN + n]);
        self.p_d.copy_from_slice(&y[HEAD_LEN + n..]);
    }
}

pub(crate) fn read_rho(y: &[f64]) -> Matrix2 {
    Matrix2::new(
        Complex64::new(y[0], y[1]),
        Complex64::new(y[2], y[3]),
        Complex64::new(y[4], y[5]),
        Complex64::new(y[6], y[7]),
    )
}

pub(crate) fn write_rho(m: &Matrix2, out: &mut [f64]) {
    for (i, z) in m.0.iter().flatten().enumerate() {
        out[2 * i] = z.re;
        out[2 * i + 1] = z.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_layout_round_trip() {
        let mut s = SystemState::at_rest(vec![0.009, 0.011]);
        s.rho = ElectronicDensityMatrix::from_population(0.3, Complex64::new(0.1, -0.2));
        s.q_c = 1.0;
        s.p_c = 2.0;
        s.q_b = 3.0;
        s.p_b = 4.0;
        s.q_d = vec![5.0, 6.0];
        s.p_d = vec![7.0, 8.0];
        let mut y = vec![0.0; s.flat_len()];
        s.write_flat(&mut y);
        assert_eq!(y.len(), 16);
        assert_eq!(&y[8..], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let mut back = SystemState::at_rest(vec![0.009, 0.011]);
        back.read_flat(&y);
        assert_eq!(back, s);
    }

    #[test]
    fn population_constructor_is_hermitian() {
        let rho = ElectronicDensityMatrix::from_population(0.25, Complex64::new(0.2, 0.1));
        assert_eq!(rho.hermiticity_error(), 0.0);
        assert_eq!(rho.trace(), Complex64::new(1.0, 0.0));
        assert_eq!(rho.excited_population(), 0.25);
        assert_eq!(rho.coherence(), Complex64::new(0.2, 0.1));
    }
}
