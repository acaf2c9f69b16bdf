//! Two-level density matrices and 2×2 operators.
//!
//! Index 0 is the ground state |g⟩, index 1 the excited state |e⟩.

use num_complex::Complex64;
use std::ops::{Add, Mul};

use crate::error::{MeterError, Result};

/// Slack used by the density-matrix validity checks.
pub const STATE_SLACK: f64 = 1e-12;

/// Density matrix of the measured qubit: two populations and the coherence
/// ρ_ge = ⟨g|ρ|e⟩ (ρ_eg is its conjugate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub p_g: f64,
    pub p_e: f64,
    pub rho_ge: Complex64,
}

impl QubitState {
    pub fn new(p_g: f64, p_e: f64, rho_ge: Complex64) -> Result<Self> {
        let state = QubitState { p_g, p_e, rho_ge };
        state.validate()?;
        Ok(state)
    }

    /// (|g⟩ + |e⟩)/√2, the state of maximal uncertainty of σ_z.
    pub fn reference() -> Self {
        QubitState {
            p_g: 0.5,
            p_e: 0.5,
            rho_ge: Complex64::new(0.5, 0.0),
        }
    }

    pub fn ground() -> Self {
        QubitState {
            p_g: 1.0,
            p_e: 0.0,
            rho_ge: Complex64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        QubitState {
            p_g: 0.0,
            p_e: 1.0,
            rho_ge: Complex64::new(0.0, 0.0),
        }
    }

    pub fn maximally_mixed() -> Self {
        QubitState {
            p_g: 0.5,
            p_e: 0.5,
            rho_ge: Complex64::new(0.0, 0.0),
        }
    }

    /// State with Bloch vector (x, y, z) where z = p_g − p_e; requires |r| ≤ 1.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        QubitState::new(
            0.5 * (1.0 + z),
            0.5 * (1.0 - z),
            Complex64::new(0.5 * x, -0.5 * y),
        )
    }

    /// Builds a state from unnormalized block entries (gg, ee, ge), dividing
    /// by their trace. Returns `None` when the trace vanishes.
    pub fn from_unnormalized(gg: f64, ee: f64, ge: Complex64) -> Option<Self> {
        let tr = gg + ee;
        if !(tr > 0.0) {
            return None;
        }
        Some(QubitState {
            p_g: gg / tr,
            p_e: ee / tr,
            rho_ge: ge / tr,
        })
    }

    pub fn rho_eg(&self) -> Complex64 {
        self.rho_ge.conj()
    }

    pub fn trace(&self) -> f64 {
        self.p_g + self.p_e
    }

    pub fn det(&self) -> f64 {
        self.p_g * self.p_e - self.rho_ge.norm_sqr()
    }

    pub fn purity(&self) -> f64 {
        self.p_g * self.p_g + self.p_e * self.p_e + 2.0 * self.rho_ge.norm_sqr()
    }

    /// Eigenvalues (largest first). The small one is taken as det/λ_max so
    /// that nearly pure states keep full relative precision.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.trace();
        let diff = self.p_g - self.p_e;
        let disc = (diff * diff + 4.0 * self.rho_ge.norm_sqr()).sqrt();
        let hi = 0.5 * (tr + disc);
        if hi <= 0.0 {
            return (0.0, 0.0);
        }
        let lo = self.det().max(0.0) / hi;
        (hi, lo)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.p_g.is_finite() && self.p_e.is_finite() && self.rho_ge.is_finite();
        if !finite {
            return Err(MeterError::domain("non-finite qubit state entry"));
        }
        if self.p_g < -STATE_SLACK || self.p_e < -STATE_SLACK {
            return Err(MeterError::domain(format!(
                "negative population (p_g = {}, p_e = {})",
                self.p_g, self.p_e
            )));
        }
        if (self.trace() - 1.0).abs() > STATE_SLACK {
            return Err(MeterError::domain(format!(
                "trace {} differs from 1",
                self.trace()
            )));
        }
        if self.rho_ge.norm_sqr() > self.p_g * self.p_e + STATE_SLACK {
            return Err(MeterError::domain(format!(
                "coherence |ρ_ge|² = {} exceeds p_g·p_e = {}",
                self.rho_ge.norm_sqr(),
                self.p_g * self.p_e
            )));
        }
        Ok(())
    }

    /// ⟨j|ρ|j⟩ for the two eigenstates of the chosen observable.
    pub fn populations_in(&self, x_basis: bool) -> [f64; 2] {
        if x_basis {
            // |±⟩ = (|g⟩ ± |e⟩)/√2
            let re = self.rho_ge.re;
            [0.5 + re, 0.5 - re]
        } else {
            [self.p_g, self.p_e]
        }
    }

    pub fn to_matrix(&self) -> Mat2 {
        Mat2([
            [Complex64::new(self.p_g, 0.0), self.rho_ge],
            [self.rho_ge.conj(), Complex64::new(self.p_e, 0.0)],
        ])
    }

    pub fn max_abs_diff(&self, other: &QubitState) -> f64 {
        (self.p_g - other.p_g)
            .abs()
            .max((self.p_e - other.p_e).abs())
            .max((self.rho_ge - other.rho_ge).norm())
    }
}

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[Complex64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        Mat2::diag(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Mat2([[a, z], [z, b]])
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// Interprets a Hermitian, unit-trace matrix as a qubit state.
    pub fn to_state(&self) -> Option<QubitState> {
        QubitState::from_unnormalized(self.0[0][0].re, self.0[1][1].re, self.0[0][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_states() {
        assert!(QubitState::new(0.6, 0.6, Complex64::new(0.0, 0.0)).is_err());
        assert!(QubitState::new(1.2, -0.2, Complex64::new(0.0, 0.0)).is_err());
        assert!(QubitState::new(0.5, 0.5, Complex64::new(0.6, 0.0)).is_err());
        assert!(QubitState::new(0.5, 0.5, Complex64::new(0.5, 0.0)).is_ok());
    }

    #[test]
    fn bloch_round_trip() {
        let s = QubitState::from_bloch(0.3, -0.4, 0.5).unwrap();
        assert!((s.p_g - 0.75).abs() < 1e-15);
        assert!((s.rho_ge - Complex64::new(0.15, 0.2)).norm() < 1e-15);
        let pure = QubitState::from_bloch(0.6, 0.0, 0.8).unwrap();
        assert!(pure.det().abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_near_pure_state_keep_precision() {
        let c = 0.5 * (-1e-9f64).exp();
        let s = QubitState::new(0.5, 0.5, Complex64::new(c, 0.0)).unwrap();
        let (hi, lo) = s.eigenvalues();
        assert!((hi + lo - 1.0).abs() < 1e-15);
        // λ_min = (1 − e^{−1e−9})/2 ≈ 5e−10
        assert!((lo / 5e-10 - 1.0).abs() < 1e-6);
    }
}
