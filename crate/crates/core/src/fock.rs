//! Truncated Fock-space matrices, displacement operators and the joint
//! qubit-pointer state.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{MeterError, Result};
use crate::measurement::MeasurementParams;
use crate::numerics::{
    fock_cutoff, laguerre_sweep, log_factorial, poisson_tail_bound, TAIL_TOLERANCE,
};
use crate::qubit::QubitState;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Dense complex matrix indexed by Fock numbers 0..dim.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    data: Array2<Complex64>,
}

impl FockMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "Fock dimension must be at least 1");
        FockMatrix {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = FockMatrix::zeros(dim);
        for i in 0..dim {
            m.data[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_array(data: Array2<Complex64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c || r == 0 {
            return Err(MeterError::invalid(format!("Fock matrix shape {r}x{c}")));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(MeterError::domain("non-finite Fock matrix entry"));
        }
        Ok(FockMatrix { data })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = FockMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[(i, i)] = d;
        }
        m
    }

    /// Truncated D(α) = exp(α a† − α* a), every entry from the closed form.
    pub fn displacement(alpha: Complex64, dim: usize) -> Self {
        let mut m = FockMatrix::zeros(dim);
        if alpha == ZERO {
            return FockMatrix::identity(dim);
        }
        let x = alpha.norm_sqr();
        let ln_r = alpha.norm().ln();
        let arg = alpha.arg();
        for k in 0..dim {
            // k-th subdiagonal: n = m + k, entries use L_m^k(|α|²)
            let len = dim - k;
            laguerre_sweep(len - 1, k as i64, x, |mm, l| {
                let n = mm + k;
                let ln_mag = 0.5 * (log_factorial(mm as u64) - log_factorial(n as u64))
                    + k as f64 * ln_r
                    - 0.5 * x
                    + l.ln_abs;
                let below = Complex64::from_polar(l.sign * ln_mag.exp(), k as f64 * arg);
                m.data[(n, mm)] = below;
                if k > 0 {
                    // ⟨m|D|n⟩ = (−1)^k conj(⟨n|D|m⟩) for n = m + k
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    m.data[(mm, n)] = below.conj() * sign;
                }
            });
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Result<Complex64> {
        let dim = self.dim();
        if row >= dim || col >= dim {
            return Err(MeterError::IndexOutOfRange { row, col, dim });
        }
        Ok(self.data[(row, col)])
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.data.diag().to_vec()
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diag().iter().sum()
    }

    pub fn dagger(&self) -> FockMatrix {
        FockMatrix {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    pub fn matmul(&self, other: &FockMatrix) -> FockMatrix {
        FockMatrix {
            data: self.data.dot(&other.data),
        }
    }

    pub fn max_abs_diff(&self, other: &FockMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Keeps only the diagonal.
    pub fn dephased(&self) -> FockMatrix {
        FockMatrix::from_diagonal(&self.diagonal())
    }

    /// U X U† for the pair rotation of angle θ acting on the Fock index.
    pub fn rotate_pairs(&self, theta: f64) -> FockMatrix {
        let (s, c) = theta.sin_cos();
        let dim = self.dim();
        let mut data = self.data.clone();
        // rows: X → U X
        for p in (0..dim.saturating_sub(1)).step_by(2) {
            for col in 0..dim {
                let a = data[(p, col)];
                let b = data[(p + 1, col)];
                data[(p, col)] = a * c - b * s;
                data[(p + 1, col)] = a * s + b * c;
            }
        }
        // columns: X → X U†, U real
        for p in (0..dim.saturating_sub(1)).step_by(2) {
            for row in 0..dim {
                let a = data[(row, p)];
                let b = data[(row, p + 1)];
                data[(row, p)] = a * c - b * s;
                data[(row, p + 1)] = a * s + b * c;
            }
        }
        FockMatrix { data }
    }
}

/// Largest k such that every number state |i⟩, i ≤ k, displaced by any
/// amplitude of modulus `alpha_abs` keeps its support inside `dim` levels by
/// the truncation rule at intensity (√k + |α|)².
pub fn certified_interior(alpha_abs: f64, dim: usize) -> Option<usize> {
    let fits = |k: usize| {
        let reach = (k as f64).sqrt() + alpha_abs;
        fock_cutoff(reach * reach) < dim
    };
    if !fits(0) {
        return None;
    }
    let mut k = 0;
    while k + 1 < dim && fits(k + 1) {
        k += 1;
    }
    Some(k)
}

/// ⟨n|D(α)|m⟩ for the unitary displacement exp(α a† − α* a).
pub fn displacement_element(n: usize, m: usize, alpha: Complex64) -> Complex64 {
    if alpha == ZERO {
        return if n == m {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        };
    }
    let (hi, lo, a) = if n >= m {
        (n, m, alpha)
    } else {
        (m, n, -alpha.conj())
    };
    let k = hi - lo;
    let x = alpha.norm_sqr();
    let l = crate::numerics::assoc_laguerre_scaled(lo, k as i64, x);
    let ln_mag = 0.5 * (log_factorial(lo as u64) - log_factorial(hi as u64))
        + k as f64 * a.norm().ln()
        - 0.5 * x
        + l.ln_abs;
    Complex64::from_polar(l.sign * ln_mag.exp(), k as f64 * a.arg())
}

/// Initial pointer state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AncillaInit {
    Vacuum,
    /// Gibbs state at inverse temperature β, parametrized by β·ω_a.
    Thermal {
        beta_omega: f64,
    },
}

impl AncillaInit {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AncillaInit::Vacuum => Ok(()),
            AncillaInit::Thermal { beta_omega } => {
                if beta_omega > 0.0 && beta_omega.is_finite() {
                    Ok(())
                } else {
                    Err(MeterError::invalid(format!("β·ω_a = {beta_omega}")))
                }
            }
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, AncillaInit::Vacuum)
    }

    /// Occupation weights p_m over the retained levels and the mass beyond.
    pub fn weights(&self) -> Result<(Vec<f64>, f64)> {
        self.validate()?;
        match *self {
            AncillaInit::Vacuum => Ok((vec![1.0], 0.0)),
            AncillaInit::Thermal { beta_omega } => {
                // q^{M+1} ≤ 1e−12
                let levels = ((1e12f64).ln() / beta_omega).ceil() as usize;
                let q = (-beta_omega).exp();
                let norm = -(-beta_omega).exp_m1();
                let weights = (0..=levels)
                    .map(|m| norm * (-(m as f64) * beta_omega).exp())
                    .collect();
                let tail = q.powi(levels as i32 + 1);
                Ok((weights, tail))
            }
        }
    }

    /// Mean occupation n̄.
    pub fn mean_occupation(&self) -> f64 {
        match *self {
            AncillaInit::Vacuum => 0.0,
            AncillaInit::Thermal { beta_omega } => 1.0 / beta_omega.exp_m1(),
        }
    }

    /// S_A(t_0) in nats from the exact geometric weights.
    pub fn entropy_nats(&self) -> f64 {
        match *self {
            AncillaInit::Vacuum => 0.0,
            AncillaInit::Thermal { beta_omega } => {
                let q = (-beta_omega).exp();
                -(-q).ln_1p() + beta_omega * q / (1.0 - q)
            }
        }
    }
}

/// Joint qubit ⊗ pointer state stored as Fock-indexed blocks ⟨i|ρ|j⟩ for
/// qubit indices i, j ∈ {g, e}; the eg block is ge†.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub gg: FockMatrix,
    pub ge: FockMatrix,
    pub ee: FockMatrix,
    pub dephased: bool,
    /// Certified bound on probability lost to the truncation.
    pub tail_bound: f64,
}

impl JointState {
    pub fn dim(&self) -> usize {
        self.gg.dim()
    }

    pub fn eg(&self) -> FockMatrix {
        self.ge.dagger()
    }

    pub fn trace(&self) -> f64 {
        self.gg.trace().re + self.ee.trace().re
    }

    /// Reduced qubit state, Tr_A.
    pub fn reduced_qubit(&self) -> QubitState {
        let tr = self.trace();
        QubitState {
            p_g: self.gg.trace().re / tr,
            p_e: self.ee.trace().re / tr,
            rho_ge: self.ge.trace() / tr,
        }
    }

    /// ⟨n̂⟩ of the pointer.
    pub fn mean_number(&self) -> f64 {
        self.gg
            .diagonal()
            .iter()
            .zip(self.ee.diagonal())
            .enumerate()
            .map(|(n, (g, e))| n as f64 * (g.re + e.re))
            .sum()
    }

    pub fn is_hermitian_blockwise(&self, tol: f64) -> bool {
        self.gg.max_abs_diff(&self.gg.dagger()) <= tol
            && self.ee.max_abs_diff(&self.ee.dagger()) <= tol
    }
}

/// Fock dimension for displacements up to |α|_max of a state with `levels`
/// thermal levels, by the uniform truncation rule at the worst intensity.
fn joint_dimension(alpha_max: f64, levels: usize) -> usize {
    let reach = (levels as f64).sqrt() + alpha_max;
    let dim = fock_cutoff(reach * reach) + 1;
    // even dimension so the pair rotation never leaves a lone level
    dim + dim % 2
}

/// ρ_SA after the conditional displacement and before dephasing.
pub fn build_joint_predephasing(
    params: &MeasurementParams,
    qubit: &QubitState,
    init: AncillaInit,
) -> Result<JointState> {
    params.validate()?;
    qubit.validate()?;
    let (weights, init_tail) = init.weights()?;
    let a1 = params.alpha1();
    let a2 = params.alpha2();
    let alpha_max = a1.norm().max(a2.norm());
    let levels = weights.len() - 1;
    let dim = joint_dimension(alpha_max, levels);

    let d1 = FockMatrix::displacement(a1, dim);
    let d2 = FockMatrix::displacement(a2, dim);
    // columns of D·√ρ_A
    let cols = weights.len();
    let mut b1 = Array2::<Complex64>::zeros((dim, cols));
    let mut b2 = Array2::<Complex64>::zeros((dim, cols));
    for (m, &w) in weights.iter().enumerate() {
        let s = w.sqrt();
        for n in 0..dim {
            b1[(n, m)] = d1.data[(n, m)] * s;
            b2[(n, m)] = d2.data[(n, m)] * s;
        }
    }
    let b1h = b1.t().mapv(|z| z.conj());
    let b2h = b2.t().mapv(|z| z.conj());
    let gg = b1.dot(&b1h) * Complex64::new(qubit.p_g, 0.0);
    let ee = b2.dot(&b2h) * Complex64::new(qubit.p_e, 0.0);
    let phase = Complex64::from_polar(1.0, -params.phi);
    let ge = b1.dot(&b2h) * (qubit.rho_ge * phase);

    // probability that stays inside the truncation for each branch
    let kept1: f64 = b1.iter().map(|z| z.norm_sqr()).sum();
    let kept2: f64 = b2.iter().map(|z| z.norm_sqr()).sum();
    let lost = (1.0 - kept1).max(1.0 - kept2).max(0.0);
    let tail = if init.is_vacuum() {
        let lambda = alpha_max * alpha_max;
        poisson_tail_bound(lambda, dim - 1).max(lost)
    } else {
        lost.max(init_tail)
    };
    if tail > TAIL_TOLERANCE {
        return Err(MeterError::Truncation {
            tail,
            tolerance: TAIL_TOLERANCE,
            cutoff: dim - 1,
        });
    }
    Ok(JointState {
        gg: FockMatrix { data: gg },
        ge: FockMatrix { data: ge },
        ee: FockMatrix { data: ee },
        dephased: false,
        tail_bound: tail,
    })
}

/// Full dephasing of the pointer in the number basis.
pub fn dephase(joint: &JointState) -> JointState {
    JointState {
        gg: joint.gg.dephased(),
        ge: joint.ge.dephased(),
        ee: joint.ee.dephased(),
        dephased: true,
        tail_bound: joint.tail_bound,
    }
}

/// Applies the pair rotation to the pointer index of every block.
pub fn rotate_pairs(joint: &JointState, theta: f64) -> JointState {
    JointState {
        gg: joint.gg.rotate_pairs(theta),
        ge: joint.ge.rotate_pairs(theta),
        ee: joint.ee.rotate_pairs(theta),
        dephased: false,
        tail_bound: joint.tail_bound,
    }
}
