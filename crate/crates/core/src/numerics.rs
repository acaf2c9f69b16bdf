//! Scalar numerical kernels shared by the channel and metric code.
//!
//! All entropies are computed in nats; [`Entropy`] carries the base so that
//! reporting in bits is a single multiplicative conversion.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use crate::error::{MeterError, Result};
use crate::qubit::QubitState;

/// Maximum probability mass allowed beyond any Fock truncation.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Rounding slack on "weights sum to at most one".
pub const SUM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    Natural,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    pub base: Base,
}

impl Entropy {
    pub fn from_nats(nats: f64, base: Base) -> Self {
        match base {
            Base::Natural => Entropy { value: nats, base },
            Base::Two => Entropy {
                value: nats / LN_2,
                base,
            },
        }
    }

    pub fn nats(&self) -> f64 {
        match self.base {
            Base::Natural => self.value,
            Base::Two => self.value * LN_2,
        }
    }

    pub fn bits(&self) -> f64 {
        match self.base {
            Base::Natural => self.value / LN_2,
            Base::Two => self.value,
        }
    }

    pub fn to_base(&self, base: Base) -> Entropy {
        Entropy::from_nats(self.nats(), base)
    }
}

/// Nonnegative weights over a (possibly truncated) outcome set, together
/// with a certified bound on the mass lying beyond the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    weights: Vec<f64>,
    tail_bound: f64,
}

impl ProbVector {
    pub fn new(weights: Vec<f64>, tail_bound: f64) -> Result<Self> {
        Self::with_tolerance(weights, tail_bound, TAIL_TOLERANCE)
    }

    pub fn with_tolerance(weights: Vec<f64>, tail_bound: f64, tolerance: f64) -> Result<Self> {
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
        {
            return Err(MeterError::domain(format!("weight {i} is {w}")));
        }
        if !(tail_bound >= 0.0) {
            return Err(MeterError::domain(format!("tail bound {tail_bound}")));
        }
        if tail_bound > tolerance {
            return Err(MeterError::Truncation {
                tail: tail_bound,
                tolerance,
                cutoff: weights.len().saturating_sub(1),
            });
        }
        let total = neumaier_sum(weights.iter().copied());
        if total > 1.0 + SUM_SLACK || total < 1.0 - tail_bound - SUM_SLACK {
            return Err(MeterError::domain(format!(
                "weights sum to {total}, expected [{}, 1]",
                1.0 - tail_bound
            )));
        }
        Ok(ProbVector {
            weights,
            tail_bound,
        })
    }

    /// Normalized distribution without truncation (tail bound zero).
    pub fn exact(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, 0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Compensated summation; used wherever long tails of tiny weights are added.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// −x ln x with the 0·ln 0 = 0 convention.
#[inline]
pub fn neg_xlnx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Shannon entropy in nats of raw weights; negative weights are rejected.
pub fn shannon_nats(weights: &[f64]) -> Result<f64> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(MeterError::domain(format!("negative weight {w}")));
    }
    Ok(neumaier_sum(weights.iter().map(|&w| neg_xlnx(w))))
}

pub fn shannon_entropy(p: &ProbVector, base: Base) -> Entropy {
    // ProbVector weights are validated nonnegative.
    let nats = neumaier_sum(p.weights().iter().map(|&w| neg_xlnx(w)));
    Entropy::from_nats(nats, base)
}

/// Von Neumann entropy of a qubit state from its closed-form eigenvalues.
pub fn vn_entropy_2x2(rho: &QubitState, base: Base) -> Result<Entropy> {
    rho.validate()?;
    Ok(Entropy::from_nats(vn_nats(rho), base))
}

/// Unchecked von Neumann entropy in nats.
pub(crate) fn vn_nats(rho: &QubitState) -> f64 {
    let (hi, lo) = rho.eigenvalues();
    neg_xlnx(hi) + neg_xlnx(lo)
}

const LOG_FACTORIAL_TABLE: usize = 256;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE);
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        table.push(0.0);
        for k in 1..LOG_FACTORIAL_TABLE {
            let v = (k as f64).ln();
            let t = acc + v;
            comp += if acc.abs() >= v.abs() {
                (acc - t) + v
            } else {
                (v - t) + acc
            };
            acc = t;
            table.push(acc + comp);
        }
        table
    })
}

/// ln(n!), tabulated below 256 and from the Stirling series above.
pub fn log_factorial(n: u64) -> f64 {
    let table = log_factorial_table();
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Stirling series for ln Γ(x+1); truncation error < 1e−20 at x ≥ 256
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// Laguerre value in scaled form: `sign · exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub ln_abs: f64,
    pub sign: f64,
}

impl ScaledValue {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

const RESCALE_AT: f64 = 1e150;

/// Runs the upward three-term recurrence of L_j^k(x) for j = 0..=m_max and
/// hands every value to `sink` in scaled form, never overflowing.
pub fn laguerre_sweep(m_max: usize, k: i64, x: f64, mut sink: impl FnMut(usize, ScaledValue)) {
    let kf = k as f64;
    let mut prev = 0.0f64; // L_{j−1}
    let mut cur = 1.0f64; // L_j
    let mut scale = 0.0f64; // both values carry an extra factor e^{scale}
    for j in 0..=m_max {
        if j == 1 {
            prev = cur;
            cur = 1.0 + kf - x;
        } else if j > 1 {
            let jf = (j - 1) as f64;
            let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
            prev = cur;
            cur = next;
        }
        if cur.abs() > RESCALE_AT {
            prev /= RESCALE_AT;
            cur /= RESCALE_AT;
            scale += RESCALE_AT.ln();
        }
        let value = if cur == 0.0 {
            ScaledValue {
                ln_abs: f64::NEG_INFINITY,
                sign: 1.0,
            }
        } else {
            ScaledValue {
                ln_abs: cur.abs().ln() + scale,
                sign: cur.signum(),
            }
        };
        sink(j, value);
    }
}

pub fn assoc_laguerre_scaled(m: usize, k: i64, x: f64) -> ScaledValue {
    let mut out = ScaledValue {
        ln_abs: 0.0,
        sign: 1.0,
    };
    laguerre_sweep(m, k, x, |j, v| {
        if j == m {
            out = v;
        }
    });
    out
}

/// Generalized Laguerre polynomial L_m^k(x).
pub fn assoc_laguerre(m: usize, k: i64, x: f64) -> f64 {
    assoc_laguerre_scaled(m, k, x).value()
}

/// Fock cutoff for a distribution of intensity λ: ⌈λ + 10√λ⌉ + 25.
pub fn fock_cutoff(lambda: f64) -> usize {
    let lambda = lambda.max(0.0);
    (lambda + 10.0 * lambda.sqrt()).ceil() as usize + 25
}

/// Chernoff bound on P(X > n_max) for X ~ Poisson(λ).
pub fn poisson_tail_bound(lambda: f64, n_max: usize) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let k = (n_max + 1) as f64;
    if k <= lambda {
        return 1.0;
    }
    (-lambda + k * (1.0 + lambda.ln() - k.ln())).exp().min(1.0)
}

/// ln n! minus its leading Stirling approximation.
fn stirling_error(n: u64) -> f64 {
    let x = n as f64;
    if (n as usize) < LOG_FACTORIAL_TABLE {
        return log_factorial(n) - (x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln());
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// x ln(x/m) + m − x without cancellation near x = m.
fn deviance_term(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        return s;
    }
    x * (x / m).ln() + m - x
}

/// ln Poisson(n; λ), with ln 0 for impossible outcomes at λ = 0. Uses the
/// saddle-point form so large λ keeps full relative precision.
pub fn ln_poisson_pmf(n: u64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if n == 0 {
        return -lambda;
    }
    let x = n as f64;
    -0.5 * (2.0 * std::f64::consts::PI * x).ln() - stirling_error(n) - deviance_term(x, lambda)
}

pub fn poisson_pmf(n: u64, lambda: f64) -> f64 {
    ln_poisson_pmf(n, lambda).exp()
}

/// Certified truncation cutoff for intensity λ.
pub fn certified_cutoff(lambda: f64) -> Result<(usize, f64)> {
    let cutoff = fock_cutoff(lambda);
    let tail = poisson_tail_bound(lambda, cutoff);
    if tail > TAIL_TOLERANCE {
        return Err(MeterError::Truncation {
            tail,
            tolerance: TAIL_TOLERANCE,
            cutoff,
        });
    }
    Ok((cutoff, tail))
}

/// Poisson(λ) weights on 0..=cutoff with the certified tail.
pub fn poisson_weights(lambda: f64) -> Result<ProbVector> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(MeterError::invalid(format!("Poisson intensity {lambda}")));
    }
    let (cutoff, tail) = certified_cutoff(lambda)?;
    let weights = (0..=cutoff as u64)
        .map(|n| poisson_pmf(n, lambda))
        .collect();
    ProbVector::new(weights, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn large_intensity_poisson_is_normalized() {
        for &lambda in &[300.0, 5e3, 2e4] {
            let total = neumaier_sum(poisson_weights(lambda).unwrap().into_weights());
            assert!((total - 1.0).abs() < 1e-13, "λ = {lambda}: {total}");
        }
    }

    #[test]
    fn shannon_trivial_cases() {
        let p = ProbVector::exact(vec![1.0]).unwrap();
        assert_eq!(shannon_entropy(&p, Base::Natural).value, 0.0);
        let half = ProbVector::exact(vec![0.5, 0.5]).unwrap();
        assert!((shannon_entropy(&half, Base::Two).value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shannon_rejects_negative_weights() {
        assert!(matches!(
            shannon_nats(&[0.5, -0.1, 0.6]),
            Err(MeterError::Domain(_))
        ));
        assert!(ProbVector::exact(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn prob_vector_checks_sum_against_tail() {
        assert!(ProbVector::new(vec![0.5, 0.4], 1e-11).is_err());
        assert!(ProbVector::new(vec![0.5, 0.5 - 1e-11], 2e-11).is_ok());
        assert!(matches!(
            ProbVector::new(vec![0.5, 0.4], 0.1),
            Err(MeterError::Truncation { .. })
        ));
    }

    #[test]
    fn vn_entropy_pure_and_mixed() {
        let g = QubitState::ground();
        assert_eq!(vn_entropy_2x2(&g, Base::Natural).unwrap().value, 0.0);
        let mixed = QubitState::maximally_mixed();
        let s = vn_entropy_2x2(&mixed, Base::Natural).unwrap();
        assert!((s.value - LN_2).abs() < 1e-15);
    }

    #[test]
    fn vn_entropy_of_strongly_dephased_reference() {
        // eigenvalues ½(1 ± e^{−4.5}), binary entropy in bits
        let c = 0.5 * (-4.5f64).exp();
        let rho = QubitState::new(0.5, 0.5, Complex64::new(c, 0.0)).unwrap();
        let s = vn_entropy_2x2(&rho, Base::Two).unwrap().value;
        let lp = 0.5 * (1.0 + 2.0 * c);
        let lm = 0.5 * (1.0 - 2.0 * c);
        let expected = -(lp * lp.log2() + lm * lm.log2());
        assert!((s - expected).abs() < 1e-14);
        assert!((s - 0.99991).abs() < 5e-6);
    }

    #[test]
    fn vn_entropy_rejects_non_psd() {
        let bad = QubitState {
            p_g: 0.5,
            p_e: 0.5,
            rho_ge: Complex64::new(0.7, 0.0),
        };
        assert!(vn_entropy_2x2(&bad, Base::Natural).is_err());
    }

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert!((log_factorial(5) - 120f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_factorial_is_continuous_across_table_edge() {
        let below = log_factorial(255);
        let above = log_factorial(256);
        assert!((above - below - 256f64.ln()).abs() < 1e-11);
        let far = log_factorial(1000);
        assert!((far - log_factorial(999) - 1000f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn laguerre_low_degrees() {
        for &x in &[0.0, 0.3, 2.5, 11.0] {
            for k in 0..4 {
                assert_eq!(assoc_laguerre(0, k, x), 1.0);
                assert!((assoc_laguerre(1, k, x) - (1.0 + k as f64 - x)).abs() < 1e-14);
            }
            assert!((assoc_laguerre(1, 0, x) - (1.0 - x)).abs() < 1e-14);
            let l2 = 0.5 * (x * x - 4.0 * x + 2.0);
            assert!((assoc_laguerre(2, 0, x) - l2).abs() < 1e-12);
        }
    }

    #[test]
    fn laguerre_scaled_survives_huge_values() {
        // L_m^k(0) = C(m+k, m); C(1000, 500) ≈ 2.7e299 would overflow the
        // unscaled recurrence intermediates
        let v = assoc_laguerre_scaled(500, 500, 0.0);
        let exact = log_factorial(1000) - 2.0 * log_factorial(500);
        assert!((v.ln_abs - exact).abs() / exact < 1e-12);
        assert_eq!(v.sign, 1.0);
    }

    #[test]
    fn cutoff_rule_and_tail() {
        assert_eq!(fock_cutoff(0.0), 25);
        assert_eq!(fock_cutoff(9.0), 9 + 30 + 25);
        for &lambda in &[0.0, 0.01, 1.0, 9.0, 100.0, 1e4] {
            let (n, tail) = certified_cutoff(lambda).unwrap();
            assert!(tail <= 1e-12, "λ = {lambda}: tail {tail} at cutoff {n}");
        }
    }

    #[test]
    fn poisson_weights_cover_mass_at_large_intensity() {
        let p = poisson_weights(100.0).unwrap();
        assert!(p.total() >= 1.0 - 1e-12);
        assert!(p.weights().iter().all(|w| w.is_finite()));
    }
}
