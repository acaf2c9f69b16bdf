//! The measurement channel: outcome statistics, Kraus operators, conditional
//! qubit states and coarse-graining.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{MeterError, Result};
use crate::fock::{build_joint_predephasing, dephase, AncillaInit, JointState};
use crate::numerics::{
    certified_cutoff, ln_poisson_pmf, log_factorial, neumaier_sum, poisson_pmf, poisson_tail_bound,
    ProbVector, TAIL_TOLERANCE,
};
use crate::qubit::{Mat2, QubitState};

/// Outcomes with probability below this are removed from the support and
/// their mass is booked into the tail.
pub const PRUNE_BELOW: f64 = 1e-300;

/// Model parameters. The pointer ends up displaced by α₁ = ᾱ + ε when the
/// qubit is in |g⟩ and by α₂ = ᾱ − ε when it is in |e⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementParams {
    pub alpha_bar: Complex64,
    pub epsilon: Complex64,
    /// Net phase accumulated on the ge coherence.
    pub phi: f64,
    /// Inverse temperature of the reset baths.
    pub beta: f64,
    pub omega_a: f64,
    /// Qubit frequency; carried along, enters no computed quantity.
    pub omega_q: f64,
    pub init: AncillaInit,
}

impl MeasurementParams {
    /// Real ᾱ and ε, vacuum pointer, φ = 0, β = ω_a = 1.
    pub fn real(alpha_bar: f64, epsilon: f64) -> Self {
        MeasurementParams {
            alpha_bar: Complex64::new(alpha_bar, 0.0),
            epsilon: Complex64::new(epsilon, 0.0),
            phi: 0.0,
            beta: 1.0,
            omega_a: 1.0,
            omega_q: 0.0,
            init: AncillaInit::Vacuum,
        }
    }

    pub fn with_init(mut self, init: AncillaInit) -> Self {
        self.init = init;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn alpha1(&self) -> Complex64 {
        self.alpha_bar + self.epsilon
    }

    pub fn alpha2(&self) -> Complex64 {
        self.alpha_bar - self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        let a1 = self.alpha1();
        let a2 = self.alpha2();
        if !(a1.is_finite() && a2.is_finite() && self.phi.is_finite()) {
            return Err(MeterError::invalid("non-finite displacement or phase"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(MeterError::invalid(format!("β = {}", self.beta)));
        }
        if !(self.omega_a > 0.0 && self.omega_a.is_finite()) {
            return Err(MeterError::invalid(format!("ω_a = {}", self.omega_a)));
        }
        if !(self.omega_q >= 0.0 && self.omega_q.is_finite()) {
            return Err(MeterError::invalid(format!("ω = {}", self.omega_q)));
        }
        self.init.validate()
    }
}

/// Label of one measurement outcome.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// Raw photon number n.
    Count(usize),
    /// Coarse-grained result r.
    Label(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Count(n) => write!(f, "{n}"),
            Outcome::Label(s) => f.write_str(s),
        }
    }
}

/// Outcome set with probabilities and conditional qubit states. A
/// conditional is `None` when its outcome has zero probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeChannel {
    pub labels: Vec<Outcome>,
    pub probs: ProbVector,
    pub conditionals: Vec<Option<QubitState>>,
}

impl OutcomeChannel {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Σ_r p_r ρ_{S|r}.
    pub fn reconstruct(&self) -> QubitState {
        let mut gg = Vec::with_capacity(self.len());
        let mut ee = Vec::with_capacity(self.len());
        let mut ge_re = Vec::with_capacity(self.len());
        let mut ge_im = Vec::with_capacity(self.len());
        for (p, rho) in self.probs.weights().iter().zip(&self.conditionals) {
            if let Some(rho) = rho {
                gg.push(p * rho.p_g);
                ee.push(p * rho.p_e);
                ge_re.push(p * rho.rho_ge.re);
                ge_im.push(p * rho.rho_ge.im);
            }
        }
        QubitState {
            p_g: neumaier_sum(gg),
            p_e: neumaier_sum(ee),
            rho_ge: Complex64::new(neumaier_sum(ge_re), neumaier_sum(ge_im)),
        }
    }

    /// Iterator over (p_r, ρ_{S|r}) for outcomes that occur.
    pub fn support(&self) -> impl Iterator<Item = (f64, &QubitState)> {
        self.probs
            .weights()
            .iter()
            .zip(&self.conditionals)
            .filter_map(|(&p, rho)| rho.as_ref().map(|r| (p, r)))
    }
}

/// Assembles a channel from per-outcome unnormalized entries (gg, ee, ge),
/// pruning outcomes below [`PRUNE_BELOW`].
fn channel_from_entries(
    entries: impl IntoIterator<Item = (usize, f64, f64, Complex64)>,
    tail: f64,
) -> Result<OutcomeChannel> {
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    let mut conditionals = Vec::new();
    let mut pruned = 0.0;
    for (n, gg, ee, ge) in entries {
        let gg = gg.max(0.0);
        let ee = ee.max(0.0);
        let p = gg + ee;
        if p < PRUNE_BELOW {
            pruned += p;
            continue;
        }
        let mut rho = QubitState {
            p_g: gg / p,
            p_e: ee / p,
            rho_ge: ge / p,
        };
        // rounding can push |ρ_ge|² marginally above p_g p_e
        let bound = (rho.p_g * rho.p_e).sqrt();
        let mag = rho.rho_ge.norm();
        if mag > bound {
            rho.rho_ge *= bound / mag;
        }
        labels.push(Outcome::Count(n));
        weights.push(p);
        conditionals.push(Some(rho));
    }
    let probs = ProbVector::new(weights, tail + pruned)?;
    Ok(OutcomeChannel {
        labels,
        probs,
        conditionals,
    })
}

fn n_ln(n: usize, r: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * r.ln()
    }
}

/// Cutoff and certified tail for the vacuum-pointer channel.
fn vacuum_cutoff(params: &MeasurementParams) -> Result<(usize, f64)> {
    let lambda = params.alpha1().norm_sqr().max(params.alpha2().norm_sqr());
    certified_cutoff(lambda)
}

/// Fine-grained outcome distribution p_n.
pub fn outcome_probabilities(params: &MeasurementParams, qubit: &QubitState) -> Result<ProbVector> {
    params.validate()?;
    qubit.validate()?;
    match params.init {
        AncillaInit::Vacuum => {
            let (cutoff, _) = vacuum_cutoff(params)?;
            let x1 = params.alpha1().norm_sqr();
            let x2 = params.alpha2().norm_sqr();
            let weights = (0..=cutoff as u64)
                .map(|n| qubit.p_g * poisson_pmf(n, x1) + qubit.p_e * poisson_pmf(n, x2))
                .collect();
            let tail = qubit.p_g * poisson_tail_bound(x1, cutoff)
                + qubit.p_e * poisson_tail_bound(x2, cutoff);
            ProbVector::new(weights, tail)
        }
        AncillaInit::Thermal { .. } => {
            let joint = dephase(&build_joint_predephasing(params, qubit, params.init)?);
            let gg = joint.gg.diagonal();
            let ee = joint.ee.diagonal();
            let weights = gg
                .iter()
                .zip(&ee)
                .map(|(g, e)| (g.re + e.re).max(0.0))
                .collect();
            ProbVector::new(weights, joint.tail_bound)
        }
    }
}

/// Kraus operator M_n of the vacuum-pointer channel.
pub fn kraus_operator(n: usize, params: &MeasurementParams) -> Result<Mat2> {
    params.validate()?;
    if !params.init.is_vacuum() {
        return Err(MeterError::Unsupported(
            "thermal pointer has no single Kraus operator per outcome".into(),
        ));
    }
    let amp = |a: Complex64| -> Complex64 {
        let ln_mag = -0.5 * a.norm_sqr() + n_ln(n, a.norm()) - 0.5 * log_factorial(n as u64);
        if ln_mag == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(ln_mag.exp(), n as f64 * a.arg())
        }
    };
    let g = amp(params.alpha1()) * Complex64::from_polar(1.0, -params.phi);
    let e = amp(params.alpha2());
    Ok(Mat2::diag(g, e))
}

/// Fine-grained channel {p_n, ρ_{S|n}}.
pub fn conditional_states(
    params: &MeasurementParams,
    qubit: &QubitState,
) -> Result<OutcomeChannel> {
    params.validate()?;
    qubit.validate()?;
    match params.init {
        AncillaInit::Vacuum => vacuum_channel(params, qubit),
        AncillaInit::Thermal { .. } => {
            let joint = dephase(&build_joint_predephasing(params, qubit, params.init)?);
            channel_from_joint(&joint)
        }
    }
}

fn vacuum_channel(params: &MeasurementParams, qubit: &QubitState) -> Result<OutcomeChannel> {
    let (cutoff, _) = vacuum_cutoff(params)?;
    let a1 = params.alpha1();
    let a2 = params.alpha2();
    let (x1, x2) = (a1.norm_sqr(), a2.norm_sqr());
    let tail =
        qubit.p_g * poisson_tail_bound(x1, cutoff) + qubit.p_e * poisson_tail_bound(x2, cutoff);
    let ln_ge0 = qubit.rho_ge.norm().ln();
    let cross_arg = (a1 * a2.conj()).arg();
    let entries = (0..=cutoff).map(|n| {
        let lf = log_factorial(n as u64);
        let gg = if qubit.p_g > 0.0 {
            (qubit.p_g.ln() - x1 + n_ln(n, x1) - lf).exp()
        } else {
            0.0
        };
        let ee = if qubit.p_e > 0.0 {
            (qubit.p_e.ln() - x2 + n_ln(n, x2) - lf).exp()
        } else {
            0.0
        };
        let ln_mag = ln_ge0 - 0.5 * (x1 + x2) + n_ln(n, a1.norm()) + n_ln(n, a2.norm()) - lf;
        let ge = if ln_mag.is_finite() {
            let phase = qubit.rho_ge.arg() - params.phi + n as f64 * cross_arg;
            Complex64::from_polar(ln_mag.exp(), phase)
        } else {
            Complex64::new(0.0, 0.0)
        };
        (n, gg, ee, ge)
    });
    channel_from_entries(entries, tail)
}

/// Fine-grained channel read off the diagonals of a dephased joint state.
pub fn channel_from_joint(joint: &JointState) -> Result<OutcomeChannel> {
    if !joint.dephased {
        return Err(MeterError::invalid("joint state has not been dephased"));
    }
    let gg = joint.gg.diagonal();
    let ee = joint.ee.diagonal();
    let ge = joint.ge.diagonal();
    let entries = (0..joint.dim()).map(|n| (n, gg[n].re, ee[n].re, ge[n]));
    channel_from_entries(entries, joint.tail_bound)
}

/// Average post-measurement state Σ_n p_n ρ_{S|n}.
pub fn unconditional_post_state(
    params: &MeasurementParams,
    qubit: &QubitState,
) -> Result<QubitState> {
    params.validate()?;
    qubit.validate()?;
    match params.init {
        AncillaInit::Vacuum => {
            let a1 = params.alpha1();
            let a2 = params.alpha2();
            // ⟨α₂|α₁⟩ e^{−iφ}
            let exponent = Complex64::new(-0.5 * (a1.norm_sqr() + a2.norm_sqr()), -params.phi)
                + a1 * a2.conj();
            Ok(QubitState {
                rho_ge: qubit.rho_ge * exponent.exp(),
                ..*qubit
            })
        }
        AncillaInit::Thermal { .. } => {
            let joint = build_joint_predephasing(params, qubit, params.init)?;
            Ok(QubitState {
                rho_ge: joint.ge.trace(),
                ..*qubit
            })
        }
    }
}

/// Deterministic partition of the photon numbers into labeled bins.
#[derive(Debug, Clone, PartialEq)]
pub enum CoarseGraining {
    /// Every n is its own outcome.
    Singletons,
    /// {0} ↦ "e", {n ≥ 1} ↦ "g": a detector that only registers clicks.
    Photodiode,
    /// Bins [0, c₁), [c₁, c₂), …, [c_k, ∞) for strictly increasing cuts.
    Intervals(Vec<usize>),
    /// n ↦ n mod k.
    Modulo(usize),
    /// Explicit labeled sets, plus an optional label collecting the rest.
    Explicit {
        bins: Vec<(String, Vec<usize>)>,
        rest: Option<String>,
    },
}

impl CoarseGraining {
    pub fn validate(&self) -> Result<()> {
        match self {
            CoarseGraining::Singletons | CoarseGraining::Photodiode => Ok(()),
            CoarseGraining::Intervals(cuts) => {
                if cuts.is_empty() || cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(MeterError::invalid(format!("interval cuts {cuts:?}")));
                }
                Ok(())
            }
            CoarseGraining::Modulo(k) => {
                if *k == 0 {
                    return Err(MeterError::invalid("modulo 0 binning"));
                }
                Ok(())
            }
            CoarseGraining::Explicit { bins, rest } => {
                let mut seen = BTreeSet::new();
                let mut names = BTreeSet::new();
                for (label, set) in bins {
                    if set.is_empty() {
                        return Err(MeterError::invalid(format!("bin {label} is empty")));
                    }
                    if !names.insert(label.as_str()) {
                        return Err(MeterError::invalid(format!("duplicate bin label {label}")));
                    }
                    for &n in set {
                        if !seen.insert(n) {
                            return Err(MeterError::Unsupported(format!(
                                "photon number {n} belongs to two bins (non-orthogonal projectors)"
                            )));
                        }
                    }
                }
                if let Some(r) = rest {
                    if names.contains(r.as_str()) {
                        return Err(MeterError::invalid(format!("duplicate bin label {r}")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Bin labels in output order.
    fn bin_labels(&self) -> Vec<String> {
        match self {
            CoarseGraining::Singletons => Vec::new(),
            CoarseGraining::Photodiode => vec!["e".into(), "g".into()],
            CoarseGraining::Intervals(cuts) => {
                let mut out = Vec::with_capacity(cuts.len() + 1);
                let mut lo = 0;
                for &c in cuts {
                    out.push(format!("[{lo},{c})"));
                    lo = c;
                }
                out.push(format!("[{lo},inf)"));
                out
            }
            CoarseGraining::Modulo(k) => (0..*k).map(|r| format!("{r} mod {k}")).collect(),
            CoarseGraining::Explicit { bins, rest } => bins
                .iter()
                .map(|(l, _)| l.clone())
                .chain(rest.iter().cloned())
                .collect(),
        }
    }

    /// Index of the bin holding photon number n.
    pub fn assign(&self, n: usize) -> Option<usize> {
        match self {
            CoarseGraining::Singletons => Some(n),
            CoarseGraining::Photodiode => Some(usize::from(n > 0)),
            CoarseGraining::Intervals(cuts) => Some(cuts.partition_point(|&c| c <= n)),
            CoarseGraining::Modulo(k) => Some(n % k),
            CoarseGraining::Explicit { bins, rest } => bins
                .iter()
                .position(|(_, set)| set.contains(&n))
                .or_else(|| rest.as_ref().map(|_| bins.len())),
        }
    }
}

/// Applies a coarse-graining to a fine-grained channel.
pub fn coarse_grain(channel: &OutcomeChannel, cg: &CoarseGraining) -> Result<OutcomeChannel> {
    cg.validate()?;
    if *cg == CoarseGraining::Singletons {
        return Ok(channel.clone());
    }
    let names = cg.bin_labels();
    let k = names.len();
    let mut p = vec![Vec::new(); k];
    let mut gg = vec![Vec::new(); k];
    let mut ee = vec![Vec::new(); k];
    let mut re = vec![Vec::new(); k];
    let mut im = vec![Vec::new(); k];
    for ((label, &pn), rho) in channel
        .labels
        .iter()
        .zip(channel.probs.weights())
        .zip(&channel.conditionals)
    {
        let n = match label {
            Outcome::Count(n) => *n,
            Outcome::Label(l) => {
                return Err(MeterError::invalid(format!(
                    "outcome {l} is already coarse-grained"
                )))
            }
        };
        let r = cg
            .assign(n)
            .ok_or_else(|| MeterError::invalid(format!("photon number {n} is in no bin")))?;
        let Some(rho) = rho else { continue };
        p[r].push(pn);
        gg[r].push(pn * rho.p_g);
        ee[r].push(pn * rho.p_e);
        re[r].push(pn * rho.rho_ge.re);
        im[r].push(pn * rho.rho_ge.im);
    }
    let mut weights = Vec::with_capacity(k);
    let mut conditionals = Vec::with_capacity(k);
    for r in 0..k {
        let pr = neumaier_sum(p[r].iter().copied());
        weights.push(pr);
        let rho = if pr > 0.0 {
            let mut s = QubitState {
                p_g: neumaier_sum(gg[r].iter().copied()) / pr,
                p_e: neumaier_sum(ee[r].iter().copied()) / pr,
                rho_ge: Complex64::new(
                    neumaier_sum(re[r].iter().copied()),
                    neumaier_sum(im[r].iter().copied()),
                ) / pr,
            };
            let t = s.p_g + s.p_e;
            s.p_g /= t;
            s.p_e /= t;
            s.rho_ge /= t;
            Some(s)
        } else {
            None
        };
        conditionals.push(rho);
    }
    Ok(OutcomeChannel {
        labels: names.into_iter().map(Outcome::Label).collect(),
        probs: ProbVector::new(weights, channel.probs.tail_bound())?,
        conditionals,
    })
}

/// First-order (in ε) dephased joint state and outcome statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakExpansion {
    /// p_{εn}, possibly marginally negative far in the tail.
    pub p: Vec<f64>,
    pub gg: Vec<f64>,
    pub ee: Vec<f64>,
    pub ge: Vec<Complex64>,
    pub tail_bound: f64,
}

impl WeakExpansion {
    /// The expansion as a channel. First-order weights that came out
    /// negative are zeroed and their magnitude is added to the tail.
    pub fn channel(&self) -> Result<OutcomeChannel> {
        let mut extra = 0.0;
        let entries: Vec<_> = (0..self.p.len())
            .map(|n| {
                if self.gg[n] < 0.0 || self.ee[n] < 0.0 {
                    extra += self.gg[n].abs() + self.ee[n].abs();
                    (n, 0.0, 0.0, Complex64::new(0.0, 0.0))
                } else {
                    (n, self.gg[n], self.ee[n], self.ge[n])
                }
            })
            .collect();
        channel_from_entries(entries, self.tail_bound + extra)
    }

    pub fn probabilities(&self) -> Result<ProbVector> {
        Ok(self.channel()?.probs)
    }
}

/// Expansion of the dephased joint state to first order in a small real ε.
pub fn weak_expansion(params: &MeasurementParams, qubit: &QubitState) -> Result<WeakExpansion> {
    params.validate()?;
    qubit.validate()?;
    if params.epsilon.im != 0.0 || params.epsilon.re.abs() > 0.1 {
        return Err(MeterError::invalid(format!(
            "weak expansion needs real |ε| ≤ 0.1, got {}",
            params.epsilon
        )));
    }
    if !params.init.is_vacuum() {
        return Err(MeterError::Unsupported(
            "weak expansion is only available for a vacuum pointer".into(),
        ));
    }
    let eps = params.epsilon.re;
    let ab = params.alpha_bar;
    let x = ab.norm_sqr();
    let reach = ab.norm() + eps.abs();
    let (cutoff, _) = certified_cutoff(reach * reach)?;
    let tail = poisson_tail_bound(x, cutoff);
    if tail > TAIL_TOLERANCE {
        return Err(MeterError::Truncation {
            tail,
            tolerance: TAIL_TOLERANCE,
            cutoff,
        });
    }
    let phase = Complex64::from_polar(1.0, -params.phi);
    let mut out = WeakExpansion {
        p: Vec::with_capacity(cutoff + 1),
        gg: Vec::with_capacity(cutoff + 1),
        ee: Vec::with_capacity(cutoff + 1),
        ge: Vec::with_capacity(cutoff + 1),
        tail_bound: tail,
    };
    for n in 0..=cutoff {
        let pn = ln_poisson_pmf(n as u64, x).exp();
        // n·P_n/|ᾱ|² = P_{n−1}, finite also at ᾱ = 0
        let shifted = if n == 0 {
            0.0
        } else {
            ln_poisson_pmf(n as u64 - 1, x).exp()
        };
        let d = 2.0 * eps * ab.re * (shifted - pn);
        out.gg.push(qubit.p_g * (pn + d));
        out.ee.push(qubit.p_e * (pn - d));
        out.p.push(pn + (qubit.p_g - qubit.p_e) * d);
        let imag = Complex64::new(0.0, -2.0 * eps * ab.im * shifted);
        out.ge
            .push(qubit.rho_ge * phase * (Complex64::new(pn, 0.0) + imag));
    }
    Ok(out)
}
