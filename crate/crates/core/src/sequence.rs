//! Sequences of N identical measurements whose outcomes are concatenated into
//! a binary result by picking the eigenstate with the larger posterior.
//!
//! With a vacuum pointer the likelihood of an outcome tuple (n₁, …, n_N)
//! depends on it only through T = Σ nᵢ, so the posterior and the conditional
//! qubit state are functions of T alone. T is itself a mixture of two
//! Poisson variables of intensity N|α₁|² and N|α₂|², which turns the
//! exponential tuple space into a single sweep over T.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MeterError, Result};
use crate::measurement::{conditional_states, MeasurementParams, Outcome, OutcomeChannel};
use crate::metrics::{evaluate, MetricsReport, ObservableBasis};
use crate::numerics::{
    certified_cutoff, fock_cutoff, ln_poisson_pmf, log_factorial, neumaier_sum, poisson_tail_bound,
    shannon_entropy, Base, ProbVector,
};
use crate::qubit::QubitState;

/// Rule turning an outcome tuple into a binary result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Concatenation {
    /// Eigenstate with the highest posterior; ties go to g.
    #[default]
    BayesArgmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Eigenstate {
    G,
    E,
}

impl Eigenstate {
    pub fn label(&self) -> &'static str {
        match self {
            Eigenstate::G => "g",
            Eigenstate::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceSpec {
    pub n_steps: u64,
    pub params: MeasurementParams,
    pub concat: Concatenation,
    /// Initial qubit state; the reference state unless stated otherwise.
    pub qubit: QubitState,
}

impl SequenceSpec {
    pub fn new(n_steps: u64, params: MeasurementParams) -> Self {
        SequenceSpec {
            n_steps,
            params,
            concat: Concatenation::BayesArgmax,
            qubit: QubitState::reference(),
        }
    }

    pub fn with_qubit(mut self, qubit: QubitState) -> Self {
        self.qubit = qubit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(MeterError::invalid("a sequence needs at least one step"));
        }
        self.params.validate()?;
        self.qubit.validate()
    }
}

fn n_ln(t: usize, x: f64) -> f64 {
    if t == 0 {
        0.0
    } else {
        t as f64 * x.ln()
    }
}

/// Exact distribution of the sufficient statistic T with its conditional
/// states and binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StatTable {
    pub t_values: Vec<usize>,
    pub p_t: ProbVector,
    pub rho_given_t: Vec<QubitState>,
    pub label: Vec<Eigenstate>,
    /// Posterior p(g|T).
    pub posterior_g: Vec<f64>,
    post: QubitState,
}

/// Builds the T-table for a vacuum-pointer sequence.
pub fn build_stat_table(spec: &SequenceSpec) -> Result<StatTable> {
    spec.validate()?;
    if !spec.params.init.is_vacuum() {
        return Err(MeterError::Unsupported(
            "exact sequence evaluation needs a vacuum pointer".into(),
        ));
    }
    let n = spec.n_steps as f64;
    let a1 = spec.params.alpha1();
    let a2 = spec.params.alpha2();
    let (x1, x2) = (a1.norm_sqr(), a2.norm_sqr());
    let (l1, l2) = (n * x1, n * x2);
    let (t_max, _) = certified_cutoff(l1.max(l2))?;
    let q = &spec.qubit;
    let tail = q.p_g * poisson_tail_bound(l1, t_max) + q.p_e * poisson_tail_bound(l2, t_max);
    let ln_c0 = q.rho_ge.norm().ln();
    let cross_arg = (a1 * a2.conj()).arg();
    let ln_cross = n_ln(1, a1.norm()) + n_ln(1, a2.norm());

    let mut t_values = Vec::new();
    let mut weights = Vec::new();
    let mut rho_given_t = Vec::new();
    let mut label = Vec::new();
    let mut posterior_g = Vec::new();
    let mut pruned = 0.0;
    for t in 0..=t_max {
        let lg = if q.p_g > 0.0 {
            q.p_g.ln() + ln_poisson_pmf(t as u64, l1)
        } else {
            f64::NEG_INFINITY
        };
        let le = if q.p_e > 0.0 {
            q.p_e.ln() + ln_poisson_pmf(t as u64, l2)
        } else {
            f64::NEG_INFINITY
        };
        let wg = lg.exp();
        let we = le.exp();
        let pt = wg + we;
        if pt < crate::measurement::PRUNE_BELOW {
            pruned += pt;
            continue;
        }
        // coherence ρ_ge e^{−iNφ} e^{−N(x₁+x₂)/2} (α₁α₂*)^T N^T / T!
        let ln_t = if t == 0 {
            0.0
        } else {
            t as f64 * (ln_cross + n.ln())
        };
        let ln_mag = ln_c0 - 0.5 * n * (x1 + x2) + ln_t - log_factorial(t as u64);
        let coh = if ln_mag.is_finite() {
            let phase = q.rho_ge.arg() - n * spec.params.phi + t as f64 * cross_arg;
            let ln_pt = lg.max(le) + (-(lg - le).abs()).exp().ln_1p();
            Complex64::from_polar((ln_mag - ln_pt).exp(), phase)
        } else {
            Complex64::new(0.0, 0.0)
        };
        // posteriors from log weights, each with full relative precision
        let logistic = |a: f64, b: f64| {
            if a == f64::NEG_INFINITY {
                0.0
            } else {
                1.0 / (1.0 + (b - a).exp())
            }
        };
        let pg = logistic(lg, le);
        let mut rho = QubitState {
            p_g: pg,
            p_e: logistic(le, lg),
            rho_ge: coh,
        };
        let bound = (rho.p_g * rho.p_e).sqrt();
        if rho.rho_ge.norm() > bound {
            rho.rho_ge *= bound / rho.rho_ge.norm();
        }
        t_values.push(t);
        weights.push(pt);
        rho_given_t.push(rho);
        label.push(if lg >= le {
            Eigenstate::G
        } else {
            Eigenstate::E
        });
        posterior_g.push(pg);
    }
    let p_t = ProbVector::new(weights, tail + pruned)?;
    let factor = (Complex64::new(-0.5 * (x1 + x2), -spec.params.phi) + a1 * a2.conj()) * n;
    let post = QubitState {
        rho_ge: q.rho_ge * factor.exp(),
        ..*q
    };
    Ok(StatTable {
        t_values,
        p_t,
        rho_given_t,
        label,
        posterior_g,
        post,
    })
}

impl StatTable {
    /// Unconditional state after the whole sequence.
    pub fn post_state(&self) -> QubitState {
        self.post
    }

    /// Channel over the values of T.
    pub fn t_channel(&self) -> OutcomeChannel {
        OutcomeChannel {
            labels: self.t_values.iter().map(|&t| Outcome::Count(t)).collect(),
            probs: self.p_t.clone(),
            conditionals: self.rho_given_t.iter().map(|r| Some(*r)).collect(),
        }
    }

    /// Binary channel over the concatenated result, ordered (g, e).
    pub fn channel(&self) -> Result<OutcomeChannel> {
        let mut acc: [[Vec<f64>; 5]; 2] = Default::default();
        for ((&p, rho), lab) in self
            .p_t
            .weights()
            .iter()
            .zip(&self.rho_given_t)
            .zip(&self.label)
        {
            let a = &mut acc[(*lab == Eigenstate::E) as usize];
            a[0].push(p);
            a[1].push(p * rho.p_g);
            a[2].push(p * rho.p_e);
            a[3].push(p * rho.rho_ge.re);
            a[4].push(p * rho.rho_ge.im);
        }
        let mut weights = Vec::with_capacity(2);
        let mut conditionals = Vec::with_capacity(2);
        for a in &acc {
            let s: Vec<f64> = a.iter().map(|v| neumaier_sum(v.iter().copied())).collect();
            weights.push(s[0]);
            conditionals.push((s[0] > 0.0).then(|| {
                let tr = s[1] + s[2];
                QubitState {
                    p_g: s[1] / tr,
                    p_e: s[2] / tr,
                    rho_ge: Complex64::new(s[3], s[4]) / tr,
                }
            }));
        }
        Ok(OutcomeChannel {
            labels: vec![Outcome::Label("g".into()), Outcome::Label("e".into())],
            probs: ProbVector::new(weights, self.p_t.tail_bound())?,
            conditionals,
        })
    }
}

/// Figures of merit of the concatenated measurement.
pub fn sequence_metrics(spec: &SequenceSpec) -> Result<MetricsReport> {
    let table = build_stat_table(spec)?;
    metrics_from_table(&table)
}

fn metrics_from_table(table: &StatTable) -> Result<MetricsReport> {
    let fine = table.t_channel();
    let read = table.channel()?;
    evaluate(&fine, &read, &table.post_state(), ObservableBasis::SigmaZ)
}

/// Per-step dephasing bound times the number of steps (each step includes
/// the pointer and memory resets).
pub fn total_work_sequence(spec: &SequenceSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.n_steps as f64 * single_step_work(&spec.params, &spec.qubit)?)
}

/// Dephasing work bound of one measurement.
pub fn single_step_work(params: &MeasurementParams, qubit: &QubitState) -> Result<f64> {
    let fine = conditional_states(params, qubit)?;
    let h = shannon_entropy(&fine.probs, Base::Natural).value;
    let s_a = params.init.entropy_nats();
    Ok(crate::thermo::work_bound_dephasing(
        h,
        s_a,
        0.0,
        params.beta,
    ))
}

/// Monte Carlo estimate with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub report: MetricsReport,
    pub channel: OutcomeChannel,
    /// Standard errors of p_g, p_e of the binary result.
    pub p_se: [f64; 2],
    /// Batch-means standard errors of ξ, η and η_{X:r}.
    pub xi_se: f64,
    pub eta_se: Option<f64>,
    pub eta_xr_se: Option<f64>,
    pub n_samples: usize,
}

const MC_BATCHES: usize = 20;

/// Running sums of (count, p_g, p_e, Re ρ_ge, Im ρ_ge) per binary result.
#[derive(Clone, Copy, Default)]
struct Tally {
    count: [u64; 2],
    sums: [[f64; 4]; 2],
}

impl Tally {
    fn add(&mut self, other: &Tally) {
        for r in 0..2 {
            self.count[r] += other.count[r];
            for k in 0..4 {
                self.sums[r][k] += other.sums[r][k];
            }
        }
    }

    fn channel(&self) -> Result<(OutcomeChannel, QubitState)> {
        let total = (self.count[0] + self.count[1]) as f64;
        let mut weights = Vec::with_capacity(2);
        let mut conditionals = Vec::with_capacity(2);
        let mut post = [0.0f64; 4];
        for r in 0..2 {
            let c = self.count[r] as f64;
            weights.push(c / total);
            for k in 0..4 {
                post[k] += self.sums[r][k];
            }
            conditionals.push((self.count[r] > 0).then(|| {
                let s = &self.sums[r];
                let tr = s[0] + s[1];
                QubitState {
                    p_g: s[0] / tr,
                    p_e: s[1] / tr,
                    rho_ge: Complex64::new(s[2], s[3]) / tr,
                }
            }));
        }
        let tr = post[0] + post[1];
        let post = QubitState {
            p_g: post[0] / tr,
            p_e: post[1] / tr,
            rho_ge: Complex64::new(post[2], post[3]) / tr,
        };
        let channel = OutcomeChannel {
            labels: vec![Outcome::Label("g".into()), Outcome::Label("e".into())],
            probs: ProbVector::new(weights, 0.0)?,
            conditionals,
        };
        Ok((channel, post))
    }
}

/// Samples trajectories outcome by outcome with the per-step Kraus update,
/// labels each one by the literal Bayes posterior over the whole tuple and
/// estimates the binary channel and its metrics.
pub fn monte_carlo_oracle(spec: &SequenceSpec, n_samples: usize, seed: u64) -> Result<McEstimate> {
    spec.validate()?;
    if n_samples < 10_000 {
        return Err(MeterError::invalid(format!(
            "Monte Carlo needs at least 10^4 samples, got {n_samples}"
        )));
    }
    if !spec.params.init.is_vacuum() {
        return Err(MeterError::Unsupported(
            "Monte Carlo sampling is implemented for a vacuum pointer".into(),
        ));
    }
    let p = &spec.params;
    let (a1, a2) = (p.alpha1(), p.alpha2());
    let (x1, x2) = (a1.norm_sqr(), a2.norm_sqr());
    let cross_arg = (a1 * a2.conj()).arg();
    let cutoff = fock_cutoff(x1.max(x2));
    let pmf1: Vec<f64> = (0..=cutoff as u64).map(|n| ln_poisson_pmf(n, x1)).collect();
    let pmf2: Vec<f64> = (0..=cutoff as u64).map(|n| ln_poisson_pmf(n, x2)).collect();
    let ln_prior_g = spec.qubit.p_g.ln();
    let ln_prior_e = spec.qubit.p_e.ln();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch_len = n_samples.div_ceil(MC_BATCHES);
    let mut batches = vec![Tally::default(); MC_BATCHES];
    for s in 0..n_samples {
        let mut rho = spec.qubit;
        let mut ll_g = 0.0f64;
        let mut ll_e = 0.0f64;
        for _ in 0..spec.n_steps {
            // n ~ p(n|ρ): pick the branch, then invert its Poisson CDF
            let lnp = if rng.random::<f64>() < rho.p_g {
                &pmf1
            } else {
                &pmf2
            };
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut n = lnp.len() - 1;
            for (k, lp) in lnp.iter().enumerate() {
                acc += lp.exp();
                if u < acc {
                    n = k;
                    break;
                }
            }
            let wg = pmf1[n].exp();
            let we = pmf2[n].exp();
            ll_g += pmf1[n];
            ll_e += pmf2[n];
            let norm = rho.p_g * wg + rho.p_e * we;
            let coh = Complex64::from_polar((wg * we).sqrt(), n as f64 * cross_arg - p.phi);
            rho = QubitState {
                p_g: rho.p_g * wg / norm,
                p_e: rho.p_e * we / norm,
                rho_ge: rho.rho_ge * coh / norm,
            };
        }
        let r = usize::from(ln_prior_g + ll_g < ln_prior_e + ll_e);
        let b = &mut batches[s / batch_len];
        b.count[r] += 1;
        b.sums[r][0] += rho.p_g;
        b.sums[r][1] += rho.p_e;
        b.sums[r][2] += rho.rho_ge.re;
        b.sums[r][3] += rho.rho_ge.im;
    }

    let mut total = Tally::default();
    for b in &batches {
        total.add(b);
    }
    let (channel, post) = total.channel()?;
    let report = evaluate(&channel, &channel, &post, ObservableBasis::SigmaZ)?;
    let pg = channel.probs.weights()[0];
    let se_p = (pg * (1.0 - pg) / n_samples as f64).sqrt();

    let mut xs = Vec::new();
    let mut etas = Vec::new();
    let mut exrs = Vec::new();
    for b in batches.iter().filter(|b| b.count[0] + b.count[1] > 0) {
        let (ch, post) = b.channel()?;
        let r = evaluate(&ch, &ch, &post, ObservableBasis::SigmaZ)?;
        xs.push(r.xi);
        etas.push(r.eta);
        exrs.push(r.eta_xr);
    }
    Ok(McEstimate {
        report,
        channel,
        p_se: [se_p, se_p],
        xi_se: batch_se(&xs),
        eta_se: all_defined(&etas).map(|v| batch_se(&v)),
        eta_xr_se: all_defined(&exrs).map(|v| batch_se(&v)),
        n_samples,
    })
}

fn all_defined(v: &[Option<f64>]) -> Option<Vec<f64>> {
    v.iter().copied().collect()
}

fn batch_se(v: &[f64]) -> f64 {
    let k = v.len() as f64;
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

/// Seed for one grid cell from the master seed and the cell coordinates
/// (SplitMix64 mixing), so results do not depend on evaluation order.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    coords.iter().fold(mix(master), |acc, &c| mix(acc ^ mix(c)))
}

/// Minimum values all three figures of merit must reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub xi: f64,
    pub eta: f64,
    pub eta_xr: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::uniform(0.999)
    }
}

impl Thresholds {
    pub fn uniform(v: f64) -> Self {
        Thresholds {
            xi: v,
            eta: v,
            eta_xr: v,
        }
    }

    pub fn met_by(&self, r: &MetricsReport) -> bool {
        r.xi >= self.xi
            && r.eta.is_some_and(|e| e >= self.eta)
            && r.eta_xr.is_some_and(|e| e >= self.eta_xr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NStar {
    Converged(u64),
    /// The thresholds were not met for any N up to `n_max`.
    NotConverged {
        n_max: u64,
    },
}

impl NStar {
    pub fn value(&self) -> Option<u64> {
        match self {
            NStar::Converged(n) => Some(*n),
            NStar::NotConverged { .. } => None,
        }
    }
}

/// Search cap ⌈20/|ε|²⌉ (at least 1).
pub fn n_star_cap(params: &MeasurementParams) -> u64 {
    let e2 = params.epsilon.norm_sqr();
    if e2 == 0.0 {
        return 1;
    }
    ((20.0 / e2).ceil() as u64).max(1)
}

/// Smallest N meeting the thresholds: doubling, then bisection. Assumes the
/// pass/fail pattern is monotone in N between the bracketing points.
pub fn find_n_star(
    params: &MeasurementParams,
    qubit: &QubitState,
    thresholds: &Thresholds,
) -> Result<NStar> {
    let n_max = n_star_cap(params);
    let passes = |n: u64| -> Result<bool> {
        let spec = SequenceSpec::new(n, *params).with_qubit(*qubit);
        Ok(thresholds.met_by(&sequence_metrics(&spec)?))
    };
    let mut lo = 0u64; // largest N known to fail (0: none tested)
    let mut hi = 1u64;
    loop {
        if passes(hi)? {
            break;
        }
        if hi >= n_max {
            return Ok(NStar::NotConverged { n_max });
        }
        lo = hi;
        hi = (hi * 2).min(n_max);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(NStar::Converged(hi))
}

/// Phenomenological scaling of the work of weak sequences and of a single
/// strong measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingModel {
    /// Weak-limit per-step entropy H₀ (nats).
    pub h0: f64,
    /// Number of well-separated pointer components K.
    pub k_outcomes: u32,
    /// Exponent l of the pointer width σ ∝ ε^l, 0 or 1.
    pub l_exponent: u32,
    pub sigma0: f64,
    /// Proportionality constant c in W_weak = c·H₀/ε².
    pub weak_prefactor: f64,
}

impl ScalingModel {
    pub fn new(h0: f64, k_outcomes: u32, l_exponent: u32, sigma0: f64) -> Result<Self> {
        if !(h0 >= 0.0) || k_outcomes < 2 || l_exponent > 1 {
            return Err(MeterError::invalid(format!(
                "scaling model H0 = {h0}, K = {k_outcomes}, l = {l_exponent}"
            )));
        }
        Ok(ScalingModel {
            h0,
            k_outcomes,
            l_exponent,
            sigma0,
            weak_prefactor: 1.0,
        })
    }

    /// Fits c from the two smallest-ε points of (ε, W_total) data.
    pub fn fit_weak_prefactor(&mut self, points: &[(f64, f64)]) -> Result<f64> {
        if points.len() < 2 || self.h0 <= 0.0 {
            return Err(MeterError::invalid(
                "fit needs two points and a positive H0",
            ));
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let c = sorted[..2]
            .iter()
            .map(|&(e, w)| w * e * e / self.h0)
            .sum::<f64>()
            / 2.0;
        self.weak_prefactor = c;
        Ok(c)
    }
}

/// (W_weak, W_strong) predicted at ε.
pub fn scaling_predictions(model: &ScalingModel, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(MeterError::invalid(format!("ε = {eps}")));
    }
    let w_weak = model.weak_prefactor * model.h0 / (eps * eps);
    let l = model.l_exponent as f64;
    let w_strong = model.k_outcomes as f64 * (l * (2.0 * std::f64::consts::PI * eps).ln() + 0.5);
    Ok((w_weak, w_strong))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::unconditional_post_state;

    #[test]
    fn one_step_reproduces_single_shot() {
        let p = MeasurementParams::real(0.4, 0.7);
        let q = QubitState::from_bloch(0.6, 0.2, -0.3).unwrap();
        let table = build_stat_table(&SequenceSpec::new(1, p).with_qubit(q)).unwrap();
        let single = conditional_states(&p, &q).unwrap();
        assert_eq!(table.t_values.len(), single.len());
        for (i, rho) in table.rho_given_t.iter().enumerate() {
            assert!((table.p_t.weights()[i] - single.probs.weights()[i]).abs() < 1e-15);
            let d = rho.max_abs_diff(&single.conditionals[i].unwrap());
            assert!(d < 1e-13, "T = {i}: {d} {rho:?} {:?}", single.conditionals[i]);
        }
        let post = unconditional_post_state(&p, &q).unwrap();
        assert!(table.post_state().max_abs_diff(&post) < 1e-15);
    }

    #[test]
    fn any_click_means_ground_when_alpha_bar_equals_epsilon() {
        let p = MeasurementParams::real(0.1, 0.1);
        let table = build_stat_table(&SequenceSpec::new(40, p)).unwrap();
        for (i, &t) in table.t_values.iter().enumerate() {
            if t > 0 {
                assert_eq!(table.label[i], Eigenstate::G);
                assert_eq!(table.posterior_g[i], 1.0);
            } else {
                // p_g e^{−4Nε²} < p_e
                assert_eq!(table.label[i], Eigenstate::E);
            }
        }
        let r = sequence_metrics(&SequenceSpec::new(40, p)).unwrap();
        assert!((r.eta.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ties_resolve_to_ground() {
        let p = MeasurementParams::real(0.5, 0.0);
        let table = build_stat_table(&SequenceSpec::new(3, p)).unwrap();
        assert!(table.label.iter().all(|&l| l == Eigenstate::G));
        let r = sequence_metrics(&SequenceSpec::new(3, p)).unwrap();
        assert_eq!(r.eta_xr, None);
    }

    #[test]
    fn total_work_is_linear() {
        let p = MeasurementParams::real(0.2, 0.2);
        let one = total_work_sequence(&SequenceSpec::new(1, p)).unwrap();
        let many = total_work_sequence(&SequenceSpec::new(37, p)).unwrap();
        assert!((many - 37.0 * one).abs() < 1e-12 * many);
    }

    #[test]
    fn strong_measurement_needs_one_step() {
        let p = MeasurementParams::real(1.5, 1.5);
        let n = find_n_star(&p, &QubitState::reference(), &Thresholds::default()).unwrap();
        assert_eq!(n, NStar::Converged(1));
    }

    #[test]
    fn looser_threshold_needs_fewer_steps() {
        let p = MeasurementParams::real(0.1, 0.1);
        let q = QubitState::reference();
        let strict = find_n_star(&p, &q, &Thresholds::default())
            .unwrap()
            .value()
            .unwrap();
        let loose = find_n_star(&p, &q, &Thresholds::uniform(0.5))
            .unwrap()
            .value()
            .unwrap();
        assert!(loose < strict);
    }

    #[test]
    fn zero_coupling_never_converges() {
        let p = MeasurementParams::real(0.3, 0.0);
        let r = find_n_star(&p, &QubitState::reference(), &Thresholds::default()).unwrap();
        assert!(matches!(r, NStar::NotConverged { .. }));
    }

    #[test]
    fn strong_prediction_plug_in() {
        let m = ScalingModel::new(1.0, 2, 1, 1.0).unwrap();
        let (_, ws) = scaling_predictions(&m, 1.5).unwrap();
        assert!((ws - 2.0 * ((3.0 * std::f64::consts::PI).ln() + 0.5)).abs() < 1e-14);
        let flat = ScalingModel::new(1.0, 2, 0, 1.0).unwrap();
        assert_eq!(
            scaling_predictions(&flat, 0.1).unwrap().1,
            scaling_predictions(&flat, 3.0).unwrap().1
        );
    }

    #[test]
    fn seeds_depend_on_coordinates() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(8, &[1, 2]));
    }

    #[test]
    fn monte_carlo_without_coupling_is_exact() {
        let spec = SequenceSpec::new(5, MeasurementParams::real(0.3, 0.0));
        let mc = monte_carlo_oracle(&spec, 10_000, 1).unwrap();
        let exact = sequence_metrics(&spec).unwrap();
        assert_eq!(mc.channel.probs.weights(), &[1.0, 0.0]);
        assert_eq!(mc.report.xi, exact.xi);
        assert_eq!(mc.report.eta, exact.eta);
        assert!(monte_carlo_oracle(&spec, 100, 1).is_err());
    }
}
