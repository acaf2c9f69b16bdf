//! Figures of merit of a measurement channel and the information hierarchy
//! log d ≥ S[ρ_S] ≥ I_q ≥ χ ≥ I({j};{r}).

use crate::error::{MeterError, Result};
use crate::measurement::OutcomeChannel;
use crate::numerics::{neumaier_sum, vn_entropy_2x2, vn_nats, Base, Entropy};
use crate::qubit::QubitState;

/// Entropies below this many nats are treated as zero when they appear in
/// a denominator.
pub const UNDEFINED_BELOW: f64 = 1e-14;

/// Slack applied to every link of the information hierarchy.
pub const HIERARCHY_SLACK: f64 = 1e-9;

/// Observable whose eigenbasis defines the target labels j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObservableBasis {
    #[default]
    SigmaZ,
    SigmaX,
}

/// Undefined ratios (0/0) are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub xi: f64,
    pub eta: Option<f64>,
    pub eta_xr: Option<f64>,
    pub product: Option<f64>,
    pub s_rho_s: Entropy,
    /// Holevo quantity of the fine-grained channel, nats.
    pub i_q: f64,
    /// Holevo quantity of the read-out channel, nats.
    pub chi: f64,
    /// Classical mutual information between j and r, nats.
    pub i_classical: f64,
    pub dimension: usize,
}

/// S[ρ_S] / ln d.
pub fn strength_xi(post: &QubitState, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(MeterError::invalid(format!("dimension {d}")));
    }
    Ok(vn_entropy_2x2(post, Base::Natural)?.value / (d as f64).ln())
}

/// χ = S(ρ_S) − Σ_r p_r S(ρ_{S|r}) in nats.
pub fn holevo_chi(channel: &OutcomeChannel, post: &QubitState) -> f64 {
    let avg = neumaier_sum(channel.support().map(|(p, rho)| p * vn_nats(rho)));
    vn_nats(post) - avg
}

/// η = χ / S(ρ_S).
pub fn efficiency_eta(channel: &OutcomeChannel, post: &QubitState) -> Option<f64> {
    let s = vn_nats(post);
    (s > UNDEFINED_BELOW).then(|| holevo_chi(channel, post) / s)
}

/// I({j};{r}) for the joint p_{j,r} = p_r ⟨j|ρ_{S|r}|j⟩, in nats.
pub fn classical_mutual_information(channel: &OutcomeChannel, basis: ObservableBasis) -> f64 {
    let x_basis = basis == ObservableBasis::SigmaX;
    let mut marginal = [0.0f64; 2];
    for (p, rho) in channel.support() {
        let q = rho.populations_in(x_basis);
        marginal[0] += p * q[0];
        marginal[1] += p * q[1];
    }
    let terms = channel.support().flat_map(|(p, rho)| {
        let q = rho.populations_in(x_basis);
        (0..2).map(move |j| {
            if q[j] > 0.0 && p > 0.0 {
                p * q[j] * (q[j] / marginal[j]).ln()
            } else {
                0.0
            }
        })
    });
    neumaier_sum(terms)
}

/// η_{X:r} = I({j};{r}) / χ.
pub fn eta_mutual(
    channel: &OutcomeChannel,
    post: &QubitState,
    basis: ObservableBasis,
) -> Option<f64> {
    let chi = holevo_chi(channel, post);
    (chi > UNDEFINED_BELOW).then(|| classical_mutual_information(channel, basis) / chi)
}

/// Evaluates every metric. `fine` is the fine-grained channel (for I_q),
/// `read` the channel actually read out (possibly coarse-grained) and
/// `post` the unconditional post-measurement state.
pub fn evaluate(
    fine: &OutcomeChannel,
    read: &OutcomeChannel,
    post: &QubitState,
    basis: ObservableBasis,
) -> Result<MetricsReport> {
    let s = vn_entropy_2x2(post, Base::Natural)?;
    let xi = strength_xi(post, 2)?;
    let i_q = holevo_chi(fine, post);
    let chi = holevo_chi(read, post);
    let i_classical = classical_mutual_information(read, basis);
    let eta = (s.value > UNDEFINED_BELOW).then(|| chi / s.value);
    let eta_xr = (chi > UNDEFINED_BELOW).then(|| i_classical / chi);
    let product = match (eta, eta_xr) {
        (Some(a), Some(b)) => Some(xi * a * b),
        _ => None,
    };
    Ok(MetricsReport {
        xi,
        eta,
        eta_xr,
        product,
        s_rho_s: s,
        i_q,
        chi,
        i_classical,
        dimension: 2,
    })
}

/// Outcome of checking one link `lhs ≥ rhs` of the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks log d ≥ S ≥ I_q ≥ χ ≥ I, in that order.
pub fn hierarchy_check(report: &MetricsReport) -> [HierarchyLink; 4] {
    let ln_d = (report.dimension as f64).ln();
    let s = report.s_rho_s.nats();
    let pairs = [
        ("log d >= S", ln_d, s),
        ("S >= I_q", s, report.i_q),
        ("I_q >= chi", report.i_q, report.chi),
        ("chi >= I", report.chi, report.i_classical),
    ];
    pairs.map(|(name, lhs, rhs)| HierarchyLink {
        name,
        lhs,
        rhs,
        holds: lhs + HIERARCHY_SLACK >= rhs,
    })
}

/// Like [`hierarchy_check`] but reports the first broken link as an error.
pub fn verify_hierarchy(report: &MetricsReport) -> Result<()> {
    match hierarchy_check(report).into_iter().find(|l| !l.holds) {
        Some(l) => Err(MeterError::Hierarchy {
            link: l.name.to_string(),
            lhs: l.lhs,
            rhs: l.rhs,
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{
        coarse_grain, conditional_states, unconditional_post_state, CoarseGraining,
        MeasurementParams, Outcome,
    };
    use crate::numerics::ProbVector;

    fn run(ab: f64, eps: f64, cg: &CoarseGraining) -> MetricsReport {
        let p = MeasurementParams::real(ab, eps);
        let q = QubitState::reference();
        let fine = conditional_states(&p, &q).unwrap();
        let read = coarse_grain(&fine, cg).unwrap();
        let post = unconditional_post_state(&p, &q).unwrap();
        evaluate(&fine, &read, &post, ObservableBasis::SigmaZ).unwrap()
    }

    #[test]
    fn no_coupling_gives_zero_and_undefined_ratios() {
        let r = run(0.7, 0.0, &CoarseGraining::Singletons);
        assert_eq!(r.xi, 0.0);
        assert_eq!(r.eta, None);
        assert_eq!(r.eta_xr, None);
        assert_eq!(r.product, None);
        assert!(hierarchy_check(&r).iter().all(|l| l.holds));
    }

    #[test]
    fn single_outcome_channel_has_no_holevo_information() {
        let post = QubitState::maximally_mixed();
        let ch = OutcomeChannel {
            labels: vec![Outcome::Label("all".into())],
            probs: ProbVector::exact(vec![1.0]).unwrap(),
            conditionals: vec![Some(post)],
        };
        assert_eq!(holevo_chi(&ch, &post), 0.0);
    }

    #[test]
    fn fine_grained_vacuum_is_efficient() {
        let r = run(0.4, 0.9, &CoarseGraining::Singletons);
        assert!((r.eta.unwrap() - 1.0).abs() < 1e-10);
        assert!((r.chi - r.s_rho_s.nats()).abs() < 1e-10);
    }

    #[test]
    fn photodiode_holevo_strictly_between() {
        let r = run(0.8, 0.8, &CoarseGraining::Singletons);
        let pd = run(0.8, 0.8, &CoarseGraining::Photodiode);
        assert!(pd.chi > 0.0 && pd.chi <= r.s_rho_s.nats());
        let alt = run(0.5, 0.8, &CoarseGraining::Photodiode);
        assert!(alt.chi > 0.0 && alt.chi < alt.s_rho_s.nats());
    }

    #[test]
    fn product_equals_normalized_mutual_information() {
        let r = run(1.0, 0.7, &CoarseGraining::Intervals(vec![1, 3]));
        let want = r.i_classical / 2f64.ln();
        assert!((r.product.unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn hierarchy_error_names_link() {
        let mut r = run(1.0, 0.7, &CoarseGraining::Singletons);
        r.chi = r.i_q + 1.0;
        match verify_hierarchy(&r) {
            Err(MeterError::Hierarchy { link, .. }) => assert_eq!(link, "I_q >= chi"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sigma_x_information_is_bounded_by_holevo() {
        let p = MeasurementParams::real(1.0, 1.0);
        let q = QubitState::reference();
        let fine = conditional_states(&p, &q).unwrap();
        let post = unconditional_post_state(&p, &q).unwrap();
        let chi = holevo_chi(&fine, &post);
        let ix = classical_mutual_information(&fine, ObservableBasis::SigmaX);
        assert!(ix >= -1e-15 && ix <= chi);
    }
}
