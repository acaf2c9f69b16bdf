mod common;

use common::DoubleDouble;
use proptest::prelude::*;
use qmeter_core::analysis::{run_single_shot, SingleShotConfig};
use qmeter_core::fock::AncillaInit;
use qmeter_core::measurement::{CoarseGraining, MeasurementParams};
use qmeter_core::thermo::{sbs_overlap_modes, SbsParams};
use qmeter_core::ThermoLedger;

fn ledger(p: MeasurementParams, cg: CoarseGraining) -> ThermoLedger {
    run_single_shot(&SingleShotConfig::new(p).with_coarse(cg)).unwrap().ledger
}

fn poisson_entropy(lambda: f64) -> f64 {
    let mut acc = DoubleDouble::default();
    let mut p = (-lambda).exp();
    for n in 0..400u32 {
        if n > 0 {
            p *= lambda / n as f64;
        }
        if p > 0.0 {
            acc.add(-p * p.ln());
        }
    }
    acc.value()
}

#[test]
fn centered_pointer_costs_poisson_entropy() {
    for &eps in &[0.1, 0.5, 1.0, 2.0, 3.0] {
        for &beta in &[0.5, 1.0, 4.0] {
            let mut p = MeasurementParams::real(0.0, eps);
            p.beta = beta;
            let l = ledger(p, CoarseGraining::Singletons);
            let want = poisson_entropy(eps * eps) / beta;
            assert!((l.total_work() - want).abs() < 1e-10, "ε = {eps}, β = {beta}");
        }
    }
}

#[test]
fn total_work_is_independent_of_binning() {
    let cgs = [
        CoarseGraining::Singletons,
        CoarseGraining::Photodiode,
        CoarseGraining::Intervals(vec![2, 5]),
        CoarseGraining::Modulo(3),
    ];
    for &(ab, eps) in &[(0.5, 0.5), (1.5, 0.2), (2.0, 1.4)] {
        let totals: Vec<f64> = cgs
            .iter()
            .map(|cg| ledger(MeasurementParams::real(ab, eps), cg.clone()).total_work())
            .collect();
        for t in &totals[1..] {
            assert!((t - totals[0]).abs() < 1e-12, "{totals:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dissipation_bound_is_tighter(
        ab in -2.0..2.0f64,
        eps in 0.0..2.0f64,
        bw in prop::option::of(1.0..5.0f64),
    ) {
        let mut p = MeasurementParams::real(ab, eps);
        if let Some(bw) = bw {
            p = p.with_init(AncillaInit::Thermal { beta_omega: bw });
        }
        let l = ledger(p, CoarseGraining::Photodiode);
        prop_assert!(l.delta_s_sa >= -1e-9);
        prop_assert!(l.w_bound_dissipation <= l.w_bound_dephasing + 1e-9);
    }
}

#[test]
fn information_cost_vanishes_for_hot_pointer() {
    let mut prev = f64::INFINITY;
    for &bw in &[4.0, 2.0, 1.0, 0.5, 0.25] {
        let p = MeasurementParams::real(0.5, 0.5).with_init(AncillaInit::Thermal { beta_omega: bw });
        let l = ledger(p, CoarseGraining::Singletons);
        let gap = l.h_pn - l.s_a_t0;
        assert!(gap > 0.0 && gap < prev, "βω = {bw}: {gap}");
        prev = gap;
    }
    assert!(prev < 0.2, "{prev}");
}

#[test]
fn more_environment_modes_distinguish_better() {
    let p = SbsParams {
        alpha_mode: 0.5,
        gamma: 0.7,
        t: 1.3,
        delta_nm: 2,
    };
    let overlaps: Vec<f64> = (1..8).map(|m| sbs_overlap_modes(&p, m)).collect();
    assert!(overlaps.windows(2).all(|w| w[1] < w[0]));
}
