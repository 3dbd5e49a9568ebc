use super::*;
use crate::crossfit::NuisanceSource;
use alloc::vec;

fn table(q0: Vec<f64>, q1: Vec<f64>, g: Vec<f64>, fold: Vec<usize>) -> NuisanceTable {
    let n = q0.len();
    NuisanceTable::new(q0, q1, g, fold, vec![NuisanceSource::External; n]).unwrap()
}

fn units(t: Vec<bool>, y: Vec<f64>) -> UnitTable {
    UnitTable::new(t, y).unwrap()
}

#[test]
fn clipping_clamps_and_counts() {
    let t = table(vec![0.0; 3], vec![0.0; 3], vec![0.001, 0.5, 0.999], vec![0; 3]);
    let c = clip_propensities(&t, 0.03).unwrap();
    assert_eq!(c.g, vec![0.03, 0.5, 0.97]);
    assert_eq!(c.clipping.unwrap().clipped, 2);
    let interior = table(vec![0.0; 2], vec![0.0; 2], vec![0.2, 0.6], vec![0; 2]);
    assert_eq!(clip_propensities(&interior, 0.03).unwrap().clipping.unwrap().clipped, 0);
    assert!(clip_propensities(&t, 0.5).is_err());
}

#[test]
fn q_constant_shift_and_mean() {
    let u = units(vec![true, false], vec![0.0, 0.0]);
    let t = table(vec![0.3, -1.0], vec![2.3, 1.0], vec![0.5; 2], vec![0; 2]);
    assert!((estimate_q(&t, &u).unwrap().psi_hat - 2.0).abs() < 1e-15);
    let t = table(vec![0.0, 0.0], vec![0.0, 2.0], vec![0.5; 2], vec![0; 2]);
    assert_eq!(estimate_q(&t, &u).unwrap().psi_hat, 1.0);
}

#[test]
fn iptw_direct_evaluation() {
    let u = units(vec![true, false], vec![1.0, 1.0]);
    let t = table(vec![0.0; 2], vec![0.0; 2], vec![0.25, 0.75], vec![0; 2]);
    assert_eq!(estimate_iptw(&t, &u).unwrap().psi_hat, 0.0);

    let u = units(vec![true, false, true, false], vec![3.0; 4]);
    let t = table(vec![0.0; 4], vec![0.0; 4], vec![0.5; 4], vec![0; 4]);
    assert_eq!(estimate_iptw(&t, &u).unwrap().psi_hat, 0.0);
}

#[test]
fn iptw_requires_clipped_propensities() {
    let u = units(vec![true], vec![1.0]);
    let t = table(vec![0.0], vec![0.0], vec![0.0], vec![0]);
    assert!(matches!(estimate_iptw(&t, &u), Err(Error::UnclippedPropensity { node: 0, .. })));
    assert!(estimate_aiptw(&t, &u).is_err());
    assert!(estimate_tmle(&t, &u).is_err());
}

#[test]
fn aiptw_two_unit_example() {
    let u = units(vec![true, false], vec![2.0, 0.0]);
    let t = table(vec![0.0; 2], vec![1.0; 2], vec![0.5; 2], vec![0; 2]);
    assert_eq!(estimate_aiptw(&t, &u).unwrap().psi_hat, 2.0);
}

#[test]
fn zero_residuals_collapse_to_q() {
    let u = units(vec![true, false, true], vec![1.5, -0.5, 2.0]);
    let t = table(vec![0.0, -0.5, 1.0], vec![1.5, 0.7, 2.0], vec![0.3, 0.6, 0.8], vec![0, 1, 1]);
    let q = estimate_q(&t, &u).unwrap().psi_hat;
    assert_eq!(estimate_aiptw(&t, &u).unwrap().psi_hat, q);
    assert_eq!(estimate_tmle(&t, &u).unwrap().psi_hat, q);
    let (_, eps) = tmle_update(&t, &u).unwrap();
    assert_eq!(eps, vec![0.0, 0.0]);
}

#[test]
fn tmle_single_treated_unit_fluctuation() {
    let u = units(vec![true], vec![1.0]);
    let t = table(vec![0.0], vec![0.0], vec![0.5], vec![0]);
    let (updated, eps) = tmle_update(&t, &u).unwrap();
    assert_eq!(eps, vec![0.5]);
    assert_eq!(updated.q1[0] - updated.q0[0], 2.0);
    assert_eq!(estimate_tmle(&t, &u).unwrap().psi_hat, 2.0);
}

#[test]
fn unadjusted_difference_in_means() {
    let u = units(vec![true, true, false], vec![2.0, 2.0, 1.0]);
    assert_eq!(estimate_unadjusted(&u).unwrap().psi_hat, 1.0);
    assert!(matches!(
        estimate_unadjusted(&units(vec![true, true], vec![1.0, 2.0])),
        Err(Error::Empty(_))
    ));
}

#[test]
fn influence_sigma_of_plus_minus_one() {
    // zero residuals, Q(1) - Q(0) = {1, -1}, psi = 0: phi = {1, -1}
    let u = units(vec![true, false], vec![1.0, 0.0]);
    let t = table(vec![0.0, 0.0], vec![1.0, -1.0], vec![0.5; 2], vec![0; 2]);
    let s = influence_variance(&t, &u, 0.0, 0.95).unwrap();
    assert!((s.sigma - 1.0).abs() < 1e-15);
    assert!(!s.degenerate);
    assert!((s.ci_high - 1.959_963_984_540_054 / 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn degenerate_interval_is_flagged() {
    let u = units(vec![true, false], vec![1.0, 0.0]);
    let t = table(vec![0.0; 2], vec![1.0; 2], vec![0.5; 2], vec![0; 2]);
    let r = estimate_aiptw(&t, &u).unwrap();
    assert_eq!(r.if_sigma, 0.0);
    assert!(r.is_degenerate());
    assert_eq!((r.ci_low, r.ci_high), (1.0, 1.0));
}

#[test]
fn fold_average_is_unweighted() {
    let u = units(vec![true; 3], vec![0.0; 3]);
    let t = table(vec![0.0; 3], vec![1.0, 3.0, 3.0], vec![0.5; 3], vec![0, 1, 1]);
    // AIPTW residual term: y - q1 = -q1, H = 2
    let r = estimate_q(&t, &u).unwrap();
    assert_eq!(r.per_fold, vec![1.0, 3.0]);
    assert_eq!(r.psi_hat, 2.0);
    assert!((r.fold_std - core::f64::consts::SQRT_2).abs() < 1e-15);
    assert!(r.ci_low <= r.psi_hat && r.psi_hat <= r.ci_high);
}

#[test]
fn efficient_scores_sum_to_zero_at_aiptw() {
    let n = 40;
    let t: Vec<bool> = (0..n).map(|i| (i * 7) % 3 == 0).collect();
    let y: Vec<f64> = (0..n).map(|i| ((i * 13) % 11) as f64 / 3.0 - 1.0).collect();
    let q0: Vec<f64> = (0..n).map(|i| (i % 5) as f64 / 4.0).collect();
    let q1: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 5.0).collect();
    let g: Vec<f64> = (0..n).map(|i| 0.1 + 0.8 * (i % 9) as f64 / 8.0).collect();
    let u = units(t, y);
    for fold in [vec![0; n], (0..n).map(|i| i % 4).collect::<Vec<_>>()] {
        let tab = table(q0.clone(), q1.clone(), g.clone(), fold);
        let psi = estimate_aiptw(&tab, &u).unwrap().psi_hat;
        let total: f64 = efficient_scores(&tab, &u, psi).iter().sum();
        assert!(total.abs() < 1e-10 * n as f64, "{total}");
    }
}

#[test]
fn estimator_names_round_trip() {
    for e in [
        Estimator::Q,
        Estimator::Iptw,
        Estimator::Aiptw,
        Estimator::Tmle,
        Estimator::Unadjusted,
        Estimator::TwoStage,
    ] {
        assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
    }
    assert!("bogus".parse::<Estimator>().is_err());
}

#[test]
fn length_mismatch_and_empty() {
    let u = units(vec![true], vec![1.0]);
    let t = table(vec![0.0; 2], vec![0.0; 2], vec![0.5; 2], vec![0; 2]);
    assert!(matches!(estimate_q(&t, &u), Err(Error::Data(_))));
    let empty = table(vec![], vec![], vec![], vec![]);
    assert!(matches!(estimate_q(&empty, &units(vec![], vec![])), Err(Error::Empty(_))));
}
