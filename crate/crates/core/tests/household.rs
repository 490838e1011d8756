mod common;

use cascade_ge::household::{
    estimate_lambda, expenditure_shares, observation_weights, price_index, weighted_ols, HouseholdData,
    HouseholdModel, Weighting,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// Items with shares generated by `model` at two price vectors; the price
/// change loads on the instrument.
fn generated(seed: u64, items: usize, lambda: f64, noise: f64) -> (HouseholdModel, HouseholdData) {
    let mut g = common::rng(seed);
    let raw: Vec<f64> = (0..items).map(|_| g.random_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let model = HouseholdModel::new(raw.iter().map(|v| v / s).collect(), lambda).unwrap();
    let z: Vec<f64> = (0..items).map(|_| g.random_range(-0.3..0.3)).collect();
    let p0: Vec<f64> = (0..items).map(|_| g.random_range(0.8..1.2)).collect();
    let p1: Vec<f64> = p0
        .iter()
        .zip(&z)
        .map(|(p, zi)| {
            let e: f64 = g.sample(StandardNormal);
            p * (-zi + 0.5 * zi * zi + 0.05 * e).exp()
        })
        .collect();
    let b0 = expenditure_shares(&p0, &model).unwrap();
    let mut b1 = expenditure_shares(&p1, &model).unwrap();
    for b in b1.iter_mut() {
        let e: f64 = g.sample(StandardNormal);
        *b *= (noise * e).exp();
    }
    let data = HouseholdData {
        b0,
        b1,
        p0,
        p1,
        instrument: z,
    };
    (model, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn price_index_is_homogeneous_and_monotone(seed in any::<u64>(), lambda in -2.0f64..3.0, k in 0.1f64..10.0) {
        let (model, data) = generated(seed, 12, lambda, 0.0);
        let a = price_index(&data.p0, &model).unwrap();
        let scaled: Vec<f64> = data.p0.iter().map(|p| p * k).collect();
        prop_assert!((price_index(&scaled, &model).unwrap() / a - k).abs() < 1e-10 * k);
        let mut up = data.p0.clone();
        up[3] *= 1.1;
        prop_assert!(price_index(&up, &model).unwrap() >= a);
    }

    #[test]
    fn noiseless_data_recover_lambda(seed in any::<u64>(), lambda in -1.0f64..3.0) {
        let (_, data) = generated(seed, 60, lambda, 0.0);
        for w in [Weighting::InverseVariance, Weighting::InverseNu, Weighting::Unweighted] {
            let est = estimate_lambda(&data, w).unwrap();
            prop_assert!((est.lambda - lambda).abs() < 1e-8, "{w:?}: {}", est.lambda);
        }
    }
}

#[test]
fn instrument_equal_to_regressor_gives_weighted_ols() {
    let (_, mut data) = generated(5, 80, 1.3, 0.05);
    let dp: Vec<f64> = data.p0.iter().zip(&data.p1).map(|(a, b)| b.ln() - a.ln()).collect();
    data.instrument = dp.clone();
    let est = estimate_lambda(&data, Weighting::InverseVariance).unwrap();
    let y: Vec<f64> = data.b0.iter().zip(&data.b1).map(|(a, b)| b.ln() - a.ln()).collect();
    let x = DMatrix::from_fn(dp.len(), 2, |i, c| if c == 0 { 1.0 } else { dp[i] });
    let w = observation_weights(&data.b0, &data.b1, Weighting::InverseVariance);
    let ols = weighted_ols(&x, &y, &w).unwrap();
    assert!((est.lambda - ols[1]).abs() < 1e-10);
    assert!((est.intercept - ols[0]).abs() < 1e-10);
}

#[test]
fn diagnostics_on_noisy_data() {
    let (_, data) = generated(8, 300, 1.1, 0.05);
    let est = estimate_lambda(&data, Weighting::default()).unwrap();
    let d = &est.diagnostics;
    assert!(d.first_stage_f.value > 10.0);
    assert_eq!(d.first_stage_f.df2, Some(297.0));
    for t in [&d.first_stage_f, &d.sargan, &d.basmann, &d.durbin, &d.wu_hausman] {
        assert!(t.value.is_finite() && t.value >= 0.0);
        assert!((0.0..=1.0).contains(&t.p_value));
    }
    assert!((est.lambda - 1.1).abs() < 5.0 * est.se_lambda);
    assert!(est.se_lambda > 0.0);
}

#[test]
fn zero_consumption_items_are_dropped() {
    let (_, mut data) = generated(9, 30, 0.7, 0.0);
    data.b0[4] = 0.0;
    data.b1[10] = 0.0;
    let est = estimate_lambda(&data, Weighting::default()).unwrap();
    assert_eq!(est.dropped, vec![4, 10]);
    assert_eq!(est.n_items, 28);
    assert!((est.lambda - 0.7).abs() < 1e-8);
}
