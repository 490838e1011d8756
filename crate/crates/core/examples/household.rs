//! Estimates the household elasticity parameter by two-stage least squares
//! on simulated item-level prices and expenditure shares.

use cascade_ge::household::{estimate_lambda, expenditure_shares, HouseholdData, HouseholdModel, Weighting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let items = 300;
    let mu: Vec<f64> = (0..items).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = mu.iter().sum();
    let model = HouseholdModel::new(mu.iter().map(|m| m / total).collect(), 1.1)?;

    let instrument: Vec<f64> = (0..items).map(|_| rng.random_range(-0.3..0.3)).collect();
    let p0: Vec<f64> = vec![1.0; items];
    let p1: Vec<f64> = instrument
        .iter()
        .map(|z| {
            let e: f64 = rng.sample(StandardNormal);
            (-z + 0.05 * e).exp()
        })
        .collect();
    let b0 = expenditure_shares(&p0, &model)?;
    let b1 = expenditure_shares(&p1, &model)?
        .into_iter()
        .map(|b| {
            let e: f64 = rng.sample(StandardNormal);
            b * (0.02 * e).exp()
        })
        .collect();
    let data = HouseholdData { b0, b1, p0, p1, instrument };

    let est = estimate_lambda(&data, Weighting::default())?;
    println!("lambda {:.5} (se {:.5}), intercept {:.5}", est.lambda, est.se_lambda, est.intercept);
    let d = &est.diagnostics;
    for (name, t) in [
        ("first-stage F", &d.first_stage_f),
        ("Sargan", &d.sargan),
        ("Basmann", &d.basmann),
        ("Durbin", &d.durbin),
        ("Wu-Hausman", &d.wu_hausman),
    ] {
        println!("{name:<14} {:>10.3}  p = {:.4}", t.value, t.p_value);
    }
    Ok(())
}
