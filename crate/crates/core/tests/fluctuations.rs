use cascade_ge::equilibrium::{Economy, EconomyKind, SolverConfig};
use cascade_ge::fluctuations::{draw_shocks, moments, qq_r_squared, simulate_aggregate, summarize};
use cascade_ge::synthetic::{generate, SyntheticConfig};

fn economy(n: usize, seed: u64) -> Economy {
    generate(&SyntheticConfig::new(n), seed).unwrap().economy
}

#[test]
fn cobb_douglas_aggregate_is_linear_in_shocks() {
    let cd = economy(6, 1).with_kind(EconomyKind::CobbDouglas).unwrap();
    let shocks = draw_shocks(6, 200, 0.1, 1.0, 5).unwrap();
    let cfg = SolverConfig::default();
    let a = simulate_aggregate(&cd, &shocks, &cfg).unwrap();
    let b = simulate_aggregate(&cd, &shocks.scaled(3.0), &cfg).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((3.0 * x - y).abs() < 1e-14);
    }
}

#[test]
fn simple_sd_follows_law_of_large_numbers() {
    let n = 16;
    let simple = economy(n, 2).with_kind(EconomyKind::Simple).unwrap();
    let (sigma, ell) = (0.1, 0.25);
    let shocks = draw_shocks(n, 20_000, sigma, ell, 9).unwrap();
    let s = simulate_aggregate(&simple, &shocks, &SolverConfig::default()).unwrap();
    let m = moments(&s.values).unwrap();
    let expected = sigma * ell.sqrt() / (n as f64).sqrt();
    assert!((m.sd / expected - 1.0).abs() < 0.03, "{} vs {expected}", m.sd);
    assert!(m.mean.abs() < 4.0 * expected / (20_000f64).sqrt());
    assert!(qq_r_squared(&m.qq) > 0.999);
}

#[test]
fn leontief_never_beats_cobb_douglas() {
    for seed in 0..4 {
        let econ = economy(8, seed);
        let shocks = draw_shocks(8, 400, 0.1, 1.0, seed).unwrap();
        let cfg = SolverConfig::default();
        let cd = simulate_aggregate(&econ.with_kind(EconomyKind::CobbDouglas).unwrap(), &shocks, &cfg).unwrap();
        let lt = simulate_aggregate(&econ.with_kind(EconomyKind::Leontief).unwrap(), &shocks, &cfg).unwrap();
        assert!(lt.failed.is_empty());
        for (l, c) in lt.values.iter().zip(&cd.values) {
            assert!(*l <= c + 1e-12, "{l} > {c}");
        }
    }
}

#[test]
fn cces_draws_are_reproducible_and_thread_independent() {
    let econ = economy(5, 3);
    let shocks = draw_shocks(5, 64, 0.1, 1.0, 77).unwrap();
    let cfg = SolverConfig::default();
    let a = simulate_aggregate(&econ, &shocks, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| simulate_aggregate(&econ, &draw_shocks(5, 64, 0.1, 1.0, 77).unwrap(), &cfg).unwrap());
    assert_eq!(a, b);
    let diff = summarize(&a, Some(&simulate_aggregate(&econ.with_kind(EconomyKind::CobbDouglas).unwrap(), &shocks, &cfg).unwrap())).unwrap();
    assert_eq!(diff.n, 64);
}
