mod common;

use cascade_ge::cces::{
    cces_unit_cost, estimate_multipoint, estimate_nestwise, estimate_two_point, foc_shares, sato_vartia_index,
    tfpg_cces, BfgsOptions, Factor, Prices, TwoPeriodSectorData,
};
use common::{max_param_gap, observe, random_tech, rng, PricePoint};
use proptest::prelude::*;
use rand::Rng;

fn ln_cost(tech: &cascade_ge::cces::CcesTechnology, goods: &[f64], r: f64, w: f64) -> f64 {
    cces_unit_cost(&Prices::new(goods, r, w), tech, 1.0).unwrap().0.ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shares_are_log_gradient_of_cost(seed in any::<u64>(), goods in 1usize..7) {
        let mut g = rng(seed);
        let tech = random_tech(&mut g, goods, 0.2);
        let at = PricePoint::random(&mut g, goods, 1.0);
        let s = foc_shares(&tech, &at.prices()).unwrap();
        let h = 1e-5;
        for f in tech.factors() {
            let bump = |k: f64| {
                let mut p = at.goods.clone();
                let (mut r, mut w) = (at.r, at.w);
                match f {
                    Factor::Labor => w *= k.exp(),
                    Factor::Capital => r *= k.exp(),
                    Factor::Good(i) => p[i] *= k.exp(),
                }
                ln_cost(&tech, &p, r, w)
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            prop_assert!((fd - s.get(f)).abs() < 1e-6, "{f:?}: {fd} vs {}", s.get(f));
        }
        prop_assert!((s.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cost_is_homogeneous_of_degree_one(seed in any::<u64>(), goods in 1usize..6, k in 0.1f64..10.0) {
        let mut g = rng(seed);
        let tech = random_tech(&mut g, goods, 0.2);
        let at = PricePoint::random(&mut g, goods, 1.0);
        let scaled: Vec<f64> = at.goods.iter().map(|p| p * k).collect();
        let a = ln_cost(&tech, &at.goods, at.r, at.w);
        let b = ln_cost(&tech, &scaled, at.r * k, at.w * k);
        prop_assert!((b - a - k.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_point_recovers_generating_technology(seed in any::<u64>(), goods in 1usize..8) {
        let mut g = rng(seed);
        let tech = random_tech(&mut g, goods, 0.25);
        let p0 = PricePoint::random(&mut g, goods, 0.5);
        let p1 = PricePoint::random(&mut g, goods, 0.5);
        let data = TwoPeriodSectorData::new(observe(&tech, &p0, 1.0), observe(&tech, &p1, 1.0));
        let order: Vec<usize> = (0..goods).collect();
        let est = estimate_two_point(&data, &order).unwrap();
        prop_assert!(max_param_gap(&tech, &est) < 1e-7, "gap {}", max_param_gap(&tech, &est));
        for pt in [&p0, &p1] {
            let a = foc_shares(&tech, &pt.prices()).unwrap();
            let b = foc_shares(&est, &pt.prices()).unwrap();
            for f in tech.factors() {
                prop_assert!((a.get(f) - b.get(f)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sato_vartia_is_exact_for_restoring_technology(seed in any::<u64>(), goods in 1usize..11) {
        let mut g = rng(seed);
        let tech = random_tech(&mut g, goods, 0.2);
        let p0 = PricePoint::random(&mut g, goods, 0.7);
        let p1 = PricePoint::random(&mut g, goods, 0.7);
        let tau0 = g.random_range(0.8..1.2);
        let data = TwoPeriodSectorData::new(observe(&tech, &p0, tau0), observe(&tech, &p1, 1.0));
        let order: Vec<usize> = (0..goods).collect();
        let est = estimate_two_point(&data, &order).unwrap();
        let sv = sato_vartia_index(&data, &order).unwrap();
        let exact = ln_cost(&est, &p1.goods, p1.r, p1.w) - ln_cost(&est, &p0.goods, p0.r, p0.w);
        prop_assert!((sv.total - exact).abs() < 1e-10, "{} vs {exact}", sv.total);
        let tfpg = tfpg_cces(&data, &order).unwrap();
        prop_assert!((tfpg - (1.0 / tau0).ln()).abs() < 1e-10);
    }
}

#[test]
fn nestwise_and_multipoint_recover_from_three_points() {
    let mut g = rng(3);
    for _ in 0..10 {
        let goods = g.random_range(1..5);
        let tech = random_tech(&mut g, goods, 0.0);
        let obs: Vec<_> = (0..3)
            .map(|_| observe(&tech, &PricePoint::random(&mut g, goods, 0.5), 1.0))
            .collect();
        let order: Vec<usize> = (0..goods).collect();
        let nw = estimate_nestwise(&obs, &order).unwrap();
        assert!(max_param_gap(&tech, &nw) < 1e-8);

        let mut init = tech.clone();
        for n in init.nests_mut() {
            n.gamma += 0.2;
            n.alpha = 0.5;
        }
        let fit = estimate_multipoint(&obs, &order, &init, &BfgsOptions::default()).unwrap();
        assert!(fit.ssr < 1e-14, "ssr {}", fit.ssr);
        assert!(max_param_gap(&tech, &fit.technology) < 1e-5, "{}", max_param_gap(&tech, &fit.technology));
    }
}

#[test]
fn multipoint_improves_on_nestwise_with_noise() {
    let mut g = rng(11);
    let goods = 3;
    let tech = random_tech(&mut g, goods, 0.0);
    let order: Vec<usize> = (0..goods).collect();
    let obs: Vec<_> = (0..6)
        .map(|_| {
            let mut o = observe(&tech, &PricePoint::random(&mut g, goods, 0.5), 1.0);
            for s in o.goods_shares.iter_mut() {
                *s *= 1.0 + g.random_range(-0.02..0.02);
            }
            o
        })
        .collect();
    let nw = estimate_nestwise(&obs, &order).unwrap();
    let none = BfgsOptions {
        max_iter: 0,
        ..BfgsOptions::default()
    };
    let start = estimate_multipoint(&obs, &order, &nw, &none).unwrap();
    let fit = estimate_multipoint(&obs, &order, &nw, &BfgsOptions::default()).unwrap();
    assert!(fit.ssr <= start.ssr);
    assert!(fit.ssr > 0.0);
    assert!(max_param_gap(&tech, &fit.technology) < 0.5);
}

#[test]
fn two_point_matches_nestwise_on_two_periods() {
    let mut g = rng(21);
    let tech = random_tech(&mut g, 4, 0.2);
    let obs: Vec<_> = (0..2)
        .map(|_| observe(&tech, &PricePoint::random(&mut g, 4, 0.5), 1.0))
        .collect();
    let order = [0, 1, 2, 3];
    let a = estimate_nestwise(&obs, &order).unwrap();
    let b = estimate_two_point(&TwoPeriodSectorData::new(obs[0].clone(), obs[1].clone()), &order).unwrap();
    assert_eq!(a, b);
}
