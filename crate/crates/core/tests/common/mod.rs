#![allow(dead_code)]

use cascade_ge::cces::{cces_unit_cost, foc_shares, CcesTechnology, Factor, Nest, Prices, SectorObservation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Capital nest plus `goods` goods nested in index order; a good is skipped
/// with probability `zero_prob`.
pub fn random_tech(rng: &mut ChaCha8Rng, goods: usize, zero_prob: f64) -> CcesTechnology {
    let mut nests = vec![Nest::new(Factor::Capital, rng.random_range(0.1..0.9), rng.random_range(-1.5..0.9))];
    for i in 0..goods {
        if rng.random_bool(zero_prob) {
            nests.push(Nest::inactive(Factor::Good(i)));
        } else {
            nests.push(Nest::new(Factor::Good(i), rng.random_range(0.1..0.9), rng.random_range(-1.5..0.9)));
        }
    }
    CcesTechnology::new(nests).unwrap()
}

pub struct PricePoint {
    pub goods: Vec<f64>,
    pub r: f64,
    pub w: f64,
}

impl PricePoint {
    pub fn random(rng: &mut ChaCha8Rng, goods: usize, spread: f64) -> Self {
        let mut draw = || (rng.random_range(-spread..spread) as f64).exp();
        PricePoint {
            goods: (0..goods).map(|_| draw()).collect(),
            r: draw(),
            w: draw(),
        }
    }

    pub fn prices(&self) -> Prices<'_> {
        Prices::new(&self.goods, self.r, self.w)
    }
}

/// Observation generated by `tech` at `at` with productivity `tau`.
pub fn observe(tech: &CcesTechnology, at: &PricePoint, tau: f64) -> SectorObservation {
    let prices = at.prices();
    let s = foc_shares(tech, &prices).unwrap();
    let (q, _) = cces_unit_cost(&prices, tech, tau).unwrap();
    SectorObservation {
        goods_shares: s.goods,
        capital_share: s.capital,
        prices: at.goods.clone(),
        r: at.r,
        w: at.w,
        q,
    }
}

pub fn max_param_gap(a: &CcesTechnology, b: &CcesTechnology) -> f64 {
    a.nests()
        .iter()
        .zip(b.nests())
        .filter(|(x, _)| x.active)
        .map(|(x, y)| (x.alpha - y.alpha).abs().max((x.gamma - y.gamma).abs()))
        .fold(0.0, f64::max)
}
