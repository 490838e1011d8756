//! Random CCES economies with known technologies and productivities, and the
//! two-period linked table they generate.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cces::{CcesTechnology, Factor, Nest};
use crate::equilibrium::{solve_equilibrium, Economy, SolverConfig};
use crate::error::{Error, Result};
use crate::iotable::{LinkedIOTable, PeriodAccounts};

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub sectors: usize,
    /// Probability that a sector does not use a given good.
    pub zero_prob: f64,
    pub gamma_range: (f64, f64),
    /// Range of the value-added share of each sector.
    pub primary_range: (f64, f64),
    /// Log-sd of period-0 productivities.
    pub tau_sd: f64,
    /// Log-sd of period-0 factor prices.
    pub factor_sd: f64,
    /// Fixed capital formation over capital income, `G / rK`.
    pub investment_ratio: f64,
}

impl SyntheticConfig {
    pub fn new(sectors: usize) -> Self {
        SyntheticConfig {
            sectors,
            zero_prob: 0.25,
            gamma_range: (-1.5, 0.9),
            primary_range: (0.2, 0.6),
            tau_sd: 0.1,
            factor_sd: 0.1,
            investment_ratio: 0.8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticEconomy {
    pub techs: Vec<CcesTechnology>,
    /// Nesting order of goods used to build the technologies.
    pub order: Vec<usize>,
    pub tau: [Vec<f64>; 2],
    pub r: [f64; 2],
    pub w: [f64; 2],
    pub economy: Economy,
    pub table: LinkedIOTable,
}

/// Share parameters reproducing the given unit-price cost shares, nesting
/// goods in index order.
pub fn technology_from_shares(goods: &[f64], capital: f64, labor: f64, gammas: &[f64]) -> Result<CcesTechnology> {
    assert_eq!(gammas.len(), goods.len() + 1);
    let mut nests = Vec::with_capacity(goods.len() + 1);
    let mut cum = labor;
    if capital > 0.0 {
        nests.push(Nest::new(Factor::Capital, capital / (cum + capital), gammas[0]));
        cum += capital;
    } else {
        nests.push(Nest::inactive(Factor::Capital));
    }
    for (i, &s) in goods.iter().enumerate() {
        if s > 0.0 {
            nests.push(Nest::new(Factor::Good(i), s / (cum + s), gammas[i + 1]));
            cum += s;
        } else {
            nests.push(Nest::inactive(Factor::Good(i)));
        }
    }
    CcesTechnology::new(nests)
}

fn lognormal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (sd * z).exp()
}

fn accounts(
    econ: &Economy,
    p: &[f64],
    r: f64,
    w: f64,
    investment_ratio: f64,
    rng: &mut ChaCha8Rng,
) -> Result<PeriodAccounts> {
    let n = econ.len();
    let s = crate::equilibrium::network_shares(econ, p, r, w);
    let mut acc = PeriodAccounts::zeros(n);
    for i in 0..n {
        acc.h[i] = rng.random_range(0.5..1.5);
        acc.g[i] = rng.random_range(0.1..0.5);
        acc.m[i] = rng.random_range(-0.1..0.1);
    }
    let lu = (DMatrix::<f64>::identity(n, n) - &s.goods).lu();
    let capital_income = |f: &[f64]| -> Result<f64> {
        let y = lu
            .solve(&DVector::from_column_slice(f))
            .ok_or_else(|| Error::Singular("I - S".into()))?;
        Ok(y.iter().zip(&s.capital).map(|(y, k)| y * k).sum())
    };
    // scale investment so that G = ratio * rK; capital income is linear in f
    let hm: Vec<f64> = (0..n).map(|i| acc.h[i] + acc.m[i]).collect();
    let from_hm = capital_income(&hm)?;
    let from_g = capital_income(&acc.g)?;
    let g_sum: f64 = acc.g.iter().sum();
    let denom = g_sum - investment_ratio * from_g;
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "investment ratio {investment_ratio} not attainable"
        )));
    }
    let scale = investment_ratio * from_hm / denom;
    for g in acc.g.iter_mut() {
        *g *= scale;
    }
    let f = DVector::from_fn(n, |i, _| acc.h[i] + acc.g[i] + acc.m[i]);
    let y = lu.solve(&f).ok_or_else(|| Error::Singular("I - S".into()))?;
    for j in 0..n {
        acc.y[j] = y[j];
        for i in 0..n {
            acc.x[(i, j)] = s.goods[(i, j)] * y[j];
        }
        acc.rk[j] = s.capital[j] * y[j];
        acc.wl[j] = s.labor[j] * y[j];
    }
    acc.p = p.to_vec();
    acc.r = r;
    acc.w = w;
    Ok(acc)
}

/// Draws a random economy and the table it generates. Period 1 is the
/// reference (`tau = 1`, unit prices); period 0 has random productivities
/// and factor prices.
pub fn generate(cfg: &SyntheticConfig, seed: u64) -> Result<SyntheticEconomy> {
    let n = cfg.sectors;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sector".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (glo, ghi) = cfg.gamma_range;
    let (plo, phi) = cfg.primary_range;

    let mut techs = Vec::with_capacity(n);
    for _ in 0..n {
        let primary = rng.random_range(plo..phi);
        let cap_frac = rng.random_range(0.3..0.7);
        let mut weights: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(cfg.zero_prob) {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let primary = if total > 0.0 { primary } else { 1.0 };
        for v in weights.iter_mut() {
            if total > 0.0 {
                *v *= (1.0 - primary) / total;
            }
        }
        let gammas: Vec<f64> = (0..=n).map(|_| rng.random_range(glo..ghi)).collect();
        techs.push(technology_from_shares(
            &weights,
            primary * cap_frac,
            primary * (1.0 - cap_frac),
            &gammas,
        )?);
    }
    let economy = Economy::cces(techs.clone())?;

    let tau0: Vec<f64> = (0..n).map(|_| lognormal(&mut rng, cfg.tau_sd)).collect();
    let r0 = lognormal(&mut rng, cfg.factor_sd);
    let w0 = lognormal(&mut rng, cfg.factor_sd);
    let solver = SolverConfig::default();
    let st0 = solve_equilibrium(&economy, &tau0, r0, w0, &solver)?.into_converged()?;
    let p1 = vec![1.0; n];

    let acc0 = accounts(&economy, &st0.p, r0, w0, cfg.investment_ratio, &mut rng)?;
    let acc1 = accounts(&economy, &p1, 1.0, 1.0, cfg.investment_ratio, &mut rng)?;
    let sectors = (1..=n).map(|j| format!("s{j:02}")).collect();
    let table = LinkedIOTable::new(sectors, ["0".into(), "1".into()], [acc0, acc1])?;

    Ok(SyntheticEconomy {
        techs,
        order: (0..n).collect(),
        tau: [tau0, vec![1.0; n]],
        r: [r0, 1.0],
        w: [w0, 1.0],
        economy,
        table,
    })
}
