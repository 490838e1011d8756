//! Cascaded CES (CCES) unit-cost aggregators.
//!
//! A sector technology is a chain of binary CES nests evaluated on the dual
//! (price) side. The first nest combines capital (price `r`) with labor
//! (price `w`); every subsequent nest combines one intermediate good with the
//! compound produced by the nests inside it. Goods enter in cascading order,
//! upstream goods innermost.
//!
//! Each nest `c(p, pi; alpha, gamma) = (alpha p^gamma + (1 - alpha) pi^gamma)^(1/gamma)`
//! is evaluated in log space. For `|gamma| < GAMMA_EPS` the Cobb-Douglas
//! limit is used together with its first-order correction, which keeps the
//! function smooth across the switch.

mod estimate;
mod index;
mod nlp;

pub use estimate::{
    estimate_multipoint, estimate_nestwise, estimate_two_point, MultipointFit, SectorObservation,
    TwoPeriodSectorData, SHARE_FLOOR,
};
pub use index::{log_mean, sato_vartia_index, tfpg_cces, tfpg_translog, SatoVartiaIndex};
pub use nlp::{minimize_bfgs, BfgsOptions, BfgsResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|gamma|` a nest is evaluated in Cobb-Douglas log form.
pub const GAMMA_EPS: f64 = 1e-8;

/// A factor entering a nest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    Labor,
    Capital,
    Good(usize),
}

/// One binary CES process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nest {
    /// The factor combined with the inner compound.
    pub factor: Factor,
    pub alpha: f64,
    /// Substitution elasticity of the nest is `1 - gamma`.
    pub gamma: f64,
    /// Inactive nests pass the inner compound price through unchanged.
    pub active: bool,
}

impl Nest {
    pub fn new(factor: Factor, alpha: f64, gamma: f64) -> Self {
        Nest {
            factor,
            alpha,
            gamma,
            active: true,
        }
    }

    pub fn inactive(factor: Factor) -> Self {
        Nest {
            factor,
            alpha: 0.0,
            gamma: 0.0,
            active: false,
        }
    }

    pub fn elasticity(&self) -> f64 {
        1.0 - self.gamma
    }
}

/// Sector technology: nests from the innermost (capital vs labor) outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcesTechnology {
    nests: Vec<Nest>,
}

impl CcesTechnology {
    /// `nests[0]` must be the capital nest; every other nest must be a good,
    /// each good at most once. Active nests need `alpha` in `(0, 1)`.
    pub fn new(nests: Vec<Nest>) -> Result<Self> {
        match nests.first() {
            Some(n) if n.factor == Factor::Capital => {}
            _ => {
                return Err(Error::InvalidArgument(
                    "first nest must combine capital and labor".into(),
                ))
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (k, n) in nests.iter().enumerate().skip(1) {
            match n.factor {
                Factor::Good(i) => {
                    if !seen.insert(i) {
                        return Err(Error::InvalidArgument(format!("good {i} nested twice")));
                    }
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "nest {k} must hold a good, found {other:?}"
                    )))
                }
            }
        }
        for (k, n) in nests.iter().enumerate() {
            if n.active && !(n.alpha > 0.0 && n.alpha < 1.0 && n.gamma.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "nest {k}: alpha {} outside (0, 1) or gamma {} not finite",
                    n.alpha, n.gamma
                )));
            }
        }
        Ok(CcesTechnology { nests })
    }

    pub fn nests(&self) -> &[Nest] {
        &self.nests
    }

    pub fn nests_mut(&mut self) -> &mut [Nest] {
        &mut self.nests
    }

    /// Factors in nest order, innermost first: labor, capital, goods.
    pub fn factors(&self) -> Vec<Factor> {
        let mut out = vec![Factor::Labor];
        out.extend(self.nests.iter().filter(|n| n.active).map(|n| n.factor));
        if !self.nests[0].active {
            out.retain(|f| *f != Factor::Capital);
        }
        out
    }

    pub fn active_nests(&self) -> impl Iterator<Item = (usize, &Nest)> {
        self.nests.iter().enumerate().filter(|(_, n)| n.active)
    }

    /// Outermost active nest, if any.
    pub fn last_active(&self) -> Option<&Nest> {
        self.nests.iter().rev().find(|n| n.active)
    }
}

/// Factor prices seen by a sector.
#[derive(Debug, Clone, Copy)]
pub struct Prices<'a> {
    pub goods: &'a [f64],
    pub r: f64,
    pub w: f64,
}

impl<'a> Prices<'a> {
    pub fn new(goods: &'a [f64], r: f64, w: f64) -> Self {
        Prices { goods, r, w }
    }

    pub fn get(&self, f: Factor) -> f64 {
        match f {
            Factor::Labor => self.w,
            Factor::Capital => self.r,
            Factor::Good(i) => self.goods[i],
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.r) && ok(self.w) && self.goods.iter().all(|&p| ok(p)) {
            Ok(())
        } else {
            Err(Error::InvalidPrice)
        }
    }
}

/// Cost shares of a sector, one entry per good plus capital and labor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorShares {
    pub goods: Vec<f64>,
    pub capital: f64,
    pub labor: f64,
}

impl FactorShares {
    pub fn get(&self, f: Factor) -> f64 {
        match f {
            Factor::Labor => self.labor,
            Factor::Capital => self.capital,
            Factor::Good(i) => self.goods[i],
        }
    }

    pub fn sum(&self) -> f64 {
        self.goods.iter().sum::<f64>() + self.capital + self.labor
    }
}

/// Compound prices after each nest (`pi[n]` leaves nest `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundPrices {
    pub pi: Vec<f64>,
}

impl CompoundPrices {
    pub fn final_price(&self) -> f64 {
        *self.pi.last().expect("technology has nests")
    }
}

/// `ln c` from log prices.
pub(crate) fn ln_ces(ln_p: f64, ln_pi: f64, alpha: f64, gamma: f64) -> f64 {
    if gamma.abs() < GAMMA_EPS {
        let d = ln_p - ln_pi;
        return alpha * ln_p + (1.0 - alpha) * ln_pi + 0.5 * gamma * alpha * (1.0 - alpha) * d * d;
    }
    let ga = gamma * ln_p;
    let gb = gamma * ln_pi;
    if ga.abs() <= 0.5 && gb.abs() <= 0.5 {
        (alpha * ga.exp_m1() + (1.0 - alpha) * gb.exp_m1()).ln_1p() / gamma
    } else {
        let u = alpha.ln() + ga;
        let v = (1.0 - alpha).ln() + gb;
        let m = u.max(v);
        (m + ((u - m).exp() + (v - m).exp()).ln()) / gamma
    }
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn logit(a: f64) -> f64 {
    a.ln() - (1.0 - a).ln()
}

/// Two-factor CES unit cost.
pub fn ces_unit_cost(p: f64, pi: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if !(p > 0.0 && pi > 0.0 && p.is_finite() && pi.is_finite()) {
        return Err(Error::InvalidPrice);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(ln_ces(p.ln(), pi.ln(), alpha, gamma).exp())
}

/// Log of the compound price leaving the outermost nest, without validation.
pub(crate) fn ln_compound(tech: &CcesTechnology, prices: &Prices<'_>) -> f64 {
    let mut ln_pi = prices.w.ln();
    for n in tech.nests.iter().filter(|n| n.active) {
        ln_pi = ln_ces(prices.get(n.factor).ln(), ln_pi, n.alpha, n.gamma);
    }
    ln_pi
}

/// Unit cost `q = C(p, r, w) / tau` together with every compound price.
pub fn cces_unit_cost(prices: &Prices<'_>, tech: &CcesTechnology, tau: f64) -> Result<(f64, CompoundPrices)> {
    prices.validate()?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("productivity {tau} must be positive")));
    }
    let mut ln_pi = prices.w.ln();
    let mut pi = Vec::with_capacity(tech.nests.len());
    for n in &tech.nests {
        if n.active {
            ln_pi = ln_ces(prices.get(n.factor).ln(), ln_pi, n.alpha, n.gamma);
        }
        pi.push(ln_pi.exp());
    }
    Ok(((ln_pi - tau.ln()).exp(), CompoundPrices { pi }))
}

/// Cost shares implied by the first-order conditions (Shephard's lemma).
///
/// Nest `n` gives its own factor the weight `alpha (p / pi_{n+1})^gamma`
/// and the inner compound the rest; a factor's cost share is its weight
/// times the compound weights of every nest outside it.
pub fn foc_shares(tech: &CcesTechnology, prices: &Prices<'_>) -> Result<FactorShares> {
    prices.validate()?;
    Ok(foc_shares_unchecked(tech, prices))
}

pub(crate) fn foc_shares_unchecked(tech: &CcesTechnology, prices: &Prices<'_>) -> FactorShares {
    let mut weights = Vec::with_capacity(tech.nests.len());
    let mut ln_pi = prices.w.ln();
    for n in &tech.nests {
        if !n.active {
            weights.push(None);
            continue;
        }
        let ln_p = prices.get(n.factor).ln();
        let z = logit(n.alpha) + n.gamma * (ln_p - ln_pi);
        weights.push(Some((logistic(z), logistic(-z))));
        ln_pi = ln_ces(ln_p, ln_pi, n.alpha, n.gamma);
    }

    let mut shares = FactorShares {
        goods: vec![0.0; prices.goods.len()],
        capital: 0.0,
        labor: 0.0,
    };
    let mut outer = 1.0;
    for (n, w) in tech.nests.iter().zip(&weights).rev() {
        if let Some((own, inner)) = w {
            let s = outer * own;
            match n.factor {
                Factor::Capital => shares.capital = s,
                Factor::Good(i) => shares.goods[i] = s,
                Factor::Labor => unreachable!("labor is the core compound"),
            }
            outer *= inner;
        }
    }
    shares.labor = outer;
    shares
}
