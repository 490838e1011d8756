use log::warn;

use super::nlp::{minimize_bfgs, BfgsOptions};
use super::{ln_ces, logistic, CcesTechnology, Factor, Nest};
use crate::error::{Error, Result};
use crate::iotable::LinkedIOTable;

/// Floor applied to shares that vanish in some but not all periods.
pub const SHARE_FLOOR: f64 = 1e-9;

/// Log relative-price changes below this are treated as zero.
const FLAT_TOL: f64 = 1e-12;

/// Observed cost shares and prices of one sector in one period.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorObservation {
    pub goods_shares: Vec<f64>,
    pub capital_share: f64,
    pub prices: Vec<f64>,
    pub r: f64,
    pub w: f64,
    /// Output price.
    pub q: f64,
}

impl SectorObservation {
    /// Labor share as the remainder.
    pub fn labor_share(&self) -> f64 {
        1.0 - self.goods_shares.iter().sum::<f64>() - self.capital_share
    }

    pub fn share(&self, f: Factor) -> f64 {
        match f {
            Factor::Labor => self.labor_share(),
            Factor::Capital => self.capital_share,
            Factor::Good(i) => self.goods_shares[i],
        }
    }

    pub fn price(&self, f: Factor) -> f64 {
        match f {
            Factor::Labor => self.w,
            Factor::Capital => self.r,
            Factor::Good(i) => self.prices[i],
        }
    }

    /// Column `j` of `table` in period `t`, with `q = p_j`.
    pub fn from_table(table: &LinkedIOTable, j: usize, t: usize) -> Self {
        let shares = table.cost_shares(t);
        let acc = table.period(t);
        SectorObservation {
            goods_shares: shares.goods.column(j).iter().copied().collect(),
            capital_share: shares.capital[j],
            prices: acc.p.clone(),
            r: acc.r,
            w: acc.w,
            q: acc.p[j],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPeriodSectorData {
    pub periods: [SectorObservation; 2],
}

impl TwoPeriodSectorData {
    pub fn new(t0: SectorObservation, t1: SectorObservation) -> Self {
        TwoPeriodSectorData { periods: [t0, t1] }
    }

    pub fn from_table(table: &LinkedIOTable, j: usize) -> Self {
        TwoPeriodSectorData::new(
            SectorObservation::from_table(table, j, 0),
            SectorObservation::from_table(table, j, 1),
        )
    }
}

/// Per-nest regression series: `y_t = ln(s_t / inner_t)`, where `inner_t` is
/// the share of the compound entering the nest.
#[derive(Debug, Clone)]
pub(crate) struct NestSeries {
    pub factor: Factor,
    pub active: bool,
    pub ln_price: Vec<f64>,
    pub y: Vec<f64>,
    /// Within-nest shares of the factor and of the inner compound.
    pub phi: Vec<f64>,
    pub phi_inner: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub nests: Vec<NestSeries>,
    pub ln_w: Vec<f64>,
}

impl Prepared {
    pub fn periods(&self) -> usize {
        self.ln_w.len()
    }
}

fn floor_series(values: &mut [f64], what: &str) -> Result<bool> {
    if values.iter().any(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::InvalidArgument(format!("negative share for {what}")));
    }
    let zeros = values.iter().filter(|&&v| v < SHARE_FLOOR).count();
    if zeros == values.len() {
        return Ok(false);
    }
    if zeros > 0 {
        warn!("{what}: share vanishes in {zeros} period(s); flooring at {SHARE_FLOOR:e}");
        for v in values.iter_mut() {
            *v = v.max(SHARE_FLOOR);
        }
    }
    Ok(true)
}

/// Turns share columns into nest-wise series along `order` (goods from the
/// innermost outward). Zero-in-all-periods factors become inactive nests.
pub(crate) fn prepare(periods: &[SectorObservation], order: &[usize]) -> Result<Prepared> {
    let t_count = periods.len();
    if t_count < 2 {
        return Err(Error::InvalidArgument("need at least two periods".into()));
    }
    let n_goods = periods[0].goods_shares.len();
    if order.len() != n_goods {
        return Err(Error::InvalidArgument(format!(
            "order has {} goods, data has {n_goods}",
            order.len()
        )));
    }
    for obs in periods {
        if obs.goods_shares.len() != n_goods || obs.prices.len() != n_goods {
            return Err(Error::InvalidArgument("inconsistent observation lengths".into()));
        }
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(obs.r) && ok(obs.w) && ok(obs.q) && obs.prices.iter().all(|&p| ok(p))) {
            return Err(Error::InvalidPrice);
        }
    }

    let mut labor: Vec<f64> = periods.iter().map(|o| o.labor_share().max(0.0)).collect();
    if labor.iter().all(|&v| v < SHARE_FLOOR) {
        warn!("labor share vanishes in every period; flooring at {SHARE_FLOOR:e}");
    }
    for v in labor.iter_mut() {
        if *v < SHARE_FLOOR {
            *v = SHARE_FLOOR;
        }
    }

    let mut factors = vec![Factor::Capital];
    factors.extend(order.iter().map(|&i| Factor::Good(i)));

    let mut inner = labor;
    let mut nests = Vec::with_capacity(factors.len());
    for f in factors {
        let mut s: Vec<f64> = periods.iter().map(|o| o.share(f)).collect();
        let active = floor_series(&mut s, &format!("{f:?}"))?;
        let ln_price: Vec<f64> = periods.iter().map(|o| o.price(f).ln()).collect();
        if !active {
            nests.push(NestSeries {
                factor: f,
                active,
                ln_price,
                y: vec![],
                phi: vec![],
                phi_inner: vec![],
            });
            continue;
        }
        let y = s.iter().zip(&inner).map(|(a, b)| a.ln() - b.ln()).collect();
        let phi = s.iter().zip(&inner).map(|(a, b)| a / (a + b)).collect();
        let phi_inner = s.iter().zip(&inner).map(|(a, b)| b / (a + b)).collect();
        for (c, a) in inner.iter_mut().zip(&s) {
            *c += a;
        }
        nests.push(NestSeries {
            factor: f,
            active,
            ln_price,
            y,
            phi,
            phi_inner,
        });
    }
    Ok(Prepared {
        nests,
        ln_w: periods.iter().map(|o| o.w.ln()).collect(),
    })
}

/// Closed-form two-point estimates, nest by nest from the core outward.
///
/// For nest `n` with `y_t = ln(s_t / inner_t)` and `x_t = ln(p_t / pi_t)`:
/// `gamma = (y_1 - y_0) / (x_1 - x_0)` and
/// `logit(alpha) = (x_1 y_0 - x_0 y_1) / (x_1 - x_0)`. The compound prices of
/// both periods are then rolled forward through the estimated nest.
pub fn estimate_two_point(data: &TwoPeriodSectorData, order: &[usize]) -> Result<CcesTechnology> {
    let prep = prepare(&data.periods, order)?;
    let mut ln_pi = prep.ln_w.clone();
    let mut nests = Vec::with_capacity(prep.nests.len());
    for (k, s) in prep.nests.iter().enumerate() {
        if !s.active {
            nests.push(Nest::inactive(s.factor));
            continue;
        }
        let x0 = s.ln_price[0] - ln_pi[0];
        let x1 = s.ln_price[1] - ln_pi[1];
        let dx = x1 - x0;
        let dy = s.y[1] - s.y[0];
        let (logit_alpha, gamma) = if dx.abs() < FLAT_TOL {
            if dy.abs() < FLAT_TOL {
                // any gamma restores; take Cobb-Douglas at the reference share
                (s.y[1], 0.0)
            } else {
                return Err(Error::DegenerateNest { nest: k, numerator: dy });
            }
        } else {
            ((x1 * s.y[0] - x0 * s.y[1]) / dx, dy / dx)
        };
        let alpha = logistic(logit_alpha);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::DegenerateNest { nest: k, numerator: dy });
        }
        for t in 0..2 {
            ln_pi[t] = ln_ces(s.ln_price[t], ln_pi[t], alpha, gamma);
        }
        nests.push(Nest::new(s.factor, alpha, gamma));
    }
    CcesTechnology::new(nests)
}

/// Sequential nest-wise least squares over `T >= 2` periods, each nest fitted
/// on compound prices predicted by the already fitted inner nests. With two
/// periods this reproduces [`estimate_two_point`].
pub fn estimate_nestwise(periods: &[SectorObservation], order: &[usize]) -> Result<CcesTechnology> {
    if periods.len() == 2 {
        let data = TwoPeriodSectorData::new(periods[0].clone(), periods[1].clone());
        return estimate_two_point(&data, order);
    }
    let prep = prepare(periods, order)?;
    let t_count = prep.periods();
    let mut ln_pi = prep.ln_w.clone();
    let mut nests = Vec::with_capacity(prep.nests.len());
    for s in &prep.nests {
        if !s.active {
            nests.push(Nest::inactive(s.factor));
            continue;
        }
        let x: Vec<f64> = (0..t_count).map(|t| s.ln_price[t] - ln_pi[t]).collect();
        let mx = x.iter().sum::<f64>() / t_count as f64;
        let my = s.y.iter().sum::<f64>() / t_count as f64;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&s.y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let gamma = if sxx < FLAT_TOL * FLAT_TOL { 0.0 } else { sxy / sxx };
        let alpha = logistic(my - gamma * mx);
        for t in 0..t_count {
            ln_pi[t] = ln_ces(s.ln_price[t], ln_pi[t], alpha, gamma);
        }
        nests.push(Nest::new(s.factor, alpha, gamma));
    }
    CcesTechnology::new(nests)
}

/// Sum over nests and periods of squared regression residuals, with the
/// compound prices generated by the technology itself.
pub(crate) fn nested_ssr(prep: &Prepared, params: &[(f64, f64)]) -> f64 {
    let mut ln_pi = prep.ln_w.clone();
    let mut ssr = 0.0;
    let mut k = 0;
    for s in prep.nests.iter().filter(|s| s.active) {
        let (logit_alpha, gamma) = params[k];
        let alpha = logistic(logit_alpha);
        k += 1;
        for t in 0..ln_pi.len() {
            let x = s.ln_price[t] - ln_pi[t];
            let e = s.y[t] - logit_alpha - gamma * x;
            ssr += e * e;
            ln_pi[t] = ln_ces(s.ln_price[t], ln_pi[t], alpha, gamma);
        }
    }
    ssr
}

#[derive(Debug, Clone)]
pub struct MultipointFit {
    pub technology: CcesTechnology,
    pub ssr: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Joint minimization of the nested SSR over every active nest's
/// `(logit alpha, gamma)`, started from `init`.
pub fn estimate_multipoint(
    periods: &[SectorObservation],
    order: &[usize],
    init: &CcesTechnology,
    opts: &BfgsOptions,
) -> Result<MultipointFit> {
    let prep = prepare(periods, order)?;
    let active: Vec<usize> = prep
        .nests
        .iter()
        .enumerate()
        .filter(|(_, s)| s.active)
        .map(|(k, _)| k)
        .collect();
    if init.nests().len() != prep.nests.len() {
        return Err(Error::InvalidArgument(
            "initial technology does not match the data".into(),
        ));
    }
    let mut x0 = Vec::with_capacity(2 * active.len());
    for &k in &active {
        let n = init.nests()[k];
        let (a, g) = if n.active { (n.alpha, n.gamma) } else { (0.5, 0.0) };
        x0.push(super::logit(a));
        x0.push(g);
    }
    let unpack = |x: &[f64]| -> Vec<(f64, f64)> { x.chunks(2).map(|c| (c[0], c[1])).collect() };
    let res = minimize_bfgs(|x| nested_ssr(&prep, &unpack(x)), &x0, opts);

    let mut nests: Vec<Nest> = prep.nests.iter().map(|s| Nest::inactive(s.factor)).collect();
    for (j, &k) in active.iter().enumerate() {
        nests[k] = Nest::new(prep.nests[k].factor, logistic(res.x[2 * j]), res.x[2 * j + 1]);
    }
    if !res.converged {
        warn!(
            "multi-point estimation stopped after {} iterations (ssr {:e})",
            res.iterations, res.f
        );
    }
    Ok(MultipointFit {
        technology: CcesTechnology::new(nests)?,
        ssr: res.f,
        iterations: res.iterations,
        converged: res.converged,
    })
}
