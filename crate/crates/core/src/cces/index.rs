use super::estimate::{prepare, TwoPeriodSectorData};
use super::Factor;
use crate::error::{Error, Result};

/// Logarithmic mean `(a - b) / (ln a - ln b)`, with `L(a, a) = a`.
pub fn log_mean(a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "log mean needs positive arguments");
    let u = 0.5 * (a.ln() - b.ln());
    let g = (a * b).sqrt();
    if u.abs() < 1e-4 {
        g * (1.0 + u * u / 6.0 + u.powi(4) / 120.0)
    } else {
        g * u.sinh() / u
    }
}

/// Cascaded Sato-Vartia log price index.
#[derive(Debug, Clone, PartialEq)]
pub struct SatoVartiaIndex {
    /// `ln pi_1 - ln pi_0` leaving each nest (inactive nests repeat the inner value).
    pub per_nest: Vec<f64>,
    pub factors: Vec<Factor>,
    /// Change of the outermost compound price.
    pub total: f64,
}

/// Two-factor Sato-Vartia indices folded from the core outward. Each nest
/// weighs the change of its own price against the change of the inner
/// compound, with weights proportional to the logarithmic means of the
/// within-nest shares.
pub fn sato_vartia_index(data: &TwoPeriodSectorData, order: &[usize]) -> Result<SatoVartiaIndex> {
    let prep = prepare(&data.periods, order)?;
    let mut d = prep.ln_w[1] - prep.ln_w[0];
    let mut per_nest = Vec::with_capacity(prep.nests.len());
    let mut factors = Vec::with_capacity(prep.nests.len());
    for s in &prep.nests {
        factors.push(s.factor);
        if s.active {
            let lp = log_mean(s.phi[1], s.phi[0]);
            let li = log_mean(s.phi_inner[1], s.phi_inner[0]);
            let wgt = lp / (lp + li);
            d = wgt * (s.ln_price[1] - s.ln_price[0]) + (1.0 - wgt) * d;
        }
        per_nest.push(d);
    }
    Ok(SatoVartiaIndex {
        per_nest,
        factors,
        total: d,
    })
}

fn output_change(data: &TwoPeriodSectorData) -> Result<f64> {
    let [a, b] = &data.periods;
    if !(a.q > 0.0 && b.q > 0.0) {
        return Err(Error::InvalidPrice);
    }
    Ok(b.q.ln() - a.q.ln())
}

/// Input-price index from the cascaded Sato-Vartia aggregation minus the
/// output-price change.
pub fn tfpg_cces(data: &TwoPeriodSectorData, order: &[usize]) -> Result<f64> {
    let dq = output_change(data)?;
    Ok(sato_vartia_index(data, order)?.total - dq)
}

/// Törnqvist input-price index minus the output-price change.
pub fn tfpg_translog(data: &TwoPeriodSectorData) -> Result<f64> {
    let dq = output_change(data)?;
    let [a, b] = &data.periods;
    if a.goods_shares.len() != b.goods_shares.len() || a.prices.len() != b.prices.len() {
        return Err(Error::InvalidArgument("inconsistent observation lengths".into()));
    }
    let ok = |v: f64| v > 0.0 && v.is_finite();
    let all = a.prices.iter().chain(&b.prices).copied().chain([a.r, b.r, a.w, b.w]);
    if !all.into_iter().all(ok) {
        return Err(Error::InvalidPrice);
    }
    let mut idx = 0.0;
    for i in 0..a.goods_shares.len() {
        let s = 0.5 * (a.goods_shares[i] + b.goods_shares[i]);
        if s != 0.0 {
            idx += s * (b.prices[i].ln() - a.prices[i].ln());
        }
    }
    idx += 0.5 * (a.capital_share + b.capital_share) * (b.r.ln() - a.r.ln());
    idx += 0.5 * (a.labor_share() + b.labor_share()) * (b.w.ln() - a.w.ln());
    Ok(idx - dq)
}

#[cfg(test)]
mod tests {
    use super::super::estimate::SectorObservation;
    use super::*;

    fn obs(goods: Vec<f64>, k: f64, p: Vec<f64>, r: f64, w: f64, q: f64) -> SectorObservation {
        SectorObservation {
            goods_shares: goods,
            capital_share: k,
            prices: p,
            r,
            w,
            q,
        }
    }

    #[test]
    fn log_mean_values() {
        assert_eq!(log_mean(2.0, 2.0), 2.0);
        let exact = (3.0 - 1.0) / 3f64.ln();
        assert!((log_mean(3.0, 1.0) - exact).abs() < 1e-15);
        let (a, b) = (1.0 + 1e-6, 1.0);
        assert!((log_mean(a, b) - (a - b) / (a.ln() - b.ln())).abs() < 1e-9);
        assert!((log_mean(a, b) - log_mean(b, a)).abs() < 1e-16);
    }

    #[test]
    fn half_shares_doubling_price() {
        // capital 0.5, labor 0.5, r doubles
        let d = TwoPeriodSectorData::new(
            obs(vec![], 0.5, vec![], 1.0, 1.0, 1.0),
            obs(vec![], 0.5, vec![], 2.0, 1.0, 1.0),
        );
        let sv = sato_vartia_index(&d, &[]).unwrap();
        assert!((sv.total - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn flat_prices_zero_index() {
        let d = TwoPeriodSectorData::new(
            obs(vec![0.2, 0.3], 0.1, vec![1.3, 0.8], 1.1, 0.9, 1.0),
            obs(vec![0.25, 0.2], 0.2, vec![1.3, 0.8], 1.1, 0.9, 1.0),
        );
        assert!(sato_vartia_index(&d, &[0, 1]).unwrap().total.abs() < 1e-15);
    }

    #[test]
    fn tfpg_simple_cases() {
        let flat = |q| obs(vec![0.3], 0.2, vec![1.0], 1.0, 1.0, q);
        let d = TwoPeriodSectorData::new(flat(1.0), flat(0.5));
        assert!((tfpg_cces(&d, &[0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((tfpg_translog(&d).unwrap() - 2f64.ln()).abs() < 1e-15);

        let d = TwoPeriodSectorData::new(
            obs(vec![0.3], 0.2, vec![1.0], 1.0, 1.0, 1.0),
            obs(vec![0.3], 0.2, vec![1.4], 1.0, 1.0, 1.1),
        );
        let expected = 0.3 * 1.4f64.ln() - 1.1f64.ln();
        assert!((tfpg_translog(&d).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn output_tracking_index_gives_zero() {
        let mut a = obs(vec![0.3, 0.1], 0.25, vec![1.2, 0.7], 0.9, 1.3, 1.0);
        let b = obs(vec![0.2, 0.15], 0.3, vec![1.0, 1.0], 1.0, 1.0, 1.0);
        let d = TwoPeriodSectorData::new(a.clone(), b.clone());
        let sv = sato_vartia_index(&d, &[0, 1]).unwrap().total;
        a.q = (-sv).exp();
        let d = TwoPeriodSectorData::new(a, b);
        assert!(tfpg_cces(&d, &[0, 1]).unwrap().abs() < 1e-14);
    }
}
