//! Multifactor CES household: price index, expenditure shares, and the
//! weighted instrumental-variables estimate of the exponent `lambda`.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::cces::GAMMA_EPS;
use crate::error::{Error, Result};

/// Share parameters `mu` (summing to one) and exponent `lambda`; the
/// substitution elasticity is `1 - lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdModel {
    pub mu: Vec<f64>,
    pub lambda: f64,
}

impl HouseholdModel {
    pub fn new(mu: Vec<f64>, lambda: f64) -> Result<Self> {
        if mu.is_empty() || mu.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidArgument("share parameters must be nonnegative".into()));
        }
        let s: f64 = mu.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("share parameters sum to {s}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite".into()));
        }
        Ok(HouseholdModel { mu, lambda })
    }

    /// Reference-period expenditure shares as share parameters.
    pub fn from_reference_shares(b1: &[f64], lambda: f64) -> Result<Self> {
        let s: f64 = b1.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidArgument("reference shares are empty".into()));
        }
        HouseholdModel::new(b1.iter().map(|b| b / s).collect(), lambda)
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.mu.len() {
            return Err(Error::InvalidArgument(format!(
                "{} prices for {} goods",
                p.len(),
                self.mu.len()
            )));
        }
        if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidPrice);
        }
        Ok(())
    }
}

/// `ln psi` without validation.
pub(crate) fn ln_price_index(p: &[f64], model: &HouseholdModel) -> f64 {
    let lambda = model.lambda;
    let terms = model.mu.iter().zip(p).filter(|(m, _)| **m > 0.0);
    if lambda.abs() < GAMMA_EPS {
        // geometric mean plus the first-order term in lambda
        let mean: f64 = terms.clone().map(|(m, v)| m * v.ln()).sum();
        let var: f64 = terms.map(|(m, v)| m * (v.ln() - mean).powi(2)).sum();
        return mean + 0.5 * lambda * var;
    }
    let z: Vec<f64> = terms.map(|(m, v)| m.ln() + lambda * v.ln()).collect();
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (top + z.iter().map(|v| (v - top).exp()).sum::<f64>().ln()) / lambda
}

/// `psi(p) = (sum_i mu_i p_i^lambda)^(1 / lambda)`.
pub fn price_index(p: &[f64], model: &HouseholdModel) -> Result<f64> {
    model.check(p)?;
    Ok(ln_price_index(p, model).exp())
}

/// `b_i = mu_i (p_i / psi)^lambda`.
pub fn expenditure_shares(p: &[f64], model: &HouseholdModel) -> Result<Vec<f64>> {
    model.check(p)?;
    Ok(shares_unchecked(p, model))
}

pub(crate) fn shares_unchecked(p: &[f64], model: &HouseholdModel) -> Vec<f64> {
    let z: Vec<f64> = model
        .mu
        .iter()
        .zip(p)
        .map(|(m, v)| if *m > 0.0 { m.ln() + model.lambda * v.ln() } else { f64::NEG_INFINITY })
        .collect();
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Observation weighting of the first-difference regression, with
/// `nu_i^2 = 1 / b_i1^2 + 1 / b_i0^2` the relative error variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Weights `1 / nu_i^2` (rows scaled by `1 / nu_i`).
    #[default]
    InverseVariance,
    /// Weights `1 / nu_i` (rows scaled by `1 / sqrt(nu_i)`).
    InverseNu,
    Unweighted,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse_variance" | "variance" => Ok(Weighting::InverseVariance),
            "inverse_nu" | "nu" => Ok(Weighting::InverseNu),
            "none" | "unweighted" => Ok(Weighting::Unweighted),
            other => Err(Error::InvalidArgument(format!("unknown weighting '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HouseholdData {
    pub b0: Vec<f64>,
    pub b1: Vec<f64>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    /// Per-item instrument (productivity growth of the producing sector).
    pub instrument: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub value: f64,
    pub df1: f64,
    /// Denominator degrees of freedom for F statistics, absent for chi-square.
    pub df2: Option<f64>,
    pub p_value: f64,
}

impl TestStatistic {
    fn chi2(value: f64, df: f64) -> Self {
        let p_value = ChiSquared::new(df).map_or(f64::NAN, |d| d.sf(value));
        TestStatistic {
            value,
            df1: df,
            df2: None,
            p_value,
        }
    }

    fn f(value: f64, df1: f64, df2: f64) -> Self {
        let p_value = FisherSnedecor::new(df1, df2).map_or(f64::NAN, |d| d.sf(value));
        TestStatistic {
            value,
            df1,
            df2: Some(df2),
            p_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Joint significance of the excluded instruments in the first stage.
    pub first_stage_f: TestStatistic,
    pub sargan: TestStatistic,
    pub basmann: TestStatistic,
    pub durbin: TestStatistic,
    pub wu_hausman: TestStatistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda: f64,
    pub intercept: f64,
    pub se_lambda: f64,
    pub se_intercept: f64,
    pub n_items: usize,
    /// Items dropped for zero consumption in some period.
    pub dropped: Vec<usize>,
    pub weighting: Weighting,
    pub diagnostics: Diagnostics,
}

struct Fit {
    beta: DVector<f64>,
    resid: DVector<f64>,
    xtx_inv: DMatrix<f64>,
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<Fit> {
    let xtx = x.transpose() * x;
    let chol = xtx.clone().cholesky()?;
    let xtx_inv = chol.inverse();
    let beta = chol.solve(&(x.transpose() * y));
    let resid = y - x * &beta;
    if !beta.iter().all(|v| v.is_finite()) {
        return None;
    }
    // reject numerically singular designs
    let d = xtx.diagonal();
    let scale = d.iter().copied().fold(0.0, f64::max);
    if (0..x.ncols()).any(|i| xtx_inv[(i, i)] * scale > 1e14) {
        return None;
    }
    Some(Fit { beta, resid, xtx_inv })
}

/// Weighted least squares of `y` on `x` (columns as given); returns the
/// coefficients.
pub fn weighted_ols(x: &DMatrix<f64>, y: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let s: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let xs = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * s[i]);
    let ys = DVector::from_fn(y.len(), |i, _| y[i] * s[i]);
    let fit = ols(&xs, &ys).ok_or_else(|| Error::RankDeficient("weighted OLS design".into()))?;
    Ok(fit.beta.iter().copied().collect())
}

/// Per-item observation weights `1 / nu^2`, `1 / nu` or 1.
pub fn observation_weights(b0: &[f64], b1: &[f64], weighting: Weighting) -> Vec<f64> {
    b0.iter()
        .zip(b1)
        .map(|(a, b)| {
            let nu = (1.0 / (a * a) + 1.0 / (b * b)).sqrt();
            match weighting {
                Weighting::InverseVariance => 1.0 / (nu * nu),
                Weighting::InverseNu => 1.0 / nu,
                Weighting::Unweighted => 1.0,
            }
        })
        .collect()
}

/// Minimum number of usable items (overidentification tests need `n > 3`).
pub const MIN_ITEMS: usize = 4;

/// Weighted 2SLS of `d ln b_i = c + lambda d ln p_i + e_i` with instruments
/// `z_i` and `exp(z_i)`.
pub fn estimate_lambda(data: &HouseholdData, weighting: Weighting) -> Result<LambdaEstimate> {
    let n_all = data.b0.len();
    if [data.b1.len(), data.p0.len(), data.p1.len(), data.instrument.len()]
        .iter()
        .any(|&l| l != n_all)
    {
        return Err(Error::InvalidArgument("household inputs have different lengths".into()));
    }
    let mut keep = Vec::with_capacity(n_all);
    let mut dropped = Vec::new();
    for i in 0..n_all {
        let (p0, p1) = (data.p0[i], data.p1[i]);
        if !(p0 > 0.0 && p1 > 0.0 && p0.is_finite() && p1.is_finite()) {
            return Err(Error::InvalidPrice);
        }
        if !data.instrument[i].is_finite() {
            return Err(Error::InvalidArgument(format!("instrument {i} is not finite")));
        }
        if data.b0[i] > 0.0 && data.b1[i] > 0.0 {
            keep.push(i);
        } else {
            dropped.push(i);
        }
    }
    if !dropped.is_empty() {
        warn!("{} items with zero consumption dropped from the regression", dropped.len());
    }
    let n = keep.len();
    if n < MIN_ITEMS {
        return Err(Error::TooFewItems {
            found: n,
            needed: MIN_ITEMS,
        });
    }

    let b0: Vec<f64> = keep.iter().map(|&i| data.b0[i]).collect();
    let b1: Vec<f64> = keep.iter().map(|&i| data.b1[i]).collect();
    let s: Vec<f64> = observation_weights(&b0, &b1, weighting)
        .into_iter()
        .map(f64::sqrt)
        .collect();
    let y = DVector::from_fn(n, |k, _| s[k] * (b1[k].ln() - b0[k].ln()));
    let dp: Vec<f64> = keep.iter().map(|&i| data.p1[i].ln() - data.p0[i].ln()).collect();
    if dp.iter().all(|&v| v == 0.0) {
        return Err(Error::RankDeficient("no price variation across items".into()));
    }
    let x = DMatrix::from_fn(n, 2, |k, c| s[k] * if c == 0 { 1.0 } else { dp[k] });
    let z = DMatrix::from_fn(n, 3, |k, c| {
        let zi = data.instrument[keep[k]];
        s[k] * match c {
            0 => 1.0,
            1 => zi,
            _ => zi.exp(),
        }
    });

    // first stage
    let first = ols(&z, &x.column(1).into_owned())
        .ok_or_else(|| Error::RankDeficient("instrument matrix".into()))?;
    let xhat = DMatrix::from_fn(n, 2, |k, c| if c == 0 { x[(k, 0)] } else { x[(k, 1)] - first.resid[k] });
    let second = ols(&xhat, &y).ok_or_else(|| Error::RankDeficient("first-stage fitted regressor".into()))?;
    let beta = second.beta.clone();
    let u = &y - &x * &beta;
    let nf = n as f64;
    let (kx, lz) = (2.0, 3.0);
    let rss = u.norm_squared();
    let sigma2 = rss / (nf - kx);
    let cov = &second.xtx_inv * sigma2;

    // first-stage F of the excluded instruments
    let restricted = ols(&z.columns(0, 1).into_owned(), &x.column(1).into_owned())
        .ok_or_else(|| Error::RankDeficient("weights".into()))?;
    let rss_u = first.resid.norm_squared();
    let rss_r = restricted.resid.norm_squared();
    let f_first = ((rss_r - rss_u) / 2.0) / (rss_u / (nf - lz));

    // overidentification, from the projection of the 2SLS residual on Z
    let uz = ols(&z, &u).ok_or_else(|| Error::RankDeficient("instrument matrix".into()))?;
    let u_mz = uz.resid.norm_squared();
    let u_pz = rss - u_mz;
    let sargan = nf * u_pz / rss;
    let basmann = (nf - lz) * u_pz / u_mz;

    // regressor endogeneity via the control-function regression
    let ols_fit = ols(&x, &y).ok_or_else(|| Error::RankDeficient("OLS design".into()))?;
    let rss_ols = ols_fit.resid.norm_squared();
    // a regressor lying in the instrument space leaves no control function
    let exogenous = first.resid.norm_squared() <= 1e-24 * x.column(1).norm_squared();
    let (rss_aug, delta) = if exogenous {
        (rss_ols, 0.0)
    } else {
        let mut aug = x.clone().insert_column(2, 0.0);
        aug.set_column(2, &first.resid);
        let aug_fit = ols(&aug, &y).ok_or_else(|| Error::RankDeficient("augmented design".into()))?;
        let rss_aug = aug_fit.resid.norm_squared();
        (rss_aug, rss_ols - rss_aug)
    };
    let durbin = nf * delta / rss_ols;
    let wu = delta / (rss_aug / (nf - kx - 1.0));

    Ok(LambdaEstimate {
        lambda: beta[1],
        intercept: beta[0],
        se_lambda: cov[(1, 1)].sqrt(),
        se_intercept: cov[(0, 0)].sqrt(),
        n_items: n,
        dropped,
        weighting,
        diagnostics: Diagnostics {
            first_stage_f: TestStatistic::f(f_first, 2.0, nf - lz),
            sargan: TestStatistic::chi2(sargan, lz - kx),
            basmann: TestStatistic::chi2(basmann, lz - kx),
            durbin: TestStatistic::chi2(durbin, 1.0),
            wu_hausman: TestStatistic::f(wu, 1.0, nf - kx - 1.0),
        },
    })
}
