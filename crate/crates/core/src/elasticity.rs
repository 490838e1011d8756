//! Allen-Uzawa and Morishima substitution elasticities of a CCES unit cost.
//!
//! First derivatives come from Shephard's lemma, `C_i = s_i C / p_i`; cross
//! derivatives are central differences of those in `p_j` with one
//! Richardson step.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cces::{foc_shares, ln_compound, CcesTechnology, Factor, Prices};
use crate::error::{Error, Result};

/// Relative finite-difference step.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
struct Point {
    goods: Vec<f64>,
    r: f64,
    w: f64,
}

impl Point {
    fn get(&self, f: Factor) -> f64 {
        match f {
            Factor::Labor => self.w,
            Factor::Capital => self.r,
            Factor::Good(i) => self.goods[i],
        }
    }

    fn with(&self, f: Factor, v: f64) -> Point {
        let mut p = self.clone();
        match f {
            Factor::Labor => p.w = v,
            Factor::Capital => p.r = v,
            Factor::Good(i) => p.goods[i] = v,
        }
        p
    }

    fn prices(&self) -> Prices<'_> {
        Prices::new(&self.goods, self.r, self.w)
    }
}

fn check_factor(tech: &CcesTechnology, f: Factor) -> Result<()> {
    if tech.factors().contains(&f) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{f:?} does not enter the technology")))
    }
}

fn cost(tech: &CcesTechnology, at: &Point) -> f64 {
    ln_compound(tech, &at.prices()).exp()
}

fn first(tech: &CcesTechnology, at: &Point, i: Factor) -> f64 {
    let s = crate::cces::foc_shares_unchecked(tech, &at.prices());
    s.get(i) * cost(tech, at) / at.get(i)
}

fn cross(tech: &CcesTechnology, at: &Point, i: Factor, j: Factor, rel: f64) -> f64 {
    let pj = at.get(j);
    let diff = |h: f64| {
        let up = first(tech, &at.with(j, pj + h), i);
        let dn = first(tech, &at.with(j, pj - h), i);
        (up - dn) / (2.0 * h)
    };
    let h = rel * pj;
    let d1 = diff(h);
    let d2 = diff(0.5 * h);
    (4.0 * d2 - d1) / 3.0
}

fn point(prices: &Prices<'_>) -> Result<Point> {
    prices.validate()?;
    Ok(Point {
        goods: prices.goods.to_vec(),
        r: prices.r,
        w: prices.w,
    })
}

fn aues_at(tech: &CcesTechnology, at: &Point, i: Factor, j: Factor, rel: f64) -> f64 {
    let c = cost(tech, at);
    let ci = first(tech, at, i);
    let cj = first(tech, at, j);
    c * cross(tech, at, i, j, rel) / (ci * cj)
}

/// Allen-Uzawa elasticity `C C_ij / (C_i C_j)`.
pub fn aues(tech: &CcesTechnology, prices: &Prices<'_>, i: Factor, j: Factor) -> Result<f64> {
    aues_with_step(tech, prices, i, j, FD_STEP)
}

pub fn aues_with_step(tech: &CcesTechnology, prices: &Prices<'_>, i: Factor, j: Factor, rel: f64) -> Result<f64> {
    check_factor(tech, i)?;
    check_factor(tech, j)?;
    let at = point(prices)?;
    Ok(aues_at(tech, &at, i, j, rel))
}

/// Morishima elasticity `a_j (AUES_ij - AUES_jj)`, the response of
/// `ln(x_i / x_j)` to `ln p_j`.
pub fn mes(tech: &CcesTechnology, prices: &Prices<'_>, i: Factor, j: Factor) -> Result<f64> {
    mes_with_step(tech, prices, i, j, FD_STEP)
}

pub fn mes_with_step(tech: &CcesTechnology, prices: &Prices<'_>, i: Factor, j: Factor, rel: f64) -> Result<f64> {
    check_factor(tech, i)?;
    check_factor(tech, j)?;
    let at = point(prices)?;
    let a_j = foc_shares(tech, prices)?.get(j);
    Ok(a_j * (aues_at(tech, &at, i, j, rel) - aues_at(tech, &at, j, j, rel)))
}

#[derive(Debug, Clone)]
pub struct ElasticityTables {
    /// Row and column labels, innermost first.
    pub factors: Vec<Factor>,
    pub aues: DMatrix<f64>,
    pub mes: DMatrix<f64>,
    pub goods: Vec<f64>,
    pub r: f64,
    pub w: f64,
}

/// Both tables over every factor entering `tech`. The AUES diagonal holds
/// the own terms `C C_ii / C_i^2`; the MES diagonal is zero.
pub fn elasticity_tables(tech: &CcesTechnology, prices: &Prices<'_>) -> Result<ElasticityTables> {
    let at = point(prices)?;
    let factors = tech.factors();
    let n = factors.len();
    let shares = foc_shares(tech, prices)?;
    let rows: Vec<Vec<f64>> = factors
        .par_iter()
        .map(|&i| factors.iter().map(|&j| aues_at(tech, &at, i, j, FD_STEP)).collect())
        .collect();
    let mut aues = DMatrix::from_fn(n, n, |a, b| rows[a][b]);
    // restore exact symmetry
    for a in 0..n {
        for b in 0..a {
            let m = 0.5 * (aues[(a, b)] + aues[(b, a)]);
            aues[(a, b)] = m;
            aues[(b, a)] = m;
        }
    }
    let mes = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            0.0
        } else {
            shares.get(factors[b]) * (aues[(a, b)] - aues[(b, b)])
        }
    });
    Ok(ElasticityTables {
        factors,
        aues,
        mes,
        goods: at.goods,
        r: at.r,
        w: at.w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cces::Nest;

    #[test]
    fn two_factor_ces() {
        let t = CcesTechnology::new(vec![Nest::new(Factor::Capital, 0.3, -0.6)]).unwrap();
        for (r, w) in [(1.0, 1.0), (2.5, 0.4)] {
            let p = Prices::new(&[], r, w);
            let e = aues(&t, &p, Factor::Capital, Factor::Labor).unwrap();
            assert!((e - 1.6).abs() < 1e-7, "{e}");
            let m = mes(&t, &p, Factor::Labor, Factor::Capital).unwrap();
            assert!((m - 1.6).abs() < 1e-7);
            let m = mes(&t, &p, Factor::Capital, Factor::Labor).unwrap();
            assert!((m - 1.6).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_missing_factor() {
        let t = CcesTechnology::new(vec![Nest::new(Factor::Capital, 0.3, -0.6)]).unwrap();
        let p = Prices::new(&[1.0], 1.0, 1.0);
        assert!(aues(&t, &p, Factor::Good(0), Factor::Labor).is_err());
    }
}
