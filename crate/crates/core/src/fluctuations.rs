//! Monte Carlo propagation of iid sectoral productivity shocks.
//!
//! Each draw `d` imposes `ln tau(d) ~ N(0, sigma^2 ell)` on every sector,
//! solves the economy at `r = w = 1`, and records the aggregate fluctuation
//! `-(sum_j ln p_j(d)) / J`.

use log::warn;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::equilibrium::{closed_form_prices, solve_equilibrium, Economy, EconomyKind, SolverConfig};
use crate::error::{Error, Result};

/// Hours per (Julian) year, for horizons given in hours.
pub const HOURS_PER_YEAR: f64 = 8766.0;

/// Draws in rows, sectors in columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockMatrix {
    pub ln_tau: DMatrix<f64>,
    pub sigma: f64,
    pub ell: f64,
    pub seed: u64,
}

impl ShockMatrix {
    pub fn draws(&self) -> usize {
        self.ln_tau.nrows()
    }

    pub fn sectors(&self) -> usize {
        self.ln_tau.ncols()
    }

    pub fn tau(&self, d: usize) -> Vec<f64> {
        self.ln_tau.row(d).iter().map(|v| v.exp()).collect()
    }

    pub fn scaled(&self, k: f64) -> ShockMatrix {
        ShockMatrix {
            ln_tau: &self.ln_tau * k,
            sigma: self.sigma * k,
            ..self.clone()
        }
    }
}

/// Horizon in years from strings such as `1h`, `30d`, `0.5y` or `2`.
pub fn parse_horizon(s: &str) -> Result<f64> {
    let s = s.trim();
    let (num, scale) = match s.chars().last() {
        Some('h') => (&s[..s.len() - 1], 1.0 / HOURS_PER_YEAR),
        Some('d') => (&s[..s.len() - 1], 24.0 / HOURS_PER_YEAR),
        Some('y') => (&s[..s.len() - 1], 1.0),
        _ => (s, 1.0),
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad horizon '{s}'")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got '{s}'")));
    }
    Ok(v * scale)
}

/// iid normal log-productivity shocks with sd `sigma * sqrt(ell)`. Draw `d`
/// uses its own ChaCha stream, so results do not depend on thread count.
pub fn draw_shocks(sectors: usize, draws: usize, sigma: f64, ell: f64, seed: u64) -> Result<ShockMatrix> {
    if sectors == 0 || draws == 0 {
        return Err(Error::InvalidArgument("need at least one sector and one draw".into()));
    }
    if !(sigma >= 0.0 && ell > 0.0 && sigma.is_finite() && ell.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad volatility {sigma} or horizon {ell}")));
    }
    let sd = sigma * ell.sqrt();
    let rows: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(d as u64);
            (0..sectors)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Ok(ShockMatrix {
        ln_tau: DMatrix::from_fn(draws, sectors, |d, j| rows[d][j]),
        sigma,
        ell,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationSeries {
    pub kind: String,
    /// Draw index of each value.
    pub draws: Vec<usize>,
    pub values: Vec<f64>,
    /// Draws whose equilibrium could not be computed.
    pub failed: Vec<usize>,
}

impl FluctuationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-draw difference `self - other` over draws present in both.
    pub fn difference(&self, other: &FluctuationSeries) -> FluctuationSeries {
        let mut lookup = vec![None; self.draws.iter().chain(&other.draws).max().map_or(0, |m| m + 1)];
        for (&d, &v) in other.draws.iter().zip(&other.values) {
            lookup[d] = Some(v);
        }
        let mut draws = Vec::new();
        let mut values = Vec::new();
        for (&d, &v) in self.draws.iter().zip(&self.values) {
            if let Some(o) = lookup[d] {
                draws.push(d);
                values.push(v - o);
            }
        }
        let mut failed: Vec<usize> = self.failed.iter().chain(&other.failed).copied().collect();
        failed.sort_unstable();
        failed.dedup();
        FluctuationSeries {
            kind: format!("{}-{}", self.kind, other.kind),
            draws,
            values,
            failed,
        }
    }
}

/// Aggregate fluctuation of every draw. Cobb-Douglas and Leontief kinds use
/// their closed forms, the CCES kind the feedback iteration, and the simple
/// kind the row mean of `ln tau`.
pub fn simulate_aggregate(econ: &Economy, shocks: &ShockMatrix, cfg: &SolverConfig) -> Result<FluctuationSeries> {
    let n = econ.len();
    if shocks.sectors() != n {
        return Err(Error::InvalidArgument(format!(
            "shocks have {} sectors, economy has {n}",
            shocks.sectors()
        )));
    }
    let cd_inverse = if econ.kind() == EconomyKind::CobbDouglas {
        let m = DMatrix::<f64>::identity(n, n) - &econ.reference().goods;
        Some(m.try_inverse().ok_or_else(|| Error::Singular("I - A".into()))?)
    } else {
        None
    };

    let results: Vec<Option<f64>> = (0..shocks.draws())
        .into_par_iter()
        .map(|d| {
            let row = shocks.ln_tau.row(d);
            match econ.kind() {
                EconomyKind::Simple => Some(row.sum() / n as f64),
                EconomyKind::CobbDouglas => {
                    // ln p = -(ln tau)[I - A]^-1 at r = w = 1
                    let linv = cd_inverse.as_ref().expect("computed above");
                    Some((row * linv).sum() / n as f64)
                }
                EconomyKind::Leontief => closed_form_prices(econ, &shocks.tau(d))
                    .ok()
                    .map(|p| -p.iter().map(|v| v.ln()).sum::<f64>() / n as f64),
                EconomyKind::Cces => solve_equilibrium(econ, &shocks.tau(d), 1.0, 1.0, cfg)
                    .ok()
                    .filter(|st| st.converged)
                    .map(|st| -st.p.iter().map(|v| v.ln()).sum::<f64>() / n as f64),
            }
        })
        .collect();

    let mut series = FluctuationSeries {
        kind: econ.kind().label().to_string(),
        draws: Vec::new(),
        values: Vec::new(),
        failed: Vec::new(),
    };
    for (d, r) in results.into_iter().enumerate() {
        match r {
            Some(v) => {
                series.draws.push(d);
                series.values.push(v);
            }
            None => series.failed.push(d),
        }
    }
    if !series.failed.is_empty() {
        warn!(
            "{} of {} draws failed for kind {} and were excluded",
            series.failed.len(),
            shocks.draws(),
            series.kind
        );
    }
    Ok(series)
}

/// Population moments and normal QQ pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `(standard normal quantile, sorted sample value)`.
    pub qq: Vec<(f64, f64)>,
}

/// Moments of `values`. Skewness and kurtosis are NaN for a constant sample.
pub fn moments(values: &[f64]) -> Result<Summary> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 values, got {n}")));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (f64::NAN, f64::NAN)
    };

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let qq = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (normal.inverse_cdf((i as f64 + 0.5) / nf), v))
        .collect();
    Ok(Summary {
        n,
        mean,
        sd: m2.sqrt(),
        skewness,
        excess_kurtosis,
        qq,
    })
}

/// Summary of `series`, or of `series - reference` per draw when a
/// reference is given.
pub fn summarize(series: &FluctuationSeries, reference: Option<&FluctuationSeries>) -> Result<Summary> {
    match reference {
        Some(r) => moments(&series.difference(r).values),
        None => moments(&series.values),
    }
}

/// R² of the least-squares line through the QQ pairs.
pub fn qq_r_squared(qq: &[(f64, f64)]) -> f64 {
    let n = qq.len() as f64;
    let mx = qq.iter().map(|p| p.0).sum::<f64>() / n;
    let my = qq.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in qq {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy * sxy / (sxx * syy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iotable::ShareMatrix;

    #[test]
    fn horizons() {
        assert!((parse_horizon("1h").unwrap() - 1.0 / 8766.0).abs() < 1e-18);
        assert_eq!(parse_horizon("2y").unwrap(), 2.0);
        assert_eq!(parse_horizon("0.5").unwrap(), 0.5);
        assert!((parse_horizon("365.25d").unwrap() - 1.0).abs() < 1e-12);
        assert!(parse_horizon("x").is_err());
        assert!(parse_horizon("-1h").is_err());
    }

    #[test]
    fn zero_sigma_and_determinism() {
        let s = draw_shocks(3, 10, 0.0, 1.0, 1).unwrap();
        assert!(s.ln_tau.iter().all(|&v| v == 0.0));
        let a = draw_shocks(4, 50, 0.1, 1.0, 42).unwrap();
        let b = draw_shocks(4, 50, 0.1, 1.0, 42).unwrap();
        assert_eq!(a, b);
        let c = draw_shocks(4, 50, 0.1, 1.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn moments_of_two_point_sample() {
        let m = moments(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.skewness, 0.0);
        assert_eq!(m.sd, 1.0);
        assert_eq!(m.excess_kurtosis, -2.0);
        assert!(moments(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn simple_kind_is_row_mean() {
        let reference = ShareMatrix {
            goods: DMatrix::from_row_slice(2, 2, &[0.1, 0.3, 0.2, 0.0]),
            capital: vec![0.3, 0.3],
            labor: vec![0.4, 0.4],
        };
        let e = Economy::from_reference(EconomyKind::Simple, reference).unwrap();
        let s = draw_shocks(2, 20, 0.2, 1.0, 3).unwrap();
        let f = simulate_aggregate(&e, &s, &SolverConfig::default()).unwrap();
        for d in 0..20 {
            let expected = s.ln_tau.row(d).sum() / 2.0;
            assert!((f.values[d] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn difference_aligns_draws() {
        let a = FluctuationSeries {
            kind: "a".into(),
            draws: vec![0, 1, 3],
            values: vec![1.0, 2.0, 4.0],
            failed: vec![2],
        };
        let b = FluctuationSeries {
            kind: "b".into(),
            draws: vec![0, 2, 3],
            values: vec![0.5, 9.0, 1.0],
            failed: vec![1],
        };
        let d = a.difference(&b);
        assert_eq!(d.draws, vec![0, 3]);
        assert_eq!(d.values, vec![0.5, 3.0]);
        assert_eq!(d.failed, vec![1, 2]);
    }
}
