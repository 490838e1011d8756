//! Economy-wide price equilibrium.
//!
//! Every sector prices its output at unit cost over productivity,
//! `p_j = C_j(p, r, w) / tau_j`, and the mapping from productivities to the
//! fixed point of this system gives equilibrium prices. Cobb-Douglas and
//! Leontief economies built on a reference share matrix `A` have closed
//! forms; CCES economies are solved by feedback iteration.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cces::{self, estimate_two_point, CcesTechnology, Prices, TwoPeriodSectorData};
use crate::error::{Error, Result};
use crate::iotable::{max_abs_vec_diff, LinkedIOTable, ShareMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EconomyKind {
    Cces,
    CobbDouglas,
    Leontief,
    /// No intermediate linkages: each sector uses capital and labor only.
    Simple,
}

impl EconomyKind {
    pub fn label(self) -> &'static str {
        match self {
            EconomyKind::Cces => "cces",
            EconomyKind::CobbDouglas => "cd",
            EconomyKind::Leontief => "leontief",
            EconomyKind::Simple => "simple",
        }
    }
}

impl std::str::FromStr for EconomyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cces" => Ok(EconomyKind::Cces),
            "cd" | "cobbdouglas" | "cobb-douglas" => Ok(EconomyKind::CobbDouglas),
            "leontief" | "lt" => Ok(EconomyKind::Leontief),
            "simple" => Ok(EconomyKind::Simple),
            other => Err(Error::InvalidArgument(format!("unknown economy kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for EconomyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Sector technologies plus the reference share matrix they are normalized to.
#[derive(Debug, Clone)]
pub struct Economy {
    techs: Vec<CcesTechnology>,
    kind: EconomyKind,
    reference: ShareMatrix,
}

impl Economy {
    /// CCES economy; the reference matrix is read off the technologies at
    /// unit prices.
    pub fn cces(techs: Vec<CcesTechnology>) -> Result<Self> {
        let n = techs.len();
        if n == 0 {
            return Err(Error::InvalidArgument("economy has no sectors".into()));
        }
        let ones = vec![1.0; n];
        let prices = Prices::new(&ones, 1.0, 1.0);
        let mut reference = ShareMatrix {
            goods: DMatrix::zeros(n, n),
            capital: vec![0.0; n],
            labor: vec![0.0; n],
        };
        for (j, t) in techs.iter().enumerate() {
            if let Some(bad) = t.nests().iter().find_map(|nest| match nest.factor {
                cces::Factor::Good(i) if i >= n => Some(i),
                _ => None,
            }) {
                return Err(Error::InvalidArgument(format!(
                    "sector {j} uses good {bad} outside the economy"
                )));
            }
            let s = cces::foc_shares(t, &prices)?;
            reference.goods.set_column(j, &DVector::from_vec(s.goods));
            reference.capital[j] = s.capital;
            reference.labor[j] = s.labor;
        }
        Ok(Economy {
            techs,
            kind: EconomyKind::Cces,
            reference,
        })
    }

    /// Cobb-Douglas, Leontief or simple economy on a given reference matrix.
    pub fn from_reference(kind: EconomyKind, reference: ShareMatrix) -> Result<Self> {
        if kind == EconomyKind::Cces {
            return Err(Error::InvalidArgument(
                "a CCES economy needs sector technologies".into(),
            ));
        }
        let n = reference.sectors();
        if n == 0 || reference.goods.nrows() != n || reference.capital.len() != n || reference.labor.len() != n {
            return Err(Error::InvalidArgument("malformed reference share matrix".into()));
        }
        for j in 0..n {
            let col = reference.column_sum(j);
            let neg = reference.goods.column(j).iter().any(|&v| v < 0.0)
                || reference.capital[j] < 0.0
                || reference.labor[j] < 0.0;
            if neg || (col - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "reference column {j} is not a share vector (sum {col})"
                )));
            }
        }
        Ok(Economy {
            techs: vec![],
            kind,
            reference,
        })
    }

    /// Same reference network under another kind. Switching to CCES requires
    /// technologies.
    pub fn with_kind(&self, kind: EconomyKind) -> Result<Self> {
        if kind == EconomyKind::Cces && self.techs.is_empty() {
            return Err(Error::InvalidArgument(
                "a CCES economy needs sector technologies".into(),
            ));
        }
        Ok(Economy {
            techs: self.techs.clone(),
            kind,
            reference: self.reference.clone(),
        })
    }

    /// Two-point restoring CCES economy estimated from `table`, goods nested
    /// along `order` (upstream first).
    pub fn estimate(table: &LinkedIOTable, order: &[usize]) -> Result<Self> {
        let techs = (0..table.len())
            .into_par_iter()
            .map(|j| estimate_two_point(&TwoPeriodSectorData::from_table(table, j), order))
            .collect::<Result<Vec<_>>>()?;
        Economy::cces(techs)
    }

    pub fn len(&self) -> usize {
        self.reference.sectors()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> EconomyKind {
        self.kind
    }

    pub fn techs(&self) -> &[CcesTechnology] {
        &self.techs
    }

    pub fn reference(&self) -> &ShareMatrix {
        &self.reference
    }

    /// Capital weight of the value-added aggregate, `a_K / a_0`.
    fn capital_weight(&self, j: usize) -> f64 {
        let a0 = self.reference.capital[j] + self.reference.labor[j];
        if a0 > 0.0 {
            self.reference.capital[j] / a0
        } else {
            0.0
        }
    }
}

/// Unit costs `C_j(p, r, w)` before dividing by productivity.
pub fn unit_costs(econ: &Economy, p: &[f64], r: f64, w: f64) -> Vec<f64> {
    let a = &econ.reference;
    let n = econ.len();
    match econ.kind {
        EconomyKind::Cces => {
            let prices = Prices::new(p, r, w);
            econ.techs
                .iter()
                .map(|t| cces::ln_compound(t, &prices).exp())
                .collect()
        }
        EconomyKind::CobbDouglas => {
            let lp: Vec<f64> = p.iter().map(|v| v.ln()).collect();
            (0..n)
                .map(|j| {
                    let mut s = a.capital[j] * r.ln() + a.labor[j] * w.ln();
                    for i in 0..n {
                        let aij = a.goods[(i, j)];
                        if aij != 0.0 {
                            s += aij * lp[i];
                        }
                    }
                    s.exp()
                })
                .collect()
        }
        EconomyKind::Leontief => (0..n)
            .map(|j| {
                let goods: f64 = (0..n).map(|i| a.goods[(i, j)] * p[i]).sum();
                goods + a.capital[j] * r + a.labor[j] * w
            })
            .collect(),
        EconomyKind::Simple => (0..n)
            .map(|j| {
                let k = econ.capital_weight(j);
                (k * r.ln() + (1.0 - k) * w.ln()).exp()
            })
            .collect(),
    }
}

/// Cost-share matrix implied by the technologies at prices `(p, r, w)`.
pub fn network_shares(econ: &Economy, p: &[f64], r: f64, w: f64) -> ShareMatrix {
    let n = econ.len();
    let a = &econ.reference;
    match econ.kind {
        EconomyKind::Cces => {
            let prices = Prices::new(p, r, w);
            let mut s = ShareMatrix {
                goods: DMatrix::zeros(n, n),
                capital: vec![0.0; n],
                labor: vec![0.0; n],
            };
            for (j, t) in econ.techs.iter().enumerate() {
                let f = cces::foc_shares_unchecked(t, &prices);
                s.goods.set_column(j, &DVector::from_vec(f.goods));
                s.capital[j] = f.capital;
                s.labor[j] = f.labor;
            }
            s
        }
        EconomyKind::CobbDouglas => a.clone(),
        EconomyKind::Leontief => {
            let c = unit_costs(econ, p, r, w);
            ShareMatrix {
                goods: DMatrix::from_fn(n, n, |i, j| a.goods[(i, j)] * p[i] / c[j]),
                capital: (0..n).map(|j| a.capital[j] * r / c[j]).collect(),
                labor: (0..n).map(|j| a.labor[j] * w / c[j]).collect(),
            }
        }
        EconomyKind::Simple => {
            let capital: Vec<f64> = (0..n).map(|j| econ.capital_weight(j)).collect();
            ShareMatrix {
                goods: DMatrix::zeros(n, n),
                labor: capital.iter().map(|k| 1.0 - k).collect(),
                capital,
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Tolerance on `sup |ln p - ln(C / tau)|`.
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// How many times the damping may be halved on oscillation.
    pub max_halvings: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 10_000,
            damping: 1.0,
            max_halvings: 6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!("bad solver settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumState {
    pub p: Vec<f64>,
    /// Fixed-point defect `sup |ln p - ln(C(p, r, w) / tau)|` at `p`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Damping in effect when the iteration stopped.
    pub damping: f64,
    pub shares: ShareMatrix,
}

impl EquilibriumState {
    /// The state if converged, a `NonConvergence` error otherwise.
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

fn check_inputs(econ: &Economy, tau: &[f64], r: f64, w: f64) -> Result<()> {
    if tau.len() != econ.len() {
        return Err(Error::InvalidArgument(format!(
            "productivity vector has {} entries, economy has {} sectors",
            tau.len(),
            econ.len()
        )));
    }
    let ok = |v: f64| v > 0.0 && v.is_finite();
    if !tau.iter().all(|&t| ok(t)) {
        return Err(Error::InvalidArgument("productivities must be positive".into()));
    }
    if !(ok(r) && ok(w)) {
        return Err(Error::InvalidPrice);
    }
    Ok(())
}

fn defect(c: &[f64], tau: &[f64], p: &[f64]) -> f64 {
    c.iter()
        .zip(tau)
        .zip(p)
        .map(|((c, t), p)| (c.ln() - t.ln() - p.ln()).abs())
        .fold(0.0, f64::max)
}

/// Damped feedback iteration `p <- (1 - omega) p + omega C(p, r, w) / tau`
/// from `p = 1`. The simple kind is solved directly. A state that did not
/// converge is returned with `converged = false` and the best iterate.
pub fn solve_equilibrium(
    econ: &Economy,
    tau: &[f64],
    r: f64,
    w: f64,
    cfg: &SolverConfig,
) -> Result<EquilibriumState> {
    check_inputs(econ, tau, r, w)?;
    cfg.validate()?;
    let n = econ.len();

    if econ.kind == EconomyKind::Simple {
        let c = unit_costs(econ, &vec![1.0; n], r, w);
        let p: Vec<f64> = c.iter().zip(tau).map(|(c, t)| c / t).collect();
        return Ok(EquilibriumState {
            shares: network_shares(econ, &p, r, w),
            p,
            residual: 0.0,
            iterations: 1,
            converged: true,
            damping: cfg.damping,
        });
    }

    let mut p = vec![1.0; n];
    let mut omega = cfg.damping;
    let mut halvings = 0;
    let mut rising = 0;
    let mut prev = f64::INFINITY;
    let mut best = (f64::INFINITY, p.clone());
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        iterations += 1;
        let c = unit_costs(econ, &p, r, w);
        let res = defect(&c, tau, &p);
        if !res.is_finite() {
            break;
        }
        if res < best.0 {
            best = (res, p.clone());
        }
        if res < cfg.tol {
            converged = true;
            break;
        }
        if res > prev {
            rising += 1;
            if rising >= 2 && halvings < cfg.max_halvings {
                omega *= 0.5;
                halvings += 1;
                rising = 0;
                debug!("oscillation detected, damping reduced to {omega}");
            }
        } else {
            rising = 0;
        }
        prev = res;
        for ((pj, cj), tj) in p.iter_mut().zip(&c).zip(tau) {
            *pj = (1.0 - omega) * *pj + omega * cj / tj;
        }
    }

    let (residual, p) = best;
    if !converged {
        warn!("equilibrium iteration stopped after {iterations} iterations, defect {residual:e}");
    }
    Ok(EquilibriumState {
        shares: network_shares(econ, &p, r, w),
        p,
        residual,
        iterations,
        converged,
        damping: omega,
    })
}

/// Spectral radius bound check for `A <tau>^-1`; errors when `<tau> - A`
/// has no nonnegative inverse.
fn check_leontief(a: &DMatrix<f64>, tau: &[f64]) -> Result<()> {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / tau[j]);
    let col = (0..n).map(|j| m.column(j).sum()).fold(0.0, f64::max);
    let row = (0..n).map(|i| m.row(i).sum()).fold(0.0, f64::max);
    if col < 1.0 || row < 1.0 {
        return Ok(());
    }
    // power iteration on M + I (same Perron vector, no periodicity)
    let shifted = &m + DMatrix::<f64>::identity(n, n);
    let mut v = DVector::from_element(n, 1.0 / n as f64);
    let mut rho = 0.0;
    for _ in 0..5000 {
        let nv = &shifted * &v;
        let norm = nv.sum();
        let next = norm - 1.0;
        v = nv / norm;
        if (next - rho).abs() < 1e-13 {
            rho = next;
            break;
        }
        rho = next;
    }
    if rho < 1.0 - 1e-12 {
        Ok(())
    } else {
        Err(Error::Singular(format!(
            "<tau> - A has no nonnegative inverse (spectral radius of A<tau>^-1 ~ {rho:.6})"
        )))
    }
}

/// Closed-form prices of a Cobb-Douglas, Leontief or simple economy at
/// `r = w = 1`.
pub fn closed_form_prices(econ: &Economy, tau: &[f64]) -> Result<Vec<f64>> {
    closed_form_prices_with_factors(econ, tau, 1.0, 1.0)
}

/// Closed forms in row-vector convention:
/// Cobb-Douglas `ln p = (a_K ln r + a_L ln w - ln tau)[I - A]^-1`,
/// Leontief `p = (a_K r + a_L w)[<tau> - A]^-1`.
pub fn closed_form_prices_with_factors(econ: &Economy, tau: &[f64], r: f64, w: f64) -> Result<Vec<f64>> {
    check_inputs(econ, tau, r, w)?;
    let n = econ.len();
    let a = &econ.reference;
    match econ.kind {
        EconomyKind::Cces => Err(Error::InvalidArgument(
            "no closed form for a CCES economy".into(),
        )),
        EconomyKind::Simple => {
            let c = unit_costs(econ, &vec![1.0; n], r, w);
            Ok(c.iter().zip(tau).map(|(c, t)| c / t).collect())
        }
        EconomyKind::CobbDouglas => {
            let b = DVector::from_fn(n, |j, _| a.capital[j] * r.ln() + a.labor[j] * w.ln() - tau[j].ln());
            let m = DMatrix::<f64>::identity(n, n) - &a.goods;
            let lp = m
                .transpose()
                .lu()
                .solve(&b)
                .ok_or_else(|| Error::Singular("I - A".into()))?;
            Ok(lp.iter().map(|v| v.exp()).collect())
        }
        EconomyKind::Leontief => {
            check_leontief(&a.goods, tau)?;
            let v = DVector::from_fn(n, |j, _| a.capital[j] * r + a.labor[j] * w);
            let m = DMatrix::from_diagonal(&DVector::from_column_slice(tau)) - &a.goods;
            let p = m
                .transpose()
                .lu()
                .solve(&v)
                .ok_or_else(|| Error::Singular("<tau> - A".into()))?;
            if p.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Singular("Leontief prices not positive".into()));
            }
            Ok(p.iter().copied().collect())
        }
    }
}

/// Productivities under which the observed prices of each period are an
/// equilibrium: `tau_t = C(p_t, r_t, w_t) / p_t`.
pub fn restoring_productivity(econ: &Economy, table: &LinkedIOTable) -> Result<[Vec<f64>; 2]> {
    if table.len() != econ.len() {
        return Err(Error::InvalidArgument("table and economy sizes differ".into()));
    }
    let tau = |t: usize| {
        let acc = table.period(t);
        unit_costs(econ, &acc.p, acc.r, acc.w)
            .iter()
            .zip(&acc.p)
            .map(|(c, p)| c / p)
            .collect::<Vec<f64>>()
    };
    Ok([tau(0), tau(1)])
}

#[derive(Debug, Clone)]
pub struct PeriodGap {
    pub price_gap: f64,
    pub share_gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct RestorationReport {
    pub periods: [PeriodGap; 2],
}

impl RestorationReport {
    pub fn max_price_gap(&self) -> f64 {
        self.periods[0].price_gap.max(self.periods[1].price_gap)
    }

    pub fn max_share_gap(&self) -> f64 {
        self.periods[0].share_gap.max(self.periods[1].share_gap)
    }

    pub fn converged(&self) -> bool {
        self.periods.iter().all(|p| p.converged)
    }
}

/// Solves both periods at `(tauhat_t, r_t, w_t)` and compares prices and
/// shares with the table.
pub fn verify_restoring(
    econ: &Economy,
    table: &LinkedIOTable,
    tauhat: &[Vec<f64>; 2],
    cfg: &SolverConfig,
) -> Result<RestorationReport> {
    let gap = |t: usize| -> Result<PeriodGap> {
        let acc = table.period(t);
        let st = solve_equilibrium(econ, &tauhat[t], acc.r, acc.w, cfg)?;
        Ok(PeriodGap {
            price_gap: max_abs_vec_diff(&st.p, &acc.p),
            share_gap: st.shares.max_abs_diff(&table.cost_shares(t)),
            converged: st.converged,
            iterations: st.iterations,
            residual: st.residual,
        })
    };
    Ok(RestorationReport {
        periods: [gap(0)?, gap(1)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(kind: EconomyKind) -> Economy {
        let reference = ShareMatrix {
            goods: DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]),
            capital: vec![0.2, 0.25],
            labor: vec![0.3, 0.25],
        };
        Economy::from_reference(kind, reference).unwrap()
    }

    #[test]
    fn cobb_douglas_closed_form_by_hand() {
        let e = two_by_two(EconomyKind::CobbDouglas);
        let p = closed_form_prices(&e, &[2.0, 1.0]).unwrap();
        let l2 = 2f64.ln();
        assert!((p[0].ln() + 4.0 / 3.0 * l2).abs() < 1e-14);
        assert!((p[1].ln() + 2.0 / 3.0 * l2).abs() < 1e-14);
        let st = solve_equilibrium(&e, &[2.0, 1.0], 1.0, 1.0, &SolverConfig::default()).unwrap();
        assert!(st.converged);
        assert!(max_abs_vec_diff(&st.p, &p) < 1e-12);
    }

    #[test]
    fn reference_point_is_fixed() {
        for kind in [EconomyKind::CobbDouglas, EconomyKind::Leontief, EconomyKind::Simple] {
            let e = two_by_two(kind);
            let st = solve_equilibrium(&e, &[1.0, 1.0], 1.0, 1.0, &SolverConfig::default()).unwrap();
            assert_eq!(st.p, vec![1.0, 1.0]);
            assert_eq!(st.iterations, 1);
            if kind != EconomyKind::Simple {
                assert!(st.shares.max_abs_diff(e.reference()) < 1e-15);
            }
            let cf = closed_form_prices(&e, &[1.0, 1.0]).unwrap();
            assert!(max_abs_vec_diff(&cf, &[1.0, 1.0]) < 1e-14);
        }
    }

    #[test]
    fn leontief_matches_closed_form() {
        let e = two_by_two(EconomyKind::Leontief);
        let tau = [1.3, 0.8];
        let st = solve_equilibrium(&e, &tau, 1.2, 0.9, &SolverConfig::default()).unwrap();
        let cf = closed_form_prices_with_factors(&e, &tau, 1.2, 0.9).unwrap();
        assert!(max_abs_vec_diff(&st.p, &cf) < 1e-10);
    }

    #[test]
    fn leontief_rejects_explosive_network() {
        let e = two_by_two(EconomyKind::Leontief);
        assert!(matches!(
            closed_form_prices(&e, &[0.4, 0.4]),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn simple_kind_is_direct() {
        let e = two_by_two(EconomyKind::Simple);
        let st = solve_equilibrium(&e, &[2.0, 0.5], 1.0, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(st.p, vec![0.5, 2.0]);
        assert_eq!(st.shares.capital, vec![0.4, 0.5]);
        assert_eq!(st.shares.goods, DMatrix::zeros(2, 2));
    }

    #[test]
    fn cd_shares_invariant() {
        let e = two_by_two(EconomyKind::CobbDouglas);
        let st = solve_equilibrium(&e, &[3.0, 0.7], 1.0, 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(&st.shares, e.reference());
    }

    #[test]
    fn iteration_cap_flags_nonconvergence() {
        let e = two_by_two(EconomyKind::CobbDouglas);
        let cfg = SolverConfig {
            max_iter: 3,
            ..Default::default()
        };
        let st = solve_equilibrium(&e, &[3.0, 0.7], 1.0, 1.0, &cfg).unwrap();
        assert!(!st.converged);
        assert!(matches!(st.into_converged(), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = two_by_two(EconomyKind::CobbDouglas);
        let cfg = SolverConfig::default();
        assert!(solve_equilibrium(&e, &[1.0], 1.0, 1.0, &cfg).is_err());
        assert!(solve_equilibrium(&e, &[1.0, -1.0], 1.0, 1.0, &cfg).is_err());
        assert!(solve_equilibrium(&e, &[1.0, 1.0], 0.0, 1.0, &cfg).is_err());
        assert!(e.with_kind(EconomyKind::Cces).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("cd".parse::<EconomyKind>().unwrap(), EconomyKind::CobbDouglas);
        assert_eq!("CCES".parse::<EconomyKind>().unwrap(), EconomyKind::Cces);
        assert!("translog".parse::<EconomyKind>().is_err());
    }
}
