//! Dynamic general-equilibrium welfare of alternative productivities.
//!
//! Capital prices are calibrated from the investment identities and the
//! household Euler equation; an alternative productivity then moves
//! equilibrium prices, investment (through the price elasticity of fixed
//! capital formation) and household spending, which are iterated to a
//! budget-consistent state. Benefit and cost are the changes in real
//! household spending and in labor income.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{network_shares, solve_equilibrium, Economy, SolverConfig};
use crate::error::{Error, Result};
use crate::household::{ln_price_index, shares_unchecked, HouseholdModel};
use crate::iotable::LinkedIOTable;

/// Five-year depreciation from a 12.5% annual rate.
pub fn default_delta() -> f64 {
    1.0 - 0.875f64.powi(5)
}

/// Five-year discount factor at 3% a year.
pub fn default_beta() -> f64 {
    1.03f64.powi(-5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapitalCalibration {
    pub z0rho: f64,
    pub z1rho: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub delta: f64,
    pub beta: f64,
    /// Price elasticity of fixed capital formation; `None` when the capital
    /// price does not move between periods.
    pub eta_k: Option<f64>,
}

impl CapitalCalibration {
    /// Net investment volume of the reference transition `K_1 - (1 - delta) K_0`.
    pub fn base_investment(&self) -> f64 {
        self.k1 - (1.0 - self.delta) * self.k0
    }
}

/// Calibration from aggregate quantities:
/// `z0 rho = G_0 / (K_1 - (1 - delta) K_0)`,
/// `z1 rho = (psi_ratio z0 rho / beta - r_1) / (1 - delta)` and
/// `K_2 = G_1 / z1 rho + (1 - delta) K_1`.
#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    g0: f64,
    g1: f64,
    k0: f64,
    k1: f64,
    r1: f64,
    psi_ratio: f64,
    delta: f64,
    beta: f64,
) -> Result<CapitalCalibration> {
    if !(delta > 0.0 && delta < 1.0) || !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} and beta {beta} must lie in (0, 1)"
        )));
    }
    if !(psi_ratio > 0.0 && psi_ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad price-index ratio {psi_ratio}")));
    }
    let inv0 = k1 - (1.0 - delta) * k0;
    if !(inv0 > 0.0) {
        return Err(Error::CalibrationInfeasible(format!(
            "K1 = {k1} does not exceed (1 - delta) K0 = {}",
            (1.0 - delta) * k0
        )));
    }
    if !(g0 > 0.0 && g1 > 0.0) {
        return Err(Error::CalibrationInfeasible(format!(
            "fixed capital formation must be positive (G0 = {g0}, G1 = {g1})"
        )));
    }
    let z0rho = g0 / inv0;
    let z1rho = (psi_ratio * z0rho / beta - r1) / (1.0 - delta);
    if !(z1rho > 0.0) {
        return Err(Error::CalibrationInfeasible(format!(
            "z1 rho = {z1rho:e} from z0 rho = {z0rho:e}, r1 = {r1}, psi ratio = {psi_ratio}, beta = {beta}, delta = {delta}"
        )));
    }
    let k2 = g1 / z1rho + (1.0 - delta) * k1;
    let dz = z1rho - z0rho;
    let eta_k = if dz.abs() <= 1e-12 * z0rho {
        None
    } else {
        let inv1 = k2 - (1.0 - delta) * k1;
        Some((inv1 - inv0) / dz * z0rho / inv0)
    };
    Ok(CapitalCalibration {
        z0rho,
        z1rho,
        k0,
        k1,
        k2,
        delta,
        beta,
        eta_k,
    })
}

/// Reference-period aggregates and the capital stocks `K_t = sum_j rK_jt / r_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseAggregates {
    /// Monetary final demand by good at the reference point.
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub m: Vec<f64>,
    /// Output value by sector.
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub h_total: f64,
    pub g_total: f64,
    pub m_total: f64,
    pub g0_total: f64,
    pub k0: f64,
    pub k1: f64,
    pub l1: f64,
    pub r1: f64,
    pub w1: f64,
}

impl BaseAggregates {
    pub fn from_table(table: &LinkedIOTable) -> Self {
        let a0 = table.period(0);
        let a1 = table.period(1);
        BaseAggregates {
            h: a1.h.clone(),
            g: a1.g.clone(),
            m: a1.m.clone(),
            y: a1.y.clone(),
            p: a1.p.clone(),
            h_total: a1.household_total(),
            g_total: a1.investment_total(),
            m_total: a1.net_export_total(),
            g0_total: a0.investment_total(),
            k0: a0.capital() / a0.r,
            k1: a1.capital() / a1.r,
            l1: a1.labor() / a1.w,
            r1: a1.r,
            w1: a1.w,
        }
    }

    /// Investment composition `kappa_i = p_i g_i / G`.
    pub fn kappa(&self) -> Vec<f64> {
        self.g.iter().map(|g| g / self.g_total).collect()
    }
}

/// Calibration from the table and a household price index.
pub fn calibrate_capital(
    table: &LinkedIOTable,
    household: &HouseholdModel,
    delta: f64,
    beta: f64,
) -> Result<CapitalCalibration> {
    let base = BaseAggregates::from_table(table);
    let psi1 = crate::household::price_index(&table.period(1).p, household)?;
    let psi0 = crate::household::price_index(&table.period(0).p, household)?;
    calibrate(base.g0_total, base.g_total, base.k0, base.k1, base.r1, psi1 / psi0, delta, beta)
}

#[derive(Debug, Clone, Copy)]
pub struct AltConfig {
    pub solver: SolverConfig,
    /// Relative tolerance of the household-spending loop.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AltConfig {
    fn default() -> Self {
        AltConfig {
            solver: SolverConfig::default(),
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// Everything needed to evaluate alternative productivities.
#[derive(Debug, Clone, Copy)]
pub struct WelfareModel<'a> {
    pub economy: &'a Economy,
    pub household: &'a HouseholdModel,
    pub calibration: &'a CapitalCalibration,
    pub base: &'a BaseAggregates,
    pub config: AltConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct AltState {
    pub tau_check: Vec<f64>,
    pub p_check: Vec<f64>,
    pub h_check: f64,
    pub l_check: f64,
    pub g_check: f64,
    pub k2_check: f64,
    pub z1rho_check: f64,
    /// Output value by sector in the alternative equilibrium.
    pub output: Vec<f64>,
    pub benefit: f64,
    pub cost: f64,
    pub iterations: usize,
    /// `H + G + M - r_1 K_1 - w_1 L` at the returned state.
    pub budget_residual: f64,
}

impl WelfareModel<'_> {
    /// Alternative equilibrium under productivity `tau_check` at the
    /// reference factor prices.
    pub fn alternative_equilibrium(&self, tau_check: &[f64]) -> Result<AltState> {
        let base = self.base;
        let cal = self.calibration;
        let n = self.economy.len();
        if base.h.len() != n || self.household.mu.len() != n {
            return Err(Error::InvalidArgument("household and economy sizes differ".into()));
        }
        let (r1, w1) = (base.r1, base.w1);
        let st = solve_equilibrium(self.economy, tau_check, r1, w1, &self.config.solver)?.into_converged()?;
        let p = st.p;

        let ln_psi1 = ln_price_index(&base.p, self.household);
        let ln_psi = ln_price_index(&p, self.household);
        let psi_ratio = (ln_psi - ln_psi1).exp();
        let one_d = 1.0 - cal.delta;
        let z1rho = (psi_ratio * (cal.z1rho * one_d + r1) - r1) / one_d;
        let inv = match cal.eta_k {
            Some(eta) => cal.base_investment() * (1.0 + eta * (z1rho - cal.z0rho) / cal.z0rho),
            None => {
                warn!("capital price elasticity undefined; holding investment volume fixed");
                cal.k2 - one_d * cal.k1
            }
        };
        let k2 = inv + one_d * cal.k1;
        let g_check = z1rho * inv;

        // output per unit of final demand through the alternative network
        let s = network_shares(self.economy, &p, r1, w1);
        let leontief = (DMatrix::<f64>::identity(n, n) - &s.goods)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("I - A at the alternative equilibrium".into()))?;
        let a_l = DVector::from_vec(s.labor.clone());
        let labor_per_final = leontief.transpose() * &a_l;
        let b = shares_unchecked(&p, self.household);
        let kappa = base.kappa();
        let fixed = DVector::from_fn(n, |i, _| kappa[i] * g_check + base.m[i]);
        let b = DVector::from_vec(b);
        let labor_fixed = labor_per_final.dot(&fixed) / w1;
        let labor_per_h = labor_per_final.dot(&b) / w1;

        let resources = r1 * base.k1 - g_check - base.m_total;
        let mut h = base.h_total;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.config.max_iter {
            iterations += 1;
            let l = labor_fixed + labor_per_h * h;
            let next = resources + w1 * l;
            let change = (next - h).abs() / h.abs().max(f64::MIN_POSITIVE);
            h = next;
            if change < self.config.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations,
                residual: (resources + w1 * (labor_fixed + labor_per_h * h) - h).abs(),
            });
        }
        let l = labor_fixed + labor_per_h * h;
        let final_demand = &b * h + &fixed;
        let output = &leontief * &final_demand;
        Ok(AltState {
            tau_check: tau_check.to_vec(),
            budget_residual: h + g_check + base.m_total - r1 * base.k1 - w1 * l,
            benefit: h / psi_ratio - base.h_total,
            cost: w1 * l - w1 * base.l1,
            p_check: p,
            h_check: h,
            l_check: l,
            g_check,
            k2_check: k2,
            z1rho_check: z1rho,
            output: output.iter().copied().collect(),
            iterations,
        })
    }

    /// Standardized trigger `tau_j = 1 + theta / (p_j1 y_j1)` for one sector
    /// or every sector at once.
    pub fn trigger(&self, target: Target, theta: f64) -> Result<Vec<f64>> {
        let y = &self.base.y;
        let n = y.len();
        let bump = |j: usize| 1.0 + theta / y[j];
        match target {
            Target::All => Ok((0..n).map(bump).collect()),
            Target::Sector(j) if j < n => {
                let mut t = vec![1.0; n];
                t[j] = bump(j);
                Ok(t)
            }
            Target::Sector(j) => Err(Error::InvalidArgument(format!("no sector {j}"))),
        }
    }

    /// Social return on productivity: `(Benefit - Cost) / theta`.
    pub fn srop(&self, target: Target, theta: f64) -> Result<f64> {
        if theta == 0.0 {
            return Ok(0.0);
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
        }
        let alt = self.alternative_equilibrium(&self.trigger(target, theta)?)?;
        Ok((alt.benefit - alt.cost) / theta)
    }

    /// SROP of every sector, evaluated in parallel.
    pub fn srop_all_sectors(&self, theta: f64) -> Result<Vec<f64>> {
        (0..self.economy.len())
            .into_par_iter()
            .map(|j| self.srop(Target::Sector(j), theta))
            .collect()
    }
}

impl WelfareModel<'_> {
    /// Benefit, cost and SROP for each target, evaluated in parallel.
    pub fn srop_report(&self, targets: &[Target], theta: f64) -> Result<Vec<SropEntry>> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
        }
        targets
            .par_iter()
            .map(|&target| {
                let alt = self.alternative_equilibrium(&self.trigger(target, theta)?)?;
                Ok(SropEntry {
                    target,
                    theta,
                    benefit: alt.benefit,
                    cost: alt.cost,
                    srop: (alt.benefit - alt.cost) / theta,
                    iterations: alt.iterations,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SropEntry {
    pub target: Target,
    pub theta: f64,
    pub benefit: f64,
    pub cost: f64,
    pub srop: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Sector(usize),
    All,
}

/// `-ln E(exp(sum_j ln tau(j))) + sum_j ln E(tau(j))`, per commodity.
pub fn synergy(econ: &Economy, triggers: &[Vec<f64>], r: f64, w: f64, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = econ.len();
    if triggers.is_empty() {
        return Err(Error::InvalidArgument("no triggers".into()));
    }
    let ln_e = |tau: &[f64]| -> Result<Vec<f64>> {
        let st = solve_equilibrium(econ, tau, r, w, cfg)?.into_converged()?;
        Ok(st.p.iter().map(|v| v.ln()).collect())
    };
    let parts: Vec<Vec<f64>> = triggers.par_iter().map(|t| ln_e(t)).collect::<Result<_>>()?;
    let mut ln_all = vec![0.0; n];
    for t in triggers {
        if t.len() != n {
            return Err(Error::InvalidArgument("trigger length differs from economy".into()));
        }
        for (a, v) in ln_all.iter_mut().zip(t) {
            *a += v.ln();
        }
    }
    let all: Vec<f64> = ln_all.iter().map(|v| v.exp()).collect();
    let joint = ln_e(&all)?;
    Ok((0..n)
        .map(|i| -joint[i] + parts.iter().map(|p| p[i]).sum::<f64>())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants() {
        assert!((default_delta() - (1.0 - 0.875f64.powi(5))).abs() < 1e-16);
        assert!((default_beta() - 1.0 / 1.03f64.powi(5)).abs() < 1e-16);
    }

    #[test]
    fn steady_state_elasticity_undefined() {
        let (delta, beta, r1) = (default_delta(), default_beta(), 1.0);
        let zrho = r1 * beta / (1.0 - beta * (1.0 - delta));
        let (k0, k1) = (10.0, 10.0);
        let g0 = zrho * (k1 - (1.0 - delta) * k0);
        let c = calibrate(g0, g0, k0, k1, r1, 1.0, delta, beta).unwrap();
        assert!((c.z1rho - c.z0rho).abs() < 1e-12 * c.z0rho);
        assert_eq!(c.eta_k, None);
        assert!((c.k2 - k1).abs() < 1e-10);
    }

    #[test]
    fn infeasible_calibrations() {
        let (d, b) = (default_delta(), default_beta());
        assert!(matches!(
            calibrate(1.0, 1.0, 10.0, 1.0, 1.0, 1.0, d, b),
            Err(Error::CalibrationInfeasible(_))
        ));
        // very low capital price relative to r makes z1 rho negative
        assert!(matches!(
            calibrate(0.01, 1.0, 10.0, 10.0, 1.0, 1.0, d, b),
            Err(Error::CalibrationInfeasible(_))
        ));
        assert!(calibrate(1.0, 1.0, 10.0, 10.0, 1.0, 1.0, 1.5, b).is_err());
    }

    #[test]
    fn elasticity_formula() {
        let (d, b) = (0.4, 0.85);
        let c = calibrate(2.0, 2.5, 10.0, 9.0, 0.3, 1.05, d, b).unwrap();
        let inv0 = 9.0 - 0.6 * 10.0;
        let inv1 = c.k2 - 0.6 * 9.0;
        let expected = (inv1 - inv0) / (c.z1rho - c.z0rho) * c.z0rho / inv0;
        assert!((c.eta_k.unwrap() - expected).abs() < 1e-12);
        assert!((c.z1rho * (c.k2 - 0.6 * 9.0) - 2.5).abs() < 1e-12);
    }
}
