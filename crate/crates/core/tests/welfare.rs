use cascade_ge::dynge::{
    calibrate_capital, default_beta, default_delta, synergy, AltConfig, BaseAggregates, Target, WelfareModel,
};
use cascade_ge::equilibrium::{closed_form_prices, Economy, EconomyKind, SolverConfig};
use cascade_ge::household::HouseholdModel;
use cascade_ge::synthetic::{generate, SyntheticConfig};

struct Fixture {
    econ: Economy,
    household: HouseholdModel,
    calib: cascade_ge::dynge::CapitalCalibration,
    base: BaseAggregates,
}

fn fixture(seed: u64) -> Fixture {
    let syn = generate(&SyntheticConfig::new(8), seed).unwrap();
    let econ = Economy::estimate(&syn.table, &syn.order).unwrap();
    let base = BaseAggregates::from_table(&syn.table);
    let household = HouseholdModel::from_reference_shares(&base.h, 1.1).unwrap();
    let calib = calibrate_capital(&syn.table, &household, default_delta(), default_beta()).unwrap();
    Fixture {
        econ,
        household,
        calib,
        base,
    }
}

impl Fixture {
    fn model(&self) -> WelfareModel<'_> {
        WelfareModel {
            economy: &self.econ,
            household: &self.household,
            calibration: &self.calib,
            base: &self.base,
            config: AltConfig::default(),
        }
    }
}

#[test]
fn no_change_identity() {
    let f = fixture(1);
    let m = f.model();
    let alt = m.alternative_equilibrium(&[1.0; 8]).unwrap();
    let h1 = f.base.h_total;
    assert!(alt.p_check.iter().all(|&p| (p - 1.0).abs() < 1e-10));
    assert!((alt.h_check - h1).abs() < 1e-10 * h1);
    assert!((alt.l_check - f.base.l1).abs() < 1e-10 * f.base.l1);
    assert!((alt.g_check - f.base.g_total).abs() < 1e-10 * h1);
    assert!((alt.k2_check - f.calib.k2).abs() < 1e-10 * f.calib.k2);
    assert!(alt.benefit.abs() < 1e-10 * h1 && alt.cost.abs() < 1e-10 * h1);
    for (y, y1) in alt.output.iter().zip(&f.base.y) {
        assert!((y - y1).abs() < 1e-10 * y1);
    }
}

#[test]
fn budget_closes_under_perturbation() {
    let f = fixture(2);
    let m = f.model();
    let mut tau = vec![1.0; 8];
    tau[2] = 1.01;
    let alt = m.alternative_equilibrium(&tau).unwrap();
    assert!(alt.budget_residual.abs() < 1e-8 * f.base.h_total);
    assert!(alt.p_check[2] < 1.0);
    assert!(alt.benefit > 0.0);
}

#[test]
fn srop_difference_quotient_stabilizes() {
    let f = fixture(3);
    let m = f.model();
    let ymin = f.base.y.iter().copied().fold(f64::INFINITY, f64::min);
    for target in [Target::Sector(0), Target::Sector(5), Target::All] {
        let mut prev: Option<f64> = None;
        for k in 0..7 {
            let theta = ymin * 1e-4 / 2f64.powi(k);
            let s = m.srop(target, theta).unwrap();
            assert!(s.is_finite());
            if let Some(p) = prev {
                assert!((s - p).abs() < 0.01 * p.abs().max(1e-3), "{target:?} {theta}: {s} vs {p}");
            }
            prev = Some(s);
        }
    }
    assert_eq!(m.srop(Target::Sector(0), 0.0).unwrap(), 0.0);
    assert_eq!(m.srop_all_sectors(1e-3).unwrap().len(), 8);
}

#[test]
fn cobb_douglas_alternative_matches_closed_form() {
    let f = fixture(4);
    let cd = f.econ.with_kind(EconomyKind::CobbDouglas).unwrap();
    let m = WelfareModel {
        economy: &cd,
        ..f.model()
    };
    let mut tau = vec![1.0; 8];
    tau[4] = 1.0 + 1e-3;
    let alt = m.alternative_equilibrium(&tau).unwrap();
    let cf = closed_form_prices(&cd, &tau).unwrap();
    for (a, b) in alt.p_check.iter().zip(&cf) {
        assert!((a - b).abs() < 1e-10);
    }
}

fn triggers(base: &BaseAggregates, theta: f64) -> Vec<Vec<f64>> {
    let n = base.y.len();
    (0..n)
        .map(|j| {
            let mut t = vec![1.0; n];
            t[j] = 1.0 + theta / base.y[j];
            t
        })
        .collect()
}

#[test]
fn cobb_douglas_has_no_synergy() {
    for seed in 0..5 {
        let f = fixture(seed);
        let cd = f.econ.with_kind(EconomyKind::CobbDouglas).unwrap();
        let s = synergy(&cd, &triggers(&f.base, 0.1), 1.0, 1.0, &SolverConfig::default()).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-10), "{s:?}");
    }
}

#[test]
fn single_trigger_has_no_synergy() {
    let f = fixture(6);
    let mut t = vec![1.0; 8];
    t[3] = 1.05;
    let s = synergy(&f.econ, &[t], 1.0, 1.0, &SolverConfig::default()).unwrap();
    assert!(s.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn leontief_synergy_is_not_positive() {
    let f = fixture(7);
    let lt = f.econ.with_kind(EconomyKind::Leontief).unwrap();
    let s = synergy(&lt, &triggers(&f.base, 0.5), 1.0, 1.0, &SolverConfig::default()).unwrap();
    assert!(s.iter().all(|&v| v <= 1e-12), "{s:?}");
    assert!(s.iter().any(|&v| v < -1e-9));
}
