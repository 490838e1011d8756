//! Social return on productivity improvement per sector in a calibrated
//! dynamic economy.

use cascade_ge::dynge::{calibrate_capital, default_beta, default_delta, AltConfig, BaseAggregates, Target, WelfareModel};
use cascade_ge::equilibrium::Economy;
use cascade_ge::household::HouseholdModel;
use cascade_ge::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let syn = generate(&SyntheticConfig::new(8), 8)?;
    let econ = Economy::estimate(&syn.table, &syn.order)?;
    let base = BaseAggregates::from_table(&syn.table);
    let household = HouseholdModel::from_reference_shares(&base.h, 1.1)?;
    let calibration = calibrate_capital(&syn.table, &household, default_delta(), default_beta())?;
    let model = WelfareModel {
        economy: &econ,
        household: &household,
        calibration: &calibration,
        base: &base,
        config: AltConfig::default(),
    };

    println!("eta_K {:?}, z0 rho {:.4}, z1 rho {:.4}", calibration.eta_k, calibration.z0rho, calibration.z1rho);
    let mut targets: Vec<Target> = (0..econ.len()).map(Target::Sector).collect();
    targets.push(Target::All);
    println!("target   benefit     cost        srop");
    for e in model.srop_report(&targets, 0.01)? {
        let name = match e.target {
            Target::Sector(j) => syn.table.sectors()[j].clone(),
            Target::All => "ALL".into(),
        };
        println!("{name:>6}  {:+.4e}  {:+.4e}  {:.4}", e.benefit, e.cost, e.srop);
    }
    Ok(())
}
