//! Solves the price equilibrium of an estimated economy and compares its
//! Cobb-Douglas and Leontief versions with their closed forms.

use cascade_ge::equilibrium::{closed_form_prices, restoring_productivity, solve_equilibrium, verify_restoring};
use cascade_ge::equilibrium::{Economy, EconomyKind, SolverConfig};
use cascade_ge::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let syn = generate(&SyntheticConfig::new(8), 11)?;
    let econ = Economy::estimate(&syn.table, &syn.order)?;
    let cfg = SolverConfig::default();

    let tau = restoring_productivity(&econ, &syn.table)?;
    for (j, (est, truth)) in tau[0].iter().zip(&syn.tau[0]).enumerate() {
        println!("sector {j}: restored tau0 {est:.8}, generating tau0 {truth:.8}");
    }
    let rep = verify_restoring(&econ, &syn.table, &tau, &cfg)?;
    println!("re-solved: price gap {:.2e}, share gap {:.2e}", rep.max_price_gap(), rep.max_share_gap());

    let shock: Vec<f64> = (0..econ.len()).map(|j| 1.0 + 0.02 * j as f64).collect();
    for kind in [EconomyKind::CobbDouglas, EconomyKind::Leontief] {
        let e = econ.with_kind(kind)?;
        let st = solve_equilibrium(&e, &shock, 1.0, 1.0, &cfg)?.into_converged()?;
        let cf = closed_form_prices(&e, &shock)?;
        let gap = st.p.iter().zip(&cf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{}: {} iterations, gap to closed form {gap:.2e}", kind.label(), st.iterations);
    }
    Ok(())
}
