//! Recovers a CCES technology from two observations, then checks the
//! Sato-Vartia index against the change in unit cost.

use cascade_ge::cces::{cces_unit_cost, estimate_two_point, foc_shares, sato_vartia_index, tfpg_cces, tfpg_translog};
use cascade_ge::cces::{CcesTechnology, Factor, Nest, Prices, SectorObservation, TwoPeriodSectorData};

fn observe(tech: &CcesTechnology, p: &[f64], r: f64, w: f64, tau: f64) -> SectorObservation {
    let prices = Prices::new(p, r, w);
    let s = foc_shares(tech, &prices).unwrap();
    let q = cces_unit_cost(&prices, tech, tau).unwrap().0;
    SectorObservation {
        goods_shares: s.goods,
        capital_share: s.capital,
        prices: p.to_vec(),
        r,
        w,
        q,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tech = CcesTechnology::new(vec![
        Nest::new(Factor::Capital, 0.45, 0.3),
        Nest::new(Factor::Good(0), 0.2, -0.8),
        Nest::new(Factor::Good(1), 0.35, 0.6),
    ])?;
    let tau0 = 0.93;
    let data = TwoPeriodSectorData::new(
        observe(&tech, &[1.3, 0.8], 0.9, 1.2, tau0),
        observe(&tech, &[1.0, 1.0], 1.0, 1.0, 1.0),
    );
    let est = estimate_two_point(&data, &[0, 1])?;
    for (a, b) in tech.nests().iter().zip(est.nests()) {
        println!("{:?}: alpha {:.6} -> {:.6}, gamma {:+.6} -> {:+.6}", a.factor, a.alpha, b.alpha, a.gamma, b.gamma);
    }
    let sv = sato_vartia_index(&data, &[0, 1])?;
    println!("cascaded input price index {:+.10}", sv.total);
    println!("tfpg: cascaded {:+.10}, translog {:+.10}, true {:+.10}", tfpg_cces(&data, &[0, 1])?, tfpg_translog(&data)?, (1.0 / tau0).ln());
    Ok(())
}
