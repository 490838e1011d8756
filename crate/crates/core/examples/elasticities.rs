//! Allen-Uzawa and Morishima elasticities of substitution of a CCES
//! technology.

use cascade_ge::cces::{CcesTechnology, Factor, Nest, Prices};
use cascade_ge::elasticity::elasticity_tables;

fn label(f: Factor) -> String {
    match f {
        Factor::Labor => "L".into(),
        Factor::Capital => "K".into(),
        Factor::Good(i) => format!("g{i}"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tech = CcesTechnology::new(vec![
        Nest::new(Factor::Capital, 0.4, 0.5),
        Nest::new(Factor::Good(0), 0.3, -0.7),
        Nest::new(Factor::Good(1), 0.25, 0.2),
    ])?;
    let tab = elasticity_tables(&tech, &Prices::new(&[1.0, 1.0], 1.0, 1.0))?;
    for (name, m) in [("AUES", &tab.aues), ("MES", &tab.mes)] {
        println!("{name}");
        print!("     ");
        for &f in &tab.factors {
            print!("{:>9}", label(f));
        }
        println!();
        for (a, &f) in tab.factors.iter().enumerate() {
            print!("{:>5}", label(f));
            for b in 0..tab.factors.len() {
                print!("{:>9.4}", m[(a, b)]);
            }
            println!();
        }
    }
    println!("1 - gamma per nest: {:?}", tech.nests().iter().map(|n| 1.0 - n.gamma).collect::<Vec<_>>());
    Ok(())
}
