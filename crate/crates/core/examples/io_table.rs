//! Loads a linked table, checks its balances and prints period cost shares.
//!
//! cargo run --example io_table -- [table.csv]

use cascade_ge::iotable::{load_table, TableSchema};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/fixture8.csv").into());
    let table = load_table(&path, &TableSchema::default())?;
    let [t0, t1] = table.period_labels();
    println!("{} sectors, periods {t0} and {t1}", table.len());

    let report = table.validate_balances(1e-8);
    println!("balanced: {} (max relative gap {:.2e})", report.is_balanced(), report.max_relative());

    for t in 0..2 {
        let s = table.cost_shares(t);
        println!("period {t}: sector  goods  capital  labor");
        for (j, id) in table.sectors().iter().enumerate() {
            println!("  {id:>6}  {:.4}  {:.4}  {:.4}", s.column_sum(j) - s.capital[j] - s.labor[j], s.capital[j], s.labor[j]);
        }
    }
    Ok(())
}
