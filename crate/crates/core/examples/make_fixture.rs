//! Writes a synthetic two-period linked table generated by known CCES
//! technologies.
//!
//! cargo run --example make_fixture -- [sectors] [seed] [path]

use cascade_ge::iotable::save_table;
use cascade_ge::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(8), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(8), |s| s.parse())?;
    let path = args.next().unwrap_or_else(|| format!("fixture{n}.csv"));

    let syn = generate(&SyntheticConfig::new(n), seed)?;
    save_table(&syn.table, &path, Some(&format!("# synthetic cces economy sectors={n} seed={seed}")))?;
    println!("wrote {path}");
    for (j, t) in syn.tau[0].iter().enumerate() {
        println!("{}  tau0 = {t:.6}", syn.table.sectors()[j]);
    }
    Ok(())
}
