//! Upstream-to-downstream ordering of sectors by indegree/outdegree ratio.

use cascade_ge::cascade::{cascading_order, ccdf_curve, empirical_ccdf, IncidenceMatrix};
use cascade_ge::synthetic::{generate, SyntheticConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a shuffled triangular network is put back in order
    let n = 6;
    let shuffle = [3, 0, 5, 1, 4, 2];
    let order = cascading_order(&IncidenceMatrix::triangular(n).permuted(&shuffle));
    println!("shuffled triangular: perm {:?}, violations {}", order.perm, order.violations);

    let syn = generate(&SyntheticConfig::new(12), 3)?;
    let order = cascading_order(&IncidenceMatrix::from_table(&syn.table, 1));
    println!("\nrank  sector  ratio   ranking");
    for (k, &s) in order.perm.iter().enumerate() {
        println!("{:>4}  {:>6}  {:.3}  {:.3}", k + 1, syn.table.sectors()[s], order.ratios[s], order.ranking[k]);
    }
    println!("flows against the order: {}", order.violations);

    let tri = ccdf_curve(order.len());
    for (obs, t) in empirical_ccdf(&order).iter().zip(&tri).take(4) {
        println!("log ratio {:+.3}  log ccdf {:+.3}  triangular {:+.3}", obs.log_ratio(), obs.log_ranking(), t.log_ratio());
    }
    Ok(())
}
