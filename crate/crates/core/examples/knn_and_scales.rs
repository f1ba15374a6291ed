//! Nearest neighbors, calibrated bandwidths and fuzzy memberships.

use riemstat::local_metric::{compute_local_scales, fuzzy_memberships};
use riemstat::neighbors::exact_knn;

fn main() -> riemstat::Result<()> {
    let table = riemstat::students();
    let labels = table.row_labels();
    let nbrs = exact_knn(&table, 3)?;
    let scales = compute_local_scales(&nbrs);
    for (i, list) in nbrs.iter().enumerate() {
        let names: Vec<String> = list
            .iter()
            .map(|nb| format!("{} ({:.3})", labels[nb.index], nb.distance))
            .collect();
        println!(
            "{:<8} rho={:.3} sigma={:.4}  {}",
            labels[i],
            scales.rho[i],
            scales.sigma[i],
            names.join(", ")
        );
    }

    let graph = fuzzy_memberships(&nbrs, &scales);
    println!("\n{} symmetric edges", graph.edges().len());
    for e in graph.edges() {
        println!("  {:<8} - {:<8} mu={:.4} length={:.4}", labels[e.i], labels[e.j], e.mu, e.ell);
    }
    Ok(())
}
