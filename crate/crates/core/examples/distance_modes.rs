//! Geodesic and minimax distances over the fuzzy graph, next to Euclidean.

use riemstat::local_metric::{compute_local_scales, fuzzy_memberships, umap_distance_matrix, DistanceMatrix};
use riemstat::neighbors::exact_knn;
use riemstat::{DisconnectPolicy, MetricMode};

fn main() -> riemstat::Result<()> {
    let table = riemstat::students();
    let nbrs = exact_knn(&table, 3)?;
    let graph = fuzzy_memberships(&nbrs, &compute_local_scales(&nbrs));
    println!("components before bridging: {}", graph.components().len());

    let policy = DisconnectPolicy::EuclideanBridge;
    let geo = umap_distance_matrix(&graph, MetricMode::Geodesic, policy, &table)?;
    let mm = umap_distance_matrix(&graph, MetricMode::Minimax, policy, &table)?;
    let eu = DistanceMatrix::euclidean(&table);

    let labels = table.row_labels();
    println!("{:<18} {:>10} {:>10} {:>10}", "pair", "euclidean", "geodesic", "minimax");
    for i in 0..table.n_rows() {
        for j in i + 1..table.n_rows() {
            println!(
                "{:<18} {:>10.4} {:>10.4} {:>10.4}",
                format!("{}-{}", labels[i], labels[j]),
                eu.get(i, j),
                geo.get(i, j),
                mm.get(i, j)
            );
        }
    }

    if let Err(e) = umap_distance_matrix(&graph, MetricMode::Geodesic, DisconnectPolicy::Fail, &table) {
        println!("\nwith --disconnect fail: {e}");
    }
    Ok(())
}
