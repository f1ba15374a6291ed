//! Classical statistics are the special case of unit factors around the
//! arithmetic mean.

use riemstat::stats::{covariance_with, pearson_correlation_matrix, Center};

fn main() -> riemstat::Result<()> {
    let table = riemstat::students();
    let n = table.n_rows();
    let cov = covariance_with(&table, Center::ArithmeticMean, vec![1.0; n])?;
    let r = cov.correlation_matrix()?;
    let pearson = pearson_correlation_matrix(&table, &[])?;

    let mut worst = 0.0f64;
    for (a, b) in r.iter().flatten().zip(pearson.iter().flatten()) {
        worst = worst.max((a - b).abs());
    }
    println!("{:<10} {}", "", table.col_labels().join("  "));
    for (label, row) in table.col_labels().iter().zip(&r) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>6.3}")).collect();
        println!("{label:<10} {}", cells.join(" "));
    }
    println!("max |R - Pearson| = {worst:e}");
    Ok(())
}
