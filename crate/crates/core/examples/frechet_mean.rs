//! Fréchet mean, subtraction factors and the Riemannian covariance.

use riemstat::pipeline::local_structure;
use riemstat::stats::{covariance, frechet_mean, frechet_objectives};
use riemstat::PipelineConfig;

fn main() -> riemstat::Result<()> {
    let table = riemstat::students();
    let local = local_structure(&table, &PipelineConfig::default())?;
    let labels = table.row_labels();

    let objectives = frechet_objectives(&local.distances);
    let mean = frechet_mean(&table, &local.distances)?;
    let cov = covariance(&table, &mean, &local.distances)?;
    for i in 0..table.n_rows() {
        let marker = if i == mean.index { " <- mean" } else { "" };
        println!(
            "{:<8} sum d^2 = {:>10.4}  rho = {:.3e}{marker}",
            labels[i], objectives[i], cov.rho[i]
        );
    }

    println!("\nS:");
    for row in &cov.s {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>9.5}")).collect();
        println!("  {}", cells.join(" "));
    }
    println!("R:");
    for row in cov.correlation_matrix()? {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>7.3}")).collect();
        println!("  {}", cells.join(" "));
    }
    println!("smallest eigenvalue of S: {:.3e}", cov.min_eigenvalue());
    Ok(())
}
