//! Full pipeline on the bundled student grades, Riemannian vs Pearson circle.
//!
//! `cargo run --example students_circle [out.svg]`

use riemstat::stats::pearson_circle;
use riemstat::svg::render_circles;
use riemstat::{run_pipeline, PipelineConfig};

fn main() -> riemstat::Result<()> {
    let table = riemstat::students();
    let out = run_pipeline(&table, &PipelineConfig::default())?;
    let pearson = pearson_circle(&out.table, &out.layout.embedding)?;

    println!("Fréchet mean: {}", table.row_labels()[out.mean.index]);
    println!("{:<10} {:>9} {:>9} {:>9} {:>9}", "variable", "pearson", "", "riemann", "");
    for (p, r) in pearson.variables.iter().zip(&out.circle.variables) {
        println!(
            "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4}{}",
            r.label,
            p.x,
            p.y,
            r.x,
            r.y,
            if p.norm > 1.0 { "  (pearson arrow leaves the disk)" } else { "" }
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        let svg = render_circles(&[("Pearson", &pearson), ("Riemannian", &out.circle)]);
        std::fs::write(&path, svg)?;
        println!("wrote {path}");
    }
    Ok(())
}
