//! Detecting a loop in a point cloud from the Čech complex.

use riemstat::topology::{betti_sweep, nerve_consistency_check};

fn main() -> riemstat::Result<()> {
    let ring: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 20.0;
            vec![t.cos(), t.sin()]
        })
        .collect();

    println!("{:>7} {:>5} {:>6} {:>9} {:>3} {:>3}", "eps", "verts", "edges", "triangles", "b0", "b1");
    for s in betti_sweep(&ring, 0.05, 1.1, 22)? {
        println!(
            "{:>7.3} {:>5} {:>6} {:>9} {:>3} {:>3}",
            s.epsilon, s.vertices, s.edges, s.triangles, s.b0, s.b1
        );
    }

    let report = nerve_consistency_check(&ring, 0.2, 10_000, 1)?;
    println!(
        "\nball union: {} component(s), complex: {} component(s), {} mismatches in {} samples",
        report.ball_union_components, report.complex_components, report.mismatches, report.samples
    );
    Ok(())
}
