//! Kernel fit, spectral initialization and cross-entropy optimization.

use riemstat::embedding::{cross_entropy, fit_curve, optimize_layout, spectral_init};
use riemstat::pipeline::local_structure;
use riemstat::PipelineConfig;

fn main() -> riemstat::Result<()> {
    let table = riemstat::students();
    let config = PipelineConfig::default();
    let local = local_structure(&table, &config)?;

    let curve = fit_curve(config.min_dist, config.spread);
    println!("kernel 1/(1 + a d^2b): a = {:.4}, b = {:.4}", curve.a, curve.b);

    let init = spectral_init(&local.connected, 2, config.seed);
    println!("initial cross-entropy: {:.4}", cross_entropy(&local.connected, &init, curve));
    for epochs in [10, 50, 200, 500] {
        let emb = optimize_layout(&init, &local.connected, curve, epochs, config.seed)?;
        println!("after {epochs:>3} epochs:    {:.4}", cross_entropy(&local.connected, &emb, curve));
    }

    let emb = optimize_layout(&init, &local.connected, curve, config.n_epochs, config.seed)?;
    for (label, i) in table.row_labels().iter().zip(0..) {
        let p = emb.point(i);
        println!("{label:<8} {:>9.3} {:>9.3}", p[0], p[1]);
    }
    Ok(())
}
