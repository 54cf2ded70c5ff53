//! How many directions activate each registered code.

use polycode::experiments::{run_selectivity, ExperimentConfig};

fn main() -> polycode::Result<()> {
    let mut config = ExperimentConfig::default();
    config.experiment.direction_ms = 3_000;
    let h = run_selectivity(&config)?;
    let total = h.total().max(1) as f64;
    for k in 1..=8 {
        let n = h.count(k);
        println!("{k} direction(s): {n:>6} {}", "*".repeat((60.0 * n as f64 / total).round() as usize));
    }
    println!("opposite-direction pairs among k = 2: {}", h.opposite_pairs);
    Ok(())
}
