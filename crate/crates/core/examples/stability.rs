//! Novel and repeating registrations per second while each direction is
//! shown for a few seconds.

use polycode::experiments::{run_stability, ExperimentConfig};

fn main() -> polycode::Result<()> {
    let mut config = ExperimentConfig::default();
    config.experiment.direction_ms = 4_000;
    config.experiment.trials = 2;
    let s = run_stability(&config, 2)?;
    for p in &s.points {
        println!("{}s: novel {:7.1}  repeating {:7.1}", p.second, p.novel_mean, p.repeating_mean);
    }
    println!("crossover at {:?}", s.crossover_second());
    Ok(())
}
