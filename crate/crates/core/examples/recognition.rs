//! Trains a registry on all eight directions, then classifies one bar cycle
//! of each.

use polycode::experiments::{classify_with, train, ExperimentConfig, Labels};

fn main() -> polycode::Result<()> {
    let mut config = ExperimentConfig::default();
    config.experiment.direction_ms = 5_000;
    let net = config.build_network()?;
    let trained = train(&config, &net, Labels::True)?;
    println!("{} codes registered", trained.registry.len());

    let report = classify_with(&config, &net, &trained.registry)?;
    for (i, row) in report.rows.iter().enumerate() {
        let scores: Vec<String> = row.scores.0.iter().map(|s| format!("{s:7.1}")).collect();
        println!("shown {:>3}°: {} -> {}", i * 45, scores.join(""), row.predicted);
    }
    println!("{}/8 correct", report.correct());
    Ok(())
}
