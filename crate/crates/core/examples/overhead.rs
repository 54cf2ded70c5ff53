//! Wall-clock cost of detection, from paired runs with and without it.
//! Absolute numbers depend on the machine; build with `--release`.

use polycode::experiments::{run_benchmark, ExperimentConfig};

fn main() -> polycode::Result<()> {
    let config = ExperimentConfig::default();
    let r = run_benchmark(&config, 10_000, 15)?;
    println!(
        "plain {:.1} ms, detection adds {:.2} ms ({:.1}%) for {} registrations",
        r.median_base_s() * 1e3,
        r.median_overhead_s() * 1e3,
        r.overhead_fraction() * 100.0,
        r.registrations
    );
    if let Some(w) = r.warning {
        println!("warning: {w}");
    }
    Ok(())
}
