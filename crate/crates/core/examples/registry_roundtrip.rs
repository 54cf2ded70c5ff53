//! Fills a registry from a short presentation, then writes and reloads it
//! in both file formats.

use polycode::network::Simulation;
use polycode::polycode::{Mode, PolycodeRegistry};
use polycode::experiments::ExperimentConfig;
use polycode::stimulus::{run_presentation, DirectionId, PresentationSchedule};

fn main() -> polycode::Result<()> {
    let config = ExperimentConfig::default();
    let net = config.build_network()?;
    let mut det = config.detector_for(&net)?;
    let dir = DirectionId::new(6).expect("valid index");
    det.set_mode(Mode::Train(dir));
    let mut sim = Simulation::new(&net);
    run_presentation(&mut sim, &mut det, &PresentationSchedule::new(dir, 2_000, config.stimulus))?;
    let width = det.width();
    let registry = det.into_registry();

    let mut bin = Vec::new();
    registry.write_binary(width, &mut bin)?;
    let (w, from_bin) = PolycodeRegistry::read_binary(bin.as_slice())?;
    let mut csv = Vec::new();
    registry.write_csv(width, &mut csv)?;
    let from_csv = PolycodeRegistry::read_csv(width, csv.as_slice())?;

    println!("{} codes, {} bytes binary, {} bytes csv", registry.len(), bin.len(), csv.len());
    println!("binary intact: {}, csv intact: {}", w == width && from_bin == registry, from_csv == registry);
    for (code, cell) in registry.sorted().iter().rev().take(3) {
        println!("  {code:016x} {} x{}", cell.label, cell.repeats);
    }
    Ok(())
}
