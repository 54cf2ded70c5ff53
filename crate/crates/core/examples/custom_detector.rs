//! Any type implementing `Detector` can ride along with the simulation.
//! This one counts pulses delivered to inhibitory cells.

use polycode::network::{Network, NetworkConfig, OutEdge, Simulation};
use polycode::neuron::NeuronState;
use polycode::polycode::Detector;
use polycode::stimulus::{drive, DirectionId, PresentationSchedule, StimulusConfig};

struct InhibitoryPulses {
    first_inhibitory: u32,
    pulses: u64,
}

impl Detector for InhibitoryPulses {
    fn register(&mut self, _: usize, _: u64) {}

    fn settle(&mut self, _: &[NeuronState]) {}

    fn transmit(&mut self, _: usize, edges: &[OutEdge], _: u64, mut deliver: impl FnMut(&OutEdge)) {
        for e in edges {
            deliver(e);
            self.pulses += u64::from(e.post >= self.first_inhibitory);
        }
    }

    fn end_step(&mut self, _: u64) {}
}

fn main() -> polycode::Result<()> {
    let config = NetworkConfig::default();
    let net = Network::build(config)?;
    let mut sim = Simulation::new(&net);
    let mut det = InhibitoryPulses { first_inhibitory: config.n_excitatory as u32, pulses: 0 };
    let schedule = PresentationSchedule::new(DirectionId::default(), 1_000, StimulusConfig::default());
    drive(&mut sim, &mut det, &schedule, |_, _| {})?;
    println!("{} spikes, {} pulses reached inhibitory cells", sim.total_spikes(), det.pulses);
    Ok(())
}
