//! Regular- and fast-spiking cells under constant drive.
//!
//! ```text
//! cargo run --release --example membrane_dynamics
//! ```

use polycode::neuron::{Integrator, NeuronParams, NeuronState};

fn spike_times(params: NeuronParams, current: f64, ms: u64) -> Vec<u64> {
    let mut n = NeuronState::at_rest(params);
    (0..ms)
        .filter(|_| n.step(current, Integrator::default()).expect("bounded input"))
        .collect()
}

fn main() {
    for (name, params) in [("RS", NeuronParams::regular_spiking()), ("FS", NeuronParams::fast_spiking())] {
        for current in [4.0, 10.0, 20.0] {
            let t = spike_times(params, current, 200);
            let isi: Vec<u64> = t.windows(2).map(|w| w[1] - w[0]).collect();
            println!("{name} I={current:>4}: {:>3} spikes in 200 ms, first at {:?}, ISIs {:?}", t.len(), t.first(), &isi[..isi.len().min(6)]);
        }
    }

    let mut n = NeuronState::at_rest(NeuronParams::regular_spiking());
    print!("RS trace at I=10 (v every 5 ms):");
    for t in 0..60 {
        n.step(10.0, Integrator::default()).expect("bounded input");
        if t % 5 == 0 {
            print!(" {:.0}", n.v);
        }
    }
    println!();
}
