use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::polycode::CodeWidth;

/// Theoretical number of distinct polycodes, `N * S!`, against the size of
/// the code space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityReport {
    pub n_neurons: u64,
    pub synapses_per_neuron: u64,
    pub theoretical_capacity: BigUint,
    pub bit_space: BigUint,
    pub width: CodeWidth,
}

impl CapacityReport {
    /// True when the code width, not the network, limits capacity.
    pub fn width_limited(&self) -> bool {
        self.theoretical_capacity > self.bit_space
    }
}

pub fn compute_capacity(n_neurons: u64, synapses_per_neuron: u64, width: CodeWidth) -> Result<CapacityReport> {
    if n_neurons == 0 {
        return Err(Error::config("neurons", "must be at least 1"));
    }
    if synapses_per_neuron == 0 {
        return Err(Error::config("synapses", "must be at least 1"));
    }
    let factorial = (2..=synapses_per_neuron).fold(BigUint::from(1u8), |acc, k| acc * k);
    Ok(CapacityReport {
        n_neurons,
        synapses_per_neuron,
        theoretical_capacity: factorial * n_neurons,
        bit_space: BigUint::from(1u8) << width.bits(),
        width,
    })
}
