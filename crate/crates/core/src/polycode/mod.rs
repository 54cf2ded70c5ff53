//! Minimal polychronous patterns ("polycodes").
//!
//! Every neuron owns a fixed random tag and a mutable code that starts out
//! equal to the tag. When a neuron spikes, its tag travels with the pulse to
//! each post-synaptic neuron, where it is XORed into the code and the code is
//! rotated left by one bit. Because of the rotation the final code depends on
//! the exact order of the pre-synaptic spikes.
//!
//! When the post-synaptic neuron itself spikes, its code (if it differs from
//! the tag) is looked up in the registry and the code goes back to the tag.
//! A non-spiking neuron whose membrane sits below 0 mV also has its code
//! wiped. As a consequence only tags that arrive while the post-synaptic
//! membrane stays at or above 0 mV, i.e. during the final run-up to a spike,
//! end up in a registered code; in practice this is mostly the spike step
//! itself.

mod capacity;
mod code;
mod detector;
mod registry;

pub use capacity::{compute_capacity, CapacityReport};
pub use code::{apply_tag, CodeWidth, TagSet};
pub use detector::{
    Detector, DetectorConfig, Mode, NoDetector, PolycodeDetector, Registration, RegistrationCounts,
};
pub use registry::{CodeHasher, CodeMap, PolycodeRegistry, RegistryCell, REGISTRY_MAGIC};
