//! Spiking network simulation with online detection of minimal polychronous
//! patterns ("polycodes").
//!
//! The building blocks are the Izhikevich [`neuron`] model, the recurrent
//! [`network`] and its clocked simulation loop, the [`polycode`] detector and
//! registry, moving-bar [`stimulus`] generation, and the repeat-count
//! [`recognizer`]. The [`experiments`] module wires them into the stability,
//! selectivity, recognition and overhead pipelines.

pub mod config;
pub mod error;
pub mod experiments;
pub mod network;
pub mod neuron;
pub mod plot;
pub mod polycode;
pub mod recognizer;
pub mod stimulus;

pub use error::{Error, Result};
