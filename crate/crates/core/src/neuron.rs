//! Izhikevich simple-model membrane dynamics.
//!
//! ```text
//! v' = 0.04 v^2 + 5 v + 140 - u + I
//! u' = a (b v - u)
//! if v > 30 mV: v <- c, u <- u + d
//! ```
//!
//! One call to [`NeuronState::step`] advances a neuron by one simulation
//! timestep (1 ms). Inside the step, `v` and `u` are integrated together with
//! forward Euler over [`Integrator::substeps`] equal substeps (two 0.5 ms
//! half-steps by default). The threshold is checked once, after the full step.

use serde::{Deserialize, Serialize};

/// Spike peak / detection threshold in mV.
pub const SPIKE_THRESHOLD_MV: f64 = 30.0;

/// Resting potential used to initialize every neuron.
pub const REST_MV: f64 = -65.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    /// Recovery time scale (1/ms).
    pub a: f64,
    /// Recovery sensitivity to sub-threshold membrane potential.
    pub b: f64,
    /// Post-spike reset voltage (mV).
    pub c: f64,
    /// Post-spike recovery increment.
    pub d: f64,
    #[serde(default)]
    pub excitatory: bool,
}

impl NeuronParams {
    /// Regular spiking cortical cell, used for excitatory neurons.
    pub const fn regular_spiking() -> Self {
        NeuronParams {
            a: 0.02,
            b: 0.2,
            c: -65.0,
            d: 8.0,
            excitatory: true,
        }
    }

    /// Fast spiking interneuron, used for inhibitory neurons.
    pub const fn fast_spiking() -> Self {
        NeuronParams {
            a: 0.1,
            b: 0.2,
            c: -65.0,
            d: 2.0,
            excitatory: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(format!("a must be positive, got {}", self.a));
        }
        if !(self.c.is_finite() && self.c < SPIKE_THRESHOLD_MV) {
            return Err(format!("c must be below {SPIKE_THRESHOLD_MV} mV, got {}", self.c));
        }
        if !(self.b.is_finite() && self.d.is_finite()) {
            return Err("b and d must be finite".into());
        }
        Ok(())
    }
}

/// Time derivative of the membrane potential, in mV/ms.
#[inline]
pub fn dv_dt(v: f64, u: f64, current: f64) -> f64 {
    (0.04 * v + 5.0) * v + 140.0 - u + current
}

#[inline]
pub fn du_dt(params: &NeuronParams, v: f64, u: f64) -> f64 {
    params.a * (params.b * v - u)
}

/// Sub-stepping of the 1 ms simulation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integrator {
    pub substeps: u32,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator { substeps: 2 }
    }
}

/// Returned when an update leaves `v` or `u` non-finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonFinite {
    pub v: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    pub v: f64,
    pub u: f64,
    pub params: NeuronParams,
}

impl NeuronState {
    /// `v = -65 mV`, `u = b v`.
    pub fn at_rest(params: NeuronParams) -> Self {
        NeuronState {
            v: REST_MV,
            u: params.b * REST_MV,
            params,
        }
    }

    /// Advances one 1 ms timestep with constant input `current` and reports
    /// whether the neuron spiked. A spiking neuron leaves with `v == c`.
    #[inline]
    pub fn step(&mut self, current: f64, scheme: Integrator) -> Result<bool, NonFinite> {
        let h = 1.0 / f64::from(scheme.substeps.max(1));
        let (mut v, mut u) = (self.v, self.u);
        for _ in 0..scheme.substeps.max(1) {
            let dv = dv_dt(v, u, current);
            let du = du_dt(&self.params, v, u);
            v += h * dv;
            u += h * du;
        }
        if !(v.is_finite() && u.is_finite()) {
            return Err(NonFinite { v, u });
        }
        self.v = v;
        self.u = u;
        Ok(self.fire_if_above_threshold())
    }

    /// Threshold rule alone: if `v > 30 mV`, reset `v <- c`, `u <- u + d`.
    #[inline]
    pub fn fire_if_above_threshold(&mut self) -> bool {
        if self.v > SPIKE_THRESHOLD_MV {
            self.v = self.params.c;
            self.u += self.params.d;
            true
        } else {
            false
        }
    }
}
