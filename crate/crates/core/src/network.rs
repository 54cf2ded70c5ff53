//! Recurrent network construction and the clocked simulation loop.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{Integrator, NeuronParams, NeuronState};
use crate::polycode::Detector;
use crate::stimulus::{StimulusFrame, GRID_PIXELS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl Gaussian {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Gaussian { mean, sd }
    }
}

/// Weight distribution for one source role. Draws that land on the wrong
/// side of zero are redrawn; after 64 failed redraws the weight is clamped to
/// +-0.01 so the sign always follows the source role.
#[derive(Debug, Clone, Copy)]
pub struct WeightSampler {
    normal: Normal<f64>,
    positive: bool,
}

impl WeightSampler {
    pub fn new(dist: Gaussian, positive: bool) -> Result<Self> {
        let normal = Normal::new(dist.mean, dist.sd)
            .map_err(|e| Error::config(if positive { "weight_exc" } else { "weight_inh" }, e.to_string()))?;
        Ok(WeightSampler { normal, positive })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        for _ in 0..64 {
            let w = self.normal.sample(rng);
            if (self.positive && w > 0.0) || (!self.positive && w < 0.0) {
                return w;
            }
        }
        if self.positive {
            0.01
        } else {
            -0.01
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_neurons: usize,
    pub n_excitatory: usize,
    pub n_inhibitory: usize,
    /// Connection probability C; the network gets `round(N^2 C)` synapses.
    pub connection_prob: f64,
    pub weight_exc: Gaussian,
    pub weight_inh: Gaussian,
    /// Integer synaptic delays in ms, drawn uniformly from `[delay_min, delay_max]`.
    pub delay_min: u32,
    pub delay_max: u32,
    /// Current injected for a pixel of intensity 1.
    pub input_scale: f64,
    pub seed: u64,
    pub excitatory: NeuronParams,
    pub inhibitory: NeuronParams,
    pub integrator: Integrator,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_neurons: 320,
            n_excitatory: 256,
            n_inhibitory: 64,
            connection_prob: 0.07,
            weight_exc: Gaussian::new(6.0, 0.5),
            weight_inh: Gaussian::new(-5.0, 0.5),
            delay_min: 1,
            delay_max: 1,
            input_scale: 20.0,
            seed: 1,
            excitatory: NeuronParams::regular_spiking(),
            inhibitory: NeuronParams::fast_spiking(),
            integrator: Integrator::default(),
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_excitatory + self.n_inhibitory != self.n_neurons {
            return Err(Error::config(
                "n_neurons",
                format!(
                    "must equal n_excitatory + n_inhibitory ({} + {})",
                    self.n_excitatory, self.n_inhibitory
                ),
            ));
        }
        if self.n_neurons == 0 {
            return Err(Error::config("n_neurons", "must be positive"));
        }
        if !(self.connection_prob > 0.0 && self.connection_prob <= 1.0) {
            return Err(Error::config(
                "connection_prob",
                format!("must be in (0, 1], got {}", self.connection_prob),
            ));
        }
        if self.delay_min < 1 || self.delay_min > self.delay_max {
            return Err(Error::config(
                "delay_min",
                format!("need 1 <= delay_min <= delay_max, got [{}, {}]", self.delay_min, self.delay_max),
            ));
        }
        if !(self.input_scale.is_finite() && self.input_scale >= 0.0) {
            return Err(Error::config("input_scale", "must be finite and non-negative"));
        }
        for (field, g) in [("weight_exc", self.weight_exc), ("weight_inh", self.weight_inh)] {
            if !(g.mean.is_finite() && g.sd.is_finite() && g.sd >= 0.0) {
                return Err(Error::config(field, "mean and sd must be finite, sd >= 0"));
            }
        }
        self.excitatory
            .validate()
            .map_err(|r| Error::config("excitatory", r))?;
        self.inhibitory
            .validate()
            .map_err(|r| Error::config("inhibitory", r))?;
        if self.integrator.substeps == 0 {
            return Err(Error::config("integrator", "substeps must be at least 1"));
        }
        if self.n_neurons < 2 && self.synapse_count() > 0 {
            return Err(Error::config("n_neurons", "need two neurons for a synapse without self-loops"));
        }
        Ok(())
    }

    pub fn synapse_count(&self) -> usize {
        let n = self.n_neurons as f64;
        (n * n * self.connection_prob).round() as usize
    }

    pub fn params_of(&self, neuron: usize) -> NeuronParams {
        if neuron < self.n_excitatory {
            NeuronParams {
                excitatory: true,
                ..self.excitatory
            }
        } else {
            NeuronParams {
                excitatory: false,
                ..self.inhibitory
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synapse {
    pub pre: u32,
    pub post: u32,
    pub weight: f64,
    pub delay: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynapseTable {
    synapses: Vec<Synapse>,
}

impl SynapseTable {
    pub fn new(synapses: Vec<Synapse>) -> Self {
        SynapseTable { synapses }
    }

    pub fn len(&self) -> usize {
        self.synapses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synapses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Synapse> {
        self.synapses.iter()
    }

    pub fn as_slice(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn delay_bounds(&self) -> Option<(u32, u32)> {
        let min = self.synapses.iter().map(|s| s.delay).min()?;
        let max = self.synapses.iter().map(|s| s.delay).max()?;
        Some((min, max))
    }

    /// Little-endian dump of every field, for byte-level comparisons.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.synapses.len() * 20);
        for s in &self.synapses {
            out.extend_from_slice(&s.pre.to_le_bytes());
            out.extend_from_slice(&s.post.to_le_bytes());
            out.extend_from_slice(&s.weight.to_bits().to_le_bytes());
            out.extend_from_slice(&s.delay.to_le_bytes());
        }
        out
    }
}

/// One outgoing synapse as stored per source neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutEdge {
    pub post: u32,
    pub delay: u32,
    pub weight: f64,
}

/// Static structure: neuron parameters and connectivity.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    synapses: SynapseTable,
    offsets: Vec<usize>,
    edges: Vec<OutEdge>,
}

impl Network {
    pub fn build(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_neurons;
        let exc = WeightSampler::new(config.weight_exc, true)?;
        let inh = WeightSampler::new(config.weight_inh, false)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let count = config.synapse_count();
        let mut synapses = Vec::with_capacity(count);
        for _ in 0..count {
            let pre = rng.random_range(0..n);
            let post = loop {
                let p = rng.random_range(0..n);
                if p != pre {
                    break p;
                }
            };
            let delay = rng.random_range(config.delay_min..=config.delay_max);
            let weight = if pre < config.n_excitatory {
                exc.sample(&mut rng)
            } else {
                inh.sample(&mut rng)
            };
            synapses.push(Synapse {
                pre: pre as u32,
                post: post as u32,
                weight,
                delay,
            });
        }
        Self::with_synapses(config, SynapseTable::new(synapses))
    }

    /// Network with an explicit synapse table. The table's delays must lie
    /// in `[1, config.delay_max]`.
    pub fn with_synapses(config: NetworkConfig, synapses: SynapseTable) -> Result<Self> {
        let n = config.n_neurons;
        if config.n_excitatory + config.n_inhibitory != n {
            return Err(Error::config("n_neurons", "must equal n_excitatory + n_inhibitory"));
        }
        for s in synapses.iter() {
            if s.pre as usize >= n || s.post as usize >= n {
                return Err(Error::Input(format!("synapse {}->{} out of range", s.pre, s.post)));
            }
            if s.delay < 1 || s.delay > config.delay_max {
                return Err(Error::Input(format!("synapse delay {} outside [1, {}]", s.delay, config.delay_max)));
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for s in synapses.iter() {
            offsets[s.pre as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut edges = vec![
            OutEdge {
                post: 0,
                delay: 1,
                weight: 0.0
            };
            synapses.len()
        ];
        for s in synapses.iter() {
            let slot = &mut fill[s.pre as usize];
            edges[*slot] = OutEdge {
                post: s.post,
                delay: s.delay,
                weight: s.weight,
            };
            *slot += 1;
        }
        Ok(Network {
            config,
            synapses,
            offsets,
            edges,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn n_neurons(&self) -> usize {
        self.config.n_neurons
    }

    pub fn synapses(&self) -> &SynapseTable {
        &self.synapses
    }

    pub fn out_degree(&self, neuron: usize) -> usize {
        self.offsets[neuron + 1] - self.offsets[neuron]
    }

    /// Outgoing `(post, weight, delay)` triples in synapse-table order.
    pub fn outgoing(&self, neuron: usize) -> impl Iterator<Item = (usize, f64, u32)> + '_ {
        self.edges[self.offsets[neuron]..self.offsets[neuron + 1]]
            .iter()
            .map(|e| (e.post as usize, e.weight, e.delay))
    }

    /// Longest delay the simulation ring must hold.
    pub fn max_delay(&self) -> u32 {
        self.config.delay_max.max(1)
    }

    pub fn initial_states(&self) -> Vec<NeuronState> {
        (0..self.n_neurons())
            .map(|i| NeuronState::at_rest(self.config.params_of(i)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeEvent {
    pub t: u64,
    pub neuron: u32,
}

/// Dynamic state of one run over a [`Network`].
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    net: &'a Network,
    t: u64,
    neurons: Vec<NeuronState>,
    /// `depth` rows of `n` accumulators; row `t % depth` feeds step `t`.
    pending: Vec<f64>,
    depth: usize,
    last_input: Vec<f64>,
    spikes: Vec<usize>,
    spike_log: Option<Vec<SpikeEvent>>,
    total_spikes: u64,
    steps: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(net: &'a Network) -> Self {
        let n = net.n_neurons();
        let depth = net.max_delay() as usize + 1;
        Simulation {
            net,
            t: 0,
            neurons: net.initial_states(),
            pending: vec![0.0; depth * n],
            depth,
            last_input: vec![0.0; n],
            spikes: Vec::new(),
            spike_log: None,
            total_spikes: 0,
            steps: 0,
        }
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn neurons(&self) -> &[NeuronState] {
        &self.neurons
    }

    pub fn neurons_mut(&mut self) -> &mut [NeuronState] {
        &mut self.neurons
    }

    /// Total current each neuron integrated in the most recent step.
    pub fn last_input(&self) -> &[f64] {
        &self.last_input
    }

    /// Current already scheduled for step `t` (zero outside the ring).
    pub fn pending_current(&self, t: u64, neuron: usize) -> f64 {
        if t < self.t || t >= self.t + self.depth as u64 {
            return 0.0;
        }
        self.pending[self.row(t) + neuron]
    }

    pub fn ring_depth(&self) -> usize {
        self.depth
    }

    pub fn enable_spike_log(&mut self) {
        self.spike_log.get_or_insert_with(Vec::new);
    }

    pub fn spike_log(&self) -> Option<&[SpikeEvent]> {
        self.spike_log.as_deref()
    }

    pub fn total_spikes(&self) -> u64 {
        self.total_spikes
    }

    /// Mean fraction of neurons spiking per step since construction.
    pub fn spiking_fraction(&self) -> f64 {
        if self.steps == 0 {
            return 0.0;
        }
        self.total_spikes as f64 / (self.steps as f64 * self.net.n_neurons() as f64)
    }

    /// Membranes to rest and pending currents dropped. Time keeps running so
    /// the spike log stays ordered.
    pub fn reset_dynamics(&mut self) {
        self.neurons = self.net.initial_states();
        self.pending.fill(0.0);
    }

    #[inline]
    fn row(&self, t: u64) -> usize {
        (t % self.depth as u64) as usize * self.net.n_neurons()
    }

    /// Adds `current` to `neuron`'s input for the coming step.
    pub fn inject_current(&mut self, neuron: usize, current: f64) -> Result<()> {
        if neuron >= self.net.n_neurons() {
            return Err(Error::Input(format!("neuron {neuron} out of range")));
        }
        if !current.is_finite() {
            return Err(Error::Input(format!("non-finite current {current}")));
        }
        let row = self.row(self.t);
        self.pending[row + neuron] += current;
        Ok(())
    }

    /// Pixel `k` (row-major) drives excitatory neuron `k` with
    /// `input_scale * pixel` for the coming step.
    pub fn inject_input(&mut self, frame: &StimulusFrame) -> Result<()> {
        frame.validate()?;
        if self.net.config.n_excitatory < GRID_PIXELS {
            return Err(Error::Input(format!(
                "{} excitatory neurons cannot take a {GRID_PIXELS}-pixel frame",
                self.net.config.n_excitatory
            )));
        }
        let scale = self.net.config.input_scale;
        let row = self.row(self.t);
        for (k, &p) in frame.pixels().iter().enumerate() {
            self.pending[row + k] += scale * p;
        }
        Ok(())
    }

    /// Advances one millisecond and returns the neurons that spiked, in
    /// ascending order.
    ///
    /// Membranes are updated with the accumulated currents and spiking
    /// neurons reset. Spiking neurons are registered, the detector sees the
    /// new membrane states, and then every spike sends its weight and tag
    /// along each outgoing synapse to arrive `delay` steps later.
    /// Registration and the sub-threshold wipe touch disjoint neurons and
    /// neither reads what transmission writes, so this ordering is
    /// equivalent to transmit-register-wipe with tags applied on arrival.
    pub fn step<D: Detector>(&mut self, detector: &mut D) -> Result<&[usize]> {
        let n = self.net.n_neurons();
        let t = self.t;
        let scheme = self.net.config.integrator;
        let row = self.row(t);
        let Simulation {
            net,
            neurons,
            pending,
            depth,
            last_input,
            spikes,
            spike_log,
            ..
        } = self;
        integrate(neurons, &mut pending[row..row + n], last_input, spikes, scheme, t)?;
        for &i in spikes.iter() {
            detector.register(i, t);
        }
        detector.settle(neurons);
        let depth = *depth as u64;
        for &i in spikes.iter() {
            let out = &net.edges[net.offsets[i]..net.offsets[i + 1]];
            detector.transmit(i, out, t, |e| {
                let arrival = t + u64::from(e.delay);
                let slot = (arrival % depth) as usize * n;
                pending[slot + e.post as usize] += e.weight;
            });
        }
        if let Some(log) = spike_log {
            log.extend(spikes.iter().map(|&i| SpikeEvent { t, neuron: i as u32 }));
        }
        detector.end_step(t);
        self.total_spikes += self.spikes.len() as u64;
        self.steps += 1;
        self.t += 1;
        Ok(&self.spikes)
    }
}

/// Advances every membrane by one step on the given input, draining it, and
/// lists the neurons that spiked. Kept out of line so that the plain and
/// detecting simulations run the same machine code here.
#[inline(never)]
fn integrate(
    neurons: &mut [NeuronState],
    input: &mut [f64],
    last_input: &mut [f64],
    spikes: &mut Vec<usize>,
    scheme: Integrator,
    t: u64,
) -> Result<()> {
    spikes.clear();
    for (i, ((neuron, input), last)) in neurons.iter_mut().zip(input.iter_mut()).zip(last_input.iter_mut()).enumerate() {
        let drive = std::mem::take(input);
        *last = drive;
        match neuron.step(drive, scheme) {
            Ok(true) => spikes.push(i),
            Ok(false) => (),
            Err(nf) => {
                return Err(Error::Divergence {
                    neuron: i,
                    t,
                    v: nf.v,
                    u: nf.u,
                })
            }
        }
    }
    Ok(())
}

/// Writes `time_ms,neuron_id` rows.
pub fn write_spike_log<W: Write>(events: &[SpikeEvent], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_ms", "neuron_id"])?;
    for e in events {
        out.write_record([e.t.to_string(), e.neuron.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
