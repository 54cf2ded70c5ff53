use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::OutEdge;
use crate::neuron::NeuronState;
use crate::polycode::registry::CodeMap;
use crate::polycode::{CodeWidth, PolycodeRegistry, TagSet};
use crate::recognizer::{train_update, TrainingPolicy};
use crate::stimulus::DirectionId;

/// Hooks the simulation loop calls every timestep.
///
/// Within one step the network calls, in order: `register` for every neuron
/// that spiked (ascending index), `settle` once with the updated membrane
/// states, `transmit` for every spiking neuron (ascending index), and
/// finally `end_step`.
pub trait Detector {
    /// `neuron` spiked at step `t`.
    fn register(&mut self, neuron: usize, t: u64);

    /// Membrane states after this step's update. Neurons that spiked have
    /// already been registered.
    fn settle(&mut self, neurons: &[NeuronState]);

    /// `pre` spiked at step `t`. Each pulse reaches `edge.post` at
    /// `t + edge.delay`. Implementations must pass every edge to `deliver`
    /// exactly once, in slice order.
    fn transmit(&mut self, pre: usize, edges: &[OutEdge], t: u64, deliver: impl FnMut(&OutEdge));

    /// Closes step `t`. Anything due at `t + 1` must be applied here.
    fn end_step(&mut self, t: u64);
}

/// Plain simulation, no detection work at all.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoDetector;

impl Detector for NoDetector {
    #[inline(always)]
    fn register(&mut self, _: usize, _: u64) {}
    #[inline(always)]
    fn settle(&mut self, _: &[NeuronState]) {}
    #[inline(always)]
    fn transmit(&mut self, _: usize, edges: &[OutEdge], _: u64, deliver: impl FnMut(&OutEdge)) {
        edges.iter().for_each(deliver);
    }
    #[inline(always)]
    fn end_step(&mut self, _: u64) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(with = "width_bits")]
    pub width: CodeWidth,
    /// Codes of non-spiking neurons below this potential are wiped (mV).
    pub reset_threshold_mv: f64,
    pub policy: TrainingPolicy,
    /// Keep a log of every registration (needed for selectivity and replay).
    pub record_events: bool,
    /// Store one pre-synaptic ordering per code to count collisions.
    pub track_witnesses: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            width: CodeWidth::W64,
            reset_threshold_mv: 0.0,
            policy: TrainingPolicy::default(),
            record_events: false,
            track_witnesses: false,
        }
    }
}

mod width_bits {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::polycode::CodeWidth;

    pub fn serialize<S: Serializer>(w: &CodeWidth, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(w.bits())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CodeWidth, D::Error> {
        let bits = u32::deserialize(d)?;
        if bits != 32 && bits != 64 {
            return Err(serde::de::Error::custom(format!("width must be 32 or 64, got {bits}")));
        }
        CodeWidth::new(bits).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Insert and train cells with the given label.
    Train(DirectionId),
    /// Registry frozen; activated codes are collected for classification.
    Evaluate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Registration {
    pub t: u64,
    pub neuron: u32,
    pub code: u64,
    pub novel: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegistrationCounts {
    pub novel: u64,
    pub repeating: u64,
}

impl RegistrationCounts {
    pub fn total(&self) -> u64 {
        self.novel + self.repeating
    }

    pub fn since(&self, earlier: RegistrationCounts) -> RegistrationCounts {
        RegistrationCounts {
            novel: self.novel - earlier.novel,
            repeating: self.repeating - earlier.repeating,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Witnesses {
    history: Vec<Vec<u32>>,
    first_seen: CodeMap<(u32, Vec<u32>)>,
    collisions: u64,
}

/// Per-neuron state. With a repeated width, `code` and `tag` hold the
/// value copied into every `width`-bit lane.
#[derive(Debug, Clone, Copy)]
struct Slot {
    code: u64,
    tag: u64,
}

/// Online polycode detection: per-neuron tags and codes, the delayed tag
/// queue, and the registry of activated codes.
#[derive(Debug, Clone)]
pub struct PolycodeDetector {
    config: DetectorConfig,
    tags: TagSet,
    slots: Vec<Slot>,
    /// Every neuron, possibly repeated, that received a tag since the last
    /// settle or stayed above threshold at it. Any other code already
    /// equals its tag.
    recent: Vec<u32>,
    /// Scratch for `settle`.
    held: Vec<u32>,
    /// Widths dividing 64 are stored repeated across the word, which turns
    /// the rotation within the width into a plain 64-bit rotation.
    repeated: bool,
    mask: u64,
    wrap: u32,
    /// Tag deliveries `(post, pre)` bucketed by arrival step modulo depth.
    queue: Vec<Vec<(u32, u32)>>,
    /// Every delay is one step: apply tags at transmission.
    direct: bool,
    registry: PolycodeRegistry,
    mode: Mode,
    counts: RegistrationCounts,
    events: Vec<Registration>,
    activations: Vec<u64>,
    witnesses: Option<Witnesses>,
}

impl PolycodeDetector {
    /// `max_delay` is the longest synaptic delay in steps; a value of 1 means
    /// every synapse has delay 1.
    pub fn new(tags: TagSet, max_delay: u32, all_unit_delay: bool, config: DetectorConfig) -> Result<Self> {
        if tags.width() != config.width {
            return Err(Error::config("width", "tag width differs from detector width"));
        }
        if max_delay == 0 {
            return Err(Error::config("delay_max", "must be at least 1"));
        }
        let n = tags.len();
        let repeated = 64 % config.width.bits() == 0;
        let witnesses = config.track_witnesses.then(|| Witnesses {
            history: vec![Vec::new(); n],
            ..Default::default()
        });
        Ok(PolycodeDetector {
            slots: Self::initial_slots(&tags, repeated),
            recent: Vec::new(),
            held: Vec::new(),
            repeated,
            mask: config.width.mask(),
            wrap: config.width.bits() - 1,
            queue: vec![Vec::new(); max_delay as usize + 1],
            direct: all_unit_delay,
            tags,
            config,
            registry: PolycodeRegistry::new(),
            mode: Mode::Train(DirectionId::default()),
            counts: RegistrationCounts::default(),
            events: Vec::new(),
            activations: Vec::new(),
            witnesses,
        })
    }

    fn initial_slots(tags: &TagSet, repeated: bool) -> Vec<Slot> {
        let lanes = if repeated { u64::MAX / tags.width().mask() } else { 1 };
        tags.as_slice()
            .iter()
            .map(|&t| Slot {
                code: t * lanes,
                tag: t * lanes,
            })
            .collect()
    }

    /// Builds tags from `tag_seed` and sizes the queue for `network`.
    pub fn for_network(network: &crate::network::Network, tag_seed: u64, config: DetectorConfig) -> Result<Self> {
        let tags = TagSet::generate(network.n_neurons(), config.width, tag_seed)?;
        let (min_d, max_d) = network.synapses().delay_bounds().unwrap_or((1, 1));
        Self::new(tags, max_d, min_d == 1 && max_d == 1, config)
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn width(&self) -> CodeWidth {
        self.config.width
    }

    pub fn tags(&self) -> &TagSet {
        &self.tags
    }

    /// Current code of `neuron`.
    #[inline]
    pub fn code(&self, neuron: usize) -> u64 {
        self.slots[neuron].code & self.mask
    }

    pub fn codes(&self) -> Vec<u64> {
        (0..self.slots.len()).map(|n| self.code(n)).collect()
    }

    pub fn registry(&self) -> &PolycodeRegistry {
        &self.registry
    }

    pub fn registry_mut(&mut self) -> &mut PolycodeRegistry {
        &mut self.registry
    }

    pub fn set_registry(&mut self, registry: PolycodeRegistry) {
        self.registry = registry;
    }

    pub fn into_registry(self) -> PolycodeRegistry {
        self.registry
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn counts(&self) -> RegistrationCounts {
        self.counts
    }

    pub fn events(&self) -> &[Registration] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<Registration> {
        std::mem::take(&mut self.events)
    }

    pub fn take_activations(&mut self) -> Vec<u64> {
        std::mem::take(&mut self.activations)
    }

    /// Registrations whose code was already held by a different pre-synaptic
    /// ordering. `None` unless witness tracking is on.
    pub fn collisions(&self) -> Option<u64> {
        self.witnesses.as_ref().map(|w| w.collisions)
    }

    /// Codes back to tags and pending tag deliveries dropped. The registry
    /// and counters are kept.
    pub fn reset_dynamics(&mut self) {
        for s in &mut self.slots {
            s.code = s.tag;
        }
        self.recent.clear();
        self.queue.iter_mut().for_each(Vec::clear);
        if let Some(w) = &mut self.witnesses {
            w.history.iter_mut().for_each(Vec::clear);
        }
    }

    #[inline]
    fn apply(&mut self, pre: usize, post: usize) {
        let tag = self.slots[pre].tag;
        let s = &mut self.slots[post];
        let x = s.code ^ tag;
        // `apply_tag` in either representation.
        s.code = if self.repeated {
            x.rotate_left(1)
        } else {
            ((x << 1) | (x >> self.wrap)) & self.mask
        };
        self.recent.push(post as u32);
        if let Some(w) = &mut self.witnesses {
            w.history[post].push(pre as u32);
        }
    }

    #[inline]
    fn wipe(&mut self, neuron: usize) {
        let s = &mut self.slots[neuron];
        s.code = s.tag;
        if let Some(w) = &mut self.witnesses {
            w.history[neuron].clear();
        }
    }

    /// Applies `pre`'s tag to each post code immediately, in list order.
    pub fn on_spike_transmit(&mut self, pre: usize, posts: &[usize]) -> Result<()> {
        let n = self.slots.len();
        if pre >= n || posts.iter().any(|&p| p >= n) {
            return Err(Error::Internal(format!("neuron index out of range (n = {n})")));
        }
        for &post in posts {
            self.apply(pre, post);
        }
        Ok(())
    }

    /// Registers the code of a neuron that just spiked, unless it still
    /// equals the neuron's tag (the spike was driven by external input
    /// only). Returns the registered code. The code is reset either way.
    pub fn on_spike_register(&mut self, neuron: usize, t: u64) -> Option<u64> {
        let s = self.slots[neuron];
        if s.code == s.tag {
            self.wipe(neuron);
            return None;
        }
        let code = s.code & self.mask;
        let novel = match self.mode {
            Mode::Train(label) => {
                let policy = &self.config.policy;
                let mut novel = false;
                self.registry
                    .update(code, |cell| {
                        novel = cell.is_none();
                        train_update(cell, label, policy)
                    });
                novel
            }
            Mode::Evaluate => {
                self.activations.push(code);
                !self.registry.contains(code)
            }
        };
        if novel {
            self.counts.novel += 1;
        } else {
            self.counts.repeating += 1;
        }
        if self.config.record_events {
            self.events.push(Registration {
                t,
                neuron: neuron as u32,
                code,
                novel,
            });
        }
        if let Some(w) = &mut self.witnesses {
            let order = std::mem::take(&mut w.history[neuron]);
            match w.first_seen.get(&code) {
                Some((post, seen)) if *post != neuron as u32 || *seen != order => w.collisions += 1,
                Some(_) => {}
                None => {
                    w.first_seen.insert(code, (neuron as u32, order));
                }
            }
        }
        self.wipe(neuron);
        Some(code)
    }

    /// Wipes the code back to the tag when `v` is below the reset threshold.
    pub fn causal_reset(&mut self, neuron: usize, v: f64) {
        if v < self.config.reset_threshold_mv {
            self.wipe(neuron);
        }
    }
}

impl Detector for PolycodeDetector {
    #[inline]
    fn register(&mut self, neuron: usize, t: u64) {
        self.on_spike_register(neuron, t);
    }

    fn settle(&mut self, neurons: &[NeuronState]) {
        let threshold = self.config.reset_threshold_mv;
        let mut held = std::mem::take(&mut self.held);
        let mut checked = std::mem::take(&mut self.recent);
        if self.witnesses.is_some() {
            for &n in &checked {
                if neurons[n as usize].v < threshold {
                    self.wipe(n as usize);
                } else {
                    held.push(n);
                }
            }
        } else {
            for &n in &checked {
                let below = neurons[n as usize].v < threshold;
                let s = &mut self.slots[n as usize];
                // Whether a neuron dips below threshold is hard to predict.
                s.code = std::hint::select_unpredictable(below, s.tag, s.code);
                if !below {
                    held.push(n);
                }
            }
        }
        checked.clear();
        self.held = checked;
        self.recent = held;
    }

    #[inline]
    fn transmit(&mut self, pre: usize, edges: &[OutEdge], t: u64, mut deliver: impl FnMut(&OutEdge)) {
        if !self.direct {
            let depth = self.queue.len() as u64;
            for e in edges {
                deliver(e);
                let slot = ((t + u64::from(e.delay)) % depth) as usize;
                self.queue[slot].push((e.post, pre as u32));
            }
        } else if self.witnesses.is_some() || !self.repeated {
            for e in edges {
                deliver(e);
                self.apply(pre, e.post as usize);
            }
        } else {
            // `apply` with everything loop-invariant held in locals.
            let tag = self.slots[pre].tag;
            let slots = &mut self.slots[..];
            self.recent.extend(edges.iter().map(|e| {
                deliver(e);
                let s = &mut slots[e.post as usize];
                s.code = (s.code ^ tag).rotate_left(1);
                e.post
            }));
        }
    }

    fn end_step(&mut self, t: u64) {
        if !self.direct {
            let slot = ((t + 1) % self.queue.len() as u64) as usize;
            let mut due = std::mem::take(&mut self.queue[slot]);
            for &(post, pre) in &due {
                self.apply(pre as usize, post as usize);
            }
            due.clear();
            self.queue[slot] = due;
        }
    }
}
