//! The four result pipelines: stability of registrations over time,
//! direction selectivity of codes, the prediction matrix, and the detection
//! overhead benchmark.
//!
//! Training shows the eight directions in blocks. The registry persists
//! across blocks while the network state is re-initialised at the start of
//! each block (unless `reset_between_directions` is off).

mod benchmark;
mod recognition;
mod selectivity;
mod stability;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, NetworkConfig, Simulation};
use crate::polycode::{CodeMap, DetectorConfig, Mode, PolycodeDetector, PolycodeRegistry};
use crate::recognizer::{classify, Classification};
use crate::stimulus::{drive, run_presentation, DirectionId, PresentationSchedule, PresentationStats, StimulusConfig, N_DIRECTIONS};

pub use benchmark::{run_benchmark, run_scaling, BenchmarkReport, BenchmarkTrial, ScalingReport};
pub use recognition::{classify_with, run_recognition, run_shuffled_control, RecognitionReport, ShuffledControl};
pub use selectivity::{run_selectivity, SelectivityHistogram};
pub use stability::{run_stability, StabilityPoint, StabilitySeries};

/// Durations and repetition counts shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    /// Training block length per direction (ms).
    pub direction_ms: u64,
    /// Evaluation presentation length (ms); one bar cycle when unset.
    pub eval_ms: Option<u64>,
    pub trials: usize,
    pub shuffle_trials: usize,
    pub benchmark_ms: u64,
    pub benchmark_trials: usize,
    pub reset_between_directions: bool,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            direction_ms: 10_000,
            eval_ms: None,
            trials: 3,
            shuffle_trials: 10,
            benchmark_ms: 10_000,
            benchmark_trials: 10,
            reset_between_directions: true,
        }
    }
}

/// Everything a run needs. Serialises to the sectioned config file format.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub stimulus: StimulusConfig,
    pub detector: DetectorConfig,
    pub experiment: ExperimentParams,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.stimulus.validate()?;
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if e.benchmark_trials == 0 {
            return Err(Error::config("benchmark_trials", "must be at least 1"));
        }
        if e.eval_ms == Some(0) {
            return Err(Error::config("eval_ms", "must be positive"));
        }
        if self.detector.policy.initial_repeats == 0 {
            return Err(Error::config("initial_repeats", "must be at least 1"));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.network.seed
    }

    pub fn eval_ms(&self) -> u64 {
        self.experiment.eval_ms.unwrap_or_else(|| self.stimulus.cycle_ms())
    }

    /// Same configuration with the network (and tag) seed of `trial`.
    pub fn for_trial(&self, trial: usize) -> ExperimentConfig {
        let mut c = *self;
        c.network.seed = self.network.seed.wrapping_add(trial as u64);
        c
    }

    pub fn build_network(&self) -> Result<Network> {
        Network::build(self.network)
    }

    pub fn detector_for(&self, net: &Network) -> Result<PolycodeDetector> {
        PolycodeDetector::for_network(net, self.network.seed, self.detector)
    }
}

/// Which label the registry sees while a direction is being shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Labels {
    True,
    /// Every bar cycle gets a label drawn uniformly at random.
    Shuffled { seed: u64 },
}

/// Result of one blocked pass over the eight directions.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub per_direction: Vec<PresentationStats>,
    /// Bit `d` set when the code was registered while direction `d` was shown.
    pub direction_sets: CodeMap<u8>,
    pub registry: PolycodeRegistry,
    pub spiking_fraction: f64,
}

/// Trains a fresh registry on all eight directions of `net`.
pub fn train(config: &ExperimentConfig, net: &Network, labels: Labels) -> Result<TrainingRun> {
    config.validate()?;
    let det_cfg = DetectorConfig {
        record_events: true,
        ..config.detector
    };
    let mut det = PolycodeDetector::for_network(net, config.network.seed, det_cfg)?;
    let mut sim = Simulation::new(net);
    let mut label_rng = match labels {
        Labels::Shuffled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Labels::True => None,
    };
    let mut per_direction = Vec::with_capacity(N_DIRECTIONS);
    let mut direction_sets: CodeMap<u8> = CodeMap::default();
    for (i, d) in DirectionId::all().enumerate() {
        if i == 0 || config.experiment.reset_between_directions {
            sim.reset_dynamics();
            det.reset_dynamics();
        }
        let stats = match &mut label_rng {
            None => {
                det.set_mode(Mode::Train(d));
                run_presentation(&mut sim, &mut det, &PresentationSchedule::new(d, config.experiment.direction_ms, config.stimulus))?
            }
            Some(rng) => shuffled_block(&mut sim, &mut det, config, d, rng)?,
        };
        for e in det.take_events() {
            *direction_sets.entry(e.code).or_default() |= 1 << d.index();
        }
        per_direction.push(stats);
    }
    Ok(TrainingRun {
        per_direction,
        direction_sets,
        spiking_fraction: sim.spiking_fraction(),
        registry: det.into_registry(),
    })
}

// Bar cycles start at phase 0, so chunking by cycle keeps the stimulus
// continuous.
fn shuffled_block(
    sim: &mut Simulation<'_>,
    det: &mut PolycodeDetector,
    config: &ExperimentConfig,
    direction: DirectionId,
    rng: &mut ChaCha8Rng,
) -> Result<PresentationStats> {
    let cycle = config.stimulus.cycle_ms();
    let total = config.experiment.direction_ms;
    let spikes_before = sim.total_spikes();
    let mut stats = PresentationStats::default();
    let mut mark = det.counts();
    let mut offset = 0;
    while offset < total {
        let chunk = (total - offset).min(cycle);
        let label = DirectionId::new(rng.random_range(0..N_DIRECTIONS)).expect("in range");
        det.set_mode(Mode::Train(label));
        let schedule = PresentationSchedule::new(direction, chunk, config.stimulus);
        drive(sim, det, &schedule, |local, d| {
            let t = offset + local;
            if (t + 1) % 1000 == 0 || t + 1 == total {
                let now = d.counts();
                stats.per_second.push(now.since(mark));
                mark = now;
            }
        })?;
        offset += chunk;
    }
    stats.spikes = sim.total_spikes() - spikes_before;
    stats.steps = total;
    Ok(stats)
}

/// Shows each direction once to a frozen registry, starting from fresh
/// network state every time.
pub fn evaluate(config: &ExperimentConfig, net: &Network, registry: &PolycodeRegistry) -> Result<Vec<Classification>> {
    config.validate()?;
    let mut det = config.detector_for(net)?;
    det.set_registry(registry.clone());
    det.set_mode(Mode::Evaluate);
    let mut sim = Simulation::new(net);
    let mut out = Vec::with_capacity(N_DIRECTIONS);
    for d in DirectionId::all() {
        sim.reset_dynamics();
        det.reset_dynamics();
        drive(&mut sim, &mut det, &PresentationSchedule::new(d, config.eval_ms(), config.stimulus), |_, _| {})?;
        let acts = det.take_activations();
        out.push(classify(det.registry(), &acts, &config.detector.policy));
    }
    Ok(out)
}

/// Runs `f(0..n)` on up to `jobs` threads and returns the results in index
/// order. The first error wins.
pub fn par_map<T, F>(jobs: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every index visited"))
        .collect()
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
