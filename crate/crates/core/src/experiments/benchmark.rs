use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::experiments::{mean_sd, ExperimentConfig};
use crate::network::{Network, Simulation};
use crate::plot::{line_chart, Series};
use crate::polycode::{Detector, Mode, NoDetector};
use crate::stimulus::{drive, DirectionId, PresentationSchedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkTrial {
    /// Wall time of the plain simulation (s).
    pub base_s: f64,
    /// Wall time of the same simulation with detection (s).
    pub detect_s: f64,
}

impl BenchmarkTrial {
    pub fn overhead_s(&self) -> f64 {
        self.detect_s - self.base_s
    }
}

/// Paired wall-clock timings. Absolute values depend on the machine.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub simulated_ms: u64,
    pub trials: Vec<BenchmarkTrial>,
    pub spikes: u64,
    pub registrations: u64,
    pub timer_resolution_s: f64,
    pub warning: Option<String>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

impl BenchmarkReport {
    pub fn median_base_s(&self) -> f64 {
        median(self.trials.iter().map(|t| t.base_s).collect())
    }

    pub fn median_overhead_s(&self) -> f64 {
        median(self.trials.iter().map(BenchmarkTrial::overhead_s).collect())
    }

    pub fn overhead_mean_sd(&self) -> (f64, f64) {
        mean_sd(&self.trials.iter().map(BenchmarkTrial::overhead_s).collect::<Vec<_>>())
    }

    /// Median overhead over median plain simulation time.
    pub fn overhead_fraction(&self) -> f64 {
        self.median_overhead_s() / self.median_base_s()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trial", "simulated_ms", "base_s", "detect_s", "overhead_s"])?;
        for (i, t) in self.trials.iter().enumerate() {
            out.write_record([
                i.to_string(),
                self.simulated_ms.to_string(),
                t.base_s.to_string(),
                t.detect_s.to_string(),
                t.overhead_s().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_svg(&self) -> String {
        let pts = |f: fn(&BenchmarkTrial) -> f64| -> Vec<(f64, f64, f64)> {
            self.trials
                .iter()
                .enumerate()
                .map(|(i, t)| (i as f64 + 1.0, f(t) * 1e3, 0.0))
                .collect()
        };
        line_chart(
            &format!(
                "Wall time per {} simulated s (machine dependent)",
                self.simulated_ms as f64 / 1e3
            ),
            "trial",
            "wall time (ms)",
            &[
                Series::new("plain", pts(|t| t.base_s)),
                Series::new("with detection", pts(|t| t.detect_s)),
                Series::new("overhead", pts(BenchmarkTrial::overhead_s)),
            ],
        )
    }
}

/// Smallest observable step of the monotonic clock.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..64 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

fn timed<D: Detector>(net: &Network, det: &mut D, schedule: &PresentationSchedule) -> Result<(f64, u64)> {
    let mut sim = Simulation::new(net);
    let start = Instant::now();
    drive(&mut sim, det, schedule, |_, _| {})?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok((elapsed, sim.total_spikes()))
}

fn pair(config: &ExperimentConfig, net: &Network, schedule: &PresentationSchedule, detect_first: bool) -> Result<(BenchmarkTrial, u64, u64)> {
    let mut det = config.detector_for(net)?;
    det.set_mode(Mode::Train(schedule.direction));
    let (base, detect, spikes);
    if detect_first {
        let (d, s) = timed(net, &mut det, schedule)?;
        let (b, _) = timed(net, &mut NoDetector, schedule)?;
        (base, detect, spikes) = (b, d, s);
    } else {
        let (b, _) = timed(net, &mut NoDetector, schedule)?;
        let (d, s) = timed(net, &mut det, schedule)?;
        (base, detect, spikes) = (b, d, s);
    }
    let trial = BenchmarkTrial {
        base_s: base,
        detect_s: detect,
    };
    Ok((trial, spikes, det.counts().total()))
}

/// `trials` paired runs of `simulated_ms` of direction 0, after one
/// discarded warm-up pair. The order within a pair alternates. Runs are
/// sequential on the calling thread.
pub fn run_benchmark(config: &ExperimentConfig, simulated_ms: u64, trials: usize) -> Result<BenchmarkReport> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::config("benchmark_trials", "must be at least 1"));
    }
    let net = config.build_network()?;
    let schedule = PresentationSchedule::new(DirectionId::default(), simulated_ms, config.stimulus);
    pair(config, &net, &schedule, false)?;
    let mut out = Vec::with_capacity(trials);
    let (mut spikes, mut registrations) = (0, 0);
    for i in 0..trials {
        let (t, s, r) = pair(config, &net, &schedule, i % 2 == 1)?;
        out.push(t);
        (spikes, registrations) = (s, r);
    }
    let res = timer_resolution().as_secs_f64();
    let warning = (res > 1e-3).then(|| format!("timer resolution {:.3} ms is coarser than 1 ms", res * 1e3));
    Ok(BenchmarkReport {
        simulated_ms,
        trials: out,
        spikes,
        registrations,
        timer_resolution_s: res,
        warning,
    })
}

/// Median overhead at several durations and the fitted growth factor per
/// doubling of the simulated time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub reports: Vec<BenchmarkReport>,
}

impl ScalingReport {
    /// `2^b` where `b` is the log-log slope of median overhead against
    /// simulated duration.
    pub fn doubling_ratio(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .reports
            .iter()
            .map(|r| ((r.simulated_ms as f64).ln(), r.median_overhead_s().max(1e-12).ln()))
            .collect();
        let n = pts.len() as f64;
        let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
        2f64.powf(sxy / sxx)
    }
}

pub fn run_scaling(config: &ExperimentConfig, durations_ms: &[u64], trials: usize) -> Result<ScalingReport> {
    if durations_ms.len() < 2 {
        return Err(Error::config("durations", "need at least two durations"));
    }
    let reports = durations_ms
        .iter()
        .map(|&d| run_benchmark(config, d, trials))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport { reports })
}
