use std::io::Write;

use crate::error::Result;
use crate::experiments::{mean_sd, par_map, train, ExperimentConfig, Labels};
use crate::plot::{line_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPoint {
    /// 1-based simulated second within a direction block.
    pub second: usize,
    pub novel_mean: f64,
    pub novel_sd: f64,
    pub repeating_mean: f64,
    pub repeating_sd: f64,
}

/// Per-second novel and repeating registrations, averaged over the eight
/// directions within a trial and then summarised across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySeries {
    pub points: Vec<StabilityPoint>,
    /// `per_trial[trial][second] = (novel, repeating)`, direction averages.
    pub per_trial: Vec<Vec<(f64, f64)>>,
    pub spiking_fraction: Vec<f64>,
}

impl StabilitySeries {
    fn from_trials(per_trial: Vec<Vec<(f64, f64)>>, spiking_fraction: Vec<f64>) -> Self {
        let seconds = per_trial.iter().map(Vec::len).min().unwrap_or(0);
        let points = (0..seconds)
            .map(|s| {
                let novel: Vec<f64> = per_trial.iter().map(|t| t[s].0).collect();
                let rep: Vec<f64> = per_trial.iter().map(|t| t[s].1).collect();
                let (novel_mean, novel_sd) = mean_sd(&novel);
                let (repeating_mean, repeating_sd) = mean_sd(&rep);
                StabilityPoint {
                    second: s + 1,
                    novel_mean,
                    novel_sd,
                    repeating_mean,
                    repeating_sd,
                }
            })
            .collect();
        StabilitySeries {
            points,
            per_trial,
            spiking_fraction,
        }
    }

    pub fn trials(&self) -> usize {
        self.per_trial.len()
    }

    /// First second in which mean repeating registrations exceed mean novel.
    pub fn crossover_second(&self) -> Option<usize> {
        self.points
            .iter()
            .find(|p| p.repeating_mean > p.novel_mean)
            .map(|p| p.second)
    }

    /// Least-squares slope of the mean repeating curve (per second).
    pub fn repeating_trend(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let xm = (n as f64 + 1.0) / 2.0;
        let ym = self.points.iter().map(|p| p.repeating_mean).sum::<f64>() / n as f64;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for p in &self.points {
            let dx = p.second as f64 - xm;
            sxy += dx * (p.repeating_mean - ym);
            sxx += dx * dx;
        }
        sxy / sxx
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["second", "novel_mean", "novel_sd", "repeating_mean", "repeating_sd"])?;
        for p in &self.points {
            out.write_record([
                p.second.to_string(),
                p.novel_mean.to_string(),
                p.novel_sd.to_string(),
                p.repeating_mean.to_string(),
                p.repeating_sd.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_svg(&self) -> String {
        let pick = |f: fn(&StabilityPoint) -> (f64, f64)| -> Vec<(f64, f64, f64)> {
            self.points
                .iter()
                .map(|p| {
                    let (m, sd) = f(p);
                    (p.second as f64, m, sd)
                })
                .collect()
        };
        line_chart(
            &format!("Registrations per second ({} trials)", self.trials()),
            "simulated second",
            "registrations / s",
            &[
                Series::new("novel", pick(|p| (p.novel_mean, p.novel_sd))),
                Series::new("repeating", pick(|p| (p.repeating_mean, p.repeating_sd))),
            ],
        )
    }
}

/// Trains `trials` independently seeded networks and averages the
/// per-second registration counts over directions.
pub fn run_stability(config: &ExperimentConfig, jobs: usize) -> Result<StabilitySeries> {
    config.validate()?;
    let runs = par_map(jobs, config.experiment.trials, |trial| {
        let c = config.for_trial(trial);
        let net = c.build_network()?;
        let run = train(&c, &net, Labels::True)?;
        let seconds = run.per_direction.iter().map(|s| s.per_second.len()).min().unwrap_or(0);
        let k = run.per_direction.len() as f64;
        let series = (0..seconds)
            .map(|s| {
                let (n, r) = run.per_direction.iter().fold((0u64, 0u64), |acc, st| {
                    (acc.0 + st.per_second[s].novel, acc.1 + st.per_second[s].repeating)
                });
                (n as f64 / k, r as f64 / k)
            })
            .collect::<Vec<_>>();
        Ok((series, run.spiking_fraction))
    })?;
    let (per_trial, fractions) = runs.into_iter().unzip();
    Ok(StabilitySeries::from_trials(per_trial, fractions))
}
