use std::io::Write;

use crate::error::Result;
use crate::experiments::{evaluate, mean_sd, par_map, train, ExperimentConfig, Labels};
use crate::network::Network;
use crate::plot::heatmap;
use crate::polycode::PolycodeRegistry;
use crate::recognizer::Classification;
use crate::stimulus::{DirectionId, N_DIRECTIONS};

/// Row `i` is the prediction vector of the evaluation presentation of
/// direction `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionReport {
    pub rows: Vec<Classification>,
}

impl RecognitionReport {
    pub fn from_rows(rows: Vec<Classification>) -> Self {
        RecognitionReport { rows }
    }

    pub fn matrix(&self) -> Vec<[f64; N_DIRECTIONS]> {
        self.rows.iter().map(|c| c.scores.0).collect()
    }

    pub fn correct(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, c)| !c.no_evidence && c.predicted.index() == *i)
            .count()
    }

    pub fn accuracy(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.correct() as f64 / self.rows.len() as f64
    }

    /// Columns: true direction, the eight scores, prediction and flags.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["direction".to_string()];
        header.extend(DirectionId::all().map(|d| format!("score_{}", d.angle_deg())));
        header.extend(["predicted", "no_evidence", "tie"].map(String::from));
        out.write_record(&header)?;
        for (i, c) in self.rows.iter().enumerate() {
            let mut rec = vec![DirectionId::new(i).expect("row < 8").angle_deg().to_string()];
            rec.extend(c.scores.0.iter().map(|s| s.to_string()));
            rec.push(c.predicted.angle_deg().to_string());
            rec.push(c.no_evidence.to_string());
            rec.push(c.tie.to_string());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_svg(&self) -> String {
        let labels: Vec<String> = DirectionId::all().map(|d| d.to_string()).collect();
        heatmap(
            &format!("Prediction vectors ({}/{} correct)", self.correct(), self.rows.len()),
            "predicted direction",
            "presented direction",
            &labels,
            &labels,
            &self.matrix(),
        )
    }
}

/// Trains on all eight directions and evaluates each once. Returns the
/// report and the trained registry.
pub fn run_recognition(config: &ExperimentConfig) -> Result<(RecognitionReport, PolycodeRegistry)> {
    let net = config.build_network()?;
    let run = train(config, &net, Labels::True)?;
    let rows = evaluate(config, &net, &run.registry)?;
    Ok((RecognitionReport::from_rows(rows), run.registry))
}

/// Evaluates an existing registry against the network described by `config`.
pub fn classify_with(config: &ExperimentConfig, net: &Network, registry: &PolycodeRegistry) -> Result<RecognitionReport> {
    Ok(RecognitionReport::from_rows(evaluate(config, net, registry)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuffledControl {
    pub accuracies: Vec<f64>,
}

impl ShuffledControl {
    pub fn mean(&self) -> f64 {
        mean_sd(&self.accuracies).0
    }
}

/// Same pipeline with training labels drawn at random for every bar cycle.
/// Trial `i` uses the configured network and label seed `seed + i`.
pub fn run_shuffled_control(config: &ExperimentConfig, jobs: usize) -> Result<ShuffledControl> {
    config.validate()?;
    let net = config.build_network()?;
    let accuracies = par_map(jobs, config.experiment.shuffle_trials, |trial| {
        let labels = Labels::Shuffled {
            seed: config.seed() ^ 0x5368_7566 ^ (trial as u64).wrapping_mul(0x9E37_79B9),
        };
        let run = train(config, &net, labels)?;
        Ok(RecognitionReport::from_rows(evaluate(config, &net, &run.registry)?).accuracy())
    })?;
    Ok(ShuffledControl { accuracies })
}
