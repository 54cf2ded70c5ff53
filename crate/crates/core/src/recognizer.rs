//! Repeat-count training and log2 voting over the polycode registry.
//!
//! During training every registration of a code either creates a cell for
//! the current direction, reinforces it (label matches) or weakens it (label
//! differs). A weakened cell that reaches zero switches to the current
//! direction. Classification sums `log2(repeats)` per label over the codes
//! activated by one presentation, so codes seen only once vote nothing and
//! codes shared evenly between directions cancel out during training.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::polycode::{PolycodeRegistry, RegistryCell};
use crate::stimulus::{DirectionId, N_DIRECTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingPolicy {
    /// Repeat count of a freshly inserted or freshly relabelled cell.
    pub initial_repeats: u64,
    /// Vote once per distinct code instead of once per activation.
    pub distinct_codes_only: bool,
}

impl Default for TrainingPolicy {
    fn default() -> Self {
        TrainingPolicy {
            initial_repeats: 1,
            distinct_codes_only: false,
        }
    }
}

pub fn train_update(
    cell: Option<RegistryCell>,
    label: DirectionId,
    policy: &TrainingPolicy,
) -> RegistryCell {
    let fresh = RegistryCell {
        label,
        repeats: policy.initial_repeats.max(1),
    };
    match cell {
        None => fresh,
        Some(c) if c.label == label => RegistryCell {
            repeats: c.repeats.saturating_add(1),
            ..c
        },
        Some(c) if c.repeats <= 1 => fresh,
        Some(c) => RegistryCell {
            repeats: c.repeats - 1,
            ..c
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PredictionVector(pub [f64; N_DIRECTIONS]);

impl PredictionVector {
    pub fn scores(&self) -> &[f64; N_DIRECTIONS] {
        &self.0
    }

    /// Argmax, lowest index on ties. Returns the winner and whether the
    /// maximum was shared.
    pub fn argmax(&self) -> (DirectionId, bool) {
        let mut best = 0;
        for i in 1..N_DIRECTIONS {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        let ties = self.0.iter().filter(|&&s| s == self.0[best]).count();
        (DirectionId::new(best).expect("index < 8"), ties > 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub scores: PredictionVector,
    pub predicted: DirectionId,
    /// Every score is zero; `predicted` is direction 0 by convention.
    pub no_evidence: bool,
    pub tie: bool,
}

pub fn classify(registry: &PolycodeRegistry, activations: &[u64], policy: &TrainingPolicy) -> Classification {
    let mut scores = [0.0; N_DIRECTIONS];
    let mut vote = |code: u64| {
        if let Some(cell) = registry.get(code) {
            scores[cell.label.index()] += (cell.repeats as f64).log2();
        }
    };
    if policy.distinct_codes_only {
        let mut seen = HashSet::with_capacity(activations.len());
        activations.iter().filter(|c| seen.insert(**c)).for_each(|&c| vote(c));
    } else {
        activations.iter().for_each(|&c| vote(c));
    }
    let scores = PredictionVector(scores);
    let (predicted, tie) = scores.argmax();
    let no_evidence = scores.0.iter().all(|&s| s == 0.0);
    Classification {
        scores,
        predicted,
        no_evidence,
        tie: tie && !no_evidence,
    }
}
