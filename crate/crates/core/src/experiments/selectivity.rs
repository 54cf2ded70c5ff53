use std::io::Write;

use crate::error::Result;
use crate::experiments::{train, ExperimentConfig, Labels, TrainingRun};
use crate::plot::bar_chart;
use crate::polycode::CodeMap;
use crate::stimulus::N_DIRECTIONS;

/// `bins[k - 1]` counts the distinct codes registered under exactly `k`
/// directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectivityHistogram {
    pub bins: [u64; N_DIRECTIONS],
    /// Codes active for a pair of opposite directions and nothing else.
    pub opposite_pairs: u64,
}

impl SelectivityHistogram {
    pub fn from_sets(sets: &CodeMap<u8>) -> Self {
        let mut h = SelectivityHistogram::default();
        for &mask in sets.values() {
            let k = mask.count_ones() as usize;
            if k == 0 {
                continue;
            }
            h.bins[k - 1] += 1;
            if k == 2 && mask & (mask >> 4) != 0 {
                h.opposite_pairs += 1;
            }
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    pub fn count(&self, k: usize) -> u64 {
        self.bins[k - 1]
    }

    /// Most populated `k`; the smallest one on ties.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for k in 1..N_DIRECTIONS {
            if self.bins[k] > self.bins[best] {
                best = k;
            }
        }
        best + 1
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["directions", "codes"])?;
        for (i, c) in self.bins.iter().enumerate() {
            out.write_record([(i + 1).to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_svg(&self) -> String {
        let labels: Vec<String> = (1..=N_DIRECTIONS).map(|k| k.to_string()).collect();
        let values: Vec<f64> = self.bins.iter().map(|&c| c as f64).collect();
        bar_chart("Codes by number of active directions", "directions", "distinct codes", &labels, &values)
    }
}

impl From<&TrainingRun> for SelectivityHistogram {
    fn from(run: &TrainingRun) -> Self {
        SelectivityHistogram::from_sets(&run.direction_sets)
    }
}

/// One training pass over all eight directions, then the histogram of how
/// many directions each code was registered under.
pub fn run_selectivity(config: &ExperimentConfig) -> Result<SelectivityHistogram> {
    let net = config.build_network()?;
    let run = train(config, &net, Labels::True)?;
    Ok(SelectivityHistogram::from(&run))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::tests::small;

    #[test]
    fn bins_and_pairs() {
        let mut sets = CodeMap::default();
        sets.insert(1, 0b0000_0001);
        sets.insert(2, 0b0001_0001);
        sets.insert(3, 0b0000_0011);
        sets.insert(4, 0xff);
        let h = SelectivityHistogram::from_sets(&sets);
        assert_eq!(h.bins, [1, 2, 0, 0, 0, 0, 0, 1]);
        assert_eq!(h.opposite_pairs, 1);
        assert_eq!(h.mode(), 2);
        assert_eq!(h.total(), 4);
    }

    #[test]
    fn mode_ties_pick_smaller_k() {
        let h = SelectivityHistogram {
            bins: [3, 3, 0, 0, 0, 0, 0, 0],
            opposite_pairs: 0,
        };
        assert_eq!(h.mode(), 1);
    }

    #[test]
    fn sums_to_registry_size() {
        let c = small();
        let net = c.build_network().unwrap();
        let run = train(&c, &net, Labels::True).unwrap();
        let h = SelectivityHistogram::from(&run);
        assert_eq!(h.total() as usize, run.registry.len());
        assert_eq!(h, run_selectivity(&c).unwrap());
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        SelectivityHistogram::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
    }
}
