//! Feature tables and everything between a feature CSV and the encoder:
//! scaling, smoothing, label thresholds, splits, n-gram emission masks and
//! a synthetic two-class generator.

mod io;
mod preprocess;
mod split;
mod synth;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imstore::DatasetLayout;

pub use io::{load_features, save_features};
pub use preprocess::{scale_minmax, smooth_downsample, MinMaxScaler, Smoothing};
pub use split::{make_splits, Fold, SplitKind, SplitPlan};
pub use synth::{synth_generate, SynthSpec};

/// One time window of features with its provenance and raw ratings.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub subject: String,
    pub segment: String,
    pub valence_raw: f64,
    pub arousal_raw: f64,
    pub values: Vec<f64>,
}

/// Rows grouped by recording segment, time-ordered within each segment.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub layout: DatasetLayout,
    pub channel_names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(layout: DatasetLayout, channel_names: Vec<String>, rows: Vec<FeatureRow>) -> Result<Self> {
        let c = layout.total_channels();
        if channel_names.len() != c {
            return Err(Error::InvalidArgument(format!(
                "{} channel names for {c} channels",
                channel_names.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.values.len() != c) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} values, layout has {c} channels",
                r.values.len()
            )));
        }
        Ok(Self {
            layout,
            channel_names,
            rows,
        })
    }

    /// Default channel names `<modality>_<k>`, 1-based within each modality.
    pub fn default_channel_names(layout: &DatasetLayout) -> Vec<String> {
        layout
            .modalities()
            .iter()
            .flat_map(|m| (1..=m.channels).map(move |k| format!("{}_{k}", m.name)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Binary class per row for the chosen rating.
    pub fn classes(&self, target: LabelTarget, threshold: f64) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| binarize_label(target.raw(r), threshold))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelTarget {
    #[default]
    Valence,
    Arousal,
}

impl LabelTarget {
    pub fn raw(self, row: &FeatureRow) -> f64 {
        match self {
            LabelTarget::Valence => row.valence_raw,
            LabelTarget::Arousal => row.arousal_raw,
        }
    }
}

impl fmt::Display for LabelTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelTarget::Valence => "valence",
            LabelTarget::Arousal => "arousal",
        })
    }
}

impl FromStr for LabelTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "valence" => Ok(LabelTarget::Valence),
            "arousal" => Ok(LabelTarget::Arousal),
            _ => Err(Error::InvalidArgument(format!("unknown label {s:?}"))),
        }
    }
}

/// Class 1 (high) iff `raw > threshold`; a rating equal to the threshold is
/// low.
pub fn binarize_label(raw: f64, threshold: f64) -> usize {
    usize::from(raw > threshold)
}

/// Maximal runs of consecutive `rows` that share subject, segment and class.
/// Ranges index into `rows`.
pub fn segment_runs(table: &FeatureTable, rows: &[usize], classes: &[usize]) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        let boundary = i == rows.len() || {
            let (a, b) = (&table.rows[rows[i - 1]], &table.rows[rows[i]]);
            a.subject != b.subject
                || a.segment != b.segment
                || classes[rows[i - 1]] != classes[rows[i]]
        };
        if boundary && i > start {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}

/// Whether each of `rows` closes an n-gram window that stays inside one
/// segment and one class.
pub fn segment_ngram_mask(table: &FeatureTable, rows: &[usize], classes: &[usize], n: usize) -> Vec<bool> {
    let mut mask = vec![false; rows.len()];
    for run in segment_runs(table, rows, classes) {
        for (offset, i) in run.enumerate() {
            mask[i] = offset + 1 >= n.max(1);
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(segments: &[&str], n_values: usize) -> FeatureTable {
        let layout = DatasetLayout::new([("A", n_values)]).unwrap();
        let rows = segments
            .iter()
            .map(|s| FeatureRow {
                subject: "s1".into(),
                segment: s.to_string(),
                valence_raw: 1.0,
                arousal_raw: 1.0,
                values: vec![0.0; n_values],
            })
            .collect();
        FeatureTable::new(layout.clone(), FeatureTable::default_channel_names(&layout), rows).unwrap()
    }

    #[test]
    fn label_threshold_boundary() {
        assert_eq!(binarize_label(7.0, 5.0), 1);
        assert_eq!(binarize_label(5.0, 5.0), 0);
        assert_eq!(binarize_label(1.0, 5.0), 0);
    }

    #[test]
    fn mask_single_run() {
        let t = table(&["v"; 10], 1);
        let rows: Vec<_> = (0..10).collect();
        let mask = segment_ngram_mask(&t, &rows, &[0; 10], 3);
        assert_eq!(mask.iter().filter(|&&m| m).count(), 8);
        assert!(segment_ngram_mask(&t, &rows, &[0; 10], 1).iter().all(|&m| m));
    }

    #[test]
    fn mask_class_change() {
        let t = table(&["v"; 10], 1);
        let rows: Vec<_> = (0..10).collect();
        let classes = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let mask = segment_ngram_mask(&t, &rows, &classes, 3);
        let emitting: Vec<_> = (0..10).filter(|&i| mask[i]).collect();
        assert_eq!(emitting, vec![2, 3, 4, 7, 8, 9]);
    }

    #[test]
    fn mask_segment_change() {
        let t = table(&["a", "a", "a", "b", "b", "b", "b"], 1);
        let rows: Vec<_> = (0..7).collect();
        let mask = segment_ngram_mask(&t, &rows, &[0; 7], 2);
        assert_eq!(mask, vec![false, true, true, false, true, true, true]);
        let runs = segment_runs(&t, &rows, &[0; 7]);
        assert_eq!(runs, vec![0..3, 3..7]);
    }

    #[test]
    fn run_lengths_bound_emissions() {
        let t = table(&["a", "a", "b", "b", "b", "b", "b", "c"], 1);
        let rows: Vec<_> = (0..8).collect();
        for n in 1..=4 {
            let mask = segment_ngram_mask(&t, &rows, &[0; 8], n);
            let expected: usize = [2usize, 5, 1].iter().map(|&l| (l + 1).saturating_sub(n)).sum();
            assert_eq!(mask.iter().filter(|&&m| m).count(), expected);
        }
    }
}
