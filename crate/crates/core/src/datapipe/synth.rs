//! Two-class synthetic feature tables with a known sign structure.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imstore::DatasetLayout;
use crate::seed::{self, Stream};

use super::{FeatureRow, FeatureTable};

/// Ratings written for the two synthetic classes (threshold 5 separates
/// them).
pub const LOW_RATING: f64 = 3.0;
pub const HIGH_RATING: f64 = 7.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub layout: DatasetLayout,
    #[serde(default = "SynthSpec::default_subjects")]
    pub subjects: usize,
    pub segments: usize,
    pub rows_per_segment: usize,
    pub noise_p: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn default_subjects() -> usize {
        1
    }

    /// 32 segments of 30 rows across 8 subjects, 15% sign noise.
    pub fn benchmark(layout: DatasetLayout, seed: u64) -> Self {
        Self {
            layout,
            subjects: 8,
            segments: 32,
            rows_per_segment: 30,
            noise_p: 0.15,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.noise_p) {
            return Err(Error::InvalidArgument(format!(
                "noise_p {} outside [0, 0.5)",
                self.noise_p
            )));
        }
        if self.subjects == 0 || self.segments < self.subjects {
            return Err(Error::InvalidArgument(format!(
                "need at least one segment per subject ({} segments, {} subjects)",
                self.segments, self.subjects
            )));
        }
        Ok(())
    }
}

/// Per-class sign templates: class 0 is uniform random; class 1 flips a
/// random half of it, topped up so at least 60% of channels differ.
pub fn class_templates(channels: usize, seed: u64) -> [Vec<f64>; 2] {
    let mut rng = seed::rng(seed, Stream::SynthTemplates);
    let t0: Vec<f64> = (0..channels)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut flip: Vec<bool> = (0..channels).map(|_| rng.gen::<bool>()).collect();
    let min_diff = (channels * 3).div_ceil(5);
    let mut unflipped: Vec<usize> = (0..channels).filter(|&c| !flip[c]).collect();
    unflipped.shuffle(&mut rng);
    let missing = min_diff.saturating_sub(channels - unflipped.len());
    for &c in unflipped.iter().take(missing) {
        flip[c] = true;
    }
    let t1 = t0.iter().zip(&flip).map(|(&s, &f)| if f { -s } else { s }).collect();
    [t0, t1]
}

/// Segment `g` belongs to subject `g * subjects / segments` and has class
/// `g % 2`. Every row copies its class template, flips each sign with
/// probability `noise_p`, and draws magnitudes uniformly from `(0, 1]`.
pub fn synth_generate(spec: &SynthSpec) -> Result<FeatureTable> {
    spec.validate()?;
    let c = spec.layout.total_channels();
    let templates = class_templates(c, spec.seed);
    let mut rng = seed::rng(spec.seed, Stream::SynthRows);
    let mut rows = Vec::with_capacity(spec.segments * spec.rows_per_segment);
    for g in 0..spec.segments {
        let subject = g * spec.subjects / spec.segments;
        let class = g % 2;
        let rating = if class == 1 { HIGH_RATING } else { LOW_RATING };
        for _ in 0..spec.rows_per_segment {
            let values = templates[class]
                .iter()
                .map(|&sign| {
                    let s = if rng.gen_bool(spec.noise_p) { -sign } else { sign };
                    let magnitude = 1.0 - rng.gen::<f64>();
                    s * magnitude
                })
                .collect();
            rows.push(FeatureRow {
                subject: format!("S{subject:02}"),
                segment: format!("G{g:03}"),
                valence_raw: rating,
                arousal_raw: rating,
                values,
            });
        }
    }
    FeatureTable::new(
        spec.layout.clone(),
        FeatureTable::default_channel_names(&spec.layout),
        rows,
    )
}
