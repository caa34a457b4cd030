use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FeatureRow, FeatureTable};

/// Per-channel affine map of a fitting set's `[min, max]` onto `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits on `rows` of `table`. Constant channels map to 0 with a warning.
    pub fn fit(table: &FeatureTable, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a scaler on zero rows".into()));
        }
        let c = table.layout.total_channels();
        let mut min = vec![f64::INFINITY; c];
        let mut max = vec![f64::NEG_INFINITY; c];
        for &r in rows {
            for (ch, &v) in table.rows[r].values.iter().enumerate() {
                min[ch] = min[ch].min(v);
                max[ch] = max[ch].max(v);
            }
        }
        for ch in 0..c {
            if max[ch] <= min[ch] {
                warn!(
                    "channel {} ({}) is constant over the fitting set; mapping it to 0",
                    ch, table.channel_names[ch]
                );
            }
        }
        Ok(Self { min, max })
    }

    /// Scales one row, clamping to `[-1, 1]`.
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    (2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn transform_table(&self, table: &FeatureTable) -> FeatureTable {
        FeatureTable {
            layout: table.layout.clone(),
            channel_names: table.channel_names.clone(),
            rows: table
                .rows
                .iter()
                .map(|r| FeatureRow {
                    values: self.transform(&r.values),
                    ..r.clone()
                })
                .collect(),
        }
    }
}

/// Fits on every row and scales the whole table.
pub fn scale_minmax(table: &FeatureTable) -> Result<FeatureTable> {
    let rows: Vec<usize> = (0..table.len()).collect();
    Ok(MinMaxScaler::fit(table, &rows)?.transform_table(table))
}

/// Moving average followed by decimation, applied within each segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    /// Seconds between input rows.
    pub period_s: f64,
    #[serde(default = "Smoothing::default_window")]
    pub window_s: f64,
    #[serde(default = "Smoothing::default_step")]
    pub step_s: f64,
    #[serde(default = "Smoothing::default_factor")]
    pub factor: usize,
}

impl Smoothing {
    fn default_window() -> f64 {
        30.0
    }
    fn default_step() -> f64 {
        15.0
    }
    fn default_factor() -> usize {
        8
    }

    /// 30 s window, 15 s step, keep every 8th averaged row.
    pub fn with_period(period_s: f64) -> Self {
        Self {
            period_s,
            window_s: Self::default_window(),
            step_s: Self::default_step(),
            factor: Self::default_factor(),
        }
    }

    fn to_rows(self) -> Result<(usize, usize)> {
        if self.period_s.is_nan() || self.period_s <= 0.0 {
            return Err(Error::InvalidArgument("sample period must be positive".into()));
        }
        if self.factor == 0 {
            return Err(Error::InvalidArgument("downsampling factor must be at least 1".into()));
        }
        if self.window_s < self.step_s {
            return Err(Error::InvalidArgument(format!(
                "window {} s is shorter than step {} s",
                self.window_s, self.step_s
            )));
        }
        let window = (self.window_s / self.period_s).round() as usize;
        let step = (self.step_s / self.period_s).round() as usize;
        if window == 0 || step == 0 {
            return Err(Error::InvalidArgument(
                "window and step must each span at least one row".into(),
            ));
        }
        Ok((window, step))
    }
}

/// Sliding mean of `window` rows advanced by `step` rows, then every
/// `factor`-th averaged row. Each output row carries the metadata of the
/// first row in its window. Segments shorter than the window are dropped
/// with a warning.
pub fn smooth_downsample(table: &FeatureTable, params: Smoothing) -> Result<FeatureTable> {
    let (window, step) = params.to_rows()?;
    let c = table.layout.total_channels();
    let mut out = Vec::new();
    let mut start = 0;
    while start < table.len() {
        let first = &table.rows[start];
        let end = (start..table.len())
            .find(|&i| table.rows[i].subject != first.subject || table.rows[i].segment != first.segment)
            .unwrap_or(table.len());
        let seg = &table.rows[start..end];
        if seg.len() < window {
            warn!(
                "segment {}/{} has {} rows, shorter than the {}-row window; skipped",
                first.subject,
                first.segment,
                seg.len(),
                window
            );
        } else {
            let averaged = (0..=seg.len() - window).step_by(step).map(|s| {
                let mut mean = vec![0.0; c];
                for r in &seg[s..s + window] {
                    mean.iter_mut().zip(&r.values).for_each(|(m, v)| *m += v);
                }
                mean.iter_mut().for_each(|m| *m /= window as f64);
                FeatureRow {
                    values: mean,
                    ..seg[s].clone()
                }
            });
            out.extend(averaged.step_by(params.factor));
        }
        start = end;
    }
    FeatureTable::new(table.layout.clone(), table.channel_names.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imstore::DatasetLayout;

    fn one_channel(values: &[f64]) -> FeatureTable {
        let layout = DatasetLayout::new([("A", 1)]).unwrap();
        let rows = values
            .iter()
            .map(|&v| FeatureRow {
                subject: "s".into(),
                segment: "v".into(),
                valence_raw: 0.0,
                arousal_raw: 0.0,
                values: vec![v],
            })
            .collect();
        FeatureTable::new(layout, vec!["a".into()], rows).unwrap()
    }

    fn column(t: &FeatureTable) -> Vec<f64> {
        t.rows.iter().map(|r| r.values[0]).collect()
    }

    #[test]
    fn endpoints_and_midpoint() {
        let t = scale_minmax(&one_channel(&[0.0, 5.0, 10.0])).unwrap();
        assert_eq!(column(&t), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_channel_maps_to_zero() {
        let t = scale_minmax(&one_channel(&[4.0, 4.0])).unwrap();
        assert_eq!(column(&t), vec![0.0, 0.0]);
    }

    #[test]
    fn test_rows_are_clamped() {
        let t = one_channel(&[0.0, 10.0, 20.0, -5.0]);
        let s = MinMaxScaler::fit(&t, &[0, 1]).unwrap();
        assert_eq!(s.transform(&[20.0]), vec![1.0]);
        assert_eq!(s.transform(&[-5.0]), vec![-1.0]);
        assert_eq!(s.transform(&[2.5]), vec![-0.5]);
    }

    #[test]
    fn constant_signal_smooths_to_constant() {
        let t = one_channel(&[3.0; 40]);
        let p = Smoothing {
            period_s: 1.0,
            window_s: 4.0,
            step_s: 2.0,
            factor: 3,
        };
        let out = smooth_downsample(&t, p).unwrap();
        // 19 windows, every third kept.
        assert_eq!(out.len(), 7);
        assert!(column(&out).iter().all(|&v| v == 3.0));
    }

    #[test]
    fn unit_window_is_identity() {
        let vals: Vec<f64> = (0..9).map(|i| i as f64 * 0.7 - 2.0).collect();
        let t = one_channel(&vals);
        let p = Smoothing {
            period_s: 1.0,
            window_s: 1.0,
            step_s: 1.0,
            factor: 1,
        };
        assert_eq!(smooth_downsample(&t, p).unwrap(), t);
    }

    #[test]
    fn ramp_sliding_means() {
        let vals: Vec<f64> = (1..=16).map(f64::from).collect();
        let p = Smoothing {
            period_s: 1.0,
            window_s: 4.0,
            step_s: 2.0,
            factor: 1,
        };
        let out = smooth_downsample(&one_channel(&vals), p).unwrap();
        assert_eq!(column(&out), vec![2.5, 4.5, 6.5, 8.5, 10.5, 12.5, 14.5]);
    }

    #[test]
    fn short_segment_is_skipped() {
        let p = Smoothing {
            period_s: 1.0,
            window_s: 30.0,
            step_s: 15.0,
            factor: 1,
        };
        assert!(smooth_downsample(&one_channel(&[1.0; 10]), p).unwrap().is_empty());
    }

    #[test]
    fn window_shorter_than_step_rejected() {
        let p = Smoothing {
            period_s: 1.0,
            window_s: 1.0,
            step_s: 2.0,
            factor: 1,
        };
        assert!(smooth_downsample(&one_channel(&[1.0; 10]), p).is_err());
    }
}
