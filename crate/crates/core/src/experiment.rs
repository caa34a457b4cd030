//! Experiment configuration and the train/infer loop over splits, plus the
//! storage report and dimension sweep built on it.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::amem::AssociativeMemory;
use crate::datapipe::{
    load_features, make_splits, save_features, segment_runs, smooth_downsample, synth_generate,
    FeatureTable, LabelTarget, MinMaxScaler, Smoothing, SplitKind, SynthSpec,
};
use crate::encoder::{EncodedSample, Encoder, FeatureSample, NgramState};
use crate::error::{Error, Result};
use crate::hv::{Hypervector, DEFAULT_DIM};
use crate::imstore::{analytic_metrics, DatasetLayout, Modality, ProviderMetrics, Strategy, VectorProvider};
use crate::seed::{self, Stream};

pub const MIN_DIM: usize = 64;
pub const NUM_CLASSES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fusion {
    #[default]
    Early,
    Late,
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fusion::Early => "early",
            Fusion::Late => "late",
        })
    }
}

impl FromStr for Fusion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "early" => Ok(Fusion::Early),
            "late" => Ok(Fusion::Late),
            _ => Err(Error::InvalidArgument(format!("unknown fusion {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}"))),
        }
    }
}

/// A preset name (`amigos`, `deap`) or an explicit modality list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayoutSpec {
    Preset(String),
    Explicit(Vec<Modality>),
}

impl LayoutSpec {
    pub fn resolve(&self) -> Result<DatasetLayout> {
        match self {
            LayoutSpec::Preset(name) => DatasetLayout::preset(name)
                .ok_or_else(|| Error::Config(format!("unknown layout preset {name:?}"))),
            LayoutSpec::Explicit(mods) => DatasetLayout::try_from(mods.clone()),
        }
    }
}

impl Default for LayoutSpec {
    fn default() -> Self {
        LayoutSpec::Preset("amigos".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataConfig {
    Csv {
        path: PathBuf,
        /// Expected layout; checked against the file header when present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layout: Option<LayoutSpec>,
    },
    Synth {
        #[serde(default)]
        layout: LayoutSpec,
        #[serde(default = "defaults::subjects")]
        subjects: usize,
        #[serde(default = "defaults::segments")]
        segments: usize,
        #[serde(default = "defaults::rows_per_segment")]
        rows_per_segment: usize,
        #[serde(default = "defaults::noise_p")]
        noise_p: f64,
        /// Data seed; the experiment seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Synth {
            layout: LayoutSpec::default(),
            subjects: defaults::subjects(),
            segments: defaults::segments(),
            rows_per_segment: defaults::rows_per_segment(),
            noise_p: defaults::noise_p(),
            seed: None,
        }
    }
}

mod defaults {
    pub fn seed() -> u64 {
        1
    }
    pub fn dim() -> usize {
        super::DEFAULT_DIM
    }
    pub fn strategy() -> crate::imstore::Strategy {
        crate::imstore::Strategy::Rule90
    }
    pub fn ngram() -> usize {
        3
    }
    pub fn split() -> crate::datapipe::SplitKind {
        crate::datapipe::SplitKind::LeaveOneSubjectOut
    }
    pub fn threshold() -> f64 {
        5.0
    }
    pub fn subjects() -> usize {
        8
    }
    pub fn segments() -> usize {
        32
    }
    pub fn rows_per_segment() -> usize {
        30
    }
    pub fn noise_p() -> f64 {
        0.15
    }
    pub fn late_ngram() -> usize {
        4
    }
}

/// Everything one run needs. Loaded from a TOML file, then overridden by
/// command-line flags; echoed verbatim into the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default = "defaults::strategy")]
    pub strategy: Strategy,
    #[serde(default)]
    pub fusion: Fusion,
    /// n-gram length for early fusion.
    #[serde(default = "defaults::ngram")]
    pub ngram: usize,
    /// Per-modality n-gram lengths for late fusion (4 each when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub late_ngram: Option<Vec<usize>>,
    #[serde(default = "defaults::split")]
    pub split: SplitKind,
    #[serde(default)]
    pub label: LabelTarget,
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<Smoothing>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: defaults::seed(),
            dim: defaults::dim(),
            strategy: defaults::strategy(),
            fusion: Fusion::default(),
            ngram: defaults::ngram(),
            late_ngram: None,
            split: defaults::split(),
            label: LabelTarget::default(),
            threshold: defaults::threshold(),
            data: DataConfig::default(),
            smoothing: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < MIN_DIM {
            return Err(Error::Config(format!("dim {} is below the minimum {MIN_DIM}", self.dim)));
        }
        if self.ngram == 0 {
            return Err(Error::Config("ngram must be at least 1".into()));
        }
        if let Some(ns) = &self.late_ngram {
            if ns.contains(&0) {
                return Err(Error::Config("late_ngram entries must be at least 1".into()));
            }
        }
        if !self.threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        if let Strategy::Hybrid { bank_size } = self.strategy {
            if bank_size < 3 {
                return Err(Error::Config(format!("hybrid bank size {bank_size} is below 3")));
            }
        }
        if let DataConfig::Synth { layout, noise_p, subjects, segments, .. } = &self.data {
            layout.resolve().map_err(|e| Error::Config(e.to_string()))?;
            if !(0.0..0.5).contains(noise_p) {
                return Err(Error::Config(format!("noise_p {noise_p} outside [0, 0.5)")));
            }
            if *subjects == 0 || segments < subjects {
                return Err(Error::Config("synthetic data needs at least one segment per subject".into()));
            }
        }
        if let Some(s) = &self.smoothing {
            if s.period_s.is_nan() || s.period_s <= 0.0 || s.factor == 0 || s.window_s < s.step_s {
                return Err(Error::Config("smoothing needs period_s > 0, factor >= 1 and window_s >= step_s".into()));
            }
        }
        Ok(())
    }

    /// Pins the synthetic data seed to the current experiment seed so later
    /// seed changes (sweeps) keep the same data.
    pub fn pin_data_seed(&mut self) {
        if let DataConfig::Synth { seed, .. } = &mut self.data {
            seed.get_or_insert(self.seed);
        }
    }

    pub fn synth_spec(&self) -> Result<Option<SynthSpec>> {
        Ok(match &self.data {
            DataConfig::Synth {
                layout,
                subjects,
                segments,
                rows_per_segment,
                noise_p,
                seed,
            } => Some(SynthSpec {
                layout: layout.resolve()?,
                subjects: *subjects,
                segments: *segments,
                rows_per_segment: *rows_per_segment,
                noise_p: *noise_p,
                seed: seed.unwrap_or(self.seed),
            }),
            DataConfig::Csv { .. } => None,
        })
    }

    /// Loads (or generates) the table and applies smoothing if configured.
    pub fn load_table(&self) -> Result<FeatureTable> {
        let table = match &self.data {
            DataConfig::Csv { path, layout } => {
                let schema = layout.as_ref().map(LayoutSpec::resolve).transpose()?;
                load_features(path, schema.as_ref())?
            }
            DataConfig::Synth { .. } => synth_generate(&self.synth_spec()?.expect("synth source"))?,
        };
        match self.smoothing {
            Some(params) => smooth_downsample(&table, params),
            None => Ok(table),
        }
    }

    fn late_ngrams(&self, layout: &DatasetLayout) -> Result<Vec<usize>> {
        let m = layout.num_modalities();
        match &self.late_ngram {
            None => Ok(vec![defaults::late_ngram(); m]),
            Some(ns) if ns.len() == m => Ok(ns.clone()),
            Some(ns) if ns.len() == 1 => Ok(vec![ns[0]; m]),
            Some(ns) => Err(Error::Config(format!(
                "late_ngram has {} entries for {m} modalities",
                ns.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub name: String,
    pub train_samples: usize,
    pub test_samples: usize,
    pub correct: usize,
    /// `None` when the fold produced no test n-grams.
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Fresh one-pass figures: vectors held, generations and channels for a
    /// single sample.
    pub stored_vectors: usize,
    pub vector_requests: u64,
    pub channels_served: u64,
    pub request_rate: f64,
    /// Generations across the whole run.
    pub total_vector_requests: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub channels: usize,
    pub modalities: Vec<Modality>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub folds: Vec<FoldReport>,
    pub mean_accuracy: Option<f64>,
    pub metrics: MetricsReport,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timing field zeroed, for reproducibility checks.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        copy.to_json()
    }

    /// One line per fold plus a trailing `mean` line.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "fold",
            "name",
            "train_samples",
            "test_samples",
            "correct",
            "accuracy",
            "strategy",
            "dim",
            "seed",
        ])?;
        let acc = |a: Option<f64>| a.map(|a| a.to_string()).unwrap_or_default();
        let (strategy, dim, seed) = (
            self.config.strategy.to_string(),
            self.config.dim.to_string(),
            self.config.seed.to_string(),
        );
        for f in &self.folds {
            w.write_record([
                f.fold.to_string(),
                f.name.clone(),
                f.train_samples.to_string(),
                f.test_samples.to_string(),
                f.correct.to_string(),
                acc(f.accuracy),
                strategy.clone(),
                dim.clone(),
                seed.clone(),
            ])?;
        }
        w.write_record([
            "mean".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            acc(self.mean_accuracy),
            strategy,
            dim,
            seed,
        ])?;
        csv_string(w)
    }
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Model settings for [`evaluate`].
#[derive(Clone, Debug, PartialEq)]
pub struct EvalParams {
    pub strategy: Strategy,
    pub dim: usize,
    pub seed: u64,
    pub fusion: Fusion,
    pub ngram: usize,
    pub late_ngram: Vec<usize>,
    pub split: SplitKind,
    pub label: LabelTarget,
    pub threshold: f64,
}

impl EvalParams {
    pub fn from_config(config: &ExperimentConfig, layout: &DatasetLayout) -> Result<Self> {
        Ok(Self {
            strategy: config.strategy,
            dim: config.dim,
            seed: config.seed,
            fusion: config.fusion,
            ngram: config.ngram,
            late_ngram: config.late_ngrams(layout)?,
            split: config.split,
            label: config.label,
            threshold: config.threshold,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub folds: Vec<FoldReport>,
    pub mean_accuracy: Option<f64>,
    pub total_vector_requests: u64,
}

/// The tie-break hypervector for an experiment seed.
pub fn tiebreak_for(seed: u64, dim: usize) -> Hypervector {
    Hypervector::random(dim, &mut seed::rng(seed, Stream::TieBreak))
}

struct Pipeline<'a> {
    params: &'a EvalParams,
    provider: VectorProvider,
    encoder: Encoder,
}

impl Pipeline<'_> {
    /// Encodes `rows` (already scaled, in `values`), resetting temporal state
    /// at every segment or class boundary.
    fn encode_rows(
        &mut self,
        table: &FeatureTable,
        rows: &[usize],
        values: &[Vec<f64>],
        classes: &[usize],
    ) -> Result<Vec<EncodedSample>> {
        let mut out = Vec::new();
        let layout_modalities = self.provider.layout().num_modalities();
        for run in segment_runs(table, rows, classes) {
            let mut early = NgramState::new(self.params.ngram)?;
            let mut late = self
                .params
                .late_ngram
                .iter()
                .map(|&n| NgramState::new(n))
                .collect::<Result<Vec<_>>>()?;
            debug_assert!(self.params.fusion == Fusion::Early || late.len() == layout_modalities);
            for i in run {
                let sample = FeatureSample {
                    values: &values[i],
                    index: rows[i],
                    label: classes[rows[i]],
                };
                let encoded = match self.params.fusion {
                    Fusion::Early => self.encoder.encode_early(&mut self.provider, sample, &mut early)?,
                    Fusion::Late => self.encoder.encode_late(&mut self.provider, sample, &mut late)?,
                };
                out.extend(encoded);
            }
        }
        Ok(out)
    }
}

/// Trains and tests one associative memory per fold of `params.split`.
pub fn evaluate(table: &FeatureTable, params: &EvalParams) -> Result<Evaluation> {
    if params.dim < MIN_DIM {
        return Err(Error::Config(format!("dim {} is below the minimum {MIN_DIM}", params.dim)));
    }
    if params.fusion == Fusion::Late && params.late_ngram.len() != table.layout.num_modalities() {
        return Err(Error::Config(format!(
            "late fusion needs {} n-gram lengths, got {}",
            table.layout.num_modalities(),
            params.late_ngram.len()
        )));
    }
    let classes = table.classes(params.label, params.threshold);
    let plan = make_splits(table, params.split)?;
    let tiebreak = tiebreak_for(params.seed, params.dim);
    let mut pipeline = Pipeline {
        params,
        provider: VectorProvider::new(params.strategy, &table.layout, params.dim, params.seed)?,
        encoder: Encoder::new(tiebreak.clone()),
    };

    let mut folds = Vec::with_capacity(plan.folds.len());
    for (k, fold) in plan.folds.iter().enumerate() {
        let report = (|| -> Result<FoldReport> {
            let scaler = MinMaxScaler::fit(table, &fold.train)?;
            let scale = |rows: &[usize]| -> Vec<Vec<f64>> {
                rows.iter().map(|&i| scaler.transform(&table.rows[i].values)).collect()
            };
            let train = pipeline.encode_rows(table, &fold.train, &scale(&fold.train), &classes)?;
            let am = AssociativeMemory::train(&train, NUM_CLASSES, &tiebreak)?;
            let test = pipeline.encode_rows(table, &fold.test, &scale(&fold.test), &classes)?;
            let mut correct = 0;
            for s in &test {
                if am.infer(&s.hv)?.class == s.label {
                    correct += 1;
                }
            }
            Ok(FoldReport {
                fold: k,
                name: fold.name.clone(),
                train_samples: train.len(),
                test_samples: test.len(),
                correct,
                accuracy: (!test.is_empty()).then(|| correct as f64 / test.len() as f64),
            })
        })()
        .map_err(|e| Error::Fold {
            fold: k,
            source: Box::new(e),
        })?;
        folds.push(report);
    }
    let scored: Vec<f64> = folds.iter().filter_map(|f| f.accuracy).collect();
    let mean_accuracy = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    Ok(Evaluation {
        folds,
        mean_accuracy,
        total_vector_requests: pipeline.provider.metrics().vector_requests,
    })
}

/// Loads the data named by `config`, evaluates it and assembles the report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let table = config.load_table()?;
    run_on_table(config, &table, start)
}

fn run_on_table(config: &ExperimentConfig, table: &FeatureTable, start: Instant) -> Result<RunReport> {
    let params = EvalParams::from_config(config, &table.layout)?;
    let eval = evaluate(table, &params)?;
    let pass: ProviderMetrics = VectorProvider::dry_run(config.strategy, &table.layout, config.dim, config.seed)?;
    Ok(RunReport {
        config: config.clone(),
        dataset: DatasetSummary {
            rows: table.len(),
            channels: table.layout.total_channels(),
            modalities: table.layout.modalities().to_vec(),
        },
        folds: eval.folds,
        mean_accuracy: eval.mean_accuracy,
        metrics: MetricsReport {
            stored_vectors: pass.stored_vectors,
            vector_requests: pass.vector_requests,
            channels_served: pass.channels_served,
            request_rate: pass.request_rate().unwrap_or(0.0),
            total_vector_requests: eval.total_vector_requests,
        },
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// One run per dimension. The data is loaded once; each point uses the
/// child seed `seed::derive(seed, dim)` for its vectors.
pub fn sweep_dim(config: &ExperimentConfig, dims: &[usize]) -> Result<Vec<RunReport>> {
    if dims.is_empty() {
        return Err(Error::Config("dimension list is empty".into()));
    }
    let mut base = config.clone();
    base.pin_data_seed();
    base.validate()?;
    for &d in dims {
        if d < MIN_DIM {
            return Err(Error::Config(format!("dim {d} is below the minimum {MIN_DIM}")));
        }
    }
    let table = base.load_table()?;
    dims.iter()
        .map(|&d| {
            let start = Instant::now();
            let point = ExperimentConfig {
                dim: d,
                seed: seed::derive(config.seed, d as u64),
                ..base.clone()
            };
            run_on_table(&point, &table, start)
        })
        .collect()
}

pub fn sweep_csv(reports: &[RunReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dim", "seed", "strategy", "mean_accuracy"])?;
    for r in reports {
        w.write_record([
            r.config.dim.to_string(),
            r.config.seed.to_string(),
            r.config.strategy.to_string(),
            r.mean_accuracy.map(|a| a.to_string()).unwrap_or_default(),
        ])?;
    }
    csv_string(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemRecord {
    pub dataset: String,
    pub strategy: String,
    pub stored_vectors: usize,
    /// Rule-90 generations to encode one sample.
    pub vector_requests: u64,
    pub channels: usize,
    /// Generations per channel while bursts are fully used.
    pub request_rate: f64,
    pub burst_requests: u64,
    pub burst_channels: u64,
    /// `vector_requests / channels`, partial final burst included.
    pub pass_request_rate: f64,
    /// Percent fewer generations per channel than plain rule-90; only for
    /// generative strategies.
    pub request_reduction_pct: Option<f64>,
}

/// Storage and request figures per `(layout, strategy)`; pure arithmetic,
/// no vectors are drawn. `strategies = None` means all six with the hybrid
/// bank at the rule-90 storage budget.
pub fn mem_report(layouts: &[(String, DatasetLayout)], strategies: Option<&[Strategy]>) -> Result<Vec<MemRecord>> {
    let mut out = Vec::new();
    for (name, layout) in layouts {
        let list = match strategies {
            Some(s) => s.to_vec(),
            None => Strategy::all_for(layout),
        };
        for strategy in list {
            let a = analytic_metrics(strategy, layout)?;
            let rate = a.request_rate();
            out.push(MemRecord {
                dataset: name.clone(),
                strategy: strategy.to_string(),
                stored_vectors: a.stored_vectors,
                vector_requests: a.requests_per_pass,
                channels: a.channels,
                request_rate: rate,
                burst_requests: a.burst_requests,
                burst_channels: a.burst_channels,
                pass_request_rate: a.pass_request_rate(),
                request_reduction_pct: strategy.is_generative().then_some((1.0 - rate) * 100.0),
            });
        }
    }
    Ok(out)
}

pub fn mem_report_csv(records: &[MemRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "strategy",
        "stored_vectors",
        "vector_requests",
        "channels",
        "request_rate",
        "pass_request_rate",
        "request_reduction_pct",
    ])?;
    for r in records {
        w.write_record([
            r.dataset.clone(),
            r.strategy.clone(),
            r.stored_vectors.to_string(),
            r.vector_requests.to_string(),
            r.channels.to_string(),
            format!("{:.4}", r.request_rate),
            format!("{:.4}", r.pass_request_rate),
            r.request_reduction_pct.map(|p| format!("{p:.2}")).unwrap_or_default(),
        ])?;
    }
    csv_string(w)
}

/// Writes a synthetic table in the feature-CSV schema.
pub fn gen_synth(spec: &SynthSpec, out: impl AsRef<Path>) -> Result<FeatureTable> {
    let table = synth_generate(spec)?;
    save_features(&table, out)?;
    Ok(table)
}
