use std::path::PathBuf;

use hdfusion::datapipe::{load_features, SynthSpec};
use hdfusion::experiment::{
    gen_synth, run, sweep_csv, sweep_dim, DataConfig, ExperimentConfig, Fusion, LayoutSpec,
};
use hdfusion::imstore::{analytic_metrics, Modality};
use hdfusion::{DatasetLayout, Strategy};

fn small_synth(subjects: usize, layout: Vec<(&str, usize)>) -> DataConfig {
    synth_with_noise(subjects, layout, 0.1)
}

fn synth_with_noise(subjects: usize, layout: Vec<(&str, usize)>, noise_p: f64) -> DataConfig {
    DataConfig::Synth {
        layout: LayoutSpec::Explicit(
            layout
                .into_iter()
                .map(|(n, c)| Modality { name: n.into(), channels: c })
                .collect(),
        ),
        subjects,
        segments: subjects * 2,
        rows_per_segment: 10,
        noise_p,
        seed: None,
    }
}

fn golden_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: 7,
        dim: 512,
        strategy: Strategy::Hybrid { bank_size: 5 },
        data: small_synth(3, vec![("GSR", 3), ("ECG", 5)]),
        ..Default::default()
    }
}

/// Set `HDFUSION_BLESS=1` to rewrite the golden file after an intended
/// change to the report schema or the numerics.
#[test]
fn run_report_matches_golden_file() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/run_report.json");
    let got = run(&golden_config()).unwrap().to_json_without_timing().unwrap() + "\n";
    if std::env::var_os("HDFUSION_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file missing; run with HDFUSION_BLESS=1");
    assert_eq!(got, want);
}

#[test]
fn reported_metrics_match_analytic_formulas() {
    let base = ExperimentConfig {
        dim: 256,
        data: small_synth(2, vec![("A", 4), ("B", 6), ("C", 3)]),
        ..Default::default()
    };
    let layout = DatasetLayout::new([("A", 4), ("B", 6), ("C", 3)]).unwrap();
    for strategy in Strategy::all_for(&layout) {
        let report = run(&ExperimentConfig { strategy, ..base.clone() }).unwrap();
        let a = analytic_metrics(strategy, &layout).unwrap();
        assert_eq!(report.metrics.stored_vectors, a.stored_vectors, "{strategy}");
        assert_eq!(report.metrics.vector_requests, a.requests_per_pass, "{strategy}");
        assert_eq!(report.metrics.channels_served, 13);
        for f in &report.folds {
            assert!((0.0..=1.0).contains(&f.accuracy.unwrap()));
        }
    }
}

#[test]
fn single_channel_separable_classes_are_perfect() {
    let cfg = ExperimentConfig {
        dim: 1024,
        ngram: 1,
        data: synth_with_noise(2, vec![("A", 1)], 0.0),
        ..Default::default()
    };
    assert_eq!(run(&cfg).unwrap().mean_accuracy, Some(1.0));
}

#[test]
fn late_fusion_with_per_modality_ngrams() {
    let cfg = ExperimentConfig {
        dim: 1024,
        fusion: Fusion::Late,
        late_ngram: Some(vec![2, 4]),
        data: small_synth(2, vec![("A", 5), ("B", 7)]),
        ..Default::default()
    };
    let r = run(&cfg).unwrap();
    // Emission waits for the longest window: 10 - 4 + 1 per segment.
    assert_eq!(r.folds[0].test_samples, 2 * 7);
    let bad = ExperimentConfig {
        late_ngram: Some(vec![2, 4, 4]),
        ..cfg
    };
    assert!(run(&bad).is_err());
}

#[test]
fn sweep_handles_small_and_duplicate_dims() {
    let cfg = ExperimentConfig {
        data: small_synth(2, vec![("A", 3), ("B", 3)]),
        ..Default::default()
    };
    let reports = sweep_dim(&cfg, &[64, 512, 512]).unwrap();
    assert_eq!(reports.len(), 3);
    let strip = |i: usize| reports[i].to_json_without_timing().unwrap();
    assert_eq!(strip(1), strip(2));
    assert_ne!(reports[0].config.seed, reports[1].config.seed);
    let csv = sweep_csv(&reports).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("dim,seed,strategy,mean_accuracy\n64,"));
    assert!(sweep_dim(&cfg, &[]).is_err());
    assert!(sweep_dim(&cfg, &[63]).is_err());
}

#[test]
fn gen_synth_writes_loadable_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        layout: DatasetLayout::new([("A", 2), ("B", 2)]).unwrap(),
        subjects: 1,
        segments: 2,
        rows_per_segment: 5,
        noise_p: 0.1,
        seed: 3,
    };
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let table = gen_synth(&spec, &p1).unwrap();
    gen_synth(&spec, &p2).unwrap();
    let text = std::fs::read_to_string(&p1).unwrap();
    assert_eq!(text.lines().count(), 2 + 10);
    assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 4 + 4);
    assert_eq!(text, std::fs::read_to_string(&p2).unwrap());
    assert_eq!(load_features(&p1, None).unwrap(), table);
    assert!(gen_synth(&spec, dir.path().join("missing/x.csv")).is_err());
}

#[test]
fn csv_source_runs_like_synthetic_source() {
    let dir = tempfile::tempdir().unwrap();
    let synth = ExperimentConfig {
        dim: 512,
        data: small_synth(2, vec![("A", 4), ("B", 3)]),
        ..Default::default()
    };
    let path = dir.path().join("features.csv");
    gen_synth(&synth.synth_spec().unwrap().unwrap(), &path).unwrap();
    let from_csv = ExperimentConfig {
        data: DataConfig::Csv { path, layout: None },
        ..synth.clone()
    };
    let a = run(&synth).unwrap();
    let b = run(&from_csv).unwrap();
    assert_eq!(a.folds, b.folds);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, golden_config().to_toml_string().unwrap()).unwrap();
    assert_eq!(ExperimentConfig::from_file(&path).unwrap(), golden_config());
}
