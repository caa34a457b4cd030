//! `hdfusion` command-line runner.
//!
//! Exit status: 0 on success, 1 for invalid arguments or configuration,
//! 2 for unreadable or malformed data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdfusion::datapipe::{LabelTarget, SplitKind, SynthSpec};
use hdfusion::experiment::{
    gen_synth, mem_report, mem_report_csv, run, sweep_csv, sweep_dim, DataConfig, ExperimentConfig,
    Fusion, LayoutSpec,
};
use hdfusion::{DatasetLayout, Error, Strategy};

#[derive(Parser)]
#[command(name = "hdfusion", version, about = "Binary HDC emotion classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and test over the configured splits.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stored vectors and request rates per dataset and strategy.
    MemReport {
        /// Layout preset (amigos, deap); both when omitted.
        #[arg(long)]
        dataset: Vec<String>,
        /// Strategies to report; all six when omitted.
        #[arg(long)]
        strategy: Vec<Strategy>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// One run per dimension.
    SweepDim {
        #[command(flatten)]
        exp: ExpArgs,
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a synthetic feature CSV.
    GenSynth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "amigos")]
        layout: String,
        #[arg(long, default_value_t = 8)]
        subjects: usize,
        #[arg(long, default_value_t = 32)]
        segments: usize,
        #[arg(long, default_value_t = 30)]
        rows: usize,
        #[arg(long, default_value_t = 0.15)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExpArgs {
    /// TOML config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    /// unoptimized, shared_im, shared_fp, combinatorial, rule90 or hybrid:<bank>
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    fusion: Option<Fusion>,
    #[arg(long)]
    ngram: Option<usize>,
    #[arg(long)]
    label: Option<LabelTarget>,
    /// loso or holdout:<fraction>
    #[arg(long)]
    split: Option<SplitKind>,
    /// Feature CSV to use instead of synthetic data.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Layout preset for synthetic data, or the expected layout of --data.
    #[arg(long)]
    layout: Option<String>,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl ExpArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.strategy {
            cfg.strategy = v;
        }
        if let Some(v) = self.fusion {
            cfg.fusion = v;
        }
        if let Some(v) = self.ngram {
            cfg.ngram = v;
        }
        if let Some(v) = self.label {
            cfg.label = v;
        }
        if let Some(v) = self.split {
            cfg.split = v;
        }
        let layout = self.layout.clone().map(LayoutSpec::Preset);
        if let Some(path) = &self.data {
            cfg.data = DataConfig::Csv {
                path: path.clone(),
                layout,
            };
        } else if let Some(spec) = layout {
            match &mut cfg.data {
                DataConfig::Csv { layout, .. } => *layout = Some(spec),
                DataConfig::Synth { layout, .. } => *layout = spec,
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { exp, out } => {
            let report = run(&exp.config()?)?;
            log::info!(
                "mean accuracy {:?} over {} folds in {:.1} s",
                report.mean_accuracy,
                report.folds.len(),
                report.wall_time_s
            );
            match out.format.unwrap_or(Format::Json) {
                Format::Json => {
                    emit(out.out.as_deref(), &(report.to_json()? + "\n"))?;
                    if let Some(path) = &out.out {
                        fs::write(path.with_extension("csv"), report.to_csv()?)?;
                    }
                }
                Format::Csv => emit(out.out.as_deref(), &report.to_csv()?)?,
            }
        }
        Command::MemReport { dataset, strategy, out } => {
            let names = if dataset.is_empty() {
                vec!["amigos".to_string(), "deap".to_string()]
            } else {
                dataset
            };
            let layouts = names
                .into_iter()
                .map(|n| {
                    let layout = DatasetLayout::preset(&n)
                        .ok_or_else(|| Error::Config(format!("unknown dataset {n:?}")))?;
                    Ok((n.to_ascii_lowercase(), layout))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let strategies = (!strategy.is_empty()).then_some(strategy.as_slice());
            let records = mem_report(&layouts, strategies)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => serde_json::to_string_pretty(&records)? + "\n",
                Format::Csv => mem_report_csv(&records)?,
            };
            emit(out.out.as_deref(), &text)?;
        }
        Command::SweepDim { exp, dims, out } => {
            let reports = sweep_dim(&exp.config()?, &dims)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
                Format::Csv => sweep_csv(&reports)?,
            };
            emit(out.out.as_deref(), &text)?;
        }
        Command::GenSynth {
            out,
            layout,
            subjects,
            segments,
            rows,
            noise,
            seed,
        } => {
            let spec = SynthSpec {
                layout: LayoutSpec::Preset(layout).resolve()?,
                subjects,
                segments,
                rows_per_segment: rows,
                noise_p: noise,
                seed,
            };
            let table = gen_synth(&spec, &out)?;
            log::info!("wrote {} rows to {}", table.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
